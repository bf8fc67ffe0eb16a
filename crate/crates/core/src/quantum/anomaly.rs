//! The ε-regularized anomaly Â_ε = (1 + ½ r∂_r)V_ε = −(g/2) ε²/(r² + ε²)² paired
//! with radial densities, and its ε → 0 limit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::quad::{integrate_to_infinity, neville};
use crate::quantum::evolve::QuantumRun;
use crate::quantum::radial::RadialWavefunction;

pub fn quantum_anomaly_density(r: f64, g: f64, epsilon: f64) -> f64 {
    let s = r * r + epsilon * epsilon;
    -0.5 * g * epsilon * epsilon / (s * s)
}

/// Spherically symmetric three-dimensional profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QuantumProfile {
    /// ψ = N e^{−r²/2σ²}, normalized.
    Regular { sigma: f64 },
    /// ψ = c r^{−1/2} e^{−r²/2σ²} with χ(0) = 1 and c² = 1/(2πσ²).
    Singular { sigma: f64 },
}

impl QuantumProfile {
    pub fn sigma(&self) -> f64 {
        match *self {
            QuantumProfile::Regular { sigma } | QuantumProfile::Singular { sigma } => sigma,
        }
    }

    pub fn singular_c(&self) -> Option<f64> {
        match *self {
            QuantumProfile::Singular { sigma } => Some((1.0 / (2.0 * PI * sigma * sigma)).sqrt()),
            QuantumProfile::Regular { .. } => None,
        }
    }

    /// |ψ(r)|²·4πr², the radial probability density.
    pub fn radial_density(&self, r: f64) -> f64 {
        match *self {
            QuantumProfile::Regular { sigma } => {
                let n2 = (PI * sigma * sigma).powf(-1.5);
                4.0 * PI * r * r * n2 * (-r * r / (sigma * sigma)).exp()
            }
            QuantumProfile::Singular { sigma } => {
                let c2 = 1.0 / (2.0 * PI * sigma * sigma);
                4.0 * PI * r * c2 * (-r * r / (sigma * sigma)).exp()
            }
        }
    }

    /// The closed-form ε → 0 value −gπc²χ(0)², zero for regular profiles.
    pub fn expected_limit(&self, g: f64) -> f64 {
        self.singular_c().map_or(0.0, |c| -g * PI * c * c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumPairing {
    /// (ε, ⟨Â_ε⟩, quadrature error estimate).
    pub points: Vec<(f64, f64, f64)>,
    /// Polynomial extrapolation of the ladder to ε = 0.
    pub limit: f64,
}

/// ⟨Â_ε⟩ for each ε, by adaptive quadrature over r with breakpoints at the
/// scales ε and σ.
pub fn quantum_anomaly_pairing(profile: &QuantumProfile, params: &SystemParams, epsilons: &[f64]) -> Result<QuantumPairing> {
    if params.dim != 3 {
        return Err(Error::Precondition("the quantum pairing is defined for d = 3".into()));
    }
    if epsilons.len() < 2 || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Precondition("need at least two positive ε values".into()));
    }
    let g = params.g;
    let sigma = profile.sigma();
    let mut points = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        if g == 0.0 {
            points.push((eps, 0.0, 0.0));
            continue;
        }
        let q = integrate_to_infinity(
            |r| quantum_anomaly_density(r, g, eps) * profile.radial_density(r),
            0.0,
            sigma,
            &[eps, 3.0 * eps, 10.0 * eps, sigma],
            1e-11,
            1e-15,
        )?;
        points.push((eps, q.value, q.err));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    Ok(QuantumPairing { points, limit: neville(&xs, &ys, 0.0) })
}

/// ⟨Â_ε⟩ on a grid wavefunction: ∫ Â_ε |u|² dr = h Σ Â_ε(r_j) |f_j|².
pub fn pairing_on_radial(u: &RadialWavefunction, g: f64, epsilon: f64) -> f64 {
    u.grid.h * u.grid.r.iter().zip(&u.f).map(|(r, f)| quantum_anomaly_density(*r, g, epsilon) * f.norm_sqr()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingConsistency {
    pub drift: f64,
    /// ⟨Â_ε⟩ averaged over the recorded snapshots.
    pub mean_pairing: f64,
    pub sign_agrees: bool,
    /// |mean_pairing / drift − 1|.
    pub relative_gap: f64,
}

/// Compares the measured drift with ⟨Â_ε⟩ on the evolved densities.
pub fn pairing_consistency(run: &QuantumRun, drift: f64, g: f64, epsilon: f64) -> PairingConsistency {
    let n = run.snapshots.len() as f64;
    let mean_pairing = run.snapshots.iter().map(|u| pairing_on_radial(u, g, epsilon)).sum::<f64>() / n;
    PairingConsistency {
        drift,
        mean_pairing,
        sign_agrees: drift.signum() == mean_pairing.signum(),
        relative_gap: (mean_pairing / drift - 1.0).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LADDER: [f64; 5] = [8e-3, 4e-3, 2e-3, 1e-3, 5e-4];

    #[test]
    fn profiles_are_normalized() {
        for p in [QuantumProfile::Regular { sigma: 0.7 }, QuantumProfile::Singular { sigma: 1.3 }] {
            let q = integrate_to_infinity(|r| p.radial_density(r), 0.0, 1.0, &[p.sigma()], 1e-12, 1e-15).unwrap();
            assert!((q.value - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_limit_matches_delta_pairing() {
        let p = QuantumProfile::Singular { sigma: 1.0 };
        let params = SystemParams::bare(1.0);
        let res = quantum_anomaly_pairing(&p, &params, &LADDER).unwrap();
        let expected = p.expected_limit(1.0);
        assert!((res.limit / expected - 1.0).abs() < 1e-2, "{} vs {expected}", res.limit);
    }

    #[test]
    fn regular_limit_vanishes() {
        let p = QuantumProfile::Regular { sigma: 1.0 };
        let res = quantum_anomaly_pairing(&p, &SystemParams::bare(1.0), &LADDER).unwrap();
        assert!(res.limit.abs() < 1e-6, "{}", res.limit);
        // the ladder itself shrinks linearly in ε
        assert!(res.points[0].1.abs() > 10.0 * res.points[4].1.abs());
    }

    #[test]
    fn zero_coupling_is_exactly_zero() {
        let p = QuantumProfile::Singular { sigma: 1.0 };
        let res = quantum_anomaly_pairing(&p, &SystemParams::bare(0.0), &LADDER).unwrap();
        assert_eq!(res.limit, 0.0);
    }
}
