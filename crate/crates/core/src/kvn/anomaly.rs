//! The KvN anomaly operator 𝒜 = −(g/2) ∂_r·(r (λ_p·r)/r⁴) and its pairing
//! with phase-space densities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kvn::wave::InitialWaveSpec;
use crate::model::{dot, norm2, SystemParams, Vec3};
use crate::par::compensated_sum;
use crate::quad::{gauss_legendre, gauss_legendre_on, integrate_to_infinity};

/// Regularized density −2gε² (λ_p·r)/(r² + ε²)³. At ε = 0 it vanishes away
/// from the origin.
pub fn kvn_anomaly_density(r: &Vec3, lambda_p: &Vec3, params: &SystemParams) -> Result<f64> {
    let r2 = norm2(r);
    if params.epsilon == 0.0 {
        if r2 == 0.0 {
            return Err(Error::SingularInput("anomaly density at the origin with epsilon = 0".into()));
        }
        return Ok(0.0);
    }
    let e2 = params.epsilon * params.epsilon;
    let s = r2 + e2;
    Ok(-2.0 * params.g * e2 * dot(lambda_p, r) / (s * s * s))
}

/// Unit directions and weights of a Gauss–Legendre (in cos θ) × trapezoid
/// (in φ) rule on the sphere. Weights sum to 4π.
pub fn sphere_rule(n_theta: usize, n_phi: usize) -> Vec<(Vec3, f64)> {
    let (u, wu) = gauss_legendre(n_theta);
    let mut out = Vec::with_capacity(n_theta * n_phi);
    let dphi = 2.0 * PI / n_phi as f64;
    for (c, w) in u.iter().zip(&wu) {
        let s = (1.0 - c * c).max(0.0).sqrt();
        for j in 0..n_phi {
            let phi = dphi * j as f64;
            out.push(([s * phi.cos(), s * phi.sin(), *c], w * dphi));
        }
    }
    out
}

/// ∫ sinθ dθ dφ (λ_x cosφ sinθ + λ_y sinφ sinθ + λ_z cosθ) by Gauss–Legendre
/// in θ times the trapezoid rule in φ.
pub fn angular_surface_integral(lambda_p: &Vec3, n_theta: usize, n_phi: usize) -> Result<f64> {
    if n_theta < 2 || n_phi < 2 {
        return Err(Error::Precondition("angular quadrature orders must be >= 2".into()));
    }
    let (th, wth) = gauss_legendre_on(n_theta, 0.0, PI);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut terms = Vec::with_capacity(n_theta * n_phi);
    for (t, w) in th.iter().zip(&wth) {
        let (st, ct) = t.sin_cos();
        for j in 0..n_phi {
            let (sp, cp) = (dphi * j as f64).sin_cos();
            terms.push(w * dphi * st * (lambda_p[0] * cp * st + lambda_p[1] * sp * st + lambda_p[2] * ct));
        }
    }
    Ok(compensated_sum(terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingPoint {
    pub epsilon: f64,
    pub value: f64,
    pub err: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PairingOrders {
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_lambda_radial: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for PairingOrders {
    fn default() -> Self {
        Self { n_theta: 16, n_phi: 32, n_lambda_radial: 48, rel_tol: 1e-10, abs_tol: 1e-14 }
    }
}

/// ∫ d³λ λ |ψ̂(λ)|² by spherical product quadrature of the λ_p marginal.
fn lambda_first_moment(spec: &InitialWaveSpec, orders: &PairingOrders) -> Vec3 {
    let m = spec.lambda_mean();
    let s = spec.lambda_sigma();
    let rmax = norm2(&m).sqrt() + 12.0 * s;
    let (rad, wrad) = gauss_legendre_on(orders.n_lambda_radial, 0.0, rmax);
    let dirs = sphere_rule(orders.n_theta, orders.n_phi);
    let norm = (2.0 * PI * s * s).powf(-1.5);
    let mut acc = [Vec::new(), Vec::new(), Vec::new()];
    for (r, wr) in rad.iter().zip(&wrad) {
        for (u, wu) in &dirs {
            let l = [r * u[0], r * u[1], r * u[2]];
            let d = [l[0] - m[0], l[1] - m[1], l[2] - m[2]];
            let dens = norm * (-norm2(&d) / (2.0 * s * s)).exp();
            for k in 0..3 {
                acc[k].push(wr * wu * r * r * dens * l[k]);
            }
        }
    }
    let [a, b, c] = acc;
    [compensated_sum(a), compensated_sum(b), compensated_sum(c)]
}

/// ⟨𝒜_ε⟩ for each ε: the λ_p integral is done first (the density is linear
/// in λ_p), then the radial × angular integral over r.
pub fn kvn_anomaly_pairing(
    spec: &InitialWaveSpec,
    params: &SystemParams,
    epsilons: &[f64],
    orders: PairingOrders,
) -> Result<Vec<PairingPoint>> {
    spec.validate()?;
    if params.dim != 3 {
        return Err(Error::Precondition("the KvN pairing is three-dimensional".into()));
    }
    let lam = lambda_first_moment(spec, &orders);
    let dirs = sphere_rule(orders.n_theta, orders.n_phi);
    let scale = match *spec {
        InitialWaveSpec::Gaussian { sigma_r, r_bar, .. } => sigma_r.max(norm2(&r_bar).sqrt()),
        InitialWaveSpec::Singular { sigma_r, .. } => sigma_r,
    };
    let mut out = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        if !(eps > 0.0) {
            return Err(Error::Precondition(format!("pairing needs epsilon > 0, got {eps}")));
        }
        let e2 = eps * eps;
        let radial = |r: f64| {
            let s = r * r + e2;
            let pref = -2.0 * params.g * e2 * r * r * r / (s * s * s);
            compensated_sum(dirs.iter().map(|(u, w)| {
                let x = [r * u[0], r * u[1], r * u[2]];
                w * pref * dot(&lam, u) * spec.position_density(&x)
            }))
        };
        let q = integrate_to_infinity(radial, 0.0, scale, &[eps, 3.0 * eps, 10.0 * eps], orders.rel_tol, orders.abs_tol)
            .map_err(|e| Error::QuadratureNonConvergence(format!("epsilon = {eps}: {e}")))?;
        out.push(PairingPoint { epsilon: eps, value: q.value, err: q.err });
    }
    Ok(out)
}
