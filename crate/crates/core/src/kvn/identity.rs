//! Numerical check of ℋ + (1/i)[Ĝ, ℋ] = (3/2 + ½ x∂_x) ℋ_V on a (x, λ) tensor grid.
//!
//! With ℋ_V = −λ V′(x) the right-hand side is −λ(3/2 V′ + ½ x V″); the
//! kinetic part ∂_x∂_λ cancels against its own commutator.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::potential::SmoothPotential;
use crate::spectral::{apply_along, Axis, AxisKind};

#[derive(Debug, Clone, Copy)]
pub struct IdentityGrid {
    pub kind: AxisKind,
    pub n: usize,
    pub half_width: f64,
}

impl IdentityGrid {
    pub fn chebyshev(n: usize, half_width: f64) -> Self {
        Self { kind: AxisKind::Chebyshev, n, half_width }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum TestVectors {
    /// Random complex combinations of T_a(x/L) T_b(λ/L), a, b ≤ kmax.
    ChebyshevBand { kmax: usize, count: usize, seed: u64 },
    /// Gaussian packets of the given width with random centres and phases.
    Packets { width: f64, count: usize, seed: u64 },
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn random_vectors(axis: &Axis, dim: usize, tv: TestVectors) -> Vec<Vec<Complex64>> {
    let n = axis.n();
    let total = n.pow(dim as u32);
    let index = |mut flat: usize| {
        let mut idx = vec![0; dim];
        for d in (0..dim).rev() {
            idx[d] = flat % n;
            flat /= n;
        }
        idx
    };
    match tv {
        TestVectors::ChebyshevBand { kmax, count, seed } => {
            let modes = axis.chebyshev_modes(kmax);
            let m = kmax + 1;
            (0..count)
                .map(|c| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(c as u64);
                    let coef: Vec<Complex64> = (0..m.pow(dim as u32))
                        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                        .collect();
                    (0..total)
                        .map(|flat| {
                            let idx = index(flat);
                            let mut acc = Complex64::new(0.0, 0.0);
                            for (ci, cv) in coef.iter().enumerate() {
                                let mut rest = ci;
                                let mut prod = 1.0;
                                for d in (0..dim).rev() {
                                    prod *= modes[(rest % m, idx[d])];
                                    rest /= m;
                                }
                                acc += cv * prod;
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        }
        TestVectors::Packets { width, count, seed } => (0..count)
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let mut u = || -> f64 { StandardNormal.sample(&mut rng) };
                let centre: Vec<f64> = (0..dim).map(|_| 0.3 * width * u()).collect();
                let k: Vec<f64> = (0..dim).map(|_| 0.5 * u() / width).collect();
                let w = width * (1.0 + 0.1 * u().abs());
                (0..total)
                    .map(|flat| {
                        let idx = index(flat);
                        let mut a = 0.0;
                        let mut ph = 0.0;
                        for d in 0..dim {
                            let x = axis.x[idx[d]];
                            a -= (x - centre[d]).powi(2) / (2.0 * w * w);
                            ph += k[d] * x;
                        }
                        Complex64::from_polar(a.exp(), ph)
                    })
                    .collect()
            })
            .collect(),
    }
}

struct KvnOps<'a> {
    axis: &'a Axis,
    x: Vec<f64>,
    hv: Vec<f64>,
}

impl KvnOps<'_> {
    fn liouvillian(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let shape = [self.axis.n(), self.axis.n()];
        let d = apply_along(&self.axis.d1, &apply_along(&self.axis.d1, psi, &shape, 1), &shape, 0);
        d.iter().zip(psi).zip(&self.hv).map(|((a, b), v)| a + b * v).collect()
    }

    /// Ĝ = (i/2)(x∂_x + λ∂_λ + 1).
    fn generator(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.axis.n();
        let shape = [n, n];
        let dx = apply_along(&self.axis.d1, psi, &shape, 0);
        let dl = apply_along(&self.axis.d1, psi, &shape, 1);
        let i2 = Complex64::new(0.0, 0.5);
        (0..n * n).map(|k| i2 * (dx[k] * self.x[k / n] + dl[k] * self.x[k % n] + psi[k])).collect()
    }
}

/// Max relative residual ‖(ℋ + (1/i)[Ĝ, ℋ] − 𝒜)ψ‖ / max(‖ℋψ‖, ‖𝒜ψ‖) over the test vectors.
pub fn kvn_identity_check(v: SmoothPotential, grid: IdentityGrid, vectors: TestVectors) -> Result<f64> {
    if grid.n < 4 {
        return Err(Error::GridTooCoarse(format!("identity grid with n = {}", grid.n)));
    }
    let axis = Axis::new(grid.kind, grid.n, grid.half_width);
    let n = grid.n;
    let mut hv = Vec::with_capacity(n * n);
    let mut anomaly = Vec::with_capacity(n * n);
    for &x in &axis.x {
        let (v1, v2) = v.derivatives_1d(x);
        for &l in &axis.x {
            hv.push(-l * v1);
            anomaly.push(-l * (1.5 * v1 + 0.5 * x * v2));
        }
    }
    let ops = KvnOps { axis: &axis, x: axis.x.clone(), hv };
    let minus_i = Complex64::new(0.0, -1.0);
    let mut worst = 0.0f64;
    for psi in random_vectors(&axis, 2, vectors) {
        let h = ops.liouvillian(&psi);
        let gh = ops.generator(&h);
        let hg = ops.liouvillian(&ops.generator(&psi));
        let rhs: Vec<Complex64> = psi.iter().zip(&anomaly).map(|(p, a)| p * a).collect();
        let res: Vec<Complex64> = (0..n * n).map(|k| h[k] + minus_i * (gh[k] - hg[k]) - rhs[k]).collect();
        let scale = norm(&h).max(norm(&rhs));
        if scale == 0.0 {
            continue;
        }
        worst = worst.max(norm(&res) / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn band() -> TestVectors {
        TestVectors::ChebyshevBand { kmax: 6, count: 10, seed: 1 }
    }

    #[test]
    fn identity_holds_for_regularized_inverse_square() {
        let r = kvn_identity_check(SmoothPotential::InverseSquare { g: 1.0, epsilon: 0.3 }, IdentityGrid::chebyshev(32, 0.3), band()).unwrap();
        assert!(r <= 1e-8, "{r:e}");
    }

    #[test]
    fn identity_holds_for_gaussian_well() {
        let r = kvn_identity_check(SmoothPotential::GaussianWell { depth: 1.0, width: 0.3 }, IdentityGrid::chebyshev(32, 0.3), band()).unwrap();
        assert!(r <= 1e-8, "{r:e}");
    }

    #[test]
    fn kinetic_part_cancels_exactly_without_potential() {
        let r = kvn_identity_check(SmoothPotential::Zero, IdentityGrid::chebyshev(16, 1.0), band()).unwrap();
        assert!(r <= 1e-11, "{r:e}");
    }
}
