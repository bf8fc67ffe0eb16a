//! Numerical check of Ĥ + (1/i)[D̂, Ĥ] = (1 + ½ x·∇)V at t = 0 on small grids.
//!
//! D̂ = −¼(x·p + p·x) = (i/2)(x·∇ + d/2); the kinetic part of Ĥ cancels
//! against its commutator, leaving the virial of V.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kvn::identity::{norm, random_vectors, TestVectors};
use crate::potential::SmoothPotential;
use crate::spectral::{apply_along, Axis, AxisKind};

#[derive(Debug, Clone, Copy)]
pub struct QuantumIdentityGrid {
    pub kind: AxisKind,
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
}

impl QuantumIdentityGrid {
    pub fn new(kind: AxisKind, dim: usize, n: usize, half_width: f64) -> Self {
        Self { kind, dim, n, half_width }
    }
}

struct Ops {
    axis: Axis,
    shape: Vec<usize>,
    coords: Vec<Vec<f64>>,
    v: Vec<f64>,
}

impl Ops {
    fn new(axis: Axis, dim: usize, pot: SmoothPotential) -> (Self, Vec<f64>) {
        let n = axis.n();
        let total = n.pow(dim as u32);
        let mut coords = vec![Vec::with_capacity(total); dim];
        let mut v = Vec::with_capacity(total);
        let mut rhs = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rest = flat;
            let mut rho = 0.0;
            for d in (0..dim).rev() {
                let x = axis.x[rest % n];
                coords[d].push(x);
                rho += x * x;
                rest /= n;
            }
            v.push(pot.value(rho));
            rhs.push(pot.value(rho) + 0.5 * pot.radial_virial(rho));
        }
        (Self { axis, shape: vec![n; dim], coords, v }, rhs)
    }

    fn hamiltonian(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = psi.iter().zip(&self.v).map(|(p, v)| p * v).collect();
        for d in 0..self.shape.len() {
            let lap = apply_along(&self.axis.d2, psi, &self.shape, d);
            out.iter_mut().zip(lap).for_each(|(o, l)| *o -= l * 0.5);
        }
        out
    }

    fn dilation(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let dim = self.shape.len() as f64;
        let mut acc: Vec<Complex64> = psi.iter().map(|p| p * (0.5 * dim)).collect();
        for d in 0..self.shape.len() {
            let grad = apply_along(&self.axis.d1, psi, &self.shape, d);
            acc.iter_mut().zip(grad).zip(&self.coords[d]).for_each(|((a, g), x)| *a += g * *x);
        }
        let i2 = Complex64::new(0.0, 0.5);
        acc.into_iter().map(|a| a * i2).collect()
    }
}

/// Max relative residual ‖(Ĥ + (1/i)[D̂, Ĥ] − Â)ψ‖ / max(‖Ĥψ‖, ‖Âψ‖) over the test vectors.
pub fn quantum_identity_check(v: SmoothPotential, grid: QuantumIdentityGrid, vectors: TestVectors) -> Result<f64> {
    if grid.n < 4 {
        return Err(Error::GridTooCoarse(format!("identity grid with n = {}", grid.n)));
    }
    if !(grid.dim == 1 || grid.dim == 3) {
        return Err(Error::Precondition(format!("dimension {} not supported", grid.dim)));
    }
    let axis = Axis::new(grid.kind, grid.n, grid.half_width);
    let (ops, rhs) = Ops::new(axis, grid.dim, v);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut worst = 0.0f64;
    for psi in random_vectors(&ops.axis, grid.dim, vectors) {
        let h = ops.hamiltonian(&psi);
        let dh = ops.dilation(&h);
        let hd = ops.hamiltonian(&ops.dilation(&psi));
        let a: Vec<Complex64> = psi.iter().zip(&rhs).map(|(p, r)| p * r).collect();
        let resid: Vec<Complex64> = (0..psi.len()).map(|k| h[k] + minus_i * (dh[k] - hd[k]) - a[k]).collect();
        let scale = norm(&h).max(norm(&a));
        if scale == 0.0 {
            continue;
        }
        worst = worst.max(norm(&resid) / scale);
    }
    Ok(worst)
}

/// Residuals on successively refined grids and the observed orders
/// log₂(r_k / r_{k+1}) / log₂(n_{k+1} / n_k).
pub fn identity_refinement(
    v: SmoothPotential,
    kind: AxisKind,
    dim: usize,
    half_width: f64,
    ns: &[usize],
    vectors: TestVectors,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let residuals = ns
        .iter()
        .map(|&n| quantum_identity_check(v, QuantumIdentityGrid::new(kind, dim, n, half_width), vectors))
        .collect::<Result<Vec<f64>>>()?;
    let orders = residuals
        .windows(2)
        .zip(ns.windows(2))
        .map(|(r, n)| (r[0] / r[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect();
    Ok((residuals, orders))
}

#[cfg(test)]
mod tests {
    use super::*;

    const WELL: SmoothPotential = SmoothPotential::GaussianWell { depth: 1.0, width: 1.0 };

    #[test]
    fn fourier_one_dimensional_gaussian_well() {
        let grid = QuantumIdentityGrid::new(AxisKind::Fourier, 1, 64, 10.0);
        let r = quantum_identity_check(WELL, grid, TestVectors::Packets { width: 1.0, count: 10, seed: 3 }).unwrap();
        assert!(r <= 1e-6, "{r}");
    }

    #[test]
    fn chebyshev_three_dimensional_inverse_square() {
        let v = SmoothPotential::InverseSquare { g: 1.25, epsilon: 0.3 };
        let grid = QuantumIdentityGrid::new(AxisKind::Chebyshev, 3, 16, 0.3);
        let r = quantum_identity_check(v, grid, TestVectors::ChebyshevBand { kmax: 6, count: 10, seed: 7 }).unwrap();
        assert!(r <= 1e-4, "{r}");
    }

    #[test]
    fn zero_potential_cancels_to_round_off() {
        let grid = QuantumIdentityGrid::new(AxisKind::Fourier, 1, 64, 10.0);
        let r = quantum_identity_check(SmoothPotential::Zero, grid, TestVectors::Packets { width: 1.0, count: 10, seed: 3 })
            .unwrap();
        assert!(r <= 1e-12, "{r}");
    }

    #[test]
    fn fd4_refinement_is_fourth_order() {
        let (res, orders) = identity_refinement(
            WELL,
            AxisKind::FiniteDifference4,
            1,
            10.0,
            &[64, 128, 256],
            TestVectors::Packets { width: 1.0, count: 10, seed: 3 },
        )
        .unwrap();
        assert!(orders.iter().all(|o| *o >= 3.5), "{res:?} {orders:?}");
    }
}
