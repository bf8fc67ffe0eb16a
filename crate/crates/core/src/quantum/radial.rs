//! s-wave radial problem on a logarithmic grid.
//!
//! With s = ln r and u(r) = r^{1/2} w(s), the reduced equation
//! −½u″ − g/(2r²) u = E u becomes A w = E r² w, where A = −½∂_s² − ν²/2 and
//! ν² = g − ¼. The amplitude f = r w = r^{1/2} u satisfies ∫|u|²dr = ∫|f|²ds,
//! and in f the Hamiltonian is the symmetric matrix R⁻¹ A R⁻¹.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::par::compensated_sum;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub a: f64,
    pub big_r: f64,
    /// Log spacing.
    pub h: f64,
    /// Interior nodes only; s₀ = ln a and s_{n+1} = ln R carry the Dirichlet values.
    pub s: Vec<f64>,
    pub r: Vec<f64>,
}

impl RadialGrid {
    pub fn new(a: f64, big_r: f64, n: usize) -> Result<Self> {
        if !(a > 0.0 && big_r > a) {
            return Err(Error::Precondition(format!("radial grid needs 0 < a < R (a = {a}, R = {big_r})")));
        }
        if n < 8 {
            return Err(Error::GridTooCoarse(format!("radial grid with {n} interior points")));
        }
        let h = (big_r / a).ln() / (n + 1) as f64;
        let s: Vec<f64> = (1..=n).map(|j| a.ln() + h * j as f64).collect();
        let r = s.iter().map(|v| v.exp()).collect();
        Ok(Self { a, big_r, h, s, r })
    }

    /// Grid with spacing close to `h` in ln r.
    pub fn with_spacing(a: f64, big_r: f64, h: f64) -> Result<Self> {
        let n = ((big_r / a).ln() / h).round() as usize;
        Self::new(a, big_r, n.saturating_sub(1).max(8))
    }

    pub fn from_params(params: &SystemParams, n: usize) -> Result<Self> {
        Self::new(params.cutoff_a, params.box_r, n)
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }
}

/// Symmetric pentadiagonal matrix stored by diagonals: `d0[j]`, `d1[j]` = M[j, j+1],
/// `d2[j]` = M[j, j+2].
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand5 {
    pub d0: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl SymBand5 {
    pub fn n(&self) -> usize {
        self.d0.len()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            let mut acc = x[j] * self.d0[j];
            if j + 1 < n {
                acc += x[j + 1] * self.d1[j];
            }
            if j + 2 < n {
                acc += x[j + 2] * self.d2[j];
            }
            if j >= 1 {
                acc += x[j - 1] * self.d1[j - 1];
            }
            if j >= 2 {
                acc += x[j - 2] * self.d2[j - 2];
            }
            y[j] = acc;
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => self.d0[i],
            1 => self.d1[i.min(j)],
            2 => self.d2[i.min(j)],
            _ => 0.0,
        })
    }
}

/// R⁻¹ A R⁻¹ with a fourth-order stencil for ∂_s²; the ghost value beyond each
/// wall is the odd reflection, which keeps the matrix symmetric.
pub fn hamiltonian_f(grid: &RadialGrid, g: f64) -> SymBand5 {
    let n = grid.n();
    let c = -0.5 / (12.0 * grid.h * grid.h);
    let nu2 = g - 0.25;
    let mut d0 = vec![c * -30.0 - 0.5 * nu2; n];
    // odd reflection: the ghost f_{−1} = −f_1 folds +1 into the first diagonal entry
    d0[0] += c * 1.0;
    d0[n - 1] += c * 1.0;
    let d1 = vec![c * 16.0; n - 1];
    let d2 = vec![-c; n - 2];
    let inv: Vec<f64> = grid.r.iter().map(|r| 1.0 / r).collect();
    SymBand5 {
        d0: (0..n).map(|j| d0[j] * inv[j] * inv[j]).collect(),
        d1: (0..n - 1).map(|j| d1[j] * inv[j] * inv[j + 1]).collect(),
        d2: (0..n - 2).map(|j| d2[j] * inv[j] * inv[j + 2]).collect(),
    }
}

/// Antisymmetric fourth-order ∂_s with zero values beyond the walls.
pub fn d_ds(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    let at = |j: isize| if j < 0 || j >= n as isize { Complex64::new(0.0, 0.0) } else { f[j as usize] };
    (0..n as isize)
        .map(|j| (at(j - 2) - at(j - 1) * 8.0 + at(j + 1) * 8.0 - at(j + 2)) / (12.0 * h))
        .collect()
}

/// Reduced radial function u = r·ψ·√(4π), stored as f = r^{1/2} u on the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialWavefunction {
    pub grid: RadialGrid,
    pub f: Vec<Complex64>,
}

impl RadialWavefunction {
    /// Builds f from u(r) at the interior nodes and normalizes ∫|u|²dr = 1.
    pub fn from_u<F: Fn(f64) -> Complex64>(grid: RadialGrid, u: F) -> Result<Self> {
        let f = grid.r.iter().map(|&r| u(r) * r.sqrt()).collect();
        let mut w = Self { grid, f };
        let nrm = w.norm();
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(Error::Precondition("wavefunction has zero or non-finite norm".into()));
        }
        let s = 1.0 / nrm.sqrt();
        w.f.iter_mut().for_each(|v| *v *= s);
        Ok(w)
    }

    /// Same as `from_u` with f given directly.
    pub fn from_f<F: Fn(f64) -> Complex64>(grid: RadialGrid, f: F) -> Result<Self> {
        Self::from_u(grid, |r| f(r) / r.sqrt())
    }

    pub fn u(&self) -> Vec<Complex64> {
        self.f.iter().zip(&self.grid.r).map(|(f, r)| f / r.sqrt()).collect()
    }

    pub fn inner(&self, other: &[Complex64]) -> Complex64 {
        let re = compensated_sum(self.f.iter().zip(other).map(|(a, b)| (a.conj() * b).re));
        let im = compensated_sum(self.f.iter().zip(other).map(|(a, b)| (a.conj() * b).im));
        Complex64::new(re, im) * self.grid.h
    }

    pub fn norm(&self) -> f64 {
        self.inner(&self.f).re
    }

    /// Estimate of the relative size of ∂_s² f at the two nodes next to the
    /// inner wall, scaled by h². Large values mean the wall is under-resolved.
    pub fn wall_resolution(&self) -> f64 {
        let fmax = self.f.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if fmax == 0.0 {
            return 0.0;
        }
        let f = &self.f;
        let second = (f[1] - f[0] * 2.0).norm().max((f[2] - f[1] * 2.0 + f[0]).norm());
        second / fmax
    }
}

/// Ĥu in f coordinates.
pub fn radial_apply(u: &RadialWavefunction, params: &SystemParams) -> Result<Vec<Complex64>> {
    if u.wall_resolution() > 0.5 {
        return Err(Error::GridTooCoarse(format!("inner wall under-resolved (indicator {:.3})", u.wall_resolution())));
    }
    Ok(hamiltonian_f(&u.grid, params.g).apply(&u.f))
}

/// ⟨u| −¼(r p̂_r + p̂_r r) |u⟩ = (i/2)⟨f|∂_s f⟩, with the imaginary residue
/// returned separately so callers can assert it is negligible.
pub fn dilation_part(u: &RadialWavefunction) -> (f64, f64) {
    let d = d_ds(&u.f, u.grid.h);
    let v = Complex64::new(0.0, 0.5) * u.inner(&d);
    (v.re, v.im)
}

/// t⟨Ĥ⟩ − ¼⟨r p̂ + p̂ r⟩.
pub fn quantum_dilation_expectation(u: &RadialWavefunction, t: f64, params: &SystemParams) -> Result<f64> {
    let h = u.inner(&radial_apply(u, params)?);
    let (d, im) = dilation_part(u);
    let scale = d.abs().max(h.re.abs()).max(1.0);
    if im.abs() > 1e-8 * scale || h.im.abs() > 1e-8 * h.re.abs().max(1.0) {
        return Err(Error::Assertion(format!(
            "dilation expectation has imaginary part {im:e} (energy {:e}); discretization is not Hermitian",
            h.im
        )));
    }
    Ok(t * h.re + d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hamiltonian_is_symmetric() {
        let grid = RadialGrid::new(0.01, 50.0, 64).unwrap();
        let m = hamiltonian_f(&grid, 1.25).to_dense();
        assert!((&m - m.transpose()).abs().max() <= 1e-10 * m.abs().max());
    }

    #[test]
    fn band_apply_matches_dense() {
        let grid = RadialGrid::new(0.1, 10.0, 20).unwrap();
        let band = hamiltonian_f(&grid, 0.7);
        let x: Vec<Complex64> = (0..20).map(|j| Complex64::new((j as f64).sin(), (j as f64 * 0.3).cos())).collect();
        let y = band.apply(&x);
        let dense = band.to_dense();
        for i in 0..20 {
            let e: Complex64 = (0..20).map(|j| x[j] * dense[(i, j)]).sum();
            assert!((e - y[i]).norm() < 1e-9 * e.norm().max(1.0));
        }
    }

    #[test]
    fn box_mode_energy_at_zero_coupling() {
        // u = sin(kπ(r − a)/(R − a)) has E = k²π²/(2(R − a)²); on a log grid
        // the error is O(h⁴) in ln r
        let (a, big_r) = (1.0, 3.0);
        let p = SystemParams::bare(0.0);
        let mut errs = Vec::new();
        for n in [200, 400] {
            let grid = RadialGrid::new(a, big_r, n).unwrap();
            let u = RadialWavefunction::from_u(grid, |r| Complex64::new((PI * (r - a) / (big_r - a)).sin(), 0.0)).unwrap();
            let e = u.inner(&radial_apply(&u, &p).unwrap()).re;
            errs.push((e - PI * PI / (2.0 * 4.0)).abs());
        }
        assert!(errs[1] < 1e-6, "{errs:?}");
        assert!(errs[0] / errs[1] > 12.0, "{errs:?}");
    }

    #[test]
    fn expectation_of_h_is_real_for_random_states() {
        let grid = RadialGrid::new(0.01, 20.0, 300).unwrap();
        let u = RadialWavefunction::from_u(grid, |r| {
            Complex64::from_polar((r - 0.01) * (-(r - 3.0).powi(2)).exp(), 0.7 * r + 0.1 * r * r)
        })
        .unwrap();
        let h = u.inner(&radial_apply(&u, &SystemParams::bare(1.25)).unwrap());
        assert!(h.im.abs() < 1e-12 * h.re.abs().max(1.0));
    }

    #[test]
    fn dilation_vanishes_on_real_states() {
        let grid = RadialGrid::new(0.01, 20.0, 300).unwrap();
        let u = RadialWavefunction::from_u(grid, |r| Complex64::new((r - 0.01) * (-(r - 3.0).powi(2)).exp(), 0.0)).unwrap();
        let d = quantum_dilation_expectation(&u, 0.0, &SystemParams::bare(1.25)).unwrap();
        assert!(d.abs() < 1e-14);
    }

    #[test]
    fn outgoing_phase_gives_minus_half_k_mean_radius() {
        // −¼⟨rp + pr⟩ = −½ Re⟨u| r p̂ |u⟩ ≈ −½ k ⟨r⟩ for u = e^{ikr}·envelope
        let grid = RadialGrid::new(0.01, 40.0, 3000).unwrap();
        let k = 1.3;
        let u = RadialWavefunction::from_u(grid, |r| Complex64::from_polar((-(r - 10.0).powi(2) / 2.0).exp(), k * r)).unwrap();
        let (d, im) = dilation_part(&u);
        let uu = u.u();
        let mean_r: f64 = compensated_sum(
            u.grid.r.iter().zip(&uu).map(|(r, v)| r * v.norm_sqr() * r * u.grid.h),
        );
        assert!(im.abs() < 1e-10);
        assert!((d + 0.5 * k * mean_r).abs() < 1e-6 * mean_r, "{d} vs {}", -0.5 * k * mean_r);
    }
}
