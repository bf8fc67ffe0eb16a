//! KvN waves on a periodic (x, λ) grid in one dimension.
//!
//! In this representation λ = λ_p acts by multiplication, p = i∂_λ and
//! λ_r = −i∂_x, so the Liouvillian is ℋ = ∂_x∂_λ − g λ x / (x² + ε²)².

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChargeRecord, ChargeSeries, SystemParams};
use crate::par::compensated_sum;
use crate::spectral::{fftfreq, Fft2};

/// Fraction of spectral power allowed in the outer third of the wavenumber box.
pub const SPECTRAL_TAIL_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPacket {
    pub x0: f64,
    pub sigma_x: f64,
    pub lambda0: f64,
    pub sigma_lambda: f64,
    /// Phase e^{i kx x}, which sets ⟨λ_r⟩.
    pub kx: f64,
    /// Phase e^{−i p0 λ}, which sets ⟨p⟩.
    pub p0: f64,
}

impl Default for GridPacket {
    fn default() -> Self {
        Self { x0: -2.0, sigma_x: 1.5, lambda0: 1.5, sigma_lambda: 2.0, kx: 0.5, p0: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Splitting {
    /// Second-order Strang splitting.
    Strang,
    /// Fourth-order Yoshida composition of Strang steps.
    Yoshida4,
}

#[derive(Debug, Clone)]
pub struct KvnGridWave {
    pub n: usize,
    pub half_width: f64,
    pub t: f64,
    /// Row-major, x along rows and λ along columns.
    pub psi: Vec<Complex64>,
}

fn c0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl KvnGridWave {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|j| -self.half_width + h * j as f64).collect()
    }

    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(n: usize, half_width: f64, f: F) -> Self {
        let mut w = Self { n, half_width, t: 0.0, psi: Vec::with_capacity(n * n) };
        let x = w.nodes();
        for &xi in &x {
            for &lj in &x {
                w.psi.push(f(xi, lj));
            }
        }
        w
    }

    pub fn gaussian(n: usize, half_width: f64, pk: &GridPacket) -> Self {
        let mut w = Self::from_fn(n, half_width, |x, l| {
            let a = -(x - pk.x0).powi(2) / (4.0 * pk.sigma_x * pk.sigma_x)
                - (l - pk.lambda0).powi(2) / (4.0 * pk.sigma_lambda * pk.sigma_lambda);
            Complex64::from_polar(a.exp(), pk.kx * x - pk.p0 * l)
        });
        w.normalize();
        w
    }

    pub fn inner(&self, other: &[Complex64]) -> Complex64 {
        let h2 = self.spacing().powi(2);
        let re = compensated_sum(self.psi.iter().zip(other).map(|(a, b)| (a.conj() * b).re));
        let im = compensated_sum(self.psi.iter().zip(other).map(|(a, b)| (a.conj() * b).im));
        Complex64::new(re, im) * h2
    }

    pub fn norm(&self) -> f64 {
        self.inner(&self.psi).re
    }

    pub fn normalize(&mut self) {
        let s = 1.0 / self.norm().sqrt();
        self.psi.iter_mut().for_each(|v| *v *= s);
    }

    /// Wavenumbers with the Nyquist entry zeroed, matching a real
    /// antisymmetric first-derivative operator.
    fn wavenumbers(&self) -> Vec<f64> {
        let mut k = fftfreq(self.n, self.spacing());
        if self.n.is_multiple_of(2) {
            k[self.n / 2] = 0.0;
        }
        k
    }

    /// Multiplicative part −g λ x / (x² + ε²)².
    pub fn potential_term(&self, params: &SystemParams) -> Vec<f64> {
        let x = self.nodes();
        let e2 = params.epsilon * params.epsilon;
        let mut out = Vec::with_capacity(self.n * self.n);
        for &xi in &x {
            let s = xi * xi + e2;
            for &lj in &x {
                out.push(-params.g * lj * xi / (s * s));
            }
        }
        out
    }

    /// Multiplicative anomaly density −2gε² λ x / (x² + ε²)³.
    pub fn anomaly_term(&self, params: &SystemParams) -> Vec<f64> {
        let x = self.nodes();
        let e2 = params.epsilon * params.epsilon;
        let mut out = Vec::with_capacity(self.n * self.n);
        for &xi in &x {
            let s = xi * xi + e2;
            for &lj in &x {
                out.push(-2.0 * params.g * e2 * lj * xi / (s * s * s));
            }
        }
        out
    }

    /// Fraction of spectral power with |k| or |κ| beyond two thirds of the
    /// grid's Nyquist wavenumber.
    pub fn spectral_tail(&self) -> f64 {
        let fft = Fft2::new(self.n);
        let mut hat = self.psi.clone();
        fft.forward(&mut hat);
        let k = fftfreq(self.n, self.spacing());
        let kcut = 2.0 / 3.0 * std::f64::consts::PI / self.spacing();
        let total = compensated_sum(hat.iter().map(|v| v.norm_sqr()));
        let tail = compensated_sum(hat.iter().enumerate().filter_map(|(idx, v)| {
            let (i, j) = (idx / self.n, idx % self.n);
            (k[i].abs() > kcut || k[j].abs() > kcut).then(|| v.norm_sqr())
        }));
        if total == 0.0 { 0.0 } else { tail / total }
    }

    fn check_resolution(&self) -> Result<()> {
        let tail = self.spectral_tail();
        if tail > SPECTRAL_TAIL_LIMIT {
            return Err(Error::GridTooCoarse(format!("KvN grid spectral tail {tail:.3e}")));
        }
        Ok(())
    }

    /// ∂_x∂_λ ψ via the double Fourier basis.
    fn mixed_derivative(&self, fft: &Fft2) -> Vec<Complex64> {
        let k = self.wavenumbers();
        let mut hat = self.psi.clone();
        fft.forward(&mut hat);
        for (idx, v) in hat.iter_mut().enumerate() {
            *v *= -k[idx / self.n] * k[idx % self.n];
        }
        fft.inverse(&mut hat);
        hat
    }

    /// ∂ along one axis (0 = x, 1 = λ) of an arbitrary array on this grid.
    fn derivative(&self, fft: &Fft2, data: &[Complex64], axis: usize) -> Vec<Complex64> {
        let k = self.wavenumbers();
        let mut hat = data.to_vec();
        fft.forward(&mut hat);
        for (idx, v) in hat.iter_mut().enumerate() {
            let kk = if axis == 0 { k[idx / self.n] } else { k[idx % self.n] };
            *v *= Complex64::new(0.0, kk);
        }
        fft.inverse(&mut hat);
        hat
    }

    /// Ĝ = ½(λ_p p − λ_r r), applied in the Hermitian symmetrized form
    /// (i/4)(x∂_x + ∂_x x + λ∂_λ + ∂_λ λ).
    pub fn generator_apply(&self) -> Vec<Complex64> {
        let fft = Fft2::new(self.n);
        let x = self.nodes();
        let n = self.n;
        let weighted = |axis: usize| -> Vec<Complex64> {
            self.psi.iter().enumerate().map(|(idx, v)| v * if axis == 0 { x[idx / n] } else { x[idx % n] }).collect()
        };
        let dx = self.derivative(&fft, &self.psi, 0);
        let dl = self.derivative(&fft, &self.psi, 1);
        let dxx = self.derivative(&fft, &weighted(0), 0);
        let dll = self.derivative(&fft, &weighted(1), 1);
        let i4 = Complex64::new(0.0, 0.25);
        (0..n * n)
            .map(|idx| i4 * (dx[idx] * x[idx / n] + dxx[idx] + dl[idx] * x[idx % n] + dll[idx]))
            .collect()
    }

    /// ⟨ℋ⟩, ⟨Ĝ⟩ and the norm; both expectations are real for Hermitian operators
    /// and the imaginary parts are dropped.
    pub fn expectations(&self, params: &SystemParams) -> Result<(f64, f64, f64)> {
        let h = liouvillian_apply_grid(self, params)?;
        let g = self.generator_apply();
        Ok((self.inner(&h).re, self.inner(&g).re, self.norm()))
    }

    pub fn charge_record(&self, params: &SystemParams) -> Result<ChargeRecord> {
        let (h, g, norm) = self.expectations(params)?;
        Ok(ChargeRecord::deterministic(self.t, h, self.t * h + g, norm))
    }

    /// ⟨𝒜_ε⟩ on the grid.
    pub fn anomaly_expectation(&self, params: &SystemParams) -> f64 {
        let a = self.anomaly_term(params);
        let h2 = self.spacing().powi(2);
        compensated_sum(self.psi.iter().zip(&a).map(|(v, w)| v.norm_sqr() * w)) * h2
    }
}

/// ℋψ = ∂_x∂_λψ − g λ x/(x² + ε²)² ψ.
pub fn liouvillian_apply_grid(wave: &KvnGridWave, params: &SystemParams) -> Result<Vec<Complex64>> {
    if !(params.epsilon > 0.0) {
        return Err(Error::Precondition("the KvN grid backend needs epsilon > 0".into()));
    }
    wave.check_resolution()?;
    let fft = Fft2::new(wave.n);
    let mut out = wave.mixed_derivative(&fft);
    let v = wave.potential_term(params);
    for ((o, p), w) in out.iter_mut().zip(&wave.psi).zip(&v) {
        *o += p * w;
    }
    Ok(out)
}

/// Dense matrix of the operator realized by `apply` on an n × n grid.
pub fn dense_operator<F: Fn(&KvnGridWave) -> Vec<Complex64>>(n: usize, half_width: f64, apply: F) -> DMatrix<Complex64> {
    let dim = n * n;
    let mut m = DMatrix::from_element(dim, dim, c0());
    for col in 0..dim {
        let mut w = KvnGridWave { n, half_width, t: 0.0, psi: vec![c0(); dim] };
        w.psi[col] = Complex64::new(1.0, 0.0);
        for (row, v) in apply(&w).into_iter().enumerate() {
            m[(row, col)] = v;
        }
    }
    m
}

#[derive(Debug, Clone, Copy)]
pub struct GridEvolveOptions {
    pub dt: f64,
    pub t_final: f64,
    /// Number of equally spaced records after t = 0.
    pub records: usize,
    pub splitting: Splitting,
}

impl GridEvolveOptions {
    pub fn new(dt: f64, t_final: f64, records: usize) -> Self {
        Self { dt, t_final, records, splitting: Splitting::Strang }
    }
}

struct Stepper {
    fft: Fft2,
    kk: Vec<f64>,
    pot: Vec<f64>,
}

impl Stepper {
    /// e^{−iℋ_kin τ} = e^{+i kκ τ} in Fourier space.
    fn kinetic(&self, psi: &mut [Complex64], tau: f64) {
        self.fft.forward(psi);
        for (v, kk) in psi.iter_mut().zip(&self.kk) {
            *v *= Complex64::from_polar(1.0, kk * tau);
        }
        self.fft.inverse(psi);
    }

    fn potential(&self, psi: &mut [Complex64], tau: f64) {
        for (v, w) in psi.iter_mut().zip(&self.pot) {
            *v *= Complex64::from_polar(1.0, -w * tau);
        }
    }

    fn strang(&self, psi: &mut [Complex64], dt: f64) {
        self.potential(psi, 0.5 * dt);
        self.kinetic(psi, dt);
        self.potential(psi, 0.5 * dt);
    }

    fn step(&self, psi: &mut [Complex64], dt: f64, splitting: Splitting) {
        match splitting {
            Splitting::Strang => self.strang(psi, dt),
            Splitting::Yoshida4 => {
                let c = 2f64.cbrt();
                let w1 = 1.0 / (2.0 - c);
                let w0 = -c * w1;
                self.strang(psi, w1 * dt);
                self.strang(psi, w0 * dt);
                self.strang(psi, w1 * dt);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridRun {
    pub wave: KvnGridWave,
    pub series: ChargeSeries,
    /// ⟨𝒜_ε⟩ at each record time.
    pub anomaly: Vec<f64>,
}

impl GridRun {
    /// (⟨𝒟⟩(T) − ⟨𝒟⟩(0), ∫⟨𝒜_ε⟩dt over the equally spaced records).
    /// Simpson's rule for an even number of intervals, trapezoid otherwise.
    pub fn balance(&self) -> (f64, f64) {
        let r = &self.series.records;
        let m = r.len() - 1;
        let lhs = r[m].dilation - r[0].dilation;
        if m == 0 {
            return (lhs, 0.0);
        }
        let h = (r[m].t - r[0].t) / m as f64;
        let a = &self.anomaly;
        let rhs = if m.is_multiple_of(2) {
            h / 3.0 * compensated_sum((0..=m).map(|k| a[k] * if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 }))
        } else {
            h * compensated_sum((0..=m).map(|k| a[k] * if k == 0 || k == m { 0.5 } else { 1.0 }))
        };
        (lhs, rhs)
    }
}

/// Split-step evolution of i∂_tψ = ℋψ.
pub fn evolve_grid(wave: &KvnGridWave, params: &SystemParams, opts: GridEvolveOptions) -> Result<GridRun> {
    if !(params.epsilon > 0.0) {
        return Err(Error::Precondition("the KvN grid backend needs epsilon > 0".into()));
    }
    if !(opts.dt > 0.0 && opts.t_final >= 0.0) || opts.records == 0 {
        return Err(Error::Precondition("need dt > 0, T >= 0 and at least one record".into()));
    }
    let pot = wave.potential_term(params);
    let vmax = pot.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if opts.dt * vmax >= 0.5 {
        return Err(Error::Precondition(format!("dt * max|potential term| = {:.3} >= 0.5", opts.dt * vmax)));
    }
    wave.check_resolution()?;
    let k = wave.wavenumbers();
    let n = wave.n;
    let kk = (0..n * n).map(|idx| k[idx / n] * k[idx % n]).collect();
    let st = Stepper { fft: Fft2::new(n), kk, pot };

    let mut w = wave.clone();
    let mut series = ChargeSeries::default();
    let mut anomaly = Vec::with_capacity(opts.records + 1);
    series.push(w.charge_record(params)?);
    anomaly.push(w.anomaly_expectation(params));
    let t0 = w.t;
    let steps_per_record = ((opts.t_final / opts.records as f64) / opts.dt).ceil().max(1.0) as usize;
    let h = opts.t_final / (opts.records * steps_per_record) as f64;
    for rec in 1..=opts.records {
        for _ in 0..steps_per_record {
            st.step(&mut w.psi, h, opts.splitting);
        }
        w.t = t0 + opts.t_final * rec as f64 / opts.records as f64;
        series.push(w.charge_record(params)?);
        anomaly.push(w.anomaly_expectation(params));
    }
    w.check_resolution()?;
    Ok(GridRun { wave: w, series, anomaly })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(g: f64) -> SystemParams {
        SystemParams::bare(g).with_dim(1).with_epsilon(0.3)
    }

    #[test]
    fn plane_wave_is_an_eigenfunction_at_zero_coupling() {
        let (n, l) = (16, 4.0);
        let w0 = std::f64::consts::PI / l;
        let (k, kap) = (2.0 * w0, -3.0 * w0);
        let w = KvnGridWave::from_fn(n, l, |x, lam| Complex64::from_polar(1.0, k * x + kap * lam));
        let out = liouvillian_apply_grid(&w, &params(0.0)).unwrap();
        for (o, p) in out.iter().zip(&w.psi) {
            assert!((o - p * (-k * kap)).norm() < 1e-10);
        }
    }

    #[test]
    fn even_real_wave_stays_even() {
        let w = KvnGridWave::from_fn(64, 8.0, |x, l| Complex64::new((-(x * x + 0.5 * l * l)).exp() * (1.0 + x * l), 0.0));
        let out = liouvillian_apply_grid(&w, &params(0.0)).unwrap();
        let n = w.n;
        // (x, λ) → (−x, −λ) maps index j to (n − j) mod n on this grid
        for i in 0..n {
            for j in 0..n {
                let m = ((n - i) % n) * n + (n - j) % n;
                assert!((out[i * n + j] - out[m]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn dense_liouvillian_and_generator_are_hermitian() {
        let p = params(0.5);
        let h = dense_operator(8, 3.0, |w| {
            let fft = Fft2::new(w.n);
            let mut out = w.mixed_derivative(&fft);
            for ((o, v), u) in out.iter_mut().zip(&w.potential_term(&p)).zip(&w.psi) {
                *o += u * v;
            }
            out
        });
        assert!((&h - h.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-12);
        let g = dense_operator(8, 3.0, |w| w.generator_apply());
        assert!((&g - g.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn expectation_of_liouvillian_is_real() {
        let w = KvnGridWave::from_fn(64, 8.0, |x, l| {
            Complex64::from_polar((-(x - 1.0).powi(2) - 0.3 * l * l).exp(), 0.7 * x - 0.2 * l * x)
        });
        let h = liouvillian_apply_grid(&w, &params(0.5)).unwrap();
        assert!(w.inner(&h).im.abs() < 1e-10);
    }

    #[test]
    fn generator_has_dilation_eigenvalue_on_windowed_homogeneous_waves() {
        // f = w(ρ) ρ^{−1−2iμ} has ⟨Ĝ⟩ = μ for any real window vanishing at both ends
        let mu = 0.7;
        let bump = |r: f64| {
            if r <= 1.0 || r >= 7.0 {
                0.0
            } else {
                let u = (r - 1.0) / 6.0;
                (-1.0 / (u * (1.0 - u))).exp()
            }
        };
        let mut w = KvnGridWave::from_fn(256, 10.0, |x, l| {
            let r = (x * x + l * l).sqrt();
            if r == 0.0 {
                return c0();
            }
            Complex64::from_polar(bump(r) / r, -2.0 * mu * r.ln())
        });
        w.normalize();
        let g = w.generator_apply();
        let val = w.inner(&g);
        assert!((val.re - mu).abs() < 1e-8, "{val}");
        assert!(val.im.abs() < 1e-12);
    }

    #[test]
    fn free_evolution_conserves_charges() {
        let w = KvnGridWave::gaussian(128, 20.0, &GridPacket::default());
        let series = evolve_grid(&w, &params(0.0), GridEvolveOptions::new(0.01, 2.0, 4)).unwrap().series;
        let first = series.first().unwrap();
        assert!(first.dilation.abs() > 0.1);
        assert!(series.max_abs_deviation(|r| r.norm) < 1e-12);
        assert!(series.max_abs_deviation(|r| r.energy) < 1e-10);
        assert!(series.max_abs_deviation(|r| r.dilation) < 1e-8 * first.dilation.abs());
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let pk = GridPacket { sigma_x: 0.05, ..GridPacket::default() };
        let w = KvnGridWave::gaussian(16, 10.0, &pk);
        assert!(matches!(liouvillian_apply_grid(&w, &params(0.5)), Err(Error::GridTooCoarse(_))));
        assert!(liouvillian_apply_grid(&w, &params(0.5).with_epsilon(0.0)).is_err());
    }
}
