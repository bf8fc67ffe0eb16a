//! Differentiation matrices on tensor grids and a planned 2D FFT.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    /// Periodic trigonometric collocation on [−L, L).
    Fourier,
    /// Chebyshev–Gauss–Lobatto collocation on [−L, L].
    Chebyshev,
    /// Periodic fourth-order central differences on [−L, L).
    FiniteDifference4,
}

/// One axis of a tensor grid with its first and second derivative matrices.
#[derive(Debug, Clone)]
pub struct Axis {
    pub kind: AxisKind,
    pub x: Vec<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
}

/// Angular wavenumbers of an n-point periodic grid with spacing h, in FFT order.
pub fn fftfreq(n: usize, h: f64) -> Vec<f64> {
    let w = 2.0 * std::f64::consts::PI / (n as f64 * h);
    (0..n)
        .map(|j| {
            let m = if j < n.div_ceil(2) { j as i64 } else { j as i64 - n as i64 };
            w * m as f64
        })
        .collect()
}

impl Axis {
    pub fn new(kind: AxisKind, n: usize, half_width: f64) -> Self {
        match kind {
            AxisKind::Fourier => Self::fourier(n, half_width),
            AxisKind::Chebyshev => Self::chebyshev(n, half_width),
            AxisKind::FiniteDifference4 => Self::fd4_periodic(n, half_width),
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// The first-derivative matrix drops the Nyquist mode so that it stays
    /// real and antisymmetric; the second derivative keeps it.
    pub fn fourier(n: usize, half_width: f64) -> Self {
        let h = 2.0 * half_width / n as f64;
        let k = fftfreq(n, h);
        let x: Vec<f64> = (0..n).map(|j| -half_width + h * j as f64).collect();
        let mut d1 = DMatrix::zeros(n, n);
        let mut d2 = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s1 = 0.0;
                let mut s2 = 0.0;
                for (m, &km) in k.iter().enumerate() {
                    let phase = km * (x[i] - x[j]);
                    if !(n.is_multiple_of(2) && m == n / 2) {
                        s1 -= km * phase.sin();
                    }
                    s2 -= km * km * phase.cos();
                }
                d1[(i, j)] = s1 / n as f64;
                d2[(i, j)] = s2 / n as f64;
            }
        }
        Self { kind: AxisKind::Fourier, x, d1, d2 }
    }

    /// Nodes x_j = L cos(jπ/(n−1)), ordered from +L to −L.
    pub fn chebyshev(n: usize, half_width: f64) -> Self {
        assert!(n >= 2, "chebyshev axis needs at least two nodes");
        let big_n = n - 1;
        let t: Vec<f64> = (0..n).map(|j| (std::f64::consts::PI * j as f64 / big_n as f64).cos()).collect();
        let c = |j: usize| {
            let base = if j == 0 || j == big_n { 2.0 } else { 1.0 };
            if j.is_multiple_of(2) { base } else { -base }
        };
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    d[(i, j)] = c(i) / c(j) / (t[i] - t[j]);
                }
            }
        }
        // negative-sum trick for the diagonal
        for i in 0..n {
            let s: f64 = (0..n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
            d[(i, i)] = -s;
        }
        let d1 = d / half_width;
        let d2 = &d1 * &d1;
        Self { kind: AxisKind::Chebyshev, x: t.iter().map(|v| v * half_width).collect(), d1, d2 }
    }

    pub fn fd4_periodic(n: usize, half_width: f64) -> Self {
        assert!(n >= 5, "fourth-order stencil needs at least five points");
        let h = 2.0 * half_width / n as f64;
        let x = (0..n).map(|j| -half_width + h * j as f64).collect();
        let mut d1 = DMatrix::zeros(n, n);
        let mut d2 = DMatrix::zeros(n, n);
        let s1 = [(1i64, 8.0), (2, -1.0), (-1, -8.0), (-2, 1.0)];
        let s2 = [(0i64, -30.0), (1, 16.0), (2, -1.0), (-1, 16.0), (-2, -1.0)];
        for i in 0..n {
            for &(o, w) in &s1 {
                let j = (i as i64 + o).rem_euclid(n as i64) as usize;
                d1[(i, j)] += w / (12.0 * h);
            }
            for &(o, w) in &s2 {
                let j = (i as i64 + o).rem_euclid(n as i64) as usize;
                d2[(i, j)] += w / (12.0 * h * h);
            }
        }
        Self { kind: AxisKind::FiniteDifference4, x, d1, d2 }
    }

    /// Values T_k(x_j / L) for k = 0..=kmax, as a (kmax+1) × n matrix.
    pub fn chebyshev_modes(&self, kmax: usize) -> DMatrix<f64> {
        let l = self.x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        DMatrix::from_fn(kmax + 1, self.n(), |k, j| {
            let t = (self.x[j] / l).clamp(-1.0, 1.0);
            (k as f64 * t.acos()).cos()
        })
    }
}

/// Applies `m` along `axis` of a row-major complex tensor with the given shape.
pub fn apply_along(m: &DMatrix<f64>, data: &[Complex64], shape: &[usize], axis: usize) -> Vec<Complex64> {
    let n = shape[axis];
    debug_assert_eq!(m.nrows(), n);
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        for q in 0..inner {
            let base = o * n * inner + q;
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[base + j * inner];
            }
            for i in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    acc += line[j] * m[(i, j)];
                }
                out[base + i * inner] = acc;
            }
        }
    }
    out
}

/// Planned forward/inverse 2D FFT on an n × n row-major array.
/// The inverse is normalized so that `inverse(forward(a)) == a`.
#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        plan.process(data);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                col[r] = data[r * n + c];
            }
            plan.process(&mut col);
            for r in 0..n {
                data[r * n + c] = col[r];
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
        let s = 1.0 / (self.n * self.n) as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn fourier_differentiates_trigonometric_polynomials_exactly() {
        let l = 3.0;
        let ax = Axis::fourier(32, l);
        let k = std::f64::consts::PI / l * 3.0;
        let f: Vec<f64> = ax.x.iter().map(|x| (k * x).sin()).collect();
        let df = &ax.d1 * nalgebra::DVector::from_vec(f.clone());
        let d2f = &ax.d2 * nalgebra::DVector::from_vec(f);
        let e1: Vec<f64> = ax.x.iter().map(|x| k * (k * x).cos()).collect();
        let e2: Vec<f64> = ax.x.iter().map(|x| -k * k * (k * x).sin()).collect();
        assert!(max_err(df.as_slice(), &e1) < 1e-12);
        assert!(max_err(d2f.as_slice(), &e2) < 1e-11);
        assert!((&ax.d1 + ax.d1.transpose()).abs().max() < 1e-13);
    }

    #[test]
    fn chebyshev_differentiates_polynomials_exactly() {
        let ax = Axis::chebyshev(12, 0.7);
        let f: Vec<f64> = ax.x.iter().map(|x| x.powi(5) - 2.0 * x * x).collect();
        let v = nalgebra::DVector::from_vec(f);
        let d1 = &ax.d1 * &v;
        let d2 = &ax.d2 * &v;
        let e1: Vec<f64> = ax.x.iter().map(|x| 5.0 * x.powi(4) - 4.0 * x).collect();
        let e2: Vec<f64> = ax.x.iter().map(|x| 20.0 * x.powi(3) - 4.0).collect();
        assert!(max_err(d1.as_slice(), &e1) < 1e-12);
        assert!(max_err(d2.as_slice(), &e2) < 1e-10);
    }

    #[test]
    fn fd4_is_fourth_order() {
        let err = |n: usize| {
            let ax = Axis::fd4_periodic(n, std::f64::consts::PI);
            let f: Vec<f64> = ax.x.iter().map(|x| x.sin()).collect();
            let d = &ax.d1 * nalgebra::DVector::from_vec(f);
            let e: Vec<f64> = ax.x.iter().map(|x| x.cos()).collect();
            max_err(d.as_slice(), &e)
        };
        let order = (err(32) / err(64)).log2();
        assert!(order > 3.9, "order {order}");
    }

    #[test]
    fn apply_along_matches_matrix_product_on_each_axis() {
        let ax = Axis::chebyshev(5, 1.0);
        let shape = [5, 5];
        let data: Vec<Complex64> = (0..25).map(|i| Complex64::new(i as f64, (i * i) as f64 * 0.1)).collect();
        let d0 = apply_along(&ax.d1, &data, &shape, 0);
        let d1 = apply_along(&ax.d1, &data, &shape, 1);
        for a in 0..5 {
            for b in 0..5 {
                let mut e0 = Complex64::new(0.0, 0.0);
                let mut e1 = Complex64::new(0.0, 0.0);
                for j in 0..5 {
                    e0 += data[j * 5 + b] * ax.d1[(a, j)];
                    e1 += data[a * 5 + j] * ax.d1[(b, j)];
                }
                assert!((d0[a * 5 + b] - e0).norm() < 1e-12);
                assert!((d1[a * 5 + b] - e1).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fft2_round_trip_and_plane_wave() {
        let n = 8;
        let fft = Fft2::new(n);
        let mut a: Vec<Complex64> = (0..n * n)
            .map(|i| {
                let (r, c) = ((i / n) as f64, (i % n) as f64);
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (2.0 * r + 3.0 * c) / n as f64)
            })
            .collect();
        let orig = a.clone();
        fft.forward(&mut a);
        assert!((a[2 * n + 3].re - (n * n) as f64).abs() < 1e-10);
        fft.inverse(&mut a);
        for (x, y) in a.iter().zip(&orig) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn fftfreq_layout() {
        let k = fftfreq(4, 0.5);
        let w = std::f64::consts::PI;
        assert_eq!(k, vec![0.0, w, -2.0 * w, -w]);
    }
}
