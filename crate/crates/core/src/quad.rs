//! Quadrature and extrapolation utilities.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            } else {
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    (
        x.iter().map(|&t| c + h * t).collect(),
        w.iter().map(|&wi| wi * h).collect(),
    )
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub err: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss–Kronrod (7/15) over the listed breakpoints.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<QuadResult> {
    assert!(breakpoints.len() >= 2);
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breakpoints.windows(2) {
        let (v, e) = gk15(&f, w[0], w[1]);
        total += v;
        total_err += e;
        heap.push(Segment { a: w[0], b: w[1], value: v, err: e });
    }
    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= max_intervals {
            return Err(Error::QuadratureNonConvergence(format!(
                "value {total:e}, error estimate {total_err:e} after {} intervals",
                heap.len()
            )));
        }
        let seg = heap.pop().expect("non-empty");
        let m = 0.5 * (seg.a + seg.b);
        let (v1, e1) = gk15(&f, seg.a, m);
        let (v2, e2) = gk15(&f, m, seg.b);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.err;
        heap.push(Segment { a: seg.a, b: m, value: v1, err: e1 });
        heap.push(Segment { a: m, b: seg.b, value: v2, err: e2 });
    }
    // re-sum to shed accumulated update error
    let segs = heap.into_vec();
    let value = crate::par::compensated_sum(segs.iter().map(|s| s.value));
    let err = segs.iter().map(|s| s.err).sum();
    Ok(QuadResult { value, err, intervals: segs.len() })
}

/// ∫_a^∞ f via x = a + t/(1 − t); `scale` sets where t = 1/2 lands.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    inner_breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult> {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let x = a + scale * t / (1.0 - t);
        let jac = scale / ((1.0 - t) * (1.0 - t));
        let v = f(x) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let mut bps = vec![0.0];
    for &x in inner_breaks {
        if x > a {
            let u = (x - a) / scale;
            bps.push(u / (1.0 + u));
        }
    }
    bps.push(1.0);
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    integrate(g, &bps, rel_tol, abs_tol, 4000)
}

/// log(Σ exp(xs)).
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn log_gk15<F: Fn(f64) -> f64>(phi: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut vals = [0.0; 15];
    vals[7] = phi(c);
    for j in 0..7 {
        vals[j] = phi(c - h * XGK[j]);
        vals[14 - j] = phi(c + h * XGK[j]);
    }
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, f64::NEG_INFINITY);
    }
    let e = |k: usize| (vals[k] - m).exp();
    let mut kron = e(7) * WGK[7];
    let mut gauss = e(7) * WG[3];
    for j in 0..7 {
        let s = e(j) + e(14 - j);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let lh = h.ln();
    let err = ((kron - gauss).abs()).max(1e-300);
    (m + lh + kron.max(1e-300).ln(), m + lh + err.ln())
}

struct LogSegment {
    a: f64,
    b: f64,
    log_value: f64,
    log_err: f64,
}
impl PartialEq for LogSegment {
    fn eq(&self, o: &Self) -> bool {
        self.log_err == o.log_err
    }
}
impl Eq for LogSegment {}
impl PartialOrd for LogSegment {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for LogSegment {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.log_err.total_cmp(&o.log_err)
    }
}

/// Adaptive quadrature of exp(φ(x)) returning (log of integral, relative error).
///
/// Works for integrands whose magnitude overflows f64. φ = −∞ marks zeros.
pub fn integrate_log<F: Fn(f64) -> f64>(
    phi: F,
    breakpoints: &[f64],
    rel_tol: f64,
    max_intervals: usize,
) -> Result<(f64, f64)> {
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            let (v, e) = log_gk15(&phi, w[0], w[1]);
            heap.push(LogSegment { a: w[0], b: w[1], log_value: v, log_err: e });
        }
    }
    if heap.is_empty() {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    loop {
        let segs: Vec<&LogSegment> = heap.iter().collect();
        let lv = log_sum_exp(&segs.iter().map(|s| s.log_value).collect::<Vec<_>>());
        let le = log_sum_exp(&segs.iter().map(|s| s.log_err).collect::<Vec<_>>());
        let rel = (le - lv).exp();
        if lv == f64::NEG_INFINITY {
            return Ok((lv, 0.0));
        }
        if rel <= rel_tol {
            return Ok((lv, rel));
        }
        if heap.len() >= max_intervals {
            return Err(Error::QuadratureNonConvergence(format!(
                "log-space integral: relative error {rel:e} after {} intervals",
                heap.len()
            )));
        }
        let seg = heap.pop().expect("non-empty");
        let m = 0.5 * (seg.a + seg.b);
        let (v1, e1) = log_gk15(&phi, seg.a, m);
        let (v2, e2) = log_gk15(&phi, m, seg.b);
        heap.push(LogSegment { a: seg.a, b: m, log_value: v1, log_err: e1 });
        heap.push(LogSegment { a: m, b: seg.b, log_value: v2, log_err: e2 });
    }
}

/// Neville polynomial extrapolation of (xs, ys) to x0.
pub fn neville(xs: &[f64], ys: &[f64], x0: f64) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mut p = ys.to_vec();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = ((x0 - xs[i + k]) * p[i] + (xs[i] - x0) * p[i + 1]) / (xs[i] - xs[i + k]);
        }
    }
    p[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert_relative_eq!(s, exact, epsilon = 1e-13);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn adaptive_gk_handles_peaks() {
        let eps = 1e-3;
        let r = integrate(|x| eps / (x * x + eps * eps), &[-1.0, 0.0, 1.0], 1e-12, 0.0, 2000).unwrap();
        assert_relative_eq!(r.value, 2.0 * (1.0 / eps).atan(), epsilon = 1e-11);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let r = integrate_to_infinity(|x| (-x * x).exp(), 0.0, 1.0, &[], 1e-12, 0.0).unwrap();
        assert_relative_eq!(r.value, 0.5 * std::f64::consts::PI.sqrt(), epsilon = 1e-11);
    }

    #[test]
    fn log_space_integral_of_huge_exponential() {
        // ∫_0^1 e^{1000 x} dx = (e^{1000} − 1)/1000
        let (lv, rel) = integrate_log(|x| 1000.0 * x, &[0.0, 1.0], 1e-10, 500).unwrap();
        assert!(rel <= 1e-10);
        assert_relative_eq!(lv, 1000.0 - 1000f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn neville_recovers_polynomial_limit() {
        let xs = [0.1, 0.03, 0.01, 0.003];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 + 3.0 * x - x * x + 0.5 * x * x * x).collect();
        assert_relative_eq!(neville(&xs, &ys, 0.0), 2.0, epsilon = 1e-12);
    }
}
