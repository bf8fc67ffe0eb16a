//! Deficiency-space probes: solutions of Ĥψ = ±iψ for the quantum radial
//! Hamiltonian and the closed-form candidates ψ = D̃(H)·exp(∓½ p·r/H) for the
//! KvN Liouvillian, together with their square-integrability.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dot, norm2, validate, PhasePoint, SystemParams};
use crate::par::{map_slice, Exec};
use crate::quad::{integrate, integrate_log, log_sum_exp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Normalizable,
    NotNormalizable,
    Divergent,
    Inconclusive,
}

/// The free function D̃(H) multiplying the candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DTilde {
    /// e^{−H²}.
    Gaussian,
    /// exp(−1/((H − lo)(hi − H))) on (lo, hi), zero elsewhere.
    Window { lo: f64, hi: f64 },
}

impl DTilde {
    /// ln D̃(H), −∞ outside the support.
    pub fn ln(&self, h: f64) -> f64 {
        match *self {
            DTilde::Gaussian => -h * h,
            DTilde::Window { lo, hi } => {
                if h <= lo || h >= hi {
                    f64::NEG_INFINITY
                } else {
                    -1.0 / ((h - lo) * (hi - h))
                }
            }
        }
    }

    /// D̃′/D̃.
    pub fn log_derivative(&self, h: f64) -> f64 {
        match *self {
            DTilde::Gaussian => -2.0 * h,
            DTilde::Window { lo, hi } => {
                let q = (h - lo) * (hi - h);
                (hi + lo - 2.0 * h) / (q * q)
            }
        }
    }

    /// Range of H outside which D̃²·e^{β} < e^{−800} whenever β ≤ beta_max.
    fn support(&self, beta_max: f64) -> (f64, f64) {
        match *self {
            DTilde::Gaussian => {
                let cut = (0.5 * beta_max + 400.0).sqrt();
                (-cut, cut)
            }
            DTilde::Window { lo, hi } => (lo, hi),
        }
    }
}

const SHELL_EPS: f64 = 1e-12;

fn shell_energy(z: &PhasePoint, g: f64) -> Result<f64> {
    let r2 = norm2(&z.r);
    if r2 == 0.0 {
        return Err(Error::SingularInput("phase-space point at r = 0".into()));
    }
    let h = 0.5 * norm2(&z.p) - 0.5 * g / r2;
    if h.abs() < SHELL_EPS {
        return Err(Error::EnergyShellSingular(h.abs()));
    }
    Ok(h)
}

/// ψ = D̃(H) exp(∓½ p·r / H), upper sign for `Side::Plus`. Real valued.
pub fn kvn_deficiency_candidate(z: &PhasePoint, g: f64, side: Side, profile: DTilde) -> Result<Complex64> {
    let h = shell_energy(z, g)?;
    let ln = profile.ln(h) - side.sign() * 0.5 * dot(&z.p, &z.r) / h;
    Ok(Complex64::new(ln.exp(), 0.0))
}

/// (∇_r ln ψ, ∇_p ln ψ) from the closed form.
fn log_gradients(z: &PhasePoint, g: f64, side: Side, profile: DTilde) -> Result<([f64; 3], [f64; 3])> {
    let h = shell_energy(z, g)?;
    let r2 = norm2(&z.r);
    let pr = dot(&z.p, &z.r);
    let dl = profile.log_derivative(h);
    let s = side.sign();
    let mut gr = [0.0; 3];
    let mut gp = [0.0; 3];
    for k in 0..3 {
        let dh_dr = g * z.r[k] / (r2 * r2);
        let dh_dp = z.p[k];
        gr[k] = dl * dh_dr - s * 0.5 * (z.p[k] / h - pr * dh_dr / (h * h));
        gp[k] = dl * dh_dp - s * 0.5 * (z.r[k] / h - pr * dh_dp / (h * h));
    }
    Ok((gr, gp))
}

/// ℋ̂ψ/ψ with ℋ̂ = −i p·∂_r + i ∂_rH·∂_p.
fn liouvillian_ratio(z: &PhasePoint, g: f64, gr: &[f64; 3], gp: &[f64; 3]) -> Complex64 {
    let r2 = norm2(&z.r);
    let mut acc = 0.0;
    for k in 0..3 {
        acc += -z.p[k] * gr[k] + g * z.r[k] / (r2 * r2) * gp[k];
    }
    Complex64::new(0.0, acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigencheckReport {
    /// max |ℋ̂ψ ∓ iψ| / |ψ| with analytic derivatives.
    pub analytic: f64,
    /// Same with central differences of ψ at step 1e−5.
    pub finite_difference: f64,
}

/// Checks ℋ̂ψ = ±iψ for the closed-form candidate at every sample.
pub fn kvn_eigencheck(samples: &[PhasePoint], g: f64, side: Side, profile: DTilde, exec: Exec) -> Result<EigencheckReport> {
    let target = Complex64::new(0.0, side.sign());
    let per = map_slice(exec, samples, |z| -> Result<(f64, f64)> {
        let psi = kvn_deficiency_candidate(z, g, side, profile)?;
        if psi.norm() == 0.0 {
            return Ok((0.0, 0.0));
        }
        let (gr, gp) = log_gradients(z, g, side, profile)?;
        let analytic = (liouvillian_ratio(z, g, &gr, &gp) - target).norm();

        let step = 1e-5;
        let mut fr = [0.0; 3];
        let mut fp = [0.0; 3];
        for k in 0..3 {
            let mut a = *z;
            let mut b = *z;
            a.r[k] += step;
            b.r[k] -= step;
            fr[k] = (kvn_deficiency_candidate(&a, g, side, profile)? - kvn_deficiency_candidate(&b, g, side, profile)?).re
                / (2.0 * step * psi.re);
            let mut a = *z;
            let mut b = *z;
            a.p[k] += step;
            b.p[k] -= step;
            fp[k] = (kvn_deficiency_candidate(&a, g, side, profile)? - kvn_deficiency_candidate(&b, g, side, profile)?).re
                / (2.0 * step * psi.re);
        }
        let fd = (liouvillian_ratio(z, g, &fr, &fp) - target).norm();
        Ok((analytic, fd))
    });
    let mut report = EigencheckReport { analytic: 0.0, finite_difference: 0.0 };
    for r in per {
        let (a, f) = r?;
        report.analytic = report.analytic.max(a);
        report.finite_difference = report.finite_difference.max(f);
    }
    Ok(report)
}

/// Random phase-space points in the box |r_k| ≤ 2, |p_k| ≤ 2 with H inside
/// [h_min, h_max], one ChaCha8 stream per sample.
pub fn eigencheck_samples(n: usize, g: f64, h_min: f64, h_max: f64, seed: u64) -> Vec<PhasePoint> {
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            loop {
                let mut c = [0.0; 6];
                c.iter_mut().for_each(|v| *v = rng.random_range(-2.0..2.0));
                let z = PhasePoint::from_slice(&c);
                let r2 = norm2(&z.r);
                if r2 < 1e-2 {
                    continue;
                }
                let h = 0.5 * norm2(&z.p) - 0.5 * g / r2;
                if h >= h_min && h <= h_max {
                    return z;
                }
            }
        })
        .collect()
}

/// ln(2 sinh β / β) for β ≥ 0, the angular integral ∫₋₁¹ e^{βc} dc.
fn ln_angular(beta: f64) -> f64 {
    let b = beta.abs();
    if b < 1e-3 {
        std::f64::consts::LN_2 + b * b / 6.0
    } else {
        b - b.ln() + (-(-2.0 * b).exp()).ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Excluded shell band |H| < eta.
    pub eta: f64,
    pub rel_tol: f64,
    pub exec: Exec,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { eta: 1e-3, rel_tol: 1e-8, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTable {
    pub radii: Vec<f64>,
    /// ln I(R).
    pub log_integral: Vec<f64>,
    pub rel_err: Vec<f64>,
    /// Phase-space volume of the excluded band inside each ball.
    pub excluded_measure: Vec<f64>,
    pub eta: f64,
    pub verdict: Verdict,
}

impl GrowthTable {
    /// ln(I(R_{k+1}) / I(R_k)).
    pub fn log_ratios(&self) -> Vec<f64> {
        self.log_integral.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// ln ∫_{|p|≤R} p² D̃² (2 sinh β/β) dp at fixed r, with β = r p / |H| and the
/// band |H| < η removed. Integrated in u = 1/H, where β is linear.
pub fn log_inner(r: f64, big_r: f64, g: f64, profile: DTilde, opts: &ScanOptions) -> Result<f64> {
    let h_min = -0.5 * g / (r * r);
    let h_max = 0.5 * big_r * big_r + h_min;
    let (s_lo, s_hi) = profile.support(r * big_r / opts.eta);
    let phi = |u: f64| {
        let h = 1.0 / u;
        let p2 = 2.0 * h - 2.0 * h_min;
        if p2 <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let p = p2.sqrt();
        0.5 * p2.ln() + 2.0 * profile.ln(h) + ln_angular(r * p * u.abs()) - 2.0 * u.abs().ln()
    };
    let mut parts = Vec::new();
    // positive shell H ∈ [max(η, s_lo), min(h_max, s_hi)]
    let (a, b) = (opts.eta.max(s_lo), h_max.min(s_hi));
    if b > a {
        let (u0, u1) = (1.0 / b, 1.0 / a);
        let bps: Vec<f64> = (0..=8).map(|k| u0 * (u1 / u0).powf(k as f64 / 8.0)).collect();
        parts.push(integrate_log(phi, &bps, opts.rel_tol, 2000)?.0);
    }
    // negative shell H ∈ [max(h_min, s_lo), min(−η, h_max, s_hi)]
    let (a, b) = (h_min.max(s_lo), (-opts.eta).min(h_max).min(s_hi));
    if b > a {
        let (u0, u1) = (1.0 / b, 1.0 / a);
        let bps: Vec<f64> = (0..=8).map(|k| -((-u0) * ((u1 / u0).powf(k as f64 / 8.0)))).collect();
        let mut bps = bps;
        bps.sort_by(f64::total_cmp);
        parts.push(integrate_log(phi, &bps, opts.rel_tol, 2000)?.0);
    }
    Ok(if parts.is_empty() { f64::NEG_INFINITY } else { log_sum_exp(&parts) })
}

/// ln I(R) with I(R) = 8π² ∫₀^R r² dr ∫₀^R p² dp ∫₋₁¹ dc |ψ|².
pub fn log_ball_integral(big_r: f64, g: f64, profile: DTilde, opts: &ScanOptions) -> Result<(f64, f64)> {
    let r_lo = 1e-6 * big_r;
    let mut bps: Vec<f64> = (0..=12).map(|k| r_lo * (big_r / r_lo).powf(k as f64 / 12.0)).collect();
    for extra in [(g / (big_r * big_r)).sqrt(), (g / (2.0 * opts.eta)).sqrt()] {
        if extra > r_lo && extra < big_r {
            bps.push(extra);
        }
    }
    bps.sort_by(f64::total_cmp);
    // inner failures surface as −∞ here; the outer integral then reports them
    let failed = std::sync::atomic::AtomicBool::new(false);
    let outer = integrate_log(
        |r| match log_inner(r, big_r, g, profile, opts) {
            Ok(v) => 2.0 * r.ln() + v,
            Err(_) => {
                failed.store(true, std::sync::atomic::Ordering::Relaxed);
                f64::NEG_INFINITY
            }
        },
        &bps,
        opts.rel_tol * 10.0,
        2000,
    )?;
    if failed.load(std::sync::atomic::Ordering::Relaxed) {
        return Err(Error::QuadratureNonConvergence(format!("inner shell integral near |H| = {}", opts.eta)));
    }
    Ok(((8.0 * PI * PI).ln() + outer.0, outer.1))
}

/// Volume 8π²∫∫ 2 r² p² of the band |H| < η inside the ball of radius R.
fn excluded_measure(big_r: f64, g: f64, eta: f64) -> Result<f64> {
    let f = |r: f64| {
        let c = g / (r * r);
        let lo = (c - 2.0 * eta).max(0.0).sqrt().min(big_r);
        let hi = (c + 2.0 * eta).sqrt().min(big_r);
        r * r * 2.0 * (hi.powi(3) - lo.powi(3)) / 3.0
    };
    let mut bps = vec![0.0, big_r];
    for x in [(g / (big_r * big_r + 2.0 * eta)).sqrt(), (g / (big_r * big_r - 2.0 * eta).max(1e-300)).sqrt(), (g / (2.0 * eta)).sqrt()] {
        if x > 0.0 && x < big_r {
            bps.push(x);
        }
    }
    bps.sort_by(f64::total_cmp);
    Ok(8.0 * PI * PI * integrate(f, &bps, 1e-8, 1e-300, 4000)?.value)
}

/// Growth of ∫|ψ|² over nested phase-space balls |r|, |p| ≤ R.
///
/// The candidate |ψ|² depends on (|r|, |p|, cos χ) only, and the cos χ
/// integral is done in closed form. The side does not enter: p → −p maps one
/// side onto the other.
pub fn kvn_normalizability_scan(g: f64, profile: DTilde, side: Side, radii: &[f64], opts: &ScanOptions) -> Result<GrowthTable> {
    let _ = side;
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(Error::Precondition("radii must be positive and increasing".into()));
    }
    let rows = map_slice(opts.exec, radii, |&r| -> Result<(f64, f64, f64)> {
        let (li, err) = log_ball_integral(r, g, profile, opts)?;
        Ok((li, err, excluded_measure(r, g, opts.eta)?))
    });
    let mut table = GrowthTable {
        radii: radii.to_vec(),
        log_integral: Vec::new(),
        rel_err: Vec::new(),
        excluded_measure: Vec::new(),
        eta: opts.eta,
        verdict: Verdict::Inconclusive,
    };
    for row in rows {
        let (li, e, m) = row?;
        table.log_integral.push(li);
        table.rel_err.push(e);
        table.excluded_measure.push(m);
    }
    let ratios = table.log_ratios();
    let monotone = ratios.iter().all(|d| *d > 0.0);
    if ratios.len() >= 2 && monotone && ratios[ratios.len() - 2..].iter().all(|d| *d > 10f64.ln()) {
        table.verdict = Verdict::Divergent;
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QmDeficiencyOptions {
    pub big_r: f64,
    /// Smallest inner cutoff of the δ ladder.
    pub delta_min: f64,
    /// Step in ln r.
    pub h: f64,
    pub cauchy_tol: f64,
}

impl Default for QmDeficiencyOptions {
    fn default() -> Self {
        Self { big_r: 30.0, delta_min: 1e-10, h: 1e-3, cauchy_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QmDeficiency {
    pub side: Side,
    /// Log-grid nodes r_j, ascending.
    pub r: Vec<f64>,
    pub u: Vec<Complex64>,
    /// (δ, ∫_δ^R |u|² dr / ∫_{δ_min}^R |u|² dr), δ decreasing.
    pub growth: Vec<(f64, f64)>,
    /// ∫_{δ_min}^R |u|² dr for u scaled to |u(R)| = 1.
    pub norm_estimate: f64,
    pub verdict: Verdict,
}

/// Solution of −½u″ − (g/2r²)u = ±i u that decays at large r, integrated
/// inward on a log grid by complex Numerov, and its norm over (δ, R].
pub fn qm_deficiency_solution(params: &SystemParams, side: Side, opts: &QmDeficiencyOptions) -> Result<QmDeficiency> {
    let params = validate(*params)?;
    let g = params.g;
    let big_r = opts.big_r;
    // u ~ e^{κr} with κ² = ∓2i, Re κ < 0
    let lambda = Complex64::new(0.0, side.sign());
    let mut kappa = (-2.0 * lambda).sqrt();
    if kappa.re > 0.0 {
        kappa = -kappa;
    }
    if -kappa.re * big_r < 20.0 || g / (big_r * big_r) > 1e-2 {
        return Err(Error::AsymptoticsNotReached(format!(
            "R = {big_r}: need |Re κ|·R ≥ 20 and g/R² ≤ 1e−2 to isolate the decaying branch"
        )));
    }
    let s_lo = opts.delta_min.ln();
    let m = ((big_r.ln() - s_lo) / opts.h).ceil() as usize;
    let h = (big_r.ln() - s_lo) / m as f64;
    let s: Vec<f64> = (0..=m).map(|j| s_lo + h * j as f64).collect();
    let r: Vec<f64> = s.iter().map(|v| v.exp()).collect();
    let nu2 = g - 0.25;
    let q: Vec<Complex64> = r.iter().map(|&r| nu2 + 2.0 * lambda * r * r).collect();
    let c = h * h / 12.0;
    // w = r^{−1/2} u
    let mut w = vec![Complex64::new(0.0, 0.0); m + 1];
    w[m] = Complex64::new(big_r.powf(-0.5), 0.0);
    w[m - 1] = r[m - 1].powf(-0.5) * (kappa * (r[m - 1] - big_r)).exp();
    for j in (1..m).rev() {
        w[j - 1] = (2.0 * (1.0 - 5.0 * c * q[j]) * w[j] - (1.0 + c * q[j + 1]) * w[j + 1]) / (1.0 + c * q[j - 1]);
        if !w[j - 1].is_finite() {
            return Err(Error::Assertion("deficiency solution overflowed".into()));
        }
    }
    let u: Vec<Complex64> = w.iter().zip(&r).map(|(w, r)| w * r.sqrt()).collect();
    // ∫|u|²dr = ∫ r |u|² ds, cumulative from R inward
    let dens: Vec<f64> = u.iter().zip(&r).map(|(u, r)| r * u.norm_sqr()).collect();
    let mut cum = vec![0.0; m + 1];
    for j in (0..m).rev() {
        cum[j] = cum[j + 1] + 0.5 * h * (dens[j] + dens[j + 1]);
    }
    let total = cum[0];
    let mut growth = Vec::new();
    let mut delta = 1e-1f64;
    while delta >= opts.delta_min * (1.0 - 1e-9) {
        let j = (((delta.ln() - s_lo) / h).round() as usize).min(m);
        growth.push((r[j], cum[j] / total));
        delta /= 10.0;
    }
    let n = growth.len();
    let verdict = if n >= 2 && (growth[n - 1].1 - growth[n - 2].1).abs() <= opts.cauchy_tol {
        Verdict::Normalizable
    } else {
        Verdict::NotNormalizable
    };
    Ok(QmDeficiency { side, r, u, growth, norm_estimate: total, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_closed_form_examples() {
        // H = 1, p·r = 2
        let r = [1.0, 0.0, 0.0];
        let px = 2.0;
        let g = px * px - 2.0; // so that p²/2 − g/2 = 1 with |r| = 1 and p = (2, 0, 0)
        let z = PhasePoint::new(r, [px, 0.0, 0.0]);
        let v = kvn_deficiency_candidate(&z, g, Side::Plus, DTilde::Gaussian).unwrap();
        assert!((v.re - (-1.0f64).exp() * (-1.0f64).exp()).abs() < 1e-15);
        let z0 = PhasePoint::new([1.0, 0.0, 0.0], [0.0, 1.5, 0.0]);
        let h0: f64 = 1.125 - 0.25;
        let v0 = kvn_deficiency_candidate(&z0, 0.5, Side::Minus, DTilde::Gaussian).unwrap();
        assert!((v0.re - (-h0 * h0).exp()).abs() < 1e-15);
    }

    #[test]
    fn conjugate_side_flips_p_dot_r() {
        let z = PhasePoint::new([0.3, -1.0, 0.4], [0.9, 0.2, -1.1]);
        let flipped = PhasePoint::new(z.r, [-z.p[0], -z.p[1], -z.p[2]]);
        let a = kvn_deficiency_candidate(&z, 0.5, Side::Minus, DTilde::Gaussian).unwrap();
        let b = kvn_deficiency_candidate(&flipped, 0.5, Side::Plus, DTilde::Gaussian).unwrap();
        assert!((a - b).norm() < 1e-15 * a.norm());
    }

    #[test]
    fn shell_is_singular() {
        let z = PhasePoint::new([1.0, 0.0, 0.0], [0.5f64.sqrt(), 0.0, 0.0]);
        assert!(matches!(
            kvn_deficiency_candidate(&z, 0.5, Side::Plus, DTilde::Gaussian),
            Err(Error::EnergyShellSingular(_))
        ));
    }

    #[test]
    fn eigencheck_at_analytic_precision() {
        for g in [0.5, 0.0] {
            let samples = eigencheck_samples(100, g, 0.1, 4.0, 11);
            for side in [Side::Plus, Side::Minus] {
                let rep = kvn_eigencheck(&samples, g, side, DTilde::Gaussian, Exec::default()).unwrap();
                assert!(rep.analytic <= 1e-10, "{rep:?}");
                assert!(rep.finite_difference <= 1e-6, "{rep:?}");
            }
        }
    }

    #[test]
    fn angular_factor_matches_quadrature() {
        for beta in [0.0, 1e-4, 0.3, 5.0, 40.0] {
            let q = integrate(|c| (beta * c).exp(), &[-1.0, 1.0], 1e-13, 0.0, 200).unwrap().value;
            assert!((ln_angular(beta) - q.ln()).abs() < 1e-12, "{beta}");
        }
    }

    #[test]
    fn small_scan_is_monotone() {
        let t = kvn_normalizability_scan(0.5, DTilde::Gaussian, Side::Plus, &[5.0, 10.0], &ScanOptions::default()).unwrap();
        assert!(t.log_integral[1] > t.log_integral[0]);
        assert_eq!(t.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn strong_coupling_deficiency_is_normalizable() {
        let p = SystemParams::bare(1.25);
        for side in [Side::Plus, Side::Minus] {
            let d = qm_deficiency_solution(&p, side, &QmDeficiencyOptions::default()).unwrap();
            assert_eq!(d.verdict, Verdict::Normalizable);
            assert!(d.growth.windows(2).all(|w| w[1].1 >= w[0].1));
        }
    }

    #[test]
    fn short_box_is_rejected() {
        let opts = QmDeficiencyOptions { big_r: 5.0, ..Default::default() };
        assert!(matches!(
            qm_deficiency_solution(&SystemParams::bare(1.25), Side::Plus, &opts),
            Err(Error::AsymptoticsNotReached(_))
        ));
    }
}
