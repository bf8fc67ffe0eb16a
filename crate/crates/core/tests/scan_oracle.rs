//! Direct (|r|, |p|, cos χ) quadrature of |ψ|² for the window profile, where
//! the energy shell never reaches H = 0 and no band has to be excluded.

use std::f64::consts::PI;

use kvnlab::selfadjoint::{kvn_deficiency_candidate, log_ball_integral, DTilde, ScanOptions, Side};
use kvnlab::PhasePoint;

fn simpson_weights(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|k| {
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            (a + k as f64 * h, w * h / 3.0)
        })
        .collect()
}

/// 8π² ∫ r² dr ∫ p² dp ∫ dc |ψ|², with ψ from the closed-form candidate at
/// r = (|r|, 0, 0), p = |p|(c, √(1−c²), 0).
fn direct(big_r: f64, g: f64, profile: DTilde, side: Side) -> f64 {
    let rs = simpson_weights(600, 0.0, big_r);
    let ps = simpson_weights(600, 0.0, big_r);
    let cs = simpson_weights(96, -1.0, 1.0);
    let mut total = 0.0;
    for &(r, wr) in &rs[1..] {
        for &(p, wp) in &ps {
            let mut inner = 0.0;
            for &(c, wc) in &cs {
                let z = PhasePoint::new([r, 0.0, 0.0], [p * c, p * (1.0 - c * c).max(0.0).sqrt(), 0.0]);
                let v = match kvn_deficiency_candidate(&z, g, side, profile) {
                    Ok(psi) => psi.norm_sqr(),
                    Err(_) => 0.0,
                };
                inner += wc * v;
            }
            total += wr * wp * r * r * p * p * inner;
        }
    }
    8.0 * PI * PI * total
}

#[test]
fn reduced_scan_matches_direct_quadrature() {
    let profile = DTilde::Window { lo: 1.0, hi: 2.0 };
    let g = 0.5;
    for big_r in [2.0, 3.0] {
        let (ln_i, _) = log_ball_integral(big_r, g, profile, &ScanOptions::default()).unwrap();
        for side in [Side::Plus, Side::Minus] {
            let d = direct(big_r, g, profile, side);
            assert!((ln_i - d.ln()).abs() < 1e-5, "R = {big_r}: {} vs {}", ln_i.exp(), d);
        }
    }
}
