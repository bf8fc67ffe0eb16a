//! The Dirichlet-at-a tower of the unbounded problem is E_n = −x_n²/(2a²), with
//! x_n the zeros of K_{iν}. K_{iν} is evaluated here from its integral
//! representation by composite Simpson, independently of the shooting code.

use std::f64::consts::PI;

use kvnlab::quantum::{bound_spectrum, SpectrumOptions};
use kvnlab::SystemParams;

/// K_{iν}(x) = ∫₀^∞ e^{−x cosh t} cos(νt) dt, truncated where e^{−x cosh t} < e^{−60}.
fn k_imag(nu: f64, x: f64) -> f64 {
    let t_max = (60.0 / x).acosh() + 1.0;
    let n = 40_000;
    let h = t_max / n as f64;
    let f = |t: f64| (-x * t.cosh()).exp() * (nu * t).cos();
    let mut s = f(0.0) + f(t_max);
    for k in 1..n {
        s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// The `count` largest zeros of K_{iν}, largest first.
fn largest_zeros(nu: f64, count: usize) -> Vec<f64> {
    let mut zeros = Vec::new();
    let mut y = 2f64.ln();
    let mut prev = k_imag(nu, y.exp());
    while zeros.len() < count {
        let y_next = y - 0.05;
        let cur = k_imag(nu, y_next.exp());
        if prev.signum() != cur.signum() {
            let (mut hi, mut lo) = (y, y_next);
            let s_hi = prev.signum();
            for _ in 0..60 {
                let mid = 0.5 * (hi + lo);
                if k_imag(nu, mid.exp()).signum() == s_hi {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            zeros.push((0.5 * (hi + lo)).exp());
        }
        y = y_next;
        prev = cur;
    }
    zeros
}

#[test]
fn tower_matches_bessel_zeros_at_nu_one() {
    let a = 1e-5;
    let params = SystemParams::bare(1.25).with_cutoffs(a, 100.0);
    let tower = bound_spectrum(&params, 4, &SpectrumOptions::default()).unwrap();
    let zeros = largest_zeros(1.0, 4);
    for (e, x) in tower.energies.iter().zip(&zeros) {
        let exact = -x * x / (2.0 * a * a);
        assert!((e / exact - 1.0).abs() < 1e-6, "{e} vs {exact}");
    }
    // the oracle itself approaches the geometric ratio from one side
    let target = (-2.0 * PI).exp();
    let dev: Vec<f64> = zeros.windows(2).map(|w| (w[1] * w[1]) / (w[0] * w[0]) / target - 1.0).collect();
    assert!(dev.windows(2).all(|d| d[1].abs() < d[0].abs()), "{dev:?}");
    assert!(dev[0].abs() < 5e-3);
}

#[test]
fn tower_matches_bessel_zeros_at_other_coupling() {
    let (g, a) = (2.0, 1e-4);
    let nu = (g - 0.25f64).sqrt();
    let params = SystemParams::bare(g).with_cutoffs(a, 100.0);
    let tower = bound_spectrum(&params, 3, &SpectrumOptions::default()).unwrap();
    let zeros = largest_zeros(nu, 3);
    for (e, x) in tower.energies.iter().zip(&zeros) {
        let exact = -x * x / (2.0 * a * a);
        assert!((e / exact - 1.0).abs() < 1e-6, "{e} vs {exact}");
    }
}
