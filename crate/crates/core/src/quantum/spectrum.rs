//! Bound states of the cutoff problem by Numerov shooting in s = ln r.
//!
//! The log-amplitude w = r^{−1/2}u obeys w″ = −(ν² + 2E e^{2s}) w. For a trial E the
//! solution vanishing at the outer end is integrated inward to r = a, and its
//! sign changes count the eigenvalues below E (Sturm oscillation). Bisection in
//! ln(−E) on that count isolates each state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate, SystemParams};
use crate::par::{map_indexed, Exec};

/// Decay lengths kept beyond the classical turning point before the outer wall.
const DECAY_LENGTHS: f64 = 40.0;
const RESCALE: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Step in ln r.
    pub h: f64,
    /// Relative bisection tolerance on E.
    pub tol: f64,
    pub exec: Exec,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { h: 5e-3, tol: 1e-12, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundStateTower {
    pub params: SystemParams,
    /// E₀ < E₁ < … < 0, counted from the deepest state of the cutoff problem.
    pub energies: Vec<f64>,
    /// |w(a)| / max|w| at the converged energy.
    pub residuals: Vec<f64>,
}

impl BoundStateTower {
    pub fn ratios(&self) -> Vec<f64> {
        self.energies.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

struct Sweep {
    nodes: usize,
    /// w at r = a relative to the largest |w| seen.
    wall: f64,
}

/// Inward Numerov sweep from the outer end to r = a.
fn sweep(g: f64, a: f64, big_r: f64, energy: f64, h: f64) -> Sweep {
    let nu2 = g - 0.25;
    let kappa = (-2.0 * energy).max(0.0).sqrt();
    let r_end = if kappa > 0.0 { big_r.min((nu2.max(0.0).sqrt() + DECAY_LENGTHS) / kappa) } else { big_r };
    let s0 = a.ln();
    if r_end <= a * (2.0 * h).exp() {
        return Sweep { nodes: 0, wall: 1.0 };
    }
    let m = ((r_end.ln() - s0) / h).ceil() as usize;
    let q = |j: usize| nu2 + 2.0 * energy * (2.0 * (s0 + h * j as f64)).exp();
    let c = h * h / 12.0;

    let mut w_next = 0.0; // j = m, the Dirichlet end
    let mut w = 1e-300f64.sqrt(); // j = m − 1
    let mut wmax = w.abs();
    let mut nodes = 0usize;
    let mut q_next = q(m);
    let mut q_cur = q(m - 1);
    for j in (0..m - 1).rev() {
        let q_prev = q(j);
        let w_prev = (2.0 * (1.0 - 5.0 * c * q_cur) * w - (1.0 + c * q_next) * w_next) / (1.0 + c * q_prev);
        if w_prev != 0.0 && w != 0.0 && (w_prev > 0.0) != (w > 0.0) {
            nodes += 1;
        }
        w_next = w;
        w = w_prev;
        q_next = q_cur;
        q_cur = q_prev;
        wmax = wmax.max(w.abs());
        if wmax > RESCALE {
            w /= RESCALE;
            w_next /= RESCALE;
            wmax /= RESCALE;
        }
    }
    Sweep { nodes, wall: w / wmax }
}

/// Number of bound states (E < 0) of the cutoff problem on [a, R].
pub fn count_bound_states(params: &SystemParams, opts: &SpectrumOptions) -> usize {
    sweep(params.g, params.cutoff_a, params.box_r, -0.0, opts.h).nodes
}

/// Whether the k-th state's tail decays well inside the box.
fn resolvable(params: &SystemParams, energy: f64) -> bool {
    let kappa = (-2.0 * energy).sqrt();
    (params.g - 0.25).max(0.0).sqrt() + DECAY_LENGTHS < kappa * params.box_r
}

fn bisect_state(params: &SystemParams, k: usize, opts: &SpectrumOptions) -> (f64, f64) {
    let (g, a, big_r) = (params.g, params.cutoff_a, params.box_r);
    let count = |y: f64| sweep(g, a, big_r, -y.exp(), opts.h).nodes;
    // ln(−E): large y is deep (few states below), small y is shallow
    let mut y_deep = (g / (2.0 * a * a)).max(1.0).ln() + 1.0;
    let mut y_shallow = y_deep - 2.0;
    while count(y_shallow) <= k {
        y_deep = y_shallow;
        y_shallow -= 2.0;
    }
    while (y_deep - y_shallow) > opts.tol {
        let mid = 0.5 * (y_deep + y_shallow);
        if count(mid) <= k {
            y_deep = mid;
        } else {
            y_shallow = mid;
        }
    }
    let e = -(0.5 * (y_deep + y_shallow)).exp();
    (e, sweep(g, a, big_r, e, opts.h).wall.abs())
}

/// The `n_states` deepest bound states of the cutoff problem.
///
/// Every returned state must have its exponential tail decay well inside the
/// box; otherwise the tower is reported as `NotEnoughStates`.
pub fn bound_spectrum(params: &SystemParams, n_states: usize, opts: &SpectrumOptions) -> Result<BoundStateTower> {
    let params = validate(*params)?;
    let total = count_bound_states(&params, opts);
    if total < n_states {
        return Err(Error::NotEnoughStates { requested: n_states, found: total });
    }
    let states = map_indexed(opts.exec, n_states, |k| bisect_state(&params, k, opts));
    let found = states.iter().take_while(|(e, _)| resolvable(&params, *e)).count();
    if found < n_states {
        return Err(Error::NotEnoughStates { requested: n_states, found });
    }
    let (energies, residuals): (Vec<f64>, Vec<f64>) = states.into_iter().unzip();
    if energies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Assertion(format!("bound-state energies not strictly increasing: {energies:?}")));
    }
    Ok(BoundStateTower { params, energies, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(a: f64) -> SystemParams {
        SystemParams::bare(1.25).with_cutoffs(a, 100.0)
    }

    #[test]
    fn node_count_is_monotone_in_energy() {
        let p = params(1e-5);
        let opts = SpectrumOptions::default();
        let mut last = 0;
        for y in (-10..25).rev() {
            let n = sweep(p.g, p.cutoff_a, p.box_r, -(y as f64).exp(), opts.h).nodes;
            assert!(n >= last, "count dropped at y = {y}");
            last = n;
        }
        assert_eq!(last, count_bound_states(&p, &opts));
    }

    #[test]
    fn geometric_tower_at_nu_one() {
        let tower = bound_spectrum(&params(1e-5), 4, &SpectrumOptions::default()).unwrap();
        let target = (-2.0 * PI).exp();
        for r in tower.ratios() {
            assert!((r / target - 1.0).abs() < 5e-3, "{r} vs {target}");
        }
        assert!(tower.residuals.iter().all(|r| *r < 1e-6), "{:?}", tower.residuals);
    }

    #[test]
    fn rescaled_cutoff_shifts_the_tower_by_one() {
        let opts = SpectrumOptions::default();
        let a = 1e-5;
        let base = bound_spectrum(&params(a), 4, &opts).unwrap();
        let moved = bound_spectrum(&params(a * PI.exp()), 3, &opts).unwrap();
        for (n, e) in moved.energies.iter().enumerate() {
            assert!((e / base.energies[n + 1] - 1.0).abs() < 5e-3, "{e} vs {}", base.energies[n + 1]);
        }
    }

    #[test]
    fn weak_coupling_has_no_bound_states() {
        let opts = SpectrumOptions::default();
        for a in [1e-2, 1e-4, 1e-6] {
            let p = SystemParams::bare(0.1).with_cutoffs(a, 100.0);
            assert_eq!(count_bound_states(&p, &opts), 0);
        }
        assert!(matches!(
            bound_spectrum(&SystemParams::bare(0.1).with_cutoffs(1e-4, 100.0), 1, &opts),
            Err(Error::NotEnoughStates { found: 0, .. })
        ));
    }

    #[test]
    fn box_limited_states_are_not_reported() {
        let p = params(1e-5);
        let opts = SpectrumOptions::default();
        let total = count_bound_states(&p, &opts);
        assert!(matches!(bound_spectrum(&p, total, &opts), Err(Error::NotEnoughStates { .. })));
    }
}
