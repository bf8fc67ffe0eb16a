use kvnlab::classical::{
    action_scale_variation, analytic_moments, first_order_coefficient, integrate_trajectory, DiscretePath, PotentialTag,
};
use kvnlab::kvn::{kvn_action_scale_variation, KvnPath, KvnWeight};
use kvnlab::model::{norm2, PhasePoint};
use kvnlab::par::{map_indexed, Exec};
use kvnlab::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ScenarioConfig;
use crate::output::{Check, Outcome, Table};
use crate::row;

pub fn time_grid(t_final: f64, records: usize) -> Vec<f64> {
    let m = records - 1;
    (0..=m).map(|k| t_final * k as f64 / m as f64).collect()
}

/// Initial conditions with L² > g + 0.1 drawn from one seeded stream.
pub fn random_initial_conditions(n: usize, g: f64, seed: u64) -> Vec<PhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let r = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let p = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
        let z = PhasePoint::new(r, p);
        if norm2(&r) > 0.09 && z.angular_momentum_sq() > g + 0.1 {
            out.push(z);
        }
    }
    out
}

pub fn classical_charge(cfg: &ScenarioConfig) -> Result<Outcome> {
    let params = cfg.params;
    let times = time_grid(cfg.t_final, cfg.records);
    let ics = random_initial_conditions(cfg.n_samples, params.g, cfg.seed);
    let runs = map_indexed(Exec::default(), ics.len(), |i| integrate_trajectory(ics[i], &params, &times, cfg.tol));

    let mut table = Table::new("charges", &["sample", "t", "H", "D", "r", "capture_flag"]);
    let mut d_err = 0.0f64;
    let mut r2_err = 0.0f64;
    let mut captured = 0usize;
    for (i, (ic, run)) in ics.iter().zip(runs).enumerate() {
        let traj = run?;
        let d0 = -0.5 * ic.r_dot_p();
        captured += traj.capture_event.is_some() as usize;
        for ((t, z), c) in traj.samples.iter().zip(&traj.charges) {
            let flag = traj.capture_event.is_some_and(|tc| tc <= *t);
            table.push(row![i, *t, c.energy, c.dilation, z.radius(), flag]);
            d_err = d_err.max((c.dilation - d0).abs());
            if params.epsilon == 0.0 {
                let m = analytic_moments(ic, &params, *t)?;
                r2_err = r2_err.max((norm2(&z.r) - m.r2).abs());
            }
        }
    }
    let mut out = Outcome { tables: vec![table], ..Default::default() };
    out.checks.push(Check::at_most("dilation_deviation", d_err, 1e-8));
    if params.epsilon == 0.0 {
        out.checks.push(Check::at_most("r2_deviation", r2_err, 1e-8));
    }
    out.meta("trajectories", cfg.n_samples);
    out.meta("captured", captured);
    out.meta("tol", cfg.tol);
    Ok(out)
}

/// A smooth test path that stays away from the origin.
fn classical_path(n: usize) -> Result<DiscretePath> {
    DiscretePath::sample(0.2, 2.2, n, |t| [1.0 + 0.4 * t, 0.3 * (2.0 * t).cos(), 0.1 * t])
}

fn kvn_path(n: usize) -> Result<KvnPath> {
    KvnPath::sample(0.2, 2.2, n, |t| ([1.0 + 0.4 * t, 0.3 * (2.0 * t).cos(), 0.1 * t], [0.5 * t.sin(), 1.0 - 0.2 * t, 0.3]))
}

pub fn action_variation(cfg: &ScenarioConfig) -> Result<Outcome> {
    let g = cfg.params.g;
    let alphas = &cfg.eps_ladder;
    let path = classical_path(cfg.n_grid)?;
    let kpath = kvn_path(cfg.n_grid)?;
    let inv = PotentialTag::InverseSquare { g };
    let mut table = Table::new("variation", &["alpha", "dS_inverse_square", "dS_harmonic", "dKvn_inverse_square", "dKvn_deformed"]);
    let mut cols = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for &a in alphas {
        let v = [
            action_scale_variation(&path, a, inv)?,
            action_scale_variation(&path, a, PotentialTag::Harmonic)?,
            kvn_action_scale_variation(&kpath, a, KvnWeight::inverse_square(g))?,
            kvn_action_scale_variation(&kpath, a, KvnWeight::deformed(g))?,
        ];
        table.push(row![a, v[0], v[1], v[2], v[3]]);
        for (c, x) in cols.iter_mut().zip(v) {
            c.push(x);
        }
    }
    let c1: Vec<f64> = cols.iter().map(|c| first_order_coefficient(alphas, c)).collect();
    let mut coeffs = Table::new("coefficients", &["action", "c1"]);
    for (name, c) in ["classical_inverse_square", "classical_harmonic", "kvn_inverse_square", "kvn_deformed"].iter().zip(&c1) {
        coeffs.push(row![*name, *c]);
    }
    let mut out = Outcome { tables: vec![table, coeffs], ..Default::default() };
    out.checks.push(Check::at_most("classical_inverse_square_c1", c1[0].abs(), 1e-6));
    out.checks.push(Check::at_least("classical_harmonic_c1", c1[1].abs(), 1e-2));
    out.checks.push(Check::at_most("kvn_inverse_square_c1", c1[2].abs(), 1e-6));
    out.checks.push(Check::at_least("kvn_deformed_c1", c1[3].abs(), 1e-2));
    out.meta("path_intervals", cfg.n_grid);
    Ok(out)
}
