use kvnlab::kvn::{
    angular_surface_integral, ensemble_charge_series, evolve_grid, kvn_anomaly_pairing, kvn_identity_check,
    EnsembleOptions, GridEvolveOptions, GridPacket, IdentityGrid, InitialWaveSpec, KvnGridWave, PairingOrders, Splitting,
    TestVectors,
};
use kvnlab::potential::SmoothPotential;
use kvnlab::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ScenarioConfig;
use crate::output::{Check, Outcome, Table};
use crate::row;
use crate::scenarios::classical::time_grid;

fn splitting(name: &str) -> Result<Splitting> {
    match name {
        "strang" => Ok(Splitting::Strang),
        "yoshida4" => Ok(Splitting::Yoshida4),
        other => Err(Error::Precondition(format!("unknown splitting `{other}` (strang, yoshida4)"))),
    }
}

pub fn ensemble_spec(cfg: &ScenarioConfig) -> InitialWaveSpec {
    InitialWaveSpec::gaussian(cfg.r_bar, cfg.sigma, cfg.p_bar, cfg.sigma_p).with_phases(cfg.k_r, cfg.k_p)
}

pub fn kvn_evolve_grid(cfg: &ScenarioConfig) -> Result<Outcome> {
    let params = cfg.params;
    let wave = KvnGridWave::gaussian(cfg.n_grid, cfg.half_width, &GridPacket::default());
    let opts = GridEvolveOptions { splitting: splitting(&cfg.splitting)?, ..GridEvolveOptions::new(cfg.dt, cfg.t_final, cfg.records - 1) };
    let run = evolve_grid(&wave, &params, opts)?;

    let mut table = Table::new("charges", &["t", "H", "D", "norm", "anomaly"]);
    for (r, a) in run.series.records.iter().zip(&run.anomaly) {
        table.push(row![r.t, r.energy, r.dilation, r.norm, *a]);
    }
    let d0 = run.series.first().map_or(0.0, |r| r.dilation);
    let d_drift = run.series.max_abs_deviation(|r| r.dilation);
    let h_drift = run.series.max_abs_deviation(|r| r.energy);
    let (lhs, rhs) = run.balance();

    let mut out = Outcome { tables: vec![table], ..Default::default() };
    out.checks.push(Check::at_most("energy_drift", h_drift, 1e-8));
    if params.g == 0.0 {
        out.checks.push(Check::at_most("relative_dilation_drift", d_drift / d0.abs(), 1e-6));
    } else {
        // with ε > 0 the charge moves by exactly the integrated anomaly
        let gap = (lhs - rhs).abs() / lhs.abs().max(rhs.abs());
        out.checks.push(Check::at_most("relative_balance_gap", gap, 1e-4));
    }
    out.meta("n_grid", cfg.n_grid);
    out.meta("half_width", cfg.half_width);
    out.meta("dt", cfg.dt);
    out.meta("splitting", &cfg.splitting);
    out.meta("dilation_change", lhs);
    out.meta("integrated_anomaly", rhs);
    Ok(out)
}

pub fn kvn_evolve_ensemble(cfg: &ScenarioConfig) -> Result<Outcome> {
    let times = time_grid(cfg.t_final, cfg.records);
    let opts = EnsembleOptions { tol: cfg.tol, ..EnsembleOptions::default() };
    let run = ensemble_charge_series(&ensemble_spec(cfg), &cfg.params, cfg.n_samples, &times, cfg.seed, opts)?;
    let mut table = Table::new("charges", &["t", "H", "H_stat_err", "D", "D_stat_err", "norm"]);
    for (r, he) in run.series.records.iter().zip(&run.energy_stat_err) {
        table.push(row![r.t, r.energy, *he, r.dilation, r.stat_err, r.norm]);
    }
    let (drift, se) = run.dilation_drift();
    let mut out = Outcome { tables: vec![table], ..Default::default() };
    out.checks.push(Check::holds("dilation_drift", drift, &format!("|x| <= 3 * {se:e}"), drift.abs() <= 3.0 * se));
    out.checks.push(Check::at_most("stat_err", se, 1e-2));
    out.meta("samples", cfg.n_samples);
    out.meta("retained", run.retained);
    out.meta("rejected_weight", run.rejected_weight);
    out.meta("tol", cfg.tol);
    Ok(out)
}

pub fn kvn_anomaly(cfg: &ScenarioConfig) -> Result<Outcome> {
    let spec = match cfg.profile.as_str() {
        "singular" => InitialWaveSpec::Singular { sigma_r: cfg.sigma, sigma_p: cfg.sigma_p },
        "gaussian" => ensemble_spec(cfg),
        other => return Err(Error::Precondition(format!("unknown KvN profile `{other}` (singular, gaussian)"))),
    };
    let orders = PairingOrders { n_theta: cfg.quad_order, n_phi: 2 * cfg.quad_order, ..PairingOrders::default() };
    let points = kvn_anomaly_pairing(&spec, &cfg.params, &cfg.eps_ladder, orders)?;
    let mut table = Table::new("pairing", &["epsilon", "anomaly", "quad_err"]);
    let mut worst = 0.0f64;
    for p in &points {
        table.push(row![p.epsilon, p.value, p.err]);
        worst = worst.max(p.value.abs());
    }
    let mut out = Outcome { tables: vec![table], ..Default::default() };
    if cfg.profile == "singular" {
        out.checks.push(Check::at_most("max_abs_anomaly", worst, 1e-8));
    }
    out.meta("n_theta", orders.n_theta);
    out.meta("n_phi", orders.n_phi);
    Ok(out)
}

pub fn kvn_identity(cfg: &ScenarioConfig) -> Result<Outcome> {
    let p = cfg.params;
    let v = match cfg.profile.as_str() {
        "singular" | "inverse-square" => SmoothPotential::InverseSquare { g: p.g, epsilon: p.epsilon },
        "gaussian" => SmoothPotential::GaussianWell { depth: p.g, width: cfg.sigma },
        other => return Err(Error::Precondition(format!("unknown potential `{other}` (inverse-square, gaussian)"))),
    };
    let vectors = TestVectors::ChebyshevBand { kmax: 6, count: cfg.n_samples, seed: cfg.seed };
    let r = kvn_identity_check(v, IdentityGrid::chebyshev(cfg.n_grid, cfg.half_width), vectors)?;
    let mut table = Table::new("identity", &["n_grid", "half_width", "residual"]);
    table.push(row![cfg.n_grid, cfg.half_width, r]);
    let mut out = Outcome { tables: vec![table], ..Default::default() };
    out.checks.push(Check::at_most("residual", r, 1e-8));
    out.meta("test_vectors", cfg.n_samples);
    Ok(out)
}

pub fn angular_integral(cfg: &ScenarioConfig) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = Table::new("angular", &["lambda_x", "lambda_y", "lambda_z", "integral"]);
    let mut worst = 0.0f64;
    for _ in 0..cfg.n_samples {
        let l = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let v = angular_surface_integral(&l, cfg.quad_order, 2 * cfg.quad_order)?;
        table.push(row![l[0], l[1], l[2], v]);
        worst = worst.max(v.abs());
    }
    let mut out = Outcome { tables: vec![table], ..Default::default() };
    out.checks.push(Check::at_most("max_abs_integral", worst, 1e-14));
    out.meta("n_theta", cfg.quad_order);
    out.meta("n_phi", 2 * cfg.quad_order);
    Ok(out)
}
