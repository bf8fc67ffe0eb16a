use std::f64::consts::PI;

use kvnlab::kvn::{ensemble_charge_series, EnsembleOptions};
use kvnlab::potential::SmoothPotential;
use kvnlab::quantum::{
    anomaly_rate, bound_spectrum, count_bound_states, evolve_wavepacket, identity_refinement, pairing_consistency,
    quantum_anomaly_pairing, quantum_identity_check, EvolveOptions, QuantumIdentityGrid, QuantumProfile, RadialGrid,
    RadialWavefunction, SpectrumOptions,
};
use kvnlab::kvn::TestVectors;
use kvnlab::spectral::AxisKind;
use kvnlab::{Error, Result};
use num_complex::Complex64;

use crate::config::ScenarioConfig;
use crate::output::{Cell, Check, Outcome, Table};
use crate::row;
use crate::scenarios::classical::time_grid;
use crate::scenarios::kvn::ensemble_spec;

pub fn qm_spectrum(cfg: &ScenarioConfig) -> Result<Outcome> {
    let p = cfg.params;
    let nu = p.nu().ok_or_else(|| Error::Precondition(format!("g = {} has no bound-state tower (need g > 1/4)", p.g)))?;
    let opts = SpectrumOptions { tol: cfg.tol, ..SpectrumOptions::default() };
    let tower = bound_spectrum(&p, cfg.n_states, &opts)?;
    let target = (-2.0 * PI / nu).exp();

    let mut table = Table::new("spectrum", &["n", "E_n", "ratio", "residual"]);
    let ratios = tower.ratios();
    for (n, (e, res)) in tower.energies.iter().zip(&tower.residuals).enumerate() {
        let ratio = ratios.get(n).map_or(Cell::S(String::new()), |r| Cell::F(*r));
        table.push(vec![Cell::from(n), Cell::F(*e), ratio, Cell::F(*res)]);
    }

    // a → a·e^{π/ν} moves every level up by one rung
    let moved_params = p.with_cutoffs(p.cutoff_a * (PI / nu).exp(), p.box_r);
    let moved = bound_spectrum(&moved_params, cfg.n_states - 1, &opts)?;
    let mut rescaled = Table::new("rescaled", &["n", "E_n_rescaled", "E_n_plus_1", "relative_difference"]);
    let mut worst_shift = 0.0f64;
    for (n, e) in moved.energies.iter().enumerate() {
        let base = tower.energies[n + 1];
        let d = (e / base - 1.0).abs();
        worst_shift = worst_shift.max(d);
        rescaled.push(row![n, *e, base, d]);
    }
    let worst_ratio = ratios.iter().map(|r| (r / target - 1.0).abs()).fold(0.0, f64::max);

    let mut out = Outcome { tables: vec![table, rescaled], ..Default::default() };
    out.checks.push(Check::at_most("max_ratio_deviation", worst_ratio, 5e-3));
    out.checks.push(Check::at_most("max_rescaling_deviation", worst_shift, 5e-3));
    out.meta("bound_states_in_box", count_bound_states(&p, &opts));
    out.meta("target_ratio", target);
    out.meta("log_step", opts.h);
    out.meta("rescaled_cutoff_a", moved_params.cutoff_a);
    Ok(out)
}

fn evolve_table(name: &str, run: &kvnlab::quantum::QuantumRun) -> Table {
    let mut t = Table::new(name, &["t", "H", "D", "norm", "wall_rate"]);
    for (r, w) in run.series.records.iter().zip(&run.wall_rate) {
        t.push(row![r.t, r.energy, r.dilation, r.norm, *w]);
    }
    t
}

pub fn qm_evolve(cfg: &ScenarioConfig) -> Result<Outcome> {
    let p = cfg.params;
    let grid = RadialGrid::new(p.cutoff_a, p.box_r, cfg.n_grid)?;
    let opts = EvolveOptions::new(cfg.dt, cfg.t_final, cfg.records);
    let log_step = grid.h;
    let mut out = Outcome::default();
    match cfg.backend.as_str() {
        "strong" => {
            let a = p.cutoff_a;
            let u0 = RadialWavefunction::from_f(grid, |r| Complex64::new((r - a) * (-r * r / 2.0).exp(), 0.0))?;
            let run = evolve_wavepacket(&u0, &p, &opts)?;
            let (drift, floor) = anomaly_rate(&run.series)?;
            out.tables.push(evolve_table("quantum", &run));
            out.checks.push(Check::holds("quantum_drift", drift, &format!("|x| > 100 * {floor:e}"), drift.abs() > 100.0 * floor));
            let mut pairing = Table::new("pairing", &["epsilon", "mean_pairing", "drift", "relative_gap", "sign_agrees"]);
            for &eps in &cfg.eps_ladder {
                let c = pairing_consistency(&run, drift, p.g, eps);
                pairing.push(row![eps, c.mean_pairing, c.drift, c.relative_gap, c.sign_agrees]);
                out.checks.push(Check::holds(&format!("pairing_sign_eps_{eps:e}"), c.mean_pairing, "same sign as drift", c.sign_agrees));
            }
            out.tables.push(pairing);
            out.meta("conservation_floor", floor);

            // the KvN twin: same coupling, an ensemble with the packet's scale
            let times = time_grid(cfg.t_final, cfg.records);
            let eopts = EnsembleOptions { tol: cfg.tol, ..EnsembleOptions::default() };
            let twin = ensemble_charge_series(&ensemble_spec(cfg), &p, cfg.n_samples, &times, cfg.seed, eopts)?;
            let mut kt = Table::new("kvn_twin", &["t", "H", "H_stat_err", "D", "D_stat_err", "norm"]);
            for (r, he) in twin.series.records.iter().zip(&twin.energy_stat_err) {
                kt.push(row![r.t, r.energy, *he, r.dilation, r.stat_err, r.norm]);
            }
            out.tables.push(kt);
            let (kd, se) = twin.dilation_drift();
            out.checks.push(Check::holds("kvn_twin_drift", kd, &format!("|x| <= 3 * {se:e}"), kd.abs() <= 3.0 * se));
            out.meta("kvn_twin_rejected_weight", twin.rejected_weight);
        }
        "free" => {
            let (x0, k) = (cfg.r_bar[0], cfg.p_bar[0]);
            let w = cfg.sigma;
            let u0 = RadialWavefunction::from_u(grid, |r| Complex64::from_polar((-(r - x0).powi(2) / (2.0 * w * w)).exp(), k * r))?;
            let run = evolve_wavepacket(&u0, &p, &opts)?;
            let dev = run.series.max_abs_deviation(|r| r.dilation);
            out.tables.push(evolve_table("quantum", &run));
            out.checks.push(Check::at_most("dilation_deviation", dev, 1e-6));
            if let Ok((drift, floor)) = anomaly_rate(&run.series) {
                out.meta("drift", drift);
                out.meta("conservation_floor", floor);
            }
        }
        other => return Err(Error::Precondition(format!("unknown qm-evolve backend `{other}` (strong, free)"))),
    }
    out.meta("n_grid", cfg.n_grid);
    out.meta("log_step", log_step);
    out.meta("dt", cfg.dt);
    Ok(out)
}

pub fn qm_anomaly(cfg: &ScenarioConfig) -> Result<Outcome> {
    let p = cfg.params;
    let mut table = Table::new("pairing", &["profile", "epsilon", "anomaly", "quad_err"]);
    let mut limits = Table::new("limits", &["profile", "extrapolated", "expected"]);
    let mut out = Outcome::default();
    for profile in [QuantumProfile::Singular { sigma: cfg.sigma }, QuantumProfile::Regular { sigma: cfg.sigma }] {
        let name = match profile {
            QuantumProfile::Singular { .. } => "singular",
            QuantumProfile::Regular { .. } => "regular",
        };
        let res = quantum_anomaly_pairing(&profile, &p, &cfg.eps_ladder)?;
        for (eps, v, err) in &res.points {
            table.push(row![name, *eps, *v, *err]);
        }
        let expected = profile.expected_limit(p.g);
        limits.push(row![name, res.limit, expected]);
        match profile {
            QuantumProfile::Singular { .. } if expected != 0.0 => {
                out.checks.push(Check::at_most("singular_relative_error", (res.limit / expected - 1.0).abs(), 1e-2))
            }
            _ => out.checks.push(Check::at_most(&format!("{name}_abs_error"), (res.limit - expected).abs(), 1e-6)),
        }
    }
    out.tables = vec![table, limits];
    Ok(out)
}

pub fn qm_identity(cfg: &ScenarioConfig) -> Result<Outcome> {
    let p = cfg.params;
    let well = SmoothPotential::GaussianWell { depth: 1.0, width: cfg.sigma };
    let packets = TestVectors::Packets { width: 1.0, count: cfg.n_samples, seed: cfg.seed };
    let kind = match cfg.backend.as_str() {
        "fourier" => AxisKind::Fourier,
        "fd4" => AxisKind::FiniteDifference4,
        other => return Err(Error::Precondition(format!("unknown 1D backend `{other}` (fourier, fd4)"))),
    };
    let mut table = Table::new("identity", &["case", "dim", "n_grid", "half_width", "residual"]);
    let r1 = quantum_identity_check(well, QuantumIdentityGrid::new(kind, 1, cfg.n_grid, cfg.half_width), packets)?;
    table.push(row!["gaussian_well", 1usize, cfg.n_grid, cfg.half_width, r1]);

    let inv = SmoothPotential::InverseSquare { g: p.g, epsilon: p.epsilon };
    let band = TestVectors::ChebyshevBand { kmax: 6, count: cfg.n_samples, seed: cfg.seed };
    let (n3, l3) = (16, 0.3);
    let r3 = quantum_identity_check(inv, QuantumIdentityGrid::new(AxisKind::Chebyshev, 3, n3, l3), band)?;
    table.push(row!["inverse_square", 3usize, n3, l3, r3]);

    let ns = [cfg.n_grid, 2 * cfg.n_grid, 4 * cfg.n_grid];
    let (res, orders) = identity_refinement(well, AxisKind::FiniteDifference4, 1, cfg.half_width, &ns, packets)?;
    let mut refine = Table::new("refinement", &["n_grid", "residual", "order"]);
    for (k, (n, r)) in ns.iter().zip(&res).enumerate() {
        let order = if k == 0 { f64::NAN } else { orders[k - 1] };
        refine.push(row![*n, *r, order]);
    }
    let mut out = Outcome { tables: vec![table, refine], ..Default::default() };
    out.checks.push(Check::at_most("residual_1d", r1, 1e-6));
    out.checks.push(Check::at_most("residual_3d", r3, 1e-4));
    out.checks.push(Check::at_least("min_refinement_order", orders.iter().fold(f64::INFINITY, |m, o| m.min(*o)), 3.5));
    Ok(out)
}
