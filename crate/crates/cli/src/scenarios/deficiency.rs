use kvnlab::par::Exec;
use kvnlab::selfadjoint::{
    eigencheck_samples, kvn_eigencheck, kvn_normalizability_scan, qm_deficiency_solution, DTilde, QmDeficiencyOptions,
    ScanOptions, Side, Verdict,
};
use kvnlab::{Error, Result};

use crate::config::ScenarioConfig;
use crate::output::{Check, Outcome, Table};
use crate::row;

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Plus => "plus",
        Side::Minus => "minus",
    }
}

pub fn deficiency_qm(cfg: &ScenarioConfig) -> Result<Outcome> {
    let p = cfg.params;
    let opts = QmDeficiencyOptions { big_r: p.box_r, delta_min: p.cutoff_a, h: cfg.dt, cauchy_tol: cfg.tol };
    let mut table = Table::new("growth", &["side", "delta", "norm_fraction"]);
    let mut out = Outcome::default();
    for side in [Side::Plus, Side::Minus] {
        let d = qm_deficiency_solution(&p, side, &opts)?;
        for (delta, frac) in &d.growth {
            table.push(row![side_name(side), *delta, *frac]);
        }
        out.meta(&format!("verdict_{}", side_name(side)), d.verdict);
        out.meta(&format!("norm_estimate_{}", side_name(side)), d.norm_estimate);
        if p.strong_coupling() {
            let ok = d.verdict == Verdict::Normalizable;
            out.checks.push(Check::holds(&format!("normalizable_{}", side_name(side)), ok as u8 as f64, "NORMALIZABLE", ok));
        }
    }
    out.tables.push(table);
    out.meta("big_r", p.box_r);
    out.meta("delta_min", p.cutoff_a);
    out.meta("log_step", cfg.dt);
    Ok(out)
}

pub fn deficiency_kvn(cfg: &ScenarioConfig) -> Result<Outcome> {
    let g = cfg.params.g;
    let profile = match cfg.profile.as_str() {
        "gaussian" => DTilde::Gaussian,
        "window" => DTilde::Window { lo: cfg.window[0], hi: cfg.window[1] },
        other => return Err(Error::Precondition(format!("unknown profile `{other}` (gaussian, window)"))),
    };
    // energies away from H = 0, where the candidate is singular
    let samples = eigencheck_samples(cfg.n_samples, g, 0.1, 4.0, cfg.seed);
    let mut eig = Table::new("eigencheck", &["side", "analytic_residual", "finite_difference_residual"]);
    let mut out = Outcome::default();
    for side in [Side::Plus, Side::Minus] {
        let rep = kvn_eigencheck(&samples, g, side, profile, Exec::default())?;
        eig.push(row![side_name(side), rep.analytic, rep.finite_difference]);
        out.checks.push(Check::at_most(&format!("eigencheck_{}", side_name(side)), rep.analytic, 1e-10));
    }

    let opts = ScanOptions { rel_tol: cfg.tol, ..ScanOptions::default() };
    let scan = kvn_normalizability_scan(g, profile, Side::Plus, &cfg.radii, &opts)?;
    let mut growth = Table::new("growth", &["radius", "log_integral", "log_ratio", "rel_err", "excluded_measure"]);
    let ratios = scan.log_ratios();
    for (k, r) in scan.radii.iter().enumerate() {
        let ratio = if k == 0 { f64::NAN } else { ratios[k - 1] };
        growth.push(row![*r, scan.log_integral[k], ratio, scan.rel_err[k], scan.excluded_measure[k]]);
    }
    let divergent = scan.verdict == Verdict::Divergent;
    out.checks.push(Check::holds("scan_divergent", divergent as u8 as f64, "DIVERGENT", divergent));
    let last_two = ratios.iter().rev().take(2).fold(f64::INFINITY, |m, v| m.min(*v));
    out.checks.push(Check::at_least("min_log_ratio_last_two", last_two, 10f64.ln()));
    out.tables = vec![eig, growth];
    out.meta("verdict", scan.verdict);
    out.meta("eta", scan.eta);
    out.meta("samples", cfg.n_samples);
    Ok(out)
}
