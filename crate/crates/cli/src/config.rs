//! Flat TOML scenario configuration.
//!
//! Every key is optional; missing keys take the scenario's defaults. Keys not
//! listed in [`KEYS`] are rejected so that a typo cannot silently fall back to
//! a default.

use std::fmt;
use std::str::FromStr;

use kvnlab::model::{validate, SystemParams, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    ClassicalCharge,
    ActionVariation,
    KvnEvolveGrid,
    KvnEvolveEnsemble,
    KvnAnomaly,
    KvnIdentity,
    AngularIntegral,
    QmSpectrum,
    QmEvolve,
    QmAnomaly,
    QmIdentity,
    DeficiencyQm,
    DeficiencyKvn,
}

impl Scenario {
    pub const ALL: [Scenario; 13] = [
        Scenario::ClassicalCharge,
        Scenario::ActionVariation,
        Scenario::KvnEvolveGrid,
        Scenario::KvnEvolveEnsemble,
        Scenario::KvnAnomaly,
        Scenario::KvnIdentity,
        Scenario::AngularIntegral,
        Scenario::QmSpectrum,
        Scenario::QmEvolve,
        Scenario::QmAnomaly,
        Scenario::QmIdentity,
        Scenario::DeficiencyQm,
        Scenario::DeficiencyKvn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ClassicalCharge => "classical-charge",
            Scenario::ActionVariation => "action-variation",
            Scenario::KvnEvolveGrid => "kvn-evolve-grid",
            Scenario::KvnEvolveEnsemble => "kvn-evolve-ensemble",
            Scenario::KvnAnomaly => "kvn-anomaly",
            Scenario::KvnIdentity => "kvn-identity",
            Scenario::AngularIntegral => "angular-integral",
            Scenario::QmSpectrum => "qm-spectrum",
            Scenario::QmEvolve => "qm-evolve",
            Scenario::QmAnomaly => "qm-anomaly",
            Scenario::QmIdentity => "qm-identity",
            Scenario::DeficiencyQm => "deficiency-qm",
            Scenario::DeficiencyKvn => "deficiency-kvn",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Scenario::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ConfigError::UnknownScenario(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("scenario given twice: `{cli}` on the command line, `{file}` in the config")]
    ScenarioMismatch { cli: String, file: String },

    #[error("bad override `{0}` (expected key=value)")]
    BadOverride(String),

    #[error("invalid value for `{key}`: {msg}")]
    InvalidValue { key: String, msg: String },

    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
}

pub const KEYS: [&str; 29] = [
    "scenario",
    "g",
    "dim",
    "epsilon",
    "cutoff_a",
    "box_r",
    "backend",
    "dt",
    "t_final",
    "records",
    "n_grid",
    "half_width",
    "n_samples",
    "seed",
    "eps_ladder",
    "quad_order",
    "tol",
    "n_states",
    "radii",
    "profile",
    "sigma",
    "sigma_p",
    "window",
    "r_bar",
    "p_bar",
    "k_r",
    "k_p",
    "splitting",
    "output_dir",
];

/// The file as written: every key optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    g: Option<f64>,
    dim: Option<u8>,
    epsilon: Option<f64>,
    cutoff_a: Option<f64>,
    box_r: Option<f64>,
    backend: Option<String>,
    dt: Option<f64>,
    t_final: Option<f64>,
    records: Option<usize>,
    n_grid: Option<usize>,
    half_width: Option<f64>,
    n_samples: Option<usize>,
    seed: Option<u64>,
    eps_ladder: Option<Vec<f64>>,
    quad_order: Option<usize>,
    tol: Option<f64>,
    n_states: Option<usize>,
    radii: Option<Vec<f64>>,
    profile: Option<String>,
    sigma: Option<f64>,
    sigma_p: Option<f64>,
    window: Option<[f64; 2]>,
    r_bar: Option<Vec3>,
    p_bar: Option<Vec3>,
    k_r: Option<Vec3>,
    k_p: Option<Vec3>,
    splitting: Option<String>,
    output_dir: Option<String>,
}

/// A fully resolved run description. What each field means depends on the
/// scenario; fields a scenario does not read are still recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub params: SystemParams,
    pub backend: String,
    pub dt: f64,
    pub t_final: f64,
    /// Number of recorded times including t = 0.
    pub records: usize,
    pub n_grid: usize,
    pub half_width: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub eps_ladder: Vec<f64>,
    pub quad_order: usize,
    pub tol: f64,
    pub n_states: usize,
    pub radii: Vec<f64>,
    pub profile: String,
    pub sigma: f64,
    pub sigma_p: f64,
    pub window: [f64; 2],
    pub r_bar: Vec3,
    pub p_bar: Vec3,
    pub k_r: Vec3,
    pub k_p: Vec3,
    pub splitting: String,
    pub output_dir: Option<String>,
}

const QM_LADDER: [f64; 5] = [8e-3, 4e-3, 2e-3, 1e-3, 5e-4];

impl ScenarioConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        let mut c = ScenarioConfig {
            scenario,
            params: SystemParams::bare(0.5),
            backend: String::new(),
            dt: 0.01,
            t_final: 10.0,
            records: 101,
            n_grid: 256,
            half_width: 10.0,
            n_samples: 100,
            seed: 0,
            eps_ladder: Vec::new(),
            quad_order: 16,
            tol: 1e-10,
            n_states: 4,
            radii: Vec::new(),
            profile: "singular".into(),
            sigma: 1.0,
            sigma_p: 0.05,
            window: [1.0, 2.0],
            r_bar: [1.0, 0.0, 0.0],
            p_bar: [0.0, 1.0, 0.0],
            k_r: [0.0; 3],
            k_p: [0.0; 3],
            splitting: "strang".into(),
            output_dir: None,
        };
        match scenario {
            Scenario::ClassicalCharge => {}
            Scenario::ActionVariation => {
                c.n_grid = 400;
                c.eps_ladder = vec![1e-2, 1e-3, 1e-4];
            }
            Scenario::KvnEvolveGrid => {
                c.params = SystemParams::bare(0.0).with_dim(1).with_epsilon(0.3);
                c.n_grid = 256;
                c.half_width = 20.0;
                c.dt = 0.01;
                c.t_final = 5.0;
                c.records = 11;
            }
            Scenario::KvnEvolveEnsemble => {
                c.n_samples = 100_000;
                c.sigma = 0.05;
                c.t_final = 5.0;
                c.records = 11;
                c.tol = 1e-9;
                c.k_r = [0.5, 0.2, 0.0];
                c.k_p = [0.0, 0.3, 0.1];
            }
            Scenario::KvnAnomaly => {
                c.params = SystemParams::bare(1.0);
                c.eps_ladder = vec![0.1, 0.03, 0.01, 0.003, 0.001];
                c.sigma = 1.0;
                c.sigma_p = 1.0;
            }
            Scenario::KvnIdentity => {
                c.params = SystemParams::bare(1.0).with_dim(1).with_epsilon(0.3);
                c.n_grid = 32;
                c.half_width = 0.3;
                c.n_samples = 10;
            }
            Scenario::AngularIntegral => {
                c.n_samples = 20;
                c.quad_order = 8;
            }
            Scenario::QmSpectrum => {
                c.params = SystemParams::bare(1.25).with_cutoffs(1e-5, 100.0);
                c.tol = 1e-12;
                c.dt = 5e-3;
            }
            Scenario::QmEvolve => {
                c.params = SystemParams::bare(1.25).with_cutoffs(1e-3, 30.0);
                c.backend = "strong".into();
                c.n_grid = 1200;
                c.dt = 1e-4;
                c.t_final = 2.0;
                c.records = 21;
                c.eps_ladder = vec![3e-3];
                c.n_samples = 100_000;
                c.sigma = 0.05;
                c.p_bar = [0.0, 1.3229, 0.0];
                c.k_r = [0.5, 0.2, 0.0];
                c.k_p = [0.0, 0.3, 0.1];
                c.tol = 1e-9;
            }
            Scenario::QmAnomaly => {
                c.params = SystemParams::bare(1.0);
                c.eps_ladder = QM_LADDER.to_vec();
            }
            Scenario::QmIdentity => {
                c.params = SystemParams::bare(1.25).with_dim(1).with_epsilon(0.3);
                c.backend = "fourier".into();
                c.n_grid = 64;
                c.half_width = 10.0;
                c.n_samples = 10;
            }
            Scenario::DeficiencyQm => {
                c.params = SystemParams::bare(1.25);
                // cutoff_a is the innermost radius δ_min of the growth table
                c.params = c.params.with_cutoffs(1e-10, 30.0);
                c.dt = 1e-3;
                c.tol = 1e-6;
            }
            Scenario::DeficiencyKvn => {
                c.radii = vec![5.0, 10.0, 20.0, 40.0];
                c.profile = "gaussian".into();
                c.n_samples = 100;
                c.tol = 1e-8;
            }
        }
        c
    }
}

fn parse_error(text: &str, err: &toml::de::Error) -> ConfigError {
    let (line, col) = match err.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            (line, col)
        }
        None => (0, 0),
    };
    ConfigError::Parse { line, col, msg: err.message().to_string() }
}

fn check_keys(table: &toml::Table) -> Result<(), ConfigError> {
    match table.keys().find(|k| !KEYS.contains(&k.as_str())) {
        Some(k) => Err(ConfigError::UnknownKey(k.clone())),
        None => Ok(()),
    }
}

/// `key=value` with the value read as a TOML value; bare words that are not
/// valid TOML are taken as strings.
fn parse_override(item: &str) -> Result<(String, toml::Value), ConfigError> {
    let (key, value) = item.split_once('=').ok_or_else(|| ConfigError::BadOverride(item.to_string()))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError::BadOverride(item.to_string()));
    }
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key.to_string(), parsed))
}

/// Parses a config whose `scenario` key names the scenario.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_config_with(None, text, &[])
}

/// Parses `text`, applies `key=value` overrides, fills the defaults of the
/// scenario and validates the result.
pub fn parse_config_with(scenario: Option<Scenario>, text: &str, overrides: &[String]) -> Result<ScenarioConfig, ConfigError> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
    check_keys(&table)?;
    // type errors are reported against the file before overrides touch it
    toml::from_str::<RawConfig>(text).map_err(|e| parse_error(text, &e))?;
    for item in overrides {
        let (k, v) = parse_override(item)?;
        table.insert(k, v);
    }
    check_keys(&table)?;
    let raw: RawConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::InvalidValue { key: "override".into(), msg: e.message().to_string() })?;

    let file_scenario = raw.scenario.as_deref().map(Scenario::from_str).transpose()?;
    let scenario = match (scenario, file_scenario) {
        (Some(a), Some(b)) if a != b => {
            return Err(ConfigError::ScenarioMismatch { cli: a.to_string(), file: b.to_string() })
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(ConfigError::InvalidValue { key: "scenario".into(), msg: "no scenario given".into() }),
    };
    let c = resolve(ScenarioConfig::defaults(scenario), raw);
    check(&c)?;
    Ok(c)
}

fn resolve(mut c: ScenarioConfig, raw: RawConfig) -> ScenarioConfig {
    macro_rules! take {
        ($($field:ident),*) => { $( if let Some(v) = raw.$field { c.$field = v; } )* };
    }
    macro_rules! take_param {
        ($($field:ident),*) => { $( if let Some(v) = raw.$field { c.params.$field = v; } )* };
    }
    take_param!(g, dim, epsilon, cutoff_a, box_r);
    take!(backend, dt, t_final, records, n_grid, half_width, n_samples, seed, eps_ladder, quad_order, tol);
    take!(n_states, radii, profile, sigma, sigma_p, window, r_bar, p_bar, k_r, k_p, splitting);
    if raw.output_dir.is_some() {
        c.output_dir = raw.output_dir;
    }
    c
}

fn check(c: &ScenarioConfig) -> Result<(), ConfigError> {
    let mut bad = match validate(c.params) {
        Ok(_) => Vec::new(),
        Err(kvnlab::Error::InvalidParams(v)) => v,
        Err(e) => vec![e.to_string()],
    };
    let positive = [("dt", c.dt), ("t_final", c.t_final), ("tol", c.tol), ("sigma", c.sigma), ("sigma_p", c.sigma_p)];
    for (k, v) in positive {
        if !(v.is_finite() && v > 0.0) {
            bad.push(format!("{k} = {v} (must be finite and > 0)"));
        }
    }
    if c.records < 2 {
        bad.push(format!("records = {} (must be >= 2)", c.records));
    }
    if c.eps_ladder.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        bad.push("eps_ladder entries must be finite and > 0".into());
    }
    if c.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        bad.push("radii entries must be finite and > 0".into());
    }
    if !(c.window[0] < c.window[1]) {
        bad.push(format!("window = {:?} (must have lo < hi)", c.window));
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(ConfigError::InvalidParams(bad))
    }
}
