//! Characteristics ensemble for KvN waves in three dimensions.
//!
//! The Liouvillian is first order, so ψ(z, t) = ψ₀(Φ₋ₜ z). Samples are drawn
//! from |ψ₀|² and carried along the classical flow together with their
//! tangent frames, which transport phase gradients: ∇S_t(z) = J⁻ᵀ ∇S₀(z₀).

use serde::{Deserialize, Serialize};

use crate::classical::{flow_frames, force, TangentFrame, TrajectoryOptions, DEFAULT_R_MIN};
use crate::error::{Error, Result};
use crate::kvn::wave::InitialWaveSpec;
use crate::model::{ChargeRecord, ChargeSeries, PhasePoint, SystemParams};
use crate::par::{compensated_sum, map_indexed, Exec};

pub const DEFAULT_REJECT_BUDGET: f64 = 1e-3;
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy)]
pub struct EnsembleOptions {
    pub tol: f64,
    pub r_min: f64,
    pub reject_budget: f64,
    pub exec: Exec,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self { tol: 1e-8, r_min: DEFAULT_R_MIN, reject_budget: DEFAULT_REJECT_BUDGET, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnsembleSample {
    pub z0: PhasePoint,
    pub z: PhasePoint,
    pub weight: f64,
    pub frame: TangentFrame,
}

#[derive(Debug, Clone)]
pub struct KvnEnsembleState {
    pub spec: InitialWaveSpec,
    pub t: f64,
    pub samples: Vec<EnsembleSample>,
    pub rejected_weight: f64,
    pub seed: u64,
}

/// Per-sample ℋ: with ψ = |ψ|e^{iS}, the modulus part integrates to zero
/// and the phase part (ℒS)(z) = (ℒS₀)(z₀) is constant along the orbit.
pub fn sample_liouvillian(spec: &InitialWaveSpec, params: &SystemParams, z0: &PhasePoint) -> Result<f64> {
    let k = spec.phase_gradient();
    let f = force(&z0.r, params)?;
    Ok(k[0] * z0.p[0] + k[1] * z0.p[1] + k[2] * z0.p[2] + k[3] * f[0] + k[4] * f[1] + k[5] * f[2])
}

/// Per-sample Ĝ = ½(λ_p·p − λ_r·r) = −(i/2)(p·∂_p − r·∂_r); only the phase
/// gradient survives in expectation.
pub fn sample_generator(spec: &InitialWaveSpec, z: &PhasePoint, frame: &TangentFrame) -> f64 {
    let a = frame.pull_gradient(&spec.phase_gradient());
    let r_part = z.r[0] * a[0] + z.r[1] * a[1] + z.r[2] * a[2];
    let p_part = z.p[0] * a[3] + z.p[1] * a[4] + z.p[2] * a[5];
    0.5 * (p_part - r_part)
}

fn check(spec: &InitialWaveSpec, params: &SystemParams, n: usize) -> Result<()> {
    spec.validate()?;
    if params.dim != 3 {
        return Err(Error::Precondition("the ensemble backend is three-dimensional".into()));
    }
    if n < MIN_SAMPLES {
        return Err(Error::Precondition(format!("ensemble needs N >= {MIN_SAMPLES}, got {n}")));
    }
    Ok(())
}

fn opts_for(o: &EnsembleOptions) -> TrajectoryOptions {
    TrajectoryOptions { tol: o.tol, r_min: o.r_min }
}

pub fn evolve_ensemble(
    spec: &InitialWaveSpec,
    params: &SystemParams,
    n: usize,
    t: f64,
    seed: u64,
    opts: EnsembleOptions,
) -> Result<KvnEnsembleState> {
    check(spec, params, n)?;
    let w = 1.0 / n as f64;
    let flowed = map_indexed(opts.exec, n, |i| -> Result<Option<EnsembleSample>> {
        let z0 = spec.sample(seed, i as u64);
        let (frames, captured) = flow_frames(z0, params, &[t], opts_for(&opts))?;
        Ok(captured.is_none().then(|| EnsembleSample { z0, z: frames[0].0, weight: w, frame: frames[0].1 }))
    });
    let mut samples = Vec::with_capacity(n);
    let mut rejected = 0usize;
    for s in flowed {
        match s? {
            Some(s) => samples.push(s),
            None => rejected += 1,
        }
    }
    let rejected_weight = rejected as f64 * w;
    if rejected_weight > opts.reject_budget {
        return Err(Error::EnsembleDegenerate { rejected: rejected_weight, budget: opts.reject_budget });
    }
    Ok(KvnEnsembleState { spec: *spec, t, samples, rejected_weight, seed })
}

/// Weighted mean and standard error of a per-sample quantity.
pub fn mean_and_stat_err(values: &[f64], weights: &[f64]) -> (f64, f64) {
    let wsum = compensated_sum(weights.iter().copied());
    if values.is_empty() || wsum == 0.0 {
        return (0.0, 0.0);
    }
    let mean = compensated_sum(values.iter().zip(weights).map(|(v, w)| v * w)) / wsum;
    let var = compensated_sum(values.iter().zip(weights).map(|(v, w)| w * (v - mean).powi(2))) / wsum;
    (mean, (var / values.len() as f64).sqrt())
}

impl KvnEnsembleState {
    pub fn expectation<F: Fn(&EnsembleSample) -> f64>(&self, f: F) -> (f64, f64) {
        let v: Vec<f64> = self.samples.iter().map(&f).collect();
        let w: Vec<f64> = self.samples.iter().map(|s| s.weight).collect();
        mean_and_stat_err(&v, &w)
    }

    pub fn retained_weight(&self) -> f64 {
        compensated_sum(self.samples.iter().map(|s| s.weight))
    }
}

/// ⟨𝒟⟩ = t⟨ℋ⟩ + ⟨Ĝ⟩ with its Monte Carlo standard error.
pub fn kvn_dilation_expectation(state: &KvnEnsembleState, params: &SystemParams) -> Result<(f64, f64)> {
    let mut v = Vec::with_capacity(state.samples.len());
    for s in &state.samples {
        let h = sample_liouvillian(&state.spec, params, &s.z0)?;
        v.push(state.t * h + sample_generator(&state.spec, &s.z, &s.frame));
    }
    let w: Vec<f64> = state.samples.iter().map(|s| s.weight).collect();
    Ok(mean_and_stat_err(&v, &w))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleRun {
    /// energy = ⟨ℋ⟩, dilation = ⟨𝒟⟩, norm = retained weight,
    /// stat_err = standard error of ⟨𝒟⟩.
    pub series: ChargeSeries,
    pub energy_stat_err: Vec<f64>,
    pub rejected_weight: f64,
    pub retained: usize,
}

impl EnsembleRun {
    /// ⟨𝒟⟩(T) − ⟨𝒟⟩(0) and the combined standard error of the two values.
    pub fn dilation_drift(&self) -> (f64, f64) {
        let (Some(a), Some(b)) = (self.series.first(), self.series.last()) else {
            return (0.0, 0.0);
        };
        (b.dilation - a.dilation, (a.stat_err.powi(2) + b.stat_err.powi(2)).sqrt())
    }
}

/// Flows one ensemble through all `times` and records ⟨ℋ⟩ and ⟨𝒟⟩ at each.
/// Samples captured before the last time are dropped from every record.
pub fn ensemble_charge_series(
    spec: &InitialWaveSpec,
    params: &SystemParams,
    n: usize,
    times: &[f64],
    seed: u64,
    opts: EnsembleOptions,
) -> Result<EnsembleRun> {
    check(spec, params, n)?;
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) || times[0] < 0.0 {
        return Err(Error::Precondition("times must be non-negative and strictly increasing".into()));
    }
    let per_sample = map_indexed(opts.exec, n, |i| -> Result<Option<(f64, Vec<f64>)>> {
        let z0 = spec.sample(seed, i as u64);
        let (frames, captured) = flow_frames(z0, params, times, opts_for(&opts))?;
        if captured.is_some() {
            return Ok(None);
        }
        let h = sample_liouvillian(spec, params, &z0)?;
        let d = times.iter().zip(&frames).map(|(t, (z, fr))| t * h + sample_generator(spec, z, fr)).collect();
        Ok(Some((h, d)))
    });
    let mut hs = Vec::with_capacity(n);
    let mut ds = Vec::with_capacity(n);
    let mut rejected = 0usize;
    for s in per_sample {
        match s? {
            Some((h, d)) => {
                hs.push(h);
                ds.push(d);
            }
            None => rejected += 1,
        }
    }
    let rejected_weight = rejected as f64 / n as f64;
    if rejected_weight > opts.reject_budget {
        return Err(Error::EnsembleDegenerate { rejected: rejected_weight, budget: opts.reject_budget });
    }
    let w = vec![1.0 / n as f64; hs.len()];
    let (h_mean, h_err) = mean_and_stat_err(&hs, &w);
    let mut series = ChargeSeries::default();
    let mut energy_stat_err = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let dk: Vec<f64> = ds.iter().map(|d| d[k]).collect();
        let (d_mean, d_err) = mean_and_stat_err(&dk, &w);
        series.push(ChargeRecord { t, energy: h_mean, dilation: d_mean, norm: 1.0 - rejected_weight, stat_err: d_err });
        energy_stat_err.push(h_err);
    }
    Ok(EnsembleRun { series, energy_stat_err, rejected_weight, retained: hs.len() })
}
