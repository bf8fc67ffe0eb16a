//! Crank–Nicolson evolution of radial wavepackets and the measured dilation drift.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate, ChargeRecord, ChargeSeries, SystemParams};
use crate::quantum::radial::{hamiltonian_f, quantum_dilation_expectation, RadialWavefunction, SymBand5};

/// LU factors of a pentadiagonal complex matrix, no pivoting.
///
/// Used for I + iτH with H real symmetric: the Hermitian part is the identity,
/// so elimination without pivoting is stable.
#[derive(Debug, Clone)]
pub struct BandLu {
    /// Row j holds columns j−2 ..= j+2; strictly lower entries are the L multipliers.
    band: Vec<[Complex64; 5]>,
}

impl BandLu {
    pub fn factor(mut band: Vec<[Complex64; 5]>) -> Result<Self> {
        let n = band.len();
        for i in 0..n {
            let pivot = band[i][2];
            if pivot.norm() < 1e-300 {
                return Err(Error::Assertion(format!("zero pivot at row {i} in banded solve")));
            }
            for r in i + 1..n.min(i + 3) {
                let factor = band[r][i + 2 - r] / pivot;
                band[r][i + 2 - r] = factor;
                for c in i + 1..n.min(i + 3) {
                    let u = band[i][c + 2 - i];
                    band[r][c + 2 - r] -= factor * u;
                }
            }
        }
        Ok(Self { band })
    }

    pub fn solve(&self, rhs: &mut [Complex64]) {
        let n = self.band.len();
        for r in 0..n {
            for i in r.saturating_sub(2)..r {
                let l = self.band[r][i + 2 - r];
                rhs[r] -= l * rhs[i];
            }
        }
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for c in i + 1..n.min(i + 3) {
                acc -= self.band[i][c + 2 - i] * rhs[c];
            }
            rhs[i] = acc / self.band[i][2];
        }
    }
}

fn shifted_band(h: &SymBand5, z: Complex64) -> Vec<[Complex64; 5]> {
    let n = h.n();
    let zero = Complex64::new(0.0, 0.0);
    (0..n)
        .map(|j| {
            let mut row = [zero; 5];
            if j >= 2 {
                row[0] = z * h.d2[j - 2];
            }
            if j >= 1 {
                row[1] = z * h.d1[j - 1];
            }
            row[2] = Complex64::new(1.0, 0.0) + z * h.d0[j];
            if j + 1 < n {
                row[3] = z * h.d1[j];
            }
            if j + 2 < n {
                row[4] = z * h.d2[j];
            }
            row
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_final: f64,
    /// Number of recorded times, including t = 0 and t_final.
    pub records: usize,
}

impl EvolveOptions {
    pub fn new(dt: f64, t_final: f64, records: usize) -> Self {
        Self { dt, t_final, records }
    }
}

#[derive(Debug, Clone)]
pub struct QuantumRun {
    pub snapshots: Vec<RadialWavefunction>,
    pub series: ChargeSeries,
    /// Hard-wall contribution −|u′(a)|²·a/4 to d⟨D̂⟩/dt at each record.
    pub wall_rate: Vec<f64>,
}

/// −(a/4)|u′(a)|², from a one-sided fourth-order derivative of f at the inner wall.
pub fn inner_wall_rate(u: &RadialWavefunction) -> f64 {
    let f = &u.f;
    let fs = (f[0] * 48.0 - f[1] * 36.0 + f[2] * 16.0 - f[3] * 3.0) / (12.0 * u.grid.h);
    -fs.norm_sqr() / (4.0 * u.grid.a * u.grid.a)
}

/// Spread √⟨Ĥ²⟩ of the state; sets the time step the evolution must resolve.
pub fn energy_scale(u: &RadialWavefunction, g: f64) -> f64 {
    let hu = hamiltonian_f(&u.grid, g).apply(&u.f);
    u.grid.h * hu.iter().map(|v| v.norm_sqr()).sum::<f64>()
}

/// Crank–Nicolson evolution of u0 with a record every T/(records − 1).
///
/// The step must resolve the state's energy content, dt·√⟨Ĥ²⟩ < 0.1; the full
/// grid spectrum (which reaches ~1/(a h)²) is not required to be resolved
/// because the scheme is unitary on every mode.
pub fn evolve_wavepacket(u0: &RadialWavefunction, params: &SystemParams, opts: &EvolveOptions) -> Result<QuantumRun> {
    let params = validate(*params)?;
    if opts.records < 2 || !(opts.t_final > 0.0) || !(opts.dt > 0.0) {
        return Err(Error::Precondition("evolution needs dt > 0, T > 0 and at least two records".into()));
    }
    let scale = energy_scale(u0, params.g).sqrt();
    if opts.dt * scale >= 0.1 {
        return Err(Error::Precondition(format!("dt·√⟨H²⟩ = {:.3} must be below 0.1", opts.dt * scale)));
    }
    let h = hamiltonian_f(&u0.grid, params.g);
    let steps_per_record = ((opts.t_final / (opts.records - 1) as f64) / opts.dt).ceil().max(1.0) as usize;
    let dt = opts.t_final / ((opts.records - 1) * steps_per_record) as f64;
    let z = Complex64::new(0.0, 0.5 * dt);
    let lu = BandLu::factor(shifted_band(&h, z))?;

    let mut psi = u0.clone();
    let mut run = QuantumRun { snapshots: Vec::new(), series: ChargeSeries::default(), wall_rate: Vec::new() };
    let record = |psi: &RadialWavefunction, t: f64, run: &mut QuantumRun| -> Result<()> {
        let hu = h.apply(&psi.f);
        let energy = psi.inner(&hu).re;
        let dilation = quantum_dilation_expectation(psi, t, &params)?;
        run.series.push(ChargeRecord::deterministic(t, energy, dilation, psi.norm()));
        run.wall_rate.push(inner_wall_rate(psi));
        run.snapshots.push(psi.clone());
        Ok(())
    };
    record(&psi, 0.0, &mut run)?;
    for k in 1..opts.records {
        for _ in 0..steps_per_record {
            let hf = h.apply(&psi.f);
            let mut rhs: Vec<Complex64> = psi.f.iter().zip(&hf).map(|(f, hf)| f - z * hf).collect();
            lu.solve(&mut rhs);
            psi.f = rhs;
        }
        record(&psi, (k * steps_per_record) as f64 * dt, &mut run)?;
    }
    Ok(run)
}

/// Least-squares slope of ⟨D̂⟩(t) and the drift attributable to the control
/// quantities: a norm error δN rescales D over the run, an energy error δE
/// enters through tĤ.
pub fn anomaly_rate(series: &ChargeSeries) -> Result<(f64, f64)> {
    if series.len() < 10 {
        return Err(Error::Precondition(format!("anomaly rate needs at least 10 records, got {}", series.len())));
    }
    let n = series.len() as f64;
    let tm = series.records.iter().map(|r| r.t).sum::<f64>() / n;
    let dm = series.records.iter().map(|r| r.dilation).sum::<f64>() / n;
    let sxy: f64 = series.records.iter().map(|r| (r.t - tm) * (r.dilation - dm)).sum();
    let sxx: f64 = series.records.iter().map(|r| (r.t - tm).powi(2)).sum();
    let slope = sxy / sxx;
    let span = series.last().unwrap().t - series.first().unwrap().t;
    let d_max = series.records.iter().fold(0.0f64, |m, r| m.max(r.dilation.abs()));
    let floor = series.max_abs_deviation(|r| r.norm) * d_max / span + series.max_abs_deviation(|r| r.energy);
    Ok((slope, floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::radial::RadialGrid;

    #[test]
    fn band_lu_solves_random_system() {
        let n = 12;
        let band: Vec<[Complex64; 5]> = (0..n)
            .map(|j| {
                let mut row = [Complex64::new(0.0, 0.0); 5];
                for (k, v) in row.iter_mut().enumerate() {
                    let c = j as isize + k as isize - 2;
                    if c >= 0 && c < n as isize {
                        *v = Complex64::new(((j * 7 + k * 3) % 5) as f64 * 0.1, (k as f64 - 2.0) * 0.2);
                    }
                }
                row[2] += Complex64::new(3.0, 1.0);
                row
            })
            .collect();
        let x: Vec<Complex64> = (0..n).map(|j| Complex64::new(j as f64, 1.0 - j as f64 * 0.5)).collect();
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for k in 0..5 {
                let c = j as isize + k as isize - 2;
                if c >= 0 && c < n as isize {
                    b[j] += band[j][k] * x[c as usize];
                }
            }
        }
        BandLu::factor(band).unwrap().solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn norm_and_energy_are_conserved() {
        let grid = RadialGrid::new(1e-3, 30.0, 1200).unwrap();
        let u0 = RadialWavefunction::from_f(grid, |r| Complex64::new((r - 1e-3) * (-r * r / 2.0).exp(), 0.0)).unwrap();
        let p = SystemParams::bare(1.25).with_cutoffs(1e-3, 30.0);
        let run = evolve_wavepacket(&u0, &p, &EvolveOptions::new(1e-4, 0.2, 11)).unwrap();
        assert!(run.series.max_abs_deviation(|r| r.norm) < 1e-10);
        assert!(run.series.max_abs_deviation(|r| r.energy) < 1e-8 * run.series.first().unwrap().energy.abs().max(1.0));
        let (drift, floor) = anomaly_rate(&run.series).unwrap();
        assert!(drift.abs() > 100.0 * floor, "{drift} {floor}");
    }

    #[test]
    fn large_steps_are_rejected() {
        let grid = RadialGrid::new(1e-3, 30.0, 600).unwrap();
        let u0 = RadialWavefunction::from_f(grid, |r| Complex64::new((r - 1e-3) * (-r * r / 2.0).exp(), 0.0)).unwrap();
        let p = SystemParams::bare(1.25).with_cutoffs(1e-3, 30.0);
        assert!(matches!(
            evolve_wavepacket(&u0, &p, &EvolveOptions::new(0.1, 1.0, 11)),
            Err(Error::Precondition(_))
        ));
    }
}
