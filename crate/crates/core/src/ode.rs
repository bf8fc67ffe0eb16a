//! Adaptive Dormand–Prince 5(4) integrator with exact landing on output times.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h_min: 1e-300,
            max_steps: 50_000_000,
        }
    }
}

pub struct Solution {
    /// (t, y) at each requested output time that was reached.
    pub samples: Vec<(f64, Vec<f64>)>,
    /// Time at which the stop predicate fired, with the state there.
    pub stopped: Option<(f64, Vec<f64>)>,
    pub steps: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// b5 − b4; b5 is the last row of A with a zero FSAL weight
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrates y' = f(t, y) from `t0` through every time in `outputs`
/// (ascending, all ≥ t0). Stops early when `stop(t, y)` returns true after an
/// accepted step.
pub fn integrate<F, S>(
    f: F,
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    ctl: StepControl,
    stop: S,
) -> Result<Solution>
where
    F: Fn(f64, &[f64], &mut [f64]),
    S: Fn(f64, &[f64]) -> bool,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut samples = Vec::with_capacity(outputs.len());
    let mut steps = 0usize;

    f(t, &y, &mut k[0]);
    let t_end = outputs.last().copied().unwrap_or(t0);
    let mut h = initial_step(&y, &k[0], ctl, (t_end - t0).abs());
    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] <= t0 {
        samples.push((outputs[next_out], y.clone()));
        next_out += 1;
    }

    while next_out < outputs.len() {
        let target = outputs[next_out];
        let landing = h >= target - t;
        let mut h_try = if landing { target - t } else { h };
        loop {
            if steps >= ctl.max_steps {
                return Err(Error::StepSizeUnderflow { t, h: h_try });
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for j in 0..s {
                        acc += h_try * A[s][j] * k[j][i];
                    }
                    ytmp[i] = acc;
                }
                f(t + C[s] * h_try, &ytmp, &mut k[s]);
                if s == 6 {
                    ynew.copy_from_slice(&ytmp);
                }
            }
            let mut err_sq = 0.0;
            for i in 0..n {
                let e: f64 = h_try * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
                let sc = ctl.atol + ctl.rtol * y[i].abs().max(ynew[i].abs());
                err_sq += (e / sc) * (e / sc);
            }
            let err = (err_sq / n as f64).sqrt();
            steps += 1;
            if err <= 1.0 {
                let hit = landing && h_try == target - t;
                t = if hit { target } else { t + h_try };
                y.copy_from_slice(&ynew);
                k.swap(0, 6);
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // a shortened landing step should not shrink the next one
                h = if hit { h.max(h_try * fac) } else { h_try * fac };
                break;
            }
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h_try *= fac;
            h = h_try;
            if h_try < ctl.h_min || h_try <= t.abs() * 1e-15 {
                return Err(Error::StepSizeUnderflow { t, h: h_try });
            }
        }
        if stop(t, &y) {
            return Ok(Solution {
                samples,
                stopped: Some((t, y)),
                steps,
            });
        }
        while next_out < outputs.len() && outputs[next_out] <= t {
            samples.push((outputs[next_out], y.clone()));
            next_out += 1;
        }
    }
    Ok(Solution {
        samples,
        stopped: None,
        steps,
    })
}

fn initial_step(y: &[f64], dy: &[f64], ctl: StepControl, span: f64) -> f64 {
    let n = y.len() as f64;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (yi, di) in y.iter().zip(dy) {
        let sc = ctl.atol + ctl.rtol * yi.abs();
        d0 += (yi / sc).powi(2);
        d1 += (di / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span.max(1e-12))
}
