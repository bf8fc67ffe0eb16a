//! Scale variation of the discretized KvN path weight
//! 𝒮 = ∫dt (−λ̇_p·ṙ + g λ_p·r / |r|⁴).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dot, norm2, Vec3};
use crate::par::compensated_sum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KvnPath {
    pub times: Vec<f64>,
    pub r: Vec<Vec3>,
    pub lambda: Vec<Vec3>,
}

impl KvnPath {
    pub fn sample<F: Fn(f64) -> (Vec3, Vec3)>(t0: f64, t1: f64, n: usize, f: F) -> Result<Self> {
        if n < 2 || !(t1 > t0) {
            return Err(Error::Precondition("a path needs N >= 2 intervals over a positive span".into()));
        }
        let times: Vec<f64> = (0..=n).map(|k| t0 + (t1 - t0) * k as f64 / n as f64).collect();
        let (r, lambda) = times.iter().map(|&t| f(t)).unzip();
        Ok(Self { times, r, lambda })
    }

    /// r → e^{−α/2} r, λ_p → e^{−α/2} λ_p, t → e^{−α} t.
    pub fn scaled(&self, alpha: f64) -> Self {
        let s = (-0.5 * alpha).exp();
        let st = (-alpha).exp();
        let sc = |v: &Vec3| [v[0] * s, v[1] * s, v[2] * s];
        Self {
            times: self.times.iter().map(|t| t * st).collect(),
            r: self.r.iter().map(sc).collect(),
            lambda: self.lambda.iter().map(sc).collect(),
        }
    }
}

/// Potential term g λ·r/|r|^exponent; the weight is scale invariant only for exponent 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KvnWeight {
    pub g: f64,
    pub exponent: i32,
}

impl KvnWeight {
    pub fn inverse_square(g: f64) -> Self {
        Self { g, exponent: 4 }
    }

    pub fn deformed(g: f64) -> Self {
        Self { g, exponent: 2 }
    }
}

pub fn kvn_action(path: &KvnPath, weight: KvnWeight) -> Result<f64> {
    let n = path.times.len();
    let dt = path.times[1] - path.times[0];
    let mut terms = Vec::with_capacity(2 * n);
    for k in 0..n - 1 {
        let dr = [path.r[k + 1][0] - path.r[k][0], path.r[k + 1][1] - path.r[k][1], path.r[k + 1][2] - path.r[k][2]];
        let dl = [
            path.lambda[k + 1][0] - path.lambda[k][0],
            path.lambda[k + 1][1] - path.lambda[k][1],
            path.lambda[k + 1][2] - path.lambda[k][2],
        ];
        terms.push(-dot(&dl, &dr) / dt);
    }
    for k in 0..n {
        let r2 = norm2(&path.r[k]);
        if r2 == 0.0 {
            return Err(Error::SingularInput("KvN path passes through the origin".into()));
        }
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        terms.push(w * dt * weight.g * dot(&path.lambda[k], &path.r[k]) / r2.powi(weight.exponent / 2));
    }
    Ok(compensated_sum(terms))
}

/// Δ𝒮 = 𝒮[scaled path] − 𝒮[path].
pub fn kvn_action_scale_variation(path: &KvnPath, alpha: f64, weight: KvnWeight) -> Result<f64> {
    if alpha == 0.0 {
        return Ok(0.0);
    }
    Ok(kvn_action(&path.scaled(alpha), weight)? - kvn_action(path, weight)?)
}
