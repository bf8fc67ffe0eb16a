//! Shared domain types and the regularized inverse-square potential.
//!
//! Units are ħ = m = 1 throughout. The potential is V(r) = −g / (2(|r|² + ε²)),
//! which is the bare inverse-square potential when ε = 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

pub const HBAR: f64 = 1.0;

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm2(a: &Vec3) -> f64 {
    dot(a, a)
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub g: f64,
    pub dim: u8,
    pub epsilon: f64,
    pub cutoff_a: f64,
    pub box_r: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g: 0.5,
            dim: 3,
            epsilon: 0.0,
            cutoff_a: 0.01,
            box_r: 50.0,
        }
    }
}

impl SystemParams {
    pub fn new(g: f64, dim: u8, epsilon: f64, cutoff_a: f64, box_r: f64) -> Self {
        Self {
            g,
            dim,
            epsilon,
            cutoff_a,
            box_r,
        }
    }

    /// Inverse-square coupling with no regularization and default cutoffs.
    pub fn bare(g: f64) -> Self {
        Self {
            g,
            ..Self::default()
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_dim(mut self, dim: u8) -> Self {
        self.dim = dim;
        self
    }

    pub fn with_cutoffs(mut self, cutoff_a: f64, box_r: f64) -> Self {
        self.cutoff_a = cutoff_a;
        self.box_r = box_r;
        self
    }

    /// s-wave strong coupling, g > 1/4.
    pub fn strong_coupling(&self) -> bool {
        self.g > 0.25
    }

    /// ν = √(g − 1/4) for strong coupling, `None` otherwise.
    pub fn nu(&self) -> Option<f64> {
        self.strong_coupling().then(|| (self.g - 0.25).sqrt())
    }
}

/// Checks every invariant and reports all violations at once.
///
/// `g = 0` is accepted as the free-particle control; negative or non-finite
/// couplings are rejected.
pub fn validate(params: SystemParams) -> Result<SystemParams> {
    let mut bad = Vec::new();
    if !(params.g.is_finite() && params.g >= 0.0) {
        bad.push(format!("g = {} (must be finite and >= 0)", params.g));
    }
    if params.dim != 1 && params.dim != 3 {
        bad.push(format!("dim = {} (must be 1 or 3)", params.dim));
    }
    if !(params.epsilon.is_finite() && params.epsilon >= 0.0) {
        bad.push(format!("epsilon = {} (must be >= 0)", params.epsilon));
    }
    if !(params.cutoff_a.is_finite() && params.cutoff_a > 0.0) {
        bad.push(format!("cutoff_a = {} (must be > 0)", params.cutoff_a));
    }
    if !params.box_r.is_finite() || params.cutoff_a >= params.box_r {
        bad.push(format!(
            "cutoff_a < box_r violated ({} >= {})",
            params.cutoff_a, params.box_r
        ));
    }
    if bad.is_empty() {
        Ok(params)
    } else {
        Err(Error::InvalidParams(bad))
    }
}

/// V(r) = −g / (2(|r|² + ε²)).
pub fn regularized_potential(r: &Vec3, params: &SystemParams) -> Result<f64> {
    let s = norm2(r) + params.epsilon * params.epsilon;
    if s == 0.0 {
        return Err(Error::SingularInput("potential evaluated at the origin with epsilon = 0".into()));
    }
    Ok(-params.g / (2.0 * s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub r: Vec3,
    pub p: Vec3,
}

impl PhasePoint {
    pub fn new(r: Vec3, p: Vec3) -> Self {
        Self { r, p }
    }

    pub fn radius(&self) -> f64 {
        norm2(&self.r).sqrt()
    }

    pub fn r_dot_p(&self) -> f64 {
        dot(&self.r, &self.p)
    }

    pub fn angular_momentum_sq(&self) -> f64 {
        norm2(&cross(&self.r, &self.p))
    }

    /// H = p²/2 + V(r).
    pub fn energy(&self, params: &SystemParams) -> Result<f64> {
        Ok(0.5 * norm2(&self.p) + regularized_potential(&self.r, params)?)
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.r[0], self.r[1], self.r[2], self.p[0], self.p[1], self.p[2]]
    }

    pub fn from_slice(z: &[f64]) -> Self {
        Self {
            r: [z[0], z[1], z[2]],
            p: [z[3], z[4], z[5]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilationParams {
    pub alpha: f64,
    pub t0: f64,
}

impl DilationParams {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, t0: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeRecord {
    pub t: f64,
    pub energy: f64,
    pub dilation: f64,
    pub norm: f64,
    pub stat_err: f64,
}

impl ChargeRecord {
    pub fn deterministic(t: f64, energy: f64, dilation: f64, norm: f64) -> Self {
        Self {
            t,
            energy,
            dilation,
            norm,
            stat_err: 0.0,
        }
    }
}

/// Time series of conserved-charge records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChargeSeries {
    pub records: Vec<ChargeRecord>,
}

impl ChargeSeries {
    pub fn push(&mut self, rec: ChargeRecord) {
        self.records.push(rec);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first(&self) -> Option<&ChargeRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&ChargeRecord> {
        self.records.last()
    }

    pub fn max_abs_deviation<F: Fn(&ChargeRecord) -> f64>(&self, f: F) -> f64 {
        let Some(first) = self.records.first() else {
            return 0.0;
        };
        let f0 = f(first);
        self.records
            .iter()
            .map(|r| (f(r) - f0).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validate_accepts_reference_params() {
        let p = SystemParams::new(0.5, 3, 0.0, 0.01, 50.0);
        assert_eq!(validate(p), Ok(p));
    }

    #[test]
    fn validate_rejects_negative_coupling() {
        let p = SystemParams::new(-1.0, 3, 0.0, 0.01, 50.0);
        match validate(p) {
            Err(Error::InvalidParams(v)) => {
                assert_eq!(v.len(), 1);
                assert!(v[0].starts_with("g ="));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_cutoff_beyond_box() {
        let p = SystemParams::new(1.25, 3, 0.0, 1.0, 0.5);
        match validate(p) {
            Err(Error::InvalidParams(v)) => assert!(v[0].contains("cutoff_a < box_r")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_lists_every_violation() {
        let p = SystemParams::new(-1.0, 2, -0.1, 1.0, 0.5);
        match validate(p) {
            Err(Error::InvalidParams(v)) => assert_eq!(v.len(), 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn potential_values() {
        let p = SystemParams::bare(2.0);
        assert_eq!(regularized_potential(&[1.0, 0.0, 0.0], &p).unwrap(), -1.0);
        let p = SystemParams::bare(1.0).with_epsilon(1.0);
        assert_eq!(regularized_potential(&[1.0, 0.0, 0.0], &p).unwrap(), -0.25);
        let p = SystemParams::bare(1.0);
        assert!(matches!(
            regularized_potential(&[0.0; 3], &p),
            Err(Error::SingularInput(_))
        ));
    }

    #[test]
    fn strong_coupling_threshold() {
        assert!(SystemParams::bare(1.25).strong_coupling());
        assert!(!SystemParams::bare(0.25).strong_coupling());
        assert_eq!(SystemParams::bare(1.25).nu(), Some(1.0));
    }

    fn vec3() -> impl Strategy<Value = Vec3> {
        prop::array::uniform3(-5.0f64..5.0).prop_filter("away from origin", |v| norm2(v) > 1e-4)
    }

    proptest! {
        #[test]
        fn potential_is_even(r in vec3(), eps in 0.0f64..2.0, g in 0.0f64..3.0) {
            let p = SystemParams::bare(g).with_epsilon(eps);
            let a = regularized_potential(&r, &p).unwrap();
            let b = regularized_potential(&scale(&r, -1.0), &p).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn potential_is_homogeneous_of_degree_minus_two(r in vec3(), s in 0.1f64..10.0, g in 0.01f64..3.0) {
            let p = SystemParams::bare(g);
            let a = regularized_potential(&scale(&r, s), &p).unwrap();
            let b = regularized_potential(&r, &p).unwrap() / (s * s);
            prop_assert!((a - b).abs() <= 1e-12 * b.abs());
        }

        #[test]
        fn validate_is_idempotent(g in -1.0f64..2.0, a in 0.001f64..2.0, big_r in 0.5f64..100.0, eps in -0.5f64..0.5) {
            let p = SystemParams::new(g, 3, eps, a, big_r);
            let once = validate(p);
            if let Ok(v) = once {
                prop_assert_eq!(validate(v), Ok(v));
            }
        }
    }
}
