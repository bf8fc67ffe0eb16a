//! Hamiltonian dynamics of H = p²/2 − g/(2(r² + ε²)), the Noether dilation
//! charge, finite scale transformations and the scale variation of the
//! discretized action.

use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{norm2, regularized_potential, ChargeRecord, PhasePoint, SystemParams, Vec3};
use crate::ode::{self, StepControl};

pub const DEFAULT_R_MIN: f64 = 1e-6;

/// Local error tolerance handed to the step controller, relative to the
/// requested conservation tolerance.
const LOCAL_TOL_FACTOR: f64 = 1e-3;

/// F(r) = −g r / (|r|² + ε²)².
pub fn force(r: &Vec3, params: &SystemParams) -> Result<Vec3> {
    let s = norm2(r) + params.epsilon * params.epsilon;
    if s == 0.0 {
        return Err(Error::SingularInput("force evaluated at the origin with epsilon = 0".into()));
    }
    let c = -params.g / (s * s);
    Ok([c * r[0], c * r[1], c * r[2]])
}

/// ∂F_i/∂r_j.
fn force_jacobian(r: &[f64], g: f64, eps2: f64) -> [[f64; 3]; 3] {
    let s = r[0] * r[0] + r[1] * r[1] + r[2] * r[2] + eps2;
    let s2 = s * s;
    let s3 = s2 * s;
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            k[i][j] = -g * (delta / s2 - 4.0 * r[i] * r[j] / s3);
        }
    }
    k
}

/// Jacobian ∂Φ_t(z₀)/∂z₀ of the flow map, ordered (r, p).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    pub jac: Matrix6<f64>,
}

impl TangentFrame {
    pub fn identity() -> Self {
        Self { jac: Matrix6::identity() }
    }

    pub fn omega() -> Matrix6<f64> {
        let mut o = Matrix6::zeros();
        for i in 0..3 {
            o[(i, i + 3)] = 1.0;
            o[(i + 3, i)] = -1.0;
        }
        o
    }

    /// ‖JᵀΩJ − Ω‖∞ (max-abs entry).
    pub fn symplectic_defect(&self) -> f64 {
        let o = Self::omega();
        (self.jac.transpose() * o * self.jac - o).abs().max()
    }

    /// J⁻¹ = −Ω Jᵀ Ω, exact for symplectic J.
    pub fn symplectic_inverse(&self) -> Matrix6<f64> {
        let o = Self::omega();
        -(o * self.jac.transpose() * o)
    }

    /// Maps a gradient at z₀ to the gradient of the transported function at
    /// Φ_t(z₀): ∇_z ψ(Φ_{−t} z) = J⁻ᵀ ∇ψ(z₀).
    pub fn pull_gradient(&self, grad0: &[f64; 6]) -> [f64; 6] {
        let inv_t = self.symplectic_inverse().transpose();
        let v = inv_t * nalgebra::Vector6::from_column_slice(grad0);
        [v[0], v[1], v[2], v[3], v[4], v[5]]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrajectoryOptions {
    pub tol: f64,
    pub r_min: f64,
}

impl TrajectoryOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, r_min: DEFAULT_R_MIN }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: SystemParams,
    pub samples: Vec<(f64, PhasePoint)>,
    pub charges: Vec<ChargeRecord>,
    pub capture_event: Option<f64>,
    pub steps: usize,
}

impl Trajectory {
    /// max |H(t) − H(0)| / max(1, |H(0)|) over the recorded samples.
    pub fn relative_energy_drift(&self) -> f64 {
        let Some(first) = self.charges.first() else {
            return 0.0;
        };
        let scale = first.energy.abs().max(1.0);
        self.charges
            .iter()
            .map(|c| (c.energy - first.energy).abs() / scale)
            .fold(0.0, f64::max)
    }
}

fn rhs(params: &SystemParams, with_frame: bool) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
    let g = params.g;
    let eps2 = params.epsilon * params.epsilon;
    move |_t, y, dy| {
        let s = y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + eps2;
        let c = -g / (s * s);
        for i in 0..3 {
            dy[i] = y[3 + i];
            dy[3 + i] = c * y[i];
        }
        if with_frame {
            // column-major 6×6 block after the state; d/dt J = [[0, I], [K, 0]] J
            let k = force_jacobian(&y[..3], g, eps2);
            for col in 0..6 {
                let j = &y[6 + 6 * col..6 + 6 * col + 6];
                let out = &mut dy[6 + 6 * col..6 + 6 * col + 6];
                for i in 0..3 {
                    out[i] = j[3 + i];
                    out[3 + i] = k[i][0] * j[0] + k[i][1] * j[1] + k[i][2] * j[2];
                }
            }
        }
    }
}

fn check_ic(ic: &PhasePoint, params: &SystemParams) -> Result<()> {
    if params.epsilon == 0.0 && norm2(&ic.r) == 0.0 {
        return Err(Error::SingularInput("initial condition at the origin".into()));
    }
    Ok(())
}

/// Integrates Hamilton's equations and records (t, z) and charges at `times`.
pub fn integrate_trajectory(
    ic: PhasePoint,
    params: &SystemParams,
    times: &[f64],
    tol: f64,
) -> Result<Trajectory> {
    integrate_trajectory_with(ic, params, times, TrajectoryOptions::new(tol))
}

pub fn integrate_trajectory_with(
    ic: PhasePoint,
    params: &SystemParams,
    times: &[f64],
    opts: TrajectoryOptions,
) -> Result<Trajectory> {
    if !(opts.tol > 0.0) {
        return Err(Error::Precondition("tol must be > 0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("output times must be strictly increasing".into()));
    }
    check_ic(&ic, params)?;
    let t0 = times.first().copied().unwrap_or(0.0);
    let r_min2 = opts.r_min * opts.r_min;
    let sol = ode::integrate(
        rhs(params, false),
        t0,
        &ic.to_array(),
        times,
        StepControl::with_tol(opts.tol * LOCAL_TOL_FACTOR),
        |_t, y| y[0] * y[0] + y[1] * y[1] + y[2] * y[2] < r_min2,
    )?;
    let mut samples = Vec::with_capacity(sol.samples.len());
    let mut charges = Vec::with_capacity(sol.samples.len());
    for (t, y) in &sol.samples {
        let z = PhasePoint::from_slice(y);
        let h = z.energy(params)?;
        charges.push(ChargeRecord::deterministic(*t, h, *t * h - 0.5 * z.r_dot_p(), 1.0));
        samples.push((*t, z));
    }
    Ok(Trajectory {
        params: *params,
        samples,
        charges,
        capture_event: sol.stopped.map(|(t, _)| t),
        steps: sol.steps,
    })
}

/// Final state and tangent frame at time `t`, or the capture time.
#[derive(Debug, Clone, Copy)]
pub enum FlowOutcome {
    Reached { point: PhasePoint, frame: TangentFrame },
    Captured { t: f64 },
}

pub fn flow_with_frame(ic: PhasePoint, params: &SystemParams, t: f64, opts: TrajectoryOptions) -> Result<FlowOutcome> {
    let (frames, captured) = flow_frames(ic, params, &[t], opts)?;
    Ok(match captured {
        Some(tc) => FlowOutcome::Captured { t: tc },
        None => {
            let (point, frame) = frames[0];
            FlowOutcome::Reached { point, frame }
        }
    })
}

/// Phase point and tangent frame at each of `times` (ascending, ≥ 0), plus
/// the capture time if the orbit fell below r_min first.
pub fn flow_frames(
    ic: PhasePoint,
    params: &SystemParams,
    times: &[f64],
    opts: TrajectoryOptions,
) -> Result<(Vec<(PhasePoint, TangentFrame)>, Option<f64>)> {
    check_ic(&ic, params)?;
    let mut y0 = vec![0.0; 42];
    y0[..6].copy_from_slice(&ic.to_array());
    for i in 0..6 {
        y0[6 + 7 * i] = 1.0;
    }
    let r_min2 = opts.r_min * opts.r_min;
    let sol = ode::integrate(
        rhs(params, true),
        0.0,
        &y0,
        times,
        StepControl::with_tol(opts.tol * LOCAL_TOL_FACTOR),
        |_t, y| y[0] * y[0] + y[1] * y[1] + y[2] * y[2] < r_min2,
    )?;
    let frames = sol
        .samples
        .iter()
        .map(|(_, y)| (PhasePoint::from_slice(&y[..6]), TangentFrame { jac: Matrix6::from_column_slice(&y[6..42]) }))
        .collect();
    Ok((frames, sol.stopped.map(|(t, _)| t)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub r2: f64,
    pub r_dot_p: f64,
    pub energy: f64,
}

/// Closed-form r²(t), (r·p)(t) and H for the unregularized potential:
/// d(r·p)/dt = 2H and d(r²)/dt = 2 r·p hold exactly when V ∝ 1/r².
pub fn analytic_moments(ic: &PhasePoint, params: &SystemParams, t: f64) -> Result<Moments> {
    if params.epsilon != 0.0 {
        return Err(Error::Precondition("analytic moments need epsilon = 0".into()));
    }
    let h = ic.energy(params)?;
    let rp0 = ic.r_dot_p();
    Ok(Moments {
        r2: norm2(&ic.r) + 2.0 * rp0 * t + 2.0 * h * t * t,
        r_dot_p: rp0 + 2.0 * h * t,
        energy: h,
    })
}

/// D = tH − (1/2) r·p.
pub fn dilation_charge(point: &PhasePoint, t: f64, params: &SystemParams) -> Result<f64> {
    Ok(t * point.energy(params)? - 0.5 * point.r_dot_p())
}

/// r′ = e^{−α/2} r, p′ = e^{α/2} p, t′ = e^{−α} t.
pub fn scale_transform(point: &PhasePoint, t: f64, alpha: f64) -> (PhasePoint, f64) {
    let sr = (-0.5 * alpha).exp();
    let sp = (0.5 * alpha).exp();
    let r = [point.r[0] * sr, point.r[1] * sr, point.r[2] * sr];
    let p = [point.p[0] * sp, point.p[1] * sp, point.p[2] * sp];
    (PhasePoint::new(r, p), t * (-alpha).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePath {
    pub times: Vec<f64>,
    pub positions: Vec<Vec3>,
}

impl DiscretePath {
    pub fn new(times: Vec<f64>, positions: Vec<Vec3>) -> Result<Self> {
        if times.len() < 3 || times.len() != positions.len() {
            return Err(Error::Precondition("a path needs N >= 2 intervals and one position per time".into()));
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(Error::Precondition("time grid spacing must be > 0".into()));
        }
        if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0)) {
            return Err(Error::Precondition("time grid must be uniform".into()));
        }
        Ok(Self { times, positions })
    }

    /// Samples `f` on a uniform grid of `n` intervals over [t0, t1].
    pub fn sample<F: Fn(f64) -> Vec3>(t0: f64, t1: f64, n: usize, f: F) -> Result<Self> {
        let times: Vec<f64> = (0..=n).map(|k| t0 + (t1 - t0) * k as f64 / n as f64).collect();
        let positions = times.iter().map(|&t| f(t)).collect();
        Self::new(times, positions)
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Positions and times mapped by the finite dilation.
    pub fn scaled(&self, alpha: f64) -> Self {
        let sr = (-0.5 * alpha).exp();
        let st = (-alpha).exp();
        Self {
            times: self.times.iter().map(|t| t * st).collect(),
            positions: self.positions.iter().map(|r| [r[0] * sr, r[1] * sr, r[2] * sr]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PotentialTag {
    /// V = −g / (2r²).
    InverseSquare { g: f64 },
    /// V = r², which is not scale invariant.
    Harmonic,
}

impl PotentialTag {
    fn value(&self, r: &Vec3) -> Result<f64> {
        match *self {
            PotentialTag::InverseSquare { g } => regularized_potential(r, &SystemParams::bare(g)),
            PotentialTag::Harmonic => Ok(norm2(r)),
        }
    }
}

/// S = Σ ½|Δr|²/Δt − Σ_trapezoid V Δt.
pub fn discrete_action(path: &DiscretePath, tag: PotentialTag) -> Result<f64> {
    let dt = path.dt();
    let n = path.positions.len();
    let mut kin = Vec::with_capacity(n - 1);
    for w in path.positions.windows(2) {
        let d = [w[1][0] - w[0][0], w[1][1] - w[0][1], w[1][2] - w[0][2]];
        kin.push(0.5 * norm2(&d) / dt);
    }
    let mut pot = Vec::with_capacity(n);
    for (k, r) in path.positions.iter().enumerate() {
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        pot.push(-w * tag.value(r)? * dt);
    }
    Ok(crate::par::compensated_sum(kin.into_iter().chain(pot)))
}

/// ΔS = S[scaled path] − S[path].
pub fn action_scale_variation(path: &DiscretePath, alpha: f64, tag: PotentialTag) -> Result<f64> {
    if alpha == 0.0 {
        return Ok(0.0);
    }
    Ok(discrete_action(&path.scaled(alpha), tag)? - discrete_action(path, tag)?)
}

/// Least-squares fit ΔS/α = c₁ + c₂ α; returns c₁.
pub fn first_order_coefficient(alphas: &[f64], deltas: &[f64]) -> f64 {
    let n = alphas.len() as f64;
    let ys: Vec<f64> = alphas.iter().zip(deltas).map(|(a, d)| d / a).collect();
    let mx = alphas.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = alphas.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = alphas.iter().zip(&ys).map(|(a, y)| (a - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    my - slope * mx
}


#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn times(t1: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| t1 * k as f64 / n as f64).collect()
    }

    #[test]
    fn force_values() {
        let p = SystemParams::bare(1.0);
        assert_eq!(force(&[1.0, 0.0, 0.0], &p).unwrap(), [-1.0, 0.0, 0.0]);
        assert_eq!(force(&[0.0, 2.0, 0.0], &p).unwrap(), [0.0, -0.125, 0.0]);
        assert!(force(&[0.0; 3], &p).is_err());
    }

    #[test]
    fn regularized_force_matches_finite_difference_gradient() {
        let p = SystemParams::bare(1.0).with_epsilon(1.0);
        let r = [1.0, 0.0, 0.0];
        let f = force(&r, &p).unwrap();
        assert_relative_eq!(f[0], -0.25, epsilon = 1e-15);
        let h = 1e-5;
        for i in 0..3 {
            let mut rp = r;
            let mut rm = r;
            rp[i] += h;
            rm[i] -= h;
            let g = (regularized_potential(&rp, &p).unwrap() - regularized_potential(&rm, &p).unwrap()) / (2.0 * h);
            assert!((f[i] + g).abs() < 1e-8, "component {i}: {} vs {}", f[i], -g);
        }
    }

    #[test]
    fn free_particle_moves_in_a_straight_line() {
        let p = SystemParams::bare(0.0);
        let ic = PhasePoint::new([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let traj = integrate_trajectory(ic, &p, &times(3.0, 6), 1e-10).unwrap();
        for (t, z) in &traj.samples {
            assert_relative_eq!(z.r[0], 1.0 + t, epsilon = 1e-12);
            assert_eq!(z.r[1], 0.0);
        }
    }

    #[test]
    fn bound_angular_momentum_never_captures() {
        let p = SystemParams::bare(0.5);
        let ic = PhasePoint::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let traj = integrate_trajectory(ic, &p, &times(10.0, 100), 1e-10).unwrap();
        assert!(traj.capture_event.is_none());
        for (t, z) in &traj.samples {
            let m = analytic_moments(&ic, &p, *t).unwrap();
            assert_relative_eq!(m.r2, 1.0 + 0.5 * t * t, epsilon = 1e-12);
            assert!((norm2(&z.r) - m.r2).abs() < 1e-9);
            assert!((z.r_dot_p() - m.r_dot_p).abs() < 1e-9);
        }
        assert!(traj.relative_energy_drift() < 1e-10);
    }

    #[test]
    fn radial_fall_is_captured_when_r_squared_vanishes() {
        // r²(t) = 1 + 2Ht² with H = −1/4 vanishes at t = √2
        let p = SystemParams::bare(0.5);
        let ic = PhasePoint::new([1.0, 0.0, 0.0], [0.0, 0.0, 0.0]);
        let m = analytic_moments(&ic, &p, 2f64.sqrt()).unwrap();
        assert!(m.r2.abs() < 1e-15);
        let traj = integrate_trajectory(ic, &p, &times(5.0, 50), 1e-10).unwrap();
        let tc = traj.capture_event.expect("capture");
        assert!((tc - 2f64.sqrt()).abs() < 1e-6, "capture at {tc}");
    }

    #[test]
    fn moments_at_time_zero_are_initial_values() {
        let p = SystemParams::bare(0.7);
        let ic = PhasePoint::new([0.3, -1.0, 0.2], [0.5, 0.1, -0.4]);
        let m = analytic_moments(&ic, &p, 0.0).unwrap();
        assert_eq!(m.r2, norm2(&ic.r));
        assert_eq!(m.r_dot_p, ic.r_dot_p());
        assert_eq!(m.energy, ic.energy(&p).unwrap());
        assert!(analytic_moments(&ic, &p.with_epsilon(0.1), 1.0).is_err());
    }

    #[test]
    fn dilation_charge_is_constant_along_orbits() {
        let p = SystemParams::bare(0.5);
        let ic = PhasePoint::new([1.0, 0.2, 0.0], [0.3, 1.0, 0.1]);
        assert_relative_eq!(dilation_charge(&ic, 0.0, &p).unwrap(), -0.5 * ic.r_dot_p());
        let traj = integrate_trajectory(ic, &p, &times(10.0, 40), 1e-10).unwrap();
        for c in &traj.charges {
            assert!((c.dilation + 0.5 * ic.r_dot_p()).abs() < 1e-8);
        }
        let ic = PhasePoint::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let traj = integrate_trajectory(ic, &p, &times(10.0, 40), 1e-10).unwrap();
        assert!(traj.charges.iter().all(|c| c.dilation.abs() < 1e-8));
    }

    #[test]
    fn tangent_frame_is_symplectic() {
        let p = SystemParams::bare(0.5);
        let ic = PhasePoint::new([1.0, 0.0, 0.1], [0.0, 1.0, 0.2]);
        let tol = 1e-8;
        match flow_with_frame(ic, &p, 5.0, TrajectoryOptions::new(tol)).unwrap() {
            FlowOutcome::Reached { frame, .. } => {
                assert!(frame.symplectic_defect() < 100.0 * tol, "{}", frame.symplectic_defect());
                assert!((frame.jac.determinant() - 1.0).abs() < 1e-5);
            }
            FlowOutcome::Captured { .. } => panic!("unexpected capture"),
        }
    }

    #[test]
    fn tangent_frame_matches_finite_difference_flow() {
        let p = SystemParams::bare(0.5);
        let ic = PhasePoint::new([1.0, 0.0, 0.1], [0.0, 1.0, 0.2]);
        let opts = TrajectoryOptions::new(1e-11);
        let FlowOutcome::Reached { frame, .. } = flow_with_frame(ic, &p, 2.0, opts).unwrap() else {
            panic!()
        };
        let h = 1e-5;
        for j in 0..6 {
            let mut zp = ic.to_array();
            let mut zm = ic.to_array();
            zp[j] += h;
            zm[j] -= h;
            let end = |z: [f64; 6]| match flow_with_frame(PhasePoint::from_slice(&z), &p, 2.0, opts).unwrap() {
                FlowOutcome::Reached { point, .. } => point.to_array(),
                _ => panic!(),
            };
            let (a, b) = (end(zp), end(zm));
            for i in 0..6 {
                let fd = (a[i] - b[i]) / (2.0 * h);
                assert!((fd - frame.jac[(i, j)]).abs() < 1e-5, "({i},{j}) {fd} {}", frame.jac[(i, j)]);
            }
        }
    }

    #[test]
    fn scale_transform_examples() {
        let z = PhasePoint::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert_eq!(scale_transform(&z, 1.0, 0.0), (z, 1.0));
        let (z2, t2) = scale_transform(&z, 1.0, 2.0 * 2f64.ln());
        assert_relative_eq!(z2.r[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(z2.p[1], 2.0, epsilon = 1e-15);
        assert_relative_eq!(t2, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn energy_scales_with_exp_alpha() {
        let p = SystemParams::bare(0.8);
        let z = PhasePoint::new([0.4, 1.0, -0.3], [0.2, -0.5, 0.9]);
        for alpha in [-1.3, 0.01, 0.7, 2.0] {
            let (z2, _) = scale_transform(&z, 0.0, alpha);
            let lhs = z2.energy(&p).unwrap();
            let rhs = alpha.exp() * z.energy(&p).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn scale_transform_group_law() {
        let z = PhasePoint::new([0.4, 1.0, -0.3], [0.2, -0.5, 0.9]);
        let (a, b) = (0.37, -1.1);
        let (z1, t1) = scale_transform(&z, 2.0, a);
        let (z2, t2) = scale_transform(&z1, t1, b);
        let (z3, t3) = scale_transform(&z, 2.0, a + b);
        for i in 0..3 {
            assert!((z2.r[i] - z3.r[i]).abs() < 1e-14);
            assert!((z2.p[i] - z3.p[i]).abs() < 1e-14);
        }
        assert!((t2 - t3).abs() < 1e-14);
    }

    fn test_path() -> DiscretePath {
        DiscretePath::sample(0.5, 2.5, 400, |t| [1.0 + 0.3 * t, 0.5 * (1.3 * t).sin(), 0.2 * t * t]).unwrap()
    }

    #[test]
    fn inverse_square_action_has_no_first_order_variation() {
        let path = test_path();
        let tag = PotentialTag::InverseSquare { g: 0.5 };
        assert_eq!(action_scale_variation(&path, 0.0, tag).unwrap(), 0.0);
        let alphas = [1e-2, 1e-3, 1e-4];
        let ds: Vec<f64> = alphas.iter().map(|&a| action_scale_variation(&path, a, tag).unwrap()).collect();
        assert!(first_order_coefficient(&alphas, &ds).abs() < 1e-6);
    }

    #[test]
    fn harmonic_action_varies_at_first_order() {
        // S[scaled] − S = −(e^{−2α} − 1) ∫V dt − ... so dS/dα = 2 ∫ r² dt
        let path = test_path();
        let alphas = [1e-2, 1e-3, 1e-4];
        let ds: Vec<f64> = alphas
            .iter()
            .map(|&a| action_scale_variation(&path, a, PotentialTag::Harmonic).unwrap())
            .collect();
        let c1 = first_order_coefficient(&alphas, &ds);
        // oracle: central difference in α of the discrete action
        let h = 1e-5;
        let fd = (discrete_action(&path.scaled(h), PotentialTag::Harmonic).unwrap()
            - discrete_action(&path.scaled(-h), PotentialTag::Harmonic).unwrap())
            / (2.0 * h);
        assert!(c1 > 1e-2);
        assert!((c1 - fd).abs() < 1e-4 * fd.abs(), "{c1} vs {fd}");
    }

    #[test]
    fn path_validation() {
        assert!(DiscretePath::new(vec![0.0, 1.0], vec![[1.0; 3]; 2]).is_err());
        assert!(DiscretePath::new(vec![0.0, 1.0, 1.0], vec![[1.0; 3]; 3]).is_err());
        assert!(DiscretePath::new(vec![0.0, 1.0, 3.0], vec![[1.0; 3]; 3]).is_err());
    }
}
