//! Closed-form initial KvN waves ψ₀(r, p) in three dimensions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dot, norm2, PhasePoint, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialWaveSpec {
    /// N exp(−|r − r̄|²/4σ_r² − |p − p̄|²/4σ_p² + i k_r·r + i k_p·p).
    Gaussian {
        r_bar: Vec3,
        sigma_r: f64,
        p_bar: Vec3,
        sigma_p: f64,
        k_r: Vec3,
        k_p: Vec3,
    },
    /// c |r|^{−1/2} χ(|r|) h(p) with χ(r) = exp(−r²/2σ_r²) and h a centred
    /// Gaussian of width σ_p; c² = 1/(2πσ_r²).
    Singular { sigma_r: f64, sigma_p: f64 },
}

impl InitialWaveSpec {
    pub fn gaussian(r_bar: Vec3, sigma_r: f64, p_bar: Vec3, sigma_p: f64) -> Self {
        InitialWaveSpec::Gaussian { r_bar, sigma_r, p_bar, sigma_p, k_r: [0.0; 3], k_p: [0.0; 3] }
    }

    pub fn with_phases(self, k_r_new: Vec3, k_p_new: Vec3) -> Self {
        match self {
            InitialWaveSpec::Gaussian { r_bar, sigma_r, p_bar, sigma_p, .. } => {
                InitialWaveSpec::Gaussian { r_bar, sigma_r, p_bar, sigma_p, k_r: k_r_new, k_p: k_p_new }
            }
            s => s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (sr, sp) = match *self {
            InitialWaveSpec::Gaussian { sigma_r, sigma_p, .. } => (sigma_r, sigma_p),
            InitialWaveSpec::Singular { sigma_r, sigma_p } => (sigma_r, sigma_p),
        };
        if !(sr > 0.0 && sp > 0.0 && sr.is_finite() && sp.is_finite()) {
            return Err(Error::InvalidParams(vec![format!("wave widths must be > 0 (sigma_r = {sr}, sigma_p = {sp})")]));
        }
        Ok(())
    }

    /// Singular-profile amplitude c.
    pub fn singular_c(sigma_r: f64) -> f64 {
        (1.0 / (2.0 * PI * sigma_r * sigma_r)).sqrt()
    }

    fn gauss_norm(sigma: f64) -> f64 {
        (2.0 * PI * sigma * sigma).powf(-0.75)
    }

    pub fn value(&self, z: &PhasePoint) -> Complex64 {
        match *self {
            InitialWaveSpec::Gaussian { r_bar, sigma_r, p_bar, sigma_p, k_r, k_p } => {
                let dr = [z.r[0] - r_bar[0], z.r[1] - r_bar[1], z.r[2] - r_bar[2]];
                let dp = [z.p[0] - p_bar[0], z.p[1] - p_bar[1], z.p[2] - p_bar[2]];
                let amp = Self::gauss_norm(sigma_r)
                    * Self::gauss_norm(sigma_p)
                    * (-norm2(&dr) / (4.0 * sigma_r * sigma_r) - norm2(&dp) / (4.0 * sigma_p * sigma_p)).exp();
                Complex64::from_polar(amp, dot(&k_r, &z.r) + dot(&k_p, &z.p))
            }
            InitialWaveSpec::Singular { sigma_r, sigma_p } => {
                let r2 = norm2(&z.r);
                let amp = Self::singular_c(sigma_r)
                    * r2.powf(-0.25)
                    * (-r2 / (2.0 * sigma_r * sigma_r)).exp()
                    * Self::gauss_norm(sigma_p)
                    * (-norm2(&z.p) / (4.0 * sigma_p * sigma_p)).exp();
                Complex64::new(amp, 0.0)
            }
        }
    }

    /// ∇ψ₀ / ψ₀ ordered (∂_r, ∂_p).
    pub fn log_gradient(&self, z: &PhasePoint) -> [Complex64; 6] {
        let mut out = [Complex64::new(0.0, 0.0); 6];
        match *self {
            InitialWaveSpec::Gaussian { r_bar, sigma_r, p_bar, sigma_p, k_r, k_p } => {
                for i in 0..3 {
                    out[i] = Complex64::new(-(z.r[i] - r_bar[i]) / (2.0 * sigma_r * sigma_r), k_r[i]);
                    out[3 + i] = Complex64::new(-(z.p[i] - p_bar[i]) / (2.0 * sigma_p * sigma_p), k_p[i]);
                }
            }
            InitialWaveSpec::Singular { sigma_r, sigma_p } => {
                let r2 = norm2(&z.r);
                let c = -0.5 / r2 - 1.0 / (sigma_r * sigma_r);
                for i in 0..3 {
                    out[i] = Complex64::new(c * z.r[i], 0.0);
                    out[3 + i] = Complex64::new(-z.p[i] / (2.0 * sigma_p * sigma_p), 0.0);
                }
            }
        }
        out
    }

    pub fn gradient(&self, z: &PhasePoint) -> [Complex64; 6] {
        let v = self.value(z);
        self.log_gradient(z).map(|a| a * v)
    }

    /// Gradient of the phase S₀ = arg ψ₀, which is constant for both families.
    pub fn phase_gradient(&self) -> [f64; 6] {
        match *self {
            InitialWaveSpec::Gaussian { k_r, k_p, .. } => [k_r[0], k_r[1], k_r[2], k_p[0], k_p[1], k_p[2]],
            InitialWaveSpec::Singular { .. } => [0.0; 6],
        }
    }

    /// Exact draw from |ψ₀|²; sample i uses its own ChaCha stream.
    pub fn sample(&self, seed: u64, index: u64) -> PhasePoint {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let normal3 = |rng: &mut ChaCha8Rng| -> Vec3 {
            [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)]
        };
        match *self {
            InitialWaveSpec::Gaussian { r_bar, sigma_r, p_bar, sigma_p, .. } => {
                let a = normal3(&mut rng);
                let b = normal3(&mut rng);
                PhasePoint::new(
                    [r_bar[0] + sigma_r * a[0], r_bar[1] + sigma_r * a[1], r_bar[2] + sigma_r * a[2]],
                    [p_bar[0] + sigma_p * b[0], p_bar[1] + sigma_p * b[1], p_bar[2] + sigma_p * b[2]],
                )
            }
            InitialWaveSpec::Singular { sigma_r, sigma_p } => {
                // radial density ∝ r e^{−r²/σ²}, so r²/σ² is a unit exponential
                let e: f64 = rng.sample(Exp1);
                let rad = sigma_r * e.sqrt();
                let mut dir = normal3(&mut rng);
                let len = norm2(&dir).sqrt();
                dir = [dir[0] / len, dir[1] / len, dir[2] / len];
                let b = normal3(&mut rng);
                PhasePoint::new(
                    [rad * dir[0], rad * dir[1], rad * dir[2]],
                    [sigma_p * b[0], sigma_p * b[1], sigma_p * b[2]],
                )
            }
        }
    }

    /// Mean position of the λ_p marginal of the (r, λ_p) representation.
    /// The phase e^{i k_p·p} shifts it to k_p.
    pub fn lambda_mean(&self) -> Vec3 {
        match *self {
            InitialWaveSpec::Gaussian { k_p, .. } => k_p,
            InitialWaveSpec::Singular { .. } => [0.0; 3],
        }
    }

    /// Standard deviation per axis of the λ_p marginal, 1/(2σ_p).
    pub fn lambda_sigma(&self) -> f64 {
        match *self {
            InitialWaveSpec::Gaussian { sigma_p, .. } | InitialWaveSpec::Singular { sigma_p, .. } => 0.5 / sigma_p,
        }
    }

    /// |ψ|² marginal over r (integrates to 1 over ℝ³).
    pub fn position_density(&self, r: &Vec3) -> f64 {
        match *self {
            InitialWaveSpec::Gaussian { r_bar, sigma_r, .. } => {
                let d = [r[0] - r_bar[0], r[1] - r_bar[1], r[2] - r_bar[2]];
                (2.0 * PI * sigma_r * sigma_r).powf(-1.5) * (-norm2(&d) / (2.0 * sigma_r * sigma_r)).exp()
            }
            InitialWaveSpec::Singular { sigma_r, .. } => {
                let r2 = norm2(r);
                let c = Self::singular_c(sigma_r);
                c * c / r2.sqrt() * (-r2 / (sigma_r * sigma_r)).exp()
            }
        }
    }

    /// Largest deviation between the closed-form gradient and central
    /// differences at `probes` random points near the wave's support.
    pub fn gradient_self_test(&self, probes: usize, seed: u64) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..probes as u64 {
            let z = self.sample(seed, i);
            let g = self.gradient(&z);
            let amax = self.log_gradient(&z).iter().fold(0.0f64, |m, a| m.max(a.norm()));
            let scale = self.value(&z).norm().max(1e-300) * (1.0 + amax);
            for k in 0..6 {
                let step = if k < 3 { 1e-5 * z.radius().min(1.0) } else { 1e-6 };
                let mut a = z.to_array();
                let mut b = z.to_array();
                a[k] += step;
                b[k] -= step;
                let fd = (self.value(&PhasePoint::from_slice(&a)) - self.value(&PhasePoint::from_slice(&b))) / (2.0 * step);
                worst = worst.max((fd - g[k]).norm() / scale);
            }
        }
        worst
    }
}
