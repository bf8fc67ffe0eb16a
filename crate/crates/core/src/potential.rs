//! Smooth radial test potentials V(r) = f(|r|²) for the operator-identity checks.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SmoothPotential {
    /// −g / (2(r² + ε²)).
    InverseSquare { g: f64, epsilon: f64 },
    /// −depth · exp(−r² / 2 width²).
    GaussianWell { depth: f64, width: f64 },
    Zero,
}

impl SmoothPotential {
    /// (f, f′, f″) as functions of ρ = r².
    pub fn radial_derivatives(&self, rho: f64) -> (f64, f64, f64) {
        match *self {
            SmoothPotential::InverseSquare { g, epsilon } => {
                let s = rho + epsilon * epsilon;
                (-g / (2.0 * s), g / (2.0 * s * s), -g / (s * s * s))
            }
            SmoothPotential::GaussianWell { depth, width } => {
                let w2 = width * width;
                let e = (-rho / (2.0 * w2)).exp();
                (-depth * e, depth * e / (2.0 * w2), -depth * e / (4.0 * w2 * w2))
            }
            SmoothPotential::Zero => (0.0, 0.0, 0.0),
        }
    }

    pub fn value(&self, rho: f64) -> f64 {
        self.radial_derivatives(rho).0
    }

    /// r·∂_r V = 2ρ f′(ρ).
    pub fn radial_virial(&self, rho: f64) -> f64 {
        2.0 * rho * self.radial_derivatives(rho).1
    }

    /// (V′(x), V″(x)) of the one-dimensional restriction.
    pub fn derivatives_1d(&self, x: f64) -> (f64, f64) {
        let (_, f1, f2) = self.radial_derivatives(x * x);
        (2.0 * x * f1, 2.0 * f1 + 4.0 * x * x * f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        for v in [
            SmoothPotential::InverseSquare { g: 1.3, epsilon: 0.4 },
            SmoothPotential::GaussianWell { depth: 2.0, width: 0.7 },
        ] {
            for x in [-1.2, -0.3, 0.1, 0.8] {
                let h = 1e-4;
                let f = |x: f64| v.value(x * x);
                let d1 = (f(x + h / 10.0) - f(x - h / 10.0)) / (0.2 * h);
                let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
                let (a, b) = v.derivatives_1d(x);
                assert!((a - d1).abs() < 1e-7 * a.abs().max(1.0), "{a} {d1}");
                assert!((b - d2).abs() < 1e-5 * b.abs().max(1.0), "{b} {d2}");
                assert!((v.radial_virial(x * x) - x * a).abs() < 1e-12);
            }
        }
    }
}
