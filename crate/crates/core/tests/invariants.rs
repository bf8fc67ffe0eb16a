use kvnlab::classical::{
    action_scale_variation, analytic_moments, dilation_charge, integrate_trajectory, scale_transform, DiscretePath,
    PotentialTag,
};
use kvnlab::kvn::{angular_surface_integral, ensemble_charge_series, EnsembleOptions, InitialWaveSpec};
use kvnlab::model::{norm2, validate, PhasePoint, SystemParams};
use kvnlab::par::Exec;
use kvnlab::quantum::{quantum_anomaly_pairing, QuantumProfile};
use kvnlab::selfadjoint::{kvn_eigencheck, DTilde, Side};
use proptest::prelude::*;

fn vec3(m: f64) -> impl Strategy<Value = [f64; 3]> {
    [-m..m, -m..m, -m..m]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valid_params_pass_and_negative_coupling_fails(g in 0.0..5.0f64, eps in 0.0..1.0f64, a in 1e-6..1.0f64) {
        let p = SystemParams::new(g, 3, eps, a, a * 10.0);
        prop_assert_eq!(validate(p).unwrap(), p);
        let negative = SystemParams { g: -g - 1e-3, ..p };
        prop_assert!(validate(negative).is_err());
    }

    #[test]
    fn dilation_charge_is_scale_invariant(r in vec3(2.0), p in vec3(2.0), t in 0.0..5.0f64, alpha in -2.0..2.0f64) {
        prop_assume!(norm2(&r) > 1e-2);
        let params = SystemParams::bare(0.7);
        let z = PhasePoint::new(r, p);
        let (z2, t2) = scale_transform(&z, t, alpha);
        let d = dilation_charge(&z, t, &params).unwrap();
        let d2 = dilation_charge(&z2, t2, &params).unwrap();
        prop_assert!((d - d2).abs() <= 1e-12 * d.abs().max(1.0) * (1.0 + alpha.abs().exp()));
        let e = z.energy(&params).unwrap();
        prop_assert!((z2.energy(&params).unwrap() - alpha.exp() * e).abs() <= 1e-12 * e.abs().max(1.0) * alpha.exp());
    }

    #[test]
    fn inverse_square_action_is_invariant_on_any_path(
        c in vec3(1.0), v in vec3(1.0), w in 0.5..3.0f64, alpha in -0.5..0.5f64,
    ) {
        let path = DiscretePath::sample(0.1, 1.1, 64, |t| {
            [2.0 + c[0] + v[0] * t, c[1] + v[1] * (w * t).sin(), c[2] + v[2] * t * t]
        }).unwrap();
        let s = action_scale_variation(&path, alpha, PotentialTag::InverseSquare { g: 0.8 }).unwrap();
        prop_assert!(s.abs() < 1e-11, "{}", s);
    }

    #[test]
    fn angular_integral_vanishes_for_any_lambda(l in vec3(10.0)) {
        prop_assert!(angular_surface_integral(&l, 8, 16).unwrap().abs() < 1e-13);
    }

    #[test]
    fn quantum_pairing_is_linear_in_coupling(g in 0.1..3.0f64, sigma in 0.3..3.0f64) {
        let ladder = [4e-3, 2e-3];
        let prof = QuantumProfile::Singular { sigma };
        let a = quantum_anomaly_pairing(&prof, &SystemParams::bare(g), &ladder).unwrap();
        let b = quantum_anomaly_pairing(&prof, &SystemParams::bare(2.0 * g), &ladder).unwrap();
        for (x, y) in a.points.iter().zip(&b.points) {
            prop_assert!((2.0 * x.1 - y.1).abs() < 1e-9 * y.1.abs());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn orbits_follow_closed_form_moments(r in vec3(2.0), p in vec3(1.5)) {
        let params = SystemParams::bare(0.5);
        let z = PhasePoint::new(r, p);
        prop_assume!(z.angular_momentum_sq() > 0.6);
        let times: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
        let traj = integrate_trajectory(z, &params, &times, 1e-10).unwrap();
        prop_assert!(traj.capture_event.is_none());
        for ((t, zt), c) in traj.samples.iter().zip(&traj.charges) {
            let m = analytic_moments(&z, &params, *t).unwrap();
            prop_assert!((norm2(&zt.r) - m.r2).abs() < 1e-8);
            prop_assert!((c.dilation + 0.5 * z.r_dot_p()).abs() < 1e-8);
        }
    }

    #[test]
    fn deficiency_candidate_is_an_eigenfunction(r in vec3(2.0), p in vec3(2.0), g in 0.1..2.0f64) {
        let z = PhasePoint::new(r, p);
        let r2 = norm2(&r);
        prop_assume!(r2 > 1e-2);
        let h = 0.5 * norm2(&p) - 0.5 * g / r2;
        prop_assume!(h.abs() > 0.1 && h.abs() < 4.0);
        for side in [Side::Plus, Side::Minus] {
            let rep = kvn_eigencheck(&[z], g, side, DTilde::Gaussian, Exec::Sequential).unwrap();
            prop_assert!(rep.analytic <= 1e-10, "{:?}", rep);
        }
    }

    #[test]
    fn sequential_and_parallel_ensembles_agree(seed in 0u64..1_000) {
        let spec = InitialWaveSpec::gaussian([1.0, 0.0, 0.0], 0.05, [0.0, 1.0, 0.0], 0.05).with_phases([0.5, 0.0, 0.0], [0.0, 0.3, 0.0]);
        let p = SystemParams::bare(0.5);
        let run = |exec| {
            let o = EnsembleOptions { exec, ..EnsembleOptions::default() };
            ensemble_charge_series(&spec, &p, 1000, &[0.0, 1.0], seed, o).unwrap().series
        };
        prop_assert_eq!(run(Exec::Sequential), run(Exec::Parallel));
    }
}
