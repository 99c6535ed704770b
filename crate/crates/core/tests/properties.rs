use igdyn::dynamics::{
    integrate_geodesic, integrate_jlc, uniform_grid, ClosedFormGeodesicParams, FlowOptions, GeodesicState,
};
use igdyn::geometry::{self, Backend};
use igdyn::ige;
use igdyn::models::StatisticalModel;
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn geodesics_are_reversible(
        r in -0.8f64..0.8,
        mx in -2.0f64..2.0, sx in 0.5f64..2.0, my in -2.0f64..2.0, sy in 0.5f64..2.0,
        v in prop::array::uniform4(-0.5f64..0.5),
    ) {
        let m = StatisticalModel::correlated_gaussian(r).unwrap();
        let init = GeodesicState { tau: 0.0, theta: vec![mx, sx, my, sy], velocity: v.to_vec() };
        let opts = FlowOptions::default();
        let fwd = integrate_geodesic(&m, &init, 1.0, &opts).unwrap();
        let end = fwd.last();
        let back_init = GeodesicState {
            tau: 0.0,
            theta: end.theta.clone(),
            velocity: end.velocity.iter().map(|x| -x).collect(),
        };
        let back = integrate_geodesic(&m, &back_init, 1.0, &opts).unwrap();
        for (a, b) in back.last().theta.iter().zip(&init.theta) {
            prop_assert!((a - b).abs() < 1e-8);
        }
        prop_assert!(fwd.kinetic_drift < 1e-9);
    }

    #[test]
    fn jacobi_fields_are_linear_in_initial_data(c in 0.1f64..5.0, j in prop::array::uniform2(-1.0f64..1.0)) {
        let m = StatisticalModel::iho(vec![1.0, 0.5]).unwrap();
        let init = GeodesicState { tau: 0.0, theta: vec![0.2, -0.1], velocity: vec![1.0, 0.3] };
        let opts = FlowOptions::default().with_output_step(0.1);
        let traj = integrate_geodesic(&m, &init, 2.0, &opts).unwrap();
        let a = integrate_jlc(&m, &traj, &[0.0, 0.0], &j, &opts).unwrap();
        let scaled: Vec<f64> = j.iter().map(|x| c * x).collect();
        let b = integrate_jlc(&m, &traj, &[0.0, 0.0], &scaled, &opts).unwrap();
        for (x, y) in a.intensity.iter().zip(&b.intensity) {
            prop_assert!((c * x - y).abs() <= 1e-7 * y.abs().max(1e-3));
        }
    }

    #[test]
    fn riemann_symmetries_hold(
        r in -0.8f64..0.8,
        mx in -2.0f64..2.0, sx in 0.5f64..2.0, my in -2.0f64..2.0, sy in 0.5f64..2.0,
    ) {
        let m = StatisticalModel::correlated_gaussian(r).unwrap();
        let b = geometry::curvature_bundle(&m, &[mx, sx, my, sy], Backend::Analytic).unwrap();
        let rl = &b.riemann_lowered;
        let scale = rl.max_abs().max(1.0);
        for a in 0..4 { for bb in 0..4 { for c in 0..4 { for d in 0..4 {
            let v = rl.get(a, bb, c, d);
            prop_assert!((v + rl.get(bb, a, c, d)).abs() < 1e-9 * scale);
            prop_assert!((v + rl.get(a, bb, d, c)).abs() < 1e-9 * scale);
            prop_assert!((v - rl.get(c, d, a, bb)).abs() < 1e-9 * scale);
        }}}}
    }

    #[test]
    fn metrics_are_symmetric_positive_definite(
        n in 1usize..3,
        coords in prop::collection::vec((-3.0f64..3.0, 0.2f64..3.0), 6),
    ) {
        let m = StatisticalModel::gaussian_product(n).unwrap();
        let x: Vec<f64> = coords.iter().cycle().take(3 * n).flat_map(|(a, b)| [*a, *b]).collect();
        let g = m.metric_at(&m.point(&x).unwrap()).unwrap();
        prop_assert!(g.is_symmetric(0.0));
        prop_assert!(g.is_positive_definite());
    }

    #[test]
    fn constant_volume_average_is_constant(c in 1e-3f64..1e3, t in 1.0f64..5.0) {
        let ts = uniform_grid(0.0, t, 0.01);
        let avg = ige::average_volume(&ts, &vec![c; ts.len()]).unwrap();
        prop_assert!(avg.iter().all(|a| (a - c).abs() <= 1e-12 * c));
    }

    #[test]
    fn gaussian_entropy_slope_is_homogeneous(scale in 0.5f64..2.0) {
        // λ → cλ with Λ → cΛ leaves the geodesic shape in cτ unchanged
        let base = ClosedFormGeodesicParams::new(1.0, 1.0, 0.0).unwrap();
        let scaled = ClosedFormGeodesicParams::new(scale, scale, 0.0).unwrap();
        let a = ige::ige_gaussian(&base, 1, &uniform_grid(0.0, 10.0, 0.01), [5.0, 10.0]).unwrap();
        let tmax = 10.0 / scale;
        let b = ige::ige_gaussian(&scaled, 1, &uniform_grid(0.0, tmax, 0.01 / scale.max(1.0)), [5.0 / scale, tmax]).unwrap();
        prop_assert!((b.fitted_slope / a.fitted_slope / scale - 1.0).abs() < 0.01);
    }

    #[test]
    fn oscillator_entropy_slope_is_homogeneous(w1 in 0.3f64..1.0, w2 in 0.3f64..1.0, c in 1.2f64..2.0) {
        let lo = 10.0 / w1.min(w2);
        let a = ige::ige_iho_2set([w1, w2], [1.0, 1.0], &uniform_grid(0.0, 2.0 * lo, 0.01), [lo, 2.0 * lo]).unwrap();
        let b = ige::ige_iho_2set([c * w1, c * w2], [1.0, 1.0], &uniform_grid(0.0, 2.0 * lo / c, 0.01), [lo / c, 2.0 * lo / c]).unwrap();
        prop_assert!((b.fitted_slope / a.fitted_slope / c - 1.0).abs() < 0.01);
    }
}

#[test]
fn spectrum_sampling_is_seed_deterministic() {
    let a = ige::sample_frequency_spectrum(4, ige::LINEAR_SPECTRUM_CUTOFF, 42).unwrap();
    let b = ige::sample_frequency_spectrum(4, ige::LINEAR_SPECTRUM_CUTOFF, 42).unwrap();
    let c = ige::sample_frequency_spectrum(4, ige::LINEAR_SPECTRUM_CUTOFF, 43).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.iter().all(|w| (0.0..=ige::LINEAR_SPECTRUM_CUTOFF).contains(w)));
}
