//! Property-based invariants of frames, graphs and integrals.

use kgeom::ambient::{ambient_from_key, BaseManifold, Matrix, Vector, AMBIENT_KEYS};
use kgeom::graphs::{closed_form_jet, radial_ode_rhs, theorem_harness};
use kgeom::identities::surface_grid;
use kgeom::integral::product_integral;
use kgeom::shape::{graph_curvature, graph_theta};
use kgeom::zoo::{rotated, slice_graph, sphere_function, sphere_function_graph};
use proptest::prelude::*;

fn rotation(a: f64, b: f64, c: f64) -> Matrix {
    let r = nalgebra::Rotation3::from_euler_angles(a, b, c);
    Matrix::from_fn(3, 3, |i, j| r[(i, j)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn graph_frames_are_consistent(
        a in 0.01f64..0.5, eps in prop_oneof![Just(1.0), Just(-1.0)],
        th in 0.2f64..2.9, ph in 0.0f64..6.0, e in (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0)
    ) {
        let g = sphere_function_graph(BaseManifold::sphere(), eps, rotated(sphere_function(a), rotation(e.0, e.1, e.2)));
        let s = [th, ph];
        let f = g.frame_at(&s).unwrap();
        let amb = g.to_param_surface().ambient;
        let n = Vector::from_column_slice(&f.normal);
        prop_assert!((amb.inner(&f.ambient_point, &n, &n) - eps).abs() < 1e-12);
        for t in &f.tangent {
            prop_assert!(amb.inner(&f.ambient_point, &n, t).abs() < 1e-12);
        }
        prop_assert!((f.theta.unwrap() - graph_theta(&g, &s).unwrap()).abs() < 1e-12);
        prop_assert!((f.gaussian_curvature.unwrap() - graph_curvature(&g, &s).unwrap()).abs() < 1e-10);
        prop_assert!(f.theta.unwrap() < 0.0);
    }

    #[test]
    fn product_integral_vanishes_for_random_graphs(
        a in 0.01f64..0.5, eps in prop_oneof![Just(1.0), Just(-1.0)], e in (-3.0f64..3.0, -3.0f64..3.0)
    ) {
        let g = sphere_function_graph(BaseManifold::sphere(), eps, rotated(sphere_function(a), rotation(e.0, e.1, 0.3)));
        let s = g.to_param_surface();
        let r = product_integral(&s, &surface_grid(&s, 32).unwrap()).unwrap();
        prop_assert!(r.relative_residual < 1e-10, "{:?}", r);
    }

    #[test]
    fn harness_never_reports_a_counterexample(a in 0.001f64..0.5, e in (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0)) {
        let grid = surface_grid(&slice_graph(BaseManifold::sphere(), 1.0, 0.0).to_param_surface(), 16).unwrap();
        for eps in [1.0, -1.0] {
            let g = sphere_function_graph(BaseManifold::sphere(), eps, rotated(sphere_function(a), rotation(e.0, e.1, e.2)));
            let r = theorem_harness(&g, &grid).unwrap();
            prop_assert!(r.passed, "{:?}", r);
        }
    }

    #[test]
    fn slices_are_totally_geodesic(t0 in -20.0f64..20.0, th in 0.1f64..3.0, ph in 0.0f64..6.0) {
        for eps in [1.0, -1.0] {
            let f = slice_graph(BaseManifold::sphere(), eps, t0).frame_at(&[th, ph]).unwrap();
            prop_assert!((f.theta.unwrap().powi(2) - 1.0).abs() < 1e-15);
            prop_assert!(f.shape_norm_sq() == 0.0);
            prop_assert!((f.gaussian_curvature.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_rhs_reproduces_closed_form(k in -8.0f64..-1.01, x in 1.001f64..30.0) {
        let (_, fp, fpp) = closed_form_jet(-1.0, k, x).unwrap();
        prop_assert!((radial_ode_rhs(-1.0, k, x, fp).unwrap() - fpp).abs() <= 1e-9 * (1.0 + fpp.abs()));
    }

    #[test]
    fn ambient_metrics_are_symmetric(seed in 0u64..1000) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for key in AMBIENT_KEYS {
            let a = ambient_from_key(key).unwrap();
            let p = a.sample_point(&mut rng);
            let g = a.metric_at(&p);
            prop_assert!((&g - g.transpose()).amax() == 0.0);
            prop_assert!(a.christoffel_at(&p).asymmetry() < 1e-12);
        }
    }
}
