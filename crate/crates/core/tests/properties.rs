mod common;

use common::*;
use lightning_stokes::basis::BasisConfig;
use lightning_stokes::cases::case_lid_driven_cavity;
use lightning_stokes::dense::RealMatrix;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn interior_point() -> impl Strategy<Value = lightning_stokes::Complex64> {
    (-0.8f64..0.8, -0.8f64..0.8).prop_map(|(x, y)| c(x, y))
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn arnoldi_blocks_are_orthonormal(which in 0usize..3, poles in 1usize..20, degree in 0usize..30, sigma in 2.0f64..5.0) {
        let dev = gram_deviation(&domain(which), poles, degree, sigma);
        prop_assert!(dev <= 1e-10, "deviation {dev:e}");
    }

    #[test]
    fn derivatives_match_finite_differences(z in interior_point()) {
        let err = derivative_error(cavity_solution(), z);
        prop_assert!(err <= 1e-6, "error {err:e} at {z}");
    }

    #[test]
    fn gauge_leaves_the_flow_unchanged(
        z in interior_point(),
        gamma in -2.0f64..2.0,
        cre in -2.0f64..2.0,
        cim in -2.0f64..2.0,
        alpha in -2.0f64..2.0,
    ) {
        let err = gauge_error(cavity_solution(), gamma, c(cre, cim), alpha, z);
        prop_assert!(err <= 1e-12, "error {err:e}");
    }

    #[test]
    fn velocity_is_divergence_free(z in interior_point()) {
        let div = divergence(cavity_solution(), z);
        prop_assert!(div <= 1e-5, "divergence {div:e} at {z}");
    }

    #[test]
    fn laplacian_of_stream_function_is_four_im_f_prime(z in interior_point()) {
        let err = laplacian_error(cavity_solution(), z);
        prop_assert!(err <= 1e-4, "error {err:e} at {z}");
    }

    #[test]
    fn least_squares_agrees_with_svd(
        (m, n, entries, rhs) in (1usize..30)
            .prop_flat_map(|n| (Just(n), n..n + 40))
            .prop_flat_map(|(n, m)| (
                Just(m),
                Just(n),
                proptest::collection::vec(-1.0f64..1.0, m * n),
                proptest::collection::vec(-1.0f64..1.0, m),
            ))
    ) {
        let a = RealMatrix::from_fn(m, n, |i, j| entries[i * n + j]);
        let err = svd_oracle_error(&a, &rhs);
        prop_assert!(err <= 1e-10, "error {err:e} for {m}x{n}");
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn negated_data_reverses_the_flow(poles in 2usize..14, degree in 2usize..14, pts in proptest::collection::vec(interior_point(), 4)) {
        let case = case_lid_driven_cavity().unwrap();
        let config = BasisConfig::new(vec![poles; 4], degree, case.domain.length_scale);
        let err = negation_error(&case.domain, &config, &case.solve_options(), &pts);
        prop_assert!(err <= 1e-12, "error {err:e}");
    }
}
