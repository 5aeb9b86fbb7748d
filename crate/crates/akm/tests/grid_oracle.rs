use akm::grid::{aligned_distance, discretize, field_moments, propagate_grid, GridError, GridSpec};
use akm::io::{read_field, write_field};
use akm_core::idx::{X1, X2};
use akm_core::phase_space::pointer_joint_density;
use akm_core::staged::exact_state;
use akm_core::symplectic::oracle_covariance;
use akm_core::{make_initial_state, MeasurementConfig};
use proptest::prelude::*;

fn unit() -> MeasurementConfig {
    MeasurementConfig::builder(1.0, 1.0).b(2.0).build().unwrap()
}

#[test]
fn fine_grid_reproduces_exact_state() {
    let c = unit();
    let g = GridSpec::new(128, 16.0).unwrap();
    let f = discretize(&make_initial_state(&c), &g).unwrap();
    assert!((f.norm_sq() - 1.0).abs() < 1e-8);
    let out = propagate_grid(&f, &c, 1.0).unwrap();
    assert!((out.norm_sq() - f.norm_sq()).abs() < 1e-12);
    let exact = discretize(&exact_state(&c).unwrap(), &g).unwrap();
    assert!(aligned_distance(&out, &exact) < 1e-8);
    let m = field_moments(&out);
    assert!(m.max_abs_diff(&oracle_covariance(&c)) < 1e-8);
}

#[test]
fn coarse_grid_error_decreases_with_resolution() {
    let c = unit();
    let exact = exact_state(&c).unwrap();
    let d = |n| {
        let g = GridSpec::new(n, 12.0).unwrap().with_boundary_tolerance(1e-8);
        let out = propagate_grid(&discretize(&make_initial_state(&c), &g).unwrap(), &c, 1.0).unwrap();
        aligned_distance(&out, &discretize(&exact, &g).unwrap())
    };
    let (d64, d128) = (d(64), d(128));
    assert!(d64 < 1e-4 && d128 < d64 / 5.0, "{d64:e} {d128:e}");
}

#[test]
fn default_tolerance_rejects_the_clipped_box() {
    let c = unit();
    let g = GridSpec::new(64, 12.0).unwrap();
    let f = discretize(&make_initial_state(&c), &g).unwrap();
    assert!(matches!(propagate_grid(&f, &c, 1.0), Err(GridError::SupportOverflow { .. })));
}

#[test]
fn pointer_marginal_matches_field_moments() {
    let c = unit();
    let g = GridSpec::new(64, 16.0).unwrap().with_boundary_tolerance(1e-8);
    let exact = exact_state(&c).unwrap();
    let m = field_moments(&discretize(&exact, &g).unwrap());
    let d = pointer_joint_density(&exact).unwrap();
    let diff = (d.cov() - m.pair_block(X1, X2)).abs().max();
    assert!(diff < 1e-6, "{diff:e}");
}

#[test]
fn field_dump_round_trip() {
    let c = unit();
    let g = GridSpec::new(32, 10.0).unwrap().with_boundary_tolerance(f64::INFINITY);
    let f = discretize(&make_initial_state(&c), &g).unwrap();
    let mut buf = Vec::new();
    write_field(&mut buf, &f).unwrap();
    let back = read_field(&buf[..]).unwrap();
    assert_eq!(back.values, f.values);
    assert_eq!(back.grid.n(), 32);
    assert!(read_field(&buf[..buf.len() - 1]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn propagation_is_unitary(kappa in 0.5f64..3.0, b in 1.0f64..3.0, t in 0.0f64..1.5) {
        let c = MeasurementConfig::builder(kappa, 1.0).b(b).build().unwrap();
        let g = GridSpec::new(32, 14.0).unwrap().with_boundary_tolerance(f64::INFINITY);
        let f = discretize(&make_initial_state(&c), &g).unwrap();
        let out = propagate_grid(&f, &c, t).unwrap();
        prop_assert!((out.norm_sq() - f.norm_sq()).abs() < 1e-12);
    }
}
