//! Cross-checks of the sparse eigensolver against a dense Jacobi oracle and
//! analytic Dirichlet spectra.

mod common;

use std::sync::Arc;

use membrane_core::discretization::{assemble, rayleigh_quotient, Field};
use membrane_core::eigensolver::{second_eigenvalue, smallest_eigenpair};
use membrane_core::geometry::{rasterize, DomainSpec, GridDomain};
use membrane_core::rng::CounterRng;

fn square(h: f64) -> Arc<GridDomain> {
    Arc::new(
        rasterize(
            &DomainSpec::Rectangle {
                width: 1.0,
                height: 1.0,
            },
            h,
        )
        .unwrap(),
    )
}

#[test]
fn dense_oracle_cross_check_on_coarse_square() {
    let d = square(1.0 / 8.0);
    assert_eq!(d.n_cells(), 64);
    for (d_cells, alpha) in [
        (vec![], 0.0),
        (vec![0usize, 1, 2, 3, 8, 9, 10, 11], 12.5),
        ((0..32).collect::<Vec<usize>>(), 50.0),
    ] {
        let op = assemble(&d, &d_cells, alpha).unwrap();
        let ours = smallest_eigenpair(&op, &d, 1e-10, 500).unwrap();
        let dense = common::dense_grid_operator(8, 8, 1.0 / 8.0, &d_cells, alpha);
        let spectrum = common::jacobi_eigenvalues(dense);
        assert!(
            (ours.lambda - spectrum[0]).abs() < 1e-8,
            "lambda {} vs oracle {} (alpha = {alpha})",
            ours.lambda,
            spectrum[0]
        );
        let second = second_eigenvalue(&op, &ours, 1e-8, 500).unwrap();
        assert!(
            (second - spectrum[1]).abs() < 1e-6,
            "lambda2 {} vs oracle {}",
            second,
            spectrum[1]
        );
    }
}

#[test]
fn eigenvalue_is_monotone_in_alpha() {
    let d = square(1.0 / 8.0);
    let d_cells: Vec<usize> = (0..64).filter(|i| i % 3 == 0).collect();
    let mut previous = f64::NEG_INFINITY;
    for alpha in [0.0, 0.5, 2.0, 10.0, 80.0] {
        let op = assemble(&d, &d_cells, alpha).unwrap();
        let ours = smallest_eigenpair(&op, &d, 1e-10, 500).unwrap();
        let oracle = common::dense_min_eigenvalue(8, 8, 1.0 / 8.0, &d_cells, alpha);
        assert!((ours.lambda - oracle).abs() < 1e-8);
        assert!(
            ours.lambda >= previous - 1e-10,
            "monotonicity broken at alpha = {alpha}"
        );
        previous = ours.lambda;
    }
}

#[test]
fn rayleigh_quotient_dominates_smallest_eigenvalue() {
    let d = square(1.0 / 8.0);
    let op = assemble(&d, &[5, 17, 40], 7.0).unwrap();
    let eig = smallest_eigenpair(&op, &d, 1e-10, 500).unwrap();
    let mut rng = CounterRng::new(2024, 0);
    for _ in 0..100 {
        let values: Vec<f64> = (0..d.n_cells())
            .map(|_| rng.next_u64() as f64 / u64::MAX as f64 - 0.3)
            .collect();
        let f = Field::new(d.clone(), values).unwrap();
        let r = rayleigh_quotient(&op, &f).unwrap();
        assert!(r >= eig.lambda - 1e-10, "R = {r} < lambda = {}", eig.lambda);
    }
}

#[test]
fn square_base_eigenvalue_converges_first_order() {
    // The dropped-coupling Dirichlet stencil puts the effective wall h/2
    // outside the boundary, so mu1 approaches 2pi^2 at first order.
    let exact = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
    let mut errors = Vec::new();
    for h in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0] {
        let d = square(h);
        let op = assemble(&d, &[], 0.0).unwrap();
        let eig = smallest_eigenpair(&op, &d, 1e-9, 500).unwrap();
        errors.push((exact - eig.lambda).abs() / exact);
    }
    assert!(errors[2] < 0.02, "error at h=1/128 is {}", errors[2]);
    // halving h roughly halves the error
    assert!(errors[1] / errors[0] < 0.7);
    assert!(errors[2] / errors[1] < 0.7);
}

#[test]
fn disk_base_eigenvalue_near_bessel_zero() {
    let d = Arc::new(rasterize(&DomainSpec::Disk { radius: 1.0 }, 1.0 / 64.0).unwrap());
    let op = assemble(&d, &[], 0.0).unwrap();
    let eig = smallest_eigenpair(&op, &d, 1e-9, 500).unwrap();
    let exact = 5.7832; // square of the first Bessel zero
    let rel = (eig.lambda - exact).abs() / exact;
    assert!(rel < 0.02, "relative error {rel}");
}

#[test]
fn square_spectral_ratio_matches_analytic() {
    let d = square(1.0 / 64.0);
    let op = assemble(&d, &[], 0.0).unwrap();
    let first = smallest_eigenpair(&op, &d, 1e-9, 500).unwrap();
    let second = second_eigenvalue(&op, &first, 1e-7, 500).unwrap();
    let ratio = second / first.lambda;
    assert!(
        (ratio - 2.5).abs() / 2.5 < 0.02,
        "lambda2/lambda1 = {ratio}"
    );
    assert!(second > first.lambda);
}
