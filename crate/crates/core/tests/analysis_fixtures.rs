//! End-to-end analysis checks on small solver runs and synthetic fields.

use std::sync::Arc;

use membrane_core::analysis::{
    base_eigenpair, check_nesting, check_perturbation_bounds, estimate_exceptional_set,
    extract_free_boundary, reflection_score, symmetry_metrics, two_sided_fraction, Axis,
};
use membrane_core::geometry::{rasterize, DomainSpec, GridDomain};
use membrane_core::optimizer::{
    boundary_layer_init, multistart, optimize, MultistartOptions, SolveOptions,
};

fn disk(h: f64) -> Arc<GridDomain> {
    Arc::new(rasterize(&DomainSpec::Disk { radius: 1.0 }, h).unwrap())
}

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
fn perturbation_shrinks_with_alpha_on_the_ball() {
    let d = disk(1.0 / 16.0);
    let a_target = 0.5 * d.measure(None).unwrap();
    let opts = SolveOptions::default();
    let base = base_eigenpair(&d, &opts).unwrap();
    let init = boundary_layer_init(&d, a_target).unwrap();
    let mut shifts = Vec::new();
    let mut sups = Vec::new();
    for alpha in [1e-1, 1e-2, 1e-3] {
        let run = optimize(&d, alpha, a_target, &init, &opts).unwrap();
        let report = check_perturbation_bounds(&run, &base).unwrap();
        assert!(report.holds(1e-9), "bounds fail at alpha={alpha}: {report:?}");
        shifts.push(report.lambda_shift);
        sups.push(report.sup_diff);
        // the inclusions hold cellwise at every alpha
        check_nesting(&run, &base).unwrap();
    }
    // both decrease monotonically as alpha -> 0
    assert!(shifts[0] > shifts[1] && shifts[1] > shifts[2], "{shifts:?}");
    assert!(sups[0] > sups[1] && sups[1] > sups[2], "{sups:?}");
}

#[test]
fn near_full_coverage_reports_delta_to_max() {
    let d = square(1.0 / 16.0);
    let a_target = 0.95 * d.measure(None).unwrap();
    let opts = SolveOptions::default();
    let init = boundary_layer_init(&d, a_target).unwrap();
    let run = optimize(&d, 1.0, a_target, &init, &opts).unwrap();
    let base = base_eigenpair(&d, &opts).unwrap();
    let nesting = check_nesting(&run, &base).unwrap();
    let delta = nesting.delta_to_max.expect("A/|Omega| > 0.9 reports delta");
    assert!(delta > 0.0 && delta < base.max_psi, "delta = {delta}");
}

#[test]
fn square_run_is_reflection_symmetric_and_argmin_invariant() {
    let d = square(1.0 / 32.0);
    let a_target = 0.5 * d.measure(None).unwrap();
    let opts = SolveOptions::default();
    let init = boundary_layer_init(&d, a_target).unwrap();
    let sym_run = optimize(&d, 1.0, a_target, &init, &opts).unwrap();
    assert!(sym_run.converged);
    let center = (0.5, 0.5);
    assert_eq!(
        reflection_score(sym_run.config.cells(), &d, center, Axis::Vertical),
        0.0
    );
    assert_eq!(
        reflection_score(sym_run.config.cells(), &d, center, Axis::Horizontal),
        0.0
    );
    // random starts reach the same minimum value
    let ms = multistart(
        &d,
        1.0,
        a_target,
        &MultistartOptions {
            restarts: 6,
            seed: 3,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(
        (ms.lambda - sym_run.lambda).abs() <= 1e-8,
        "{} vs {}",
        ms.lambda,
        sym_run.lambda
    );
}

#[test]
fn ball_multistart_winner_stays_annular() {
    // The staircase makes slightly asymmetric discrete configurations beat
    // the radially-initialized fixed point by O(h^2)-level margins
    // (8.7e-4 at h=1/16 down to 1.1e-6 at h=1/64), so the winner is compared
    // structurally: never worse than the radial run, and still an annulus.
    let d = disk(1.0 / 16.0);
    let a_target = 0.5 * d.measure(None).unwrap();
    let opts = MultistartOptions {
        restarts: 6,
        seed: 11,
        ..Default::default()
    };
    let ms = multistart(&d, 10.0, a_target, &opts).unwrap();
    let init = boundary_layer_init(&d, a_target).unwrap();
    let radial_run = optimize(&d, 10.0, a_target, &init, &opts.solve).unwrap();
    assert!(ms.lambda <= radial_run.lambda + 1e-10);
    let report =
        membrane_core::analysis::annularity_check(&ms.config, &d, (0.0, 0.0), 64).unwrap();
    assert!(report.variation <= 2.0 * d.h(), "variation {}", report.variation);
    assert!(report.boundary_layer_in_d);
}

#[test]
fn ball_free_boundary_is_one_smooth_circle() {
    let d = disk(1.0 / 32.0);
    let h = d.h();
    let a_target = 0.5 * d.measure(None).unwrap();
    let opts = SolveOptions::default();
    let init = boundary_layer_init(&d, a_target).unwrap();
    let run = optimize(&d, 10.0, a_target, &init, &opts).unwrap();
    assert!(run.converged);
    let fb = extract_free_boundary(&run, 0.05).unwrap();
    assert_eq!(fb.segments.len(), 1, "expected one closed contour");
    assert!(fb.segments[0].closed);
    assert_eq!(fb.flagged_count(), 0);
    assert!((two_sided_fraction(&fb, &run.u, 2.0 * h) - 1.0).abs() < 1e-12);
    let est = estimate_exceptional_set(&fb, &d, &[8.0 * h, 4.0 * h, 2.0 * h]).unwrap();
    assert!(est.nesting_ok);
    assert!(est.e_proxy.is_empty());
    // the annular complement keeps every low angular mode far below the mean
    let sym = symmetry_metrics(&run.config, &d, (0.0, 0.0), &[Axis::Vertical]).unwrap();
    for mode in 1..=8 {
        assert!(
            sym.fourier_amps[mode] < 0.02 * sym.fourier_amps[0],
            "mode {mode} amplitude {}",
            sym.fourier_amps[mode]
        );
    }
}

#[test]
fn square_complement_is_convex_at_small_alpha() {
    let d = square(1.0 / 32.0);
    let a_target = 0.5 * d.measure(None).unwrap();
    let opts = SolveOptions::default();
    let init = boundary_layer_init(&d, a_target).unwrap();
    let run = optimize(&d, 1.0, a_target, &init, &opts).unwrap();
    let report = membrane_core::analysis::convexity_check(&run.config, &d).unwrap();
    assert_eq!(report.violations, 0, "{report:?}");
    assert!(report.convex && !report.trivially_convex);
}
