//! Run orchestration for the solve / verify / sweep / alphabar subcommands.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use membrane_core::analysis::{
    annularity_check, base_eigenpair, check_nesting, check_perturbation_bounds, convexity_check,
    estimate_exceptional_set, extract_free_boundary, level_set_duplicate_fraction,
    lobe_containment, symmetry_metrics, two_sided_fraction, Axis, BaseEigenpair,
};
use membrane_core::discretization::assemble;
use membrane_core::eigensolver::smallest_eigenpair;
use membrane_core::error::Error as CoreError;
use membrane_core::geometry::{rasterize, DomainSpec, GridDomain};
use membrane_core::optimizer::{
    find_alpha_bar, multistart, select_sublevel, Configuration, OptimizationResult,
};

use crate::artifacts::{
    fmt_f64, free_boundary_csv_string, mask_pgm_string, parse_mask_pgm, parse_u_csv,
    u_csv_string, write_atomic,
};
use crate::config::{Check, RunConfig};
use crate::report::Report;
use crate::{from_core, CliError, CliResult};

/// Relative gradient threshold for free-boundary flagging.
const EPS_GRAD: f64 = 0.05;
/// Roundoff slack for monotone-descent histories.
const DESCENT_SLACK: f64 = 1e-10;
/// Slack for the exact discrete eigenvalue inequalities.
const BOUND_SLACK: f64 = 1e-9;
/// Angular sectors for the annularity profile.
const ANNULAR_SECTORS: usize = 64;

pub struct SolveOutcome {
    pub report_path: PathBuf,
    pub lambda: f64,
    pub converged: bool,
}

fn io_err(what: &str, e: std::io::Error) -> CliError {
    CliError::Config(format!("{what}: {e}"))
}

/// Geometric center used for angular metrics.
fn spec_center(spec: &DomainSpec, domain: &GridDomain) -> (f64, f64) {
    match spec {
        DomainSpec::Rectangle { width, height } => (width / 2.0, height / 2.0),
        DomainSpec::Disk { .. } | DomainSpec::Annulus { .. } | DomainSpec::Dumbbell { .. } => {
            (0.0, 0.0)
        }
        DomainSpec::Polygon { .. } | DomainSpec::MaskFile { .. } => {
            let (ox, oy) = domain.origin();
            (
                ox + domain.nx() as f64 * domain.h() / 2.0,
                oy + domain.ny() as f64 * domain.h() / 2.0,
            )
        }
    }
}

fn echo_config(report: &mut Report, config: &RunConfig) {
    report.push("format", "membrane-report-v1");
    match &config.domain {
        DomainSpec::Rectangle { width, height } => {
            report.push("domain.type", "rectangle");
            report.push_f64("domain.width", *width);
            report.push_f64("domain.height", *height);
        }
        DomainSpec::Disk { radius } => {
            report.push("domain.type", "disk");
            report.push_f64("domain.radius", *radius);
        }
        DomainSpec::Annulus { inner } => {
            report.push("domain.type", "annulus");
            report.push_f64("domain.inner", *inner);
        }
        DomainSpec::Dumbbell { handle_half_width } => {
            report.push("domain.type", "dumbbell");
            report.push_f64("domain.handle", *handle_half_width);
        }
        DomainSpec::Polygon { vertices } => {
            report.push("domain.type", "polygon");
            report.push_usize("domain.n_vertices", vertices.len());
        }
        DomainSpec::MaskFile { path } => {
            report.push("domain.type", "mask_file");
            report.push("domain.mask", path.display().to_string());
        }
    }
    report.push_f64("grid.h", config.h);
    report.push_f64("run.alpha", config.alpha);
    report.push_f64("run.fraction", config.area_fraction);
    report.push("run.seed", config.seed.to_string());
    report.push_usize("optimizer.restarts", config.restarts);
    report.push_usize("optimizer.max_outer", config.max_outer);
    report.push_f64("tol.eigen", config.eigen_tol);
    let names: Vec<&str> = config.checks.iter().map(Check::name).collect();
    report.push("checks", names.join(","));
}

fn validate_checks(config: &RunConfig, domain: &GridDomain) -> CliResult<()> {
    if config.checks.contains(&Check::Lobes) && !domain.has_labels() {
        return Err(CliError::Config(
            "the lobes check requires a dumbbell domain".to_string(),
        ));
    }
    Ok(())
}

/// Executes the requested checks, appending report lines and collecting the
/// names of failed hard checks.
fn run_checks(
    config: &RunConfig,
    domain: &Arc<GridDomain>,
    run: &OptimizationResult,
    base: &BaseEigenpair,
    report: &mut Report,
) -> CliResult<Vec<String>> {
    let mut failures = Vec::new();
    let center = spec_center(&config.domain, domain);
    let h = domain.h();

    // always-on: monotone descent of the eigenvalue history
    let descent_ok = run
        .history
        .windows(2)
        .all(|w| w[1] <= w[0] + DESCENT_SLACK);
    report.push("check.descent", if descent_ok { "pass" } else { "fail" });
    if !descent_ok {
        failures.push("descent".to_string());
    }

    for check in &config.checks {
        match check {
            Check::Bounds => {
                let b = check_perturbation_bounds(run, base).map_err(from_core)?;
                let ok = b.holds(BOUND_SLACK);
                report.push("check.bounds", if ok { "pass" } else { "fail" });
                report.push_f64("check.bounds.lambda_shift", b.lambda_shift);
                report.push_f64("check.bounds.lower_gap", b.lower_gap);
                report.push_f64("check.bounds.complement_mass", b.complement_mass);
                report.push_f64("check.bounds.sup_diff", b.sup_diff);
                if let Some(v) = b.sup_diff_over_alpha {
                    report.push_f64("check.bounds.sup_diff_over_alpha", v);
                }
                if let Some(v) = b.sup_diff_over_deficit {
                    report.push_f64("check.bounds.sup_diff_over_deficit", v);
                }
                if let Some(v) = b.gap_ratio {
                    report.push_f64("check.bounds.gap_ratio", v);
                }
                if !ok {
                    failures.push("bounds".to_string());
                }
            }
            Check::Nesting => match check_nesting(run, base) {
                Ok(n) => {
                    report.push("check.nesting", "pass");
                    report.push_f64("check.nesting.eps", n.eps);
                    if let Some(delta) = n.delta_to_max {
                        report.push_f64("check.nesting.delta_to_max", delta);
                    }
                }
                Err(CoreError::NestingViolation { lower, upper }) => {
                    report.push("check.nesting", "fail");
                    report.push_usize("check.nesting.lower_violations", lower);
                    report.push_usize("check.nesting.upper_violations", upper);
                    failures.push("nesting".to_string());
                }
                Err(e) => return Err(from_core(e)),
            },
            Check::Symmetry => {
                let s = symmetry_metrics(
                    &run.config,
                    domain,
                    center,
                    &[Axis::Vertical, Axis::Horizontal],
                )
                .map_err(from_core)?;
                report.push("check.symmetry", "diagnostic");
                report.push_usize("check.symmetry.dominant_n", s.dominant_n);
                report.push_f64("check.symmetry.beta_estimate", s.beta_estimate);
                report.push_f64("check.symmetry.amp_mode0", s.fourier_amps[0]);
                report.push_f64(
                    "check.symmetry.amp_dominant",
                    s.fourier_amps[s.dominant_n],
                );
                report.push_f64(
                    "check.symmetry.amp_median_rest",
                    median_other_amplitude(&s.fourier_amps, s.dominant_n),
                );
                report.push_f64("check.symmetry.reflection_vertical", s.reflection_scores[0]);
                report.push_f64(
                    "check.symmetry.reflection_horizontal",
                    s.reflection_scores[1],
                );
            }
            Check::Convexity => {
                let c = convexity_check(&run.config, domain).map_err(from_core)?;
                report.push("check.convexity", if c.convex { "pass" } else { "fail" });
                report.push_usize("check.convexity.violations", c.violations);
                report.push_usize("check.convexity.hull_vertices", c.hull_vertices);
                report.push_bool("check.convexity.trivial", c.trivially_convex);
                if !c.convex {
                    failures.push("convexity".to_string());
                }
            }
            Check::Lobes => {
                let l = lobe_containment(&run.config, domain).map_err(from_core)?;
                report.push("check.lobes", if l.contained { "pass" } else { "fail" });
                report.push_usize("check.lobes.left_disk", l.disk_counts[0]);
                report.push_usize("check.lobes.right_disk", l.disk_counts[1]);
                report.push_usize("check.lobes.bridge", l.bridge_cells);
                report.push_usize("check.lobes.ring", l.ring_cells);
                report.push_usize("check.lobes.opposite", l.opposite_lobe_cells);
                report.push_usize("check.lobes.handle_labelled", l.label_counts[2]);
                report.push_f64("check.lobes.reflection_x2", l.reflection_score_x2);
                if !l.contained {
                    failures.push("lobes".to_string());
                }
            }
            Check::FreeBoundary => {
                let fb = extract_free_boundary(run, EPS_GRAD).map_err(from_core)?;
                if fb.is_empty() {
                    report.push("check.free_boundary", "pass");
                    report.push_bool("check.free_boundary.empty", true);
                } else {
                    let two_sided = two_sided_fraction(&fb, &run.u, 2.0 * h);
                    let ok = two_sided == 1.0;
                    report.push("check.free_boundary", if ok { "pass" } else { "fail" });
                    report.push_bool("check.free_boundary.empty", false);
                    report.push_usize("check.free_boundary.segments", fb.segments.len());
                    report.push_usize("check.free_boundary.vertices", fb.vertex_count());
                    report.push_usize(
                        "check.free_boundary.closed",
                        fb.segments.iter().filter(|p| p.closed).count(),
                    );
                    report.push_usize("check.free_boundary.flagged", fb.flagged_count());
                    report.push_f64("check.free_boundary.two_sided_fraction", two_sided);
                    if !ok {
                        failures.push("free_boundary".to_string());
                    }
                }
            }
            Check::Exceptional => {
                let fb = extract_free_boundary(run, EPS_GRAD).map_err(from_core)?;
                if fb.is_empty() {
                    report.push("check.exceptional", "diagnostic");
                    report.push_bool("check.exceptional.empty_boundary", true);
                } else {
                    let levels = [8.0 * h, 4.0 * h, 2.0 * h];
                    let est =
                        estimate_exceptional_set(&fb, domain, &levels).map_err(from_core)?;
                    let ok = est.nesting_ok;
                    report.push("check.exceptional", if ok { "pass" } else { "fail" });
                    for (eps, members) in est.eps_levels.iter().zip(&est.f_eps) {
                        report.push_usize(
                            &format!("check.exceptional.f_eps_{:.0}h", eps / h),
                            members.len(),
                        );
                    }
                    report.push_usize("check.exceptional.e_proxy", est.e_proxy.len());
                    if !ok {
                        failures.push("exceptional".to_string());
                    }
                }
            }
            Check::Annular => {
                let a = annularity_check(&run.config, domain, center, ANNULAR_SECTORS)
                    .map_err(from_core)?;
                let ok =
                    a.variation <= 2.0 * h && a.boundary_layer_in_d && a.empty_sectors == 0;
                report.push("check.annular", if ok { "pass" } else { "fail" });
                report.push_f64("check.annular.variation", a.variation);
                report.push_usize("check.annular.empty_sectors", a.empty_sectors);
                report.push_bool("check.annular.boundary_layer_in_d", a.boundary_layer_in_d);
                if !ok {
                    failures.push("annular".to_string());
                }
            }
            Check::BoundaryLayer => {
                let layer = domain.boundary_layer_cells();
                let layer_measure = layer.len() as f64 * h * h;
                let mask = run.config.mask(domain.n_cells());
                let inside = layer.iter().filter(|&&i| mask[i]).count();
                let applicable = run.config.measure() >= layer_measure;
                let ok = !applicable || inside == layer.len();
                report.push(
                    "check.boundary_layer",
                    if !applicable {
                        "diagnostic"
                    } else if ok {
                        "pass"
                    } else {
                        "fail"
                    },
                );
                report.push_usize("check.boundary_layer.layer_cells", layer.len());
                report.push_f64("check.boundary_layer.layer_measure", layer_measure);
                report.push_usize("check.boundary_layer.cells_in_d", inside);
                if applicable && !ok {
                    failures.push("boundary_layer".to_string());
                }
            }
        }
    }
    Ok(failures)
}

fn median_other_amplitude(amps: &[f64], dominant: usize) -> f64 {
    let mut rest: Vec<f64> = (1..amps.len())
        .filter(|&m| m != dominant)
        .map(|m| amps[m])
        .collect();
    rest.sort_by(f64::total_cmp);
    rest[rest.len() / 2]
}

fn push_run_scalars(
    report: &mut Report,
    domain: &GridDomain,
    run: &OptimizationResult,
    base: &BaseEigenpair,
    a_target: f64,
) {
    report.push_usize("n_cells", domain.n_cells());
    report.push_f64("domain_measure", domain.n_cells() as f64 * domain.h() * domain.h());
    report.push_f64("target_measure", a_target);
    report.push_f64("lambda", run.lambda);
    report.push_f64("mu1", base.mu1);
    report.push_f64("mu2", base.mu2);
    report.push_f64("spectral_gap", base.gap);
    if let Some(t) = run.config.threshold() {
        report.push_f64("threshold", t);
    }
    report.push_usize("k", run.config.k());
    report.push_f64("realized_measure", run.config.measure());
    report.push_usize("restart_id", run.restart_id);
    report.push_bool("converged", run.converged);
    report.push_usize("outer_iterations", run.history.len());
    report.push_f64("eigen_residual", run.residual);
    if let Some(t) = run.config.threshold() {
        report.push_f64(
            "duplicate_fraction",
            level_set_duplicate_fraction(run.u.values(), t),
        );
    }
    let history: Vec<String> = run.history.iter().map(|&v| fmt_f64(v)).collect();
    report.push("history", history.join(" "));
}

/// Full solve pipeline: rasterize, multistart, checks, artifacts, report.
pub fn run_solve(config: &RunConfig, threads: usize) -> CliResult<SolveOutcome> {
    let t0 = Instant::now();
    let domain = Arc::new(rasterize(&config.domain, config.h).map_err(from_core)?);
    validate_checks(config, &domain)?;
    let total = domain.measure(None).map_err(from_core)?;
    let a_target = config.area_fraction * total;
    let opts = config.multistart_options(threads);
    let run = multistart(&domain, config.alpha, a_target, &opts).map_err(from_core)?;
    let base = base_eigenpair(&domain, &opts.solve).map_err(from_core)?;

    let mut report = Report::new();
    echo_config(&mut report, config);
    push_run_scalars(&mut report, &domain, &run, &base, a_target);

    let mut failures = run_checks(config, &domain, &run, &base, &mut report)?;

    // fixed-point certificate: re-solve with the final D and re-threshold
    if run.converged {
        let op = assemble(&domain, run.config.cells(), config.alpha).map_err(from_core)?;
        let eig = smallest_eigenpair(&op, &domain, config.eigen_tol, config.eigen_max_iter)
            .map_err(from_core)?;
        let re = select_sublevel(&eig.u, a_target, &domain).map_err(from_core)?;
        let cert = re.cells() == run.config.cells();
        report.push("check.certificate", if cert { "pass" } else { "fail" });
        if !cert {
            failures.push("certificate".to_string());
        }
    }

    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| io_err("cannot create output dir", e))?;
    let mask_path = config.output_dir.join("mask.pgm");
    let u_path = config.output_dir.join("u.csv");
    let fb_path = config.output_dir.join("free_boundary.csv");
    let report_path = config.output_dir.join("report.txt");
    write_atomic(&mask_path, &mask_pgm_string(&run.config, &domain))
        .map_err(|e| io_err("cannot write mask", e))?;
    write_atomic(&u_path, &u_csv_string(&run.u)).map_err(|e| io_err("cannot write u field", e))?;
    let fb = extract_free_boundary(&run, EPS_GRAD).map_err(from_core)?;
    write_atomic(&fb_path, &free_boundary_csv_string(&fb))
        .map_err(|e| io_err("cannot write free boundary", e))?;

    report.push("files", "mask.pgm u.csv free_boundary.csv");
    report.push("wall_time_s", format!("{:.3}", t0.elapsed().as_secs_f64()));
    write_atomic(&report_path, &report.render())
        .map_err(|e| io_err("cannot write report", e))?;

    if !run.converged {
        return Err(CliError::Convergence(format!(
            "no fixed point within {} outer sweeps (last lambdas: {:?})",
            config.max_outer,
            &run.history[run.history.len().saturating_sub(2)..]
        )));
    }
    if !failures.is_empty() {
        return Err(CliError::Invariant(format!(
            "failed checks: {}",
            failures.join(", ")
        )));
    }
    Ok(SolveOutcome {
        report_path,
        lambda: run.lambda,
        converged: run.converged,
    })
}

/// Re-runs the checks against stored artifacts (mask.pgm + u.csv) without
/// solving; the eigenvalue is recomputed as a Rayleigh quotient.
pub fn run_verify(config: &RunConfig) -> CliResult<()> {
    let domain = Arc::new(rasterize(&config.domain, config.h).map_err(from_core)?);
    validate_checks(config, &domain)?;
    let mask_text = std::fs::read_to_string(config.output_dir.join("mask.pgm"))
        .map_err(|e| io_err("cannot read mask.pgm", e))?;
    let mask = parse_mask_pgm(&mask_text).map_err(CliError::Config)?;
    if mask.nx != domain.nx() || mask.ny != domain.ny() {
        return Err(CliError::Config(format!(
            "mask is {}x{}, domain is {}x{}",
            mask.nx,
            mask.ny,
            domain.nx(),
            domain.ny()
        )));
    }
    if (mask.h - config.h).abs() > 1e-12 * config.h {
        return Err(CliError::Config(format!(
            "mask spacing {} disagrees with grid.h {}",
            mask.h, config.h
        )));
    }
    for i in 0..domain.n_cells() {
        let (ix, iy) = domain.cell_grid(i);
        if !mask.interior[iy * domain.nx() + ix] {
            return Err(CliError::Invariant(
                "stored mask interior disagrees with the rasterized domain".to_string(),
            ));
        }
    }
    let cells: Vec<usize> = (0..domain.n_cells())
        .filter(|&i| {
            let (ix, iy) = domain.cell_grid(i);
            mask.in_d[iy * domain.nx() + ix]
        })
        .collect();
    let d_config = Configuration::from_cells_with_threshold(cells, mask.t, &domain)
        .map_err(from_core)?;
    let u_text = std::fs::read_to_string(config.output_dir.join("u.csv"))
        .map_err(|e| io_err("cannot read u.csv", e))?;
    let u = parse_u_csv(&u_text, &domain).map_err(CliError::Config)?;

    let total = domain.measure(None).map_err(from_core)?;
    let a_target = config.area_fraction * total;
    let op = assemble(&domain, d_config.cells(), config.alpha).map_err(from_core)?;
    let lambda =
        membrane_core::discretization::rayleigh_quotient(&op, &u).map_err(from_core)?;
    // fixed-point certificate from stored data
    let re = select_sublevel(&u, a_target, &domain).map_err(from_core)?;
    let certificate = re.cells() == d_config.cells();

    let run = OptimizationResult {
        lambda,
        config: d_config,
        u,
        history: vec![lambda],
        restart_id: 0,
        converged: certificate,
        alpha: config.alpha,
        a_target,
        residual: f64::NAN,
    };
    let base = base_eigenpair(&domain, &config.solve_options()).map_err(from_core)?;
    let mut report = Report::new();
    report.push("check.certificate", if certificate { "pass" } else { "fail" });
    let mut failures = run_checks(config, &domain, &run, &base, &mut report)?;
    if !certificate {
        failures.insert(0, "certificate".to_string());
    }
    print!("{}", report.render());
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(format!(
            "failed checks: {}",
            failures.join(", ")
        )))
    }
}

/// One sweep row.
#[derive(Debug, Clone)]
struct SweepRow {
    alpha: f64,
    fraction: f64,
    lambda: Option<f64>,
    dominant_n: Option<usize>,
    beta: Option<f64>,
    converged: Option<bool>,
    status: String,
}

/// Phase-table sweep over alpha x fraction; rows land in lexicographic
/// (alpha, fraction) order no matter how they execute.
pub fn run_sweep(config: &RunConfig, threads: usize) -> CliResult<PathBuf> {
    if config.sweep_alphas.is_empty() || config.sweep_fractions.is_empty() {
        return Err(CliError::Config(
            "sweep.alpha and sweep.fraction must be non-empty".to_string(),
        ));
    }
    let mut alphas = config.sweep_alphas.clone();
    alphas.sort_by(f64::total_cmp);
    let mut fractions = config.sweep_fractions.clone();
    fractions.sort_by(f64::total_cmp);
    let domain = Arc::new(rasterize(&config.domain, config.h).map_err(from_core)?);
    let total = domain.measure(None).map_err(from_core)?;
    let center = spec_center(&config.domain, &domain);
    let is_annulus = matches!(config.domain, DomainSpec::Annulus { .. });

    let grid: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| fractions.iter().map(move |&f| (a, f)))
        .collect();
    let compute = |&(alpha, fraction): &(f64, f64)| -> SweepRow {
        let mut row = SweepRow {
            alpha,
            fraction,
            lambda: None,
            dominant_n: None,
            beta: None,
            converged: None,
            status: "ok".to_string(),
        };
        if !(fraction > 0.0 && fraction < 1.0) {
            row.status = "error: fraction out of range".to_string();
            return row;
        }
        let opts = membrane_core::optimizer::MultistartOptions {
            solve: config.solve_options(),
            restarts: config.restarts,
            seed: config.seed,
            threads: 1,
        };
        match multistart(&domain, alpha, fraction * total, &opts) {
            Ok(run) => {
                row.lambda = Some(run.lambda);
                row.converged = Some(run.converged);
                if is_annulus {
                    match symmetry_metrics(&run.config, &domain, center, &[]) {
                        Ok(s) => {
                            row.dominant_n = Some(s.dominant_n);
                            row.beta = Some(s.beta_estimate);
                        }
                        Err(e) => row.status = format!("error: {e}").replace(',', ";"),
                    }
                }
            }
            Err(e) => row.status = format!("error: {e}").replace(',', ";"),
        }
        row
    };
    let rows: Vec<SweepRow> = if threads <= 1 || grid.len() == 1 {
        grid.iter().map(compute).collect()
    } else {
        let slots: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; grid.len()]);
        let next = AtomicUsize::new(0);
        let workers = threads.min(grid.len());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= grid.len() {
                        break;
                    }
                    let row = compute(&grid[i]);
                    slots.lock().unwrap()[i] = Some(row);
                });
            }
        });
        slots
            .into_inner()
            .unwrap()
            .into_iter()
            .map(|r| r.expect("all rows computed"))
            .collect()
    };

    let mut csv = String::from("alpha,fraction,lambda,dominant_n,beta_estimate,converged,status\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(row.alpha),
            fmt_f64(row.fraction),
            row.lambda.map(fmt_f64).unwrap_or_default(),
            row.dominant_n.map(|n| n.to_string()).unwrap_or_default(),
            row.beta.map(fmt_f64).unwrap_or_default(),
            row.converged
                .map(|c| if c { "true" } else { "false" }.to_string())
                .unwrap_or_default(),
            row.status
        ));
    }
    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| io_err("cannot create output dir", e))?;
    let path = config.output_dir.join("sweep.csv");
    write_atomic(&path, &csv).map_err(|e| io_err("cannot write sweep.csv", e))?;
    Ok(path)
}

/// Finds alpha-bar and writes alphabar.txt.
pub fn run_alphabar(config: &RunConfig, threads: usize) -> CliResult<PathBuf> {
    let t0 = Instant::now();
    let domain = Arc::new(rasterize(&config.domain, config.h).map_err(from_core)?);
    let total = domain.measure(None).map_err(from_core)?;
    let a_target = config.area_fraction * total;
    let opts = config.multistart_options(threads);
    let result =
        find_alpha_bar(&domain, a_target, config.alphabar_tol, &opts).map_err(from_core)?;
    let mut report = Report::new();
    echo_config(&mut report, config);
    report.push_f64("tol.alphabar", config.alphabar_tol);
    report.push_f64("target_measure", a_target);
    report.push_f64("alpha_bar", result.alpha_bar);
    report.push_f64("lambda_at_alpha_bar", result.lambda);
    report.push_f64("alpha_bar_residual", result.residual);
    report.push_usize("lambda_evaluations", result.evaluations);
    report.push("wall_time_s", format!("{:.3}", t0.elapsed().as_secs_f64()));
    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| io_err("cannot create output dir", e))?;
    let path = config.output_dir.join("alphabar.txt");
    write_atomic(&path, &report.render()).map_err(|e| io_err("cannot write alphabar", e))?;
    Ok(path)
}
