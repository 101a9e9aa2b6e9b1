//! Minimization of λ(α, D) over |D| = A by the sublevel-set rearrangement
//! iteration, with deterministic multistart and the Λ(ᾱ, A) = ᾱ root find.
//!
//! One rearrangement sweep solves the eigenproblem for the current D and
//! re-thresholds: D′ = the k cells with smallest u. Since u ≥ 0, that choice
//! minimizes ∫_D u² at fixed cell count, so the eigenvalue history is
//! monotone non-increasing and set-equality of successive configurations is
//! a genuine fixed point of the thresholded eigenvalue equation.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use crate::discretization::{assemble, Field};
use crate::dist::distance_to_exterior;
use crate::eigensolver::{smallest_eigenpair, EigenResult};
use crate::error::{Error, Result};
use crate::geometry::GridDomain;
use crate::rng::{random_subset, CounterRng};

/// A candidate set D of interior cells at prescribed measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    cells: Vec<usize>,
    t: Option<f64>,
    measure: f64,
}

impl Configuration {
    /// Wraps an explicit cell set (sorted, duplicates rejected).
    pub fn from_cells(mut cells: Vec<usize>, domain: &GridDomain) -> Result<Self> {
        cells.sort_unstable();
        for w in cells.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidSpec(format!("duplicate cell {}", w[0])));
            }
        }
        if let Some(&last) = cells.last() {
            if last >= domain.n_cells() {
                return Err(Error::SubsetOutOfDomain {
                    index: last,
                    n: domain.n_cells(),
                });
            }
        }
        let measure = cells.len() as f64 * domain.h() * domain.h();
        Ok(Configuration {
            cells,
            t: None,
            measure,
        })
    }

    /// Wraps a cell set together with its sublevel threshold, e.g. when
    /// reconstructing a configuration from stored artifacts.
    pub fn from_cells_with_threshold(
        cells: Vec<usize>,
        threshold: f64,
        domain: &GridDomain,
    ) -> Result<Self> {
        let mut config = Self::from_cells(cells, domain)?;
        config.t = Some(threshold);
        Ok(config)
    }

    /// Interior cell indices of D, ascending.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn k(&self) -> usize {
        self.cells.len()
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// Threshold value when produced by sublevel selection.
    pub fn threshold(&self) -> Option<f64> {
        self.t
    }

    /// Membership mask over interior cells.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &i in &self.cells {
            m[i] = true;
        }
        m
    }

    /// Interior cells of D^c, ascending.
    pub fn complement(&self, domain: &GridDomain) -> Vec<usize> {
        let mask = self.mask(domain.n_cells());
        (0..domain.n_cells()).filter(|&i| !mask[i]).collect()
    }
}

/// Picks the k = round(A/h²) cells with smallest u.
///
/// Ties at the cut value break by ascending cell index, so the result is a
/// deterministic function of (u, A). The threshold t is the k-th smallest
/// value: every cell of D has u ≤ t and every cell with u < t is in D.
pub fn select_sublevel(
    u: &Field,
    a_target: f64,
    domain: &Arc<GridDomain>,
) -> Result<Configuration> {
    if u.domain().as_ref() != domain.as_ref() {
        return Err(Error::DomainMismatch);
    }
    let n = domain.n_cells();
    let h = domain.h();
    if !(a_target.is_finite() && a_target > 0.0) {
        return Err(Error::DegenerateAreaFraction { k: 0, n });
    }
    let k = (a_target / (h * h)).round() as usize;
    if k == 0 || k >= n {
        return Err(Error::DegenerateAreaFraction { k, n });
    }
    let values = u.values();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let t = values[order[k - 1]];
    let mut cells = order[..k].to_vec();
    cells.sort_unstable();
    Ok(Configuration {
        cells,
        t: Some(t),
        measure: k as f64 * h * h,
    })
}

/// Options for one rearrangement run.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
    pub max_outer: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            eigen_tol: 1e-9,
            eigen_max_iter: 500,
            max_outer: 200,
        }
    }
}

/// Options for multistart runs; restart r draws from the counter stream
/// (seed, r), so results do not depend on scheduling.
#[derive(Debug, Clone, Copy)]
pub struct MultistartOptions {
    pub solve: SolveOptions,
    pub restarts: usize,
    pub seed: u64,
    /// Worker threads for restarts; the aggregate is scheduling-independent
    /// either way.
    pub threads: usize,
}

impl Default for MultistartOptions {
    fn default() -> Self {
        MultistartOptions {
            solve: SolveOptions::default(),
            restarts: 8,
            seed: 0,
            threads: 1,
        }
    }
}

/// Outcome of a rearrangement run.
#[derive(Debug, Clone)]
pub struct OptimizationResult {
    /// Final (minimal) eigenvalue Λ.
    pub lambda: f64,
    pub config: Configuration,
    pub u: Field,
    /// One λ per outer sweep, non-increasing up to roundoff.
    pub history: Vec<f64>,
    /// Which start produced this result (0 under plain `optimize`).
    pub restart_id: usize,
    /// True when two successive configurations coincided as sets.
    pub converged: bool,
    pub alpha: f64,
    pub a_target: f64,
    /// Eigenresidual of the final solve.
    pub residual: f64,
}

fn base_result(
    domain: &Arc<GridDomain>,
    a_target: f64,
    opts: &SolveOptions,
) -> Result<(EigenResult, Configuration)> {
    let op = assemble(domain, &[], 0.0)?;
    let eig = smallest_eigenpair(&op, domain, opts.eigen_tol, opts.eigen_max_iter)?;
    let config = select_sublevel(&eig.u, a_target, domain)?;
    Ok((eig, config))
}

/// Runs the rearrangement iteration from `init` until the configuration is a
/// fixed point of eigensolve-then-rethreshold, or `max_outer` sweeps.
///
/// α = 0 short-circuits to the base eigenpair (the problem no longer depends
/// on D). Non-convergence (2-cycles included) is reported, not an error.
pub fn optimize(
    domain: &Arc<GridDomain>,
    alpha: f64,
    a_target: f64,
    init: &Configuration,
    opts: &SolveOptions,
) -> Result<OptimizationResult> {
    optimize_with(domain, alpha, a_target, init, opts, |u, a, d| {
        select_sublevel(u, a, d)
    })
}

/// Rearrangement iteration restricted to rotationally symmetric
/// configurations about `center`: cells are grouped into exact-radius
/// classes and selected class-by-class in order of mean u, so the iterate
/// stays radial. Used as the symmetric reference when certifying symmetry
/// breaking; initialized from the wall-distance profile.
pub fn optimize_radial(
    domain: &Arc<GridDomain>,
    alpha: f64,
    a_target: f64,
    center: (f64, f64),
    opts: &SolveOptions,
) -> Result<OptimizationResult> {
    let classes = radius_classes(domain, center);
    let k = target_cell_count(domain, a_target)?;
    // wall-distance init: classes nearest either wall fill first
    let dist = distance_to_exterior(domain)?;
    let dist_field = Field::new(domain.clone(), dist)?;
    let init_cells = select_radial(&classes, dist_field.values(), k);
    let init = Configuration {
        cells: init_cells.0,
        t: Some(init_cells.1),
        measure: k as f64 * domain.h() * domain.h(),
    };
    optimize_with(domain, alpha, a_target, &init, opts, move |u, a, d| {
        let k = target_cell_count(d, a)?;
        let (cells, t) = select_radial(&classes, u.values(), k);
        Ok(Configuration {
            cells,
            t: Some(t),
            measure: k as f64 * d.h() * d.h(),
        })
    })
}

fn optimize_with(
    domain: &Arc<GridDomain>,
    alpha: f64,
    a_target: f64,
    init: &Configuration,
    opts: &SolveOptions,
    mut reselect: impl FnMut(&Field, f64, &Arc<GridDomain>) -> Result<Configuration>,
) -> Result<OptimizationResult> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidSpec(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    target_cell_count(domain, a_target)?;
    if alpha == 0.0 {
        let (eig, config) = base_result(domain, a_target, opts)?;
        return Ok(OptimizationResult {
            lambda: eig.lambda,
            config,
            u: eig.u,
            history: vec![eig.lambda],
            restart_id: 0,
            converged: true,
            alpha,
            a_target,
            residual: eig.residual,
        });
    }
    if let Some(&last) = init.cells().last() {
        if last >= domain.n_cells() {
            return Err(Error::SubsetOutOfDomain {
                index: last,
                n: domain.n_cells(),
            });
        }
    }
    let mut current = init.clone();
    let mut history = Vec::new();
    let mut converged = false;
    let mut last: Option<(EigenResult, Configuration)> = None;
    for _ in 0..opts.max_outer {
        let op = assemble(domain, current.cells(), alpha)?;
        let eig = smallest_eigenpair(&op, domain, opts.eigen_tol, opts.eigen_max_iter)?;
        history.push(eig.lambda);
        let next = reselect(&eig.u, a_target, domain)?;
        let fixed = next.cells() == current.cells();
        last = Some((eig, next.clone()));
        current = next;
        if fixed {
            converged = true;
            break;
        }
    }
    let (eig, config) = last.expect("max_outer >= 1");
    Ok(OptimizationResult {
        lambda: eig.lambda,
        residual: eig.residual,
        u: eig.u,
        config,
        history,
        restart_id: 0,
        converged,
        alpha,
        a_target,
    })
}

fn target_cell_count(domain: &GridDomain, a_target: f64) -> Result<usize> {
    let n = domain.n_cells();
    if !(a_target.is_finite() && a_target > 0.0) {
        return Err(Error::DegenerateAreaFraction { k: 0, n });
    }
    let k = (a_target / (domain.h() * domain.h())).round() as usize;
    if k == 0 || k >= n {
        return Err(Error::DegenerateAreaFraction { k, n });
    }
    Ok(k)
}

/// Exact-radius cell classes about a center, ascending radius. Cells at
/// bitwise-equal squared radius land in one class, so grid symmetries are
/// preserved exactly.
fn radius_classes(domain: &GridDomain, center: (f64, f64)) -> Vec<Vec<usize>> {
    let mut map: std::collections::BTreeMap<u64, Vec<usize>> = std::collections::BTreeMap::new();
    for i in 0..domain.n_cells() {
        let (x, y) = domain.center(i);
        let dx = x - center.0;
        let dy = y - center.1;
        let r2 = dx * dx + dy * dy;
        map.entry(r2.to_bits()).or_default().push(i);
    }
    map.into_values().collect()
}

/// Selects k cells class-by-class in order of (mean u, radius); a boundary
/// class is filled partially by ascending cell index. Returns the cells and
/// the mean-u threshold of the last class taken.
fn select_radial(classes: &[Vec<usize>], values: &[f64], k: usize) -> (Vec<usize>, f64) {
    let mut keyed: Vec<(f64, usize)> = classes
        .iter()
        .enumerate()
        .map(|(ci, members)| {
            let sum: f64 = members.iter().map(|&i| values[i]).sum();
            (sum / members.len() as f64, ci)
        })
        .collect();
    keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut cells = Vec::with_capacity(k);
    let mut t = f64::NEG_INFINITY;
    for &(mean, ci) in &keyed {
        if cells.len() >= k {
            break;
        }
        let members = &classes[ci];
        let need = k - cells.len();
        if members.len() <= need {
            cells.extend_from_slice(members);
        } else {
            cells.extend_from_slice(&members[..need]);
        }
        t = mean;
    }
    cells.sort_unstable();
    (cells, t)
}

/// Boundary-layer start: the k cells nearest the exterior (ties by index).
pub fn boundary_layer_init(domain: &Arc<GridDomain>, a_target: f64) -> Result<Configuration> {
    let k = target_cell_count(domain, a_target)?;
    let dist = distance_to_exterior(domain)?;
    let mut order: Vec<usize> = (0..domain.n_cells()).collect();
    order.sort_unstable_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
    let mut cells = order[..k].to_vec();
    cells.sort_unstable();
    Ok(Configuration {
        cells,
        t: None,
        measure: k as f64 * domain.h() * domain.h(),
    })
}

fn restart_init(
    domain: &Arc<GridDomain>,
    a_target: f64,
    restart_id: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<Configuration> {
    match restart_id {
        0 => boundary_layer_init(domain, a_target),
        1 => {
            let (_, config) = base_result(domain, a_target, opts)?;
            Ok(config)
        }
        r => {
            let k = target_cell_count(domain, a_target)?;
            let mut rng = CounterRng::new(seed, r as u64);
            let cells = random_subset(&mut rng, domain.n_cells(), k);
            Configuration::from_cells(cells, domain)
        }
    }
}

fn run_restart(
    domain: &Arc<GridDomain>,
    alpha: f64,
    a_target: f64,
    restart_id: usize,
    opts: &MultistartOptions,
) -> Result<OptimizationResult> {
    let init = restart_init(domain, a_target, restart_id, opts.seed, &opts.solve)?;
    let mut result = optimize(domain, alpha, a_target, &init, &opts.solve)?;
    result.restart_id = restart_id;
    Ok(result)
}

/// Runs `optimize` from the boundary-layer start, the base-eigenfunction
/// sublevel, and uniformly random k-subsets, returning the min-Λ result
/// (ties to the lowest restart id). Individual restart failures are skipped
/// unless every restart fails.
pub fn multistart(
    domain: &Arc<GridDomain>,
    alpha: f64,
    a_target: f64,
    opts: &MultistartOptions,
) -> Result<OptimizationResult> {
    if opts.restarts == 0 {
        return Err(Error::InvalidSpec("restarts must be >= 1".to_string()));
    }
    let outcomes: Vec<Result<OptimizationResult>> = if opts.threads <= 1 || opts.restarts == 1 {
        (0..opts.restarts)
            .map(|r| run_restart(domain, alpha, a_target, r, opts))
            .collect()
    } else {
        let slots: Mutex<Vec<Option<Result<OptimizationResult>>>> =
            Mutex::new((0..opts.restarts).map(|_| None).collect());
        let next = AtomicUsize::new(0);
        let workers = opts.threads.min(opts.restarts);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let r = next.fetch_add(1, Ordering::Relaxed);
                    if r >= opts.restarts {
                        break;
                    }
                    let out = run_restart(domain, alpha, a_target, r, opts);
                    slots.lock().unwrap()[r] = Some(out);
                });
            }
        });
        slots
            .into_inner()
            .unwrap()
            .into_iter()
            .map(|o| o.expect("all restarts executed"))
            .collect()
    };
    let mut winner: Option<OptimizationResult> = None;
    let mut first_err: Option<Error> = None;
    for outcome in outcomes {
        match outcome {
            Ok(result) => match &winner {
                Some(best) if result.lambda >= best.lambda => {}
                _ => winner = Some(result),
            },
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    winner.ok_or_else(|| Error::AllRestartsFailed {
        restarts: opts.restarts,
        first: Box::new(first_err.expect("no winner implies an error")),
    })
}

/// Root find for Λ(ᾱ, A) = ᾱ.
#[derive(Debug, Clone, Copy)]
pub struct AlphaBarResult {
    pub alpha_bar: f64,
    /// Λ(ᾱ, A) at the returned ᾱ.
    pub lambda: f64,
    /// |Λ(ᾱ, A) − ᾱ|.
    pub residual: f64,
    /// Number of Λ evaluations spent.
    pub evaluations: usize,
}

/// Bisection on f(α) = Λ(α, A) − α. The bracket grows by doubling from
/// α = μ₁ (where f ≥ 0) until f < 0; each Λ evaluation is a full multistart
/// with the budget in `opts`.
pub fn find_alpha_bar(
    domain: &Arc<GridDomain>,
    a_target: f64,
    tol: f64,
    opts: &MultistartOptions,
) -> Result<AlphaBarResult> {
    target_cell_count(domain, a_target)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidSpec(format!("tolerance must be positive, got {tol}")));
    }
    let op0 = assemble(domain, &[], 0.0)?;
    let mu1 = smallest_eigenpair(&op0, domain, opts.solve.eigen_tol, opts.solve.eigen_max_iter)?
        .lambda;
    let mut evaluations = 0usize;
    let mut eval = |alpha: f64| -> Result<f64> {
        evaluations += 1;
        Ok(multistart(domain, alpha, a_target, opts)?.lambda - alpha)
    };
    let mut lo = mu1;
    let mut hi = 2.0 * mu1;
    let max_doublings = 60;
    let mut bracketed = false;
    for _ in 0..max_doublings {
        if eval(hi)? < 0.0 {
            bracketed = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !bracketed {
        return Err(Error::BracketNotFound {
            doublings: max_doublings,
        });
    }
    let mut last_f = f64::INFINITY;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = eval(mid)?;
        last_f = fm;
        if fm.abs() <= tol {
            return Ok(AlphaBarResult {
                alpha_bar: mid,
                lambda: fm + mid,
                residual: fm.abs(),
                evaluations,
            });
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::BisectionStalled {
        residual: last_f.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, DomainSpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn grid(width: f64, height: f64, h: f64) -> Arc<GridDomain> {
        Arc::new(rasterize(&DomainSpec::Rectangle { width, height }, h).unwrap())
    }

    #[test]
    fn select_picks_smallest() {
        let d = grid(3.0, 1.0, 1.0);
        let u = Field::new(d.clone(), vec![3.0, 1.0, 2.0]).unwrap();
        let c = select_sublevel(&u, 1.0, &d).unwrap();
        assert_eq!(c.cells(), &[1]);
        assert_eq!(c.threshold(), Some(1.0));
        assert_abs_diff_eq!(c.measure(), 1.0);
    }

    #[test]
    fn select_breaks_ties_by_index() {
        let d = grid(4.0, 1.0, 1.0);
        let u = Field::constant(d.clone(), 5.0);
        let c = select_sublevel(&u, 2.0, &d).unwrap();
        assert_eq!(c.cells(), &[0, 1]);
        assert_eq!(c.threshold(), Some(5.0));
    }

    #[test]
    fn select_rejects_degenerate_fractions() {
        let d = grid(4.0, 1.0, 1.0);
        let u = Field::constant(d.clone(), 1.0);
        assert!(matches!(
            select_sublevel(&u, 0.2, &d),
            Err(Error::DegenerateAreaFraction { k: 0, .. })
        ));
        assert!(matches!(
            select_sublevel(&u, 4.0, &d),
            Err(Error::DegenerateAreaFraction { k: 4, .. })
        ));
    }

    proptest! {
        // argcut invariance: scaling u by any c > 0 leaves the selection and
        // relative threshold unchanged
        #[test]
        fn select_is_scale_invariant(
            raw in proptest::collection::vec(0.01f64..100.0, 12),
            scale in 0.01f64..1000.0,
        ) {
            let d = grid(4.0, 3.0, 1.0);
            let u = Field::new(d.clone(), raw.clone()).unwrap();
            let su = Field::new(d.clone(), raw.iter().map(|v| v * scale).collect()).unwrap();
            let a = select_sublevel(&u, 5.0, &d).unwrap();
            let b = select_sublevel(&su, 5.0, &d).unwrap();
            prop_assert_eq!(a.cells(), b.cells());
        }
    }

    #[test]
    fn alpha_zero_short_circuits_to_base() {
        let d = grid(1.0, 1.0, 0.25);
        let init = boundary_layer_init(&d, 4.0 * 0.0625).unwrap();
        let r = optimize(&d, 0.0, 4.0 * 0.0625, &init, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.history.len(), 1);
        let op = assemble(&d, &[], 0.0).unwrap();
        let base = smallest_eigenpair(&op, &d, 1e-9, 500).unwrap();
        assert_eq!(r.lambda.to_bits(), base.lambda.to_bits());
    }

    #[test]
    fn optimize_descends_and_certifies_fixed_point() {
        let d = grid(1.0, 1.0, 1.0 / 8.0);
        let a_target = 20.0 / 64.0; // 20 cells
        let init = boundary_layer_init(&d, a_target).unwrap();
        let r = optimize(&d, 25.0, a_target, &init, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "history not monotone: {:?}", r.history);
        }
        // re-solve with the final D and re-threshold: same set
        let op = assemble(&d, r.config.cells(), 25.0).unwrap();
        let eig = smallest_eigenpair(&op, &d, 1e-9, 500).unwrap();
        let re = select_sublevel(&eig.u, a_target, &d).unwrap();
        assert_eq!(re.cells(), r.config.cells());
        assert_eq!(eig.lambda.to_bits(), r.lambda.to_bits());
    }

    #[test]
    fn multistart_single_restart_is_boundary_layer_run() {
        let d = grid(1.0, 1.0, 1.0 / 8.0);
        let a_target = 20.0 / 64.0;
        let opts = MultistartOptions {
            restarts: 1,
            ..Default::default()
        };
        let ms = multistart(&d, 10.0, a_target, &opts).unwrap();
        let init = boundary_layer_init(&d, a_target).unwrap();
        let direct = optimize(&d, 10.0, a_target, &init, &opts.solve).unwrap();
        assert_eq!(ms.lambda.to_bits(), direct.lambda.to_bits());
        assert_eq!(ms.config.cells(), direct.config.cells());
        assert_eq!(ms.restart_id, 0);
    }

    #[test]
    fn multistart_is_deterministic_and_thread_invariant() {
        let d = grid(1.0, 0.75, 1.0 / 8.0);
        let a_target = 12.0 / 64.0;
        let opts = MultistartOptions {
            restarts: 5,
            seed: 12345,
            ..Default::default()
        };
        let a = multistart(&d, 30.0, a_target, &opts).unwrap();
        let b = multistart(&d, 30.0, a_target, &opts).unwrap();
        assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
        assert_eq!(a.restart_id, b.restart_id);
        assert_eq!(a.config.cells(), b.config.cells());
        let threaded = multistart(
            &d,
            30.0,
            a_target,
            &MultistartOptions {
                threads: 3,
                ..opts
            },
        )
        .unwrap();
        assert_eq!(a.lambda.to_bits(), threaded.lambda.to_bits());
        assert_eq!(a.restart_id, threaded.restart_id);
    }

    #[test]
    fn radial_run_converges_on_disk() {
        let d = Arc::new(rasterize(&DomainSpec::Disk { radius: 1.0 }, 1.0 / 8.0).unwrap());
        let a_target = 0.5 * d.measure(None).unwrap();
        let r = optimize_radial(&d, 10.0, a_target, (0.0, 0.0), &SolveOptions::default())
            .unwrap();
        assert!(r.converged);
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-10);
        }
    }
}
