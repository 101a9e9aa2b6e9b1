use crate::analysis::base::BaseEigenpair;
use crate::discretization::quadrature_inner;
use crate::error::{Error, Result};
use crate::optimizer::OptimizationResult;

/// Perturbation bounds around the base eigenpair.
///
/// The two-sided inequalities 0 ≤ Λ − μ₁ ≤ α and
/// 0 ≤ μ₁ − (Λ − α) ≤ α·∫_{D^c}u² hold exactly in the discrete model (up to
/// solver residuals); the remaining fields are diagnostics whose continuum
/// constants are unknown and are reported, never asserted.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub alpha: f64,
    /// Λ − μ₁.
    pub lambda_shift: f64,
    /// μ₁ − (Λ − α).
    pub lower_gap: f64,
    /// ∫_{D^c} u².
    pub complement_mass: f64,
    /// ‖u − ψ‖_∞ over cells.
    pub sup_diff: f64,
    /// ‖u − ψ‖_∞ / α (diagnostic for the perturbation constant).
    pub sup_diff_over_alpha: Option<f64>,
    /// ‖u − ψ‖_∞ / (|Ω| − A) (diagnostic for the large-A constant).
    pub sup_diff_over_deficit: Option<f64>,
    /// ‖u − (u, ψ)ψ‖₂ · (μ₂ − μ₁) / α (spectral-gap expansion diagnostic).
    pub gap_ratio: Option<f64>,
}

impl BoundReport {
    /// Whether the exact discrete inequalities hold within `slack`.
    pub fn holds(&self, slack: f64) -> bool {
        self.lambda_shift >= -slack
            && self.lambda_shift <= self.alpha + slack
            && self.lower_gap >= -slack
            && self.lower_gap <= self.alpha * self.complement_mass + slack
    }
}

pub fn check_perturbation_bounds(
    result: &OptimizationResult,
    base: &BaseEigenpair,
) -> Result<BoundReport> {
    let u = &result.u;
    let alpha = result.alpha;
    let n = u.len();
    let mask = result.config.mask(n);
    let h = u.domain().h();
    let mut complement_sum = 0.0;
    for (i, v) in u.values().iter().enumerate() {
        if !mask[i] {
            complement_sum += v * v;
        }
    }
    let complement_mass = h * h * complement_sum;
    let sup_diff = u.linf_diff(&base.psi)?;
    let domain_measure = u.domain().measure(None)?;
    let deficit = domain_measure - result.config.measure();
    let beta1 = quadrature_inner(u, &base.psi)?;
    let residual_norm = (1.0 - beta1 * beta1).max(0.0).sqrt();
    Ok(BoundReport {
        alpha,
        lambda_shift: result.lambda - base.mu1,
        lower_gap: base.mu1 - (result.lambda - alpha),
        complement_mass,
        sup_diff,
        sup_diff_over_alpha: (alpha > 0.0).then(|| sup_diff / alpha),
        sup_diff_over_deficit: (deficit > 0.0).then(|| sup_diff / deficit),
        gap_ratio: (alpha > 0.0).then(|| residual_norm * base.gap / alpha),
    })
}

/// Sublevel nesting around the base eigenfunction.
#[derive(Debug, Clone)]
pub struct NestingReport {
    /// ε = ‖u − ψ‖_∞ used for the inclusions.
    pub eps: f64,
    pub threshold: f64,
    /// Largest δ with {ψ ≤ M − δ} ⊆ D, reported when A/|Ω| > 0.9.
    pub delta_to_max: Option<f64>,
}

/// Asserts {ψ ≤ t − ε} ⊆ D ⊆ {ψ ≤ t + ε} cellwise with ε = ‖u − ψ‖_∞.
///
/// Both inclusions are exact consequences of D = {u ≤ t} and |u − ψ| ≤ ε, so
/// any violation is a hard failure signalling a solver bug.
pub fn check_nesting(result: &OptimizationResult, base: &BaseEigenpair) -> Result<NestingReport> {
    let t = result.config.threshold().ok_or(Error::NoThreshold)?;
    let eps = result.u.linf_diff(&base.psi)?;
    let psi = base.psi.values();
    let n = result.u.len();
    let mask = result.config.mask(n);
    let mut lower = 0usize;
    let mut upper = 0usize;
    for i in 0..n {
        if psi[i] <= t - eps && !mask[i] {
            lower += 1;
        }
        if mask[i] && psi[i] > t + eps {
            upper += 1;
        }
    }
    if lower > 0 || upper > 0 {
        return Err(Error::NestingViolation { lower, upper });
    }
    let domain_measure = result.u.domain().measure(None)?;
    let delta_to_max = if result.config.measure() / domain_measure > 0.9 {
        // largest attained cell value c with {psi <= c} contained in D
        let outside_min = psi
            .iter()
            .enumerate()
            .filter(|(i, _)| !mask[*i])
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min);
        let c_max = psi
            .iter()
            .cloned()
            .filter(|v| *v < outside_min)
            .fold(f64::NEG_INFINITY, f64::max);
        (c_max > f64::NEG_INFINITY).then(|| base.max_psi - c_max)
    } else {
        None
    };
    Ok(NestingReport {
        eps,
        threshold: t,
        delta_to_max,
    })
}

/// Fraction of cells whose u value coincides bitwise with another cell's,
/// excluding the threshold value itself. A discrete stand-in for "level sets
/// other than {u = t} have measure zero"; reported, never asserted.
pub fn level_set_duplicate_fraction(values: &[f64], threshold: f64) -> f64 {
    let mut bits: Vec<u64> = values.iter().map(|v| v.to_bits()).collect();
    bits.sort_unstable();
    let t_bits = threshold.to_bits();
    let mut duplicates = 0usize;
    let mut i = 0;
    while i < bits.len() {
        let mut j = i + 1;
        while j < bits.len() && bits[j] == bits[i] {
            j += 1;
        }
        if j - i > 1 && bits[i] != t_bits {
            duplicates += j - i;
        }
        i = j;
    }
    duplicates as f64 / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::base::base_eigenpair;
    use crate::geometry::{rasterize, DomainSpec};
    use crate::optimizer::{boundary_layer_init, optimize, SolveOptions};
    use std::sync::Arc;

    #[test]
    fn exact_bounds_hold_on_a_small_run() {
        let d = Arc::new(
            rasterize(
                &DomainSpec::Rectangle {
                    width: 1.0,
                    height: 1.0,
                },
                1.0 / 8.0,
            )
            .unwrap(),
        );
        let a_target = 0.5 * d.measure(None).unwrap();
        let init = boundary_layer_init(&d, a_target).unwrap();
        let opts = SolveOptions::default();
        let run = optimize(&d, 5.0, a_target, &init, &opts).unwrap();
        let base = base_eigenpair(&d, &opts).unwrap();
        let report = check_perturbation_bounds(&run, &base).unwrap();
        assert!(report.holds(1e-9), "{report:?}");
        let nesting = check_nesting(&run, &base).unwrap();
        assert!(nesting.eps >= 0.0);
    }

    #[test]
    fn alpha_zero_gaps_are_exactly_zero() {
        let d = Arc::new(
            rasterize(
                &DomainSpec::Rectangle {
                    width: 1.0,
                    height: 1.0,
                },
                1.0 / 8.0,
            )
            .unwrap(),
        );
        let a_target = 0.5 * d.measure(None).unwrap();
        let init = boundary_layer_init(&d, a_target).unwrap();
        let opts = SolveOptions::default();
        let run = optimize(&d, 0.0, a_target, &init, &opts).unwrap();
        let base = base_eigenpair(&d, &opts).unwrap();
        let report = check_perturbation_bounds(&run, &base).unwrap();
        assert_eq!(report.lambda_shift, 0.0);
        assert_eq!(report.lower_gap, 0.0);
        assert_eq!(report.sup_diff, 0.0);
    }

    #[test]
    fn duplicate_fraction_counts_exact_repeats() {
        let values = [1.0, 2.0, 2.0, 3.0, 3.0, 3.0, 4.0];
        // threshold at 3.0 excludes that run of three
        assert!((level_set_duplicate_fraction(&values, 3.0) - 2.0 / 7.0).abs() < 1e-15);
        assert!((level_set_duplicate_fraction(&values, 0.0) - 5.0 / 7.0).abs() < 1e-15);
    }
}
