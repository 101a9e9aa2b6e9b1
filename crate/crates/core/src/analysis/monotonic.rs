use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::GridDomain;
use crate::optimizer::{multistart, Configuration, MultistartOptions};

/// Containment data for one ordered pair A < A′.
#[derive(Debug, Clone, Copy)]
pub struct PairwiseContainment {
    pub a_small: f64,
    pub a_large: f64,
    /// |D_A \ D_{A′}|·h²; zero means D_A ⊆ D_{A′}.
    pub escaped_measure: f64,
}

/// Probe for monotonicity of the optimal set in the prescribed measure.
/// Reported, not asserted: whether D_{α,A} ⊆ D_{α,A′} in general is open.
#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub a_values: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub configs: Vec<Configuration>,
    pub pairwise: Vec<PairwiseContainment>,
}

/// Runs multistart at each measure and reports pairwise containment defects.
pub fn monotonicity_probe(
    domain: &Arc<GridDomain>,
    alpha: f64,
    a_list: &[f64],
    opts: &MultistartOptions,
) -> Result<MonotonicityReport> {
    let total = domain.measure(None)?;
    for w in a_list.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidSpec(
                "measures must be strictly increasing".to_string(),
            ));
        }
    }
    if let (Some(&first), Some(&last)) = (a_list.first(), a_list.last()) {
        if first <= 0.0 || last >= total {
            return Err(Error::InvalidSpec(format!(
                "measures must lie in (0, {total})"
            )));
        }
    }
    let mut lambdas = Vec::with_capacity(a_list.len());
    let mut configs = Vec::with_capacity(a_list.len());
    for &a in a_list {
        let run = multistart(domain, alpha, a, opts)?;
        lambdas.push(run.lambda);
        configs.push(run.config);
    }
    let h2 = domain.h() * domain.h();
    let mut pairwise = Vec::new();
    for i in 0..configs.len() {
        for j in (i + 1)..configs.len() {
            let large = configs[j].mask(domain.n_cells());
            let escaped = configs[i]
                .cells()
                .iter()
                .filter(|&&c| !large[c])
                .count();
            pairwise.push(PairwiseContainment {
                a_small: a_list[i],
                a_large: a_list[j],
                escaped_measure: escaped as f64 * h2,
            });
        }
    }
    Ok(MonotonicityReport {
        a_values: a_list.to_vec(),
        lambdas,
        configs,
        pairwise,
    })
}
