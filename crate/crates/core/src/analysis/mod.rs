//! Structural checks on computed optimal pairs: exact discrete perturbation
//! bounds, sublevel nesting, symmetry metrics, convexity of the complement,
//! dumbbell lobe containment, free-boundary extraction with exceptional-set
//! estimation, and the measure-monotonicity probe.

mod base;
mod bounds;
mod convexity;
mod exceptional;
mod free_boundary;
mod lobes;
mod monotonic;
mod symmetry;

pub use base::{base_eigenpair, BaseEigenpair};
pub use bounds::{
    check_nesting, check_perturbation_bounds, level_set_duplicate_fraction, BoundReport,
    NestingReport,
};
pub use convexity::{convexity_check, ConvexityReport};
pub use exceptional::{estimate_exceptional_set, ExceptionalSetEstimate};
pub use free_boundary::{
    extract_free_boundary, extract_level_set, two_sided_fraction, FreeBoundary, Polyline,
};
pub use lobes::{lobe_containment, LobeReport};
pub use monotonic::{monotonicity_probe, MonotonicityReport, PairwiseContainment};
pub use symmetry::{
    annularity_check, reflection_score, symmetry_metrics, AnnularityReport, Axis, SymmetryReport,
    ANGULAR_BINS, FOURIER_MODES,
};
