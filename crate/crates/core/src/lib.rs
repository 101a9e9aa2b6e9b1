//! Solver and verification toolkit for the composite-membrane eigenvalue
//! optimization problem: minimize the first Dirichlet eigenvalue of
//! −Δ + αχ_D over subsets D ⊂ Ω of prescribed measure, then check the
//! structural properties of the computed optimal pairs (sublevel structure,
//! perturbation bounds, symmetry, free-boundary regularity proxies).
//!
//! Pipeline: [`geometry::rasterize`] a shape onto a cell grid,
//! [`discretization::assemble`] the 5-point operator,
//! [`eigensolver::smallest_eigenpair`] for the eigenvalue,
//! [`optimizer::multistart`] for the rearrangement minimization, and the
//! [`analysis`] module for the certification checks.

pub mod analysis;
pub mod discretization;
pub mod dist;
pub mod eigensolver;
pub mod error;
pub mod geometry;
pub mod optimizer;
pub mod pgm;
pub mod rng;

pub use discretization::{assemble, quadrature_inner, rayleigh_quotient, Field, SparseOperator};
pub use eigensolver::{second_eigenvalue, smallest_eigenpair, EigenResult};
pub use error::{Error, Result};
pub use geometry::{rasterize, DomainSpec, GridDomain, RegionLabel};
pub use optimizer::{
    boundary_layer_init, find_alpha_bar, multistart, optimize, optimize_radial, select_sublevel,
    AlphaBarResult, Configuration, MultistartOptions, OptimizationResult, SolveOptions,
};
