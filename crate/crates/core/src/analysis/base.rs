use std::sync::Arc;

use crate::discretization::{assemble, Field};
use crate::eigensolver::{second_eigenvalue, smallest_eigenpair};
use crate::error::Result;
use crate::geometry::GridDomain;
use crate::optimizer::SolveOptions;

/// First Dirichlet eigenpair of −Δ on Ω (the α = 0 problem), plus the
/// spectral gap used by the perturbation diagnostics.
#[derive(Debug, Clone)]
pub struct BaseEigenpair {
    pub mu1: f64,
    pub mu2: f64,
    /// μ₂ − μ₁.
    pub gap: f64,
    /// Positive, quadrature-normalized base eigenfunction ψ.
    pub psi: Field,
    /// max over cells of ψ.
    pub max_psi: f64,
    pub residual: f64,
}

pub fn base_eigenpair(domain: &Arc<GridDomain>, opts: &SolveOptions) -> Result<BaseEigenpair> {
    let op = assemble(domain, &[], 0.0)?;
    let first = smallest_eigenpair(&op, domain, opts.eigen_tol, opts.eigen_max_iter)?;
    // deflation against the inexact first vector floors the reachable
    // residual near first-residual x spectral spread
    let second_tol = (opts.eigen_tol * 100.0).max(1e-8);
    let mu2 = second_eigenvalue(&op, &first, second_tol, opts.eigen_max_iter)?;
    let max_psi = first.u.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(BaseEigenpair {
        mu1: first.lambda,
        mu2,
        gap: mu2 - first.lambda,
        max_psi,
        residual: first.residual,
        psi: first.u,
    })
}
