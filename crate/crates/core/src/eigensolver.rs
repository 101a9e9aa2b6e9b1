//! Smallest eigenpair of the assembled operator by inverse power iteration
//! with conjugate-gradient inner solves.
//!
//! Only the extreme eigenpair is needed and the operator is well conditioned
//! at the grid sizes used here, so inverse iteration with inexact inner
//! solves beats a Krylov eigensolver on simplicity. The Perron structure of
//! the converged vector (strictly positive) doubles as a correctness check.

use std::sync::Arc;

use crate::discretization::{rayleigh_quotient_raw, Field, SparseOperator};
use crate::error::{Error, Result};
use crate::geometry::GridDomain;

/// Relative clamp threshold: components of the converged vector more negative
/// than −CLAMP_REL·max(u) signal a discretization bug rather than roundoff.
const CLAMP_REL: f64 = 1e-8;

/// Inner CG tolerance: 1e-2 × current eigenresidual, floored at 1e-12.
const CG_TOL_FACTOR: f64 = 1e-2;
const CG_TOL_FLOOR: f64 = 1e-12;

/// Converged smallest eigenpair.
///
/// `u` is normalized to ∫u² = 1 under grid quadrature, with the sign fixed so
/// Σu_i > 0 and roundoff-level negative components clamped to zero.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub lambda: f64,
    pub u: Field,
    /// ‖A·u − λu‖₂ / ‖u‖₂ at convergence.
    pub residual: f64,
    /// Outer sweeps performed.
    pub iterations: usize,
    /// λ₂ − λ₁ when the second eigenvalue has been computed.
    pub gap_estimate: Option<f64>,
}

fn euclid_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients for A·x = b, x₀ = 0.
fn pcg(op: &SparseOperator, diag: &[f64], b: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    let n = op.dim();
    let b_norm = euclid_norm(b);
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let target = rel_tol * b_norm;
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let max_iter = 4 * n + 200;
    for _ in 0..max_iter {
        if euclid_norm(&r) <= target {
            return Ok(x);
        }
        op.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if euclid_norm(&r) <= target {
        Ok(x)
    } else {
        Err(Error::InnerSolveStalled {
            residual: euclid_norm(&r) / b_norm,
        })
    }
}

fn residual_norm(op: &SparseOperator, x: &[f64], lambda: f64, work: &mut Vec<f64>) -> f64 {
    op.matvec(x, work);
    let mut num = 0.0;
    for i in 0..x.len() {
        let d = work[i] - lambda * x[i];
        num += d * d;
    }
    num.sqrt() / euclid_norm(x)
}

fn cg_tolerance(residual: f64) -> f64 {
    (CG_TOL_FACTOR * residual).clamp(CG_TOL_FLOOR, CG_TOL_FACTOR)
}

/// Computes the smallest eigenpair of a symmetric positive definite operator.
///
/// Inverse power iteration from the all-ones start vector; each sweep solves
/// op·x_{k+1} = x_k by CG and renormalizes under grid quadrature. Errors if
/// the residual has not reached `tol` after `max_iter` sweeps, or if the
/// converged vector has a negative component beyond the roundoff clamp.
pub fn smallest_eigenpair(
    op: &SparseOperator,
    domain: &Arc<GridDomain>,
    tol: f64,
    max_iter: usize,
) -> Result<EigenResult> {
    if op.dim() != domain.n_cells() || op.h().to_bits() != domain.h().to_bits() {
        return Err(Error::DomainMismatch);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidSpec(format!("tolerance must be positive, got {tol}")));
    }
    let n = op.dim();
    let h = op.h();
    let diag = op.diagonal();
    // all-ones start, normalized to h²·Σx² = 1
    let mut x = vec![1.0 / (h * (n as f64).sqrt()); n];
    let mut lambda = rayleigh_quotient_raw(op, &x)?;
    let mut work = vec![0.0; n];
    let mut residual = residual_norm(op, &x, lambda, &mut work);
    let mut iterations = 0;
    while residual > tol {
        if iterations >= max_iter {
            return Err(Error::NoConvergence {
                residual,
                iterations,
            });
        }
        let y = pcg(op, &diag, &x, cg_tolerance(residual))?;
        let norm_q = h * euclid_norm(&y);
        if norm_q == 0.0 {
            return Err(Error::InnerSolveStalled { residual });
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm_q;
        }
        lambda = rayleigh_quotient_raw(op, &x)?;
        residual = residual_norm(op, &x, lambda, &mut work);
        iterations += 1;
    }
    // Perron sign and positivity clamp
    if x.iter().sum::<f64>() < 0.0 {
        for v in &mut x {
            *v = -*v;
        }
    }
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = CLAMP_REL * max;
    for v in &mut x {
        if *v < 0.0 {
            if *v >= -threshold {
                *v = 0.0;
            } else {
                return Err(Error::NonPerron {
                    value: *v,
                    threshold,
                });
            }
        }
    }
    Ok(EigenResult {
        lambda,
        u: Field::new(domain.clone(), x)?,
        residual,
        iterations,
        gap_estimate: None,
    })
}

/// Second-smallest eigenvalue by inverse iteration deflated against the first
/// eigenvector (re-orthogonalized every sweep).
pub fn second_eigenvalue(
    op: &SparseOperator,
    first: &EigenResult,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let n = op.dim();
    if first.u.len() != n {
        return Err(Error::DomainMismatch);
    }
    let u = first.u.values();
    let uu = dot(u, u);
    let project = |x: &mut [f64]| {
        let c = dot(x, u) / uu;
        for (xi, ui) in x.iter_mut().zip(u) {
            *xi -= c * ui;
        }
    };
    // fixed pseudo-random start: a structured vector (such as all-ones) can
    // be exactly orthogonal to the second eigenspace on symmetric grids, and
    // inverse iteration would then lock onto a higher mode
    let mut rng = crate::rng::CounterRng::new(0x5eed_0002, 0);
    let mut x: Vec<f64> = (0..n)
        .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        .collect();
    project(&mut x);
    let norm = euclid_norm(&x);
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    for v in &mut x {
        *v /= norm;
    }
    let diag = op.diagonal();
    let mut lambda = rayleigh_quotient_raw(op, &x)?;
    let mut work = vec![0.0; n];
    let mut residual = residual_norm(op, &x, lambda, &mut work);
    let mut iterations = 0;
    while residual > tol {
        if iterations >= max_iter {
            return Err(Error::NoConvergence {
                residual,
                iterations,
            });
        }
        let mut y = pcg(op, &diag, &x, cg_tolerance(residual))?;
        project(&mut y);
        let norm = euclid_norm(&y);
        if norm == 0.0 {
            return Err(Error::InnerSolveStalled { residual });
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        lambda = rayleigh_quotient_raw(op, &x)?;
        residual = residual_norm(op, &x, lambda, &mut work);
        iterations += 1;
    }
    Ok(lambda)
}
