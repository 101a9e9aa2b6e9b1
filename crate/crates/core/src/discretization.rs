//! Discrete operator assembly and grid quadrature.
//!
//! The operator for −Δ + αχ_D uses the 5-point stencil on the cell grid:
//! each row carries 4/h² + α·χ_D(i) on the diagonal and −1/h² per interior
//! neighbor. Exterior neighbors contribute nothing, which imposes the zero
//! Dirichlet condition.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::GridDomain;

/// A scalar field sampled at interior cell centers.
#[derive(Debug, Clone)]
pub struct Field {
    domain: Arc<GridDomain>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(domain: Arc<GridDomain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.n_cells() {
            return Err(Error::DomainMismatch);
        }
        Ok(Field { domain, values })
    }

    pub fn constant(domain: Arc<GridDomain>, value: f64) -> Self {
        let n = domain.n_cells();
        Field {
            domain,
            values: vec![value; n],
        }
    }

    /// Builds a field by evaluating `f` at each interior cell center.
    pub fn from_fn(domain: Arc<GridDomain>, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let values = (0..domain.n_cells())
            .map(|i| {
                let (x, y) = domain.center(i);
                f(x, y)
            })
            .collect();
        Field { domain, values }
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Max-norm of the pointwise difference.
    pub fn linf_diff(&self, other: &Field) -> Result<f64> {
        check_same_domain(self, other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

fn check_same_domain(f: &Field, g: &Field) -> Result<()> {
    if Arc::ptr_eq(&f.domain, &g.domain) || f.domain == g.domain {
        Ok(())
    } else {
        Err(Error::DomainMismatch)
    }
}

/// Discrete inner product h²·Σ f_i g_i, the grid analog of ∫_Ω f g.
pub fn quadrature_inner(f: &Field, g: &Field) -> Result<f64> {
    check_same_domain(f, g)?;
    let h = f.domain.h();
    let mut sum = 0.0;
    for (a, b) in f.values.iter().zip(&g.values) {
        sum += a * b;
    }
    Ok(h * h * sum)
}

/// Symmetric positive definite sparse operator in CSR form (both triangles
/// stored).
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    h: f64,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    gershgorin_upper: f64,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Largest Gershgorin disc edge, an upper bound on the spectrum.
    pub fn gershgorin_upper(&self) -> f64 {
        self.gershgorin_upper
    }

    /// y = A·x, sequential.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for row in 0..self.dim {
            let mut acc = 0.0;
            for k in self.row_offsets[row]..self.row_offsets[row + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            y[row] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut diag = vec![0.0; self.dim];
        for row in 0..self.dim {
            for k in self.row_offsets[row]..self.row_offsets[row + 1] {
                if self.col_indices[k] == row {
                    diag[row] = self.values[k];
                }
            }
        }
        diag
    }

    /// Builds an operator from (row, col, value) triplets; intended for
    /// synthetic operators in tests and diagnostics. Entries must describe a
    /// symmetric matrix exactly.
    pub fn from_triplets(dim: usize, h: f64, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut dense = vec![0.0; dim * dim];
        for &(i, j, v) in entries {
            if i >= dim || j >= dim {
                return Err(Error::SubsetOutOfDomain {
                    index: i.max(j),
                    n: dim,
                });
            }
            dense[i * dim + j] = v;
        }
        for i in 0..dim {
            for j in 0..i {
                if dense[i * dim + j] != dense[j * dim + i] {
                    return Err(Error::InvalidSpec(format!(
                        "asymmetric entries at ({i}, {j})"
                    )));
                }
            }
        }
        let mut row_offsets = vec![0usize];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                let v = dense[i * dim + j];
                if v != 0.0 || i == j {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        let gershgorin_upper = gershgorin_bound(&row_offsets, &col_indices, &values, dim).1;
        Ok(SparseOperator {
            dim,
            h,
            row_offsets,
            col_indices,
            values,
            gershgorin_upper,
        })
    }
}

fn gershgorin_bound(
    row_offsets: &[usize],
    col_indices: &[usize],
    values: &[f64],
    dim: usize,
) -> (f64, f64) {
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for row in 0..dim {
        let mut diag = 0.0;
        let mut radius = 0.0;
        for k in row_offsets[row]..row_offsets[row + 1] {
            if col_indices[k] == row {
                diag = values[k];
            } else {
                radius += values[k].abs();
            }
        }
        lower = lower.min(diag - radius);
        upper = upper.max(diag + radius);
    }
    (lower, upper)
}

/// Assembles the 5-point operator for −Δ + αχ_D on the grid domain.
///
/// `d_cells` lists the interior cell indices of D (empty slice for D = ∅).
pub fn assemble(domain: &Arc<GridDomain>, d_cells: &[usize], alpha: f64) -> Result<SparseOperator> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidSpec(format!(
            "potential height must be finite and >= 0, got {alpha}"
        )));
    }
    let n = domain.n_cells();
    let mut in_d = vec![false; n];
    for &i in d_cells {
        if i >= n {
            return Err(Error::SubsetOutOfDomain { index: i, n });
        }
        in_d[i] = true;
    }
    let h = domain.h();
    let inv_h2 = 1.0 / (h * h);
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(5 * n);
    let mut values = Vec::with_capacity(5 * n);
    row_offsets.push(0);
    for i in 0..n {
        let [west, east, south, north] = domain.neighbors(i);
        // columns ascend under the image-order cell enumeration:
        // N < W < diag < E < S
        if let Some(j) = north {
            col_indices.push(j);
            values.push(-inv_h2);
        }
        if let Some(j) = west {
            col_indices.push(j);
            values.push(-inv_h2);
        }
        col_indices.push(i);
        values.push(4.0 * inv_h2 + if in_d[i] { alpha } else { 0.0 });
        if let Some(j) = east {
            col_indices.push(j);
            values.push(-inv_h2);
        }
        if let Some(j) = south {
            col_indices.push(j);
            values.push(-inv_h2);
        }
        row_offsets.push(col_indices.len());
    }
    let (lower, upper) = gershgorin_bound(&row_offsets, &col_indices, &values, n);
    // spectrum ⊆ [0, 8/h² + α] for every assembled operator
    assert!(lower >= -1e-9 * upper.abs(), "Gershgorin lower bound {lower} < 0");
    assert!(
        upper <= 8.0 * inv_h2 + alpha + 1e-9 * (8.0 * inv_h2 + alpha),
        "Gershgorin upper bound {upper} exceeds 8/h^2 + alpha"
    );
    Ok(SparseOperator {
        dim: n,
        h,
        row_offsets,
        col_indices,
        values,
        gershgorin_upper: upper,
    })
}

/// Rayleigh quotient (fᵀAf)/(fᵀf); the quadrature weights cancel.
pub fn rayleigh_quotient(op: &SparseOperator, f: &Field) -> Result<f64> {
    if f.len() != op.dim() {
        return Err(Error::DomainMismatch);
    }
    rayleigh_quotient_raw(op, f.values())
}

pub(crate) fn rayleigh_quotient_raw(op: &SparseOperator, x: &[f64]) -> Result<f64> {
    let mut ax = vec![0.0; op.dim()];
    op.matvec(x, &mut ax);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..op.dim() {
        num += x[i] * ax[i];
        den += x[i] * x[i];
    }
    if den == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, DomainSpec};
    use approx::assert_abs_diff_eq;

    fn square_domain(side: f64, h: f64) -> Arc<GridDomain> {
        Arc::new(
            rasterize(
                &DomainSpec::Rectangle {
                    width: side,
                    height: side,
                },
                h,
            )
            .unwrap(),
        )
    }

    fn two_cell_domain() -> Arc<GridDomain> {
        Arc::new(
            rasterize(
                &DomainSpec::Rectangle {
                    width: 2.0,
                    height: 1.0,
                },
                1.0,
            )
            .unwrap(),
        )
    }

    fn dense(op: &SparseOperator) -> Vec<Vec<f64>> {
        let n = op.dim();
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let mut col = vec![0.0; n];
            op.matvec(&e, &mut col);
            for j in 0..n {
                rows[j][i] = col[j];
            }
        }
        rows
    }

    #[test]
    fn single_cell_matrix() {
        let d = square_domain(1.0, 0.5); // one cell at h = 0.5? side 1, h = 0.5 -> 4 cells
        assert_eq!(d.n_cells(), 4);
        let d1 = square_domain(0.5, 0.5);
        assert_eq!(d1.n_cells(), 1);
        let op = assemble(&d1, &[], 0.0).unwrap();
        assert_eq!(dense(&op), vec![vec![16.0]]);
        let op = assemble(&d1, &[0], 7.0).unwrap();
        assert_eq!(dense(&op), vec![vec![23.0]]);
    }

    #[test]
    fn two_adjacent_cells() {
        let d = two_cell_domain();
        assert_eq!(d.n_cells(), 2);
        let op = assemble(&d, &[], 0.0).unwrap();
        assert_eq!(dense(&op), vec![vec![4.0, -1.0], vec![-1.0, 4.0]]);
    }

    #[test]
    fn d_referencing_exterior_errors() {
        let d = two_cell_domain();
        assert!(matches!(
            assemble(&d, &[5], 1.0),
            Err(Error::SubsetOutOfDomain { index: 5, n: 2 })
        ));
    }

    #[test]
    fn assemble_with_zero_alpha_ignores_d() {
        let d = square_domain(1.0, 0.25);
        let a = assemble(&d, &[], 0.0).unwrap();
        let b = assemble(&d, &[0, 5, 7], 0.0).unwrap();
        assert_eq!(dense(&a), dense(&b));
    }

    #[test]
    fn quadrature_examples() {
        let d = square_domain(1.0, 0.25);
        let f = Field::constant(d.clone(), 2.0);
        assert_abs_diff_eq!(quadrature_inner(&f, &f).unwrap(), 4.0);
        // disjoint supports
        let mut a = vec![0.0; d.n_cells()];
        let mut b = vec![0.0; d.n_cells()];
        a[0] = 3.0;
        b[1] = 5.0;
        let fa = Field::new(d.clone(), a).unwrap();
        let fb = Field::new(d.clone(), b).unwrap();
        assert_eq!(quadrature_inner(&fa, &fb).unwrap(), 0.0);
    }

    #[test]
    fn quadrature_rejects_mismatched_domains() {
        let d1 = square_domain(1.0, 0.25);
        let d2 = square_domain(1.0, 0.5);
        let f = Field::constant(d1, 1.0);
        let g = Field::constant(d2, 1.0);
        assert!(matches!(
            quadrature_inner(&f, &g),
            Err(Error::DomainMismatch)
        ));
    }

    #[test]
    fn rayleigh_examples() {
        let d = two_cell_domain();
        let op = assemble(&d, &[], 0.0).unwrap();
        let f = Field::new(d.clone(), vec![1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(rayleigh_quotient(&op, &f).unwrap(), 3.0);
        let g = Field::new(d.clone(), vec![1.0, -1.0]).unwrap();
        assert_abs_diff_eq!(rayleigh_quotient(&op, &g).unwrap(), 5.0);
        let z = Field::constant(d, 0.0);
        assert!(matches!(
            rayleigh_quotient(&op, &z),
            Err(Error::ZeroField)
        ));
    }

    #[test]
    fn gershgorin_bound_is_cached() {
        let d = square_domain(1.0, 0.25);
        let op = assemble(&d, &[0, 1], 3.0).unwrap();
        let h2 = 0.25f64 * 0.25;
        assert!(op.gershgorin_upper() <= 8.0 / h2 + 3.0 + 1e-9);
    }

    #[test]
    fn from_triplets_requires_symmetry() {
        assert!(SparseOperator::from_triplets(2, 1.0, &[(0, 1, 1.0)]).is_err());
        let op =
            SparseOperator::from_triplets(2, 1.0, &[(0, 0, 1.0), (1, 1, 2.0)]).unwrap();
        assert_eq!(op.dim(), 2);
    }
}
