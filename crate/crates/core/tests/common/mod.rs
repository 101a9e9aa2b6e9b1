//! Self-contained oracles for integration tests: a dense Jacobi eigenvalue
//! solver and a brute-force subset enumerator, both independent of the
//! library's solver path. The dense operator is assembled here from first
//! principles (5-point stencil over a full rectangle of cells, row-major).

/// Full spectrum of a dense symmetric matrix by cyclic Jacobi rotations,
/// ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    if n == 1 {
        return vec![a[0][0]];
    }
    let scale: f64 = (0..n)
        .map(|i| a[i][i].abs())
        .fold(1e-300, f64::max);
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[i][j].abs());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}

/// Dense 5-point operator for −Δ + αχ_D on a full nx × ny rectangle of
/// cells (row-major indexing iy·nx + ix), Dirichlet via dropped exterior
/// couplings.
pub fn dense_grid_operator(
    nx: usize,
    ny: usize,
    h: f64,
    d_cells: &[usize],
    alpha: f64,
) -> Vec<Vec<f64>> {
    let n = nx * ny;
    let inv_h2 = 1.0 / (h * h);
    let mut a = vec![vec![0.0; n]; n];
    let in_d = {
        let mut m = vec![false; n];
        for &i in d_cells {
            m[i] = true;
        }
        m
    };
    for iy in 0..ny {
        for ix in 0..nx {
            let i = iy * nx + ix;
            a[i][i] = 4.0 * inv_h2 + if in_d[i] { alpha } else { 0.0 };
            if ix > 0 {
                a[i][i - 1] = -inv_h2;
            }
            if ix + 1 < nx {
                a[i][i + 1] = -inv_h2;
            }
            if iy > 0 {
                a[i][i - nx] = -inv_h2;
            }
            if iy + 1 < ny {
                a[i][i + nx] = -inv_h2;
            }
        }
    }
    a
}

/// Smallest eigenvalue of the dense grid operator for one subset.
pub fn dense_min_eigenvalue(nx: usize, ny: usize, h: f64, d_cells: &[usize], alpha: f64) -> f64 {
    jacobi_eigenvalues(dense_grid_operator(nx, ny, h, d_cells, alpha))[0]
}

/// Visits every k-subset of 0..n in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        f(&subset);
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if subset[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        subset[i] += 1;
        for j in (i + 1)..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Exhaustive minimum of λ₁(α, D) over all k-subsets of the nx × ny grid.
pub fn brute_force_min_lambda(
    nx: usize,
    ny: usize,
    h: f64,
    alpha: f64,
    k: usize,
) -> (f64, Vec<usize>) {
    let mut best = (f64::INFINITY, Vec::new());
    for_each_subset(nx * ny, k, |subset| {
        let lam = dense_min_eigenvalue(nx, ny, h, subset, alpha);
        if lam < best.0 {
            best = (lam, subset.to_vec());
        }
    });
    best
}
