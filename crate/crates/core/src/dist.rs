//! Exact Euclidean distance transform on the cell grid (two-pass algorithm
//! of Felzenszwalb & Huttenlocher: 1-D lower-envelope transforms applied per
//! row, then per column).

use crate::error::Result;
use crate::geometry::GridDomain;

/// 1-D squared-distance transform: given f over positions 0..n, returns
/// d(p) = min_q (p - q)^2 + f(q). Positions with f = +inf carry no parabola.
fn dt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let Some(first) = f.iter().position(|x| x.is_finite()) else {
        d[..n].fill(f64::INFINITY);
        return;
    };
    // crossing abscissa of the parabolas rooted at q and p
    let sep = |q: usize, p: usize| -> f64 {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64))
    };
    let mut k = 0usize;
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in (first + 1)..n {
        if !f[q].is_finite() {
            continue;
        }
        let mut s = sep(q, v[k]);
        while s <= z[k] {
            k -= 1; // z[0] = -inf guards k = 0
            s = sep(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for p in 0..n {
        while z[k + 1] < p as f64 {
            k += 1;
        }
        let q = v[k];
        d[p] = ((p as f64 - q as f64) * (p as f64 - q as f64)) + f[q];
    }
}

/// Squared Euclidean distance (in cell units) from every grid cell to the
/// nearest seed cell center. Cells with no seed anywhere stay at infinity.
pub fn edt_squared(seed: &[bool], nx: usize, ny: usize) -> Vec<f64> {
    assert_eq!(seed.len(), nx * ny);
    let mut d = vec![f64::INFINITY; nx * ny];
    for (i, &s) in seed.iter().enumerate() {
        if s {
            d[i] = 0.0;
        }
    }
    let m = nx.max(ny);
    let mut f = vec![0.0; m];
    let mut out = vec![0.0; m];
    let mut v = vec![0usize; m];
    let mut z = vec![0.0; m + 1];
    // rows
    for iy in 0..ny {
        let row = &mut d[iy * nx..(iy + 1) * nx];
        f[..nx].copy_from_slice(row);
        dt_1d(&f[..nx], &mut out[..nx], &mut v, &mut z);
        row.copy_from_slice(&out[..nx]);
    }
    // columns
    for ix in 0..nx {
        for iy in 0..ny {
            f[iy] = d[iy * nx + ix];
        }
        dt_1d(&f[..ny], &mut out[..ny], &mut v, &mut z);
        for iy in 0..ny {
            d[iy * nx + ix] = out[iy];
        }
    }
    d
}

/// Euclidean distance (spatial units) from each interior cell to the nearest
/// exterior cell center. Finite for every interior cell thanks to the padded
/// bounding box.
pub fn distance_to_exterior(domain: &GridDomain) -> Result<Vec<f64>> {
    let (nx, ny) = (domain.nx(), domain.ny());
    let mut seed = vec![true; nx * ny];
    for i in 0..domain.n_cells() {
        let (ix, iy) = domain.cell_grid(i);
        seed[iy * nx + ix] = false;
    }
    let d2 = edt_squared(&seed, nx, ny);
    Ok((0..domain.n_cells())
        .map(|i| {
            let (ix, iy) = domain.cell_grid(i);
            d2[iy * nx + ix].sqrt() * domain.h()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, DomainSpec};
    use proptest::prelude::*;

    fn brute_force(seed: &[bool], nx: usize, ny: usize) -> Vec<f64> {
        let seeds: Vec<(usize, usize)> = (0..nx * ny)
            .filter(|&i| seed[i])
            .map(|i| (i % nx, i / nx))
            .collect();
        (0..nx * ny)
            .map(|i| {
                let (x, y) = (i % nx, i / nx);
                seeds
                    .iter()
                    .map(|&(sx, sy)| {
                        let dx = x as f64 - sx as f64;
                        let dy = y as f64 - sy as f64;
                        dx * dx + dy * dy
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn single_seed() {
        let mut seed = vec![false; 25];
        seed[12] = true; // center of 5x5
        let d = edt_squared(&seed, 5, 5);
        assert_eq!(d[12], 0.0);
        assert_eq!(d[0], 8.0); // corner: (2,2) away
        assert_eq!(d[13], 1.0);
    }

    #[test]
    fn boundary_cells_are_one_h_from_exterior() {
        let g = rasterize(
            &DomainSpec::Rectangle {
                width: 1.0,
                height: 1.0,
            },
            0.25,
        )
        .unwrap();
        let d = distance_to_exterior(&g).unwrap();
        for &i in &g.boundary_layer_cells() {
            assert_eq!(d[i], 0.25);
        }
        // interior 2x2 block sits two cells from the exterior
        let deep: Vec<f64> = (0..g.n_cells())
            .filter(|&i| {
                let (x, y) = g.center(i);
                (0.25..0.75).contains(&x) && (0.25..0.75).contains(&y)
            })
            .map(|i| d[i])
            .collect();
        assert!(deep.iter().all(|&v| v == 0.5));
    }

    proptest! {
        #[test]
        fn matches_brute_force(mask in proptest::collection::vec(any::<bool>(), 1..144)) {
            let nx = 12usize.min(mask.len());
            let ny = mask.len() / nx;
            if ny == 0 { return Ok(()); }
            let seed = &mask[..nx * ny];
            prop_assume!(seed.iter().any(|&s| s));
            let fast = edt_squared(seed, nx, ny);
            let slow = brute_force(seed, nx, ny);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }
}
