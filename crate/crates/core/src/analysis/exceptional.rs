use crate::analysis::free_boundary::FreeBoundary;
use crate::dist::edt_squared;
use crate::error::{Error, Result};
use crate::geometry::GridDomain;

/// Interior-sphere scale classification of free-boundary vertices.
///
/// For each ε, K_ε collects grid cells whose distance to the boundary is ε
/// (within h/2), and F_ε the vertices within ε + h of K_ε — the vertices
/// admitting a tangent sphere at that scale. Vertices in no F_ε are the
/// exceptional-point candidates.
#[derive(Debug, Clone)]
pub struct ExceptionalSetEstimate {
    /// Requested levels after quantization to multiples of h, descending.
    pub eps_levels: Vec<f64>,
    /// Per level, the (segment, vertex) indices in F_ε.
    pub f_eps: Vec<Vec<(usize, usize)>>,
    /// Vertices in no F_ε.
    pub e_proxy: Vec<(usize, usize)>,
    /// F_{ε₁} ⊆ F_{ε₂} for ε₁ > ε₂ across consecutive levels.
    pub nesting_ok: bool,
}

/// Builds the K_ε / F_ε scale sets from an exact distance transform of the
/// boundary and flags vertices failing every scale.
pub fn estimate_exceptional_set(
    fb: &FreeBoundary,
    domain: &GridDomain,
    eps_levels: &[f64],
) -> Result<ExceptionalSetEstimate> {
    if fb.is_empty() {
        return Err(Error::InvalidSpec("empty free boundary".to_string()));
    }
    if eps_levels.is_empty() {
        return Err(Error::InvalidSpec("no epsilon levels given".to_string()));
    }
    let h = domain.h();
    let mut quantized = Vec::with_capacity(eps_levels.len());
    for &eps in eps_levels {
        let q = (eps / h).round() * h;
        if q < 2.0 * h - 1e-12 * h {
            return Err(Error::UnderResolvedEps { eps, h });
        }
        quantized.push(q);
    }
    for w in quantized.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::InvalidSpec(
                "epsilon levels must be strictly descending".to_string(),
            ));
        }
    }

    // distance transform from the cells nearest each boundary vertex
    let (nx, ny) = (domain.nx(), domain.ny());
    let (ox, oy) = domain.origin();
    let mut seed = vec![false; nx * ny];
    for poly in &fb.segments {
        for &(x, y) in &poly.vertices {
            let ix = (((x - ox) / h - 0.5).round().max(0.0) as usize).min(nx - 1);
            let iy = (((y - oy) / h - 0.5).round().max(0.0) as usize).min(ny - 1);
            seed[iy * nx + ix] = true;
        }
    }
    let d2 = edt_squared(&seed, nx, ny);

    let vertices: Vec<(usize, usize, (f64, f64))> = fb
        .segments
        .iter()
        .enumerate()
        .flat_map(|(s, poly)| {
            poly.vertices
                .iter()
                .enumerate()
                .map(move |(v, &p)| (s, v, p))
        })
        .collect();

    let mut f_eps: Vec<Vec<(usize, usize)>> = Vec::with_capacity(quantized.len());
    let mut in_some: Vec<bool> = vec![false; vertices.len()];
    let mut membership: Vec<Vec<bool>> = Vec::with_capacity(quantized.len());
    for &eps in &quantized {
        // K_eps: interior cells at distance eps (within h/2) of the boundary
        let mut k_cells: Vec<(f64, f64)> = Vec::new();
        for i in 0..domain.n_cells() {
            let (ix, iy) = domain.cell_grid(i);
            let dist = d2[iy * nx + ix].sqrt() * h;
            if (dist - eps).abs() <= 0.5 * h {
                k_cells.push(domain.center(i));
            }
        }
        let reach = eps + h;
        let mut members = Vec::new();
        let mut flags = vec![false; vertices.len()];
        for (vi, &(s, v, (x, y))) in vertices.iter().enumerate() {
            let mut best = f64::INFINITY;
            for &(cx, cy) in &k_cells {
                let d = (cx - x).hypot(cy - y);
                if d < best {
                    best = d;
                    if best <= reach {
                        break;
                    }
                }
            }
            if best <= reach {
                members.push((s, v));
                flags[vi] = true;
                in_some[vi] = true;
            }
        }
        membership.push(flags);
        f_eps.push(members);
    }
    let mut nesting_ok = true;
    for w in membership.windows(2) {
        // coarser scale first: membership there implies membership at the
        // finer scale
        for (a, b) in w[0].iter().zip(&w[1]) {
            if *a && !*b {
                nesting_ok = false;
            }
        }
    }
    let e_proxy = vertices
        .iter()
        .enumerate()
        .filter(|(vi, _)| !in_some[*vi])
        .map(|(_, &(s, v, _))| (s, v))
        .collect();
    Ok(ExceptionalSetEstimate {
        eps_levels: quantized,
        f_eps,
        e_proxy,
        nesting_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::free_boundary::extract_level_set;
    use crate::discretization::Field;
    use crate::geometry::{rasterize, DomainSpec};
    use std::sync::Arc;

    #[test]
    fn smooth_circle_has_empty_exceptional_set() {
        let h = 1.0 / 32.0;
        let d = Arc::new(
            rasterize(
                &DomainSpec::Rectangle {
                    width: 2.0,
                    height: 2.0,
                },
                h,
            )
            .unwrap(),
        );
        let u = Field::from_fn(d.clone(), |x, y| {
            1.0 - ((x - 1.0).powi(2) + (y - 1.0).powi(2))
        });
        let fb = extract_level_set(&u, 0.64, 0.05); // circle of radius 0.6
        let est = estimate_exceptional_set(&fb, &d, &[8.0 * h, 4.0 * h, 2.0 * h]).unwrap();
        assert!(est.nesting_ok);
        assert!(est.e_proxy.is_empty(), "{} stragglers", est.e_proxy.len());
    }

    #[test]
    fn saddle_crossing_lands_in_e_proxy() {
        let h = 1.0 / 32.0;
        let d = Arc::new(
            rasterize(
                &DomainSpec::Rectangle {
                    width: 2.0,
                    height: 2.0,
                },
                h,
            )
            .unwrap(),
        );
        let u = Field::from_fn(d.clone(), |x, y| (x - 1.0) * (y - 1.0));
        let fb = extract_level_set(&u, 0.0, 0.05);
        // scales coarse enough that the crossing fails both
        let est = estimate_exceptional_set(&fb, &d, &[8.0 * h, 6.0 * h]).unwrap();
        assert!(est.nesting_ok);
        assert!(!est.e_proxy.is_empty());
        let near_crossing = est.e_proxy.iter().any(|&(s, v)| {
            let (x, y) = fb.segments[s].vertices[v];
            (x - 1.0).hypot(y - 1.0) < 0.2
        });
        assert!(near_crossing, "e_proxy misses the saddle point");
    }

    #[test]
    fn under_resolved_levels_error() {
        let h = 1.0 / 16.0;
        let d = Arc::new(
            rasterize(
                &DomainSpec::Rectangle {
                    width: 2.0,
                    height: 2.0,
                },
                h,
            )
            .unwrap(),
        );
        let u = Field::from_fn(d.clone(), |x, y| {
            1.0 - ((x - 1.0).powi(2) + (y - 1.0).powi(2))
        });
        let fb = extract_level_set(&u, 0.5, 0.05);
        assert!(matches!(
            estimate_exceptional_set(&fb, &d, &[0.5 * h]),
            Err(Error::UnderResolvedEps { .. })
        ));
    }
}
