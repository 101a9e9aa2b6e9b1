use std::collections::HashMap;

use crate::discretization::Field;
use crate::error::{Error, Result};
use crate::optimizer::OptimizationResult;

/// Polyline approximation of the level set {u = t}.
///
/// Vertices sit on grid-cell edges between a node with u > t and one with
/// u ≤ t (the latter possibly an exact tie), positions from the bilinear
/// interpolant. Contours of a proper level are closed by construction.
#[derive(Debug, Clone)]
pub struct FreeBoundary {
    pub level: f64,
    pub segments: Vec<Polyline>,
}

#[derive(Debug, Clone)]
pub struct Polyline {
    pub vertices: Vec<(f64, f64)>,
    /// |∇u| per vertex: central differences at nodes, interpolated along the
    /// crossing edge.
    pub grad_mag: Vec<f64>,
    /// Gradient below eps_grad × (max |∇u| over the whole boundary).
    pub flagged: Vec<bool>,
    pub closed: bool,
}

impl FreeBoundary {
    pub fn vertex_count(&self) -> usize {
        self.segments.iter().map(|p| p.vertices.len()).sum()
    }

    pub fn flagged_count(&self) -> usize {
        self.segments
            .iter()
            .map(|p| p.flagged.iter().filter(|&&f| f).count())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Marching-squares edge identifier: the edge from node (x, y) to
/// (x+1, y) when horizontal, else to (x, y+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct EdgeKey {
    x: u32,
    y: u32,
    horizontal: bool,
}

#[derive(Debug, Clone, Copy)]
struct VertexInfo {
    pos: (f64, f64),
    grad: (f64, f64),
}

/// Extracts the free boundary {u = t} of a converged run.
pub fn extract_free_boundary(result: &OptimizationResult, eps_grad: f64) -> Result<FreeBoundary> {
    let t = result.config.threshold().ok_or(Error::NoThreshold)?;
    Ok(extract_level_set(&result.u, t, eps_grad))
}

/// Marching squares over the bilinear interpolant of `u` at `level`.
///
/// Nodes are cell centers; exterior nodes carry the Dirichlet value 0. The
/// saddle ambiguity resolves by the interpolant's center value, and segments
/// are directed with the {u > level} side on the left. Levels outside
/// (min u, max u) yield an empty boundary.
pub fn extract_level_set(u: &Field, level: f64, eps_grad: f64) -> FreeBoundary {
    let domain = u.domain();
    let (nx, ny) = (domain.nx(), domain.ny());
    let h = domain.h();
    let (ox, oy) = domain.origin();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in u.values() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(lo < level && level < hi) {
        return FreeBoundary {
            level,
            segments: Vec::new(),
        };
    }

    // node values (0 outside the interior)
    let mut val = vec![0.0; nx * ny];
    for i in 0..domain.n_cells() {
        let (ix, iy) = domain.cell_grid(i);
        val[iy * nx + ix] = u.values()[i];
    }
    let value_at = |ix: i64, iy: i64| -> f64 {
        if ix < 0 || iy < 0 || ix >= nx as i64 || iy >= ny as i64 {
            0.0
        } else {
            val[iy as usize * nx + ix as usize]
        }
    };
    // central-difference node gradients
    let mut gx = vec![0.0; nx * ny];
    let mut gy = vec![0.0; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let g = iy * nx + ix;
            gx[g] = (value_at(ix as i64 + 1, iy as i64) - value_at(ix as i64 - 1, iy as i64))
                / (2.0 * h);
            gy[g] = (value_at(ix as i64, iy as i64 + 1) - value_at(ix as i64, iy as i64 - 1))
                / (2.0 * h);
        }
    }

    let node_pos = |x: u32, y: u32| -> (f64, f64) {
        (
            ox + (x as f64 + 0.5) * h,
            oy + (y as f64 + 0.5) * h,
        )
    };
    let mut vertex_info: HashMap<EdgeKey, VertexInfo> = HashMap::new();
    let mut info_for = |key: EdgeKey| -> VertexInfo {
        if let Some(&info) = vertex_info.get(&key) {
            return info;
        }
        let (ax, ay) = (key.x, key.y);
        let (bx, by) = if key.horizontal {
            (key.x + 1, key.y)
        } else {
            (key.x, key.y + 1)
        };
        let va = val[ay as usize * nx + ax as usize];
        let vb = val[by as usize * nx + bx as usize];
        let s = (level - va) / (vb - va);
        let pa = node_pos(ax, ay);
        let pb = node_pos(bx, by);
        let ga = ay as usize * nx + ax as usize;
        let gb = by as usize * nx + bx as usize;
        let info = VertexInfo {
            pos: (pa.0 + s * (pb.0 - pa.0), pa.1 + s * (pb.1 - pa.1)),
            grad: (
                gx[ga] + s * (gx[gb] - gx[ga]),
                gy[ga] + s * (gy[gb] - gy[ga]),
            ),
        };
        vertex_info.insert(key, info);
        info
    };

    // corners 0..4 = bl, br, tr, tl; edges 0..4 = bottom, right, top, left
    const CORNER_EDGES: [[usize; 2]; 4] = [[0, 3], [0, 1], [1, 2], [2, 3]];
    struct Seg {
        from: EdgeKey,
        to: EdgeKey,
    }
    let mut segments: Vec<Seg> = Vec::new();
    for iy in 0..ny - 1 {
        for ix in 0..nx - 1 {
            let corner_vals = [
                val[iy * nx + ix],
                val[iy * nx + ix + 1],
                val[(iy + 1) * nx + ix + 1],
                val[(iy + 1) * nx + ix],
            ];
            let above: Vec<bool> = corner_vals.iter().map(|&v| v > level).collect();
            let count = above.iter().filter(|&&a| a).count();
            if count == 0 || count == 4 {
                continue;
            }
            let (x, y) = (ix as u32, iy as u32);
            let edge_key = |e: usize| -> EdgeKey {
                match e {
                    0 => EdgeKey { x, y, horizontal: true },
                    1 => EdgeKey { x: x + 1, y, horizontal: false },
                    2 => EdgeKey { x, y: y + 1, horizontal: true },
                    _ => EdgeKey { x, y, horizontal: false },
                }
            };
            let corner_pos = |c: usize| -> (f64, f64) {
                match c {
                    0 => node_pos(x, y),
                    1 => node_pos(x + 1, y),
                    2 => node_pos(x + 1, y + 1),
                    _ => node_pos(x, y + 1),
                }
            };
            let emit = |e1: usize, e2: usize, orient_corner: usize,
                            info_for: &mut dyn FnMut(EdgeKey) -> VertexInfo,
                            segments: &mut Vec<Seg>| {
                let k1 = edge_key(e1);
                let k2 = edge_key(e2);
                let p1 = info_for(k1).pos;
                let p2 = info_for(k2).pos;
                let c = corner_pos(orient_corner);
                let orient =
                    (p2.0 - p1.0) * (c.1 - p1.1) - (p2.1 - p1.1) * (c.0 - p1.0);
                if orient >= 0.0 {
                    segments.push(Seg { from: k1, to: k2 });
                } else {
                    segments.push(Seg { from: k2, to: k1 });
                }
            };
            match count {
                1 => {
                    let c = above.iter().position(|&a| a).unwrap();
                    emit(
                        CORNER_EDGES[c][0],
                        CORNER_EDGES[c][1],
                        c,
                        &mut info_for,
                        &mut segments,
                    );
                }
                3 => {
                    let c = above.iter().position(|&a| !a).unwrap();
                    emit(
                        CORNER_EDGES[c][0],
                        CORNER_EDGES[c][1],
                        (c + 1) % 4,
                        &mut info_for,
                        &mut segments,
                    );
                }
                2 if above[0] == above[2] => {
                    // diagonal saddle; the interpolant's center value decides
                    let center: f64 = corner_vals.iter().sum::<f64>() / 4.0;
                    let center_above = center > level;
                    let cut: [usize; 2] = if above[0] {
                        // bl, tr above
                        if center_above { [1, 3] } else { [0, 2] }
                    } else {
                        // br, tl above
                        if center_above { [0, 2] } else { [1, 3] }
                    };
                    for &c in &cut {
                        let orient = if above[c] { c } else { (c + 1) % 4 };
                        emit(
                            CORNER_EDGES[c][0],
                            CORNER_EDGES[c][1],
                            orient,
                            &mut info_for,
                            &mut segments,
                        );
                    }
                }
                _ => {
                    // two adjacent corners above: the segment joins the two
                    // mixed edges
                    let (e1, e2, orient) = if above[0] && above[1] {
                        (3usize, 1usize, 0usize)
                    } else if above[1] && above[2] {
                        (0, 2, 1)
                    } else if above[2] && above[3] {
                        (3, 1, 2)
                    } else {
                        (0, 2, 0)
                    };
                    emit(e1, e2, orient, &mut info_for, &mut segments);
                }
            }
        }
    }

    // chain directed segments into polylines (edge keys make the matching
    // exact, no float comparisons)
    let mut next_by_from: HashMap<EdgeKey, usize> = HashMap::with_capacity(segments.len());
    for (i, seg) in segments.iter().enumerate() {
        let prev = next_by_from.insert(seg.from, i);
        debug_assert!(prev.is_none(), "edge emitted twice as a segment start");
    }
    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    let mut all_grads: Vec<f64> = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        let mut keys = Vec::new();
        let mut cur = start;
        let closed;
        loop {
            used[cur] = true;
            keys.push(segments[cur].from);
            match next_by_from.get(&segments[cur].to) {
                Some(&next) if next == start => {
                    closed = true;
                    break;
                }
                Some(&next) if !used[next] => cur = next,
                _ => {
                    keys.push(segments[cur].to);
                    closed = false;
                    break;
                }
            }
        }
        let infos: Vec<VertexInfo> = keys.iter().map(|&k| info_for(k)).collect();
        let grads: Vec<f64> = infos.iter().map(|v| v.grad.0.hypot(v.grad.1)).collect();
        all_grads.extend(&grads);
        polylines.push(Polyline {
            vertices: infos.iter().map(|v| v.pos).collect(),
            grad_mag: grads,
            flagged: Vec::new(),
            closed,
        });
    }
    let gmax = all_grads.iter().cloned().fold(0.0, f64::max);
    let cutoff = eps_grad * gmax;
    for poly in &mut polylines {
        poly.flagged = poly.grad_mag.iter().map(|&g| g < cutoff).collect();
    }
    FreeBoundary {
        level,
        segments: polylines,
    }
}

/// Fraction of boundary vertices with at least one cell of {u > level} and
/// one of {u < level} within `radius`.
pub fn two_sided_fraction(fb: &FreeBoundary, u: &Field, radius: f64) -> f64 {
    let domain = u.domain();
    let h = domain.h();
    let (ox, oy) = domain.origin();
    let level = fb.level;
    let mut total = 0usize;
    let mut two_sided = 0usize;
    for poly in &fb.segments {
        for &(vx, vy) in &poly.vertices {
            total += 1;
            let ix0 = (((vx - radius - ox) / h) - 0.5).ceil().max(0.0) as usize;
            let iy0 = (((vy - radius - oy) / h) - 0.5).ceil().max(0.0) as usize;
            let ix1 = ((((vx + radius - ox) / h) - 0.5).floor() as usize).min(domain.nx() - 1);
            let iy1 = ((((vy + radius - oy) / h) - 0.5).floor() as usize).min(domain.ny() - 1);
            let mut has_above = false;
            let mut has_below = false;
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    let Some(cell) = domain.cell_at(ix, iy) else {
                        continue;
                    };
                    let (cx, cy) = domain.center(cell);
                    if (cx - vx).hypot(cy - vy) > radius {
                        continue;
                    }
                    let v = u.values()[cell];
                    if v > level {
                        has_above = true;
                    } else if v < level {
                        has_below = true;
                    }
                }
            }
            if has_above && has_below {
                two_sided += 1;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        two_sided as f64 / total as f64
    }
}
