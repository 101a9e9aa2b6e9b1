use crate::error::Result;
use crate::geometry::GridDomain;
use crate::optimizer::Configuration;

/// Pixel-level convexity check of D^c.
#[derive(Debug, Clone)]
pub struct ConvexityReport {
    /// D cells lying inside the hull of D^c centers inset by one cell.
    pub violations: usize,
    pub hull_vertices: usize,
    pub convex: bool,
    /// Fewer than 3 complement cells: nothing to test.
    pub trivially_convex: bool,
}

/// Convex hull of D^c cell centers (monotone chain) with a one-cell inset to
/// absorb the rasterization staircase; a violation is an interior cell inside
/// the inset hull that is not in D^c.
pub fn convexity_check(config: &Configuration, domain: &GridDomain) -> Result<ConvexityReport> {
    let complement = config.complement(domain);
    if complement.len() < 3 {
        return Ok(ConvexityReport {
            violations: 0,
            hull_vertices: complement.len(),
            convex: true,
            trivially_convex: true,
        });
    }
    let points: Vec<(f64, f64)> = complement.iter().map(|&i| domain.center(i)).collect();
    let hull = convex_hull(&points);
    let mask = config.mask(domain.n_cells());
    let margin = domain.h();
    let mut violations = 0usize;
    for i in 0..domain.n_cells() {
        if !mask[i] {
            continue; // already in D^c
        }
        if inside_with_margin(&hull, domain.center(i), margin) {
            violations += 1;
        }
    }
    Ok(ConvexityReport {
        violations,
        hull_vertices: hull.len(),
        convex: violations == 0,
        trivially_convex: false,
    })
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Monotone chain; returns the hull counter-clockwise without repetition.
fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// True when `p` lies at least `margin` inside every hull edge.
fn inside_with_margin(hull: &[(f64, f64)], p: (f64, f64), margin: f64) -> bool {
    if hull.len() < 3 {
        return false;
    }
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        if len == 0.0 {
            continue;
        }
        // signed distance to the edge line, positive inside (hull is CCW)
        if cross(a, b, p) / len < margin {
            return false;
        }
    }
    true
}
