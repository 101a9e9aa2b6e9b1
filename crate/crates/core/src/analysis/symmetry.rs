use crate::error::{Error, Result};
use crate::geometry::GridDomain;
use crate::optimizer::Configuration;

/// Angular histogram resolution for the D^c mass distribution.
pub const ANGULAR_BINS: usize = 256;
/// Highest angular Fourier mode reported.
pub const FOURIER_MODES: usize = 32;

/// Grid-aligned reflection axis through a given center.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Reflect x across the vertical line x = center.x.
    Vertical,
    /// Reflect y across the horizontal line y = center.y.
    Horizontal,
}

/// Angular decomposition of the D^c mass and reflection asymmetry scores.
#[derive(Debug, Clone)]
pub struct SymmetryReport {
    /// |DFT| of the angular D^c mass histogram, modes 0..=32.
    pub fourier_amps: Vec<f64>,
    /// argmax over modes 1..=32 (ties to the lowest mode).
    pub dominant_n: usize,
    /// π / dominant_n.
    pub beta_estimate: f64,
    /// |D Δ reflect(D)|·h² per requested axis.
    pub reflection_scores: Vec<f64>,
}

/// Angular mass histogram and Fourier amplitudes of D^c about `center`.
pub fn symmetry_metrics(
    config: &Configuration,
    domain: &GridDomain,
    center: (f64, f64),
    axes: &[Axis],
) -> Result<SymmetryReport> {
    let complement = config.complement(domain);
    if complement.is_empty() {
        return Err(Error::EmptyComplement);
    }
    let mass = angular_mass(&complement, domain, center);
    let mut fourier_amps = Vec::with_capacity(FOURIER_MODES + 1);
    for mode in 0..=FOURIER_MODES {
        let mut re = 0.0;
        let mut im = 0.0;
        for (b, m) in mass.iter().enumerate() {
            let phase = 2.0 * std::f64::consts::PI * (mode * b) as f64 / ANGULAR_BINS as f64;
            re += m * phase.cos();
            im -= m * phase.sin();
        }
        fourier_amps.push(re.hypot(im));
    }
    let dominant_n = (1..=FOURIER_MODES)
        .max_by(|&a, &b| fourier_amps[a].total_cmp(&fourier_amps[b]).then(b.cmp(&a)))
        .unwrap();
    let reflection_scores = axes
        .iter()
        .map(|&axis| reflection_score(config.cells(), domain, center, axis))
        .collect();
    Ok(SymmetryReport {
        beta_estimate: std::f64::consts::PI / dominant_n as f64,
        fourier_amps,
        dominant_n,
        reflection_scores,
    })
}

/// h²-weighted histogram of cell centers over 256 angular bins about `center`.
pub fn angular_mass(cells: &[usize], domain: &GridDomain, center: (f64, f64)) -> Vec<f64> {
    let h2 = domain.h() * domain.h();
    let mut mass = vec![0.0; ANGULAR_BINS];
    for &i in cells {
        let (x, y) = domain.center(i);
        let theta = (y - center.1).atan2(x - center.0);
        let unit = (theta + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
        let bin = ((unit * ANGULAR_BINS as f64) as usize).min(ANGULAR_BINS - 1);
        mass[bin] += h2;
    }
    mass
}

/// |S Δ reflect(S)|·h² by nearest-cell reflection; zero exactly for masks
/// symmetric about a grid-aligned axis.
pub fn reflection_score(
    cells: &[usize],
    domain: &GridDomain,
    center: (f64, f64),
    axis: Axis,
) -> f64 {
    let (nx, ny) = (domain.nx(), domain.ny());
    let mut in_set = vec![false; nx * ny];
    for &i in cells {
        let (ix, iy) = domain.cell_grid(i);
        in_set[iy * nx + ix] = true;
    }
    let mut image = vec![false; nx * ny];
    let mut off_grid = 0usize;
    for &i in cells {
        let (x, y) = domain.center(i);
        let (rx, ry) = match axis {
            Axis::Vertical => (2.0 * center.0 - x, y),
            Axis::Horizontal => (x, 2.0 * center.1 - y),
        };
        let ix = ((rx - domain.origin().0) / domain.h() - 0.5).round();
        let iy = ((ry - domain.origin().1) / domain.h() - 0.5).round();
        if ix < 0.0 || iy < 0.0 || ix >= nx as f64 || iy >= ny as f64 {
            off_grid += 1;
        } else {
            image[iy as usize * nx + ix as usize] = true;
        }
    }
    let mut mismatches = off_grid;
    for g in 0..nx * ny {
        if in_set[g] != image[g] {
            mismatches += 1;
        }
    }
    mismatches as f64 * domain.h() * domain.h()
}

/// Annularity of D on a disk: per-sector inner radius of the D band.
#[derive(Debug, Clone)]
pub struct AnnularityReport {
    /// min |x − center| over D cells, per angular sector (NaN when empty).
    pub sector_inner_radius: Vec<f64>,
    /// max − min of the per-sector inner radii (over non-empty sectors).
    pub variation: f64,
    pub empty_sectors: usize,
    /// Whether every interior cell adjacent to the exterior lies in D.
    pub boundary_layer_in_d: bool,
}

pub fn annularity_check(
    config: &Configuration,
    domain: &GridDomain,
    center: (f64, f64),
    n_sectors: usize,
) -> Result<AnnularityReport> {
    if n_sectors == 0 {
        return Err(Error::InvalidSpec("need at least one sector".to_string()));
    }
    let mut inner = vec![f64::INFINITY; n_sectors];
    for &i in config.cells() {
        let (x, y) = domain.center(i);
        let (dx, dy) = (x - center.0, y - center.1);
        let r = dx.hypot(dy);
        let theta = dy.atan2(dx);
        let unit = (theta + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
        let s = ((unit * n_sectors as f64) as usize).min(n_sectors - 1);
        if r < inner[s] {
            inner[s] = r;
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut empty = 0usize;
    for v in &inner {
        if v.is_finite() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        } else {
            empty += 1;
        }
    }
    let mask = config.mask(domain.n_cells());
    let boundary_layer_in_d = domain.boundary_layer_cells().iter().all(|&i| mask[i]);
    Ok(AnnularityReport {
        sector_inner_radius: inner
            .into_iter()
            .map(|v| if v.is_finite() { v } else { f64::NAN })
            .collect(),
        variation: if hi >= lo { hi - lo } else { f64::NAN },
        empty_sectors: empty,
        boundary_layer_in_d,
    })
}
