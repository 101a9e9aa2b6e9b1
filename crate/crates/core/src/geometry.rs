//! Domain shapes and their rasterization onto a uniform cell-centered grid.
//!
//! A [`DomainSpec`] describes the continuous domain Ω; [`rasterize`] samples
//! it at cell centers to produce a [`GridDomain`]: an interior mask over a
//! padded bounding box, with a dense row-major enumeration of interior cells.
//! The homogeneous Dirichlet condition is imposed downstream by treating
//! exterior neighbors as zero.

use std::fs;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::pgm;

/// Lobe centers and radius of the dumbbell shape: two unit disks at (±2, 0)
/// joined by the strip (−2, 2) × (−h, h).
const DUMBBELL_LOBE_X: f64 = 2.0;
const DUMBBELL_LOBE_RADIUS: f64 = 1.0;

/// Continuous domain description, lengths in abstract spatial units.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Rectangle { width: f64, height: f64 },
    Disk { radius: f64 },
    /// Annulus a < |x| < a + 1 (unit width).
    Annulus { inner: f64 },
    /// Two unit disks centered at (±2, 0) joined by a strip of half-width
    /// `handle_half_width`.
    Dumbbell { handle_half_width: f64 },
    /// Simple (non-self-intersecting) polygon.
    Polygon { vertices: Vec<(f64, f64)> },
    /// Plain PGM (P2) mask, 255 = interior, 0 = exterior, row 0 = top;
    /// a comment line carries `h=<spacing> origin=<x> <y>`.
    MaskFile { path: PathBuf },
}

/// Region tag for dumbbell domains; `Unlabeled` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    LeftLobe,
    RightLobe,
    Handle,
    Unlabeled,
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegionLabel::LeftLobe => "left_lobe",
            RegionLabel::RightLobe => "right_lobe",
            RegionLabel::Handle => "handle",
            RegionLabel::Unlabeled => "none",
        };
        f.write_str(s)
    }
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match self {
            DomainSpec::Rectangle { width, height } => {
                if !(width.is_finite() && height.is_finite() && *width > 0.0 && *height > 0.0) {
                    return bad(format!("rectangle sides must be positive, got {width} x {height}"));
                }
            }
            DomainSpec::Disk { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad(format!("disk radius must be positive, got {radius}"));
                }
            }
            DomainSpec::Annulus { inner } => {
                if !(inner.is_finite() && *inner > 0.0) {
                    return bad(format!("annulus inner radius must be positive, got {inner}"));
                }
            }
            DomainSpec::Dumbbell { handle_half_width } => {
                if !(handle_half_width.is_finite()
                    && *handle_half_width > 0.0
                    && *handle_half_width < 1.0)
                {
                    return bad(format!(
                        "dumbbell handle half-width must lie in (0, 1), got {handle_half_width}"
                    ));
                }
            }
            DomainSpec::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return bad("polygon needs at least 3 vertices".to_string());
                }
                if vertices.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                    return bad("polygon vertices must be finite".to_string());
                }
                if !polygon_is_simple(vertices) {
                    return bad("polygon is self-intersecting".to_string());
                }
            }
            DomainSpec::MaskFile { .. } => {}
        }
        Ok(())
    }

    /// Tight bounding box (x0, y0, x1, y1). Not defined for mask files.
    fn bounding_box(&self) -> Option<(f64, f64, f64, f64)> {
        match self {
            DomainSpec::Rectangle { width, height } => Some((0.0, 0.0, *width, *height)),
            DomainSpec::Disk { radius } => Some((-radius, -radius, *radius, *radius)),
            DomainSpec::Annulus { inner } => {
                let r = inner + 1.0;
                Some((-r, -r, r, r))
            }
            DomainSpec::Dumbbell { .. } => Some((
                -DUMBBELL_LOBE_X - DUMBBELL_LOBE_RADIUS,
                -DUMBBELL_LOBE_RADIUS,
                DUMBBELL_LOBE_X + DUMBBELL_LOBE_RADIUS,
                DUMBBELL_LOBE_RADIUS,
            )),
            DomainSpec::Polygon { vertices } => {
                let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
                let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                for &(x, y) in vertices {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
                Some((x0, y0, x1, y1))
            }
            DomainSpec::MaskFile { .. } => None,
        }
    }

    /// Strict interior membership test at a point.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            DomainSpec::Rectangle { width, height } => {
                x > 0.0 && x < *width && y > 0.0 && y < *height
            }
            DomainSpec::Disk { radius } => x * x + y * y < radius * radius,
            DomainSpec::Annulus { inner } => {
                let r2 = x * x + y * y;
                r2 > inner * inner && r2 < (inner + 1.0) * (inner + 1.0)
            }
            DomainSpec::Dumbbell { handle_half_width } => {
                in_lobe(x, y, -DUMBBELL_LOBE_X)
                    || in_lobe(x, y, DUMBBELL_LOBE_X)
                    || in_handle(x, y, *handle_half_width)
            }
            DomainSpec::Polygon { vertices } => point_in_polygon(vertices, x, y),
            DomainSpec::MaskFile { .. } => false,
        }
    }

    /// Region label at a point; the handle wins ties with the lobes.
    fn label(&self, x: f64, y: f64) -> RegionLabel {
        match self {
            DomainSpec::Dumbbell { handle_half_width } => {
                if in_handle(x, y, *handle_half_width) {
                    RegionLabel::Handle
                } else if in_lobe(x, y, -DUMBBELL_LOBE_X) {
                    RegionLabel::LeftLobe
                } else if in_lobe(x, y, DUMBBELL_LOBE_X) {
                    RegionLabel::RightLobe
                } else {
                    RegionLabel::Unlabeled
                }
            }
            _ => RegionLabel::Unlabeled,
        }
    }
}

fn in_lobe(x: f64, y: f64, cx: f64) -> bool {
    let dx = x - cx;
    dx * dx + y * y < DUMBBELL_LOBE_RADIUS * DUMBBELL_LOBE_RADIUS
}

fn in_handle(x: f64, y: f64, half_width: f64) -> bool {
    x > -DUMBBELL_LOBE_X && x < DUMBBELL_LOBE_X && y > -half_width && y < half_width
}

/// Even-odd ray casting; points exactly on an edge are unspecified (cell
/// centers generically avoid edges).
fn point_in_polygon(vertices: &[(f64, f64)], x: f64, y: f64) -> bool {
    let n = vertices.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = vertices[i];
        let (xj, yj) = vertices[j];
        if (yi > y) != (yj > y) {
            let x_cross = xj + (y - yj) / (yi - yj) * (xi - xj);
            if x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Rejects polygons whose non-adjacent edges properly intersect.
fn polygon_is_simple(vertices: &[(f64, f64)]) -> bool {
    let n = vertices.len();
    let edge = |i: usize| (vertices[i], vertices[(i + 1) % n]);
    for i in 0..n {
        for j in (i + 1)..n {
            // skip adjacent edges (shared vertex)
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (a, b) = edge(i);
            let (c, d) = edge(j);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn segments_intersect(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

/// Rasterized Ω: cell-centered uniform grid with an interior mask.
///
/// The bounding box is padded by one exterior cell on every side, so every
/// interior cell has four addressable grid neighbors. Interior cells are
/// enumerated densely in row-major image order: the top row first, matching
/// the mask-file layout.
#[derive(Debug, Clone)]
pub struct GridDomain {
    h: f64,
    origin: (f64, f64),
    nx: usize,
    ny: usize,
    interior: Vec<bool>,
    labels: Option<Vec<RegionLabel>>,
    grid_to_cell: Vec<usize>,
    cells: Vec<(u32, u32)>,
}

const NO_CELL: usize = usize::MAX;

impl PartialEq for GridDomain {
    fn eq(&self, other: &Self) -> bool {
        self.h.to_bits() == other.h.to_bits()
            && self.origin.0.to_bits() == other.origin.0.to_bits()
            && self.origin.1.to_bits() == other.origin.1.to_bits()
            && self.nx == other.nx
            && self.ny == other.ny
            && self.interior == other.interior
    }
}

impl GridDomain {
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Lower-left corner of the padded bounding box.
    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Number of interior cells.
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn is_interior(&self, ix: usize, iy: usize) -> bool {
        ix < self.nx && iy < self.ny && self.interior[iy * self.nx + ix]
    }

    /// Dense interior index of a grid cell, if interior.
    pub fn cell_at(&self, ix: usize, iy: usize) -> Option<usize> {
        if ix >= self.nx || iy >= self.ny {
            return None;
        }
        match self.grid_to_cell[iy * self.nx + ix] {
            NO_CELL => None,
            i => Some(i),
        }
    }

    /// Grid coordinates (ix, iy) of an interior cell.
    pub fn cell_grid(&self, cell: usize) -> (usize, usize) {
        let (ix, iy) = self.cells[cell];
        (ix as usize, iy as usize)
    }

    /// Spatial coordinates of an interior cell center.
    pub fn center(&self, cell: usize) -> (f64, f64) {
        let (ix, iy) = self.cells[cell];
        (
            self.origin.0 + (ix as f64 + 0.5) * self.h,
            self.origin.1 + (iy as f64 + 0.5) * self.h,
        )
    }

    /// Interior neighbors [west, east, south, north]; `None` marks exterior.
    pub fn neighbors(&self, cell: usize) -> [Option<usize>; 4] {
        let (ix, iy) = self.cell_grid(cell);
        [
            (ix > 0).then(|| self.cell_at(ix - 1, iy)).flatten(),
            self.cell_at(ix + 1, iy),
            (iy > 0).then(|| self.cell_at(ix, iy - 1)).flatten(),
            self.cell_at(ix, iy + 1),
        ]
    }

    pub fn label(&self, cell: usize) -> RegionLabel {
        match &self.labels {
            Some(labels) => labels[cell],
            None => RegionLabel::Unlabeled,
        }
    }

    pub fn has_labels(&self) -> bool {
        self.labels.is_some()
    }

    /// Grid measure of the whole interior, or of a subset of interior cells.
    pub fn measure(&self, subset: Option<&[usize]>) -> Result<f64> {
        let count = match subset {
            None => self.cells.len(),
            Some(cells) => {
                for &i in cells {
                    if i >= self.cells.len() {
                        return Err(Error::SubsetOutOfDomain {
                            index: i,
                            n: self.cells.len(),
                        });
                    }
                }
                cells.len()
            }
        };
        Ok(count as f64 * self.h * self.h)
    }

    /// Interior cells with at least one exterior 4-neighbor.
    pub fn boundary_layer_cells(&self) -> Vec<usize> {
        (0..self.n_cells())
            .filter(|&i| self.neighbors(i).iter().any(|n| n.is_none()))
            .collect()
    }
}

/// Samples the shape predicate at cell centers.
///
/// The grid covers the shape's bounding box padded by one cell of exterior on
/// all sides; a cell is interior exactly when its center lies strictly inside
/// the shape. For mask files the spacing and origin come from the file header
/// and `h` must agree with the stored spacing.
pub fn rasterize(spec: &DomainSpec, h: f64) -> Result<GridDomain> {
    spec.validate()?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidSpec(format!("spacing must be positive, got {h}")));
    }
    if let DomainSpec::MaskFile { path } = spec {
        return rasterize_mask(path.clone(), h);
    }
    let (x0, y0, x1, y1) = spec.bounding_box().expect("non-mask spec has a bbox");
    let nx = ((x1 - x0) / h).ceil() as usize + 2;
    let ny = ((y1 - y0) / h).ceil() as usize + 2;
    let origin = (x0 - h, y0 - h);

    let mut interior = vec![false; nx * ny];
    let mut grid_to_cell = vec![NO_CELL; nx * ny];
    let mut cells = Vec::new();
    let mut labels = Vec::new();
    let labelled = matches!(spec, DomainSpec::Dumbbell { .. });
    for iy in (0..ny).rev() {
        for ix in 0..nx {
            let cx = origin.0 + (ix as f64 + 0.5) * h;
            let cy = origin.1 + (iy as f64 + 0.5) * h;
            if spec.contains(cx, cy) {
                interior[iy * nx + ix] = true;
                grid_to_cell[iy * nx + ix] = cells.len();
                cells.push((ix as u32, iy as u32));
                if labelled {
                    labels.push(spec.label(cx, cy));
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::DegenerateGrid { h });
    }
    Ok(GridDomain {
        h,
        origin,
        nx,
        ny,
        interior,
        labels: labelled.then_some(labels),
        grid_to_cell,
        cells,
    })
}

fn rasterize_mask(path: PathBuf, h: f64) -> Result<GridDomain> {
    let text = fs::read_to_string(&path).map_err(|source| Error::MaskIo {
        path: path.clone(),
        source,
    })?;
    let bad = |reason: String| Error::MaskFormat {
        path: path.clone(),
        reason,
    };
    let img = pgm::parse(&text).map_err(|e| bad(e))?;
    if img.maxval != 255 {
        return Err(bad(format!("maxval must be 255, got {}", img.maxval)));
    }
    let mut file_h = None;
    let mut file_origin = None;
    for comment in &img.comments {
        let tokens: Vec<&str> = comment.split_whitespace().collect();
        for (i, tok) in tokens.iter().enumerate() {
            if let Some(v) = tok.strip_prefix("h=") {
                file_h = v.parse::<f64>().ok();
            }
            if let Some(v) = tok.strip_prefix("origin=") {
                let ox = v.parse::<f64>().ok();
                let oy = tokens.get(i + 1).and_then(|t| t.parse::<f64>().ok());
                if let (Some(ox), Some(oy)) = (ox, oy) {
                    file_origin = Some((ox, oy));
                }
            }
        }
    }
    let file_h = file_h.ok_or_else(|| bad("missing h=<spacing> header comment".to_string()))?;
    let file_origin =
        file_origin.ok_or_else(|| bad("missing origin=<x> <y> header comment".to_string()))?;
    if !(file_h.is_finite() && file_h > 0.0) {
        return Err(bad(format!("bad spacing {file_h}")));
    }
    if (file_h - h).abs() > 1e-12 * file_h.max(h) {
        return Err(Error::InvalidSpec(format!(
            "requested spacing {h} disagrees with mask spacing {file_h}"
        )));
    }
    let h = file_h;

    // Interior mask in bottom-up row order (the file stores the top row first).
    let (w, ht) = (img.width, img.height);
    let mut inner = vec![false; w * ht];
    for row in 0..ht {
        for col in 0..w {
            let v = img.values[row * w + col];
            let interior = match v {
                255 => true,
                0 => false,
                other => return Err(bad(format!("mask values must be 0 or 255, got {other}"))),
            };
            inner[(ht - 1 - row) * w + col] = interior;
        }
    }
    // Pad one exterior ring when any border pixel is interior, so every
    // interior cell keeps four addressable neighbors.
    let needs_pad = (0..w).any(|c| inner[c] || inner[(ht - 1) * w + c])
        || (0..ht).any(|r| inner[r * w] || inner[r * w + w - 1]);
    let (nx, ny, origin, pad) = if needs_pad {
        (w + 2, ht + 2, (file_origin.0 - h, file_origin.1 - h), 1usize)
    } else {
        (w, ht, file_origin, 0usize)
    };
    let mut interior = vec![false; nx * ny];
    let mut grid_to_cell = vec![NO_CELL; nx * ny];
    let mut cells = Vec::new();
    for iy in (0..ny).rev() {
        for ix in 0..nx {
            let src = (iy >= pad && iy < ht + pad && ix >= pad && ix < w + pad)
                && inner[(iy - pad) * w + (ix - pad)];
            if src {
                interior[iy * nx + ix] = true;
                grid_to_cell[iy * nx + ix] = cells.len();
                cells.push((ix as u32, iy as u32));
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::DegenerateGrid { h });
    }
    Ok(GridDomain {
        h,
        origin,
        nx,
        ny,
        interior,
        labels: None,
        grid_to_cell,
        cells,
    })
}
