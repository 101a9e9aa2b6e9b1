//! Bit-exact artifact serialization: mask PGM, u-field CSV, free-boundary
//! CSV. Scalars carry 17 significant digits so doubles round-trip exactly;
//! files are written atomically (temp + rename).

use std::io::Write;
use std::path::Path;

use membrane_core::analysis::FreeBoundary;
use membrane_core::discretization::Field;
use membrane_core::geometry::GridDomain;
use membrane_core::optimizer::Configuration;
use membrane_core::pgm;

/// 17 significant digits: exact round-trip for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Mask image: 255 = D cell, 128 = interior cell outside D, 0 = exterior;
/// rows from the top of the bounding box.
pub fn mask_pgm_string(config: &Configuration, domain: &GridDomain) -> String {
    let t = config.threshold().unwrap_or(f64::NAN);
    let mut out = String::new();
    out.push_str("P2\n");
    out.push_str(&format!(
        "# h={} t={} A={}\n",
        fmt_f64(domain.h()),
        fmt_f64(t),
        fmt_f64(config.measure())
    ));
    out.push_str(&format!("{} {}\n255\n", domain.nx(), domain.ny()));
    let in_d = config.mask(domain.n_cells());
    for iy in (0..domain.ny()).rev() {
        let mut row = Vec::with_capacity(domain.nx());
        for ix in 0..domain.nx() {
            let value = match domain.cell_at(ix, iy) {
                None => "0",
                Some(cell) if in_d[cell] => "255",
                Some(_) => "128",
            };
            row.push(value);
        }
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parsed solver mask artifact.
#[derive(Debug, Clone)]
pub struct MaskArtifact {
    pub h: f64,
    pub t: f64,
    pub a: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major grid masks, iy = 0 at the bottom.
    pub interior: Vec<bool>,
    pub in_d: Vec<bool>,
}

pub fn parse_mask_pgm(text: &str) -> Result<MaskArtifact, String> {
    let img = pgm::parse(text)?;
    let mut h = None;
    let mut t = None;
    let mut a = None;
    for comment in &img.comments {
        for tok in comment.split_whitespace() {
            if let Some(v) = tok.strip_prefix("h=") {
                h = v.parse::<f64>().ok();
            } else if let Some(v) = tok.strip_prefix("t=") {
                t = v.parse::<f64>().ok();
            } else if let Some(v) = tok.strip_prefix("A=") {
                a = v.parse::<f64>().ok();
            }
        }
    }
    let (nx, ny) = (img.width, img.height);
    let mut interior = vec![false; nx * ny];
    let mut in_d = vec![false; nx * ny];
    for row in 0..ny {
        for col in 0..nx {
            let g = (ny - 1 - row) * nx + col;
            match img.values[row * nx + col] {
                0 => {}
                128 => interior[g] = true,
                255 => {
                    interior[g] = true;
                    in_d[g] = true;
                }
                other => return Err(format!("unexpected mask value {other}")),
            }
        }
    }
    Ok(MaskArtifact {
        h: h.ok_or("missing h= in mask header")?,
        t: t.ok_or("missing t= in mask header")?,
        a: a.ok_or("missing A= in mask header")?,
        nx,
        ny,
        interior,
        in_d,
    })
}

/// (cell_x, cell_y, u) for interior cells in cell-index order.
pub fn u_csv_string(u: &Field) -> String {
    let domain = u.domain();
    let mut out = String::from("cell_x,cell_y,u\n");
    for (i, v) in u.values().iter().enumerate() {
        let (x, y) = domain.center(i);
        out.push_str(&format!("{},{},{}\n", fmt_f64(x), fmt_f64(y), fmt_f64(*v)));
    }
    out
}

pub fn parse_u_csv(text: &str, domain: &std::sync::Arc<GridDomain>) -> Result<Field, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some("cell_x,cell_y,u") => {}
        other => return Err(format!("unexpected u-field header {other:?}")),
    }
    let mut values = Vec::with_capacity(domain.n_cells());
    for (i, line) in lines.enumerate() {
        let mut parts = line.split(',');
        let mut next = |what: &str| -> Result<f64, String> {
            parts
                .next()
                .ok_or_else(|| format!("row {i}: missing {what}"))?
                .parse::<f64>()
                .map_err(|e| format!("row {i}: bad {what}: {e}"))
        };
        let x = next("cell_x")?;
        let y = next("cell_y")?;
        let u = next("u")?;
        if i >= domain.n_cells() {
            return Err("more rows than interior cells".to_string());
        }
        let (cx, cy) = domain.center(i);
        if x.to_bits() != cx.to_bits() || y.to_bits() != cy.to_bits() {
            return Err(format!(
                "row {i}: cell center ({x}, {y}) does not match the domain ({cx}, {cy})"
            ));
        }
        values.push(u);
    }
    if values.len() != domain.n_cells() {
        return Err(format!(
            "expected {} rows, found {}",
            domain.n_cells(),
            values.len()
        ));
    }
    Field::new(domain.clone(), values).map_err(|e| e.to_string())
}

/// Vertices in traversal order with per-vertex gradient data.
pub fn free_boundary_csv_string(fb: &FreeBoundary) -> String {
    let mut out = String::from("segment_id,vertex_id,x,y,grad_mag,flagged\n");
    for (s, poly) in fb.segments.iter().enumerate() {
        for (v, &(x, y)) in poly.vertices.iter().enumerate() {
            out.push_str(&format!(
                "{s},{v},{},{},{},{}\n",
                fmt_f64(x),
                fmt_f64(y),
                fmt_f64(poly.grad_mag[v]),
                u8::from(poly.flagged[v])
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use membrane_core::geometry::{rasterize, DomainSpec};

    #[test]
    fn mask_format_matches_the_two_by_two_example() {
        // 2x2 all-interior grid via a mask file without padding is awkward;
        // instead check the body rows on a rasterized 2x2 square, which adds
        // a one-cell exterior ring around the same pattern.
        let g = rasterize(
            &DomainSpec::Rectangle {
                width: 2.0,
                height: 2.0,
            },
            1.0,
        )
        .unwrap();
        assert_eq!(g.n_cells(), 4);
        // cells 0,1 = top row; 2,3 = bottom row (image order)
        let config =
            Configuration::from_cells_with_threshold(vec![0, 3], 0.5, &g).unwrap();
        let pgm = mask_pgm_string(&config, &g);
        let body: Vec<&str> = pgm.lines().skip(4).collect();
        assert_eq!(body, vec!["0 0 0 0", "0 255 128 0", "0 128 255 0", "0 0 0 0"]);
        let parsed = parse_mask_pgm(&pgm).unwrap();
        assert_eq!(parsed.t, 0.5);
        assert_eq!(parsed.interior.iter().filter(|&&b| b).count(), 4);
        assert_eq!(parsed.in_d.iter().filter(|&&b| b).count(), 2);
    }

    #[test]
    fn mask_round_trips_the_cell_set() {
        let g = rasterize(&DomainSpec::Disk { radius: 1.0 }, 0.25).unwrap();
        let cells: Vec<usize> = (0..g.n_cells()).filter(|i| i % 3 != 0).collect();
        let config = Configuration::from_cells_with_threshold(cells.clone(), 1.25, &g).unwrap();
        let pgm = mask_pgm_string(&config, &g);
        let parsed = parse_mask_pgm(&pgm).unwrap();
        let recovered: Vec<usize> = (0..g.n_cells())
            .filter(|&i| {
                let (ix, iy) = g.cell_grid(i);
                parsed.in_d[iy * g.nx() + ix]
            })
            .collect();
        assert_eq!(recovered, cells);
    }

    #[test]
    fn u_csv_round_trips_bitwise() {
        let g = std::sync::Arc::new(rasterize(&DomainSpec::Disk { radius: 1.0 }, 0.25).unwrap());
        let u = Field::from_fn(g.clone(), |x, y| (x * 37.1).sin() * (y * 11.7).cos() + 2.0);
        let csv = u_csv_string(&u);
        let parsed = parse_u_csv(&csv, &g).unwrap();
        for (a, b) in u.values().iter().zip(parsed.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
