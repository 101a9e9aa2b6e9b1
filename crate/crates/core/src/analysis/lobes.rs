use crate::analysis::symmetry::{reflection_score, Axis};
use crate::error::{Error, Result};
use crate::geometry::{GridDomain, RegionLabel};
use crate::optimizer::Configuration;

/// Geometric region of a dumbbell cell: one of the lobe disks, or the bridge
/// (the part of the handle outside both disks). The label partition resolves
/// the disk/strip overlap to the handle, so containment in a lobe is judged
/// by disk membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    LeftDisk,
    RightDisk,
    Bridge,
}

fn region_of(x: f64, y: f64) -> Region {
    if (x + 2.0) * (x + 2.0) + y * y < 1.0 {
        Region::LeftDisk
    } else if (x - 2.0) * (x - 2.0) + y * y < 1.0 {
        Region::RightDisk
    } else {
        Region::Bridge
    }
}

/// Where the complement D^c sits on a dumbbell domain.
#[derive(Debug, Clone)]
pub struct LobeReport {
    /// Non-ring D^c cells inside each lobe disk: [left, right].
    pub disk_counts: [usize; 2],
    /// Non-ring D^c cells in the handle outside both disks.
    pub bridge_cells: usize,
    /// Non-ring D^c cells per label: [left lobe, right lobe, handle].
    pub label_counts: [usize; 3],
    /// D^c cells ignored because they sit within one cell of a region
    /// boundary.
    pub ring_cells: usize,
    /// All non-ring D^c cells lie in a single lobe disk: none in the bridge,
    /// none in the opposite disk.
    pub contained: bool,
    pub dominant_lobe: Option<RegionLabel>,
    /// Non-ring D^c cells in the disk opposite the dominant one.
    pub opposite_lobe_cells: usize,
    /// |D Δ reflect(D)|·h² about the x₂-axis (nonzero indicates the
    /// left/right asymmetry of the optimal pair).
    pub reflection_score_x2: f64,
}

/// Classifies D^c cells by lobe-disk membership, ignoring a one-cell
/// tolerance ring around region boundaries.
pub fn lobe_containment(config: &Configuration, domain: &GridDomain) -> Result<LobeReport> {
    if !domain.has_labels() {
        return Err(Error::NoLabels);
    }
    let complement = config.complement(domain);
    let mut disk_counts = [0usize; 2];
    let mut bridge_cells = 0usize;
    let mut label_counts = [0usize; 3];
    let mut ring_cells = 0usize;
    for &i in &complement {
        if touches_other_region(domain, i) {
            ring_cells += 1;
            continue;
        }
        let (x, y) = domain.center(i);
        match region_of(x, y) {
            Region::LeftDisk => disk_counts[0] += 1,
            Region::RightDisk => disk_counts[1] += 1,
            Region::Bridge => bridge_cells += 1,
        }
        match domain.label(i) {
            RegionLabel::LeftLobe => label_counts[0] += 1,
            RegionLabel::RightLobe => label_counts[1] += 1,
            RegionLabel::Handle => label_counts[2] += 1,
            RegionLabel::Unlabeled => {}
        }
    }
    let dominant_lobe = match disk_counts[0].cmp(&disk_counts[1]) {
        std::cmp::Ordering::Greater => Some(RegionLabel::LeftLobe),
        std::cmp::Ordering::Less => Some(RegionLabel::RightLobe),
        std::cmp::Ordering::Equal if disk_counts[0] > 0 => Some(RegionLabel::LeftLobe),
        _ => None,
    };
    let opposite_lobe_cells = match dominant_lobe {
        Some(RegionLabel::LeftLobe) => disk_counts[1],
        Some(RegionLabel::RightLobe) => disk_counts[0],
        _ => 0,
    };
    let contained = bridge_cells == 0 && !(disk_counts[0] > 0 && disk_counts[1] > 0);
    let reflection_score_x2 = reflection_score(config.cells(), domain, (0.0, 0.0), Axis::Vertical);
    Ok(LobeReport {
        disk_counts,
        bridge_cells,
        label_counts,
        ring_cells,
        contained,
        dominant_lobe,
        opposite_lobe_cells,
        reflection_score_x2,
    })
}

/// True when any 8-neighbor interior cell lies in a different region.
fn touches_other_region(domain: &GridDomain, cell: usize) -> bool {
    let (x, y) = domain.center(cell);
    let region = region_of(x, y);
    let (ix, iy) = domain.cell_grid(cell);
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let jx = ix as i64 + dx;
            let jy = iy as i64 + dy;
            if jx < 0 || jy < 0 {
                continue;
            }
            if let Some(j) = domain.cell_at(jx as usize, jy as usize) {
                let (nx_, ny_) = domain.center(j);
                if region_of(nx_, ny_) != region {
                    return true;
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, DomainSpec};

    fn dumbbell() -> GridDomain {
        rasterize(
            &DomainSpec::Dumbbell {
                handle_half_width: 0.1,
            },
            1.0 / 16.0,
        )
        .unwrap()
    }

    #[test]
    fn complement_in_one_lobe_is_contained() {
        let g = dumbbell();
        // D = everything except a blob inside the right lobe; the blob covers
        // part of the handle strip that overlaps the disk
        let d: Vec<usize> = (0..g.n_cells())
            .filter(|&i| {
                let (x, y) = g.center(i);
                (x - 2.0).hypot(y) >= 0.5
            })
            .collect();
        let config = Configuration::from_cells(d, &g).unwrap();
        let report = lobe_containment(&config, &g).unwrap();
        assert!(report.contained, "{report:?}");
        assert_eq!(report.dominant_lobe, Some(RegionLabel::RightLobe));
        assert_eq!(report.opposite_lobe_cells, 0);
        assert_eq!(report.bridge_cells, 0);
        // the blob includes strip cells that carry the handle label
        assert!(report.label_counts[2] > 0);
        assert!(report.reflection_score_x2 > 0.0);
    }

    #[test]
    fn complement_straddling_the_handle_is_not_contained() {
        let g = dumbbell();
        // D^c = vertical slab through the handle center
        let d: Vec<usize> = (0..g.n_cells())
            .filter(|&i| g.center(i).0.abs() >= 0.4)
            .collect();
        let config = Configuration::from_cells(d, &g).unwrap();
        let report = lobe_containment(&config, &g).unwrap();
        assert!(!report.contained, "{report:?}");
        assert!(report.bridge_cells > 0);
    }

    #[test]
    fn unlabeled_domain_errors() {
        let g = rasterize(&DomainSpec::Disk { radius: 1.0 }, 0.25).unwrap();
        let config = Configuration::from_cells(vec![0, 1], &g).unwrap();
        assert!(matches!(
            lobe_containment(&config, &g),
            Err(Error::NoLabels)
        ));
    }
}
