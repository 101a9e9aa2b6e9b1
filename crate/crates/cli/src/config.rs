//! Run configuration: a flat key = value text format with dotted keys.
//!
//! ```text
//! domain.type = disk
//! domain.radius = 1.0
//! grid.h = 0.015625
//! run.alpha = 10.0
//! run.fraction = 0.5
//! run.seed = 42
//! optimizer.restarts = 8
//! checks = bounds,nesting,annular
//! output.dir = out
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use membrane_core::geometry::DomainSpec;
use membrane_core::optimizer::{MultistartOptions, SolveOptions};

use crate::CliError;

/// Analysis checks selectable per run. `Symmetry` and `Exceptional` are
/// diagnostics; the others assert and fail the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Bounds,
    Nesting,
    Symmetry,
    Convexity,
    Lobes,
    FreeBoundary,
    Exceptional,
    Annular,
    BoundaryLayer,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::Bounds,
        Check::Nesting,
        Check::Symmetry,
        Check::Convexity,
        Check::Lobes,
        Check::FreeBoundary,
        Check::Exceptional,
        Check::Annular,
        Check::BoundaryLayer,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Check::Bounds => "bounds",
            Check::Nesting => "nesting",
            Check::Symmetry => "symmetry",
            Check::Convexity => "convexity",
            Check::Lobes => "lobes",
            Check::FreeBoundary => "free_boundary",
            Check::Exceptional => "exceptional",
            Check::Annular => "annular",
            Check::BoundaryLayer => "boundary_layer",
        }
    }
}

impl std::str::FromStr for Check {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Check::ALL
            .iter()
            .find(|c| c.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown check {s:?}"))
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub h: f64,
    pub alpha: f64,
    pub area_fraction: f64,
    pub restarts: usize,
    pub seed: u64,
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
    pub max_outer: usize,
    pub alphabar_tol: f64,
    pub output_dir: PathBuf,
    pub checks: Vec<Check>,
    pub sweep_alphas: Vec<f64>,
    pub sweep_fractions: Vec<f64>,
}

impl RunConfig {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            eigen_tol: self.eigen_tol,
            eigen_max_iter: self.eigen_max_iter,
            max_outer: self.max_outer,
        }
    }

    pub fn multistart_options(&self, threads: usize) -> MultistartOptions {
        MultistartOptions {
            solve: self.solve_options(),
            restarts: self.restarts,
            seed: self.seed,
            threads,
        }
    }
}

struct KeyMap {
    values: BTreeMap<String, String>,
    consumed: std::cell::RefCell<Vec<String>>,
}

impl KeyMap {
    fn get(&self, key: &str) -> Option<&str> {
        let v = self.values.get(key).map(String::as_str);
        if v.is_some() {
            self.consumed.borrow_mut().push(key.to_string());
        }
        v
    }

    fn required(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::Config(format!("missing required key {key:?}")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::Config(format!("cannot parse {key} = {raw:?}"))),
        }
    }

    fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    fn required_parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.required(key)?;
        raw.parse::<T>()
            .map_err(|_| CliError::Config(format!("cannot parse {key} = {raw:?}")))
    }

    fn unconsumed(&self) -> Vec<String> {
        let consumed = self.consumed.borrow();
        self.values
            .keys()
            .filter(|k| !consumed.contains(k))
            .cloned()
            .collect()
    }
}

fn parse_float_list(raw: &str, key: &str) -> Result<Vec<f64>, CliError> {
    raw.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| CliError::Config(format!("cannot parse {key} entry {tok:?}")))
        })
        .collect()
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut values = BTreeMap::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {}: expected key = value, got {raw_line:?}",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if values.insert(key.clone(), value).is_some() {
            return Err(CliError::Config(format!("duplicate key {key:?}")));
        }
    }
    let map = KeyMap {
        values,
        consumed: std::cell::RefCell::new(Vec::new()),
    };

    let domain = match map.required("domain.type")? {
        "rectangle" => DomainSpec::Rectangle {
            width: map.required_parse("domain.width")?,
            height: map.required_parse("domain.height")?,
        },
        "disk" => DomainSpec::Disk {
            radius: map.required_parse("domain.radius")?,
        },
        "annulus" => DomainSpec::Annulus {
            inner: map.required_parse("domain.inner")?,
        },
        "dumbbell" => DomainSpec::Dumbbell {
            handle_half_width: map.required_parse("domain.handle")?,
        },
        "polygon" => {
            let flat = parse_float_list(map.required("domain.vertices")?, "domain.vertices")?;
            if flat.len() % 2 != 0 {
                return Err(CliError::Config(
                    "domain.vertices needs an even number of coordinates".to_string(),
                ));
            }
            DomainSpec::Polygon {
                vertices: flat.chunks(2).map(|c| (c[0], c[1])).collect(),
            }
        }
        "mask_file" => DomainSpec::MaskFile {
            path: PathBuf::from(map.required("domain.mask")?),
        },
        other => {
            return Err(CliError::Config(format!("unknown domain.type {other:?}")));
        }
    };

    let h: f64 = map.required_parse("grid.h")?;
    let alpha: f64 = map.parse_or("run.alpha", 0.0)?;
    let area_fraction: f64 = map.required_parse("run.fraction")?;
    let seed: u64 = map.parse_or("run.seed", 0)?;
    let restarts: usize = map.parse_or("optimizer.restarts", 8)?;
    let max_outer: usize = map.parse_or("optimizer.max_outer", 200)?;
    let eigen_max_iter: usize = map.parse_or("optimizer.eigen_max_iter", 500)?;
    let eigen_tol: f64 = map.parse_or("tol.eigen", 1e-9)?;
    let alphabar_tol: f64 = map.parse_or("tol.alphabar", 1e-6)?;
    let output_dir = PathBuf::from(map.get("output.dir").unwrap_or("out"));
    let checks = match map.get("checks") {
        None => vec![Check::Bounds, Check::Nesting],
        Some(raw) => raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<Check>().map_err(CliError::Config))
            .collect::<Result<Vec<Check>, CliError>>()?,
    };
    let sweep_alphas = match map.get("sweep.alpha") {
        None => Vec::new(),
        Some(raw) => parse_float_list(raw, "sweep.alpha")?,
    };
    let sweep_fractions = match map.get("sweep.fraction") {
        None => Vec::new(),
        Some(raw) => parse_float_list(raw, "sweep.fraction")?,
    };

    let leftover = map.unconsumed();
    if !leftover.is_empty() {
        return Err(CliError::Config(format!("unknown keys: {leftover:?}")));
    }

    if !(h.is_finite() && h > 0.0) {
        return Err(CliError::Config(format!("grid.h must be positive, got {h}")));
    }
    if !(area_fraction > 0.0 && area_fraction < 1.0) {
        return Err(CliError::Config(format!(
            "run.fraction must lie strictly between 0 and 1, got {area_fraction}"
        )));
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(CliError::Config(format!("run.alpha must be >= 0, got {alpha}")));
    }
    if restarts == 0 {
        return Err(CliError::Config("optimizer.restarts must be >= 1".to_string()));
    }

    Ok(RunConfig {
        domain,
        h,
        alpha,
        area_fraction,
        restarts,
        seed,
        eigen_tol,
        eigen_max_iter,
        max_outer,
        alphabar_tol,
        output_dir,
        checks,
        sweep_alphas,
        sweep_fractions,
    })
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "domain.type = disk\ndomain.radius = 1.0\ngrid.h = 0.125\nrun.alpha = 10\nrun.fraction = 0.5\n";

    #[test]
    fn parses_with_defaults() {
        let cfg = parse_config(BASE).unwrap();
        assert!(matches!(cfg.domain, DomainSpec::Disk { .. }));
        assert_eq!(cfg.restarts, 8);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.checks, vec![Check::Bounds, Check::Nesting]);
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn rejects_degenerate_fraction() {
        let text = BASE.replace("run.fraction = 0.5", "run.fraction = 0");
        assert!(matches!(parse_config(&text), Err(CliError::Config(_))));
        let text = BASE.replace("run.fraction = 0.5", "run.fraction = 1.0");
        assert!(matches!(parse_config(&text), Err(CliError::Config(_))));
    }

    #[test]
    fn rejects_unknown_keys_and_duplicates() {
        let text = format!("{BASE}mystery.key = 3\n");
        assert!(matches!(parse_config(&text), Err(CliError::Config(_))));
        let text = format!("{BASE}run.alpha = 4\n");
        assert!(matches!(parse_config(&text), Err(CliError::Config(_))));
    }

    #[test]
    fn parses_checks_and_sweeps() {
        let text = format!(
            "{BASE}checks = bounds, annular ,symmetry\nsweep.alpha = 5 10\nsweep.fraction = 0.4 0.6\n"
        );
        let cfg = parse_config(&text).unwrap();
        assert_eq!(
            cfg.checks,
            vec![Check::Bounds, Check::Annular, Check::Symmetry]
        );
        assert_eq!(cfg.sweep_alphas, vec![5.0, 10.0]);
        assert_eq!(cfg.sweep_fractions, vec![0.4, 0.6]);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("# a comment\n\n{BASE}# trailing\n");
        assert!(parse_config(&text).is_ok());
    }
}
