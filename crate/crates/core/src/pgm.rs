//! Minimal plain-text PGM (P2) parsing.
//!
//! Masks are stored with row 0 at the top of the bounding box. Comment lines
//! (leading `#`) are preserved so callers can recover metadata such as the
//! grid spacing.

/// A parsed plain PGM image.
#[derive(Debug, Clone)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    /// Comment lines in order of appearance, `#` stripped and trimmed.
    pub comments: Vec<String>,
    /// Pixel values, row-major, row 0 first (top row).
    pub values: Vec<u32>,
}

/// Parses a plain (ASCII) PGM, magic `P2`.
pub fn parse(text: &str) -> Result<Pgm, String> {
    let mut comments = Vec::new();
    let mut tokens: Vec<&str> = Vec::new();
    for line in text.lines() {
        if let Some(comment) = line.trim_start().strip_prefix('#') {
            comments.push(comment.trim().to_string());
        } else {
            tokens.extend(line.split_whitespace());
        }
    }
    let mut it = tokens.into_iter();
    match it.next() {
        Some("P2") => {}
        Some(other) => return Err(format!("expected magic P2, found {other:?}")),
        None => return Err("empty file".to_string()),
    }
    let mut next_num = |what: &str| -> Result<u32, String> {
        it.next()
            .ok_or_else(|| format!("missing {what}"))?
            .parse::<u32>()
            .map_err(|e| format!("bad {what}: {e}"))
    };
    let width = next_num("width")? as usize;
    let height = next_num("height")? as usize;
    let maxval = next_num("maxval")?;
    if width == 0 || height == 0 {
        return Err("zero image dimensions".to_string());
    }
    let mut values = Vec::with_capacity(width * height);
    for _ in 0..width * height {
        values.push(next_num("pixel")?);
    }
    if it.next().is_some() {
        return Err("trailing data after pixel raster".to_string());
    }
    if let Some(&v) = values.iter().find(|&&v| v > maxval) {
        return Err(format!("pixel value {v} exceeds maxval {maxval}"));
    }
    Ok(Pgm {
        width,
        height,
        maxval,
        comments,
        values,
    })
}
