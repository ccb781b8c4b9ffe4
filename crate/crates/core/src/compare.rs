//! Relative-error reports between two equally shaped fields.
//!
//! Fields are viewed as `rows x cols` matrices: sites by channels for `f`,
//! site pairs by channel pairs for `g`. Entries whose reference magnitude
//! falls at or below the floor are never divided; their absolute error is
//! reported instead.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    /// Reference entries with `|b| <= relative_floor * max|b|` use absolute error.
    pub relative_floor: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { relative_floor: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub rows: usize,
    pub cols: usize,
    /// `|a - b| / |b|` per entry; `None` for entries below the floor.
    pub relative: Vec<Option<f64>>,
    /// `(entry index, |a - b|)` for entries below the floor.
    pub absolute: Vec<(usize, f64)>,
    /// Largest relative error in each column (channel).
    pub per_col_max: Vec<f64>,
    /// Largest relative error in each row (site).
    pub per_row_max: Vec<f64>,
    pub max_relative: f64,
    pub max_absolute: f64,
    /// `‖a - b‖₂ / ‖b‖₂`, or the plain difference norm when `b = 0`.
    pub l2_relative: f64,
    pub linf: f64,
}

pub fn compare_fields(a: &[f64], b: &[f64], rows: usize, cols: usize, options: CompareOptions) -> Result<ErrorReport> {
    if a.len() != b.len() || a.len() != rows * cols {
        return Err(Error::ShapeMismatch {
            expected: format!("{rows}x{cols} = {}", rows * cols),
            found: format!("{} and {}", a.len(), b.len()),
        });
    }
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = options.relative_floor * scale;

    let mut relative = Vec::with_capacity(a.len());
    let mut absolute = Vec::new();
    let mut per_col_max = vec![0.0f64; cols];
    let mut per_row_max = vec![0.0f64; rows];
    let (mut diff2, mut ref2, mut linf) = (0.0, 0.0, 0.0f64);
    for (idx, (&x, &y)) in a.iter().zip(b).enumerate() {
        let d = (x - y).abs();
        diff2 += d * d;
        ref2 += y * y;
        linf = linf.max(d);
        if y.abs() > floor {
            let eps = d / y.abs();
            per_col_max[idx % cols] = per_col_max[idx % cols].max(eps);
            per_row_max[idx / cols] = per_row_max[idx / cols].max(eps);
            relative.push(Some(eps));
        } else {
            absolute.push((idx, d));
            relative.push(None);
        }
    }
    let max_relative = per_col_max.iter().copied().fold(0.0, f64::max);
    let max_absolute = absolute.iter().map(|&(_, d)| d).fold(0.0, f64::max);
    let l2_relative = if ref2 > 0.0 { (diff2 / ref2).sqrt() } else { diff2.sqrt() };
    Ok(ErrorReport {
        rows,
        cols,
        relative,
        absolute,
        per_col_max,
        per_row_max,
        max_relative,
        max_absolute,
        l2_relative,
        linf,
    })
}

impl ErrorReport {
    /// Largest relative error over entries accepted by `keep(row, col)`.
    pub fn max_relative_where(&self, mut keep: impl FnMut(usize, usize) -> bool) -> f64 {
        self.relative
            .iter()
            .enumerate()
            .filter_map(|(idx, e)| e.filter(|_| keep(idx / self.cols, idx % self.cols)))
            .fold(0.0, f64::max)
    }
}
