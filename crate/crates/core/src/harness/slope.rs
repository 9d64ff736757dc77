//! Least-squares slopes on log-log axes.

use crate::error::{Error, Result};

/// Rows a fit needs at minimum.
pub const MIN_SLOPE_ROWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// Iterations in `(t_max/10, t_max]`.
    LastDecade,
    /// Iterations in `[t0, t1]`.
    Range(usize, usize),
}

/// Slope of `log10(value)` against `log10(iter)` over the window. Rows with `iter = 0` are
/// ignored; a nonpositive value inside the window is an error naming its iteration.
pub fn loglog_slope(series: &[(usize, f64)], window: Window) -> Result<f64> {
    let tmax = series.iter().map(|p| p.0).max().unwrap_or(0);
    let (lo, hi) = match window {
        Window::LastDecade => (tmax / 10 + 1, tmax),
        Window::Range(a, b) => {
            if a > b {
                return Err(Error::config("window", format!("empty range {a}..{b}")));
            }
            (a, b)
        }
    };
    let mut pts = Vec::new();
    for &(t, v) in series {
        if t == 0 || t < lo || t > hi {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Input(format!(
                "value {v} at iteration {t} is not positive and finite"
            )));
        }
        pts.push(((t as f64).log10(), v.log10()));
    }
    if pts.len() < MIN_SLOPE_ROWS {
        return Err(Error::Input(format!(
            "{} usable rows in the window, need at least {MIN_SLOPE_ROWS}",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Input("all rows share one iteration".into()));
    }
    Ok(sxy / sxx)
}

/// Slope of a named trace column in a CSV file.
pub fn slope_of(path: &std::path::Path, column: &str, window: Window) -> Result<f64> {
    let series = super::read_column(path, column)?;
    loglog_slope(&series, window)
}
