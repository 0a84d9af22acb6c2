use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AnalyzeError, BinnedQueueStats};

pub const DEFAULT_SATURATION_WINDOW: usize = 5;
pub const DEFAULT_SLOPE_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputDemandCurve {
    /// (demand, mean throughput) sorted by demand.
    pub points: Vec<(u64, f64)>,
    pub saturation_demand: Option<u64>,
}

/// One point per distinct demand level, averaging the throughput of every
/// bin observed at that level.
pub fn throughput_vs_demand(stats: &[BinnedQueueStats]) -> Result<ThroughputDemandCurve, AnalyzeError> {
    if stats.is_empty() {
        return Err(AnalyzeError::Empty("binned statistics"));
    }
    let mut levels: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for s in stats {
        let e = levels.entry(s.demand).or_insert((0.0, 0));
        e.0 += s.throughput as f64;
        e.1 += 1;
    }
    Ok(ThroughputDemandCurve {
        points: levels.into_iter().map(|(d, (sum, n))| (d, sum / n as f64)).collect(),
        saturation_demand: None,
    })
}

fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Residual sum of squares of `y = a + b x + c (x - knee)+` fitted by least squares.
fn hinge_sse(points: &[(f64, f64)], knee: f64) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    // Columns: 1, x - mx, (x - knee)+.
    let cols = |x: f64| [1.0, x - mx, (x - knee).max(0.0)];
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for &(x, y) in points {
        let c = cols(x);
        for i in 0..3 {
            b[i] += c[i] * y;
            for j in 0..3 {
                a[i][j] += c[i] * c[j];
            }
        }
    }
    let Some(beta) = solve3(a, b) else { return f64::INFINITY };
    points
        .iter()
        .map(|&(x, y)| {
            let c = cols(x);
            let fit: f64 = (0..3).map(|i| c[i] * beta[i]).sum();
            (y - fit).powi(2)
        })
        .sum()
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (v, p) in a[row].iter_mut().zip(pivot_row).skip(col) {
                *v -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Demand level beyond which throughput stops rising.
///
/// The knee is located by a two-segment continuous piecewise-linear fit
/// (each segment holding at least `window` points). The curve counts as
/// saturated when the least-squares slope of the points at or beyond the
/// knee is below `slope_epsilon`; otherwise `None`.
pub fn detect_saturation(
    curve: &ThroughputDemandCurve,
    window: usize,
    slope_epsilon: f64,
) -> Result<Option<u64>, AnalyzeError> {
    let n = curve.points.len();
    if window == 0 || n < 2 * window {
        return Err(AnalyzeError::TooFewPoints { needed: 2 * window.max(1), got: n });
    }
    let pts: Vec<(f64, f64)> = curve.points.iter().map(|&(d, t)| (d as f64, t)).collect();
    let mut best: Option<(usize, f64)> = None;
    for k in window - 1..n - window {
        let sse = hinge_sse(&pts, pts[k].0);
        if best.is_none_or(|(_, b)| sse < b) {
            best = Some((k, sse));
        }
    }
    let Some((k, _)) = best else { return Ok(None) };
    let tail_slope = ols_slope(&pts[k..]);
    Ok((tail_slope < slope_epsilon).then_some(curve.points[k].0))
}
