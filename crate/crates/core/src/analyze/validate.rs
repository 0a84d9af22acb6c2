use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AnalyzeError, BinnedQueueStats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinResidual {
    pub bin_start: f64,
    /// Simulated minus actual mean wait (s).
    pub wait: f64,
    /// Simulated minus actual end-of-bin queue length.
    pub queue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationMetrics {
    pub common_bins: usize,
    pub mae_wait: f64,
    pub rmse_wait: f64,
    pub mae_queue: f64,
    pub residuals: Vec<BinResidual>,
}

/// Error metrics over the bins present in both series (matched on bin start).
pub fn validate_against_actual(
    simulated: &[BinnedQueueStats],
    actual: &[BinnedQueueStats],
) -> Result<ValidationMetrics, AnalyzeError> {
    let key = |s: &BinnedQueueStats| (s.bin_start * 1000.0).round() as i64;
    let actual: BTreeMap<i64, &BinnedQueueStats> = actual.iter().map(|a| (key(a), a)).collect();
    let mut residuals: Vec<BinResidual> = simulated
        .iter()
        .filter_map(|s| {
            actual.get(&key(s)).map(|a| BinResidual {
                bin_start: s.bin_start,
                wait: s.mean_wait - a.mean_wait,
                queue: s.queue_length_end as f64 - a.queue_length_end as f64,
            })
        })
        .collect();
    if residuals.is_empty() {
        return Err(AnalyzeError::NoCommonBins);
    }
    residuals.sort_by(|a, b| a.bin_start.total_cmp(&b.bin_start));
    let n = residuals.len() as f64;
    Ok(ValidationMetrics {
        common_bins: residuals.len(),
        mae_wait: residuals.iter().map(|r| r.wait.abs()).sum::<f64>() / n,
        rmse_wait: (residuals.iter().map(|r| r.wait * r.wait).sum::<f64>() / n).sqrt(),
        mae_queue: residuals.iter().map(|r| r.queue.abs()).sum::<f64>() / n,
        residuals,
    })
}
