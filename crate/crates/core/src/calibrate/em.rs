//! One-dimensional Gaussian-mixture EM with the component count chosen by AIC.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CalibrateError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmOptions {
    pub max_components: usize,
    /// Convergence threshold on the change in mean per-point log-likelihood.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub variance_floor: f64,
    /// Initialisations per candidate K: one quantile start, the rest k-means++.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_components: 8,
            tolerance: 1e-6,
            max_iterations: 500,
            variance_floor: 1e-8,
            restarts: 3,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

/// A converged mixture for one candidate component count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureFit {
    pub components: Vec<GaussianComponent>,
    /// `posteriors[i][k]` = P(component k | point i); rows sum to 1.
    pub posteriors: Vec<Vec<f64>>,
    pub log_likelihood: f64,
    pub aic: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Total log-likelihood after each EM iteration of the final run.
    pub trace: Vec<f64>,
}

/// Summary of one candidate K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub requested: usize,
    pub fitted: usize,
    pub log_likelihood: f64,
    pub aic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmResult {
    pub selected: MixtureFit,
    pub candidates: Vec<Candidate>,
}

/// Fits Gaussian mixtures for K = 1..=max_components and keeps the one with
/// the smallest AIC (ties go to the smaller K).
///
/// A component whose variance collapses below the floor is removed and EM
/// continues with the remaining components; with a single component the
/// variance is clamped to the floor instead.
pub fn em_cluster(points: &[f64], options: &EmOptions) -> Result<EmResult, CalibrateError> {
    if points.len() < 2 {
        return Err(CalibrateError::TooFewPoints { needed: 2, got: points.len() });
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(CalibrateError::NonFinite);
    }
    if options.max_components == 0 {
        return Err(CalibrateError::InvalidOption("max_components must be >= 1"));
    }
    let max_k = options.max_components.min(points.len());
    let fits: Vec<MixtureFit> = (1..=max_k).into_par_iter().map(|k| fit_k(points, k, options)).collect();

    let candidates = fits
        .iter()
        .enumerate()
        .map(|(i, f)| Candidate {
            requested: i + 1,
            fitted: f.components.len(),
            log_likelihood: f.log_likelihood,
            aic: f.aic,
        })
        .collect();
    let selected = fits
        .into_iter()
        .reduce(|best, f| {
            if f.aic < best.aic || (f.aic == best.aic && f.components.len() < best.components.len()) {
                f
            } else {
                best
            }
        })
        .expect("at least one candidate");
    Ok(EmResult { selected, candidates })
}

/// Best of several initialisations for a requested K.
pub fn fit_k(points: &[f64], k: usize, options: &EmOptions) -> MixtureFit {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let restarts = if k == 1 { 1 } else { options.restarts.max(1) };
    let mut best: Option<MixtureFit> = None;
    for r in 0..restarts {
        let centres =
            if r == 0 { quantile_centres(points, k) } else { kmeans_pp_centres(points, k, &mut rng) };
        let init = lloyd_init(points, centres, options.variance_floor);
        let fit = run_em(points, init, options);
        if best.as_ref().is_none_or(|b| fit.log_likelihood > b.log_likelihood) {
            best = Some(fit);
        }
    }
    best.expect("restarts >= 1")
}

fn quantile_centres(points: &[f64], k: usize) -> Vec<f64> {
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    (0..k)
        .map(|j| {
            let q = (j as f64 + 0.5) / k as f64;
            sorted[((q * sorted.len() as f64) as usize).min(sorted.len() - 1)]
        })
        .collect()
}

fn kmeans_pp_centres<R: Rng>(points: &[f64], k: usize, rng: &mut R) -> Vec<f64> {
    let mut centres = vec![points[rng.random_range(0..points.len())]];
    let mut d2: Vec<f64> = points.iter().map(|x| (x - centres[0]).powi(2)).collect();
    while centres.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            points[rng.random_range(0..points.len())]
        } else {
            let mut u = rng.random::<f64>() * total;
            let mut pick = points.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                if u < d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            points[pick]
        };
        for (d, x) in d2.iter_mut().zip(points) {
            *d = d.min((x - next).powi(2));
        }
        centres.push(next);
    }
    centres
}

/// A few Lloyd iterations, then moment estimates per hard cluster.
fn lloyd_init(points: &[f64], mut centres: Vec<f64>, floor: f64) -> Vec<GaussianComponent> {
    let k = centres.len();
    let mut labels = vec![0usize; points.len()];
    for _ in 0..20 {
        let mut changed = false;
        for (label, &x) in labels.iter_mut().zip(points) {
            let best = (0..k)
                .min_by(|&a, &b| (x - centres[a]).abs().total_cmp(&(x - centres[b]).abs()))
                .unwrap_or(0);
            if *label != best {
                *label = best;
                changed = true;
            }
        }
        let mut sums = vec![(0.0, 0usize); k];
        for (&l, &x) in labels.iter().zip(points) {
            sums[l].0 += x;
            sums[l].1 += 1;
        }
        for (c, &(s, n)) in centres.iter_mut().zip(&sums) {
            if n > 0 {
                *c = s / n as f64;
            }
        }
        if !changed {
            break;
        }
    }
    let n = points.len() as f64;
    let global_mean = points.iter().sum::<f64>() / n;
    let global_var = points.iter().map(|x| (x - global_mean).powi(2)).sum::<f64>() / n;
    (0..k)
        .filter_map(|j| {
            let members: Vec<f64> =
                labels.iter().zip(points).filter(|(&l, _)| l == j).map(|(_, &x)| x).collect();
            if members.is_empty() {
                return None;
            }
            let m = members.iter().sum::<f64>() / members.len() as f64;
            let v = members.iter().map(|x| (x - m).powi(2)).sum::<f64>() / members.len() as f64;
            let v = if members.len() > 1 && v > floor { v } else { (global_var / (k * k) as f64).max(floor) };
            Some(GaussianComponent { weight: members.len() as f64 / n, mean: m, variance: v })
        })
        .collect()
}

fn ln_normal(x: f64, mean: f64, variance: f64) -> f64 {
    -0.5 * ((2.0 * std::f64::consts::PI * variance).ln() + (x - mean).powi(2) / variance)
}

/// E-step: fills `resp` with posteriors and returns the total log-likelihood.
fn e_step(points: &[f64], comps: &[GaussianComponent], resp: &mut [Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for (row, &x) in resp.iter_mut().zip(points) {
        row.clear();
        row.extend(comps.iter().map(|c| c.weight.ln() + ln_normal(x, c.mean, c.variance)));
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
        let lse = max + sum.ln();
        for v in row.iter_mut() {
            *v = (*v - lse).exp();
        }
        total += lse;
    }
    total
}

fn mixture_aic(k: usize, ll: f64) -> f64 {
    2.0 * (3 * k - 1) as f64 - 2.0 * ll
}

fn run_em(points: &[f64], mut comps: Vec<GaussianComponent>, options: &EmOptions) -> MixtureFit {
    let n = points.len();
    let floor = options.variance_floor;
    let mut resp: Vec<Vec<f64>> = vec![Vec::with_capacity(comps.len()); n];
    if comps.len() == 1 {
        comps[0].variance = comps[0].variance.max(floor);
    }
    let mut ll = e_step(points, &comps, &mut resp);
    let mut trace = vec![ll];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iterations {
        iterations += 1;
        // M-step.
        let k = comps.len();
        let mut next = Vec::with_capacity(k);
        let mut degenerate = false;
        for j in 0..k {
            let nk: f64 = resp.iter().map(|r| r[j]).sum();
            if nk <= 1e-10 {
                degenerate = true;
                continue;
            }
            let mean = resp.iter().zip(points).map(|(r, &x)| r[j] * x).sum::<f64>() / nk;
            let var = resp.iter().zip(points).map(|(r, &x)| r[j] * (x - mean).powi(2)).sum::<f64>() / nk;
            if var < floor && k > 1 {
                degenerate = true;
                continue;
            }
            next.push(GaussianComponent { weight: nk / n as f64, mean, variance: var.max(floor) });
        }
        if degenerate {
            // Drop the collapsed components and restart from what is left.
            if next.is_empty() {
                let mean = points.iter().sum::<f64>() / n as f64;
                let var = points.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
                next.push(GaussianComponent { weight: 1.0, mean, variance: var.max(floor) });
            }
            let total: f64 = next.iter().map(|c| c.weight).sum();
            for c in &mut next {
                c.weight /= total;
            }
            comps = next;
            ll = e_step(points, &comps, &mut resp);
            trace = vec![ll];
            continue;
        }
        comps = next;
        let new_ll = e_step(points, &comps, &mut resp);
        debug_assert!(
            new_ll >= ll - 1e-9 * ll.abs().max(1.0),
            "EM log-likelihood decreased: {ll} -> {new_ll}"
        );
        trace.push(new_ll);
        let delta = (new_ll - ll) / n as f64;
        ll = new_ll;
        if delta.abs() < options.tolerance {
            converged = true;
            break;
        }
    }

    // Present components in ascending mean order.
    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.sort_by(|&a, &b| comps[a].mean.total_cmp(&comps[b].mean));
    let components: Vec<GaussianComponent> = order.iter().map(|&j| comps[j]).collect();
    let posteriors = resp.iter().map(|r| order.iter().map(|&j| r[j]).collect()).collect();
    MixtureFit {
        aic: mixture_aic(components.len(), ll),
        components,
        posteriors,
        log_likelihood: ll,
        iterations,
        converged,
        trace,
    }
}

/// A point's membership in one cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub point_index: usize,
    pub component_index: usize,
    pub posterior: f64,
}

pub const DEFAULT_ASSIGNMENT_THRESHOLD: f64 = 0.05;

/// Assigns each point to every component whose posterior exceeds `threshold`.
/// Each point also keeps its most probable component, so no point is lost.
pub fn assign_clusters(posteriors: &[Vec<f64>], threshold: f64) -> Vec<ClusterAssignment> {
    let mut out = Vec::new();
    for (i, row) in posteriors.iter().enumerate() {
        let argmax =
            row.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0))).map(|(j, _)| j);
        for (j, &p) in row.iter().enumerate() {
            if p > threshold || Some(j) == argmax {
                out.push(ClusterAssignment { point_index: i, component_index: j, posterior: p });
            }
        }
    }
    out
}
