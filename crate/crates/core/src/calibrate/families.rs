//! Maximum-likelihood fits for the candidate walk-speed families and AIC
//! based selection between them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use super::CalibrateError;

/// Candidate families, declared in AIC tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `p1` = location, `p2` = scale.
    Logistic,
    /// `p1` = mean of ln x, `p2` = standard deviation of ln x.
    Lognormal,
    /// `p1` = shape, `p2` = scale.
    Gamma,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Logistic, Family::Lognormal, Family::Gamma];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Logistic => "logistic",
            Family::Lognormal => "lognormal",
            Family::Gamma => "gamma",
        }
    }

    /// Number of free parameters.
    pub fn parameter_count(self) -> usize {
        2
    }

    pub fn validate_params(self, p1: f64, p2: f64) -> Result<(), String> {
        if !p1.is_finite() || !p2.is_finite() {
            return Err(format!("{self} parameters must be finite"));
        }
        match self {
            Family::Logistic | Family::Lognormal if p2 < 0.0 => {
                Err(format!("{self} spread parameter must be >= 0, got {p2}"))
            }
            Family::Gamma if p1 <= 0.0 || p2 <= 0.0 => {
                Err(format!("gamma shape and scale must be > 0, got ({p1}, {p2})"))
            }
            _ => Ok(()),
        }
    }

    pub fn ln_pdf(self, p1: f64, p2: f64, x: f64) -> f64 {
        match self {
            Family::Logistic => {
                let z = (x - p1) / p2;
                -z - p2.ln() - 2.0 * softplus(-z)
            }
            Family::Lognormal => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let z = (x.ln() - p1) / p2;
                -x.ln() - p2.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z
            }
            Family::Gamma => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                (p1 - 1.0) * x.ln() - x / p2 - p1 * p2.ln() - ln_gamma(p1)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, p1: f64, p2: f64, rng: &mut R) -> f64 {
        match self {
            Family::Logistic => {
                let u: f64 = rng.random();
                if u <= 0.0 || u >= 1.0 {
                    return p1;
                }
                p1 + p2 * (u / (1.0 - u)).ln()
            }
            Family::Lognormal => {
                let z: f64 = StandardNormal.sample(rng);
                (p1 + p2 * z).exp()
            }
            Family::Gamma => Gamma::new(p1, p2).map(|g| g.sample(rng)).unwrap_or(f64::NAN),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "logistic" => Ok(Family::Logistic),
            "lognormal" => Ok(Family::Lognormal),
            "gamma" => Ok(Family::Gamma),
            other => Err(format!("unknown family {other:?}")),
        }
    }
}

/// ln(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 20.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + 1.0 / x
        + x2 / 2.0
        + (1.0 / x) * x2 * (1.0 / 6.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 42.0 - x2 / 30.0)))
}

/// Maximum-likelihood fit of one family to one cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyFit {
    pub family: Family,
    pub p1: f64,
    pub p2: f64,
    pub log_likelihood: f64,
    /// 2k - 2 ln L.
    pub aic: f64,
}

pub fn aic(parameter_count: usize, log_likelihood: f64) -> f64 {
    2.0 * parameter_count as f64 - 2.0 * log_likelihood
}

fn log_likelihood(family: Family, p1: f64, p2: f64, points: &[f64]) -> f64 {
    points.iter().map(|&x| family.ln_pdf(p1, p2, x)).sum()
}

/// Fits `family` to `points` by maximum likelihood.
///
/// Needs at least three points with nonzero spread; lognormal and gamma
/// additionally need every point strictly positive.
pub fn fit_component(points: &[f64], family: Family) -> Result<FamilyFit, CalibrateError> {
    if points.len() < 3 {
        return Err(CalibrateError::TooFewPoints { needed: 3, got: points.len() });
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(CalibrateError::NonFinite);
    }
    let n = points.len() as f64;
    let mean = points.iter().sum::<f64>() / n;
    let var = points.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if var <= 0.0 {
        return Err(CalibrateError::Infeasible { family, reason: "zero variance".into() });
    }
    if family != Family::Logistic && points.iter().any(|&x| x <= 0.0) {
        return Err(CalibrateError::Infeasible { family, reason: "nonpositive observation".into() });
    }
    let (p1, p2) = match family {
        Family::Logistic => fit_logistic(points, var)?,
        Family::Lognormal => {
            let mu = points.iter().map(|x| x.ln()).sum::<f64>() / n;
            let s2 = points.iter().map(|x| (x.ln() - mu).powi(2)).sum::<f64>() / n;
            if s2 <= 0.0 {
                return Err(CalibrateError::Infeasible { family, reason: "zero log variance".into() });
            }
            (mu, s2.sqrt())
        }
        Family::Gamma => fit_gamma(points, mean)?,
    };
    let ll = log_likelihood(family, p1, p2, points);
    if !ll.is_finite() {
        return Err(CalibrateError::Infeasible { family, reason: "non-finite likelihood".into() });
    }
    Ok(FamilyFit { family, p1, p2, log_likelihood: ll, aic: aic(family.parameter_count(), ll) })
}

fn fit_gamma(points: &[f64], mean: f64) -> Result<(f64, f64), CalibrateError> {
    let n = points.len() as f64;
    let mean_ln = points.iter().map(|x| x.ln()).sum::<f64>() / n;
    let s = mean.ln() - mean_ln;
    if s.is_nan() || s <= 0.0 {
        return Err(CalibrateError::Infeasible { family: Family::Gamma, reason: "degenerate sample".into() });
    }
    // Closed-form starting point, then Newton on ln k - digamma(k) = s.
    let mut k = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    for _ in 0..100 {
        let f = k.ln() - digamma(k) - s;
        let df = 1.0 / k - trigamma(k);
        let next = k - f / df;
        let next = if next <= 0.0 { k / 2.0 } else { next };
        let done = (next - k).abs() <= 1e-12 * k;
        k = next;
        if done {
            break;
        }
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(CalibrateError::NoConvergence("gamma shape"));
    }
    Ok((k, mean / k))
}

/// Newton-Raphson on (location, ln scale) with backtracking.
fn fit_logistic(points: &[f64], var: f64) -> Result<(f64, f64), CalibrateError> {
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 { sorted[m / 2] } else { 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) };
    let mut mu = median;
    let mut tau = (var.sqrt() * 3f64.sqrt() / std::f64::consts::PI).ln();
    let ll_at = |mu: f64, tau: f64| log_likelihood(Family::Logistic, mu, tau.exp(), points);
    let mut ll = ll_at(mu, tau);

    for _ in 0..500 {
        let s = tau.exp();
        let (mut g_mu, mut g_tau, mut h_mm, mut h_mt, mut h_tt) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &x in points {
            let z = (x - mu) / s;
            let q = sigmoid(z);
            let p = q * (1.0 - q);
            let t = 2.0 * q - 1.0;
            g_mu += t;
            g_tau += z * t - 1.0;
            h_mm += p;
            h_mt += t + 2.0 * p * z;
            h_tt += z * t + 2.0 * p * z * z;
        }
        g_mu /= s;
        h_mm *= -2.0 / (s * s);
        h_mt *= -1.0 / s;
        h_tt = -h_tt;

        let grad_norm = (g_mu * s).abs().max(g_tau.abs());
        if grad_norm < 1e-9 * points.len() as f64 {
            break;
        }
        let det = h_mm * h_tt - h_mt * h_mt;
        let (d_mu, d_tau) = if h_mm < 0.0 && det > 0.0 {
            (-(h_tt * g_mu - h_mt * g_tau) / det, -(-h_mt * g_mu + h_mm * g_tau) / det)
        } else {
            let scale = 1.0 / points.len() as f64;
            (g_mu * s * s * scale, g_tau * scale)
        };
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..60 {
            let (nm, nt) = (mu + step * d_mu, tau + step * d_tau);
            let nll = ll_at(nm, nt);
            if nll.is_finite() && nll >= ll {
                mu = nm;
                tau = nt;
                improved = nll > ll;
                ll = nll;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if !(mu.is_finite() && tau.is_finite()) {
        return Err(CalibrateError::NoConvergence("logistic"));
    }
    Ok((mu, tau.exp()))
}

/// Family with the smallest AIC; exact ties resolve to the earlier family in
/// `logistic < lognormal < gamma`. Non-finite AIC values are ignored.
pub fn select_family(reports: &BTreeMap<Family, FamilyFit>) -> Result<Family, CalibrateError> {
    let mut best: Option<(Family, f64)> = None;
    for (&family, fit) in reports {
        if !fit.aic.is_finite() {
            continue;
        }
        match best {
            Some((_, a)) if fit.aic >= a => {}
            _ => best = Some((family, fit.aic)),
        }
    }
    best.map(|(f, _)| f).ok_or(CalibrateError::NoFeasibleFamily)
}

/// Per-cluster fit results for every family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub component_index: usize,
    pub cluster_size: usize,
    pub mixture_weight: f64,
    pub per_family: BTreeMap<Family, FamilyFit>,
    pub infeasible: BTreeMap<Family, String>,
    pub selected: Option<Family>,
}

/// Fits all three families to one cluster and selects the min-AIC one.
pub fn fit_all_families(component_index: usize, mixture_weight: f64, points: &[f64]) -> FitReport {
    let mut per_family = BTreeMap::new();
    let mut infeasible = BTreeMap::new();
    for family in Family::ALL {
        match fit_component(points, family) {
            Ok(fit) => {
                per_family.insert(family, fit);
            }
            Err(e) => {
                infeasible.insert(family, e.to_string());
            }
        }
    }
    let selected = select_family(&per_family).ok();
    FitReport {
        component_index,
        cluster_size: points.len(),
        mixture_weight,
        per_family,
        infeasible,
        selected,
    }
}
