//! Walk-speed mixture model: converts device walk times to speeds, fits the
//! mixture, and samples gate-to-immigration walk times from it.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::em::{assign_clusters, em_cluster, EmOptions, EmResult, DEFAULT_ASSIGNMENT_THRESHOLD};
use super::families::{fit_all_families, Family, FitReport};
use super::CalibrateError;
use crate::ingest::WalkObservation;

pub const MAX_SPEED_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub family: Family,
    pub p1: f64,
    pub p2: f64,
}

/// Mixture distribution of walk speeds (m/s) plus gate distances (m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSpeedModel {
    pub components: Vec<MixtureComponent>,
    pub gate_distances: BTreeMap<String, f64>,
}

impl WalkSpeedModel {
    pub fn validate(&self) -> Result<(), CalibrateError> {
        if self.components.is_empty() {
            return Err(CalibrateError::InvalidModel("mixture has no components".into()));
        }
        let mut total = 0.0;
        for c in &self.components {
            if !(c.weight.is_finite() && c.weight >= 0.0) {
                return Err(CalibrateError::InvalidModel(format!("bad weight {}", c.weight)));
            }
            c.family.validate_params(c.p1, c.p2).map_err(CalibrateError::InvalidModel)?;
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(CalibrateError::InvalidModel(format!("weights sum to {total}")));
        }
        for (gate, &d) in &self.gate_distances {
            if !(d.is_finite() && d > 0.0) {
                return Err(CalibrateError::InvalidModel(format!("gate {gate} distance {d}")));
            }
        }
        Ok(())
    }

    pub fn distance(&self, gate: &str) -> Option<f64> {
        self.gate_distances.get(gate).copied()
    }

    /// Draws one positive walk speed; nonpositive draws are redrawn.
    pub fn sample_speed<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64, CalibrateError> {
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        for _ in 0..MAX_SPEED_REDRAWS {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = None;
            for c in &self.components {
                if u < c.weight {
                    chosen = Some(c);
                    break;
                }
                u -= c.weight;
            }
            let c = match chosen {
                Some(c) => c,
                // Rounding at the top end: fall back to the last weighted component.
                None => match self.components.iter().rev().find(|c| c.weight > 0.0) {
                    Some(c) => c,
                    None => return Err(CalibrateError::InvalidModel("all weights are zero".into())),
                },
            };
            let speed = c.family.sample(c.p1, c.p2, rng);
            if speed.is_finite() && speed > 0.0 {
                return Ok(speed);
            }
        }
        Err(CalibrateError::NonPositiveSpeeds(MAX_SPEED_REDRAWS))
    }
}

/// Walk speed = gate distance / walk time. Observations whose gate has no
/// distance are dropped and counted.
pub fn walk_times_to_speeds(
    observations: &[WalkObservation],
    distances: &BTreeMap<String, f64>,
) -> Result<(Vec<f64>, usize), CalibrateError> {
    if distances.is_empty() {
        return Err(CalibrateError::NoDistances);
    }
    let mut missing = 0;
    let mut speeds = Vec::with_capacity(observations.len());
    for o in observations {
        match distances.get(&o.gate) {
            Some(&d) if o.walk_time > 0.0 => speeds.push(d / o.walk_time),
            _ => missing += 1,
        }
    }
    Ok((speeds, missing))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkFitOptions {
    pub em: EmOptions,
    pub assignment_threshold: f64,
}

impl Default for WalkFitOptions {
    fn default() -> Self {
        WalkFitOptions { em: EmOptions::default(), assignment_threshold: DEFAULT_ASSIGNMENT_THRESHOLD }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSpeedFit {
    pub model: WalkSpeedModel,
    pub clustering: EmResult,
    pub reports: Vec<FitReport>,
}

pub const MIN_SPEED_POINTS: usize = 10;

/// EM clustering, overlapping cluster assignment, per-cluster family fit by
/// AIC, then a mixture weighted by the EM coefficients renormalised over
/// the clusters that could be fit.
pub fn build_walk_speed_model(
    speeds: &[f64],
    distances: &BTreeMap<String, f64>,
    options: &WalkFitOptions,
) -> Result<WalkSpeedFit, CalibrateError> {
    if speeds.len() < MIN_SPEED_POINTS {
        return Err(CalibrateError::TooFewPoints { needed: MIN_SPEED_POINTS, got: speeds.len() });
    }
    let clustering = em_cluster(speeds, &options.em)?;
    let fit = &clustering.selected;
    let assignments = assign_clusters(&fit.posteriors, options.assignment_threshold);

    let mut clusters: Vec<Vec<f64>> = vec![Vec::new(); fit.components.len()];
    for a in &assignments {
        clusters[a.component_index].push(speeds[a.point_index]);
    }

    let mut reports = Vec::with_capacity(clusters.len());
    let mut components = Vec::new();
    for (j, points) in clusters.iter().enumerate() {
        let weight = fit.components[j].weight;
        let report = fit_all_families(j, weight, points);
        if let Some(family) = report.selected {
            let f = report.per_family[&family];
            components.push(MixtureComponent { weight, family, p1: f.p1, p2: f.p2 });
        }
        reports.push(report);
    }
    if components.is_empty() {
        return Err(CalibrateError::NoFeasibleFamily);
    }
    let total: f64 = components.iter().map(|c| c.weight).sum();
    for c in &mut components {
        c.weight /= total;
    }
    let model = WalkSpeedModel { components, gate_distances: distances.clone() };
    model.validate()?;
    Ok(WalkSpeedFit { model, clustering, reports })
}

/// Walk time (s) from `gate` to immigration: distance over a sampled speed.
pub fn sample_walk_time<R: Rng + ?Sized>(
    model: &WalkSpeedModel,
    gate: &str,
    rng: &mut R,
) -> Result<f64, CalibrateError> {
    let distance = model.distance(gate).ok_or_else(|| CalibrateError::UnknownGate(gate.to_string()))?;
    Ok(distance / model.sample_speed(rng)?)
}
