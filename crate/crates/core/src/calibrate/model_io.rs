//! JSON document holding a calibrated walk-speed mixture and service-rate
//! distribution.
//!
//! ```json
//! {
//!   "components": [{"weight": 0.8, "family": "lognormal", "p1": 0.1, "p2": 0.4}],
//!   "gate_distances": {"53": 310.0},
//!   "per_desk_rates": [14.5, 16.0],
//!   "rate_bin_width_s": 900.0
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::service::ServiceRateModel;
use super::walk::{MixtureComponent, WalkSpeedModel};
use super::CalibrateError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibratedModels {
    pub components: Vec<MixtureComponent>,
    pub gate_distances: BTreeMap<String, f64>,
    pub per_desk_rates: Vec<f64>,
    #[serde(default = "default_bin_width")]
    pub rate_bin_width_s: f64,
}

fn default_bin_width() -> f64 {
    crate::time::DEFAULT_BIN_WIDTH as f64
}

impl CalibratedModels {
    pub fn new(walk: &WalkSpeedModel, service: &ServiceRateModel) -> Self {
        CalibratedModels {
            components: walk.components.clone(),
            gate_distances: walk.gate_distances.clone(),
            per_desk_rates: service.per_desk_rates.clone(),
            rate_bin_width_s: service.bin_width,
        }
    }

    pub fn walk_model(&self) -> WalkSpeedModel {
        WalkSpeedModel { components: self.components.clone(), gate_distances: self.gate_distances.clone() }
    }

    pub fn service_model(&self) -> ServiceRateModel {
        ServiceRateModel {
            per_desk_rates: self.per_desk_rates.clone(),
            bin_width: self.rate_bin_width_s,
            source_windows: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), CalibrateError> {
        self.walk_model().validate()?;
        self.service_model().validate()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("models serialise");
        s.push('\n');
        s
    }

    /// Parses and validates a model document.
    pub fn from_json(text: &str) -> Result<Self, CalibrateError> {
        let models: CalibratedModels =
            serde_json::from_str(text).map_err(|e| CalibrateError::InvalidModel(e.to_string()))?;
        models.validate()?;
        Ok(models)
    }
}
