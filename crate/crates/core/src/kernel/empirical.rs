use serde::{Deserialize, Serialize};

use crate::building::{BuildingSpec, OutOfRange};

/// `T = ct · H^exponent` with `H` the total height in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmpiricalPeriod {
    pub ct: f64,
    pub exponent: f64,
}

impl Default for EmpiricalPeriod {
    /// Reinforced-concrete moment-frame coefficients.
    fn default() -> Self {
        Self {
            ct: 0.0466,
            exponent: 0.9,
        }
    }
}

impl EmpiricalPeriod {
    pub fn for_height(&self, height: f64) -> f64 {
        self.ct * height.powf(self.exponent)
    }
}

/// Ground-truth fundamental period for a building, in seconds.
pub fn empirical_period(
    spec: &BuildingSpec,
    coeffs: &EmpiricalPeriod,
    strict: bool,
) -> Result<f64, OutOfRange> {
    if strict {
        spec.validate()?;
    }
    Ok(coeffs.for_height(spec.total_height()))
}
