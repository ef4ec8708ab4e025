//! Tunable constants for the bound checks.
//!
//! The asymptotic statements being checked only fix scaling, not constants,
//! so every constant that multiplies a bound lives here.

use serde::{Deserialize, Serialize};

use crate::operators::DEFAULT_DIM_CAP;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Constants {
    /// Multiplier on `T^3 kappa^2` for modified-Kitaev eigenvalue deviations.
    pub c_dev: f64,
    /// Multiplier on `T^3 kappa` for the low-energy projector distance.
    pub c_proj: f64,
    /// Multiplier on the Schrieffer-Wolff generator and truncation bounds.
    pub c_sw: f64,
    /// Multiplier on the first-order simulation bounds.
    pub c_first_order: f64,
    pub dim_cap: usize,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            c_dev: 10.0,
            c_proj: 10.0,
            c_sw: 4.0,
            c_first_order: 8.0,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

impl Constants {
    /// Set a constant by its command-line name (`C_dev`, `C_proj`, `C_sw`,
    /// `C_first_order`, `cap`). Names are case-insensitive.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        if !(value.is_finite() && value > 0.0) {
            return Err(format!("constant {name} must be positive, got {value}"));
        }
        match name.to_ascii_lowercase().as_str() {
            "c_dev" => self.c_dev = value,
            "c_proj" => self.c_proj = value,
            "c_sw" => self.c_sw = value,
            "c_first_order" | "c_fo" => self.c_first_order = value,
            "cap" | "dim_cap" => self.dim_cap = value as usize,
            _ => return Err(format!("unknown constant `{name}`")),
        }
        Ok(())
    }
}
