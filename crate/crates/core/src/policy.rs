use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cutoffs and controls for every series, product and quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruncationPolicy {
    pub series_tail_tol: f64,
    pub max_terms: usize,
    pub product_tail_tol: f64,
    pub quadrature_abs_tol: f64,
    pub quadrature_max_subdivisions: usize,
    pub modular_switch_im_tau: f64,
    pub pole_radius: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            series_tail_tol: 1e-16,
            max_terms: 5000,
            product_tail_tol: 1e-17,
            quadrature_abs_tol: 1e-13,
            quadrature_max_subdivisions: 200,
            modular_switch_im_tau: 0.5,
            pole_radius: 1e-6,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("series_tail_tol", self.series_tail_tol),
            ("product_tail_tol", self.product_tail_tol),
            ("quadrature_abs_tol", self.quadrature_abs_tol),
            ("pole_radius", self.pole_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_terms < 8 {
            return Err(Error::Config(format!("max_terms must be >= 8, got {}", self.max_terms)));
        }
        if self.quadrature_max_subdivisions == 0 {
            return Err(Error::Config("quadrature_max_subdivisions must be >= 1".into()));
        }
        if !(self.modular_switch_im_tau > 0.0 && self.modular_switch_im_tau < 1.0) {
            return Err(Error::Config(format!(
                "modular_switch_im_tau must lie in (0, 1), got {}",
                self.modular_switch_im_tau
            )));
        }
        Ok(())
    }

    /// Same policy with a wider pole radius.
    pub fn with_pole_radius(mut self, radius: f64) -> Self {
        self.pole_radius = self.pole_radius.max(radius);
        self
    }
}
