//! Theta functions, q-Pochhammer products, the Barnes double sine and the
//! scaled normaliser built on it.

mod barnes;
mod pochhammer;
pub mod quadrature;
mod theta;
mod util;

pub use barnes::{log_s2, s0, s0_with_period, theta_ratio_limit, ScalingTuple};
pub use pochhammer::{euler_phi, kappa_inv, pochhammer_double, pochhammer_single};
pub use theta::{big_theta_additive, big_theta_additive_log, jacobi_big_theta, theta_char, theta_zero_distance};
pub use util::{cexpm1, lattice_distance, sine_zero_distance};
pub(crate) use util::guard_sine;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Elliptic nome `p = exp(2 i pi tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nome {
    pub p: C64,
    /// Kept when the nome was built from `tau`, so the modular route does not
    /// have to take a logarithm.
    pub tau: Option<C64>,
}

impl Nome {
    pub fn from_tau(tau: C64) -> Result<Self> {
        if !(tau.im > 0.0) {
            return Err(Error::Domain(format!("Im tau must be positive, got {tau}")));
        }
        Ok(Nome { p: (2.0 * std::f64::consts::PI * I * tau).exp(), tau: Some(tau) })
    }

    pub fn from_p(p: C64) -> Result<Self> {
        if !(p.norm() < 1.0) {
            return Err(Error::Domain(format!("|p| must be < 1, got {}", p.norm())));
        }
        Ok(Nome { p, tau: None })
    }

    /// `tau` with `p = exp(2 i pi tau)`; principal branch when only `p` is known.
    pub fn tau(&self) -> Option<C64> {
        if let Some(t) = self.tau {
            return Some(t);
        }
        if self.p == C64::new(0.0, 0.0) {
            None
        } else {
            Some(self.p.ln() / (2.0 * std::f64::consts::PI * I))
        }
    }
}

/// Rational theta characteristics `[g1, g2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Characteristics {
    pub g1: f64,
    pub g2: f64,
}

impl Characteristics {
    pub fn new(g1: f64, g2: f64) -> Self {
        Characteristics { g1, g2 }
    }

    /// `[n1/den, n2/den]`.
    pub fn rational(n1: i64, n2: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Domain("zero denominator in characteristics".into()));
        }
        Ok(Characteristics { g1: n1 as f64 / den as f64, g2: n2 as f64 / den as f64 })
    }

    pub fn half() -> Self {
        Characteristics { g1: 0.5, g2: 0.5 }
    }
}

/// Barnes periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Periods {
    pub w1: C64,
    pub w2: C64,
}

impl Periods {
    pub fn new(w1: C64, w2: C64) -> Result<Self> {
        if !(w1.re > 0.0 && w2.re > 0.0) {
            return Err(Error::Domain(format!(
                "Barnes periods need positive real parts, got ({w1}, {w2})"
            )));
        }
        Ok(Periods { w1, w2 })
    }

    pub fn real(w1: f64, w2: f64) -> Result<Self> {
        Periods::new(C64::new(w1, 0.0), C64::new(w2, 0.0))
    }

    pub fn sum(&self) -> C64 {
        self.w1 + self.w2
    }
}
