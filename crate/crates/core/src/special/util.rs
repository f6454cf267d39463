use std::f64::consts::PI;

use super::C64;
use crate::error::{Error, Result};
use crate::policy::TruncationPolicy;

/// `exp(z) - 1` without cancellation for small `|z|`.
pub fn cexpm1(z: C64) -> C64 {
    if z.norm() > 0.5 {
        return z.exp() - 1.0;
    }
    let half = (0.5 * z.im).sin();
    C64::new(z.re.exp_m1() * z.im.cos() - 2.0 * half * half, z.re.exp() * z.im.sin())
}

/// Distance from `w` to the lattice `Z + tau Z`.
pub fn lattice_distance(w: C64, tau: C64) -> f64 {
    let n = (w.im / tau.im).round();
    let mut best = f64::INFINITY;
    for dn in -1..=1 {
        let v = w - (n + dn as f64) * tau;
        let m = v.re.round();
        for dm in -1..=1 {
            best = best.min((v - (m + dm as f64)).norm());
        }
    }
    best
}

/// Distance from `u` to the nearest zero of `sin`, i.e. to `pi Z`.
pub fn sine_zero_distance(u: C64) -> f64 {
    let k = (u.re / PI).round();
    (u - k * PI).norm()
}

/// Refuses `sin(u)` as a denominator when `u` is close to `pi Z`.
/// `scale` converts the argument distance into the caller's variable
/// (|du/dbeta| for beta-dependent arguments, 1 otherwise).
pub(crate) fn guard_sine(u: C64, scale: f64, what: &str, policy: &TruncationPolicy) -> Result<C64> {
    let d = sine_zero_distance(u) / scale;
    if d < policy.pole_radius {
        return Err(Error::Pole { what: what.to_string(), distance: d });
    }
    Ok(u.sin())
}
