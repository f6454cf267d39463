use std::f64::consts::PI;

use super::pochhammer::{euler_phi, log_poch_single, pochhammer_single};
use super::util::lattice_distance;
use super::{Characteristics, Nome, C64, I};
use crate::error::{Error, Result};
use crate::policy::TruncationPolicy;

const MAX_MODULAR_STEPS: usize = 64;

/// Theta function with characteristics,
/// `sum_m exp(i pi (m+g1)^2 tau + 2 i pi (m+g1)(xi+g2))`.
///
/// For `Im tau` below the policy switch the argument is first moved by
/// `tau -> tau - n` and `tau -> -1/tau` until the series converges quickly.
pub fn theta_char(ch: Characteristics, xi: C64, tau: C64, policy: &TruncationPolicy) -> Result<C64> {
    let (log_scale, sum) = theta_char_scaled(ch.g1, ch.g2, xi, tau, policy)?;
    Ok(sum * log_scale.exp())
}

/// Distance from `xi` to the zero set of `theta[g1, g2](., tau)`.
pub fn theta_zero_distance(ch: Characteristics, xi: C64, tau: C64) -> f64 {
    let shifted = xi - (0.5 - ch.g2) - (0.5 - ch.g1) * tau;
    lattice_distance(shifted, tau)
}

/// Returns `(L, s)` with `theta = exp(L) * s` and `|s|` of order one.
pub(crate) fn theta_char_scaled(
    g1: f64,
    g2: f64,
    xi: C64,
    tau: C64,
    policy: &TruncationPolicy,
) -> Result<(C64, C64)> {
    if !(tau.im > 0.0) || !tau.im.is_finite() {
        return Err(Error::Domain(format!("theta needs Im tau > 0, got {tau}")));
    }
    let (mut a, mut b, mut xi, mut tau) = (g1, g2, xi, tau);
    let mut log_f = C64::new(0.0, 0.0);
    let mut steps = 0;
    loop {
        a -= a.round();
        let k = b.round();
        if k != 0.0 {
            log_f += 2.0 * PI * I * a * k;
            b -= k;
        }
        let n = tau.re.round();
        if n != 0.0 {
            log_f += -PI * I * n * a * (1.0 + a);
            b += n * (a + 0.5);
            tau -= n;
            let k = b.round();
            log_f += 2.0 * PI * I * a * k;
            b -= k;
        }
        if tau.im >= policy.modular_switch_im_tau {
            break;
        }
        steps += 1;
        if steps > MAX_MODULAR_STEPS {
            return Err(Error::Convergence(format!("modular reduction stalled at tau = {tau}")));
        }
        log_f += -0.5 * (-I * tau).ln() - PI * I * xi * xi / tau + 2.0 * PI * I * a * b;
        let (na, nb) = (-b, a);
        a = na;
        b = nb;
        xi /= tau;
        tau = -1.0 / tau;
    }
    let (e0, sum) = direct_sum(a, b, xi, tau, policy)?;
    Ok((log_f + e0, sum))
}

fn direct_sum(a: f64, b: f64, xi: C64, tau: C64, policy: &TruncationPolicy) -> Result<(f64, C64)> {
    let ti = tau.im;
    let m0 = (-xi.im / ti - a).round();
    let exponent = |m: f64| {
        let k = m + a;
        PI * I * k * k * tau + 2.0 * PI * I * k * (xi + b)
    };
    let e_center = exponent(m0);
    let e0 = e_center.re;
    let mut sum = (e_center - e0).exp();
    let mut k = 1usize;
    loop {
        let kf = k as f64;
        sum += (exponent(m0 + kf) - e0).exp() + (exponent(m0 - kf) - e0).exp();
        let next = kf + 1.0;
        let bound = 2.0 * (-PI * ti * (next * next - next)).exp() / (1.0 - (-2.0 * PI * ti * next).exp());
        if bound < policy.series_tail_tol {
            break;
        }
        k += 1;
        if k > policy.max_terms {
            return Err(Error::Convergence(format!(
                "theta series needs more than {} terms at tau = {tau}",
                policy.max_terms
            )));
        }
    }
    Ok((e0, sum))
}

/// Jacobi theta `Theta_p(z) = (p;p) (z;p) (p/z;p)`.
pub fn jacobi_big_theta(z: C64, nome: Nome, policy: &TruncationPolicy) -> Result<C64> {
    if !(nome.p.norm() < 1.0) {
        return Err(Error::Domain(format!("|p| must be < 1, got {}", nome.p.norm())));
    }
    if z == C64::new(0.0, 0.0) {
        return Err(Error::Domain("Theta_p(z) is undefined at z = 0".into()));
    }
    if nome.p.norm() <= 1.0 - policy.modular_switch_im_tau {
        return product_theta(z, nome.p, policy);
    }
    let tau = nome.tau().expect("nonzero nome");
    let xi = z.ln() / (2.0 * PI * I);
    theta_route(xi, tau, policy)
}

/// `Theta_p(exp(2 i pi w))` with `p = exp(2 i pi tau)`, taking the additive
/// argument so that large powers of `p` never have to be formed.
pub fn big_theta_additive(w: C64, tau: C64, policy: &TruncationPolicy) -> Result<C64> {
    Ok(big_theta_additive_log(w, tau, policy)?.exp())
}

/// Logarithm of [`big_theta_additive`] (any branch). Near `|p| = 1` the
/// values underflow long before their ratios lose meaning.
pub fn big_theta_additive_log(w: C64, tau: C64, policy: &TruncationPolicy) -> Result<C64> {
    if !(tau.im > 0.0) {
        return Err(Error::Domain(format!("Theta needs Im tau > 0, got {tau}")));
    }
    let p = (2.0 * PI * I * tau).exp();
    if p.norm() <= 1.0 - policy.modular_switch_im_tau {
        let x = (2.0 * PI * I * w).exp();
        return Ok(log_poch_single(p, p, policy)?.0
            + log_poch_single(x, p, policy)?.0
            + log_poch_single(p / x, p, policy)?.0);
    }
    let (log_scale, sum) = theta_char_scaled(0.5, 0.5, w, tau, policy)?;
    Ok(log_scale - PI * I * tau / 4.0 + PI * I * w + (I * sum).ln())
}

fn product_theta(z: C64, p: C64, policy: &TruncationPolicy) -> Result<C64> {
    Ok(euler_phi(Nome { p, tau: None }, policy)?
        * pochhammer_single(z, p, policy)?
        * pochhammer_single(p / z, p, policy)?)
}

fn theta_route(w: C64, tau: C64, policy: &TruncationPolicy) -> Result<C64> {
    let (log_scale, sum) = theta_char_scaled(0.5, 0.5, w, tau, policy)?;
    let pref = -PI * I * tau / 4.0 + PI * I * w;
    Ok(I * sum * (log_scale + pref).exp())
}
