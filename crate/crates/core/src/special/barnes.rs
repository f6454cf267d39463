use std::f64::consts::PI;

use super::quadrature::integrate;
use super::util::{cexpm1, guard_sine, sine_zero_distance};
use super::{Periods, C64, I};
use crate::error::{Error, Result};
use crate::policy::TruncationPolicy;

/// Taylor coefficients of `log(sinh(u)/u)` in powers of `u^2`.
const LOG_SINHC: [f64; 12] = [
    1.6666666666666666667e-1,
    -5.5555555555555555556e-3,
    3.5273368606701940035e-4,
    -2.6455026455026455026e-5,
    2.1377799155576933355e-6,
    -1.8036702340053310071e-7,
    1.5661391322766984143e-8,
    -1.3884130493737299423e-9,
    1.250435917600499603e-10,
    -1.1402575602296091433e-11,
    1.0502923908637556408e-12,
    -9.7548778415937016497e-14,
];

/// `sum_k c_k u^{2k} / t^2` for `u = v t`, i.e. the small-t log-sinhc series
/// divided by `t^2`.
fn log_sinhc_over_t2(v: C64, t: f64) -> C64 {
    let v2 = v * v;
    let x = v2 * t * t;
    let mut acc = C64::new(0.0, 0.0);
    let mut pw = v2;
    for (k, c) in LOG_SINHC.iter().enumerate() {
        if k > 0 {
            pw *= x;
        }
        acc += *c * pw;
    }
    acc
}

fn expm1_over(l: C64) -> C64 {
    if l.norm() < 1e-3 {
        1.0 + l * (0.5 + l * (1.0 / 6.0 + l / 24.0))
    } else {
        cexpm1(l) / l
    }
}

/// Integrand whose integral over `(0, inf)` is `-log S2(x)` in the strip.
fn strip_integrand(t: f64, x: C64, w1: C64, w2: C64) -> C64 {
    let a = w1 + w2 - 2.0 * x;
    let lead = a / (w1 * w2);
    let reach = 0.5 * t * a.norm().max(w1.norm()).max(w2.norm());
    if reach < 0.5 {
        let l_t2 = log_sinhc_over_t2(0.5 * a, t) - log_sinhc_over_t2(0.5 * w1, t) - log_sinhc_over_t2(0.5 * w2, t);
        let l = l_t2 * t * t;
        return lead * expm1_over(l) * l_t2;
    }
    let num = -(-x * t).exp() * cexpm1(-a * t);
    let den = cexpm1(-w1 * t) * cexpm1(-w2 * t);
    (num / den - lead / t) / t
}

fn log_s2_strip(x: C64, periods: &Periods, policy: &TruncationPolicy) -> Result<C64> {
    let (w1, w2) = (periods.w1, periods.w2);
    let a = w1 + w2 - 2.0 * x;
    let decay = x.re.min((w1 + w2 - x).re);
    if !(decay > 0.0) {
        return Err(Error::Domain(format!("S2 strip evaluation outside the strip at x = {x}")));
    }
    let tol = policy.quadrature_abs_tol;
    let upper = ((1.0 / (tol * decay)).ln().max(1.0) + 5.0) / decay;
    let scale = 1.0 / w1.norm().max(w2.norm()).max(0.5 * a.norm());
    let mut breaks = vec![0.0];
    let mut t = scale;
    while t < upper {
        breaks.push(t);
        t *= 2.0;
    }
    breaks.push(upper);
    let (value, _) = integrate(
        |t| strip_integrand(t, x, w1, w2),
        &breaks,
        0.5 * tol,
        policy.quadrature_max_subdivisions,
    )?;
    let tail = -a / (w1 * w2 * upper);
    Ok(-(value + tail))
}

/// Logarithm of the Barnes double sine `S2(x | w1, w2)`, normalised so that
/// `S2(x + w1) = S2(x) / (2 sin(pi x / w2))` and `S2(x) S2(w1 + w2 - x) = 1`.
///
/// The argument is moved into the strip `0 < Re x < Re(w1 + w2)` with the
/// shift identity and the remainder is an integral over `(0, inf)`.
pub fn log_s2(x: C64, periods: Periods, policy: &TruncationPolicy) -> Result<C64> {
    let Periods { w1, w2 } = Periods::new(periods.w1, periods.w2)?;
    let (big, small) = if w1.re >= w2.re { (w1, w2) } else { (w2, w1) };
    let lo = 0.5 * small.re;
    let hi = (w1 + w2).re - 0.5 * small.re;
    let scale = PI / small.norm();
    let mut x = x;
    let mut acc = C64::new(0.0, 0.0);
    let mut shifts = 0usize;
    while x.re < lo {
        let s = guard_sine(PI * x / small, scale, "zero of S2", policy)?;
        acc += (2.0 * s).ln();
        x += big;
        shifts += 1;
        if shifts > policy.max_terms {
            return Err(Error::Convergence("S2 shift reduction exceeded max_terms".into()));
        }
    }
    while x.re > hi {
        x -= big;
        let s = guard_sine(PI * x / small, scale, "pole of S2", policy)?;
        acc -= (2.0 * s).ln();
        shifts += 1;
        if shifts > policy.max_terms {
            return Err(Error::Convergence("S2 shift reduction exceeded max_terms".into()));
        }
    }
    Ok(acc + log_s2_strip(x, &Periods { w1, w2 }, policy)?)
}

/// Scalar normaliser of the scaled R-matrix,
/// `S2(-y) S2(1+y) / (S2(y) S2(1-y))` with `y = i beta / pi` and periods `(r, N)`.
pub fn s0(beta: C64, r: f64, n: usize, policy: &TruncationPolicy) -> Result<C64> {
    s0_with_period(beta, C64::new(r, 0.0), n, policy)
}

/// As [`s0`] with a complex deformation period (used after `r -> r - c`).
///
/// `S2(-y)/S2(y)` is rewritten as `-S2(r-y)/S2(r+y)` through the shift
/// identity, which removes the removable singularity at `beta = 0`; the value
/// there is `-1`.
pub fn s0_with_period(beta: C64, r: C64, n: usize, policy: &TruncationPolicy) -> Result<C64> {
    if n < 2 {
        return Err(Error::Domain(format!("N must be >= 2, got {n}")));
    }
    let periods = Periods::new(r, C64::new(n as f64, 0.0))?;
    let y = I * beta / PI;
    let one = C64::new(1.0, 0.0);
    let l = log_s2(r - y, periods, policy)? + log_s2(one + y, periods, policy)?
        - log_s2(r + y, periods, policy)?
        - log_s2(one - y, periods, policy)?;
    Ok(-l.exp())
}

/// Argument tuple `(n, u, v, m)` of a theta factor
/// `Theta_{p^n}(p^u q^{2v} z^{2m})` in the scaling limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingTuple {
    pub n: f64,
    pub u: f64,
    pub v: f64,
    pub m: f64,
}

/// Closed-form scaling limit of a ratio of two theta factors. Identical
/// tuples give 1 even where both factors vanish.
///
/// `sin(pi (u r + v + i m beta/pi)/(n r)) / sin(pi (u' r + v' + i m' beta/pi)/(n' r))`.
pub fn theta_ratio_limit(
    num: ScalingTuple,
    den: ScalingTuple,
    beta: C64,
    r: f64,
    policy: &TruncationPolicy,
) -> Result<C64> {
    if num == den {
        return Ok(C64::new(1.0, 0.0));
    }
    let arg = |t: ScalingTuple| PI * (t.u * r + t.v + I * t.m * beta / PI) / (t.n * r);
    let d = arg(den);
    let dist = sine_zero_distance(d);
    if dist < policy.pole_radius {
        return Err(Error::Pole { what: "theta ratio limit denominator".into(), distance: dist });
    }
    Ok(arg(num).sin() / d.sin())
}
