use std::f64::consts::PI;

use super::{Nome, C64, I};
use crate::error::{Error, Result};
use crate::policy::TruncationPolicy;

/// Factors with modulus above this are multiplied out; the rest go through
/// the logarithmic power series.
const SERIES_RADIUS: f64 = 0.5;

/// `log (x;p)_inf` and the smallest `|1 - x p^k|` met among the explicit factors.
pub(crate) fn log_poch_single(x: C64, p: C64, policy: &TruncationPolicy) -> Result<(C64, f64)> {
    if !(p.norm() < 1.0) {
        return Err(Error::Domain(format!("(x;p) needs |p| < 1, got {}", p.norm())));
    }
    let mut acc = C64::new(0.0, 0.0);
    let mut closest = f64::INFINITY;
    let mut w = x;
    let mut k = 0usize;
    while w.norm() > SERIES_RADIUS {
        let f = 1.0 - w;
        closest = closest.min(f.norm());
        acc += f.ln();
        w *= p;
        k += 1;
        if k > policy.max_terms {
            return Err(Error::Convergence(format!("(x;p) product exceeds {} factors", policy.max_terms)));
        }
    }
    if w.norm() == 0.0 {
        return Ok((acc, closest));
    }
    let (wa, pa) = (w.norm(), p.norm());
    let mut wn = w;
    let mut pn = p;
    for n in 1..=policy.max_terms {
        let nf = n as f64;
        acc -= wn / (nf * (1.0 - pn));
        let tail = wa.powi(n as i32 + 1) / ((nf + 1.0) * (1.0 - pa.powi(n as i32 + 1)) * (1.0 - wa));
        if tail < policy.product_tail_tol {
            return Ok((acc, closest));
        }
        wn *= w;
        pn *= p;
    }
    Err(Error::Convergence("(x;p) log series did not converge".into()))
}

/// `(x;p)_inf = prod_{k>=0} (1 - x p^k)`.
pub fn pochhammer_single(x: C64, p: C64, policy: &TruncationPolicy) -> Result<C64> {
    if !(p.norm() < 1.0) {
        return Err(Error::Domain(format!("(x;p) needs |p| < 1, got {}", p.norm())));
    }
    if x == p && p.norm() > 1.0 - policy.modular_switch_im_tau {
        return euler_phi(Nome { p, tau: None }, policy);
    }
    Ok(log_poch_single(x, p, policy)?.0.exp())
}

/// Euler function `(p;p)_inf`. Near `|p| = 1` it is taken from the Dedekind
/// eta function after modular reduction of `tau`.
pub fn euler_phi(nome: Nome, policy: &TruncationPolicy) -> Result<C64> {
    let p = nome.p;
    if !(p.norm() < 1.0) {
        return Err(Error::Domain(format!("(p;p) needs |p| < 1, got {}", p.norm())));
    }
    if p.norm() <= 1.0 - policy.modular_switch_im_tau {
        return Ok(log_poch_single(p, p, policy)?.0.exp());
    }
    let tau0 = nome.tau().expect("nonzero nome");
    Ok((log_eta(tau0, policy)? - PI * I * tau0 / 12.0).exp())
}

fn log_eta(tau: C64, policy: &TruncationPolicy) -> Result<C64> {
    let mut tau = tau;
    let mut log_f = C64::new(0.0, 0.0);
    for _ in 0..64 {
        let n = tau.re.round();
        tau -= n;
        log_f += PI * I * n / 12.0;
        if tau.im >= policy.modular_switch_im_tau {
            let p = (2.0 * PI * I * tau).exp();
            return Ok(log_f + PI * I * tau / 12.0 + log_poch_single(p, p, policy)?.0);
        }
        log_f += -0.5 * (-I * tau).ln();
        tau = -1.0 / tau;
    }
    Err(Error::Convergence("eta modular reduction stalled".into()))
}

/// `log (x;p,s)_inf` and the smallest `|1 - x p^a s^b|` among explicit factors.
pub(crate) fn log_poch_double(x: C64, p: C64, s: C64, policy: &TruncationPolicy) -> Result<(C64, f64)> {
    if !(p.norm() < 1.0 && s.norm() < 1.0) {
        return Err(Error::Domain(format!(
            "(x;p,s) needs |p|, |s| < 1, got {} and {}",
            p.norm(),
            s.norm()
        )));
    }
    let mut acc = C64::new(0.0, 0.0);
    let mut closest = f64::INFINITY;
    let mut y = x;
    let mut rows = 0usize;
    while y.norm() > SERIES_RADIUS {
        let (l, c) = log_poch_single(y, p, policy)?;
        acc += l;
        closest = closest.min(c);
        y *= s;
        rows += 1;
        if rows > policy.max_terms {
            return Err(Error::Convergence(format!("(x;p,s) product exceeds {} rows", policy.max_terms)));
        }
    }
    if y.norm() == 0.0 {
        return Ok((acc, closest));
    }
    let (ya, pa, sa) = (y.norm(), p.norm(), s.norm());
    let mut yn = y;
    let mut pn = p;
    let mut sn = s;
    for n in 1..=policy.max_terms {
        let nf = n as f64;
        acc -= yn / (nf * (1.0 - pn) * (1.0 - sn));
        let e = n as i32 + 1;
        let tail = ya.powi(e) / ((nf + 1.0) * (1.0 - pa.powi(e)) * (1.0 - sa.powi(e)) * (1.0 - ya));
        if tail < policy.product_tail_tol {
            return Ok((acc, closest));
        }
        yn *= y;
        pn *= p;
        sn *= s;
    }
    Err(Error::Convergence("(x;p,s) log series did not converge".into()))
}

/// `(x;p,s)_inf = prod_{a,b>=0} (1 - x p^a s^b)`, accumulated in log form.
pub fn pochhammer_double(x: C64, p: C64, s: C64, policy: &TruncationPolicy) -> Result<C64> {
    Ok(log_poch_double(x, p, s, policy)?.0.exp())
}

/// Inverse of the R-matrix normaliser, as a ratio of eight double products
/// with bases `(p, q^{2N})`.
pub fn kappa_inv(z2: C64, p: C64, q: C64, n: usize, policy: &TruncationPolicy) -> Result<C64> {
    if z2 == C64::new(0.0, 0.0) {
        return Err(Error::Domain("kappa_inv needs z^2 != 0".into()));
    }
    if !(p.norm() < 1.0 && q.norm() < 1.0) {
        return Err(Error::Domain(format!("kappa_inv needs |p|, |q| < 1, got {} and {}", p.norm(), q.norm())));
    }
    let nn = n as i32;
    let s = q.powi(2 * nn);
    let q2 = q * q;
    let pq = p * q.powi(2 * nn - 2);
    let numer = [s / z2, q2 * z2, p / z2, pq * z2];
    let denom = [s * z2, q2 / z2, p * z2, pq / z2];
    let mut log_val = C64::new(0.0, 0.0);
    for x in numer {
        log_val += log_poch_double(x, p, s, policy)?.0;
    }
    for x in denom {
        let (l, closest) = log_poch_double(x, p, s, policy)?;
        if closest < policy.pole_radius {
            return Err(Error::Pole { what: "kappa_inv denominator product".into(), distance: closest });
        }
        log_val -= l;
    }
    Ok(log_val.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_single(x: C64, p: C64) -> C64 {
        let mut r = C64::new(1.0, 0.0);
        let mut w = x;
        for _ in 0..4000 {
            r *= 1.0 - w;
            w *= p;
        }
        r
    }

    #[test]
    fn single_matches_brute_product() {
        let pol = TruncationPolicy::default();
        for &(x, p) in &[
            (C64::new(0.7, 0.2), C64::new(0.3, 0.1)),
            (C64::new(3.0, -1.0), C64::new(0.6, 0.0)),
            (C64::new(0.9, 0.0), C64::new(0.95, 0.0)),
        ] {
            let got = pochhammer_single(x, p, &pol).unwrap();
            let want = brute_single(x, p);
            assert!((got - want).norm() < 1e-12 * want.norm(), "{got} vs {want}");
        }
    }

    #[test]
    fn eta_route_matches_product() {
        let pol = TruncationPolicy::default();
        let p = C64::new(0.8, 0.1);
        let via_eta = euler_phi(Nome::from_p(p).unwrap(), &pol).unwrap();
        let direct = brute_single(p, p);
        assert!((via_eta - direct).norm() < 1e-12 * direct.norm(), "{via_eta} vs {direct}");
    }
}
