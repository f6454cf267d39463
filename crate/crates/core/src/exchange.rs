//! Scalar exchange and Poisson structure functions on the critical lines,
//! the kernel matrix whose `c`-derivative vanishes at the critical level, and
//! the higher-spin products and sums.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::TensorMatrix;
use crate::policy::TruncationPolicy;
use crate::scaled::{build_scaled_r, ScaledContext};
use crate::special::{guard_sine, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Point at which a structure function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureFunctionQuery {
    pub n: usize,
    pub r: f64,
    pub m: i64,
    pub beta: C64,
    pub c: Option<C64>,
    pub h: Option<i64>,
}

impl StructureFunctionQuery {
    pub fn new(n: usize, r: f64, m: i64, beta: C64) -> Self {
        StructureFunctionQuery { n, r, m, beta, c: None, h: None }
    }

    /// Query on the line `c = -N - M r`.
    pub fn on_line(n: usize, r: f64, m: i64, beta: C64) -> Self {
        let c = C64::new(-(n as f64) - m as f64 * r, 0.0);
        StructureFunctionQuery { c: Some(c), ..Self::new(n, r, m, beta) }
    }

    /// Query on the Abelian surface `2 r = N h`.
    pub fn abelian(n: usize, h: i64, m: i64, beta: C64) -> Result<Self> {
        if h == 0 {
            return Err(Error::Domain("h must be nonzero".into()));
        }
        let r = n as f64 * h as f64 / 2.0;
        Ok(StructureFunctionQuery { h: Some(h), ..Self::on_line(n, r, m, beta) })
    }

    pub fn with_beta(&self, beta: C64) -> Self {
        StructureFunctionQuery { beta, ..*self }
    }

    /// Central charge, derived from the line when not given explicitly.
    pub fn line_c(&self) -> C64 {
        self.c.unwrap_or_else(|| C64::new(-(self.n as f64) - self.m as f64 * self.r, 0.0))
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Domain("N must be positive".into()));
        }
        if !self.r.is_finite() {
            return Err(Error::Domain(format!("r must be finite, got {}", self.r)));
        }
        Ok(())
    }
}

/// Central finite-difference probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeProbe {
    pub step: f64,
}

impl Default for DerivativeProbe {
    fn default() -> Self {
        DerivativeProbe { step: 1e-5 }
    }
}

impl DerivativeProbe {
    pub fn new(step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Domain(format!("step must be positive, got {step}")));
        }
        Ok(DerivativeProbe { step })
    }

    /// `(f(x + h) - f(x - h)) / 2h`.
    pub fn central<F: Fn(f64) -> Result<C64>>(&self, f: F, x: f64) -> Result<C64> {
        Ok((f(x + self.step)? - f(x - self.step)?) / (2.0 * self.step))
    }

    pub fn central_matrix<F: Fn(f64) -> Result<TensorMatrix>>(&self, f: F, x: f64) -> Result<TensorMatrix> {
        Ok(f(x + self.step)?.sub(&f(x - self.step)?).scale(C64::new(0.5 / self.step, 0.0)))
    }
}

fn sin_n(u: C64, n: usize, what: &str, policy: &TruncationPolicy) -> Result<C64> {
    guard_sine(u / n as f64, 1.0 / n as f64, what, policy)
}

fn cos_n(u: C64, n: usize, what: &str, policy: &TruncationPolicy) -> Result<C64> {
    guard_sine(u / n as f64 + PI / 2.0, 1.0 / n as f64, what, policy)
}

fn plain_sin_n(u: C64, n: usize) -> C64 {
    (u / n as f64).sin()
}

/// Exchange function `F(M, beta)`.
pub fn f_structure(q: &StructureFunctionQuery, policy: &TruncationPolicy) -> Result<C64> {
    q.validate()?;
    let (n, ib, pr) = (q.n, I * q.beta, PI * q.r);
    let mut acc = C64::new(1.0, 0.0);
    if q.m > 0 {
        for k in 0..q.m {
            let x = ib + k as f64 * pr;
            let den = sin_n(x + PI, n, "F denominator", policy)? * sin_n(x - PI, n, "F denominator", policy)?;
            acc *= plain_sin_n(x, n).powi(2) / den;
        }
    } else if q.m < 0 {
        for k in 1..=q.m.abs() {
            let x = -ib + k as f64 * pr;
            let den = sin_n(x, n, "F denominator", policy)?.powi(2);
            acc *= plain_sin_n(x + PI, n) * plain_sin_n(x - PI, n) / den;
        }
    }
    Ok(acc)
}

/// Exchange function `Y_{N,r,M}(beta)` of the `t`-generators.
pub fn y_structure(q: &StructureFunctionQuery, policy: &TruncationPolicy) -> Result<C64> {
    q.validate()?;
    let (n, ib, pr) = (q.n, I * q.beta, PI * q.r);
    let upper = if q.m > 0 { q.m } else { q.m.abs() - 1 };
    let mut acc = C64::new(1.0, 0.0);
    for k in 1..=upper {
        let kp = k as f64 * pr;
        let num = plain_sin_n(ib - kp, n).powi(2) * plain_sin_n(ib + kp + PI, n) * plain_sin_n(ib + kp - PI, n);
        let den = sin_n(ib + kp, n, "Y denominator", policy)?.powi(2)
            * sin_n(ib - kp + PI, n, "Y denominator", policy)?
            * sin_n(ib - kp - PI, n, "Y denominator", policy)?;
        acc *= num / den;
    }
    Ok(acc)
}

/// Scalar factor `T(beta)` of the exchange algebra at central charge `c`.
pub fn t_factor(beta: C64, c: C64, n: usize, policy: &TruncationPolicy) -> Result<C64> {
    let ib = I * beta;
    let pc = PI * c;
    let num = plain_sin_n(ib - PI, n) * plain_sin_n(ib + PI - pc, n) * plain_sin_n(ib + pc, n);
    let den = sin_n(ib + PI, n, "T denominator", policy)?
        * sin_n(ib - PI + pc, n, "T denominator", policy)?
        * sin_n(ib - pc, n, "T denominator", policy)?;
    Ok(num / den)
}

fn scaled_at(beta: C64, r: f64, n: usize, policy: &TruncationPolicy) -> Result<TensorMatrix> {
    build_scaled_r(&ScaledContext::new(beta, r, n)?, policy)
}

/// `((R21(b) R21(b - i pi c - i pi N)^-1 R12(-b)^-1)^t2 R12(-b - i pi c)^t2)^t2`.
pub fn m_kernel(beta: C64, c: C64, r: f64, n: usize, policy: &TruncationPolicy) -> Result<TensorMatrix> {
    let nf = n as f64;
    let r21 = scaled_at(beta, r, n, policy)?.swap_factors();
    let r21_shift_inv = scaled_at(beta - I * PI * c - I * PI * nf, r, n, policy)?.swap_factors().inverse()?;
    let r12_inv = scaled_at(-beta, r, n, policy)?.inverse()?;
    let inner = r21.mul(&r21_shift_inv).mul(&r12_inv);
    let outer = scaled_at(-beta - I * PI * c, r, n, policy)?;
    Ok(inner.t2().mul(&outer.t2()).t2())
}

/// Poisson coefficient of the centre at `c = -N`.
pub fn poisson_center_coeff(beta: C64, n: usize, policy: &TruncationPolicy) -> Result<C64> {
    Ok(2.0 * f_s(beta, n, policy)?)
}

pub fn f_s(beta: C64, n: usize, policy: &TruncationPolicy) -> Result<C64> {
    let nf = n as f64;
    let ib = I * beta;
    let den = sin_n(ib, n, "f_s denominator", policy)?
        * sin_n(ib + PI, n, "f_s denominator", policy)?
        * sin_n(ib - PI, n, "f_s denominator", policy)?;
    Ok(-(PI / nf) * (PI / nf).sin().powi(2) * (ib / nf).cos() / den)
}

pub fn f_c(beta: C64, n: usize, policy: &TruncationPolicy) -> Result<C64> {
    let nf = n as f64;
    let ib = I * beta;
    let den = cos_n(ib, n, "f_c denominator", policy)?
        * cos_n(ib + PI, n, "f_c denominator", policy)?
        * cos_n(ib - PI, n, "f_c denominator", policy)?;
    Ok((PI / nf) * (PI / nf).sin().powi(2) * (ib / nf).sin() / den)
}

/// `h`-labelled Poisson coefficient. `E` is the floor, applied to the signed `M`.
pub fn f_h(beta: C64, n: usize, m: i64, h: i64, policy: &TruncationPolicy) -> Result<C64> {
    if h == 0 {
        return Err(Error::Domain("h must be nonzero".into()));
    }
    let fs = f_s(beta, n, policy)?;
    if h.rem_euclid(2) == 0 {
        return Ok((m * (m + 1)) as f64 * fs);
    }
    let e1 = m.div_euclid(2);
    let e2 = (m + 1).div_euclid(2);
    let fc = f_c(beta, n, policy)?;
    Ok((2 * e1 * (e1 + 1)) as f64 * fs + (2 * e2 * e2) as f64 * fc)
}

fn spin_offsets(s: u32) -> Result<Vec<f64>> {
    if s == 0 {
        return Err(Error::Domain("spin label must be positive".into()));
    }
    Ok((0..s).map(|k| k as f64 - (s as f64 - 1.0) / 2.0).collect())
}

/// `prod_{k=1..s} F(M, dbeta + i pi (k - (s+1)/2))`, with `dbeta = q.beta`.
pub fn f_higher(s: u32, q: &StructureFunctionQuery, policy: &TruncationPolicy) -> Result<C64> {
    let mut acc = C64::new(1.0, 0.0);
    for off in spin_offsets(s)? {
        acc *= f_structure(&q.with_beta(q.beta + I * PI * off), policy)?;
    }
    Ok(acc)
}

/// `prod_u prod_v Y(dbeta + i pi (u - v))`.
pub fn y_higher(s: u32, s_prime: u32, delta_beta: C64, q: &StructureFunctionQuery, policy: &TruncationPolicy) -> Result<C64> {
    let (us, vs) = (spin_offsets(s)?, spin_offsets(s_prime)?);
    let mut acc = C64::new(1.0, 0.0);
    for u in &us {
        for v in &vs {
            acc *= y_structure(&q.with_beta(delta_beta + I * PI * (u - v)), policy)?;
        }
    }
    Ok(acc)
}

/// `sum_u sum_v f_h(dbeta + i pi (u - v))`.
#[allow(clippy::too_many_arguments)]
pub fn poisson_higher(
    s: u32,
    s_prime: u32,
    delta_beta: C64,
    n: usize,
    m: i64,
    h: i64,
    policy: &TruncationPolicy,
) -> Result<C64> {
    let (us, vs) = (spin_offsets(s)?, spin_offsets(s_prime)?);
    let mut acc = C64::new(0.0, 0.0);
    for u in &us {
        for v in &vs {
            acc += f_h(delta_beta + I * PI * (u - v), n, m, h, policy)?;
        }
    }
    Ok(acc)
}

/// `dY/deps` at `eps = 0` along `2 r = N h - eps` by central difference.
pub fn y_line_derivative(
    n: usize,
    m: i64,
    h: i64,
    beta: C64,
    probe: DerivativeProbe,
    policy: &TruncationPolicy,
) -> Result<C64> {
    let nh = n as f64 * h as f64;
    probe.central(|eps| y_structure(&StructureFunctionQuery::new(n, (nh - eps) / 2.0, m, beta), policy), 0.0)
}

/// Same derivative for the higher-spin product.
#[allow(clippy::too_many_arguments)]
pub fn y_higher_line_derivative(
    s: u32,
    s_prime: u32,
    n: usize,
    m: i64,
    h: i64,
    delta_beta: C64,
    probe: DerivativeProbe,
    policy: &TruncationPolicy,
) -> Result<C64> {
    let nh = n as f64 * h as f64;
    probe.central(
        |eps| {
            let q = StructureFunctionQuery::new(n, (nh - eps) / 2.0, m, delta_beta);
            y_higher(s, s_prime, delta_beta, &q, policy)
        },
        0.0,
    )
}

/// `dT/dc` at `c = -N`.
pub fn t_center_derivative(beta: C64, n: usize, probe: DerivativeProbe, policy: &TruncationPolicy) -> Result<C64> {
    probe.central(|c| t_factor(beta, C64::new(c, 0.0), n, policy), -(n as f64))
}

/// Max-norm of `dM/dc` at a real central charge `c0`.
pub fn m_kernel_c_derivative(
    beta: C64,
    c0: f64,
    r: f64,
    n: usize,
    probe: DerivativeProbe,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let d = probe.central_matrix(|c| m_kernel(beta, C64::new(c, 0.0), r, n, policy), c0)?;
    Ok(d.max_abs())
}
