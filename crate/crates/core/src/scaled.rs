//! Scaled R-matrix of the deformed double Yangian, its rescaled form R-hat and
//! the shifted-period variant R-hat*.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::elliptic::ZnIndex;
use crate::error::{Error, Result};
use crate::matrix::TensorMatrix;
use crate::policy::TruncationPolicy;
use crate::special::{guard_sine, s0_with_period, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Spectral parameter, deformation period, rank and central charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledContext {
    pub beta: C64,
    pub r: f64,
    pub n: usize,
    pub c: C64,
}

impl ScaledContext {
    pub fn new(beta: C64, r: f64, n: usize) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("r must be positive, got {r}")));
        }
        if n < 2 {
            return Err(Error::Domain(format!("N must be >= 2, got {n}")));
        }
        Ok(ScaledContext { beta, r, n, c: C64::new(0.0, 0.0) })
    }

    pub fn with_c(mut self, c: C64) -> Self {
        self.c = c;
        self
    }

    pub fn at(&self, beta: C64) -> Self {
        ScaledContext { beta, ..*self }
    }
}

/// The line `c = -N - M r`, optionally with `2 r = N h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalLine {
    pub m: i64,
    pub h: Option<i64>,
    pub n: usize,
    pub r: f64,
}

impl CriticalLine {
    pub fn new(m: i64, r: f64, n: usize) -> Self {
        CriticalLine { m, h: None, n, r }
    }

    /// Line with `r = N h / 2`.
    pub fn abelian(m: i64, h: i64, n: usize) -> Result<Self> {
        if h == 0 {
            return Err(Error::Domain("h must be nonzero".into()));
        }
        Ok(CriticalLine { m, h: Some(h), n, r: n as f64 * h as f64 / 2.0 })
    }

    pub fn c(&self) -> f64 {
        -(self.n as f64) - self.m as f64 * self.r
    }

    /// `c + N + M r` for a given `c`; zero on the line.
    pub fn line_offset(&self, c: f64) -> f64 {
        c + self.n as f64 + self.m as f64 * self.r
    }

    /// `N h - 2 r`; zero on the Abelian surface.
    pub fn abelian_offset(&self) -> Option<f64> {
        self.h.map(|h| self.n as f64 * h as f64 - 2.0 * self.r)
    }
}

/// Internal route for the matrix elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementForm {
    /// Product of sines, with the `b = c` ratio folded into a Chebyshev polynomial.
    Sine,
    /// Difference of cotangents.
    Cotangent,
}

/// `U_{n-1}(x)`, Chebyshev polynomial of the second kind.
fn chebyshev_u(n: usize, x: C64) -> C64 {
    let (mut u0, mut u1) = (C64::new(1.0, 0.0), 2.0 * x);
    if n == 1 {
        return u0;
    }
    for _ in 2..n {
        let next = 2.0 * x * u1 - u0;
        u0 = u1;
        u1 = next;
    }
    u1
}

/// `sin(pi/r) / sin((pi - m pi r)/(N r))` written as `+-U_{N-1}(cos(pi delta / N))`,
/// where `1/r = m + N j + delta`. Exact, and finite where both sines vanish.
fn period_ratio(m: i64, r: C64, n: usize) -> C64 {
    let nf = n as f64;
    let u = 1.0 / r;
    let j = ((u.re - m as f64) / nf).round();
    let delta = u - m as f64 - nf * j;
    let k = m + (nf * j) as i64;
    let sign = if (k + j as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * chebyshev_u(n, (PI * delta / nf).cos())
}

/// Element at row `(a, b)`, column `(c, a+b-c)` for a given normaliser value.
#[allow(clippy::too_many_arguments)]
fn element_with_s0(
    a: i64,
    b: i64,
    c: i64,
    beta: C64,
    r: C64,
    n: usize,
    s0: C64,
    form: ElementForm,
    policy: &TruncationPolicy,
) -> Result<C64> {
    let nf = n as f64;
    let nr = nf * r;
    let ib = I * beta;
    let common = -s0 / nf / guard_sine((ib + PI) / r, 1.0 / r.norm(), "sin((i beta + pi)/r)", policy)?;
    let ratio = period_ratio(a - c, r, n);
    match form {
        ElementForm::Sine => {
            let num = ((ib + PI + (b - a) as f64 * PI * r) / nr).sin();
            if b == c {
                let cheb = chebyshev_u(n, (ib / nr).cos());
                Ok(common * ratio * num * cheb)
            } else {
                let moving = guard_sine(
                    (ib + (b - c) as f64 * PI * r) / nr,
                    1.0 / nr.norm(),
                    "sin((i beta + (b-c) pi r)/(N r))",
                    policy,
                )?;
                Ok(common * ratio * (ib / r).sin() * num / moving)
            }
        }
        ElementForm::Cotangent => {
            // sin(pi/r) cot(y) = -cos(y) * ratio, since sin(y) = -sin((pi - (a-c) pi r)/(N r))
            let x = (ib + (b - c) as f64 * PI * r) / nr;
            let y = (-PI + (a - c) as f64 * PI * r) / nr;
            let sx = guard_sine(x, 1.0 / nr.norm(), "cotangent argument", policy)?;
            Ok(common * (ib / r).sin() * ((PI / r).sin() * x.cos() / sx + y.cos() * ratio))
        }
    }
}

fn build_with_period(beta: C64, r: C64, n: usize, form: ElementForm, policy: &TruncationPolicy) -> Result<TensorMatrix> {
    let s0 = s0_with_period(beta, r, n, policy)?;
    let mut out = TensorMatrix::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let d = (a + b + n - c) % n;
                let v = element_with_s0(a as i64, b as i64, c as i64, beta, r, n, s0, form, policy)?;
                out.set(a, b, c, d, v);
            }
        }
    }
    Ok(out)
}

/// Single element of the scaled R-matrix at row `(a, b)`, column `(c, a+b-c)`.
pub fn scaled_r_element(
    a: ZnIndex,
    b: ZnIndex,
    c: ZnIndex,
    ctx: &ScaledContext,
    policy: &TruncationPolicy,
) -> Result<C64> {
    let r = C64::new(ctx.r, 0.0);
    let s0 = s0_with_period(ctx.beta, r, ctx.n, policy)?;
    element_with_s0(
        a.value() as i64,
        b.value() as i64,
        c.value() as i64,
        ctx.beta,
        r,
        ctx.n,
        s0,
        ElementForm::Sine,
        policy,
    )
}

pub fn build_scaled_r(ctx: &ScaledContext, policy: &TruncationPolicy) -> Result<TensorMatrix> {
    build_scaled_r_with(ctx, ElementForm::Sine, policy)
}

pub fn build_scaled_r_with(ctx: &ScaledContext, form: ElementForm, policy: &TruncationPolicy) -> Result<TensorMatrix> {
    build_with_period(ctx.beta, C64::new(ctx.r, 0.0), ctx.n, form, policy)
}

/// `sin((pi - i beta)/N) / sin(i beta / N)`.
pub fn rhat_scalar(beta: C64, n: usize, policy: &TruncationPolicy) -> Result<C64> {
    let nf = n as f64;
    let den = guard_sine(I * beta / nf, 1.0 / nf, "sin(i beta / N)", policy)?;
    Ok(((PI - I * beta) / nf).sin() / den)
}

pub fn rhat(ctx: &ScaledContext, policy: &TruncationPolicy) -> Result<TensorMatrix> {
    let k = rhat_scalar(ctx.beta, ctx.n, policy)?;
    Ok(build_scaled_r(ctx, policy)?.scale(k))
}

/// R-hat with the period `r` replaced by `r - c`.
pub fn rhat_star(ctx: &ScaledContext, policy: &TruncationPolicy) -> Result<TensorMatrix> {
    let period = C64::new(ctx.r, 0.0) - ctx.c;
    if !(period.re > 0.0) {
        return Err(Error::Domain(format!("shifted period r - c = {period} needs a positive real part")));
    }
    let k = rhat_scalar(ctx.beta, ctx.n, policy)?;
    Ok(build_with_period(ctx.beta, period, ctx.n, ElementForm::Sine, policy)?.scale(k))
}
