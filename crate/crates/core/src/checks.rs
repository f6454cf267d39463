//! Residual checks of the scaled R-matrix identities, the cotangent sum and
//! the scaling ladder, with seeded sampling and serialisable reports.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{build_elliptic_r_closed, zn_matrices, EllipticParams};
use crate::error::{Error, Result};
use crate::exchange::{f_structure, StructureFunctionQuery};
use crate::matrix::{condition_estimate, max_abs, CMatrix, TensorMatrix};
use crate::policy::TruncationPolicy;
use crate::scaled::{build_scaled_r, rhat, CriticalLine, ScaledContext};
use crate::special::{guard_sine, C64};

const I: C64 = C64::new(0.0, 1.0);
const MAX_REDRAWS: usize = 50;

pub const TOL_SINE: f64 = 1e-10;
pub const TOL_QUADRATURE: f64 = 1e-8;
pub const TOL_COTAN: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdentityId {
    #[serde(rename = "ybe")]
    Ybe,
    #[serde(rename = "unitarity")]
    Unitarity,
    #[serde(rename = "crossing")]
    Crossing,
    #[serde(rename = "crossing-unitarity")]
    CrossingUnitarity,
    #[serde(rename = "quasiperiod")]
    Quasiperiod,
    #[serde(rename = "hM")]
    HM,
    #[serde(rename = "cotan")]
    Cotan,
    #[serde(rename = "scaling-limit")]
    ScalingLimit,
}

impl IdentityId {
    pub fn as_str(&self) -> &'static str {
        match self {
            IdentityId::Ybe => "ybe",
            IdentityId::Unitarity => "unitarity",
            IdentityId::Crossing => "crossing",
            IdentityId::CrossingUnitarity => "crossing-unitarity",
            IdentityId::Quasiperiod => "quasiperiod",
            IdentityId::HM => "hM",
            IdentityId::Cotan => "cotan",
            IdentityId::ScalingLimit => "scaling-limit",
        }
    }

    pub fn default_tolerance(&self) -> f64 {
        match self {
            IdentityId::Crossing | IdentityId::CrossingUnitarity => TOL_QUADRATURE,
            IdentityId::Cotan => TOL_COTAN,
            IdentityId::ScalingLimit => 0.0,
            _ => TOL_SINE,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<f64>>,
    pub perturb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub index: usize,
    /// Sample point(s) as `[re, im]` pairs.
    pub point: Vec<[f64; 2]>,
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub redraws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub seed: Option<u64>,
    pub policy: TruncationPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity_id: IdentityId,
    pub params: ReportParams,
    pub tolerance: f64,
    pub max_residual: f64,
    pub pass: bool,
    pub samples: Vec<SampleResult>,
    pub diagnostics: Vec<String>,
    pub provenance: Provenance,
}

impl VerificationReport {
    fn assemble(
        identity_id: IdentityId,
        params: ReportParams,
        tolerance: f64,
        samples: Vec<SampleResult>,
        diagnostics: Vec<String>,
        seed: Option<u64>,
        policy: &TruncationPolicy,
    ) -> Self {
        let max_residual = samples.iter().filter_map(|s| s.residual).fold(0.0, f64::max);
        let errored = samples.iter().any(|s| s.error.is_some());
        VerificationReport {
            identity_id,
            params,
            tolerance,
            max_residual,
            pass: !errored && !samples.is_empty() && max_residual <= tolerance,
            samples,
            diagnostics,
            provenance: Provenance { tool_version: env!("CARGO_PKG_VERSION").to_string(), seed, policy: *policy },
        }
    }

    /// Re-judges the report against a different tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        let errored = self.samples.iter().any(|s| s.error.is_some());
        self.tolerance = tolerance;
        self.pass = !errored && !self.samples.is_empty() && self.max_residual <= tolerance;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are plain data")
    }
}

/// Seeded draw of spectral parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplePlan {
    pub seed: u64,
    pub count: usize,
    pub real_range: (f64, f64),
    pub imag_range: (f64, f64),
    pub avoid_pole_radius: f64,
    /// Added to one matrix entry on the left-hand side; nonzero only for negative controls.
    pub perturb: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            seed: 7,
            count: 20,
            real_range: (-1.5, 1.5),
            imag_range: (-0.3, 0.3),
            avoid_pole_radius: 1e-6,
            perturb: 0.0,
        }
    }
}

impl SamplePlan {
    pub fn validate(&self) -> Result<()> {
        if self.count < 1 {
            return Err(Error::Config("sample count must be at least 1".into()));
        }
        let ordered = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a <= b;
        if !ordered(self.real_range) || !ordered(self.imag_range) {
            return Err(Error::Config("sample ranges must be finite and ordered".into()));
        }
        if !(self.avoid_pole_radius > 0.0) {
            return Err(Error::Config("avoid_pole_radius must be positive".into()));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> C64 {
        let pick = |rng: &mut ChaCha8Rng, (a, b): (f64, f64)| if a == b { a } else { rng.gen_range(a..b) };
        let re = pick(rng, self.real_range);
        let im = pick(rng, self.imag_range);
        C64::new(re, im)
    }
}

/// Evaluates `f` on `plan.count` independent draws of `arity` points each.
/// Draws that hit a pole are replaced; other errors are recorded on the sample.
fn run_samples<F>(plan: &SamplePlan, arity: usize, policy: &TruncationPolicy, f: F) -> (Vec<SampleResult>, Vec<String>)
where
    F: Fn(&[C64], &TruncationPolicy) -> Result<f64> + Sync,
{
    let policy = policy.with_pole_radius(plan.avoid_pole_radius);
    let outcomes: Vec<(SampleResult, Option<String>)> = (0..plan.count)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            rng.set_stream(index as u64);
            let mut redraws = 0;
            let mut last_pole = String::new();
            loop {
                let points: Vec<C64> = (0..arity).map(|_| plan.draw(&mut rng)).collect();
                let point = points.iter().map(|z| [z.re, z.im]).collect();
                let outcome = f(&points, &policy).and_then(|res| {
                    if res.is_finite() {
                        Ok(res)
                    } else {
                        Err(Error::Singular(format!("non-finite residual {res}")))
                    }
                });
                match outcome {
                    Err(e) if e.is_pole() && redraws < MAX_REDRAWS => {
                        redraws += 1;
                        last_pole = e.to_string();
                    }
                    other => {
                        let note = (redraws > 0)
                            .then(|| format!("sample {index}: redrawn {redraws} time(s) near a pole ({last_pole})"));
                        let (residual, error) = match other {
                            Ok(v) => (Some(v), None),
                            Err(e) => (None, Some(e.to_string())),
                        };
                        return (SampleResult { index, point, residual, error, redraws }, note);
                    }
                }
            }
        })
        .collect();
    let mut samples = Vec::with_capacity(outcomes.len());
    let mut notes = Vec::new();
    for (s, note) in outcomes {
        samples.push(s);
        notes.extend(note);
    }
    (samples, notes)
}

fn perturbed(mut m: TensorMatrix, eps: f64) -> TensorMatrix {
    if eps != 0.0 {
        let v = m.entry(0, 0, 0, 0);
        m.set(0, 0, 0, 0, v + eps);
    }
    m
}

fn r_at(beta: C64, ctx: &ScaledContext, policy: &TruncationPolicy) -> Result<TensorMatrix> {
    build_scaled_r(&ctx.at(beta), policy)
}

fn rhat_at(beta: C64, ctx: &ScaledContext, policy: &TruncationPolicy) -> Result<TensorMatrix> {
    rhat(&ctx.at(beta), policy)
}

fn shift_on_first(n: usize, power: i64) -> TensorMatrix {
    let h = zn_matrices(n).h;
    let base = if power >= 0 { h } else { h.adjoint() };
    let hp = base.pow(power.unsigned_abs() as u32);
    TensorMatrix::kron(&hp, &CMatrix::identity(n, n))
}

fn scaled_params(ctx: &ScaledContext, plan: &SamplePlan) -> ReportParams {
    ReportParams { n: ctx.n, r: Some(ctx.r), perturb: plan.perturb, ..Default::default() }
}

pub fn ybe_residual(
    betas: [C64; 3],
    ctx: &ScaledContext,
    perturb: f64,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let [b1, b2, b3] = betas;
    let r12 = r_at(b1 - b2, ctx, policy)?;
    let r13 = r_at(b1 - b3, ctx, policy)?.embed13();
    let r23 = r_at(b2 - b3, ctx, policy)?.embed23();
    let lhs = perturbed(r12.clone(), perturb).embed12() * &r13 * &r23;
    let rhs = &r23 * &r13 * r12.embed12();
    Ok(max_abs(&(lhs - rhs)))
}

pub fn unitarity_residual(beta: C64, ctx: &ScaledContext, perturb: f64, policy: &TruncationPolicy) -> Result<f64> {
    let r12 = perturbed(r_at(beta, ctx, policy)?, perturb);
    let r21 = r_at(-beta, ctx, policy)?.swap_factors();
    Ok(r12.mul(&r21).max_abs_diff(&TensorMatrix::identity(ctx.n)))
}

/// `R12(b)^t2 R21(-b + shift)^t2 - 1`; the identity holds for `shift = N i pi`.
pub fn crossing_residual(
    beta: C64,
    shift: C64,
    ctx: &ScaledContext,
    perturb: f64,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let r12 = perturbed(r_at(beta, ctx, policy)?, perturb).t2();
    let r21 = r_at(-beta + shift, ctx, policy)?.swap_factors().t2();
    Ok(r12.mul(&r21).max_abs_diff(&TensorMatrix::identity(ctx.n)))
}

pub fn crossing_unitarity_residual(
    beta: C64,
    ctx: &ScaledContext,
    perturb: f64,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let shift = I * PI * ctx.n as f64;
    let lhs = perturbed(r_at(beta, ctx, policy)?, perturb).t2().inverse()?;
    let rhs = r_at(beta - shift, ctx, policy)?.inverse()?.t2();
    Ok(lhs.max_abs_diff(&rhs))
}

/// Residual of the quasi-periodicity law and a conditioning estimate of the
/// inverted matrix. `conjugate = false` drops the shift-matrix conjugation.
pub fn quasi_periodicity_residual(
    beta: C64,
    ctx: &ScaledContext,
    conjugate: bool,
    perturb: f64,
    policy: &TruncationPolicy,
) -> Result<(f64, f64)> {
    let lhs = perturbed(rhat_at(beta - I * PI * ctx.r, ctx, policy)?, perturb);
    let r21 = rhat_at(-beta, ctx, policy)?.swap_factors();
    let cond = condition_estimate(r21.matrix())?;
    let inv = r21.inverse()?;
    let rhs = if conjugate {
        shift_on_first(ctx.n, -1).mul(&inv).mul(&shift_on_first(ctx.n, 1))
    } else {
        inv
    };
    Ok((lhs.max_abs_diff(&rhs), cond))
}

pub fn hm_residual(
    beta: C64,
    ctx: &ScaledContext,
    line: &CriticalLine,
    perturb: f64,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let m = line.m;
    let shifted = rhat_at(beta + I * PI * m as f64 * ctx.r, ctx, policy)?.swap_factors();
    let lhs = perturbed(shift_on_first(ctx.n, m).mul(&shifted).mul(&shift_on_first(ctx.n, -m)), perturb);
    let f = f_structure(&StructureFunctionQuery::new(ctx.n, ctx.r, -m, beta), policy)?;
    let rhs = rhat_at(beta, ctx, policy)?.swap_factors().scale(f);
    Ok(lhs.max_abs_diff(&rhs))
}

/// `|sum_j cot^2(x + j pi/N) - (N^2 - N + N^2 cot^2(N x))|`.
pub fn cotan_sum_identity(x: C64, n: usize) -> f64 {
    cotan_sum_checked(x, n, 0.0, &TruncationPolicy::default()).unwrap_or(f64::NAN)
}

fn cotan_sum_checked(x: C64, n: usize, perturb: f64, policy: &TruncationPolicy) -> Result<f64> {
    let nf = n as f64;
    let cot2 = |u: C64| -> Result<C64> { Ok((u.cos() / guard_sine(u, 1.0, "cotangent", policy)?).powi(2)) };
    let mut lhs = C64::new(perturb, 0.0);
    for j in 0..n {
        lhs += cot2(x + j as f64 * PI / nf)?;
    }
    let rhs = nf * nf - nf + nf * nf * cot2(nf * x)?;
    Ok((lhs - rhs).norm())
}

pub fn verify_ybe(ctx: &ScaledContext, plan: &SamplePlan, policy: &TruncationPolicy) -> Result<VerificationReport> {
    plan.validate()?;
    let (samples, notes) =
        run_samples(plan, 3, policy, |b, p| ybe_residual([b[0], b[1], b[2]], ctx, plan.perturb, p));
    let id = IdentityId::Ybe;
    Ok(VerificationReport::assemble(id, scaled_params(ctx, plan), id.default_tolerance(), samples, notes, Some(plan.seed), policy))
}

pub fn verify_unitarity(ctx: &ScaledContext, plan: &SamplePlan, policy: &TruncationPolicy) -> Result<VerificationReport> {
    plan.validate()?;
    let (samples, notes) = run_samples(plan, 1, policy, |b, p| unitarity_residual(b[0], ctx, plan.perturb, p));
    let id = IdentityId::Unitarity;
    Ok(VerificationReport::assemble(id, scaled_params(ctx, plan), id.default_tolerance(), samples, notes, Some(plan.seed), policy))
}

pub fn verify_crossing(ctx: &ScaledContext, plan: &SamplePlan, policy: &TruncationPolicy) -> Result<VerificationReport> {
    plan.validate()?;
    let shift = I * PI * ctx.n as f64;
    let (samples, notes) = run_samples(plan, 1, policy, |b, p| crossing_residual(b[0], shift, ctx, plan.perturb, p));
    let id = IdentityId::Crossing;
    Ok(VerificationReport::assemble(id, scaled_params(ctx, plan), id.default_tolerance(), samples, notes, Some(plan.seed), policy))
}

pub fn verify_crossing_unitarity(
    ctx: &ScaledContext,
    plan: &SamplePlan,
    policy: &TruncationPolicy,
) -> Result<VerificationReport> {
    plan.validate()?;
    let (samples, notes) =
        run_samples(plan, 1, policy, |b, p| crossing_unitarity_residual(b[0], ctx, plan.perturb, p));
    let id = IdentityId::CrossingUnitarity;
    Ok(VerificationReport::assemble(id, scaled_params(ctx, plan), id.default_tolerance(), samples, notes, Some(plan.seed), policy))
}

pub fn verify_quasi_periodicity(
    ctx: &ScaledContext,
    plan: &SamplePlan,
    policy: &TruncationPolicy,
) -> Result<VerificationReport> {
    plan.validate()?;
    let (samples, mut notes) =
        run_samples(plan, 1, policy, |b, p| Ok(quasi_periodicity_residual(b[0], ctx, true, plan.perturb, p)?.0));
    let pol = policy.with_pole_radius(plan.avoid_pole_radius);
    let worst = samples
        .iter()
        .filter(|s| s.residual.is_some())
        .filter_map(|s| {
            let b = C64::new(s.point[0][0], s.point[0][1]);
            quasi_periodicity_residual(b, ctx, true, 0.0, &pol).ok().map(|(_, cond)| cond)
        })
        .fold(0.0, f64::max);
    notes.push(format!("max condition estimate of the inverted matrix: {worst:.3e}"));
    let id = IdentityId::Quasiperiod;
    Ok(VerificationReport::assemble(id, scaled_params(ctx, plan), id.default_tolerance(), samples, notes, Some(plan.seed), policy))
}

pub fn verify_hm_conjugation(
    ctx: &ScaledContext,
    line: &CriticalLine,
    plan: &SamplePlan,
    policy: &TruncationPolicy,
) -> Result<VerificationReport> {
    plan.validate()?;
    if line.n != ctx.n || (line.r - ctx.r).abs() > 1e-12 * ctx.r {
        return Err(Error::Config("critical line and context disagree on N or r".into()));
    }
    let (samples, notes) = run_samples(plan, 1, policy, |b, p| hm_residual(b[0], ctx, line, plan.perturb, p));
    let mut params = scaled_params(ctx, plan);
    params.m = Some(line.m);
    params.c = Some(line.c());
    params.h = line.h;
    let id = IdentityId::HM;
    Ok(VerificationReport::assemble(id, params, id.default_tolerance(), samples, notes, Some(plan.seed), policy))
}

/// Cotangent sum at sampled complex points `x`.
pub fn verify_cotan(n: usize, plan: &SamplePlan, policy: &TruncationPolicy) -> Result<VerificationReport> {
    plan.validate()?;
    if n < 1 {
        return Err(Error::Domain("N must be positive".into()));
    }
    let (samples, notes) = run_samples(plan, 1, policy, |x, p| cotan_sum_checked(x[0], n, plan.perturb, p));
    let params = ReportParams { n, perturb: plan.perturb, ..Default::default() };
    let id = IdentityId::Cotan;
    Ok(VerificationReport::assemble(id, params, id.default_tolerance(), samples, notes, Some(plan.seed), policy))
}

/// Elliptic parameters on the scaling map `q = e^-eps`, `z^2 = q^(2 i beta/pi)`, `p = q^(2r)`.
pub fn scaling_map(eps: f64, beta: C64, r: f64, n: usize) -> Result<EllipticParams> {
    EllipticParams::new(-eps * beta / (PI * PI), I * eps / PI, I * r * eps / PI, n)
}

/// `max |elliptic / scaled - 1|` over the nonzero entries.
pub fn scaling_deviation(
    eps: f64,
    beta: C64,
    r: f64,
    n: usize,
    perturb: f64,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let ell = perturbed(build_elliptic_r_closed(&scaling_map(eps, beta, r, n)?, policy)?, perturb);
    let scaled = build_scaled_r(&ScaledContext::new(beta, r, n)?, policy)?;
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let d = (a + b + n - c) % n;
                let s = scaled.entry(a, b, c, d);
                if s.norm() == 0.0 {
                    continue;
                }
                worst = worst.max((ell.entry(a, b, c, d) / s - 1.0).norm());
            }
        }
    }
    Ok(worst)
}

/// Order check of the ladder: deviations must fall with successive ratios in `[0.3, 0.7]`.
/// The residual of a rung is its distance from that band (zero on the first rung).
pub fn verify_scaling_limit(
    n: usize,
    r: f64,
    beta: C64,
    ladder: &[f64],
    perturb: f64,
    policy: &TruncationPolicy,
) -> Result<VerificationReport> {
    if ladder.len() < 2 {
        return Err(Error::Config("a ladder needs at least two steps to assess the order".into()));
    }
    if ladder.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::Domain("ladder steps must be positive".into()));
    }
    ScaledContext::new(beta, r, n)?;
    let devs: Vec<Result<f64>> =
        ladder.par_iter().map(|&eps| scaling_deviation(eps, beta, r, n, perturb, policy)).collect();
    let mut samples = Vec::with_capacity(ladder.len());
    let mut notes = Vec::new();
    let mut prev: Option<f64> = None;
    for (index, (&eps, dev)) in ladder.iter().zip(devs).enumerate() {
        let scale = (-2.0 * PI * PI / (n as f64 * r * eps)).exp();
        let (residual, error) = match dev {
            Ok(d) => {
                let residual = match prev {
                    Some(p) => {
                        let ratio = d / p;
                        notes.push(format!("eps={eps}: deviation {d:.6e}, ratio to previous {ratio:.4}"));
                        (0.3 - ratio).max(ratio - 0.7).max(0.0)
                    }
                    None => {
                        notes.push(format!("eps={eps}: deviation {d:.6e}"));
                        0.0
                    }
                };
                prev = Some(d);
                (Some(if residual.is_finite() { residual } else { f64::INFINITY }), None)
            }
            Err(e) => (None, Some(e.to_string())),
        };
        notes.push(format!("eps={eps}: exp(-2 pi^2/(N r eps)) = {scale:.3e}"));
        samples.push(SampleResult { index, point: vec![[eps, 0.0]], residual, error, redraws: 0 });
    }
    let params = ReportParams {
        n,
        r: Some(r),
        beta: Some([beta.re, beta.im]),
        ladder: Some(ladder.to_vec()),
        perturb,
        ..Default::default()
    };
    Ok(VerificationReport::assemble(IdentityId::ScalingLimit, params, 0.0, samples, notes, None, policy))
}
