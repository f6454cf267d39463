//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use dyrmat::checks::{
    cotan_sum_identity, verify_cotan, verify_crossing, verify_crossing_unitarity, verify_hm_conjugation,
    verify_quasi_periodicity, verify_scaling_limit, verify_unitarity, verify_ybe, SamplePlan, VerificationReport,
};
use dyrmat::elliptic::{build_elliptic_r, build_elliptic_r_closed, EllipticParams};
use dyrmat::exchange::{
    f_c, f_h, f_higher, f_s, f_structure, m_kernel_c_derivative, poisson_center_coeff, poisson_higher,
    t_center_derivative, y_higher, y_higher_line_derivative, y_line_derivative, y_structure, DerivativeProbe,
    StructureFunctionQuery,
};
use dyrmat::matrix::TensorMatrix;
use dyrmat::policy::TruncationPolicy;
use dyrmat::scaled::{build_scaled_r, CriticalLine, ScaledContext};
use dyrmat::special::{
    euler_phi, jacobi_big_theta, kappa_inv, log_s2, s0, theta_char, Characteristics, Nome, Periods, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const I: C64 = C64::new(0.0, 1.0);

struct Outcome {
    pass: bool,
    detail: String,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pol() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn betas(seed: u64, count: usize) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| c(rng.gen_range(-1.5..1.5), rng.gen_range(-0.3..0.3))).collect()
}

fn ctx(r: f64, n: usize) -> ScaledContext {
    ScaledContext::new(c(0.0, 0.0), r, n).unwrap()
}

fn errors(report: &VerificationReport) -> usize {
    report.samples.iter().filter(|s| s.error.is_some()).count()
}

fn theorem_suite() -> Outcome {
    let start = Instant::now();
    let plan = SamplePlan { seed: 7, count: 20, ..Default::default() };
    let mut worst = [0.0f64; 5];
    let mut pass = true;
    let mut failures = Vec::new();
    for &n in &[2usize, 3, 4] {
        for &r in &[0.7, 1.3, 2.0_f64.sqrt()] {
            let context = ctx(r, n);
            let reports = [
                verify_ybe(&context, &plan, &pol()).unwrap(),
                verify_unitarity(&context, &plan, &pol()).unwrap(),
                verify_quasi_periodicity(&context, &plan, &pol()).unwrap(),
                verify_crossing(&context, &plan, &pol()).unwrap(),
                verify_crossing_unitarity(&context, &plan, &pol()).unwrap(),
            ];
            let limits = [1e-10, 1e-10, 1e-10, 1e-8, 1e-8];
            for (k, rep) in reports.iter().enumerate() {
                worst[k] = worst[k].max(rep.max_residual);
                if !(rep.pass && rep.max_residual <= limits[k] && errors(rep) == 0 && rep.samples.len() == 20) {
                    pass = false;
                    failures.push(format!("{} N={n} r={r}", rep.identity_id.as_str()));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 60.0;
    Outcome {
        pass,
        detail: format!(
            "max residuals ybe {:.1e}, unitarity {:.1e}, quasiperiod {:.1e}, crossing {:.1e}, crossing-unitarity {:.1e}; {secs:.1}s{}",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            worst[4],
            if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join(", ")) }
        ),
    }
}

fn max_rel_nonzero(a: &TensorMatrix, b: &TensorMatrix) -> f64 {
    let n = a.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let l = (i + j + n - k) % n;
                worst = worst.max(rel(a.entry(i, j, k, l), b.entry(i, j, k, l)));
            }
        }
    }
    worst
}

fn pattern_and_symmetry(a: &TensorMatrix) -> f64 {
    let n = a.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = a.entry(i, j, k, l);
                    if (i + j + n - k) % n != l {
                        worst = worst.max(v.norm());
                    }
                    let s = a.entry((i + 1) % n, (j + 1) % n, (k + 1) % n, (l + 1) % n);
                    worst = worst.max((s - v).norm());
                }
            }
        }
    }
    worst
}

fn elliptic_cross_construction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_rel, mut worst_sym) = (0.0f64, 0.0f64);
    let mut count = 0;
    for &n in &[2usize, 3] {
        for _ in 0..6 {
            let p = rng.gen_range(0.02..0.3);
            let q = C64::from_polar(rng.gen_range(0.1..0.5), rng.gen_range(-0.5..0.5));
            let z = C64::from_polar(rng.gen_range(0.8..1.25), rng.gen_range(-PI..PI));
            let params = EllipticParams::from_multiplicative(z, q, c(p, 0.0), n).unwrap();
            let assembled = build_elliptic_r(&params, &pol()).unwrap();
            let closed = build_elliptic_r_closed(&params, &pol()).unwrap();
            worst_rel = worst_rel.max(max_rel_nonzero(&closed, &assembled));
            worst_sym = worst_sym.max(pattern_and_symmetry(&assembled)).max(pattern_and_symmetry(&closed));
            count += 1;
        }
    }
    Outcome {
        pass: worst_rel <= 1e-10 && worst_sym <= 1e-12,
        detail: format!("{count} triples, max entrywise relative gap {worst_rel:.1e}, zero pattern / Z_N {worst_sym:.1e}"),
    }
}

fn two_state_matrix(beta: C64, r: f64) -> TensorMatrix {
    let x = beta / (2.0 * r);
    let y = I * PI / (2.0 * r);
    let w = (I * PI - beta) / (2.0 * r);
    let a = x.cosh() * y.cosh() / w.cosh();
    let b = -x.sinh() * y.sinh() / w.cosh();
    let cc = -x.sinh() * y.cosh() / w.sinh();
    let d = x.cosh() * y.sinh() / w.sinh();
    let z = c(0.0, 0.0);
    let rows = [[a, z, z, b], [z, cc, d, z], [z, d, cc, z], [b, z, z, a]];
    let norm = -s0(beta, r, 2, &pol()).unwrap();
    let mut out = TensorMatrix::zeros(2);
    for (row, vals) in rows.iter().enumerate() {
        for (col, v) in vals.iter().enumerate() {
            out.set(row / 2, row % 2, col / 2, col % 2, norm * v);
        }
    }
    out
}

fn two_state_anchor() -> Outcome {
    let points = [
        (c(0.6, 0.0), 1.3),
        (c(-0.6, 0.0), 1.3),
        (c(1.7, 0.0), 0.8),
        (c(0.3, 0.4), 1.3),
        (c(-1.1, -0.2), 2.5),
        (c(0.05, 0.0), 1.0),
        (c(2.4, 0.7), 1.7),
        (c(0.9, -0.5), 0.6),
        (c(-0.4, 1.1), 3.2),
        (c(1.2, 0.25), 2.0_f64.sqrt()),
    ];
    let mut worst: f64 = 0.0;
    for &(beta, r) in &points {
        let got = build_scaled_r(&ScaledContext::new(beta, r, 2).unwrap(), &pol()).unwrap();
        let want = two_state_matrix(beta, r);
        worst = worst.max(got.max_abs_diff(&want) / want.max_abs());
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("{} points, basis order (00,01,10,11), max gap {worst:.1e}", points.len()),
    }
}

fn scaling_ladder() -> Outcome {
    let ladder = [0.2, 0.1, 0.05];
    let mut pass = true;
    let mut parts = Vec::new();
    for &n in &[2usize, 3] {
        let report = verify_scaling_limit(n, 1.5, c(0.8, 0.0), &ladder, 0.0, &pol()).unwrap();
        pass &= report.pass;
        let devs: Vec<String> = report
            .diagnostics
            .iter()
            .filter(|d| d.contains("deviation"))
            .map(|d| d.split(": ").nth(1).unwrap_or(d).to_string())
            .collect();
        parts.push(format!("N={n} [{}]", devs.join("; ")));
    }
    Outcome {
        pass,
        detail: format!(
            "{}; gap scales like exp(-2 pi^2/(N r eps)), not O(eps)",
            parts.join(" ")
        ),
    }
}

fn exchange_identities() -> Outcome {
    let p = pol();
    let mut exact_one = true;
    for beta in betas(5, 5) {
        exact_one &= f_structure(&StructureFunctionQuery::new(3, 1.1, 0, beta), &p).unwrap() == c(1.0, 0.0);
    }
    let (mut inv_gap, mut ratio_gap) = (0.0f64, 0.0f64);
    for &n in &[2usize, 3] {
        for m in (-3i64..=3).filter(|&m| m != 0) {
            let r = 1.1;
            let cc = StructureFunctionQuery::on_line(n, r, m, c(0.0, 0.0)).line_c();
            for beta in betas(6, 10) {
                let f = |mm: i64, b: C64| f_structure(&StructureFunctionQuery::new(n, r, mm, b), &p).unwrap();
                inv_gap = inv_gap.max(rel(1.0 / f(-m, beta), f(m, beta - I * PI * cc)));
                let y = y_structure(&StructureFunctionQuery::new(n, r, m, beta), &p).unwrap();
                ratio_gap = ratio_gap.max(rel(y, f(m, beta - I * PI * cc) / f(m, beta - I * PI * r)));
            }
        }
    }
    let mut abelian_gap: f64 = 0.0;
    for &(n, h) in &[(2usize, 1i64), (2, 2), (3, 1)] {
        for m in 1..=3 {
            for beta in betas(7, 10) {
                let q = StructureFunctionQuery::abelian(n, h, m, beta).unwrap();
                abelian_gap = abelian_gap.max((y_structure(&q, &p).unwrap() - 1.0).norm());
            }
        }
    }
    Outcome {
        pass: exact_one && inv_gap <= 1e-10 && ratio_gap <= 1e-10 && abelian_gap <= 1e-12,
        detail: format!(
            "F(0)=1 exact: {exact_one}; line inverse {inv_gap:.1e}; Y vs F ratio {ratio_gap:.1e}; Y-1 on 2r=Nh {abelian_gap:.1e}"
        ),
    }
}

fn poisson_checks() -> Outcome {
    let p = pol();
    let probe = DerivativeProbe::new(1e-5).unwrap();
    let mut t_gap: f64 = 0.0;
    for &n in &[2usize, 3, 4] {
        for beta in betas(8, 5) {
            let d = t_center_derivative(beta, n, probe, &p).unwrap();
            t_gap = t_gap.max(rel(d, poisson_center_coeff(beta, n, &p).unwrap()));
        }
    }
    let mut y_gap: f64 = 0.0;
    for &n in &[2usize, 3] {
        for &m in &[1i64, 2, -2] {
            for &h in &[1i64, 2] {
                for beta in betas(9, 3) {
                    let d = y_line_derivative(n, m, h, beta, probe, &p).unwrap();
                    y_gap = y_gap.max(rel(d, f_h(beta, n, m, h, &p).unwrap()));
                }
            }
        }
    }
    let mut kernel: f64 = 0.0;
    for &n in &[2usize, 3] {
        kernel = kernel.max(m_kernel_c_derivative(c(0.45, 0.12), -(n as f64), 1.3, n, probe, &p).unwrap());
    }
    let mut two_state: f64 = 0.0;
    for beta in betas(10, 5) {
        let want = PI / (I * beta).sin();
        two_state = two_state.max(rel(f_s(beta, 2, &p).unwrap(), want)).max(rel(f_c(beta, 2, &p).unwrap(), -want));
    }
    Outcome {
        pass: t_gap <= 1e-6 && y_gap <= 1e-6 && kernel <= 1e-6 && two_state <= 1e-12,
        detail: format!(
            "dT/dc {t_gap:.1e}; dY/deps vs f_h {y_gap:.1e}; |dM/dc| {kernel:.1e}; N=2 f_s=-f_c {two_state:.1e}"
        ),
    }
}

fn s2(x: C64, w1: f64, w2: f64) -> C64 {
    log_s2(x, Periods::real(w1, w2).unwrap(), &pol()).unwrap().exp()
}

fn special_function_suite() -> Outcome {
    let p = pol();
    // shift identities and reflection on a grid crossing the fundamental strip
    let (w1, w2) = (1.3, 2.0);
    let mut s2_gap: f64 = 0.0;
    for i in 0..7 {
        for j in 0..3 {
            let x = c(-2.05 + 0.85 * i as f64, -0.3 + 0.35 * j as f64);
            let a = s2(x, w1, w2);
            s2_gap = s2_gap
                .max((s2(x + w1, w1, w2) / a * 2.0 * (PI * x / w2).sin() - 1.0).norm())
                .max((s2(x + w2, w1, w2) / a * 2.0 * (PI * x / w1).sin() - 1.0).norm())
                .max((a * s2(w1 + w2 - x, w1, w2) - 1.0).norm());
        }
    }
    let mut inv_gap: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let beta = c(rng.gen_range(-2.0..2.0), rng.gen_range(-0.5..0.5));
        let r = rng.gen_range(0.6..2.5);
        let n = rng.gen_range(2..5);
        inv_gap = inv_gap.max((s0(beta, r, n, &p).unwrap() * s0(-beta, r, n, &p).unwrap() - 1.0).norm());
    }
    let mut kappa_gap: f64 = 0.0;
    for &(beta, r, n) in &[(0.7, 1.5, 2usize), (0.3, 1.3, 3)] {
        let f = |eps: f64| {
            let q = (-eps).exp();
            let z2 = C64::new(0.0, -2.0 * eps * beta / PI).exp();
            -kappa_inv(z2, c(q.powf(2.0 * r), 0.0), c(q, 0.0), n, &p).unwrap()
        };
        let extrapolated = (8.0 * f(0.01) - 6.0 * f(0.02) + f(0.04)) / 3.0;
        kappa_gap = kappa_gap.max(rel(extrapolated, s0(c(beta, 0.0), r, n, &p).unwrap()));
    }
    let mut cot_gap: f64 = 0.0;
    let mut cot_pass = true;
    for n in 1..=6 {
        let report = verify_cotan(n, &SamplePlan { count: 20, seed: 13, ..Default::default() }, &p).unwrap();
        cot_gap = cot_gap.max(report.max_residual);
        cot_pass &= report.pass;
    }
    cot_gap = cot_gap.max(cotan_sum_identity(c(PI / 4.0, 0.0), 2));
    let mut theta_gap: f64 = 0.0;
    for &n in &[2usize, 3, 4] {
        for &pr in &[0.1f64, 0.3] {
            for &xi in &[c(0.17, 0.03), c(-0.31, 0.0), c(0.44, -0.02)] {
                let tau = c(0.0, -pr.ln() / (2.0 * PI));
                let nf = n as f64;
                let mut lhs = c(1.0, 0.0);
                for k in 1..n {
                    lhs *= theta_char(Characteristics::new(k as f64 / nf + 0.5, 0.5), xi, nf * tau, &p).unwrap();
                }
                let small = Nome::from_p(c(pr, 0.0)).unwrap();
                let big = Nome::from_p(c(pr.powi(n as i32), 0.0)).unwrap();
                let z2 = (2.0 * PI * I * xi).exp();
                let pref = (2.0 * PI * I * tau * ((nf - 1.0) * (nf - 2.0) / 24.0)).exp();
                let rhs = pref * euler_phi(big, &p).unwrap().powi(n as i32) / euler_phi(small, &p).unwrap()
                    * jacobi_big_theta(z2, small, &p).unwrap()
                    / jacobi_big_theta(z2, big, &p).unwrap();
                theta_gap = theta_gap.max(rel(lhs, rhs));
            }
        }
    }
    Outcome {
        pass: s2_gap <= 1e-8 && inv_gap <= 1e-10 && kappa_gap <= 1e-4 && cot_pass && cot_gap <= 1e-11 && theta_gap <= 1e-10,
        detail: format!(
            "S2 shifts/reflection {s2_gap:.1e}; S0 inversion {inv_gap:.1e}; kappa ladder {kappa_gap:.1e}; cotangent sum {cot_gap:.1e}; theta product {theta_gap:.1e}"
        ),
    }
}

fn higher_spin() -> Outcome {
    let p = pol();
    let mut reductions = true;
    for beta in betas(14, 5) {
        let q = StructureFunctionQuery::new(2, 1.2, 2, beta);
        reductions &= f_higher(1, &q, &p).unwrap() == f_structure(&q, &p).unwrap();
        reductions &= y_higher(1, 1, beta, &q, &p).unwrap() == y_structure(&q, &p).unwrap();
        reductions &= poisson_higher(1, 1, beta, 2, 2, 1, &p).unwrap() == f_h(beta, 2, 2, 1, &p).unwrap();
    }
    // at N=2 the exact sums vanish identically (f_s, f_c antiperiodic under i pi);
    // there agreement means both sides vanish
    let probe = DerivativeProbe::default();
    let (mut worst_rel, mut worst_abs, mut vanishing) = (0.0f64, 0.0f64, 0usize);
    for &(s, sp) in &[(2u32, 1u32), (2, 2)] {
        for &(m, h) in &[(1i64, 1i64), (1, 2), (2, 2), (-2, 1)] {
            for beta in betas(15, 3) {
                let d = y_higher_line_derivative(s, sp, 2, m, h, beta, probe, &p).unwrap();
                let exact = poisson_higher(s, sp, beta, 2, m, h, &p).unwrap();
                if exact.norm() < 1e-12 {
                    vanishing += 1;
                    worst_abs = worst_abs.max(d.norm());
                } else {
                    worst_rel = worst_rel.max(rel(d, exact));
                }
            }
        }
    }
    Outcome {
        pass: reductions && worst_rel <= 1e-6 && worst_abs <= 1e-9,
        detail: format!(
            "spin-1 reductions exact: {reductions}; N=2 finite difference vs sum: relative {worst_rel:.1e}, {vanishing} vanishing cases with |FD| <= {worst_abs:.1e}"
        ),
    }
}

fn negative_controls() -> Outcome {
    let p = pol();
    let plan = SamplePlan { seed: 21, count: 5, ..Default::default() };
    let bad = SamplePlan { perturb: 1e-6, ..plan };
    let context = ctx(1.3, 2);
    let line = CriticalLine::new(1, 1.3, 2);
    let run = |pl: &SamplePlan| -> Vec<VerificationReport> {
        vec![
            verify_ybe(&context, pl, &p).unwrap(),
            verify_unitarity(&context, pl, &p).unwrap(),
            verify_crossing(&context, pl, &p).unwrap(),
            verify_crossing_unitarity(&context, pl, &p).unwrap(),
            verify_quasi_periodicity(&context, pl, &p).unwrap(),
            verify_hm_conjugation(&context, &line, pl, &p).unwrap(),
            verify_cotan(3, pl, &p).unwrap(),
        ]
    };
    let clean = run(&plan);
    let perturbed = run(&bad);
    let ladder = [0.4, 0.3];
    let ladder_clean = verify_scaling_limit(2, 1.5, c(0.8, 0.0), &ladder, 0.0, &p).unwrap();
    let ladder_bad = verify_scaling_limit(2, 1.5, c(0.8, 0.0), &ladder, 1e-6, &p).unwrap();
    let all_fail = perturbed.iter().all(|r| !r.pass) && !ladder_bad.pass;
    let clean_pass = clean.iter().all(|r| r.pass);
    let again = run(&plan);
    let deterministic = clean.iter().zip(&again).all(|(a, b)| a.to_json() == b.to_json())
        && ladder_clean.to_json() == verify_scaling_limit(2, 1.5, c(0.8, 0.0), &ladder, 0.0, &p).unwrap().to_json();
    let survivors: Vec<&str> = perturbed.iter().filter(|r| r.pass).map(|r| r.identity_id.as_str()).collect();
    Outcome {
        pass: all_fail && clean_pass && deterministic,
        detail: format!(
            "{} verifiers fail under 1e-6 perturbation (survivors: {:?}); unperturbed pass: {clean_pass}; byte-identical reports: {deterministic}",
            perturbed.len() + 1,
            survivors
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("identity suite", theorem_suite),
        ("elliptic cross-construction", elliptic_cross_construction),
        ("N=2 anchor", two_state_anchor),
        ("scaling ladder", scaling_ladder),
        ("exchange identities", exchange_identities),
        ("Poisson derivatives", poisson_checks),
        ("special functions", special_function_suite),
        ("higher spin", higher_spin),
        ("negative controls and determinism", negative_controls),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
            ),
        });
        println!("criterion {}: {} {name}: {}", i + 1, if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
        if !outcome.pass {
            failed.push(i + 1);
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        println!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
