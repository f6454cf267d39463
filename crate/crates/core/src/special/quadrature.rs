//! Adaptive Gauss-Kronrod (10/21 point) integration of complex-valued
//! functions on a finite interval.

use super::C64;
use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: C64,
    err: f64,
}

fn gk21<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = C64::new(0.0, 0.0);
    let mut fv1 = [C64::new(0.0, 0.0); 10];
    let mut fv2 = [C64::new(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            res_g += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).norm();
    let mut res_abs = WGK[10] * fc.norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
        res_abs += WGK[j] * (fv1[j].norm() + fv2[j].norm());
    }
    let h = half.abs();
    res_asc *= h;
    res_abs *= h;
    let mut err = ((res_k - res_g) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel { a, b, value: res_k * half, err }
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from the given
/// panels and bisecting the worst panel until the summed error estimate is
/// below `abs_tol`. Returns the value and the final error estimate.
pub fn integrate<F: Fn(f64) -> C64>(f: F, breaks: &[f64], abs_tol: f64, max_subdivisions: usize) -> Result<(C64, f64)> {
    if breaks.len() < 2 {
        return Err(Error::Quadrature("need at least one panel".into()));
    }
    let mut panels: Vec<Panel> = breaks.windows(2).map(|w| gk21(&f, w[0], w[1])).collect();
    for _ in 0..=max_subdivisions {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if total_err <= abs_tol {
            let value = panels.iter().map(|p| p.value).sum();
            return Ok((value, total_err));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("nonempty");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            return Err(Error::Quadrature(format!("panel [{}, {}] cannot be split further", p.a, p.b)));
        }
        panels.push(gk21(&f, p.a, mid));
        panels.push(gk21(&f, mid, p.b));
    }
    let total_err: f64 = panels.iter().map(|p| p.err).sum();
    Err(Error::Quadrature(format!(
        "error estimate {total_err:.3e} above {abs_tol:.3e} after {max_subdivisions} subdivisions"
    )))
}
