//! The elliptic Z_N-vertex R-matrix, built from weighted clock/shift matrices
//! and, independently, from closed-form Jacobi Theta expressions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, TensorMatrix};
use crate::policy::TruncationPolicy;
use crate::special::{
    big_theta_additive_log, euler_phi, kappa_inv, lattice_distance, theta_char, theta_zero_distance,
    Characteristics, Nome, C64,
};

const I: C64 = C64::new(0.0, 1.0);

/// Additive parameters with `z = e^{i pi xi}`, `q = e^{i pi zeta}`, `p = e^{2 i pi tau}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticParams {
    pub xi: C64,
    pub zeta: C64,
    pub tau: C64,
    pub n: usize,
}

impl EllipticParams {
    pub fn new(xi: C64, zeta: C64, tau: C64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("N must be >= 2, got {n}")));
        }
        if !(tau.im > 0.0) {
            return Err(Error::Domain(format!("Im tau must be positive, got {tau}")));
        }
        if !(zeta.im > 0.0) {
            return Err(Error::Domain(format!("|q| < 1 needs Im zeta > 0, got {zeta}")));
        }
        Ok(EllipticParams { xi, zeta, tau, n })
    }

    /// From multiplicative parameters, using principal logarithms.
    pub fn from_multiplicative(z: C64, q: C64, p: C64, n: usize) -> Result<Self> {
        if z.norm() == 0.0 || q.norm() == 0.0 || p.norm() == 0.0 {
            return Err(Error::Domain("z, q, p must be nonzero".into()));
        }
        Self::new(z.ln() / (PI * I), q.ln() / (PI * I), p.ln() / (2.0 * PI * I), n)
    }

    pub fn z(&self) -> C64 {
        (PI * I * self.xi).exp()
    }

    pub fn q(&self) -> C64 {
        (PI * I * self.zeta).exp()
    }

    pub fn p(&self) -> C64 {
        (2.0 * PI * I * self.tau).exp()
    }
}

/// Residue modulo `N`, stored as `0..N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZnIndex {
    value: usize,
    n: usize,
}

impl ZnIndex {
    pub fn new(value: i64, n: usize) -> Self {
        ZnIndex { value: value.rem_euclid(n as i64) as usize, n }
    }

    pub fn value(&self) -> usize {
        self.value
    }

    pub fn modulus(&self) -> usize {
        self.n
    }

    pub fn shift(&self, s: i64) -> Self {
        ZnIndex::new(self.value as i64 + s, self.n)
    }
}

/// Clock `g = diag(omega^i)` and shift `h_{ij} = delta_{i+1, j}` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ZnMatrices {
    pub g: CMatrix,
    pub h: CMatrix,
    pub omega: C64,
}

impl ZnMatrices {
    /// `I_(a1, a2) = g^a2 h^a1`.
    pub fn i_matrix(&self, a1: usize, a2: usize) -> CMatrix {
        self.g.pow(a2 as u32) * self.h.pow(a1 as u32)
    }

    /// `I_(a1, a2)^{-1} = h^{-a1} g^{-a2}`, from the unitarity of `g` and `h`.
    pub fn i_inverse(&self, a1: usize, a2: usize) -> CMatrix {
        self.i_matrix(a1, a2).adjoint()
    }
}

pub fn zn_matrices(n: usize) -> ZnMatrices {
    let omega = (2.0 * PI * I / n as f64).exp();
    let g = CMatrix::from_fn(n, n, |i, j| if i == j { omega.powu(i as u32) } else { C64::new(0.0, 0.0) });
    let h = CMatrix::from_fn(n, n, |i, j| if (i + 1) % n == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    ZnMatrices { g, h, omega }
}

fn guard_theta(ch: Characteristics, x: C64, tau: C64, what: &str, policy: &TruncationPolicy) -> Result<C64> {
    let d = theta_zero_distance(ch, x, tau);
    if d < policy.pole_radius {
        return Err(Error::Pole { what: what.to_string(), distance: d });
    }
    theta_char(ch, x, tau, policy)
}

/// Weight of `I_alpha (x) I_alpha^{-1}`:
/// `theta[1/2+a1/N, 1/2+a2/N](xi + zeta/N, tau) / (N theta[...](zeta/N, tau))`.
pub fn weight_w(alpha: (ZnIndex, ZnIndex), params: &EllipticParams, policy: &TruncationPolicy) -> Result<C64> {
    let nf = params.n as f64;
    let ch = Characteristics::new(0.5 + alpha.0.value() as f64 / nf, 0.5 + alpha.1.value() as f64 / nf);
    let den = guard_theta(ch, params.zeta / nf, params.tau, "weight denominator theta", policy)?;
    let num = theta_char(ch, params.xi + params.zeta / nf, params.tau, policy)?;
    Ok(num / (nf * den))
}

/// `S = sum_alpha W_alpha I_alpha (x) I_alpha^{-1}`.
pub fn build_s(params: &EllipticParams, policy: &TruncationPolicy) -> Result<TensorMatrix> {
    let n = params.n;
    let zn = zn_matrices(n);
    let mut acc = TensorMatrix::zeros(n).into_matrix();
    for a1 in 0..n {
        for a2 in 0..n {
            let w = weight_w((ZnIndex::new(a1 as i64, n), ZnIndex::new(a2 as i64, n)), params, policy)?;
            acc += zn.i_matrix(a1, a2).kronecker(&zn.i_inverse(a1, a2)) * w;
        }
    }
    TensorMatrix::from_matrix(n, acc)
}

/// Closed-form entry of `S` at row `(a, b)`, column `(c, a+b-c)`, from
/// theta functions at nome `N tau`.
pub fn s_element_closed(
    a: ZnIndex,
    b: ZnIndex,
    c: ZnIndex,
    params: &EllipticParams,
    policy: &TruncationPolicy,
) -> Result<C64> {
    let n = params.n;
    let nf = n as f64;
    let big_tau = nf * params.tau;
    let ch = |k: i64| Characteristics::new(k.rem_euclid(n as i64) as f64 / nf + 0.5, 0.5);
    let (a, b, c) = (a.value() as i64, b.value() as i64, c.value() as i64);

    let mut den = guard_theta(ch(c - a), params.zeta, big_tau, "closed S denominator theta", policy)?;
    for k in 1..n as i64 {
        den *= theta_char(ch(k), C64::new(0.0, 0.0), big_tau, policy)?;
    }
    let mut num = theta_char(ch(b - a), params.xi + params.zeta, big_tau, policy)?;
    let skip = (b - c).rem_euclid(n as i64);
    for k in 0..n as i64 {
        if k != skip {
            num *= theta_char(ch(k), params.xi, big_tau, policy)?;
        }
    }
    Ok(num / den)
}

fn elliptic_prefactor(params: &EllipticParams, policy: &TruncationPolicy) -> Result<C64> {
    let nf = params.n as f64;
    let half = Characteristics::half();
    let den = guard_theta(half, params.xi + params.zeta, params.tau, "prefactor theta", policy)?;
    let num = theta_char(half, params.zeta, params.tau, policy)?;
    let z2 = (2.0 * PI * I * params.xi).exp();
    let kinv = kappa_inv(z2, params.p(), params.q(), params.n, policy)?;
    Ok((PI * I * params.xi * (2.0 / nf - 2.0)).exp() * kinv * num / den)
}

/// Elliptic R-matrix, `z^{2/N-2} kappa(z^2)^{-1} theta(zeta)/theta(xi+zeta) S`.
pub fn build_elliptic_r(params: &EllipticParams, policy: &TruncationPolicy) -> Result<TensorMatrix> {
    let pref = elliptic_prefactor(params, policy)?;
    Ok(build_s(params, policy)?.scale(pref))
}

fn guard_lattice(w: C64, tau: C64, what: &str, policy: &TruncationPolicy) -> Result<()> {
    let d = lattice_distance(w, tau);
    if d < policy.pole_radius {
        return Err(Error::Pole { what: what.to_string(), distance: d });
    }
    Ok(())
}

/// Closed-form entry of the elliptic R-matrix at row `(a, b)`, column
/// `(c, a+b-c)`, written with Jacobi Theta functions at nomes `p` and `p^N`.
/// All powers of `z`, `q`, `p` are taken through the additive parameters.
pub fn elliptic_r_element_closed(
    a: ZnIndex,
    b: ZnIndex,
    c: ZnIndex,
    params: &EllipticParams,
    policy: &TruncationPolicy,
) -> Result<C64> {
    let n = params.n as i64;
    let nf = n as f64;
    let (xi, zeta, tau) = (params.xi, params.zeta, params.tau);
    let big_tau = nf * tau;
    let da = (a.value() as i64 - c.value() as i64).rem_euclid(n) as f64;
    let db = (b.value() as i64 - c.value() as i64).rem_euclid(n) as f64;

    let w_num = (nf + db - da) * tau + zeta + xi;
    let w_den1 = (nf + db) * tau + xi;
    let w_den2 = (nf - da) * tau + zeta;
    let w_den3 = zeta + xi;
    guard_lattice(w_den1, big_tau, "closed R Theta_{p^N}(p^{N+b-c} z^2)", policy)?;
    guard_lattice(w_den2, big_tau, "closed R Theta_{p^N}(p^{N-a+c} q^2)", policy)?;
    guard_lattice(w_den3, tau, "closed R Theta_p(q^2 z^2)", policy)?;

    let log_thetas = big_theta_additive_log(w_num, big_tau, policy)?
        - big_theta_additive_log(w_den1, big_tau, policy)?
        - big_theta_additive_log(w_den2, big_tau, policy)?
        + big_theta_additive_log(zeta, tau, policy)?
        + big_theta_additive_log(tau + xi, tau, policy)?
        - big_theta_additive_log(w_den3, tau, policy)?;
    let log_powers = PI * I * xi * 2.0 * (1.0 - da) / nf + PI * I * zeta * 2.0 * db / nf - 2.0 * PI * I * tau * da * db / nf;

    let phi_ratio = euler_phi(Nome::from_tau(big_tau)?, policy)? / euler_phi(Nome::from_tau(tau)?, policy)?;
    let z2 = (2.0 * PI * I * xi).exp();
    let kinv = kappa_inv(z2, params.p(), params.q(), params.n, policy)?;
    Ok(kinv * phi_ratio.powi(3) * (log_thetas + log_powers).exp())
}

/// The full matrix from [`elliptic_r_element_closed`], zero off `d = a+b-c`.
pub fn build_elliptic_r_closed(params: &EllipticParams, policy: &TruncationPolicy) -> Result<TensorMatrix> {
    let n = params.n;
    let mut out = TensorMatrix::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let d = (a + b + n - c) % n;
                let v = elliptic_r_element_closed(
                    ZnIndex::new(a as i64, n),
                    ZnIndex::new(b as i64, n),
                    ZnIndex::new(c as i64, n),
                    params,
                    policy,
                )?;
                out.set(a, b, c, d, v);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_and_shift_relations() {
        let z = zn_matrices(4);
        let hg = &z.h * &z.g;
        let gh = &z.g * &z.h;
        assert!((hg - gh * z.omega).iter().all(|v| v.norm() < 1e-14));
        let z3 = zn_matrices(3);
        let id = CMatrix::identity(3, 3);
        assert!((z3.h.pow(3) - &id).iter().all(|v| v.norm() < 1e-14));
        assert!((z3.g.pow(3) - &id).iter().all(|v| v.norm() < 1e-14));
        assert_eq!(z3.i_matrix(0, 0), id);
    }

    #[test]
    fn weights_at_zero_are_one_over_n() {
        let p = EllipticParams::new(C64::new(0.0, 0.0), C64::new(0.1, 0.2), C64::new(0.0, 0.8), 3).unwrap();
        let pol = TruncationPolicy::default();
        let mut total = C64::new(0.0, 0.0);
        for a1 in 0..3 {
            for a2 in 0..3 {
                let w = weight_w((ZnIndex::new(a1, 3), ZnIndex::new(a2, 3)), &p, &pol).unwrap();
                assert!((w - 1.0 / 3.0).norm() < 1e-14);
                total += w;
            }
        }
        // nine weights of 1/3 each
        assert!((total - 3.0).norm() < 1e-13, "{total}");
    }

    #[test]
    fn zn_index_wraps() {
        assert_eq!(ZnIndex::new(-1, 3).value(), 2);
        assert_eq!(ZnIndex::new(2, 3).shift(2).value(), 1);
    }
}
