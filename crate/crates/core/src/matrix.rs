//! Dense complex matrices on `C^N (x) C^N` with composite index `(i, j) -> i N + j`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::special::C64;

pub type CMatrix = DMatrix<C64>;

/// Square matrix on the two-fold tensor space. Row `(i, j)`, column `(k, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorMatrix {
    n: usize,
    data: CMatrix,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

impl TensorMatrix {
    pub fn zeros(n: usize) -> Self {
        TensorMatrix { n, data: CMatrix::from_element(n * n, n * n, zero()) }
    }

    pub fn identity(n: usize) -> Self {
        TensorMatrix { n, data: CMatrix::identity(n * n, n * n) }
    }

    pub fn from_matrix(n: usize, data: CMatrix) -> Result<Self> {
        if data.nrows() != n * n || data.ncols() != n * n {
            return Err(Error::Domain(format!(
                "expected a {}x{} matrix, got {}x{}",
                n * n,
                n * n,
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(TensorMatrix { n, data })
    }

    /// Builds the matrix entry by entry from `f(i, j, k, l)`.
    pub fn from_fn<F: FnMut(usize, usize, usize, usize) -> C64>(n: usize, mut f: F) -> Self {
        let data = CMatrix::from_fn(n * n, n * n, |row, col| f(row / n, row % n, col / n, col % n));
        TensorMatrix { n, data }
    }

    /// Permutation `P (e_i (x) e_j) = e_j (x) e_i`.
    pub fn permutation(n: usize) -> Self {
        Self::from_fn(n, |i, j, k, l| if i == l && j == k { one() } else { zero() })
    }

    /// `a (x) b` for two `N x N` matrices.
    pub fn kron(a: &CMatrix, b: &CMatrix) -> Self {
        let n = a.nrows();
        TensorMatrix { n, data: a.kronecker(b) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    /// Entry at row `(i, j)`, column `(k, l)`.
    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.data[(i * self.n + j, k * self.n + l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: C64) {
        let n = self.n;
        self.data[(i * n + j, k * n + l)] = v;
    }

    pub fn transpose(&self) -> Self {
        TensorMatrix { n: self.n, data: self.data.transpose() }
    }

    /// Transpose in the first tensor factor.
    pub fn t1(&self) -> Self {
        Self::from_fn(self.n, |i, j, k, l| self.entry(k, j, i, l))
    }

    /// Transpose in the second tensor factor.
    pub fn t2(&self) -> Self {
        Self::from_fn(self.n, |i, j, k, l| self.entry(i, l, k, j))
    }

    /// `P A P`, i.e. the same operator with the two factors exchanged.
    pub fn swap_factors(&self) -> Self {
        Self::from_fn(self.n, |i, j, k, l| self.entry(j, i, l, k))
    }

    pub fn mul(&self, other: &TensorMatrix) -> Self {
        TensorMatrix { n: self.n, data: &self.data * &other.data }
    }

    pub fn scale(&self, s: C64) -> Self {
        TensorMatrix { n: self.n, data: &self.data * s }
    }

    pub fn sub(&self, other: &TensorMatrix) -> Self {
        TensorMatrix { n: self.n, data: &self.data - &other.data }
    }

    pub fn inverse(&self) -> Result<Self> {
        invert(&self.data).map(|data| TensorMatrix { n: self.n, data })
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn max_abs_diff(&self, other: &TensorMatrix) -> f64 {
        max_abs(&(&self.data - &other.data))
    }

    /// `A (x) 1` on three factors, acting on spaces 1 and 2.
    pub fn embed12(&self) -> CMatrix {
        self.embed(|a, b, c| (a, b, c))
    }

    /// Acting on spaces 1 and 3.
    pub fn embed13(&self) -> CMatrix {
        self.embed(|a, b, c| (a, c, b))
    }

    /// Acting on spaces 2 and 3.
    pub fn embed23(&self) -> CMatrix {
        self.embed(|a, b, c| (c, a, b))
    }

    // `place(x, y, spectator)` returns the positions in the triple product.
    fn embed<F: Fn(usize, usize, usize) -> (usize, usize, usize)>(&self, place: F) -> CMatrix {
        let n = self.n;
        let idx = |t: (usize, usize, usize)| (t.0 * n + t.1) * n + t.2;
        let mut out = CMatrix::from_element(n * n * n, n * n * n, zero());
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.entry(i, j, k, l);
                        if v == zero() {
                            continue;
                        }
                        for m in 0..n {
                            out[(idx(place(i, j, m)), idx(place(k, l, m)))] = v;
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

pub fn invert(m: &CMatrix) -> Result<CMatrix> {
    let inv = m.clone().lu().try_inverse().ok_or_else(|| Error::Singular("LU pivot vanished".into()))?;
    if !inv.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Singular("inverse has non-finite entries".into()));
    }
    Ok(inv)
}

/// `max|A| max|A^-1|`, a cheap conditioning indicator.
pub fn condition_estimate(m: &CMatrix) -> Result<f64> {
    Ok(max_abs(m) * max_abs(&invert(m)?) * m.nrows() as f64)
}
