//! Dense symmetric linear algebra shared by every other module: the
//! [`SymMatrix`] carrier, the isometric vectorization of symmetric matrices,
//! unordered-pair indexing, and extremal eigenvalue routines.

mod eig;
mod io;
mod lanczos;

pub use eig::{min_eig, op_norm, op_norm_rect, sym_eig, sym_eigenvalues, EigMethod, EigResult, DENSE_LIMIT};
pub use io::{read_sym, write_sym};
pub use lanczos::{lanczos_extreme, lanczos_extremes, Extreme, LanczosOptions, LanczosResult, SymOperator};

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// Dense real symmetric matrix.
///
/// Writes go through [`SymMatrix::set`], which updates both triangles, so
/// `get(i, j) == get(j, i)` holds bit-for-bit at all times.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    inner: Mat<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "SymMatrix dimension must be at least 1");
        Self {
            inner: Mat::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n);
        for i in 0..n {
            out.inner[(i, i)] = 1.0;
        }
        out
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut out = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            out.inner[(i, i)] = v;
        }
        out
    }

    /// Builds a matrix by evaluating `f(i, j)` on the upper triangle `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(n);
        for j in 0..n {
            for i in 0..=j {
                let v = f(i, j);
                out.inner[(i, j)] = v;
                out.inner[(j, i)] = v;
            }
        }
        out
    }

    /// Takes the upper triangle of a square matrix as authoritative and
    /// mirrors it into the lower triangle.
    pub fn from_upper(mut m: Mat<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        assert!(m.nrows() >= 1);
        let n = m.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                m[(i, j)] = m[(j, i)];
            }
        }
        Self { inner: m }
    }

    /// Validates `|m_ij - m_ji| <= tol` and then symmetrizes from the upper
    /// triangle.
    pub fn from_mat(m: Mat<f64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                let d = (m[(i, j)] - m[(j, i)]).abs();
                if !(d <= tol) {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric: |A[{i}][{j}] - A[{j}][{i}]| = {d:e}"
                    )));
                }
            }
        }
        Ok(Self::from_upper(m))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.inner[(i, j)] = v;
        self.inner[(j, i)] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        let w = self.inner[(i, j)] + v;
        self.set(i, j, w);
    }

    pub fn as_ref(&self) -> MatRef<'_, f64> {
        self.inner.as_ref()
    }

    pub fn into_inner(self) -> Mat<f64> {
        self.inner
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.inner[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.inner[(i, i)]).sum()
    }

    /// `self <- c * self`
    pub fn scale(&mut self, c: f64) {
        let n = self.n();
        for j in 0..n {
            for i in 0..n {
                self.inner[(i, j)] *= c;
            }
        }
    }

    /// `self <- self + c * I`
    pub fn shift_diag(&mut self, c: f64) {
        for i in 0..self.n() {
            self.inner[(i, i)] += c;
        }
    }

    /// `self <- self + c * other`
    pub fn add_scaled(&mut self, c: f64, other: &SymMatrix) {
        assert_eq!(self.n(), other.n());
        let n = self.n();
        for j in 0..n {
            for i in 0..n {
                self.inner[(i, j)] += c * other.inner[(i, j)];
            }
        }
    }

    /// Frobenius inner product `<A, B> = sum_ij A_ij B_ij`.
    pub fn frobenius_inner(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n(), other.n());
        let n = self.n();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                s += self.inner[(i, j)] * other.inner[(i, j)];
            }
        }
        s
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_inner(self).sqrt()
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n(), other.n());
        let n = self.n();
        let mut m: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                m = m.max((self.inner[(i, j)] - other.inner[(i, j)]).abs());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.n();
        let mut m: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                m = m.max(self.inner[(i, j)].abs());
            }
        }
        m
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n();
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        y.fill(0.0);
        // column-major: accumulate x_j * A[:, j]
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let col = self.inner.col(j).try_as_col_major().unwrap().as_slice();
            for (yi, &aij) in y.iter_mut().zip(col) {
                *yi += aij * xj;
            }
        }
    }
}

impl SymOperator for SymMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }
}

/// Bijection between unordered pairs `{i, j}`, `i < j`, of `0..n` and flat
/// positions `0..n(n-1)/2`, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairIndex {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairIndex {
    pub fn new(n: usize) -> Self {
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j));
            }
        }
        Self { n, pairs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Position of `{i, j}`; argument order does not matter. Panics on `i == j`.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> usize {
        assert!(i != j, "pair needs two distinct indices");
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(b < self.n);
        a * self.n - a * (a + 1) / 2 + (b - a - 1)
    }

    #[inline]
    pub fn pair(&self, pos: usize) -> (usize, usize) {
        self.pairs[pos]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }
}

/// Returns `n` with `n(n+1)/2 == len`, if any.
pub fn triangular_root(len: usize) -> Option<usize> {
    let guess = (((8 * len + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    (guess.saturating_sub(1)..=guess + 1).find(|&n| n * (n + 1) / 2 == len)
}

/// `[diag(A); sqrt(2) * offdiag(A)]`.
pub fn isovec(a: &SymMatrix) -> Vec<f64> {
    let n = a.n();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    out.extend((0..n).map(|i| a.get(i, i)));
    let s = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(s * a.get(i, j));
        }
    }
    out
}

/// Inverse of [`isovec`].
pub fn isovec_inverse(x: &[f64]) -> Result<SymMatrix> {
    let n = match triangular_root(x.len()) {
        Some(n) if n >= 1 => n,
        _ => return Err(Error::LengthNotTriangular(x.len())),
    };
    let mut out = SymMatrix::zeros(n);
    for (i, &v) in x[..n].iter().enumerate() {
        out.set(i, i, v);
    }
    let s = std::f64::consts::SQRT_2;
    let mut pos = n;
    for i in 0..n {
        for j in (i + 1)..n {
            out.set(i, j, x[pos] / s);
            pos += 1;
        }
    }
    Ok(out)
}

/// Strict upper triangle in lexicographic pair order, unscaled.
pub fn offdiag(a: &SymMatrix) -> Vec<f64> {
    let n = a.n();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(a.get(i, j));
        }
    }
    out
}

/// Isovec of the symmetric rank-one matrix `u u^T`, without forming it.
pub fn isovec_outer(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    out.extend(u.iter().map(|x| x * x));
    let s = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(s * u[i] * u[j]);
        }
    }
    out
}

/// Entrywise square `A∘A`.
pub fn hadamard_square(a: &SymMatrix) -> SymMatrix {
    SymMatrix::from_fn(a.n(), |i, j| {
        let v = a.get(i, j);
        v * v
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
