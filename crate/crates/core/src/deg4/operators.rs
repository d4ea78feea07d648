//! Matrix-free versions of the pair-indexed blocks. Each apply costs a few
//! `N x N` products instead of touching the `N(N-1)/2`-sided matrix.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};

use super::SparseDelta;
use crate::linalg::{dot, offdiag, PairIndex, SymMatrix, SymOperator};

fn mul(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    let mut out = Mat::<f64>::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a.as_ref(), b.as_ref(), 1.0, Par::Seq);
    out
}

/// `x ↦ X22 x`. Writing `A` for the symmetric zero-diagonal matrix with
/// `A_kl = x_{kl}`:
/// `(X22 x)_ij = M_ij Σ_{k<l} M_kl A_kl + (MAM)_ij - (M diag(MAM) M)_ij`.
pub struct X22Operator {
    m: Mat<f64>,
    pairs: PairIndex,
}

impl X22Operator {
    pub fn new(m: &SymMatrix) -> Self {
        Self {
            m: m.as_ref().to_owned(),
            pairs: PairIndex::new(m.n()),
        }
    }
}

impl SymOperator for X22Operator {
    fn dim(&self) -> usize {
        self.pairs.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.m.nrows();
        let mut a = Mat::<f64>::zeros(n, n);
        let mut s = 0.0;
        for (p, (k, l)) in self.pairs.iter().enumerate() {
            a[(k, l)] = x[p];
            a[(l, k)] = x[p];
            s += self.m[(k, l)] * x[p];
        }
        let mam = mul(&mul(&self.m, &a), &self.m);
        let mut scaled = self.m.clone();
        for c in 0..n {
            let w = mam[(c, c)];
            for r in 0..n {
                scaled[(r, c)] *= w;
            }
        }
        let quartic = mul(&scaled, &self.m);
        for (p, (i, j)) in self.pairs.iter().enumerate() {
            y[p] = s * self.m[(i, j)] + mam[(i, j)] - quartic[(i, j)];
        }
    }
}

/// `x ↦ Z1a x = X22 x - (1-α) o ⟨o, x⟩` with `o = offdiag(M)`.
pub struct Z1aOperator {
    x22: X22Operator,
    o: Vec<f64>,
    alpha: f64,
}

impl Z1aOperator {
    pub fn new(m: &SymMatrix, alpha: f64) -> Self {
        Self {
            x22: X22Operator::new(m),
            o: offdiag(m),
            alpha,
        }
    }
}

impl SymOperator for Z1aOperator {
    fn dim(&self) -> usize {
        self.o.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.x22.apply(x, y);
        let c = (1.0 - self.alpha) * dot(&self.o, x);
        y.iter_mut().zip(&self.o).for_each(|(yi, oi)| *yi -= c * oi);
    }
}

/// `x ↦ Z22 x = (1-α)(X22 + 2Δ) x + α x`.
pub struct Z22Operator {
    x22: X22Operator,
    delta: SparseDelta,
    alpha: f64,
}

impl Z22Operator {
    pub fn new(m: &SymMatrix, delta: SparseDelta, alpha: f64) -> Self {
        Self {
            x22: X22Operator::new(m),
            delta,
            alpha,
        }
    }
}

impl SymOperator for Z22Operator {
    fn dim(&self) -> usize {
        self.x22.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut t = vec![0.0; x.len()];
        self.x22.apply(x, y);
        self.delta.apply(x, &mut t);
        let a = self.alpha;
        for ((yi, ti), xi) in y.iter_mut().zip(&t).zip(x) {
            *yi = (1.0 - a) * (*yi + 2.0 * ti) + a * xi;
        }
    }
}

/// The minor over `{∅} ∪ pairs`, given its pair block as an operator.
pub struct MinorOperator<'a> {
    pub z00: f64,
    pub z02: Vec<f64>,
    pub z22: &'a dyn SymOperator,
}

impl SymOperator for MinorOperator<'_> {
    fn dim(&self) -> usize {
        1 + self.z02.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (x0, xp) = x.split_first().unwrap();
        let (y0, yp) = y.split_first_mut().unwrap();
        self.z22.apply(xp, yp);
        for (yi, zi) in yp.iter_mut().zip(&self.z02) {
            *yi += zi * x0;
        }
        *y0 = self.z00 * x0 + dot(&self.z02, xp);
    }
}
