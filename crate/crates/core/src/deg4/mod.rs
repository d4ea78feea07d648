//! The explicit degree-4 pseudomoment matrix over index sets of size at most
//! two: assembly from a degree-2 witness, the linear constraints of reduced
//! degree-4 matrices, sign-symmetrization, the Schur split and PSD checks.
//!
//! Rows and columns of the full matrix are ordered `∅`, then `{0}..{N-1}`,
//! then pairs in the order of [`PairIndex`].

mod certify;
mod constraints;
mod operators;

pub use certify::{
    certify_psd, certify_witness_matrix_free, schur_split, CertifyMethod, PsdCertificate, SchurPieces, Verdict,
};
pub use constraints::{verify_constraints, ConstraintReport, Violation};
pub use operators::{MinorOperator, X22Operator, Z1aOperator, Z22Operator};

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};

use crate::error::{Error, Result};
use crate::linalg::{offdiag, PairIndex, SymMatrix, SymOperator};

/// Block form of the degree-4 matrix. `z12` has one row per singleton and
/// one column per pair.
#[derive(Clone, Debug)]
pub struct Deg4Pseudomoments {
    pub n: usize,
    /// `None` when the matrix did not come from [`assemble_z`].
    pub alpha: Option<f64>,
    pub pairs: PairIndex,
    pub z00: f64,
    pub z01: Vec<f64>,
    pub z02: Vec<f64>,
    pub z11: SymMatrix,
    pub z12: Mat<f64>,
    pub z22: SymMatrix,
    /// Largest `|Z22_pp - 1|` before the diagonal was set to exactly 1.
    pub diag_roundoff: f64,
}

fn check_unit_diag(m: &SymMatrix) -> Result<()> {
    if m.n() < 2 {
        return Err(Error::InvalidParameter("degree-4 construction needs N >= 2".into()));
    }
    for i in 0..m.n() {
        let d = (m.get(i, i) - 1.0).abs();
        if !(d <= 1e-10) {
            return Err(Error::InvalidParameter(format!(
                "diag(M) must be 1, |M[{i}][{i}] - 1| = {d:e}"
            )));
        }
    }
    Ok(())
}

/// `X22[{i,j},{k,l}] = M_ij M_kl + M_ik M_jl + M_il M_jk - 2 (H Hᵀ)[{i,j},{k,l}]`
/// with `H[{i,j}, m] = M_im M_jm`.
pub fn heuristic_x22(m: &SymMatrix) -> Result<SymMatrix> {
    check_unit_diag(m)?;
    let n = m.n();
    let pairs = PairIndex::new(n);
    let np = pairs.len();
    let h = Mat::from_fn(np, n, |q, c| {
        let (i, j) = pairs.pair(q);
        m.get(i, c) * m.get(j, c)
    });
    let mut g = Mat::<f64>::zeros(np, np);
    matmul(
        g.as_mut(),
        Accum::Replace,
        h.as_ref(),
        h.as_ref().transpose(),
        1.0,
        Par::Seq,
    );
    drop(h);
    for b in 0..np {
        let (k, l) = pairs.pair(b);
        for a in 0..=b {
            let (i, j) = pairs.pair(a);
            g[(a, b)] =
                m.get(i, j) * m.get(k, l) + m.get(i, k) * m.get(j, l) + m.get(i, l) * m.get(j, k) - 2.0 * g[(a, b)];
        }
    }
    Ok(SymMatrix::from_upper(g))
}

/// The correction term in per-index form:
/// `e[i][k][l] = Σ_{m≠i} M_im² M_km M_lm`, so that
/// `Δ[{i,k},{i,l}] = e[i][k][l]` whenever `k, l ≠ i`.
#[derive(Clone, Debug)]
pub struct SparseDelta {
    pub n: usize,
    pub e: Vec<SymMatrix>,
}

impl SparseDelta {
    /// Entry `Δ[{a,b},{c,d}]` for two pairs; zero unless they share an index.
    pub fn entry(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        if (a, b) == (c, d) || (a, b) == (d, c) {
            return self.e[a].get(b, b);
        }
        let shared = [a, b].into_iter().find(|x| *x == c || *x == d);
        match shared {
            Some(i) => {
                let k = if a == i { b } else { a };
                let l = if c == i { d } else { c };
                self.e[i].get(k, l)
            }
            None => 0.0,
        }
    }

    /// Adds `scale * Δ` into a pair-indexed matrix.
    pub fn add_to(&self, pairs: &PairIndex, target: &mut SymMatrix, scale: f64) {
        let n = self.n;
        for i in 0..n {
            let e = &self.e[i];
            for k in 0..n {
                if k == i {
                    continue;
                }
                let pk = pairs.position(i, k);
                for l in (k + 1)..n {
                    if l == i {
                        continue;
                    }
                    target.add_at(pk, pairs.position(i, l), scale * e.get(k, l));
                }
            }
        }
        for (p, (i, k)) in pairs.iter().enumerate() {
            target.add_at(p, p, scale * self.e[i].get(k, k));
        }
    }

    pub fn to_dense(&self) -> SymMatrix {
        let pairs = PairIndex::new(self.n);
        let mut out = SymMatrix::zeros(pairs.len());
        self.add_to(&pairs, &mut out, 1.0);
        out
    }

    /// Largest absolute diagonal entry and largest off-diagonal absolute row
    /// sum (the Gershgorin radius).
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.n;
        let pairs = PairIndex::new(n);
        let mut diag_max: f64 = 0.0;
        let mut radius: f64 = 0.0;
        for (i, k) in pairs.iter() {
            diag_max = diag_max.max(self.e[i].get(k, k).abs());
            let mut s = 0.0;
            for l in 0..n {
                if l != i && l != k {
                    s += self.e[i].get(k, l).abs() + self.e[k].get(i, l).abs();
                }
            }
            radius = radius.max(s);
        }
        (diag_max, radius)
    }
}

impl SymOperator for SparseDelta {
    fn dim(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        let pairs = PairIndex::new(n);
        y.fill(0.0);
        let mut a = vec![0.0; n];
        for i in 0..n {
            for (l, al) in a.iter_mut().enumerate() {
                *al = if l == i { 0.0 } else { x[pairs.position(i, l)] };
            }
            let e = &self.e[i];
            for k in 0..n {
                if k == i {
                    continue;
                }
                let mut s = 0.0;
                for l in 0..n {
                    if l != k {
                        s += e.get(k, l) * a[l];
                    }
                }
                y[pairs.position(i, k)] += s;
            }
        }
        for (p, (i, k)) in pairs.iter().enumerate() {
            y[p] += self.e[i].get(k, k) * x[p];
        }
    }
}

/// Per-index blocks `E_i = M diag(w_i) M` with `w_i[m] = M_im²` for `m ≠ i`
/// and `w_i[i] = 0`.
pub fn correction_delta(m: &SymMatrix) -> Result<SparseDelta> {
    check_unit_diag(m)?;
    let n = m.n();
    let mut e = Vec::with_capacity(n);
    let mut scaled = Mat::<f64>::zeros(n, n);
    let mut prod = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for c in 0..n {
            let w = if c == i { 0.0 } else { m.get(i, c) * m.get(i, c) };
            for r in 0..n {
                scaled[(r, c)] = m.get(r, c) * w;
            }
        }
        matmul(
            prod.as_mut(),
            Accum::Replace,
            scaled.as_ref(),
            m.as_ref(),
            1.0,
            Par::Seq,
        );
        e.push(SymMatrix::from_upper(prod.clone()));
    }
    Ok(SparseDelta { n, e })
}

/// Dense `Δ` on pairs.
pub fn correction_delta_dense(m: &SymMatrix) -> Result<SymMatrix> {
    Ok(correction_delta(m)?.to_dense())
}

fn assemble(m: &SymMatrix, alpha: f64, with_delta: bool) -> Result<Deg4Pseudomoments> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let n = m.n();
    let pairs = PairIndex::new(n);
    let mut z22 = heuristic_x22(m)?;
    if with_delta {
        correction_delta(m)?.add_to(&pairs, &mut z22, 2.0);
    }
    z22.scale(1.0 - alpha);
    z22.shift_diag(alpha);
    let mut diag_roundoff: f64 = 0.0;
    if with_delta {
        for p in 0..pairs.len() {
            diag_roundoff = diag_roundoff.max((z22.get(p, p) - 1.0).abs());
            z22.set(p, p, 1.0);
        }
    }
    let z02 = offdiag(m).into_iter().map(|x| (1.0 - alpha) * x).collect();
    let mut z11 = m.clone();
    z11.scale(1.0 - alpha);
    for i in 0..n {
        z11.set(i, i, 1.0);
    }
    Ok(Deg4Pseudomoments {
        n,
        alpha: Some(alpha),
        z00: 1.0,
        z01: vec![0.0; n],
        z02,
        z11,
        z12: Mat::zeros(n, pairs.len()),
        z22,
        pairs,
        diag_roundoff,
    })
}

/// `Z` with `Z22 = (1-α)(X22 + 2Δ) + αI` and `Z11 = (1-α)M + αI`.
pub fn assemble_z(m: &SymMatrix, alpha: f64) -> Result<Deg4Pseudomoments> {
    assemble(m, alpha, true)
}

/// Same as [`assemble_z`] but without the correction `Δ`; used to measure
/// how much the correction matters.
pub fn assemble_z_uncorrected(m: &SymMatrix, alpha: f64) -> Result<Deg4Pseudomoments> {
    assemble(m, alpha, false)
}

/// Size of the set at position `idx` of the full ordering.
pub fn set_size(n: usize, idx: usize) -> usize {
    if idx == 0 {
        0
    } else if idx <= n {
        1
    } else {
        2
    }
}

/// Side of the full matrix, `1 + N + N(N-1)/2`.
pub fn full_side(n: usize) -> usize {
    1 + n + n * (n - 1) / 2
}

impl Deg4Pseudomoments {
    pub fn side(&self) -> usize {
        full_side(self.n)
    }

    /// Dense matrix over all sets of size at most 2.
    pub fn to_full(&self) -> SymMatrix {
        let n = self.n;
        let np = self.pairs.len();
        let mut f = SymMatrix::zeros(self.side());
        f.set(0, 0, self.z00);
        for i in 0..n {
            f.set(0, 1 + i, self.z01[i]);
            for j in 0..=i {
                f.set(1 + j, 1 + i, self.z11.get(j, i));
            }
        }
        for p in 0..np {
            f.set(0, 1 + n + p, self.z02[p]);
            for i in 0..n {
                f.set(1 + i, 1 + n + p, self.z12[(i, p)]);
            }
            for q in 0..=p {
                f.set(1 + n + q, 1 + n + p, self.z22.get(q, p));
            }
        }
        f
    }

    pub fn from_full(full: &SymMatrix, n: usize) -> Result<Self> {
        if n < 2 || full.n() != full_side(n) {
            return Err(Error::DimensionMismatch(format!(
                "side {} does not match N = {n}",
                full.n()
            )));
        }
        let pairs = PairIndex::new(n);
        let np = pairs.len();
        let o = 1 + n;
        Ok(Self {
            n,
            alpha: None,
            z00: full.get(0, 0),
            z01: (0..n).map(|i| full.get(0, 1 + i)).collect(),
            z02: (0..np).map(|p| full.get(0, o + p)).collect(),
            z11: SymMatrix::from_fn(n, |i, j| full.get(1 + i, 1 + j)),
            z12: Mat::from_fn(n, np, |i, p| full.get(1 + i, o + p)),
            z22: SymMatrix::from_fn(np, |p, q| full.get(o + p, o + q)),
            pairs,
            diag_roundoff: 0.0,
        })
    }

    /// True when every odd-parity block (`Z01`, `Z12`) vanishes, so `Z` is
    /// a direct sum of `Z11` and the minor over `{∅} ∪ pairs`.
    pub fn is_reduced(&self) -> bool {
        self.z01.iter().all(|&x| x == 0.0)
            && (0..self.pairs.len()).all(|p| (0..self.n).all(|i| self.z12[(i, p)] == 0.0))
    }

    /// Dense minor over `{∅} ∪ pairs`.
    pub fn even_minor(&self) -> SymMatrix {
        let np = self.pairs.len();
        SymMatrix::from_fn(1 + np, |a, b| match (a, b) {
            (0, 0) => self.z00,
            (0, q) => self.z02[q - 1],
            (p, q) => self.z22.get(p - 1, q - 1),
        })
    }
}

/// Sign-symmetrization: keeps entries with `|S △ T|` even and zeroes the
/// rest.
pub fn reduce_pseudomoments(full: &SymMatrix, n: usize) -> Result<SymMatrix> {
    if full.n() != full_side(n) {
        return Err(Error::DimensionMismatch(format!(
            "side {} does not match N = {n}",
            full.n()
        )));
    }
    Ok(SymMatrix::from_fn(full.n(), |a, b| {
        if (set_size(n, a) + set_size(n, b)).is_multiple_of(2) {
            full.get(a, b)
        } else {
            0.0
        }
    }))
}

#[cfg(test)]
mod tests;
