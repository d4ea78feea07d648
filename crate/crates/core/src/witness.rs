//! The degree-2 witness built from the top eigenspace of a GOE matrix, its
//! nudged variant, objective values and degree-2 feasibility checks.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{min_eig, sym_eig, sym_eigenvalues, EigMethod, SymMatrix};

/// Spectral gap below which the top-`r` projector is treated as undefined.
pub const GAP_TOL: f64 = 1e-10;
/// Smallest admissible diagonal entry of the projector.
pub const DIAG_TOL: f64 = 1e-12;

/// Everything produced by one witness construction. `v` has the unit
/// eigenvectors as rows, `vhat` has the normalized columns of `v`.
#[derive(Clone, Debug)]
pub struct WitnessBundle {
    pub n: usize,
    pub r: usize,
    pub delta: f64,
    pub v: Mat<f64>,
    pub p: SymMatrix,
    pub d: Vec<f64>,
    pub m: SymMatrix,
    pub vhat: Mat<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessEntryStats {
    pub max_diag_dev_m: f64,
    pub max_offdiag_m: f64,
    pub max_diag_dev_p: f64,
    pub max_offdiag_p: f64,
}

/// `VᵀV` for a matrix with orthonormal rows, symmetrized from the upper
/// triangle.
pub fn gram_of_rows(v: MatRef<'_, f64>) -> SymMatrix {
    let n = v.ncols();
    let mut g = Mat::<f64>::zeros(n, n);
    matmul(g.as_mut(), Accum::Replace, v.transpose(), v, 1.0, Par::Seq);
    SymMatrix::from_upper(g)
}

/// Top-`r` eigenvectors of `w` (as rows of `V`) and the projector `VᵀV`.
pub fn top_eigenprojector(w: &SymMatrix, r: usize) -> Result<(Mat<f64>, SymMatrix)> {
    let n = w.n();
    if r == 0 || r > n {
        return Err(Error::InvalidParameter(format!(
            "projector rank must satisfy 1 <= r <= N, got r={r}, N={n}"
        )));
    }
    let e = sym_eig(w)?;
    if r < n {
        let gap = e.eigenvalues[r - 1] - e.eigenvalues[r];
        if gap.abs() <= GAP_TOL {
            return Err(Error::DegenerateGap { r, gap });
        }
    }
    let v = Mat::from_fn(r, n, |k, i| e.eigenvectors[(i, k)]);
    let p = gram_of_rows(v.as_ref());
    Ok((v, p))
}

/// `r = round(delta * N)`.
pub fn rank_for(n: usize, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let r = (delta * n as f64).round() as usize;
    if r == 0 {
        return Err(Error::InvalidParameter(format!(
            "round(delta * N) = 0 for delta={delta}, N={n}"
        )));
    }
    Ok(r)
}

impl WitnessBundle {
    /// Builds the bundle from an `r x N` matrix with orthonormal rows.
    pub fn from_frame(v: Mat<f64>, delta: f64) -> Result<Self> {
        let (r, n) = (v.nrows(), v.ncols());
        let p = gram_of_rows(v.as_ref());
        let d = p.diag();
        if let Some((index, &value)) = d.iter().enumerate().find(|(_, &x)| !(x > DIAG_TOL)) {
            return Err(Error::DegenerateDiagonal { index, value });
        }
        let s: Vec<f64> = d.iter().map(|x| 1.0 / x.sqrt()).collect();
        let m = SymMatrix::from_fn(n, |i, j| if i == j { 1.0 } else { s[i] * p.get(i, j) * s[j] });
        let vhat = Mat::from_fn(r, n, |k, i| v[(k, i)] * s[i]);
        Ok(Self {
            n,
            r,
            delta,
            v,
            p,
            d,
            m,
            vhat,
        })
    }

    pub fn entry_stats(&self) -> WitnessEntryStats {
        let mut st = WitnessEntryStats {
            max_diag_dev_m: 0.0,
            max_offdiag_m: 0.0,
            max_diag_dev_p: 0.0,
            max_offdiag_p: 0.0,
        };
        for j in 0..self.n {
            st.max_diag_dev_m = st.max_diag_dev_m.max((self.m.get(j, j) - 1.0).abs());
            st.max_diag_dev_p = st.max_diag_dev_p.max((self.p.get(j, j) - self.delta).abs());
            for i in 0..j {
                st.max_offdiag_m = st.max_offdiag_m.max(self.m.get(i, j).abs());
                st.max_offdiag_p = st.max_offdiag_p.max(self.p.get(i, j).abs());
            }
        }
        st
    }
}

/// The witness `D^{-1/2} P D^{-1/2}` for the top `round(delta N)`
/// eigenvectors of `w`.
pub fn montanari_sen_witness(w: &SymMatrix, delta: f64) -> Result<WitnessBundle> {
    let r = rank_for(w.n(), delta)?;
    let (v, _) = top_eigenprojector(w, r)?;
    WitnessBundle::from_frame(v, delta)
}

/// `(1 - alpha) M + alpha I`. Accepts the closed interval so that both
/// endpoints can be used as sanity checks.
pub fn nudged_witness(m: &SymMatrix, alpha: f64) -> Result<SymMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    Ok(SymMatrix::from_fn(m.n(), |i, j| {
        let base = (1.0 - alpha) * m.get(i, j);
        if i == j {
            base + alpha
        } else {
            base
        }
    }))
}

/// `<W, M> / N`.
pub fn objective_value(m: &SymMatrix, w: &SymMatrix) -> Result<f64> {
    if m.n() != w.n() {
        return Err(Error::DimensionMismatch(format!(
            "M is {0}x{0}, W is {1}x{1}",
            m.n(),
            w.n()
        )));
    }
    Ok(m.frobenius_inner(w) / m.n() as f64)
}

/// `λ_max(W)`.
pub fn spectral_certificate(w: &SymMatrix) -> Result<f64> {
    Ok(sym_eigenvalues(w)?[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Degree2Verdict {
    pub pass: bool,
    pub max_diag_dev: f64,
    pub lambda_min: f64,
}

/// Unit diagonal within `tol` and `λ_min >= -tol`.
pub fn check_degree2_membership(m: &SymMatrix, tol: f64) -> Result<Degree2Verdict> {
    let max_diag_dev = m.diag().iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
    let lambda_min = min_eig(m, EigMethod::Dense, tol)?;
    Ok(Degree2Verdict {
        pass: max_diag_dev <= tol && lambda_min >= -tol,
        max_diag_dev,
        lambda_min,
    })
}
