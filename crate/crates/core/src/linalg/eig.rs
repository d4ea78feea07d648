use faer::{Mat, MatRef, Side};
use serde::{Deserialize, Serialize};

use super::lanczos::{lanczos_extreme, Extreme, LanczosOptions};
use super::SymMatrix;
use crate::error::{Error, Result};

/// Largest side for which dense eigensolves are used by default.
pub const DENSE_LIMIT: usize = 8000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigMethod {
    Dense,
    Iterative,
    /// Dense up to [`DENSE_LIMIT`], iterative beyond.
    Auto,
}

impl EigMethod {
    pub fn resolve(self, n: usize) -> EigMethod {
        match self {
            EigMethod::Auto if n <= DENSE_LIMIT => EigMethod::Dense,
            EigMethod::Auto => EigMethod::Iterative,
            m => m,
        }
    }
}

impl std::str::FromStr for EigMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(EigMethod::Dense),
            "iterative" => Ok(EigMethod::Iterative),
            "auto" => Ok(EigMethod::Auto),
            other => Err(Error::Parse(format!("unknown eigen method '{other}'"))),
        }
    }
}

/// Spectral decomposition with eigenvalues in descending order. Column `k`
/// of `eigenvectors` belongs to `eigenvalues[k]`.
#[derive(Clone, Debug)]
pub struct EigResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat<f64>,
}

fn check_finite(a: &SymMatrix) -> Result<()> {
    let n = a.n();
    for j in 0..n {
        for i in 0..=j {
            if !a.get(i, j).is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite entry at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Full decomposition. Each eigenvector is flipped so that its first
/// coordinate with magnitude above 1e-12 is positive.
pub fn sym_eig(a: &SymMatrix) -> Result<EigResult> {
    check_finite(a)?;
    let n = a.n();
    let evd = a
        .as_ref()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NoConvergence(format!("dense eigensolver: {e:?}")))?;
    let u = evd.U();
    let s = evd.S();
    // faer returns ascending order
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Mat::<f64>::zeros(n, n);
    for k in 0..n {
        let src = n - 1 - k;
        eigenvalues.push(s[src]);
        let flip = (0..n)
            .map(|i| u[(i, src)])
            .find(|x| x.abs() > 1e-12)
            .map_or(false, |x| x < 0.0);
        let sign = if flip { -1.0 } else { 1.0 };
        for i in 0..n {
            eigenvectors[(i, k)] = sign * u[(i, src)];
        }
    }
    Ok(EigResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, descending. Uses the values-only dense path, which
/// skips eigenvector accumulation; results agree with [`sym_eig`] to
/// roundoff (about 1e-13 relative) rather than bit-for-bit.
pub fn sym_eigenvalues(a: &SymMatrix) -> Result<Vec<f64>> {
    check_finite(a)?;
    let mut vals = a
        .as_ref()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::NoConvergence(format!("dense eigensolver: {e:?}")))?;
    vals.reverse();
    Ok(vals)
}

/// Smallest eigenvalue. In dense mode this is the last entry of
/// [`sym_eigenvalues`]; iterative mode runs Lanczos to residual
/// `tol * max(1, ||A||)`.
pub fn min_eig(a: &SymMatrix, method: EigMethod, tol: f64) -> Result<f64> {
    match method.resolve(a.n()) {
        EigMethod::Iterative => {
            check_finite(a)?;
            let opts = LanczosOptions {
                tol,
                ..LanczosOptions::default()
            };
            lanczos_extreme(a, Extreme::Min, &opts).map(|r| r.value)
        }
        _ => Ok(*sym_eigenvalues(a)?.last().unwrap()),
    }
}

/// Largest absolute eigenvalue.
pub fn op_norm(a: &SymMatrix) -> Result<f64> {
    let v = sym_eigenvalues(a)?;
    Ok(v[0].abs().max(v[v.len() - 1].abs()))
}

/// Largest singular value of a rectangular matrix.
pub fn op_norm_rect(a: MatRef<'_, f64>) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let s = a
        .singular_values()
        .map_err(|e| Error::NoConvergence(format!("svd: {e:?}")))?;
    Ok(s.iter().cloned().fold(0.0, f64::max))
}
