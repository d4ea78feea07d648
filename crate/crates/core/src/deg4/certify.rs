use serde::{Deserialize, Serialize};

use super::operators::{MinorOperator, Z22Operator};
use super::{correction_delta, heuristic_x22, Deg4Pseudomoments};
use crate::error::{Error, Result};
use crate::linalg::{
    lanczos_extreme, min_eig, offdiag, sym_eigenvalues, EigMethod, Extreme, LanczosOptions, SymMatrix, SymOperator,
};

/// Residual allowed in the Schur reconstruction identity.
pub const SCHUR_IDENTITY_TOL: f64 = 1e-10;

/// Pieces of `Z22 - Z02 Z02ᵀ / Z00 = ½αI + (1-α) Z1a + Z2`, together with
/// the degree-2 minor `Z11`.
#[derive(Clone, Debug)]
pub struct SchurPieces {
    pub z1a: SymMatrix,
    pub z2: SymMatrix,
    pub minor11: SymMatrix,
    pub lambda_min_z1a: f64,
    pub lambda_min_z2: f64,
    pub lambda_min_minor11: f64,
    pub identity_residual: f64,
}

impl SchurPieces {
    /// Weyl lower bound on the smallest eigenvalue of the Schur complement.
    pub fn schur_lower_bound(&self, alpha: f64) -> f64 {
        0.5 * alpha + (1.0 - alpha) * self.lambda_min_z1a + self.lambda_min_z2
    }
}

/// Splits `Z` (assembled from `m` with this `alpha`) into its Schur pieces
/// and checks the reconstruction identity entrywise.
pub fn schur_split(z: &Deg4Pseudomoments, m: &SymMatrix, alpha: f64, method: EigMethod) -> Result<SchurPieces> {
    if z.n != m.n() {
        return Err(Error::DimensionMismatch(format!(
            "Z built for N = {}, M has N = {}",
            z.n,
            m.n()
        )));
    }
    let o = offdiag(m);
    let mut z1a = heuristic_x22(m)?;
    let np = o.len();
    for q in 0..np {
        for p in 0..=q {
            z1a.add_at(p, q, -(1.0 - alpha) * o[p] * o[q]);
        }
    }
    let mut z2 = SymMatrix::zeros(np);
    correction_delta(m)?.add_to(&z.pairs, &mut z2, 2.0 * (1.0 - alpha));
    z2.shift_diag(0.5 * alpha);

    let mut residual: f64 = 0.0;
    for q in 0..np {
        for p in 0..=q {
            let lhs = z.z22.get(p, q) - z.z02[p] * z.z02[q] / z.z00;
            let mut rhs = (1.0 - alpha) * z1a.get(p, q) + z2.get(p, q);
            if p == q {
                rhs += 0.5 * alpha;
            }
            residual = residual.max((lhs - rhs).abs());
        }
    }
    if !(residual <= SCHUR_IDENTITY_TOL) {
        return Err(Error::InconsistentInputs { residual });
    }
    let minor11 = z.z11.clone();
    Ok(SchurPieces {
        lambda_min_z1a: min_eig(&z1a, method, 1e-10)?,
        lambda_min_z2: min_eig(&z2, method, 1e-10)?,
        lambda_min_minor11: min_eig(&minor11, EigMethod::Dense, 1e-10)?,
        z1a,
        z2,
        minor11,
        identity_residual: residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertifyMethod {
    /// Smallest eigenvalue of `Z` itself.
    Full,
    /// Sufficient check through the Schur pieces.
    Split,
}

impl std::str::FromStr for CertifyMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(CertifyMethod::Full),
            "split" => Ok(CertifyMethod::Split),
            other => Err(Error::Parse(format!("unknown certify method '{other}'"))),
        }
    }
}

/// `lambda_min` is the smallest eigenvalue for [`CertifyMethod::Full`] and a
/// lower bound for [`CertifyMethod::Split`]. `threshold` is
/// `-tol * max(1, norm_estimate)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdCertificate {
    pub verdict: Verdict,
    pub method: CertifyMethod,
    pub lambda_min: f64,
    pub norm_estimate: f64,
    pub threshold: f64,
}

struct DenseBlock<'a>(&'a SymMatrix);

impl SymOperator for DenseBlock<'_> {
    fn dim(&self) -> usize {
        self.0.n()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.matvec(x, y)
    }
}

fn extremes_of(op: &dyn SymOperator, tol: f64) -> Result<(f64, f64)> {
    let opts = LanczosOptions {
        tol: tol.min(1e-10),
        ..LanczosOptions::default()
    };
    let lo = lanczos_extreme(op, Extreme::Min, &opts)?.value;
    let hi = lanczos_extreme(op, Extreme::Max, &opts)?.value;
    Ok((lo, hi))
}

fn spectrum_ends(a: &SymMatrix, method: EigMethod, tol: f64) -> Result<(f64, f64)> {
    match method.resolve(a.n()) {
        EigMethod::Iterative => extremes_of(&DenseBlock(a), tol),
        _ => {
            let v = sym_eigenvalues(a)?;
            Ok((v[v.len() - 1], v[0]))
        }
    }
}

fn verdict_from(lo: f64, hi: f64, tol: f64, method: CertifyMethod) -> PsdCertificate {
    let norm = lo.abs().max(hi.abs());
    let threshold = -tol * norm.max(1.0);
    PsdCertificate {
        verdict: if lo >= threshold { Verdict::Pass } else { Verdict::Fail },
        method,
        lambda_min: lo,
        norm_estimate: norm,
        threshold,
    }
}

/// PSD check of `Z` with relative tolerance `tol`.
pub fn certify_psd(z: &Deg4Pseudomoments, tol: f64, method: CertifyMethod, eig: EigMethod) -> Result<PsdCertificate> {
    match method {
        CertifyMethod::Full => {
            let (lo, hi) = if z.is_reduced() {
                let (lo11, hi11) = spectrum_ends(&z.z11, EigMethod::Dense, tol)?;
                let side = 1 + z.pairs.len();
                let (lo2, hi2) = match eig.resolve(side) {
                    EigMethod::Iterative => extremes_of(
                        &MinorOperator {
                            z00: z.z00,
                            z02: z.z02.clone(),
                            z22: &DenseBlock(&z.z22),
                        },
                        tol,
                    )?,
                    _ => spectrum_ends(&z.even_minor(), EigMethod::Dense, tol)?,
                };
                (lo11.min(lo2), hi11.max(hi2))
            } else {
                spectrum_ends(&z.to_full(), eig, tol)?
            };
            Ok(verdict_from(lo, hi, tol, method))
        }
        CertifyMethod::Split => {
            let alpha = match z.alpha {
                Some(a) if a < 1.0 => a,
                _ => {
                    return Err(Error::InvalidParameter(
                        "split certification needs a matrix assembled with alpha < 1".into(),
                    ))
                }
            };
            if !z.is_reduced() || z.z00 <= 0.0 {
                return Err(Error::InvalidParameter(
                    "split certification needs a reduced matrix with Z00 > 0".into(),
                ));
            }
            let m = SymMatrix::from_fn(z.n, |i, j| if i == j { 1.0 } else { z.z11.get(i, j) / (1.0 - alpha) });
            let pieces = schur_split(z, &m, alpha, eig)?;
            let (lo11, hi11) = spectrum_ends(&z.z11, EigMethod::Dense, tol)?;
            let bound = pieces.schur_lower_bound(alpha);
            let norm = lo11.abs().max(hi11.abs());
            let threshold = -tol * norm.max(1.0);
            let verdict = if lo11 < threshold {
                Verdict::Fail
            } else if bound >= threshold {
                Verdict::Pass
            } else {
                Verdict::Inconclusive
            };
            Ok(PsdCertificate {
                verdict,
                method,
                lambda_min: lo11.min(bound),
                norm_estimate: norm,
                threshold,
            })
        }
    }
}

/// Full PSD check of the matrix assembled from `m` and `alpha` without
/// forming any pair-indexed block; for sizes where dense storage is out of
/// reach.
pub fn certify_witness_matrix_free(m: &SymMatrix, alpha: f64, tol: f64) -> Result<PsdCertificate> {
    let mut z11 = m.clone();
    z11.scale(1.0 - alpha);
    for i in 0..m.n() {
        z11.set(i, i, 1.0);
    }
    let (lo11, hi11) = spectrum_ends(&z11, EigMethod::Dense, tol)?;
    let z22 = Z22Operator::new(m, correction_delta(m)?, alpha);
    let minor = MinorOperator {
        z00: 1.0,
        z02: offdiag(m).into_iter().map(|x| (1.0 - alpha) * x).collect(),
        z22: &z22,
    };
    let (lo2, hi2) = extremes_of(&minor, tol)?;
    Ok(verdict_from(lo11.min(lo2), hi11.max(hi2), tol, CertifyMethod::Full))
}
