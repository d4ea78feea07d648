use faer::{Mat, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{dot, norm2};
use crate::error::{Error, Result};

/// A symmetric linear map available only through matrix-vector products.
pub trait SymOperator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extreme {
    Min,
    Max,
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Stop when the Ritz residual is below `tol * max(1, ||A||)`.
    pub tol: f64,
    /// Krylov basis size per restart cycle (clamped to the dimension).
    pub max_basis: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_basis: 300,
            max_restarts: 40,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub value: f64,
    pub residual: f64,
    pub matvecs: usize,
    /// Largest absolute Ritz value seen, a lower bound on `||A||`.
    pub norm_estimate: f64,
}

fn projected_eig(hcols: &[Vec<f64>]) -> (Vec<f64>, Mat<f64>) {
    let k = hcols.len();
    let h = Mat::from_fn(k, k, |i, j| if i <= j { hcols[j][i] } else { hcols[i][j] });
    let evd = h
        .as_ref()
        .self_adjoint_eigen(Side::Lower)
        .expect("projected eigensolve");
    let vals = (0..k).map(|i| evd.S()[i]).collect();
    (vals, evd.U().to_owned())
}

fn combine(basis: &[Vec<f64>], y: &Mat<f64>, col: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (t, q) in basis.iter().enumerate() {
        let c = y[(t, col)];
        out.iter_mut().zip(q).for_each(|(o, qi)| *o += c * qi);
    }
    out
}

/// Extremal eigenvalue of `op` by thick-restart Lanczos with full
/// reorthogonalization. Convergence is declared on the true residual
/// `||A x - θ x||` of the Ritz pair, recomputed with one extra product.
pub fn lanczos_extreme(op: &dyn SymOperator, which: Extreme, opts: &LanczosOptions) -> Result<LanczosResult> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::InvalidParameter("operator of dimension 0".into()));
    }
    let m = opts.max_basis.clamp(1, n);
    let keep = (m / 2).clamp(1, m.saturating_sub(1).max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let s0 = norm2(&start);
    start.iter_mut().for_each(|x| *x /= s0);

    let mut basis: Vec<Vec<f64>> = vec![start];
    // hcols[j][i] = q_i · A q_j for i <= j
    let mut hcols: Vec<Vec<f64>> = Vec::new();
    let mut matvecs = 0usize;
    let mut norm_est: f64 = 0.0;
    let mut last = (f64::NAN, f64::INFINITY);
    let mut w = vec![0.0; n];
    let mut ax = vec![0.0; n];

    for _cycle in 0..=opts.max_restarts {
        let first = hcols.len();
        let mut b = 0.0;
        for j in first..m {
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            hcols.push((0..=j).map(|i| dot(&basis[i], &w)).collect());
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            b = norm2(&w);
            let k = j + 1;
            let scale = norm_est.max(hcols[j][j].abs()).max(f64::MIN_POSITIVE);
            let exhausted = k == n || b <= 1e-13 * scale;
            if k % 10 == 0 || k == m || exhausted {
                let (vals, vecs) = projected_eig(&hcols);
                norm_est = norm_est.max(vals[0].abs()).max(vals[k - 1].abs());
                let idx = match which {
                    Extreme::Min => 0,
                    Extreme::Max => k - 1,
                };
                let theta = vals[idx];
                let est = b * vecs[(k - 1, idx)].abs();
                let target = opts.tol * norm_est.max(1.0);
                if est <= target || exhausted {
                    let x = combine(&basis, &vecs, idx, n);
                    op.apply(&x, &mut ax);
                    matvecs += 1;
                    let res = ax
                        .iter()
                        .zip(&x)
                        .map(|(a, xi)| (a - theta * xi).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    last = (theta, res);
                    if res <= target || exhausted {
                        return Ok(LanczosResult {
                            value: theta,
                            residual: res,
                            matvecs,
                            norm_estimate: norm_est,
                        });
                    }
                } else {
                    last = (theta, est);
                }
            }
            if k < m {
                basis.push(w.iter().map(|x| x / b).collect());
            }
        }

        // thick restart: keep the Ritz vectors closest to the target end
        let (vals, vecs) = projected_eig(&hcols);
        let k = hcols.len();
        let chosen: Vec<usize> = match which {
            Extreme::Min => (0..keep).collect(),
            Extreme::Max => (k - keep..k).rev().collect(),
        };
        let mut new_basis: Vec<Vec<f64>> = chosen.iter().map(|&c| combine(&basis, &vecs, c, n)).collect();
        hcols = chosen
            .iter()
            .enumerate()
            .map(|(pos, &c)| {
                let mut col = vec![0.0; pos + 1];
                col[pos] = vals[c];
                col
            })
            .collect();
        new_basis.push(w.iter().map(|x| x / b).collect());
        basis = new_basis;
    }
    Err(Error::NoConvergence(format!(
        "lanczos: {} restarts exhausted, last value {} with residual {:e}",
        opts.max_restarts, last.0, last.1
    )))
}

/// Both ends of the spectrum, from two independent runs.
pub fn lanczos_extremes(op: &dyn SymOperator, opts: &LanczosOptions) -> Result<(f64, f64)> {
    let lo = lanczos_extreme(op, Extreme::Min, opts)?;
    let hi = lanczos_extreme(op, Extreme::Max, opts)?;
    Ok((lo.value, hi.value))
}
