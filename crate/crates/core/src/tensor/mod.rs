//! Gaussian symmetric tensors conditioned on linear constraints, and the
//! pseudomoment matrices they induce over a frame.
//!
//! Tensors in `Sym^k(R^r)` are stored by their entries at non-decreasing
//! index tuples. A tensor on `R^N` satisfying the subspace property is the
//! pullback `A_{i_1..i_k} = B(v_{i_1}, .., v_{i_k})` of some `B` in
//! `Sym^k(R^r)`, so all models here live on `Sym^k(R^r)`.

use std::collections::HashMap;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::deg4::heuristic_x22;
use crate::error::{Error, Result};
use crate::linalg::{sym_eig, sym_eigenvalues, PairIndex, SymMatrix};

/// Relative eigenvalue cutoff for every pseudo-inverse in this module.
pub const PINV_CUTOFF: f64 = 1e-10;
/// Largest tensor space the repeated-index projector will form densely.
pub const DIM_BUDGET: usize = 4000;
/// Largest `N^k` for which the full pseudomoment matrix is assembled.
pub const MOMENT_BUDGET: usize = 8000;

const INCONSISTENT_TOL: f64 = 1e-6;
const ORTHONORMAL_TOL: f64 = 1e-8;

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn factorial(k: usize) -> usize {
    (1..=k).product()
}

/// All non-decreasing `k`-tuples over `0..n`, in lexicographic order.
pub fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(k, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(k, &mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// `Sym^k(R^r)` with coordinates at the non-decreasing index tuples.
/// The weight of a tuple is the size of its orbit under permutations, so
/// `Σ_α w_α a_α b_α` is the Frobenius inner product of the full tensors.
#[derive(Clone, Debug)]
pub struct SymTensorSpace {
    r: usize,
    k: usize,
    tuples: Vec<Vec<usize>>,
    weights: Vec<f64>,
    stabilizers: Vec<f64>,
    lookup: HashMap<Vec<usize>, usize>,
    perms: Vec<Vec<usize>>,
}

impl SymTensorSpace {
    pub fn new(r: usize, k: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("tensor space needs r >= 1".into()));
        }
        let tuples = multisets(r, k);
        let kf = factorial(k) as f64;
        let stabilizers: Vec<f64> = tuples
            .iter()
            .map(|t| {
                let mut s = 1usize;
                let mut run = 1usize;
                for w in 1..t.len() {
                    if t[w] == t[w - 1] {
                        run += 1;
                        s *= run;
                    } else {
                        run = 1;
                    }
                }
                s as f64
            })
            .collect();
        let weights = stabilizers.iter().map(|s| kf / s).collect();
        let lookup = tuples.iter().enumerate().map(|(a, t)| (t.clone(), a)).collect();
        Ok(Self {
            r,
            k,
            tuples,
            weights,
            stabilizers,
            lookup,
            perms: permutations(k),
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `C(r + k - 1, k)`.
    pub fn dim(&self) -> usize {
        self.tuples.len()
    }

    pub fn tuple(&self, a: usize) -> &[usize] {
        &self.tuples[a]
    }

    pub fn weight(&self, a: usize) -> f64 {
        self.weights[a]
    }

    /// Coordinate of an arbitrary index tuple (order ignored).
    pub fn position(&self, idx: &[usize]) -> Option<usize> {
        let mut s = idx.to_vec();
        s.sort_unstable();
        self.lookup.get(&s).copied()
    }

    pub fn weighted_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.weights).map(|((x, y), w)| w * x * y).sum()
    }

    /// Full `r^k` array, row-major in the index tuple.
    pub fn to_full(&self, a: &[f64]) -> Vec<f64> {
        let total = self.r.pow(self.k as u32);
        let mut idx = vec![0usize; self.k];
        (0..total)
            .map(|mut flat| {
                for slot in idx.iter_mut().rev() {
                    *slot = flat % self.r;
                    flat /= self.r;
                }
                a[self.position(&idx).unwrap()]
            })
            .collect()
    }

    /// Row `c` with `c · a = B(u_1, .., u_k)` for the tensor `B` with
    /// coordinates `a`.
    pub fn functional(&self, us: &[&[f64]]) -> Vec<f64> {
        assert_eq!(us.len(), self.k);
        self.tuples
            .iter()
            .zip(&self.stabilizers)
            .map(|(t, s)| {
                let total: f64 = self
                    .perms
                    .iter()
                    .map(|p| p.iter().enumerate().map(|(l, &pl)| us[l][t[pl]]).product::<f64>())
                    .sum();
                total / s
            })
            .collect()
    }

    /// Coordinates of `u_1 ⊙ .. ⊙ u_k`, the symmetrization of `u_1 ⊗ .. ⊗ u_k`.
    pub fn symmetric_product(&self, us: &[&[f64]]) -> Vec<f64> {
        let mut c = self.functional(us);
        for (x, w) in c.iter_mut().zip(&self.weights) {
            *x /= w;
        }
        c
    }

    /// Coordinates in which the Frobenius inner product is the euclidean one.
    pub fn to_isometric(&self, a: &[f64]) -> Vec<f64> {
        a.iter().zip(&self.weights).map(|(x, w)| x * w.sqrt()).collect()
    }
}

/// Jointly gaussian tensor on a [`SymTensorSpace`], in raw coordinates.
#[derive(Clone, Debug)]
pub struct GaussianTensorModel {
    pub space: SymTensorSpace,
    pub mean: Vec<f64>,
    pub cov: SymMatrix,
    pub sigma_sq: f64,
}

impl GaussianTensorModel {
    /// `λ_min` of the covariance.
    pub fn cov_lambda_min(&self) -> Result<f64> {
        if self.space.dim() == 0 {
            return Ok(0.0);
        }
        Ok(*sym_eigenvalues(&self.cov)?.last().unwrap())
    }

    fn second_moment(&self) -> Mat<f64> {
        let d = self.space.dim();
        Mat::from_fn(d, d, |a, b| self.cov.get(a, b) + self.mean[a] * self.mean[b])
    }
}

/// Law of `A_i = (σ/k!) Σ_π G_{i_π(1)..i_π(k)}` with `G` standard gaussian.
/// Coordinates in different orbits are independent and
/// `Var(A_α) = σ² / w_α`.
pub fn base_tensor_law(r: usize, k: usize, sigma_sq: f64) -> Result<GaussianTensorModel> {
    if k == 0 {
        return Err(Error::InvalidParameter("tensor order must be >= 1".into()));
    }
    if !(sigma_sq.is_finite() && sigma_sq >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma_sq = {sigma_sq}")));
    }
    let space = SymTensorSpace::new(r, k)?;
    let var: Vec<f64> = (0..space.dim()).map(|a| sigma_sq / space.weight(a)).collect();
    Ok(GaussianTensorModel {
        mean: vec![0.0; space.dim()],
        cov: SymMatrix::from_diag(&var),
        sigma_sq,
        space,
    })
}

/// One draw from [`base_tensor_law`] by explicit symmetrization of a full
/// gaussian array.
pub fn sample_base_tensor<R: Rng + ?Sized>(space: &SymTensorSpace, sigma_sq: f64, rng: &mut R) -> Vec<f64> {
    let (r, k) = (space.r, space.k);
    let g: Vec<f64> = (0..r.pow(k as u32)).map(|_| rng.sample(StandardNormal)).collect();
    let scale = sigma_sq.sqrt() / factorial(k) as f64;
    space
        .tuples
        .iter()
        .map(|t| {
            let s: f64 = space
                .perms
                .iter()
                .map(|p| g[p.iter().fold(0, |acc, &pl| acc * r + t[pl])])
                .sum();
            scale * s
        })
        .collect()
}

fn pinv_sym(s: &SymMatrix) -> Result<Mat<f64>> {
    let m = s.n();
    let eig = sym_eig(s)?;
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut out = Mat::<f64>::zeros(m, m);
    if top == 0.0 {
        return Ok(out);
    }
    let u = eig.eigenvectors.as_ref();
    for (c, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > PINV_CUTOFF * top {
            for j in 0..m {
                let uj = u[(j, c)] / lam;
                for i in 0..m {
                    out[(i, j)] += u[(i, c)] * uj;
                }
            }
        }
    }
    Ok(out)
}

fn mat_vec(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

/// Condition on `C a = b`. The gain uses the pseudo-inverse of `C Σ Cᵀ`
/// and the covariance is updated in Joseph form
/// `(I - K C) Σ (I - K C)ᵀ`.
pub fn condition_gaussian(model: &GaussianTensorModel, c: MatRef<'_, f64>, b: &[f64]) -> Result<GaussianTensorModel> {
    let d = model.space.dim();
    let m = c.nrows();
    if c.ncols() != d || b.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "constraints {}x{} with {} values for a space of dimension {d}",
            c.nrows(),
            c.ncols(),
            b.len()
        )));
    }
    if m == 0 {
        return Ok(model.clone());
    }
    let sigma = model.cov.as_ref();
    let mut sct = Mat::<f64>::zeros(d, m);
    matmul(sct.as_mut(), Accum::Replace, sigma, c.transpose(), 1.0, Par::Seq);
    let mut s = Mat::<f64>::zeros(m, m);
    matmul(s.as_mut(), Accum::Replace, c, sct.as_ref(), 1.0, Par::Seq);
    let s_plus = pinv_sym(&SymMatrix::from_upper(s))?;
    let mut gain = Mat::<f64>::zeros(d, m);
    matmul(
        gain.as_mut(),
        Accum::Replace,
        sct.as_ref(),
        s_plus.as_ref(),
        1.0,
        Par::Seq,
    );

    let cm = mat_vec(c, &model.mean);
    let innov: Vec<f64> = b.iter().zip(&cm).map(|(x, y)| x - y).collect();
    let shift = mat_vec(gain.as_ref(), &innov);
    let mean: Vec<f64> = model.mean.iter().zip(&shift).map(|(x, y)| x + y).collect();

    let mut ikc = Mat::<f64>::identity(d, d);
    matmul(ikc.as_mut(), Accum::Add, gain.as_ref(), c, -1.0, Par::Seq);
    let mut tmp = Mat::<f64>::zeros(d, d);
    matmul(tmp.as_mut(), Accum::Replace, ikc.as_ref(), sigma, 1.0, Par::Seq);
    let mut cov = Mat::<f64>::zeros(d, d);
    matmul(
        cov.as_mut(),
        Accum::Replace,
        tmp.as_ref(),
        ikc.transpose(),
        1.0,
        Par::Seq,
    );
    let cov = SymMatrix::from_fn(d, |i, j| 0.5 * (cov[(i, j)] + cov[(j, i)]));

    let residual = mat_vec(c, &mean)
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let scale = b.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    if residual > INCONSISTENT_TOL * scale {
        return Err(Error::InconsistentConstraints { residual });
    }
    Ok(GaussianTensorModel {
        space: model.space.clone(),
        mean,
        cov,
        sigma_sq: model.sigma_sq,
    })
}

fn column(v: MatRef<'_, f64>, j: usize) -> Vec<f64> {
    (0..v.nrows()).map(|i| v[(i, j)]).collect()
}

/// Which frame vectors the tensor is pulled back along.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnScaling {
    /// The columns `v_i` themselves; the Gram matrix is `P`.
    #[default]
    Raw,
    /// `v_i / ‖v_i‖`; the Gram matrix is the unit-diagonal `M`, and every
    /// tensor entry is the raw one divided by the column norms it touches.
    Unit,
}

impl std::str::FromStr for ColumnScaling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Self::Raw),
            "unit" => Ok(Self::Unit),
            _ => Err(Error::Parse(format!("unknown column scaling '{s}'"))),
        }
    }
}

fn effective_frame(v: MatRef<'_, f64>, scaling: ColumnScaling) -> Result<Mat<f64>> {
    check_frame(v)?;
    match scaling {
        ColumnScaling::Raw => Ok(v.to_owned()),
        ColumnScaling::Unit => {
            let mut out = v.to_owned();
            for j in 0..v.ncols() {
                let nrm = crate::linalg::norm2(&column(v, j));
                if nrm * nrm < crate::witness::DIAG_TOL {
                    return Err(Error::DegenerateDiagonal {
                        index: j,
                        value: nrm * nrm,
                    });
                }
                for i in 0..v.nrows() {
                    out[(i, j)] /= nrm;
                }
            }
            Ok(out)
        }
    }
}

fn check_frame(v: MatRef<'_, f64>) -> Result<()> {
    let (r, n) = (v.nrows(), v.ncols());
    if r == 0 || n == 0 {
        return Err(Error::InvalidParameter("empty frame".into()));
    }
    let mut g = Mat::<f64>::zeros(r, r);
    matmul(g.as_mut(), Accum::Replace, v, v.transpose(), 1.0, Par::Seq);
    for j in 0..r {
        for i in 0..r {
            let want = if i == j { 1.0 } else { 0.0 };
            if (g[(i, j)] - want).abs() > ORTHONORMAL_TOL {
                return Err(Error::InvalidParameter(
                    "frame rows must be orthonormal (V Vᵀ = I)".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Conditioned tensor of order `k` over a frame, with the order `k - 2`
/// model it was made consistent with.
#[derive(Clone, Debug)]
pub struct Deg2kModel {
    pub k: usize,
    /// `r x N` frame the tensor is pulled back along, after scaling.
    pub v: Mat<f64>,
    pub scaling: ColumnScaling,
    pub model: GaussianTensorModel,
    pub lower: Option<Box<Deg2kModel>>,
    pub constraint_count: usize,
    pub constraint_residual: f64,
}

impl Deg2kModel {
    pub fn n(&self) -> usize {
        self.v.ncols()
    }

    pub fn r(&self) -> usize {
        self.v.nrows()
    }

    fn functional_at(&self, idx: &[usize]) -> Vec<f64> {
        let cols: Vec<Vec<f64>> = idx.iter().map(|&i| column(self.v.as_ref(), i)).collect();
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        self.model.space.functional(&refs)
    }

    /// `E[A_i]` for a frame index tuple `i` of length `k`.
    pub fn mean_entry(&self, idx: &[usize]) -> f64 {
        let f = self.functional_at(idx);
        f.iter().zip(&self.model.mean).map(|(x, y)| x * y).sum()
    }

    /// `E[A_i A_j]`.
    pub fn moment(&self, i: &[usize], j: &[usize]) -> f64 {
        let fi = self.functional_at(i);
        let fj = self.functional_at(j);
        let mi: f64 = fi.iter().zip(&self.model.mean).map(|(x, y)| x * y).sum();
        let mj: f64 = fj.iter().zip(&self.model.mean).map(|(x, y)| x * y).sum();
        let mut sj = vec![0.0; fj.len()];
        self.model.cov.matvec(&fj, &mut sj);
        mi * mj + fi.iter().zip(&sj).map(|(x, y)| x * y).sum::<f64>()
    }
}

/// Build the order-`k` tensor over the frame `v` (`k` in 1..=3); `v` must
/// have orthonormal rows.
/// `sigma_list[k - 1]` is `σ_k²` in the symmetrized-gaussian convention of
/// [`base_tensor_law`]; order 3 also uses the order 1 entry.
///
/// Consistency `A^(k)_{i∘(jj)} = A^(k-2)_i` is imposed against the
/// conditional mean of the lower model, not jointly.
pub fn build_deg2k_model(
    v: MatRef<'_, f64>,
    k: usize,
    sigma_list: &[f64],
    scaling: ColumnScaling,
) -> Result<Deg2kModel> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidParameter(format!("tensor order {k} not in 1..=3")));
    }
    if sigma_list.len() < k {
        return Err(Error::InvalidParameter(format!(
            "need {k} variance parameters, got {}",
            sigma_list.len()
        )));
    }
    let frame = effective_frame(v, scaling)?;
    let (r, n) = (v.nrows(), v.ncols());
    let base = base_tensor_law(r, k, sigma_list[k - 1])?;
    if k == 1 {
        return Ok(Deg2kModel {
            k,
            v: frame,
            scaling,
            model: base,
            lower: None,
            constraint_count: 0,
            constraint_residual: 0.0,
        });
    }
    let lower = if k >= 3 {
        Some(Box::new(build_deg2k_model(v, k - 2, sigma_list, scaling)?))
    } else {
        None
    };

    let cols: Vec<Vec<f64>> = (0..n).map(|j| column(frame.as_ref(), j)).collect();
    let heads = multisets(n, k - 2);
    let mut rows = Vec::with_capacity(heads.len() * n);
    let mut b = Vec::with_capacity(heads.len() * n);
    for h in &heads {
        let target = match &lower {
            Some(l) => l.mean_entry(h),
            None => 1.0,
        };
        for j in 0..n {
            let mut us: Vec<&[f64]> = h.iter().map(|&i| cols[i].as_slice()).collect();
            us.push(&cols[j]);
            us.push(&cols[j]);
            rows.push(base.space.functional(&us));
            b.push(target);
        }
    }
    let c = Mat::from_fn(rows.len(), base.space.dim(), |i, a| rows[i][a]);
    let model = condition_gaussian(&base, c.as_ref(), &b)?;
    let constraint_residual = mat_vec(c.as_ref(), &model.mean)
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(Deg2kModel {
        k,
        v: frame,
        scaling,
        model,
        lower,
        constraint_count: rows.len(),
        constraint_residual,
    })
}

/// `Z^{mult[k,k]}` over `[N]^k x [N]^k`, rows indexed by
/// `i_1 N^{k-1} + .. + i_k`. Entries depend only on the sorted tuples, so
/// within-tuple permutations are exact symmetries.
pub fn pseudomoment_from_model(dm: &Deg2kModel) -> Result<SymMatrix> {
    let (n, k) = (dm.n(), dm.k);
    let side = n.pow(k as u32);
    if side > MOMENT_BUDGET {
        return Err(Error::DimBudgetExceeded {
            dim: side,
            budget: MOMENT_BUDGET,
        });
    }
    let ms = multisets(n, k);
    let d = dm.model.space.dim();
    let rows: Vec<Vec<f64>> = ms.iter().map(|t| dm.functional_at(t)).collect();
    let l = Mat::from_fn(ms.len(), d, |i, a| rows[i][a]);
    let q = dm.model.second_moment();
    let mut lq = Mat::<f64>::zeros(ms.len(), d);
    matmul(lq.as_mut(), Accum::Replace, l.as_ref(), q.as_ref(), 1.0, Par::Seq);
    let mut e = Mat::<f64>::zeros(ms.len(), ms.len());
    matmul(e.as_mut(), Accum::Replace, lq.as_ref(), l.transpose(), 1.0, Par::Seq);
    let e = SymMatrix::from_upper(e);

    let lookup: HashMap<&[usize], usize> = ms.iter().enumerate().map(|(a, t)| (t.as_slice(), a)).collect();
    let id: Vec<usize> = (0..side)
        .map(|mut flat| {
            let mut t = vec![0usize; k];
            for slot in t.iter_mut().rev() {
                *slot = flat % n;
                flat /= n;
            }
            t.sort_unstable();
            lookup[t.as_slice()]
        })
        .collect();
    Ok(SymMatrix::from_fn(side, |s, t| e.get(id[s], id[t])))
}

/// Orthogonal projector onto the span of the repeated-index tensors
/// `v_i ⊙ v_i ⊙ u_1 ⊙ .. ⊙ u_{k-2}`, in isometric coordinates.
#[derive(Clone, Debug)]
pub struct RepeatedIndexProjector {
    pub projector: SymMatrix,
    pub rank: usize,
    pub spanning: usize,
}

pub fn repeated_index_projector(v: MatRef<'_, f64>, k: usize) -> Result<RepeatedIndexProjector> {
    if !(2..=3).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "repeated-index order {k} not in 2..=3"
        )));
    }
    let (r, n) = (v.nrows(), v.ncols());
    let dim = binomial(r + k - 1, k);
    if dim > DIM_BUDGET {
        return Err(Error::DimBudgetExceeded {
            dim,
            budget: DIM_BUDGET,
        });
    }
    let space = SymTensorSpace::new(r, k)?;
    let cols: Vec<Vec<f64>> = (0..n).map(|j| column(v, j)).collect();
    let basis: Vec<Vec<f64>> = (0..r)
        .map(|m| {
            let mut e = vec![0.0; r];
            e[m] = 1.0;
            e
        })
        .collect();
    let mut span = Vec::new();
    for ci in &cols {
        for tail in multisets(r, k - 2) {
            let mut us: Vec<&[f64]> = vec![ci, ci];
            us.extend(tail.iter().map(|&m| basis[m].as_slice()));
            span.push(space.to_isometric(&space.symmetric_product(&us)));
        }
    }
    let s = Mat::from_fn(dim, span.len(), |a, j| span[j][a]);
    let svd = s.thin_svd().map_err(|e| Error::NoConvergence(format!("svd: {e:?}")))?;
    let sv = svd.S();
    let count = dim.min(span.len());
    let top = (0..count).map(|i| sv[i]).fold(0.0, f64::max);
    let keep: Vec<usize> = (0..count).filter(|&i| sv[i] > PINV_CUTOFF * top).collect();
    let u = svd.U();
    let projector = SymMatrix::from_fn(dim, |a, b| keep.iter().map(|&c| u[(a, c)] * u[(b, c)]).sum());
    Ok(RepeatedIndexProjector {
        projector,
        rank: keep.len(),
        spanning: span.len(),
    })
}

fn distinct_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    multisets(n, k)
        .into_iter()
        .filter(|t| t.windows(2).all(|w| w[0] < w[1]))
        .collect()
}

/// `σ_k²` such that the diagonal pseudomoments at tuples of distinct indices
/// average to 1. The conditional mean does not depend on `σ_k²` and the
/// covariance scales linearly with it, so this is a single linear solve.
pub fn tune_sigma_sq(v: MatRef<'_, f64>, k: usize, sigma_list: &[f64], scaling: ColumnScaling) -> Result<f64> {
    if v.ncols() < k {
        return Err(Error::InvalidParameter(format!(
            "tuning needs N >= k, got N = {}",
            v.ncols()
        )));
    }
    let mut list = sigma_list.to_vec();
    list.resize(list.len().max(k), 1.0);
    list[k - 1] = 1.0;
    let dm = build_deg2k_model(v, k, &list, scaling)?;
    let tuples = distinct_tuples(dm.n(), k);
    let (mut mean_sq, mut var) = (0.0, 0.0);
    for t in &tuples {
        let mu = dm.mean_entry(t);
        mean_sq += mu * mu;
        var += dm.moment(t, t) - mu * mu;
    }
    let cnt = tuples.len() as f64;
    let (mean_sq, var) = (mean_sq / cnt, var / cnt);
    let s = (1.0 - mean_sq) / var;
    if !(var > 0.0 && s.is_finite() && s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "no positive variance normalizes order {k}: mean² {mean_sq}, variance {var}"
        )));
    }
    Ok(s)
}

/// Default variances for orders `1..=k`: `δ^{-1}` at order 1, `2δ^{-2}` at
/// order 2 (the GOE-scaled `δ^{-2}` in the symmetrized convention) and the
/// tuned value at order 3. `δ` is the mean squared column norm, so `r/N`
/// for raw columns and 1 for unit columns.
pub fn default_sigmas(v: MatRef<'_, f64>, k: usize, scaling: ColumnScaling) -> Result<Vec<f64>> {
    let delta = match scaling {
        ColumnScaling::Raw => v.nrows() as f64 / v.ncols() as f64,
        ColumnScaling::Unit => 1.0,
    };
    let mut out = vec![1.0 / delta, 2.0 / (delta * delta)];
    if k >= 3 {
        let s3 = tune_sigma_sq(v, 3, &out, scaling)?;
        out.push(s3);
    }
    out.truncate(k.max(1));
    Ok(out)
}

/// Deviation of the order-2 moments at `i ≠ j`, `k ≠ l` from the
/// closed-form degree-4 heuristic built from the normalized Gram matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step1Gap {
    pub max: f64,
    pub rms: f64,
}

/// With raw columns of a non-tight frame the moments carry the spread of
/// `P_ii`; unit columns compare like with like.
pub fn step1_deviation(dm: &Deg2kModel, z: &SymMatrix) -> Result<Step1Gap> {
    if dm.k != 2 {
        return Err(Error::InvalidParameter("step-1 comparison needs order 2".into()));
    }
    let n = dm.n();
    let p = crate::witness::gram_of_rows(dm.v.as_ref());
    let d: Vec<f64> = p.diag();
    let m = SymMatrix::from_fn(n, |i, j| {
        if i == j {
            1.0
        } else {
            p.get(i, j) / (d[i] * d[j]).sqrt()
        }
    });
    let x22 = heuristic_x22(&m)?;
    let pairs = PairIndex::new(n);
    let (mut max, mut sum_sq, mut count) = (0.0f64, 0.0, 0usize);
    for (a, (i, j)) in pairs.iter().enumerate() {
        for (b, (k, l)) in pairs.iter().enumerate() {
            let dev = (z.get(i * n + j, k * n + l) - x22.get(a, b)).abs();
            max = max.max(dev);
            sum_sq += dev * dev;
            count += 1;
        }
    }
    let rms = if count == 0 {
        0.0
    } else {
        (sum_sq / count as f64).sqrt()
    };
    Ok(Step1Gap { max, rms })
}

/// Measurements of one conditioned model; constraint residuals are
/// reported, not gated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorSummary {
    pub k: usize,
    pub scaling: ColumnScaling,
    pub n: usize,
    pub r: usize,
    pub dim: usize,
    pub sigma_sq: f64,
    pub constraint_count: usize,
    pub constraint_residual: f64,
    pub cov_lambda_min: f64,
    pub z_lambda_min: f64,
    /// Largest `|Z_{tt} - 1|` over tuples of distinct indices.
    pub diag_max_dev: f64,
    pub step1_gap: Option<Step1Gap>,
    pub repeated_rank: Option<usize>,
}

pub fn summarize(dm: &Deg2kModel) -> Result<TensorSummary> {
    let z = pseudomoment_from_model(dm)?;
    let z_lambda_min = *sym_eigenvalues(&z)?.last().unwrap();
    let diag_max_dev = distinct_tuples(dm.n(), dm.k)
        .iter()
        .map(|t| (dm.moment(t, t) - 1.0).abs())
        .fold(0.0, f64::max);
    let step1_gap = if dm.k == 2 {
        Some(step1_deviation(dm, &z)?)
    } else {
        None
    };
    let repeated_rank = if dm.k >= 2 {
        Some(repeated_index_projector(dm.v.as_ref(), dm.k)?.rank)
    } else {
        None
    };
    Ok(TensorSummary {
        k: dm.k,
        scaling: dm.scaling,
        n: dm.n(),
        r: dm.r(),
        dim: dm.model.space.dim(),
        sigma_sq: dm.model.sigma_sq,
        constraint_count: dm.constraint_count,
        constraint_residual: dm.constraint_residual,
        cov_lambda_min: dm.model.cov_lambda_min()?,
        z_lambda_min,
        diag_max_dev,
        step1_gap,
        repeated_rank,
    })
}
