//! Measurable versions of the quantities that control positivity of the
//! degree-4 matrix: isovec frames of the witness vectors, the cross term
//! `T1`, the Gram term `T2`, the reduced matrix `Z̃1a`, Gershgorin statistics
//! for `Δ`, and sweeps of all of them over `N`.
//!
//! Frames use `δ_eff = r / N`, so that `Σ_i δ_eff⁻¹ v_i v_iᵀ = (N/r) I_r`
//! holds exactly.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deg4::{correction_delta, heuristic_x22, SparseDelta, Z1aOperator};
use crate::ensembles::{sample_goe, sample_haar_stiefel, sample_iid_unit_vectors, RngStream};
use crate::error::{Error, Result};
use crate::linalg::{
    lanczos_extreme, min_eig, offdiag, op_norm, EigMethod, Extreme, LanczosOptions, SymMatrix, SymOperator,
};
use crate::witness::{montanari_sen_witness, objective_value, WitnessBundle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameMode {
    /// `isovec(δ⁻¹ v_i v_iᵀ - I/r)`
    Orth,
    /// `isovec((N/r) v_i v_iᵀ - (1 - √δ)/r I)`
    Orth0,
    /// `isovec(v̂_i v̂_iᵀ - I/r)`
    Norm,
}

/// `r(r+1)/2 x N` matrix with one isovec column per witness vector.
#[derive(Clone, Debug)]
pub struct IsovecFrame {
    pub mode: FrameMode,
    pub delta_eff: f64,
    pub columns: Mat<f64>,
}

/// Writes `isovec(c * u uᵀ - d * I)` into column `col` of `out`.
fn isovec_rank_one_into(out: &mut Mat<f64>, col: usize, u: &[f64], c: f64, d: f64) {
    let r = u.len();
    let s = std::f64::consts::SQRT_2;
    for k in 0..r {
        out[(k, col)] = c * u[k] * u[k] - d;
    }
    let mut pos = r;
    for k in 0..r {
        for l in (k + 1)..r {
            out[(pos, col)] = s * c * u[k] * u[l];
            pos += 1;
        }
    }
}

fn column(m: MatRef<'_, f64>, j: usize) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

/// `isovec(I_r)`.
pub fn ones_diag(r: usize) -> Vec<f64> {
    let mut v = vec![0.0; r * (r + 1) / 2];
    v[..r].fill(1.0);
    v
}

pub fn build_isovec_frame(bundle: &WitnessBundle, mode: FrameMode) -> IsovecFrame {
    let (r, n) = (bundle.r, bundle.n);
    let de = r as f64 / n as f64;
    let rf = r as f64;
    let mut columns = Mat::<f64>::zeros(r * (r + 1) / 2, n);
    for i in 0..n {
        match mode {
            FrameMode::Orth => {
                let v = column(bundle.v.as_ref(), i);
                isovec_rank_one_into(&mut columns, i, &v, 1.0 / de, 1.0 / rf);
            }
            FrameMode::Orth0 => {
                let v = column(bundle.v.as_ref(), i);
                isovec_rank_one_into(&mut columns, i, &v, n as f64 / rf, (1.0 - de.sqrt()) / rf);
            }
            FrameMode::Norm => {
                let v = column(bundle.vhat.as_ref(), i);
                isovec_rank_one_into(&mut columns, i, &v, 1.0, 1.0 / rf);
            }
        }
    }
    IsovecFrame {
        mode,
        delta_eff: de,
        columns,
    }
}

impl IsovecFrame {
    /// `AᵀA`, the `N x N` Gram matrix of the columns.
    pub fn gram(&self) -> SymMatrix {
        let n = self.columns.ncols();
        let mut g = Mat::<f64>::zeros(n, n);
        let a = self.columns.as_ref();
        matmul(g.as_mut(), Accum::Replace, a.transpose(), a, 1.0, Par::Seq);
        SymMatrix::from_upper(g)
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let a = &self.columns;
        let mut out = vec![0.0; a.nrows()];
        for (j, &xj) in x.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += a[(i, j)] * xj;
            }
        }
        out
    }
}

/// `||AᵀA - (I - 11ᵀ/N)||_op` for the orth frame.
pub fn gram_distance_to_projector(frame: &IsovecFrame) -> Result<f64> {
    if frame.mode != FrameMode::Orth {
        return Err(Error::InvalidParameter(
            "gram distance is defined for the orth frame".into(),
        ));
    }
    let mut g = frame.gram();
    let n = g.n();
    let inv = 1.0 / n as f64;
    for j in 0..n {
        for i in 0..=j {
            let p = if i == j { 1.0 - inv } else { -inv };
            g.add_at(i, j, -p);
        }
    }
    op_norm(&g)
}

/// `||A_orth - A_norm||_op`.
pub fn frame_distance(orth: &IsovecFrame, norm: &IsovecFrame) -> Result<f64> {
    let d = Mat::from_fn(orth.columns.nrows(), orth.columns.ncols(), |i, j| {
        orth.columns[(i, j)] - norm.columns[(i, j)]
    });
    crate::linalg::op_norm_rect(d.as_ref())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct T1Stats {
    /// `||Σ v̂_i v̂_iᵀ - (N/r) I||_F²`
    pub frob_sq: f64,
    /// `||D⁻¹ - δ⁻¹ I||_F²`, an upper bound on `frob_sq`.
    pub frob_sq_bound: f64,
    pub t1_opnorm: f64,
}

/// `s = isovec(Σ_i v̂_i v̂_iᵀ - (N/r) I_r)`.
fn centered_sum(bundle: &WitnessBundle) -> Vec<f64> {
    let (r, n) = (bundle.r, bundle.n);
    let vh = bundle.vhat.as_ref();
    let mut s = SymMatrix::zeros(r);
    let mut g = Mat::<f64>::zeros(r, r);
    matmul(g.as_mut(), Accum::Replace, vh, vh.transpose(), 1.0, Par::Seq);
    let c = n as f64 / r as f64;
    for j in 0..r {
        for i in 0..=j {
            s.set(i, j, g[(i, j)] - if i == j { c } else { 0.0 });
        }
    }
    crate::linalg::isovec(&s)
}

/// Frobenius statistics of the centered frame sum and `||T1||_op`, where
/// `T1 = (2/r)(s 1ᵀ + 1 sᵀ)` has eigenvalues `(2/r)(<s,1> ± ||s|| ||1||)`
/// on its range and zero elsewhere.
pub fn t1_statistics(bundle: &WitnessBundle) -> T1Stats {
    let s = centered_sum(bundle);
    let r = bundle.r as f64;
    let de = r / bundle.n as f64;
    let frob_sq: f64 = s.iter().map(|x| x * x).sum();
    let frob_sq_bound = bundle.d.iter().map(|d| (1.0 / d - 1.0 / de).powi(2)).sum();
    let one = ones_diag(bundle.r);
    let sd: f64 = s.iter().zip(&one).map(|(a, b)| a * b).sum();
    let t1_opnorm = (2.0 / r) * (sd.abs() + frob_sq.sqrt() * r.sqrt());
    T1Stats {
        frob_sq,
        frob_sq_bound,
        t1_opnorm,
    }
}

/// Dense `T1`, for checks.
pub fn t1_matrix(bundle: &WitnessBundle) -> SymMatrix {
    let s = centered_sum(bundle);
    let one = ones_diag(bundle.r);
    let c = 2.0 / bundle.r as f64;
    SymMatrix::from_fn(s.len(), |i, j| c * (s[i] * one[j] + one[i] * s[j]))
}

/// `||T2||_op = ||R||_op` with `R = AᵀA` for the norm frame.
pub fn t2_norm(frame: &IsovecFrame) -> Result<f64> {
    if frame.mode != FrameMode::Norm {
        return Err(Error::InvalidParameter("T2 is defined for the norm frame".into()));
    }
    op_norm(&frame.gram())
}

/// `α 1 1ᵀ + 2 I - 2 Σ_i isovec(v̂_i v̂_iᵀ) isovec(v̂_i v̂_iᵀ)ᵀ`, applied
/// without forming it.
pub struct ZtildeOperator {
    u: Mat<f64>,
    one: Vec<f64>,
    alpha: f64,
}

impl ZtildeOperator {
    pub fn new(bundle: &WitnessBundle, alpha: f64) -> Self {
        let (r, n) = (bundle.r, bundle.n);
        let mut u = Mat::<f64>::zeros(r * (r + 1) / 2, n);
        for i in 0..n {
            let v = column(bundle.vhat.as_ref(), i);
            isovec_rank_one_into(&mut u, i, &v, 1.0, 0.0);
        }
        Self {
            u,
            one: ones_diag(r),
            alpha,
        }
    }

    pub fn to_dense(&self) -> SymMatrix {
        let d = self.u.nrows();
        let mut g = Mat::<f64>::zeros(d, d);
        let u = self.u.as_ref();
        matmul(g.as_mut(), Accum::Replace, u, u.transpose(), -2.0, Par::Seq);
        let mut out = SymMatrix::from_upper(g);
        for j in 0..d {
            for i in 0..=j {
                out.add_at(i, j, self.alpha * self.one[i] * self.one[j]);
            }
        }
        out.shift_diag(2.0);
        out
    }
}

impl SymOperator for ZtildeOperator {
    fn dim(&self) -> usize {
        self.u.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (d, n) = (self.u.nrows(), self.u.ncols());
        let mut t = vec![0.0; n];
        for (j, tj) in t.iter_mut().enumerate() {
            *tj = (0..d).map(|i| self.u[(i, j)] * x[i]).sum();
        }
        let c = self.alpha * crate::linalg::dot(&self.one, x);
        for i in 0..d {
            let mut s = 0.0;
            for (j, tj) in t.iter().enumerate() {
                s += self.u[(i, j)] * tj;
            }
            y[i] = c * self.one[i] + 2.0 * x[i] - 2.0 * s;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZtildeReport {
    pub lambda_min_ztilde: f64,
    pub min_d: f64,
    /// `min(0, λ_min(Z̃1a) / (2 min_i D_ii²))`, a lower bound on `λ_min(Z1a)`.
    pub implied_bound: f64,
    /// `λ_min(Z1a)` computed directly, when requested.
    pub direct: Option<f64>,
}

fn lanczos_min(op: &dyn SymOperator) -> Result<f64> {
    lanczos_extreme(op, Extreme::Min, &LanczosOptions::default()).map(|r| r.value)
}

/// Smallest eigenvalue of `Z1a = X22 - (1-α) offdiag(M) offdiag(M)ᵀ`.
pub fn z1a_min_eig(m: &SymMatrix, alpha: f64, method: EigMethod) -> Result<f64> {
    let side = m.n() * (m.n() - 1) / 2;
    match method.resolve(side) {
        EigMethod::Iterative => lanczos_min(&Z1aOperator::new(m, alpha)),
        _ => {
            let mut z1a = heuristic_x22(m)?;
            let o = offdiag(m);
            for q in 0..o.len() {
                for p in 0..=q {
                    z1a.add_at(p, q, -(1.0 - alpha) * o[p] * o[q]);
                }
            }
            min_eig(&z1a, EigMethod::Dense, 1e-10)
        }
    }
}

/// `λ_min(Z̃1a)` and the lower bound it implies for `λ_min(Z1a)`.
pub fn ztilde1a_min_eig(bundle: &WitnessBundle, alpha: f64, with_direct: Option<EigMethod>) -> Result<ZtildeReport> {
    let op = ZtildeOperator::new(bundle, alpha);
    let lam = if op.dim() <= crate::linalg::DENSE_LIMIT {
        min_eig(&op.to_dense(), EigMethod::Dense, 1e-10)?
    } else {
        lanczos_min(&op)?
    };
    let min_d = bundle.d.iter().cloned().fold(f64::INFINITY, f64::min);
    let implied_bound = (lam / (2.0 * min_d * min_d)).min(0.0);
    let direct = match with_direct {
        Some(method) => Some(z1a_min_eig(&bundle.m, alpha, method)?),
        None => None,
    };
    Ok(ZtildeReport {
        lambda_min_ztilde: lam,
        min_d,
        implied_bound,
        direct,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GershgorinStats {
    pub diag_max: f64,
    pub radius_max: f64,
    pub opnorm: f64,
}

/// Gershgorin statistics of `Δ` and its operator norm (iterative).
pub fn delta_gershgorin(delta: &SparseDelta) -> Result<GershgorinStats> {
    let (diag_max, radius_max) = delta.gershgorin();
    if diag_max == 0.0 && radius_max == 0.0 {
        return Ok(GershgorinStats {
            diag_max,
            radius_max,
            opnorm: 0.0,
        });
    }
    let opts = LanczosOptions::default();
    let lo = lanczos_extreme(delta, Extreme::Min, &opts)?.value;
    let hi = lanczos_extreme(delta, Extreme::Max, &opts)?.value;
    Ok(GershgorinStats {
        diag_max,
        radius_max,
        opnorm: lo.abs().max(hi.abs()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IidComparison {
    pub r: usize,
    pub n: usize,
    pub trials: usize,
    pub haar_mean: f64,
    pub iid_mean: f64,
    /// `iid_mean / haar_mean`
    pub ratio: f64,
    /// `N (1 - 1/r)`, the exact iid expectation.
    pub iid_expected: f64,
}

/// `||Σ_i u_i u_iᵀ - (N/r) I||_F²` for the columns of an `r x N` matrix.
pub fn centered_frame_frob_sq(u: MatRef<'_, f64>) -> f64 {
    let (r, n) = (u.nrows(), u.ncols());
    let mut g = Mat::<f64>::zeros(r, r);
    matmul(g.as_mut(), Accum::Replace, u, u.transpose(), 1.0, Par::Seq);
    let c = n as f64 / r as f64;
    let mut s = 0.0;
    for j in 0..r {
        for i in 0..r {
            let v = g[(i, j)] - if i == j { c } else { 0.0 };
            s += v * v;
        }
    }
    s
}

/// Normalized columns of a Haar frame versus iid uniform unit vectors.
pub fn iid_comparison(r: usize, n: usize, trials: usize, stream: RngStream) -> Result<IidComparison> {
    if r == 0 || r >= n {
        return Err(Error::InvalidParameter(format!(
            "iid comparison needs 1 <= r < N, got r={r}, N={n}"
        )));
    }
    let mut rng = stream.rng();
    let (mut haar, mut iid) = (0.0, 0.0);
    for _ in 0..trials {
        let v = sample_haar_stiefel(n, r, &mut rng)?;
        let vhat = Mat::from_fn(r, n, |k, i| {
            let s: f64 = (0..r).map(|t| v[(t, i)] * v[(t, i)]).sum::<f64>().sqrt();
            v[(k, i)] / s
        });
        haar += centered_frame_frob_sq(vhat.as_ref());
        let u = sample_iid_unit_vectors(r, n, &mut rng)?;
        iid += centered_frame_frob_sq(u.as_ref());
    }
    let t = trials.max(1) as f64;
    let (haar_mean, iid_mean) = (haar / t, iid / t);
    Ok(IidComparison {
        r,
        n,
        trials,
        haar_mean,
        iid_mean,
        ratio: iid_mean / haar_mean,
        iid_expected: n as f64 * (1.0 - 1.0 / r as f64),
    })
}

/// Per-trial scalars. Fields that could not be computed are NaN and
/// `error` says why.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub lambda_min_z1a: f64,
    pub lambda_min_ztilde1a: f64,
    pub norm_t1: f64,
    pub norm_t2: f64,
    pub gram_dist: f64,
    pub norm_dist: f64,
    pub delta_op_norm: f64,
    pub delta_diag_max: f64,
    pub delta_gershgorin_radius: f64,
    pub max_offdiag_m: f64,
    pub objective: f64,
    pub error: String,
}

impl DiagnosticsReport {
    fn failed(msg: String) -> Self {
        Self {
            lambda_min_z1a: f64::NAN,
            lambda_min_ztilde1a: f64::NAN,
            norm_t1: f64::NAN,
            norm_t2: f64::NAN,
            gram_dist: f64::NAN,
            norm_dist: f64::NAN,
            delta_op_norm: f64::NAN,
            delta_diag_max: f64::NAN,
            delta_gershgorin_radius: f64::NAN,
            max_offdiag_m: f64::NAN,
            objective: f64::NAN,
            error: msg,
        }
    }

    /// `|min(0, λ_min(Z1a))|`
    pub fn z1a_negativity(&self) -> f64 {
        (-self.lambda_min_z1a).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsOptions {
    /// Solver for `λ_min(Z1a)`; `None` skips it.
    pub z1a_method: Option<EigMethod>,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self {
            z1a_method: Some(EigMethod::Auto),
        }
    }
}

/// All diagnostics for one already-built witness.
pub fn diagnose_bundle(
    bundle: &WitnessBundle,
    w: &SymMatrix,
    alpha: f64,
    opts: &DiagnosticsOptions,
) -> Result<DiagnosticsReport> {
    let orth = build_isovec_frame(bundle, FrameMode::Orth);
    let norm = build_isovec_frame(bundle, FrameMode::Norm);
    let delta = correction_delta(&bundle.m)?;
    let gs = delta_gershgorin(&delta)?;
    let zt = ztilde1a_min_eig(bundle, alpha, None)?;
    let lambda_min_z1a = match opts.z1a_method {
        Some(method) => z1a_min_eig(&bundle.m, alpha, method)?,
        None => f64::NAN,
    };
    Ok(DiagnosticsReport {
        lambda_min_z1a,
        lambda_min_ztilde1a: zt.lambda_min_ztilde,
        norm_t1: t1_statistics(bundle).t1_opnorm,
        norm_t2: t2_norm(&norm)?,
        gram_dist: gram_distance_to_projector(&orth)?,
        norm_dist: frame_distance(&orth, &norm)?,
        delta_op_norm: gs.opnorm,
        delta_diag_max: gs.diag_max,
        delta_gershgorin_radius: gs.radius_max,
        max_offdiag_m: bundle.entry_stats().max_offdiag_m,
        objective: objective_value(&bundle.m, w)?,
        error: String::new(),
    })
}

/// Samples `W` from `stream` and runs [`diagnose_bundle`]. Errors are
/// recorded in the report instead of propagated.
pub fn diagnose_trial(
    n: usize,
    delta: f64,
    alpha: f64,
    stream: RngStream,
    opts: &DiagnosticsOptions,
) -> DiagnosticsReport {
    let w = sample_goe(n, &mut stream.rng());
    let run = || -> Result<DiagnosticsReport> {
        let bundle = montanari_sen_witness(&w, delta)?;
        diagnose_bundle(&bundle, &w, alpha, opts)
    };
    run().unwrap_or_else(|e| DiagnosticsReport::failed(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub ns: Vec<usize>,
    pub deltas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub trials: usize,
}

impl SweepGrid {
    /// Cells in `(delta, alpha, N)` order.
    pub fn cells(&self) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for &d in &self.deltas {
            for &a in &self.alphas {
                for &n in &self.ns {
                    out.push((n, d, a));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub delta: f64,
    pub alpha: f64,
    pub trial: usize,
    pub master_seed: u64,
    #[serde(flatten)]
    pub report: DiagnosticsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub delta: f64,
    pub alpha: f64,
    pub trials_ok: usize,
    pub median_delta_op_norm: f64,
    pub median_z1a_negativity: f64,
    pub median_gram_dist: f64,
    pub median_t2_excess: f64,
    pub median_max_offdiag_m: f64,
    pub median_objective: f64,
    pub mean_objective: f64,
}

/// Whether the medians are non-increasing in `N` for each `(delta, alpha)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneFlags {
    pub delta: f64,
    pub alpha: f64,
    pub delta_op_norm: bool,
    pub z1a_negativity: bool,
    pub gram_dist: bool,
    pub t2_excess: bool,
    pub max_offdiag_m: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub cells: Vec<CellSummary>,
    pub monotone: Vec<MonotoneFlags>,
}

/// Median of the finite values; NaN when there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn non_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0])
}

/// Runs every `(cell, trial)` pair on the current rayon pool. Trial `t` of
/// every cell uses stream id `t`, so cells share common random numbers and
/// results do not depend on the number of workers.
pub fn scaling_sweep(grid: &SweepGrid, master_seed: u64, opts: &DiagnosticsOptions) -> Result<SweepTable> {
    let cells = grid.cells();
    if cells.is_empty() || grid.trials == 0 {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    let jobs: Vec<(usize, f64, f64, usize)> = cells
        .iter()
        .flat_map(|&(n, d, a)| (0..grid.trials).map(move |t| (n, d, a, t)))
        .collect();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(n, delta, alpha, trial)| SweepRow {
            n,
            delta,
            alpha,
            trial,
            master_seed,
            report: diagnose_trial(n, delta, alpha, RngStream::new(master_seed, trial as u64), opts),
        })
        .collect();

    let summaries: Vec<CellSummary> = cells
        .iter()
        .map(|&(n, delta, alpha)| {
            let rs: Vec<&DiagnosticsReport> = rows
                .iter()
                .filter(|r| r.n == n && r.delta == delta && r.alpha == alpha && r.report.error.is_empty())
                .map(|r| &r.report)
                .collect();
            let objs: Vec<f64> = rs.iter().map(|r| r.objective).collect();
            CellSummary {
                n,
                delta,
                alpha,
                trials_ok: rs.len(),
                median_delta_op_norm: median(rs.iter().map(|r| r.delta_op_norm)),
                median_z1a_negativity: median(rs.iter().map(|r| r.z1a_negativity())),
                median_gram_dist: median(rs.iter().map(|r| r.gram_dist)),
                median_t2_excess: median(rs.iter().map(|r| (r.norm_t2 - 1.0).max(0.0))),
                median_max_offdiag_m: median(rs.iter().map(|r| r.max_offdiag_m)),
                median_objective: median(objs.iter().copied()),
                mean_objective: if objs.is_empty() {
                    f64::NAN
                } else {
                    objs.iter().sum::<f64>() / objs.len() as f64
                },
            }
        })
        .collect();

    let mut monotone = Vec::new();
    for &d in &grid.deltas {
        for &a in &grid.alphas {
            let mut cs: Vec<&CellSummary> = summaries.iter().filter(|c| c.delta == d && c.alpha == a).collect();
            cs.sort_by_key(|c| c.n);
            let col = |f: &dyn Fn(&CellSummary) -> f64| cs.iter().map(|c| f(c)).collect::<Vec<_>>();
            monotone.push(MonotoneFlags {
                delta: d,
                alpha: a,
                delta_op_norm: non_increasing(&col(&|c| c.median_delta_op_norm)),
                z1a_negativity: non_increasing(&col(&|c| c.median_z1a_negativity)),
                gram_dist: non_increasing(&col(&|c| c.median_gram_dist)),
                t2_excess: non_increasing(&col(&|c| c.median_t2_excess)),
                max_offdiag_m: non_increasing(&col(&|c| c.median_max_offdiag_m)),
            });
        }
    }
    Ok(SweepTable {
        rows,
        cells: summaries,
        monotone,
    })
}

/// CSV with one header row; columns are `N, delta, alpha, trial,
/// master_seed` followed by the [`DiagnosticsReport`] fields.
pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "N",
        "delta",
        "alpha",
        "trial",
        "master_seed",
        "lambda_min_Z1a",
        "lambda_min_Ztilde1a",
        "norm_T1",
        "norm_T2",
        "gram_dist",
        "norm_dist",
        "delta_op_norm",
        "delta_diag_max",
        "delta_gershgorin_radius",
        "max_offdiag_M",
        "objective",
        "error",
    ])
    .map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        let p = &r.report;
        let f = |x: f64| format!("{x:?}");
        w.write_record([
            r.n.to_string(),
            f(r.delta),
            f(r.alpha),
            r.trial.to_string(),
            r.master_seed.to_string(),
            f(p.lambda_min_z1a),
            f(p.lambda_min_ztilde1a),
            f(p.norm_t1),
            f(p.norm_t2),
            f(p.gram_dist),
            f(p.norm_dist),
            f(p.delta_op_norm),
            f(p.delta_diag_max),
            f(p.delta_gershgorin_radius),
            f(p.max_offdiag_m),
            f(p.objective),
            p.error.clone(),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests;
