//! Unit norm and equiangular tight frames, the perturbation subspace of a
//! frame Gram matrix, and the closed-form degree-4 extension of ETF Gram
//! matrices in entrywise and spectral form.

use std::io::{BufRead, Write};

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use serde::{Deserialize, Serialize};

use crate::deg4::Deg4Pseudomoments;
use crate::error::{Error, Result};
use crate::linalg::{isovec_inverse, offdiag, PairIndex, SymMatrix};

/// `N` vectors in `R^r`, stored as the columns of an `r x N` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub vectors: Mat<f64>,
}

impl Frame {
    pub fn new(vectors: Mat<f64>) -> Result<Self> {
        if vectors.ncols() == 0 || vectors.nrows() == 0 {
            return Err(Error::InvalidParameter("frame needs r >= 1 and N >= 1".into()));
        }
        for j in 0..vectors.ncols() {
            for i in 0..vectors.nrows() {
                if !vectors[(i, j)].is_finite() {
                    return Err(Error::InvalidParameter(format!("non-finite frame entry at ({i}, {j})")));
                }
            }
        }
        Ok(Self { vectors })
    }

    pub fn r(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn n(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn gram(&self) -> SymMatrix {
        let n = self.n();
        let mut g = Mat::<f64>::zeros(n, n);
        let v = self.vectors.as_ref();
        matmul(g.as_mut(), Accum::Replace, v.transpose(), v, 1.0, Par::Seq);
        SymMatrix::from_upper(g)
    }

    /// `Σ_i v_i v_iᵀ`
    pub fn frame_operator(&self) -> SymMatrix {
        let r = self.r();
        let mut g = Mat::<f64>::zeros(r, r);
        let v = self.vectors.as_ref();
        matmul(g.as_mut(), Accum::Replace, v, v.transpose(), 1.0, Par::Seq);
        SymMatrix::from_upper(g)
    }

    /// Gram matrix with the diagonal set to exactly 1.
    pub fn unit_gram(&self) -> SymMatrix {
        let mut m = self.gram();
        for i in 0..m.n() {
            m.set(i, i, 1.0);
        }
        m
    }
}

/// Regular simplex: `r + 1` unit vectors in `R^r` with pairwise inner
/// products `-1/r`. Built from the Helmert basis of `1⊥ ⊂ R^{r+1}`.
pub fn simplex_etf(r: usize) -> Result<Frame> {
    if r < 2 {
        return Err(Error::InvalidParameter("simplex frame needs r >= 2".into()));
    }
    let n = r + 1;
    let scale = ((r + 1) as f64 / r as f64).sqrt();
    let v = Mat::from_fn(r, n, |k, i| {
        let k1 = k + 1;
        let norm = ((k1 * (k1 + 1)) as f64).sqrt();
        let h = if i < k1 {
            1.0
        } else if i == k1 {
            -(k1 as f64)
        } else {
            0.0
        };
        scale * h / norm
    });
    Frame::new(v)
}

/// Harmonic UNTF of `N` unit vectors in `R^r` (`r < N`): a constant row when
/// `r` is odd plus cosine/sine row pairs at frequencies `1, 2, ...`.
pub fn harmonic_untf(r: usize, n: usize) -> Result<Frame> {
    if r == 0 || r >= n {
        return Err(Error::InvalidParameter(format!(
            "harmonic frame needs 1 <= r < N, got r={r}, N={n}"
        )));
    }
    let rf = r as f64;
    let mut v = Mat::<f64>::zeros(r, n);
    let mut row = 0;
    if r % 2 == 1 {
        for i in 0..n {
            v[(0, i)] = 1.0 / rf.sqrt();
        }
        row = 1;
    }
    let c = (2.0 / rf).sqrt();
    let mut freq = 1usize;
    while row < r {
        for i in 0..n {
            let t = 2.0 * std::f64::consts::PI * (freq * i) as f64 / n as f64;
            v[(row, i)] = c * t.cos();
            v[(row + 1, i)] = c * t.sin();
        }
        row += 2;
        freq += 1;
    }
    Frame::new(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameVerdict {
    pub is_untf: bool,
    pub max_norm_dev: f64,
    /// `||Σ v_i v_iᵀ - (N/r) I||_F`
    pub tight_residual: f64,
    pub is_etf: bool,
    /// Mean of `|<v_i, v_j>|` over `i < j`.
    pub mu: f64,
    pub max_angle_dev: f64,
}

fn frame_verdict(f: &Frame, tol: f64) -> FrameVerdict {
    let (r, n) = (f.r(), f.n());
    let g = f.gram();
    let max_norm_dev = (0..n).map(|i| (g.get(i, i).sqrt() - 1.0).abs()).fold(0.0, f64::max);
    let mut s = f.frame_operator();
    s.shift_diag(-(n as f64) / r as f64);
    let tight_residual = s.frobenius_norm();
    let is_untf = max_norm_dev <= tol && tight_residual <= tol;
    let mut vals = Vec::new();
    for j in 0..n {
        for i in 0..j {
            vals.push(g.get(i, j).abs());
        }
    }
    let mu = if vals.is_empty() {
        0.0
    } else {
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    let max_angle_dev = vals.iter().map(|x| (x - mu).abs()).fold(0.0, f64::max);
    FrameVerdict {
        is_untf,
        max_norm_dev,
        tight_residual,
        is_etf: is_untf && max_angle_dev <= tol,
        mu,
        max_angle_dev,
    }
}

pub fn check_untf(f: &Frame, tol: f64) -> FrameVerdict {
    frame_verdict(f, tol)
}

pub fn check_etf(f: &Frame, tol: f64) -> FrameVerdict {
    frame_verdict(f, tol)
}

/// Orthogonal projector onto `offdiag(pert(M))`, where `M` is the Gram
/// matrix of the normalized frame. Returns the projector and its rank.
pub fn perturbation_projector(f: &Frame) -> Result<(SymMatrix, usize)> {
    let (r, n) = (f.r(), f.n());
    let vh = normalized(f)?;
    let sv = vh
        .as_ref()
        .singular_values()
        .map_err(|e| Error::NoConvergence(format!("svd: {e:?}")))?;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > 1e-10 * top).count();
    if rank < r {
        return Err(Error::RankDeficient { r, rank });
    }

    // constraint rows isovec(v_i v_iᵀ); the nullspace holds the admissible S
    let d = r * (r + 1) / 2;
    let s2 = std::f64::consts::SQRT_2;
    let c = Mat::from_fn(n, d, |i, t| {
        if t < r {
            vh[(t, i)] * vh[(t, i)]
        } else {
            let (k, l) = PairIndex::new(r).pair(t - r);
            s2 * vh[(k, i)] * vh[(l, i)]
        }
    });
    let svd = c
        .as_ref()
        .svd()
        .map_err(|e| Error::NoConvergence(format!("svd: {e:?}")))?;
    let cs = svd.S();
    let ctop = (0..n.min(d)).map(|i| cs[i]).fold(0.0, f64::max);
    let crank = (0..n.min(d)).filter(|&i| cs[i] > 1e-10 * ctop).count();
    let vfull = svd.V();
    let pairs = PairIndex::new(n);
    let np = pairs.len();
    let mut images = Mat::<f64>::zeros(np, d - crank);
    for (col, b) in (crank..d).enumerate() {
        let x: Vec<f64> = (0..d).map(|t| vfull[(t, b)]).collect();
        let s = isovec_inverse(&x)?;
        // offdiag(V̂ᵀ S V̂)
        let mut sv_ = Mat::<f64>::zeros(r, n);
        matmul(sv_.as_mut(), Accum::Replace, s.as_ref(), vh.as_ref(), 1.0, Par::Seq);
        for (p, (i, j)) in pairs.iter().enumerate() {
            images[(p, col)] = (0..r).map(|k| vh[(k, i)] * sv_[(k, j)]).sum();
        }
    }
    if images.ncols() == 0 {
        return Ok((SymMatrix::zeros(np), 0));
    }
    let isvd = images
        .as_ref()
        .thin_svd()
        .map_err(|e| Error::NoConvergence(format!("svd: {e:?}")))?;
    let is = isvd.S();
    let k = images.ncols().min(np);
    let itop = (0..k).map(|i| is[i]).fold(0.0, f64::max);
    let keep: Vec<usize> = (0..k).filter(|&i| is[i] > 1e-10 * itop).collect();
    let u = isvd.U();
    let proj = SymMatrix::from_fn(np, |a, b| keep.iter().map(|&t| u[(a, t)] * u[(b, t)]).sum());
    Ok((proj, keep.len()))
}

fn normalized(f: &Frame) -> Result<Mat<f64>> {
    let (r, n) = (f.r(), f.n());
    let mut out = f.vectors.clone();
    for i in 0..n {
        let s = (0..r).map(|k| out[(k, i)].powi(2)).sum::<f64>().sqrt();
        if s == 0.0 {
            return Err(Error::InvalidParameter(format!("frame vector {i} is zero")));
        }
        for k in 0..r {
            out[(k, i)] /= s;
        }
    }
    Ok(out)
}

/// `(a, b)` in `Z22 = a (M_ij M_kl + M_ik M_jl + M_il M_jk) - b Σ_m M_im M_jm M_km M_lm`.
pub fn etf_coefficients(r: usize, n: usize) -> (f64, f64) {
    let (rf, nf) = (r as f64, n as f64);
    let den = rf * (rf + 1.0) / 2.0 - nf;
    (rf * (rf - 1.0) / 2.0 / den, rf * rf * (1.0 - 1.0 / nf) / den)
}

fn etf_preconditions(f: &Frame) -> Result<()> {
    let (r, n) = (f.r(), f.n());
    let bound = r * (r + 1) / 2;
    if n >= bound {
        return Err(Error::InfeasibleDimension { n, bound });
    }
    let v = check_etf(f, 1e-9);
    if !v.is_etf {
        return Err(Error::InvalidParameter(format!(
            "frame is not an ETF: norm dev {:e}, tight residual {:e}, angle dev {:e}",
            v.max_norm_dev, v.tight_residual, v.max_angle_dev
        )));
    }
    Ok(())
}

fn with_blocks(m: SymMatrix, z22: SymMatrix) -> Deg4Pseudomoments {
    let n = m.n();
    let pairs = PairIndex::new(n);
    Deg4Pseudomoments {
        n,
        alpha: Some(0.0),
        z00: 1.0,
        z01: vec![0.0; n],
        z02: offdiag(&m),
        z12: Mat::zeros(n, pairs.len()),
        z11: m,
        z22,
        pairs,
        diag_roundoff: 0.0,
    }
}

/// Entrywise closed form of the degree-4 extension of an ETF Gram matrix.
pub fn etf_deg4_extension(f: &Frame) -> Result<Deg4Pseudomoments> {
    etf_preconditions(f)?;
    let (r, n) = (f.r(), f.n());
    let m = f.unit_gram();
    let (a, b) = etf_coefficients(r, n);
    let pairs = PairIndex::new(n);
    let z22 = SymMatrix::from_fn(pairs.len(), |p, q| {
        let (i, j) = pairs.pair(p);
        let (k, l) = pairs.pair(q);
        let quartic: f64 = (0..n)
            .map(|c| m.get(i, c) * m.get(j, c) * m.get(k, c) * m.get(l, c))
            .sum();
        a * (m.get(i, j) * m.get(k, l) + m.get(i, k) * m.get(j, l) + m.get(i, l) * m.get(j, k)) - b * quartic
    });
    Ok(with_blocks(m, z22))
}

/// `N²(1 - 1/r) / (r(r+1) - 2N)`
pub fn etf_spectral_coefficient(r: usize, n: usize) -> f64 {
    let (rf, nf) = (r as f64, n as f64);
    nf * nf * (1.0 - 1.0 / rf) / (rf * (rf + 1.0) - 2.0 * nf)
}

/// Spectral form `offdiag(M) offdiag(M)ᵀ + c P_pert` of the same extension.
pub fn etf_extension_spectral(f: &Frame) -> Result<Deg4Pseudomoments> {
    etf_preconditions(f)?;
    let (r, n) = (f.r(), f.n());
    let m = f.unit_gram();
    let (proj, _) = perturbation_projector(f)?;
    let o = offdiag(&m);
    let c = etf_spectral_coefficient(r, n);
    let z22 = SymMatrix::from_fn(o.len(), |p, q| o[p] * o[q] + c * proj.get(p, q));
    Ok(with_blocks(m, z22))
}

/// Writes `FRAME r N` and then `r` rows of `N` values.
pub fn write_frame<W: Write>(f: &Frame, mut out: W) -> Result<()> {
    writeln!(out, "FRAME {} {}", f.r(), f.n())?;
    for k in 0..f.r() {
        let row: Vec<String> = (0..f.n()).map(|i| format!("{:?}", f.vectors[(k, i)])).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn read_frame<R: BufRead>(input: R) -> Result<Frame> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty frame file".into()))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let dims = match parts.as_slice() {
        ["FRAME", r, n] => r.parse::<usize>().ok().zip(n.parse::<usize>().ok()),
        _ => None,
    };
    let (r, n) = dims.ok_or_else(|| Error::Parse(format!("bad frame header '{header}'")))?;
    let mut v = Mat::<f64>::zeros(r, n);
    for k in 0..r {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing frame row {k}")))??;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::Parse(format!("bad value '{t}' in row {k}")))
            })
            .collect::<Result<_>>()?;
        if vals.len() != n {
            return Err(Error::Parse(format!(
                "frame row {k} has {} values, expected {n}",
                vals.len()
            )));
        }
        for (i, x) in vals.into_iter().enumerate() {
            v[(k, i)] = x;
        }
    }
    Frame::new(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deg4::{certify_psd, verify_constraints, CertifyMethod, Verdict};
    use crate::linalg::{sym_eigenvalues, EigMethod};

    #[test]
    fn simplex_gram() {
        for r in 2..=8 {
            let f = simplex_etf(r).unwrap();
            assert_eq!(f.n(), r + 1);
            let g = f.gram();
            for i in 0..=r {
                for j in 0..=r {
                    let want = if i == j { 1.0 } else { -1.0 / r as f64 };
                    assert!((g.get(i, j) - want).abs() < 1e-14);
                }
            }
            let v = check_etf(&f, 1e-12);
            assert!(v.is_untf && v.is_etf, "{v:?}");
            let ev = sym_eigenvalues(&g).unwrap();
            let top = (r + 1) as f64 / r as f64;
            assert!(ev[..r].iter().all(|x| (x - top).abs() < 1e-12));
            assert!(ev[r].abs() < 1e-12);
        }
        let s = simplex_etf(3).unwrap().frame_operator();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 4.0 / 3.0 } else { 0.0 };
                assert!((s.get(i, j) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn standard_basis_is_etf() {
        let f = Frame::new(Mat::<f64>::identity(4, 4)).unwrap();
        let v = check_etf(&f, 1e-12);
        assert!(v.is_untf && v.is_etf);
        assert_eq!(v.mu, 0.0);
    }

    #[test]
    fn harmonic_is_untf() {
        for (r, n) in [(20, 40), (7, 12), (1, 5)] {
            let f = harmonic_untf(r, n).unwrap();
            assert!(check_untf(&f, 1e-12).is_untf);
        }
        assert!(harmonic_untf(5, 5).is_err());
    }

    #[test]
    fn projector_properties() {
        let f = simplex_etf(3).unwrap();
        let (p, rank) = perturbation_projector(&f).unwrap();
        assert_eq!(rank, 2);
        let n = p.n();
        let mut p2 = Mat::<f64>::zeros(n, n);
        matmul(p2.as_mut(), Accum::Replace, p.as_ref(), p.as_ref(), 1.0, Par::Seq);
        assert!(SymMatrix::from_upper(p2).max_abs_diff(&p) < 1e-10);
        assert!((p.trace() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn rank_deficient_frame() {
        let v = Mat::from_fn(3, 5, |k, i| if k == 2 { 0.0 } else { ((k + i) as f64).cos() });
        assert!(matches!(
            perturbation_projector(&Frame::new(v).unwrap()),
            Err(Error::RankDeficient { r: 3, rank: 2 })
        ));
    }

    #[test]
    fn simplex_three_extension() {
        let f = simplex_etf(3).unwrap();
        let z = etf_deg4_extension(&f).unwrap();
        let p = &z.pairs;
        assert!((z.z22.get(p.position(0, 1), p.position(2, 3)) - 1.0).abs() < 1e-12);
        assert!((z.z22.get(p.position(0, 1), p.position(0, 2)) + 1.0 / 3.0).abs() < 1e-12);
        let rep = verify_constraints(&z, 1e-10);
        assert!(rep.pass, "{rep:?}");
        let c = certify_psd(&z, 1e-9, CertifyMethod::Full, EigMethod::Dense).unwrap();
        assert_eq!(c.verdict, Verdict::Pass);
    }

    #[test]
    fn spectral_matches_entrywise() {
        for r in 3..=6 {
            let f = simplex_etf(r).unwrap();
            let a = etf_deg4_extension(&f).unwrap();
            let b = etf_extension_spectral(&f).unwrap();
            assert!(a.z22.max_abs_diff(&b.z22) < 1e-8, "r = {r}");
            let (_, rank) = perturbation_projector(&f).unwrap();
            let c = etf_spectral_coefficient(r, r + 1);
            let ev = sym_eigenvalues(&b.z22).unwrap();
            assert_eq!(ev.iter().filter(|x| (*x - c).abs() < 1e-8).count(), rank);
        }
    }

    #[test]
    fn infeasible_simplex() {
        let f = simplex_etf(2).unwrap();
        assert_eq!(
            etf_deg4_extension(&f).unwrap_err(),
            Error::InfeasibleDimension { n: 3, bound: 3 }
        );
        assert!(etf_extension_spectral(&f).is_err());
    }

    #[test]
    fn coefficients_approach_limits() {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for r in 3..40 {
            let (a, b) = etf_coefficients(r, r + 1);
            let d = ((a - 1.0).abs(), (b - 2.0).abs());
            assert!(d.0 <= prev.0 && d.1 <= prev.1);
            prev = d;
        }
    }

    #[test]
    fn frame_file_roundtrip() {
        let f = simplex_etf(4).unwrap();
        let mut buf = Vec::new();
        write_frame(&f, &mut buf).unwrap();
        assert_eq!(read_frame(buf.as_slice()).unwrap(), f);
        assert!(read_frame("FRAME 2 2\n1 0\n".as_bytes()).is_err());
        assert!(read_frame("FRAMES 2 2\n".as_bytes()).is_err());
    }
}
