use super::*;
use crate::etf::{harmonic_untf, simplex_etf, Frame};
use crate::linalg::{sym_eigenvalues, SymMatrix};

fn goe_bundle(n: usize, seed: u64) -> (WitnessBundle, SymMatrix) {
    let w = sample_goe(n, &mut RngStream::new(seed, 0).rng());
    (montanari_sen_witness(&w, 0.5).unwrap(), w)
}

fn untf_bundle(f: &Frame) -> WitnessBundle {
    let (r, n) = (f.r(), f.n());
    let s = (r as f64 / n as f64).sqrt();
    let v = Mat::from_fn(r, n, |k, i| s * f.vectors[(k, i)]);
    WitnessBundle::from_frame(v, r as f64 / n as f64).unwrap()
}

fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    m
}

#[test]
fn untf_frames_coincide() {
    let b = untf_bundle(&harmonic_untf(20, 40).unwrap());
    let orth = build_isovec_frame(&b, FrameMode::Orth);
    let norm = build_isovec_frame(&b, FrameMode::Norm);
    assert!(max_abs_diff(&orth.columns, &norm.columns) < 1e-12);
    let t1 = t1_statistics(&b);
    assert!(t1.frob_sq < 1e-20 && t1.t1_opnorm < 1e-10, "{t1:?}");
}

#[test]
fn orth0_identities() {
    let (b, _) = goe_bundle(50, 1);
    let n = b.n;
    let a0 = build_isovec_frame(&b, FrameMode::Orth0);
    let a = build_isovec_frame(&b, FrameMode::Orth);
    let s = a0.apply(&vec![1.0; n]);
    let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((norm - (n as f64).sqrt()).abs() < 1e-8);
    // The 11^T/N shift is exact only when every P_ii equals delta; in general a
    // rank-two term built from s_i = P_ii/delta - 1 remains.
    let de = a.delta_eff;
    let s: Vec<f64> = b.d.iter().map(|d| d / de - 1.0).collect();
    let c = de.sqrt() / b.r as f64;
    let g0 = a0.gram();
    let g = a.gram();
    let (mut d, mut naive): (f64, f64) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let shift = g0.get(i, j) - g.get(i, j) - 1.0 / n as f64;
            d = d.max((shift - c * (s[i] + s[j])).abs());
            naive = naive.max(shift.abs());
        }
    }
    assert!(d < 1e-9);
    assert!(naive > 1e-6);

    let u = untf_bundle(&harmonic_untf(10, 30).unwrap());
    let g0 = build_isovec_frame(&u, FrameMode::Orth0).gram();
    let g = build_isovec_frame(&u, FrameMode::Orth).gram();
    for i in 0..30 {
        for j in 0..30 {
            assert!((g0.get(i, j) - g.get(i, j) - 1.0 / 30.0).abs() < 1e-12);
        }
    }
    let orth_sum = a.apply(&vec![1.0; n]);
    assert!(orth_sum.iter().all(|x| x.abs() < 1e-10));
}

#[test]
fn norm_frame_relation_and_distance() {
    let (b, _) = goe_bundle(40, 2);
    let (r, n) = (b.r, b.n);
    let orth = build_isovec_frame(&b, FrameMode::Orth);
    let norm = build_isovec_frame(&b, FrameMode::Norm);
    let de = orth.delta_eff;
    let one = ones_diag(r);
    let e: Vec<f64> = b.d.iter().map(|d| de / d - 1.0).collect();
    let rebuilt = Mat::from_fn(orth.columns.nrows(), n, |i, j| {
        orth.columns[(i, j)] * (1.0 + e[j]) + one[i] * e[j] / r as f64
    });
    assert!(max_abs_diff(&rebuilt, &norm.columns) < 1e-10);

    let dist = frame_distance(&orth, &norm).unwrap();
    let emax = e.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let a_op = crate::linalg::op_norm_rect(orth.columns.as_ref()).unwrap();
    assert!(dist <= emax * (a_op + de.powf(-0.5)) + 1e-9);
}

#[test]
fn gram_distance_values() {
    let (b, _) = goe_bundle(50, 3);
    let orth = build_isovec_frame(&b, FrameMode::Orth);
    assert!(gram_distance_to_projector(&orth).unwrap() <= 1.0);
    assert!(gram_distance_to_projector(&build_isovec_frame(&b, FrameMode::Norm)).is_err());

    for r in [3usize, 5] {
        let sb = untf_bundle(&simplex_etf(r).unwrap());
        let f = build_isovec_frame(&sb, FrameMode::Orth);
        let de = r as f64 / (r + 1) as f64;
        let g = f.gram();
        for i in 0..=r {
            for j in 0..=r {
                let ip: f64 = (0..r).map(|k| sb.v[(k, i)] * sb.v[(k, j)]).sum();
                let ni: f64 = (0..r).map(|k| sb.v[(k, i)].powi(2)).sum();
                let nj: f64 = (0..r).map(|k| sb.v[(k, j)].powi(2)).sum();
                let want = ip * ip / (de * de) - (ni + nj) / (de * r as f64) + 1.0 / r as f64;
                assert!((g.get(i, j) - want).abs() < 1e-12);
            }
        }
        assert!(gram_distance_to_projector(&f).unwrap().is_finite());
    }
}

#[test]
fn t1_structure() {
    let (b, _) = goe_bundle(40, 4);
    let st = t1_statistics(&b);
    assert!(st.frob_sq <= st.frob_sq_bound * (1.0 + 1e-12));
    let t1 = t1_matrix(&b);
    let ev = sym_eigenvalues(&t1).unwrap();
    let scale = ev[0].abs().max(ev[ev.len() - 1].abs());
    assert!(ev.iter().filter(|x| x.abs() > 1e-10 * scale).count() <= 2);
    assert!((scale - st.t1_opnorm).abs() <= 1e-10 * scale);
}

#[test]
fn t2_values() {
    let cols = Mat::<f64>::identity(6, 4);
    let f = IsovecFrame {
        mode: FrameMode::Norm,
        delta_eff: 0.5,
        columns: cols,
    };
    assert!((t2_norm(&f).unwrap() - 1.0).abs() < 1e-15);
    let (b, _) = goe_bundle(100, 5);
    let norm = build_isovec_frame(&b, FrameMode::Norm);
    assert!(t2_norm(&norm).unwrap() <= 1.5);
}

#[test]
fn ztilde_decomposition() {
    let alpha = 0.2;
    let (b, _) = goe_bundle(30, 6);
    let (r, n) = (b.r as f64, b.n as f64);
    let direct = ZtildeOperator::new(&b, alpha).to_dense();
    let t1 = t1_matrix(&b);
    let norm = build_isovec_frame(&b, FrameMode::Norm);
    let a = norm.columns.as_ref();
    let d = a.nrows();
    let mut t2 = Mat::<f64>::zeros(d, d);
    matmul(t2.as_mut(), Accum::Replace, a, a.transpose(), 1.0, Par::Seq);
    let t2 = SymMatrix::from_upper(t2);
    assert!(*sym_eigenvalues(&t2).unwrap().last().unwrap() >= -1e-12);
    let one = ones_diag(b.r);
    let c = alpha - 2.0 * n / (r * r);
    let rebuilt = SymMatrix::from_fn(d, |i, j| {
        let id = if i == j { 2.0 } else { 0.0 };
        c * one[i] * one[j] + id - t1.get(i, j) - 2.0 * t2.get(i, j)
    });
    assert!(rebuilt.max_abs_diff(&direct) < 1e-9);

    let x: Vec<f64> = (0..d).map(|i| (i as f64).sin()).collect();
    let op = ZtildeOperator::new(&b, alpha);
    let mut y = vec![0.0; d];
    op.apply(&x, &mut y);
    let mut yd = vec![0.0; d];
    direct.matvec(&x, &mut yd);
    assert!(y.iter().zip(&yd).all(|(u, v)| (u - v).abs() < 1e-10));
}

#[test]
fn ztilde_bound_below_direct() {
    for (n, seed) in [(16usize, 7u64), (24, 8), (30, 9)] {
        let (b, _) = goe_bundle(n, seed);
        let rep = ztilde1a_min_eig(&b, 0.2, Some(EigMethod::Dense)).unwrap();
        let direct = rep.direct.unwrap();
        assert!(rep.implied_bound <= direct + 1e-8, "{rep:?}");
    }
}

#[test]
fn ztilde_untf_desk_bound() {
    let b = untf_bundle(&harmonic_untf(30, 60).unwrap());
    let rep = ztilde1a_min_eig(&b, 0.2, None).unwrap();
    // T1 vanishes and the all-ones coefficient is positive here, so the floor is
    // 2 - 2 ||T2||. Consecutive-frequency harmonic frames are coherent and push
    // ||T2|| close to 2; observed lambda_min is -1.733.
    let t2 = t2_norm(&build_isovec_frame(&b, FrameMode::Norm)).unwrap();
    assert!(rep.lambda_min_ztilde >= 2.0 - 2.0 * t2 - 1e-9, "{rep:?}");
    assert!(rep.lambda_min_ztilde >= -2.0, "{rep:?}");
}

#[test]
fn z1a_dense_and_iterative_agree() {
    let (b, _) = goe_bundle(20, 10);
    let d = z1a_min_eig(&b.m, 0.2, EigMethod::Dense).unwrap();
    let it = z1a_min_eig(&b.m, 0.2, EigMethod::Iterative).unwrap();
    assert!((d - it).abs() < 1e-8, "{d} vs {it}");
}

#[test]
fn gershgorin_cases() {
    let z = delta_gershgorin(&correction_delta(&SymMatrix::identity(6)).unwrap()).unwrap();
    assert_eq!((z.diag_max, z.radius_max, z.opnorm), (0.0, 0.0, 0.0));
    for seed in 0..3 {
        let (b, _) = goe_bundle(24, 20 + seed);
        let delta = correction_delta(&b.m).unwrap();
        let g = delta_gershgorin(&delta).unwrap();
        assert!(g.opnorm <= g.diag_max + g.radius_max);
        let dense = crate::linalg::op_norm(&delta.to_dense()).unwrap();
        assert!((dense - g.opnorm).abs() < 1e-8);
    }
}

#[test]
fn iid_vs_haar() {
    let c = iid_comparison(25, 50, 100, RngStream::new(11, 0)).unwrap();
    assert!((c.iid_mean - 48.0).abs() <= 0.2 * 48.0, "{c:?}");
    assert_eq!(c.iid_expected, 48.0);
    let c = iid_comparison(50, 100, 10, RngStream::new(12, 0)).unwrap();
    assert!(c.ratio >= 5.0, "{c:?}");
    let c = iid_comparison(1, 5, 3, RngStream::new(13, 0)).unwrap();
    assert!(c.haar_mean.abs() < 1e-20 && c.iid_mean.abs() < 1e-20);
    assert!(iid_comparison(5, 5, 3, RngStream::new(13, 0)).is_err());
}

#[test]
fn small_sweep() {
    let grid = SweepGrid {
        ns: vec![8, 12],
        deltas: vec![0.5],
        alphas: vec![0.2],
        trials: 3,
    };
    let opts = DiagnosticsOptions::default();
    let a = scaling_sweep(&grid, 5, &opts).unwrap();
    assert_eq!(a.rows.len(), 6);
    assert!(a.rows.iter().all(|r| r.report.error.is_empty()));
    assert_eq!(a.cells.len(), 2);
    assert_eq!(a.monotone.len(), 1);
    let b = scaling_sweep(&grid, 5, &opts).unwrap();
    assert_eq!(a, b);
    let mut buf = Vec::new();
    write_sweep_csv(&a.rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("N,delta,alpha,trial,master_seed,lambda_min_Z1a,"));
    assert!(scaling_sweep(&SweepGrid { ns: vec![], ..grid }, 5, &opts).is_err());
}

#[test]
fn report_norms_non_negative() {
    let r = diagnose_trial(16, 0.5, 0.2, RngStream::new(3, 1), &DiagnosticsOptions::default());
    assert!(r.error.is_empty(), "{}", r.error);
    for x in [
        r.norm_t1,
        r.norm_t2,
        r.gram_dist,
        r.norm_dist,
        r.delta_op_norm,
        r.delta_diag_max,
        r.delta_gershgorin_radius,
        r.max_offdiag_m,
    ] {
        assert!(x >= 0.0);
    }
    let bad = diagnose_trial(16, 1.5, 0.2, RngStream::new(3, 1), &DiagnosticsOptions::default());
    assert!(!bad.error.is_empty() && bad.objective.is_nan());
}

#[test]
fn median_values() {
    assert_eq!(median([3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median([4.0, 1.0, f64::NAN, 2.0, 3.0]), 2.5);
    assert!(median(std::iter::empty()).is_nan());
}
