use super::*;
use crate::ensembles::{sample_goe, RngStream};
use crate::linalg::{sym_eigenvalues, EigMethod};
use crate::witness::montanari_sen_witness;

fn witness_m(n: usize, seed: u64) -> SymMatrix {
    let w = sample_goe(n, &mut RngStream::new(seed, 0).rng());
    montanari_sen_witness(&w, 0.5).unwrap().m
}

fn x22_oracle(m: &SymMatrix, i: usize, j: usize, k: usize, l: usize) -> f64 {
    let quartic: f64 = (0..m.n())
        .map(|c| m.get(i, c) * m.get(j, c) * m.get(k, c) * m.get(l, c))
        .sum();
    m.get(i, j) * m.get(k, l) + m.get(i, k) * m.get(j, l) + m.get(i, l) * m.get(j, k) - 2.0 * quartic
}

fn delta_oracle(m: &SymMatrix, i: usize, k: usize, l: usize) -> f64 {
    (0..m.n())
        .filter(|&c| c != i)
        .map(|c| m.get(i, c).powi(2) * m.get(k, c) * m.get(l, c))
        .sum()
}

#[test]
fn x22_of_identity() {
    let x = heuristic_x22(&SymMatrix::identity(5)).unwrap();
    assert_eq!(x, SymMatrix::identity(10));
}

#[test]
fn x22_simplex_entry() {
    let m = SymMatrix::from_fn(4, |i, j| if i == j { 1.0 } else { -1.0 / 3.0 });
    let x = heuristic_x22(&m).unwrap();
    let p = PairIndex::new(4);
    let got = x.get(p.position(0, 1), p.position(2, 3));
    assert!((got - x22_oracle(&m, 0, 1, 2, 3)).abs() < 1e-15);
    assert!((got - 17.0 / 27.0).abs() < 1e-15);
}

#[test]
fn x22_matches_direct_sums() {
    let m = witness_m(8, 1);
    let x = heuristic_x22(&m).unwrap();
    let p = PairIndex::new(8);
    for (a, (i, j)) in p.iter().enumerate() {
        let s: f64 = (0..8).map(|c| m.get(i, c).powi(2) * m.get(j, c).powi(2)).sum();
        let diag = 1.0 + 2.0 * m.get(i, j).powi(2) - 2.0 * s;
        assert!((x.get(a, a) - diag).abs() < 1e-12);
        for (b, (k, l)) in p.iter().enumerate() {
            assert!((x.get(a, b) - x22_oracle(&m, i, j, k, l)).abs() < 1e-12);
        }
    }
}

#[test]
fn delta_cases() {
    assert_eq!(
        correction_delta_dense(&SymMatrix::identity(5)).unwrap(),
        SymMatrix::zeros(10)
    );
    let ones = SymMatrix::from_fn(5, |_, _| 1.0);
    let d = correction_delta(&ones).unwrap();
    assert_eq!(d.entry(0, 1, 0, 2), 4.0);
    assert_eq!(d.entry(0, 1, 2, 3), 0.0);
}

#[test]
fn delta_matches_brute_force() {
    let n = 8;
    let m = witness_m(n, 2);
    let d = correction_delta(&m).unwrap();
    let dense = d.to_dense();
    let p = PairIndex::new(n);
    for (a, (i, j)) in p.iter().enumerate() {
        for (b, (k, l)) in p.iter().enumerate() {
            let shared: Vec<usize> = [i, j].into_iter().filter(|x| *x == k || *x == l).collect();
            let want = match shared.len() {
                0 => 0.0,
                1 => {
                    let s = shared[0];
                    let u = if i == s { j } else { i };
                    let v = if k == s { l } else { k };
                    delta_oracle(&m, s, u, v)
                }
                _ => {
                    let a1 = delta_oracle(&m, i, j, j);
                    let a2 = delta_oracle(&m, j, i, i);
                    assert!((a1 - a2).abs() < 1e-12, "diagonal consistency");
                    a1
                }
            };
            assert!((dense.get(a, b) - want).abs() < 1e-12);
            assert!((d.entry(i, j, k, l) - want).abs() < 1e-12);
        }
    }
    let x: Vec<f64> = (0..p.len()).map(|q| (q as f64 * 0.7).cos()).collect();
    let mut y = vec![0.0; p.len()];
    d.apply(&x, &mut y);
    let mut yd = vec![0.0; p.len()];
    dense.matvec(&x, &mut yd);
    for (u, v) in y.iter().zip(&yd) {
        assert!((u - v).abs() < 1e-12);
    }
}

#[test]
fn identity_fixed_point() {
    for alpha in [0.0, 0.1, 0.2, 0.7] {
        let z = assemble_z(&SymMatrix::identity(6), alpha).unwrap();
        assert_eq!(z.to_full(), SymMatrix::identity(full_side(6)));
        let rep = verify_constraints(&z, 0.0);
        assert!(rep.pass);
        assert_eq!(rep.max_violation(), 0.0);
        let c = certify_psd(&z, 0.0, CertifyMethod::Full, EigMethod::Dense).unwrap();
        assert_eq!(c.verdict, Verdict::Pass);
    }
}

#[test]
fn constraints_on_witness() {
    let m = witness_m(20, 3);
    let z = assemble_z(&m, 0.2).unwrap();
    let rep = verify_constraints(&z, 1e-10);
    assert!(rep.pass, "{rep:?}");
    assert!(rep.c2.max <= 1e-12 && rep.c3.max <= 1e-12 && rep.c5.max <= 1e-12);
    assert!(z.diag_roundoff < 1e-12);
    assert_eq!(rep.c4.worst.len(), 3);
    assert_eq!(rep.c5.worst.len(), 4);
}

#[test]
fn uncorrected_breaks_consistency() {
    let m = witness_m(40, 4);
    let z = assemble_z_uncorrected(&m, 0.2).unwrap();
    let rep = verify_constraints(&z, 1e-10);
    assert!(rep.c4.max > 10.0 * 1e-10, "{}", rep.c4.max);
}

#[test]
fn full_roundtrip_and_reduction() {
    let m = witness_m(6, 5);
    let z = assemble_z(&m, 0.3).unwrap();
    let full = z.to_full();
    let back = Deg4Pseudomoments::from_full(&full, 6).unwrap();
    assert_eq!(back.to_full(), full);
    assert_eq!(reduce_pseudomoments(&full, 6).unwrap(), full);

    let ones = SymMatrix::from_fn(full_side(2), |_, _| 1.0);
    let red = reduce_pseudomoments(&ones, 2).unwrap();
    for a in 0..4 {
        for b in 0..4 {
            let even = (set_size(2, a) + set_size(2, b)).is_multiple_of(2);
            assert_eq!(red.get(a, b), if even { 1.0 } else { 0.0 });
        }
    }
    assert_eq!(reduce_pseudomoments(&red, 2).unwrap(), red);
    assert!(reduce_pseudomoments(&ones, 3).is_err());
}

#[test]
fn schur_pieces_of_identity() {
    let alpha = 0.25;
    let z = assemble_z(&SymMatrix::identity(5), alpha).unwrap();
    let s = schur_split(&z, &SymMatrix::identity(5), alpha, EigMethod::Dense).unwrap();
    assert_eq!(s.z1a, SymMatrix::identity(10));
    let mut half = SymMatrix::identity(10);
    half.scale(0.5 * alpha);
    assert_eq!(s.z2, half);
    assert_eq!(s.minor11, SymMatrix::identity(5));
}

#[test]
fn z1a_entrywise() {
    let n = 8;
    let alpha = 0.2;
    let m = witness_m(n, 6);
    let z = assemble_z(&m, alpha).unwrap();
    let s = schur_split(&z, &m, alpha, EigMethod::Dense).unwrap();
    assert!(s.identity_residual <= 1e-10);
    let p = PairIndex::new(n);
    for (a, (i, j)) in p.iter().enumerate() {
        for (b, (k, l)) in p.iter().enumerate() {
            let quartic: f64 = (0..n)
                .map(|c| m.get(i, c) * m.get(j, c) * m.get(k, c) * m.get(l, c))
                .sum();
            let want = alpha * m.get(i, j) * m.get(k, l) + m.get(i, k) * m.get(j, l) + m.get(i, l) * m.get(j, k)
                - 2.0 * quartic;
            assert!((s.z1a.get(a, b) - want).abs() < 1e-12);
        }
    }
}

#[test]
fn schur_rejects_mismatched_alpha() {
    let m = witness_m(8, 7);
    let z = assemble_z(&m, 0.2).unwrap();
    assert!(matches!(
        schur_split(&z, &m, 0.4, EigMethod::Dense),
        Err(Error::InconsistentInputs { .. })
    ));
}

#[test]
fn full_lambda_dominates_split_bound() {
    let alpha = 0.2;
    for seed in 0..3 {
        let m = witness_m(30, 10 + seed);
        let z = assemble_z(&m, alpha).unwrap();
        let s = schur_split(&z, &m, alpha, EigMethod::Dense).unwrap();
        let full = *sym_eigenvalues(&z.to_full()).unwrap().last().unwrap();
        let bound = s.lambda_min_minor11.min(s.schur_lower_bound(alpha));
        assert!(full >= bound - 1e-10, "{full} < {bound}");
        let c = certify_psd(&z, 1e-8, CertifyMethod::Full, EigMethod::Dense).unwrap();
        assert!((c.lambda_min - full).abs() < 1e-9);
    }
}

#[test]
fn operators_match_dense() {
    let n = 9;
    let alpha = 0.3;
    let m = witness_m(n, 8);
    let z = assemble_z(&m, alpha).unwrap();
    let s = schur_split(&z, &m, alpha, EigMethod::Dense).unwrap();
    let x22 = heuristic_x22(&m).unwrap();
    let np = z.pairs.len();
    let x: Vec<f64> = (0..np).map(|q| ((q * 13 % 7) as f64) - 3.0).collect();
    let check = |op: &dyn SymOperator, dense: &SymMatrix| {
        let mut a = vec![0.0; np];
        let mut b = vec![0.0; np];
        op.apply(&x, &mut a);
        dense.matvec(&x, &mut b);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-11, "{u} vs {v}");
        }
    };
    check(&X22Operator::new(&m), &x22);
    check(&Z1aOperator::new(&m, alpha), &s.z1a);
    check(&Z22Operator::new(&m, correction_delta(&m).unwrap(), alpha), &z.z22);
}

#[test]
fn matrix_free_agrees_with_dense() {
    let alpha = 0.2;
    let m = witness_m(20, 9);
    let z = assemble_z(&m, alpha).unwrap();
    let dense = certify_psd(&z, 1e-8, CertifyMethod::Full, EigMethod::Dense).unwrap();
    let iter = certify_psd(&z, 1e-8, CertifyMethod::Full, EigMethod::Iterative).unwrap();
    let free = certify_witness_matrix_free(&m, alpha, 1e-8).unwrap();
    assert!((dense.lambda_min - iter.lambda_min).abs() < 1e-8);
    assert!((dense.lambda_min - free.lambda_min).abs() < 1e-8);
    assert_eq!(dense.verdict, free.verdict);
}

#[test]
fn split_verdicts() {
    let m = witness_m(20, 12);
    let z = assemble_z(&m, 0.2).unwrap();
    let c = certify_psd(&z, 1e-8, CertifyMethod::Split, EigMethod::Dense).unwrap();
    assert_ne!(c.verdict, Verdict::Fail);
    let mut zbad = z.clone();
    zbad.z11.set(0, 1, 1.5);
    let c = certify_psd(&zbad, 1e-8, CertifyMethod::Full, EigMethod::Dense).unwrap();
    assert_eq!(c.verdict, Verdict::Fail);
    let generic = Deg4Pseudomoments::from_full(&z.to_full(), 20).unwrap();
    assert!(certify_psd(&generic, 1e-8, CertifyMethod::Split, EigMethod::Dense).is_err());
}
