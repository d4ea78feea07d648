use faer::Mat;
use proptest::prelude::*;
use sksos::deg4::{assemble_z, full_side, reduce_pseudomoments, set_size, verify_constraints};
use sksos::ensembles::{sample_haar_stiefel, RngStream};
use sksos::linalg::{isovec, isovec_inverse, sym_eig, PairIndex, SymMatrix};
use sksos::tensor::{base_tensor_law, condition_gaussian, SymTensorSpace};
use sksos::witness::{nudged_witness, WitnessBundle};

fn sym_from(n: usize, vals: &[f64]) -> SymMatrix {
    SymMatrix::from_fn(n, |i, j| {
        vals[(i * 7 + j * 3) % vals.len()] + vals[(j * 7 + i * 3) % vals.len()]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn isovec_is_an_isometry(n in 1usize..8, a in prop::collection::vec(-3.0f64..3.0, 16), b in prop::collection::vec(-3.0f64..3.0, 16)) {
        let (x, y) = (sym_from(n, &a), sym_from(n, &b));
        let (vx, vy) = (isovec(&x), isovec(&y));
        let ip: f64 = vx.iter().zip(&vy).map(|(p, q)| p * q).sum();
        prop_assert!((ip - x.frobenius_inner(&y)).abs() <= 1e-10 * (1.0 + ip.abs()));
        prop_assert_eq!(isovec_inverse(&vx).unwrap().max_abs_diff(&x) <= 1e-14, true);
    }

    #[test]
    fn pair_index_is_a_bijection(n in 2usize..40) {
        let p = PairIndex::new(n);
        prop_assert_eq!(p.len(), n * (n - 1) / 2);
        for (pos, (i, j)) in p.iter().enumerate() {
            prop_assert!(i < j);
            prop_assert_eq!(p.position(i, j), pos);
            prop_assert_eq!(p.position(j, i), pos);
            prop_assert_eq!(p.pair(pos), (i, j));
        }
    }

    #[test]
    fn reduction_idempotent_and_parity_exact(n in 2usize..6, vals in prop::collection::vec(-1.0f64..1.0, 23)) {
        let side = full_side(n);
        let full = sym_from(side, &vals);
        let red = reduce_pseudomoments(&full, n).unwrap();
        prop_assert!(reduce_pseudomoments(&red, n).unwrap() == red);
        for a in 0..side {
            for b in 0..side {
                let odd = (set_size(n, a) + set_size(n, b)) % 2 == 1;
                prop_assert_eq!(red.get(a, b), if odd { 0.0 } else { full.get(a, b) });
            }
        }
    }

    #[test]
    fn eigendecomposition_reconstructs(n in 1usize..12, vals in prop::collection::vec(-2.0f64..2.0, 31)) {
        let a = sym_from(n, &vals);
        let e = sym_eig(&a).unwrap();
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let rec = SymMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| e.eigenvalues[k] * e.eigenvectors[(i, k)] * e.eigenvectors[(j, k)]).sum()
        });
        prop_assert!(rec.max_abs_diff(&a) <= 1e-10 * (1.0 + a.max_abs()));
    }

    #[test]
    fn tensor_inner_product_is_frobenius(r in 1usize..5, k in 1usize..4, seed in any::<u64>()) {
        use rand::Rng;
        let s = SymTensorSpace::new(r, k).unwrap();
        let mut rng = RngStream::new(seed, 0).rng();
        let a: Vec<f64> = (0..s.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..s.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let full: f64 = s.to_full(&a).iter().zip(s.to_full(&b)).map(|(x, y)| x * y).sum();
        prop_assert!((s.weighted_inner(&a, &b) - full).abs() <= 1e-10);
    }

    #[test]
    fn conditioned_mean_satisfies_constraints(seed in any::<u64>(), m in 1usize..6) {
        use rand::Rng;
        let base = base_tensor_law(3, 2, 1.5).unwrap();
        let mut rng = RngStream::new(seed, 1).rng();
        let c = Mat::from_fn(m, 6, |_, _| rng.random_range(-1.0..1.0));
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        // m <= 5 generic rows on a 6-dimensional space are consistent
        let out = condition_gaussian(&base, c.as_ref(), &b).unwrap();
        for i in 0..m {
            let v: f64 = (0..6).map(|a| c[(i, a)] * out.mean[a]).sum();
            prop_assert!((v - b[i]).abs() <= 1e-9);
        }
        prop_assert!(out.cov_lambda_min().unwrap() >= -1e-9);
    }

    #[test]
    fn nudged_witness_has_unit_diagonal(seed in any::<u64>(), alpha in 0.0f64..=1.0) {
        let v = sample_haar_stiefel(9, 4, &mut RngStream::new(seed, 2).rng()).unwrap();
        let b = WitnessBundle::from_frame(v, 4.0 / 9.0).unwrap();
        let m = nudged_witness(&b.m, alpha).unwrap();
        prop_assert!(m.diag().iter().all(|&d| (d - 1.0).abs() <= 1e-15));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn assembled_z_meets_constraints_on_any_frame(seed in any::<u64>(), n in 6usize..14, alpha in 0.05f64..0.95) {
        let r = n / 2;
        let v = sample_haar_stiefel(n, r, &mut RngStream::new(seed, 3).rng()).unwrap();
        let b = WitnessBundle::from_frame(v, r as f64 / n as f64).unwrap();
        let z = assemble_z(&b.m, alpha).unwrap();
        let rep = verify_constraints(&z, 1e-10);
        prop_assert!(rep.pass, "{:?}", rep);
    }
}
