mod common;

use leontief_core::{
    apply_permutation_similarity, leading_principal_minors, lu_factor, Mat, Permutation,
};
use proptest::prelude::*;
use rand::Rng;

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn solve_residual_bound_on_random_systems() {
    // diagonally dominated random systems, many right-hand sides
    let mut rng = common::rng(0x11a6_0001);
    let mut solves = 0;
    while solves < 1000 {
        let n = rng.gen_range(2..=20);
        let mut data: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for i in 0..n {
            data[i * n + i] += if data[i * n + i] >= 0.0 { 2.0 } else { -2.0 };
        }
        let a = Mat::new(n, n, data).unwrap();
        let f = lu_factor(&a).unwrap();
        assert!(!f.is_singular());
        let a_inf: f64 = (0..n)
            .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        for _ in 0..5 {
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let x = f.solve(&b).unwrap();
            let ax = a.mul_vec(&x);
            let res = ax
                .iter()
                .zip(&b)
                .fold(0.0f64, |m, (l, r)| m.max((l - r).abs()));
            let bound = 1e-9 * (a_inf * norm_inf(&x) + norm_inf(&b));
            assert!(
                res <= bound,
                "residual {res} over budget {bound} at n = {n}"
            );
            solves += 1;
        }
    }
}

proptest! {
    #[test]
    fn triangular_minors_are_diagonal_products(
        diag in proptest::collection::vec(-3.0f64..3.0, 1..8),
        upper in proptest::collection::vec(-3.0f64..3.0, 64),
    ) {
        let n = diag.len();
        let mut m = Mat::zeros(n, n);
        let mut t = 0;
        for i in 0..n {
            m[(i, i)] = diag[i];
            for j in i + 1..n {
                m[(i, j)] = upper[t % upper.len()];
                t += 1;
            }
        }
        let minors = leading_principal_minors(&m).unwrap();
        let mut prod = 1.0;
        for (k, minor) in minors.iter().enumerate() {
            prod *= diag[k];
            prop_assert!((minor - prod).abs() <= 1e-12 * prod.abs().max(1.0));
        }
    }

    #[test]
    fn permutation_similarity_preserves_structure(
        data in proptest::collection::vec(0.0f64..2.0, 16),
        seed in any::<u64>(),
    ) {
        let a = Mat::new(4, 4, data).unwrap();
        let mut rng = common::rng(seed);
        let mut image: Vec<usize> = (0..4).collect();
        use rand::seq::SliceRandom;
        image.shuffle(&mut rng);
        let p = Permutation::new(image).unwrap();
        let b = apply_permutation_similarity(&a, &p).unwrap();

        // multiset of diagonal entries survives
        let mut da: Vec<f64> = (0..4).map(|i| a[(i, i)]).collect();
        let mut db: Vec<f64> = (0..4).map(|i| b[(i, i)]).collect();
        da.sort_by(f64::total_cmp);
        db.sort_by(f64::total_cmp);
        prop_assert_eq!(da, db);

        // weighted edge set survives (as the multiset of entry values)
        let mut ea: Vec<f64> = a.data().to_vec();
        let mut eb: Vec<f64> = b.data().to_vec();
        ea.sort_by(f64::total_cmp);
        eb.sort_by(f64::total_cmp);
        prop_assert_eq!(ea, eb);

        // round trip is exact reindexing
        let back = apply_permutation_similarity(&b, &p.inverse()).unwrap();
        prop_assert_eq!(&back, &a);

        // row sums are permuted, not changed
        let sums_a: Vec<f64> = (0..4).map(|i| a.row(i).iter().sum()).collect();
        let sums_b: Vec<f64> = (0..4).map(|i| b.row(i).iter().sum()).collect();
        for i in 0..4 {
            prop_assert!((sums_b[i] - sums_a[p.source(i)]).abs() < 1e-12);
        }
    }
}
