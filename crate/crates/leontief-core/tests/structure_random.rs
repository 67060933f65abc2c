//! Randomized structural invariants: block triangular forms have exact
//! zeros below the block diagonal and irreducible diagonal blocks; planted
//! unit-radius blocks come back with tight Perron residuals and brackets.

#![allow(clippy::needless_range_loop)]

mod common;

use leontief_core::{
    apply_permutation_similarity, block_triangular_form, build_digraph, classify_blocks, scc,
    spectral_radius, Mat, SpectralClass, TechMatrix, DEFAULT_SPECTRAL_TOL,
};
use rand::Rng;

#[test]
fn btf_invariants_on_random_sparse() {
    let mut rng = common::rng(0xbead_0001);
    for trial in 0..250 {
        let n = rng.gen_range(2..=50);
        let a = common::random_sparse(&mut rng, n, 3.0);
        check_btf_invariants(&a, trial);
    }
}

fn check_btf_invariants(a: &TechMatrix, trial: usize) {
    let n = a.n();
    let g = build_digraph(a);
    let dec = scc(&g);
    let btf = block_triangular_form(a);
    assert_eq!(
        btf.block_count(),
        dec.component_count(),
        "trial {trial}: block count must equal SCC count"
    );
    let pm = apply_permutation_similarity(a.mat(), &btf.perm).unwrap();

    // exact zeros below the block diagonal, entries preserved bit-for-bit
    for i in 0..n {
        for j in 0..n {
            let (bi, bj) = (
                btf.block_of[btf.perm.source(i)],
                btf.block_of[btf.perm.source(j)],
            );
            if bi > bj {
                assert_eq!(pm[(i, j)], 0.0, "trial {trial}: nonzero below diagonal");
            }
            assert_eq!(
                pm[(i, j)],
                a.entry(btf.perm.source(i), btf.perm.source(j)),
                "trial {trial}: permutation must be pure reindexing"
            );
        }
    }

    // each diagonal block is a single SCC
    for b in 0..btf.block_count() {
        let verts = btf.block_vertices(b);
        let sub = TechMatrix::new(a.mat().select(verts, verts)).unwrap();
        let sub_dec = scc(&build_digraph(&sub));
        assert_eq!(
            sub_dec.component_count(),
            1,
            "trial {trial}: diagonal block {b} not irreducible"
        );
    }

    // condensation acyclicity comes out as a consistent topological order
    for b in 0..btf.block_count() {
        for v in btf.block_vertices(b) {
            assert_eq!(btf.block_of[*v], b);
        }
    }
}

#[test]
fn planted_unit_blocks_have_tight_perron_certificates() {
    let mut rng = common::rng(0xbead_0002);
    let mut unit_blocks = 0;
    for _ in 0..400 {
        let planted = common::planted_exact(&mut rng, 6, &[0.5, 1.0, 1.5]);
        let btf = block_triangular_form(&planted.a);
        let spectral = classify_blocks(&btf, &planted.a, DEFAULT_SPECTRAL_TOL).unwrap();
        for (b, bs) in spectral.blocks.iter().enumerate() {
            let (lo, hi) = bs.bracket;
            assert!(hi - lo <= 1e-9, "bracket too wide: [{lo}, {hi}]");
            if bs.class == SpectralClass::One {
                unit_blocks += 1;
                let verts = btf.block_vertices(b);
                let sub = planted.a.mat().select(verts, verts);
                let v = bs.perron.as_ref().expect("class one carries its vector");
                let av = sub.mul_vec(v);
                let res = v
                    .iter()
                    .zip(&av)
                    .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                assert!(res <= 1e-9, "perron residual {res}");
                let norm: f64 = v.iter().map(|x| x * x).sum::<f64>();
                assert!((norm - 1.0).abs() < 1e-12);
                assert!(v.iter().all(|&x| x > 0.0));
            }
        }
    }
    assert!(
        unit_blocks > 100,
        "planted enough unit blocks: {unit_blocks}"
    );
}

#[test]
fn planted_block_radii_recovered() {
    let mut rng = common::rng(0xbead_0003);
    for _ in 0..200 {
        let planted = common::planted_exact(&mut rng, 6, &[0.5, 1.0, 1.5]);
        let btf = block_triangular_form(&planted.a);
        // blocks come back in dependency order with the planted sizes
        let mut got_sizes: Vec<usize> = (0..btf.block_count())
            .map(|b| btf.block_vertices(b).len())
            .collect();
        let mut want_sizes = planted.sizes.clone();
        got_sizes.sort_unstable();
        want_sizes.sort_unstable();
        assert_eq!(got_sizes, want_sizes);

        let spectral = classify_blocks(&btf, &planted.a, DEFAULT_SPECTRAL_TOL).unwrap();
        let mut got_radii: Vec<f64> = spectral.blocks.iter().map(|b| b.rho).collect();
        let mut want_radii = planted.radii.clone();
        got_radii.sort_by(f64::total_cmp);
        want_radii.sort_by(f64::total_cmp);
        for (g, w) in got_radii.iter().zip(&want_radii) {
            assert!((g - w).abs() < 1e-9, "planted radius {w}, got {g}");
        }
    }
}

#[test]
fn scc_matches_reachability_closure() {
    // Floyd-Warshall mutual reachability as the independent SCC oracle
    let mut rng = common::rng(0xbead_0004);
    for _ in 0..150 {
        let n = rng.gen_range(2..=12);
        let a = common::random_sparse(&mut rng, n, 2.5);
        let g = build_digraph(&a);
        let dec = scc(&g);

        let mut reach = vec![vec![false; n]; n];
        for v in 0..n {
            reach[v][v] = true;
            for &(w, _) in g.successors(v) {
                reach[v][w] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let same = dec.component_of[i] == dec.component_of[j];
                let mutual = reach[i][j] && reach[j][i];
                assert_eq!(same, mutual, "vertices {i}, {j}");
            }
        }
    }
}

#[test]
fn spectral_radius_handles_reducible_input() {
    // radius of a reducible matrix is the max over its blocks
    let a = Mat::new(3, 3, vec![0.5, 1.0, 0.0, 0.0, 1.5, 1.0, 0.0, 0.0, 0.25]).unwrap();
    let est = spectral_radius(&a, false).unwrap();
    assert!((est.rho - 1.5).abs() < 1e-9);
}
