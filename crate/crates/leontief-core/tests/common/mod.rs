//! Shared generators for randomized structural tests.
//!
//! Planted matrices use binary-exact entries (quarters) so that row sums,
//! couplings and scalings are exact in floating point: a block built to have
//! spectral radius 1 really has radius 1, and zero couplings are exact
//! zeros. That keeps borderline classification out of randomized runs.

#![allow(dead_code)]

use leontief_core::{DemandVector, Mat, Permutation, TechMatrix};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Metadata about a planted instance.
pub struct Planted {
    pub a: TechMatrix,
    pub n: usize,
    /// Block sizes before permutation, in dependency order.
    pub sizes: Vec<usize>,
    /// Spectral radius planted per block (exact).
    pub radii: Vec<f64>,
    /// The permutation that scrambled the planted form.
    pub perm: Permutation,
}

/// Random block-upper matrix with exactly row-stochastic irreducible blocks
/// scaled by binary-exact factors, then a random permutation similarity.
pub fn planted_exact(rng: &mut ChaCha8Rng, max_n: usize, scales: &[f64]) -> Planted {
    let n = rng.gen_range(2..=max_n);
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = rng.gen_range(1..=left.min(3));
        sizes.push(s);
        left -= s;
    }
    let k = sizes.len();
    let mut data = vec![0.0f64; n * n];
    let put = |data: &mut Vec<f64>, r: usize, c: usize, v: f64| data[r * n + c] = v;

    let mut bounds = Vec::new();
    let mut pos = 0;
    let mut radii = Vec::new();
    for &s in &sizes {
        bounds.push((pos, pos + s));
        if s == 1 {
            let v = *[0.0, 0.5, 1.0, 1.5].choose(rng).unwrap();
            put(&mut data, pos, pos, v);
            radii.push(v);
        } else {
            // row-stochastic rows: 1.0 on the cycle successor, or 0.5 + 0.5
            // split between the successor and a random column
            let scale = *scales.choose(rng).unwrap();
            for r in 0..s {
                let nxt = (r + 1) % s;
                let other = rng.gen_range(0..s);
                if other == nxt {
                    put(&mut data, pos + r, pos + nxt, scale);
                } else {
                    put(&mut data, pos + r, pos + nxt, 0.5 * scale);
                    data[(pos + r) * n + pos + other] += 0.5 * scale;
                }
            }
            radii.push(scale);
        }
        pos += s;
    }
    // couplings strictly above the block diagonal
    for bi in 0..k {
        for bj in bi + 1..k {
            if rng.gen_bool(0.5) {
                let r = rng.gen_range(bounds[bi].0..bounds[bi].1);
                let c = rng.gen_range(bounds[bj].0..bounds[bj].1);
                let v = *[0.25, 1.0].choose(rng).unwrap();
                data[r * n + c] = v;
            }
        }
    }

    let mut image: Vec<usize> = (0..n).collect();
    image.shuffle(rng);
    let perm = Permutation::new(image).unwrap();
    let base = Mat::new(n, n, data).unwrap();
    // scramble: entry (i, j) of the scrambled matrix is base[p(i)][p(j)]
    let scrambled = leontief_core::apply_permutation_similarity(&base, &perm).unwrap();

    Planted {
        a: TechMatrix::new(scrambled).unwrap(),
        n,
        sizes,
        radii,
        perm,
    }
}

/// Random demand over {0, 1}, guaranteed nonzero.
pub fn random_demand(rng: &mut ChaCha8Rng, n: usize) -> DemandVector {
    loop {
        let d: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 })
            .collect();
        if d.iter().any(|&v| v > 0.0) {
            return DemandVector::new(d).unwrap();
        }
    }
}

/// Random strictly positive matrix scaled to spectral radius below 1.
pub fn random_productive(rng: &mut ChaCha8Rng, n: usize) -> TechMatrix {
    let data: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let row_max: f64 = (0..n)
        .map(|i| data[i * n..(i + 1) * n].iter().sum::<f64>())
        .fold(0.0, f64::max);
    let target = rng.gen_range(0.3..0.9);
    let scaled: Vec<f64> = data.iter().map(|v| v * target / row_max).collect();
    TechMatrix::from_rows(n, scaled).unwrap()
}

/// Random strictly positive irreducible matrix with spectral radius 1 to
/// machine precision, and its positive base solution at the given scale.
///
/// Construction: row-normalize a random positive matrix (radius exactly 1,
/// Perron vector of ones), then conjugate by a random positive diagonal `D`.
/// The conjugated matrix keeps radius 1 and solves `(I - A)(D 1) = 0`, so
/// the base solution is the diagonal itself.
pub fn random_unit_irreducible(
    rng: &mut ChaCha8Rng,
    n: usize,
    scale: f64,
) -> (TechMatrix, Vec<f64>) {
    let raw: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let mut data = vec![0.0f64; n * n];
    for i in 0..n {
        let row_sum: f64 = raw[i * n..(i + 1) * n].iter().sum();
        for j in 0..n {
            data[i * n + j] = diag[i] * (raw[i * n + j] / row_sum) / diag[j];
        }
    }
    let a = TechMatrix::from_rows(n, data).unwrap();
    let x0: Vec<f64> = diag.iter().map(|d| d * scale).collect();
    (a, x0)
}

/// Random sparse nonnegative matrix (about `density` expected entries per
/// row), entries in (0, 1.5].
pub fn random_sparse(rng: &mut ChaCha8Rng, n: usize, density: f64) -> TechMatrix {
    let p = density / n as f64;
    let data: Vec<f64> = (0..n * n)
        .map(|_| {
            if rng.gen_bool(p.min(1.0)) {
                rng.gen_range(0.01..1.5)
            } else {
                0.0
            }
        })
        .collect();
    TechMatrix::from_rows(n, data).unwrap()
}
