//! Brute-force reference verdicts by row reduction, for validating the
//! block-structural engine.
//!
//! Everything here is deliberately independent of the factorization and
//! classification paths: a self-contained reduced-row-echelon pass finds the
//! affine solution set of `(I - A) x = d`, and vertex enumeration over that
//! set (boxed to keep it bounded) decides nonnegativity, positivity and
//! uniqueness by inspection. Exponential in the nullity, fine at oracle
//! scale (n <= 6 or so).

use alloc::vec;
use alloc::vec::Vec;

use crate::classify::{DemandVector, TechMatrix};

/// Reference verdict flags `(meaningful, exists_nonneg_nontrivial, unique)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleVerdict {
    pub exists_meaningful: bool,
    pub exists_nonneg_nontrivial: bool,
    pub unique: bool,
}

const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-7;
const POS_TOL: f64 = 1e-9;
const BOX: f64 = 1e4;

/// Solution set of `M x = rhs` by Gauss-Jordan elimination:
/// `None` when inconsistent, else a particular solution and a nullspace
/// basis (one column per free variable).
fn solution_set(m: &[Vec<f64>], rhs: &[f64]) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let rows = m.len();
    let cols = m[0].len();
    let mut aug: Vec<Vec<f64>> = m
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let mut r = row.clone();
            r.push(b);
            r
        })
        .collect();
    let scale = aug
        .iter()
        .flat_map(|r| r.iter())
        .fold(1.0f64, |acc, x| acc.max(x.abs()));
    let tol = PIVOT_TOL * scale;

    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let mut p = r;
        for i in r + 1..rows {
            if aug[i][c].abs() > aug[p][c].abs() {
                p = i;
            }
        }
        if aug[p][c].abs() < tol {
            continue;
        }
        aug.swap(r, p);
        let d = aug[r][c];
        for v in &mut aug[r] {
            *v /= d;
        }
        for i in 0..rows {
            if i != r && aug[i][c].abs() > 0.0 {
                let f = aug[i][c];
                for j in 0..=cols {
                    let s = aug[r][j];
                    aug[i][j] -= f * s;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    // inconsistent when a zeroed row keeps a nonzero rhs
    for row in aug.iter().skip(r) {
        if row[cols].abs() > tol {
            return None;
        }
    }
    let free_cols: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut xp = vec![0.0; cols];
    for (ri, &pc) in pivot_cols.iter().enumerate() {
        xp[pc] = aug[ri][cols];
    }
    let mut basis = Vec::new();
    for &fc in &free_cols {
        let mut v = vec![0.0; cols];
        v[fc] = 1.0;
        for (ri, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -aug[ri][fc];
        }
        basis.push(v);
    }
    Some((xp, basis))
}

/// Solves a small square system; `None` when singular. Self-contained so the
/// oracle shares no code with the engine's factorizations.
fn tiny_solve(m: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let mut r = row.clone();
            r.push(b);
            r
        })
        .collect();
    for c in 0..n {
        let mut p = c;
        for i in c + 1..n {
            if a[i][c].abs() > a[p][c].abs() {
                p = i;
            }
        }
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        for i in 0..n {
            if i != c {
                let f = a[i][c] / a[c][c];
                for j in c..=n {
                    let s = a[c][j];
                    a[i][j] -= f * s;
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

fn combinations(pool: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 || k > pool {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + pool - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Feasible vertices of `{c : xp + N c >= 0, |c_i| <= BOX}` in x-space.
fn feasible_vertices(xp: &[f64], basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = xp.len();
    let k = basis.len();
    if k == 0 {
        let feasible = xp.iter().all(|&x| x >= -FEAS_TOL);
        return if feasible {
            vec![xp.to_vec()]
        } else {
            Vec::new()
        };
    }
    // hyperplanes: n constraint boundaries N_i . c = -xp_i, then 2k box walls
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..n {
        let row: Vec<f64> = basis.iter().map(|b| b[i]).collect();
        planes.push((row, -xp[i]));
    }
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        planes.push((e.clone(), BOX));
        planes.push((e, -BOX));
    }
    let mut verts = Vec::new();
    for comb in combinations(planes.len(), k) {
        let m: Vec<Vec<f64>> = comb.iter().map(|&i| planes[i].0.clone()).collect();
        let rhs: Vec<f64> = comb.iter().map(|&i| planes[i].1).collect();
        let Some(c) = tiny_solve(&m, &rhs) else {
            continue;
        };
        if c.iter().any(|v| v.abs() > BOX + 1e-3) {
            continue;
        }
        let x: Vec<f64> = (0..n)
            .map(|i| xp[i] + basis.iter().zip(&c).map(|(b, cv)| b[i] * cv).sum::<f64>())
            .collect();
        if x.iter().all(|&v| v >= -FEAS_TOL) {
            verts.push(x);
        }
    }
    verts
}

fn proportional(a: &[f64], b: &[f64]) -> bool {
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>();
    let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (d * d - na * nb).abs() <= 1e-6 * na * nb
}

/// Reference verdict for the closed system `(I - A) x = 0`.
pub fn closed_verdict_by_row_reduction(a: &TechMatrix) -> OracleVerdict {
    let n = a.n();
    let b: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (if i == j { 1.0 } else { 0.0 }) - a.entry(i, j))
                .collect()
        })
        .collect();
    let zero = vec![0.0; n];
    let (xp, basis) = solution_set(&b, &zero).expect("homogeneous system is consistent");
    let verts = feasible_vertices(&xp, &basis);
    let nonzero: Vec<&Vec<f64>> = verts
        .iter()
        .filter(|x| x.iter().any(|v| v.abs() > FEAS_TOL))
        .collect();
    if nonzero.is_empty() {
        return OracleVerdict {
            exists_meaningful: false,
            exists_nonneg_nontrivial: false,
            unique: false,
        };
    }
    let mut unique = true;
    for i in 0..nonzero.len() {
        for j in i + 1..nonzero.len() {
            if !proportional(nonzero[i], nonzero[j]) {
                unique = false;
            }
        }
    }
    let avg: Vec<f64> = (0..n)
        .map(|i| nonzero.iter().map(|x| x[i]).sum::<f64>() / nonzero.len() as f64)
        .collect();
    OracleVerdict {
        exists_meaningful: avg.iter().all(|&v| v > POS_TOL),
        exists_nonneg_nontrivial: true,
        unique,
    }
}

/// Reference verdict for the open system `(I - A) x = d`, `d != 0`.
pub fn open_verdict_by_row_reduction(a: &TechMatrix, d: &DemandVector) -> OracleVerdict {
    let n = a.n();
    let b: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (if i == j { 1.0 } else { 0.0 }) - a.entry(i, j))
                .collect()
        })
        .collect();
    let none = OracleVerdict {
        exists_meaningful: false,
        exists_nonneg_nontrivial: false,
        unique: false,
    };
    let Some((xp, basis)) = solution_set(&b, d.as_slice()) else {
        return none;
    };
    let verts = feasible_vertices(&xp, &basis);
    if verts.is_empty() {
        return none;
    }
    // d != 0 makes every feasible point nontrivial
    let scale = verts[0].iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let unique = verts.iter().all(|x| {
        x.iter()
            .zip(&verts[0])
            .all(|(a, b)| (a - b).abs() <= 1e-6 * scale)
    });
    let avg: Vec<f64> = (0..n)
        .map(|i| verts.iter().map(|x| x[i]).sum::<f64>() / verts.len() as f64)
        .collect();
    OracleVerdict {
        exists_meaningful: avg.iter().all(|&v| v > POS_TOL),
        exists_nonneg_nontrivial: true,
        unique,
    }
}
