//! Spectral radius estimation and Perron vectors for the irreducible
//! diagonal blocks, plus the three-way classification against 1.

use alloc::vec;
use alloc::vec::Vec;

use crate::classify::TechMatrix;
use crate::graph::{block_triangular_form, BlockTriangularForm};
use crate::linalg::Mat;
use crate::math::{norm2, norm_inf};
use crate::{Error, Result};

/// Default tolerance for deciding `rho = 1`.
pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-9;

/// Diagonal shift making irreducible blocks primitive, so power iteration
/// converges even on periodic blocks (pure cycles). Eigenvectors are
/// shift-invariant, the radius shifts back by the same amount.
const POWER_SHIFT: f64 = 0.5;

/// Spectral class of one irreducible block relative to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralClass {
    BelowOne,
    One,
    AboveOne,
}

impl SpectralClass {
    pub fn of(rho: f64, tol: f64) -> SpectralClass {
        if (rho - 1.0).abs() <= tol {
            SpectralClass::One
        } else if rho < 1.0 {
            SpectralClass::BelowOne
        } else {
            SpectralClass::AboveOne
        }
    }
}

/// Converged spectral radius estimate with its Collatz-Wielandt bracket.
#[derive(Debug, Clone, Copy)]
pub struct SpectralEstimate {
    pub rho: f64,
    /// `min_i (Av)_i / v_i` at the returned iterate.
    pub lower: f64,
    /// `max_i (Av)_i / v_i` at the returned iterate.
    pub upper: f64,
}

/// Per-block spectral data.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    pub rho: f64,
    pub class: SpectralClass,
    /// Collatz-Wielandt bracket certifying `rho`.
    pub bracket: (f64, f64),
    /// Positive unit eigenvector, present exactly for class `One`.
    pub perron: Option<Vec<f64>>,
}

/// Classification of every block of a block triangular form, with the
/// induced partition of the sectors by spectral class.
#[derive(Debug, Clone)]
pub struct SpectralClassification {
    pub blocks: Vec<BlockSpectrum>,
    /// `max` of the block radii, the spectral radius of the whole matrix.
    pub rho: f64,
    /// Tolerance used to decide class `One` (echoed into reports).
    pub tol: f64,
    /// Original sector indices whose component has `rho < 1`.
    pub sectors_below_one: Vec<usize>,
    /// Original sector indices whose component has `rho = 1`.
    pub sectors_one: Vec<usize>,
    /// Original sector indices whose component has `rho > 1`.
    pub sectors_above_one: Vec<usize>,
}

impl SpectralClassification {
    pub fn class(&self, block: usize) -> SpectralClass {
        self.blocks[block].class
    }
}

fn collatz_wielandt(block: &Mat, v: &[f64]) -> (f64, f64) {
    let av = block.mul_vec(v);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (num, den) in av.iter().zip(v) {
        let r = num / den;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}

/// Power iteration on `block + shift*I` until the Collatz-Wielandt bracket
/// closes; returns the estimate (shift removed) and the final iterate.
fn power_iterate(
    block: &Mat,
    target_width: f64,
    residual_target: Option<f64>,
) -> Result<(SpectralEstimate, Vec<f64>)> {
    let n = block.rows();
    let shifted = Mat::from_fn(n, n, |i, j| {
        block[(i, j)] + if i == j { POWER_SHIFT } else { 0.0 }
    });
    let mut v = vec![1.0 / n as f64; n];
    let cap = 100 * n * n + 200;
    let mut bracket = collatz_wielandt(&shifted, &v);
    for _ in 0..cap {
        let width_ok = bracket.1 - bracket.0 <= target_width;
        let residual_ok = match residual_target {
            None => true,
            Some(rt) => {
                // residual of the eigen equation at rho = 1 on the original block
                let av = block.mul_vec(&v);
                let res = v
                    .iter()
                    .zip(&av)
                    .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                res <= rt
            }
        };
        if width_ok && residual_ok {
            break;
        }
        let mut next = shifted.mul_vec(&v);
        let scale = norm_inf(&next);
        if scale == 0.0 {
            // only possible for the 1x1 zero block, handled by the caller
            break;
        }
        for x in &mut next {
            *x /= scale;
        }
        v = next;
        bracket = collatz_wielandt(&shifted, &v);
    }
    let (lo, hi) = bracket;
    if hi - lo > target_width {
        return Err(Error::SpectralEstimation {
            block: None,
            lower: lo - POWER_SHIFT,
            upper: hi - POWER_SHIFT,
        });
    }
    let est = SpectralEstimate {
        rho: 0.5 * (lo + hi) - POWER_SHIFT,
        lower: lo - POWER_SHIFT,
        upper: hi - POWER_SHIFT,
    };
    Ok((est, v))
}

/// Spectral radius of a nonnegative square matrix.
///
/// Pass `irreducible = true` when the matrix is a single strongly connected
/// block: the estimate then comes from shifted power iteration with a
/// Collatz-Wielandt bracket certificate. For a reducible matrix the radius
/// is the maximum over its irreducible diagonal blocks, which is computed
/// via the block decomposition.
pub fn spectral_radius(block: &Mat, irreducible: bool) -> Result<SpectralEstimate> {
    if !block.is_square() {
        return Err(Error::Dimension(alloc::format!(
            "spectral radius needs a square matrix, got {}x{}",
            block.rows(),
            block.cols()
        )));
    }
    if block.data().iter().any(|&x| x < 0.0) {
        return Err(Error::Domain(alloc::string::String::from(
            "spectral radius is defined here for nonnegative matrices only",
        )));
    }
    let n = block.rows();
    if n == 1 {
        let r = block[(0, 0)];
        return Ok(SpectralEstimate {
            rho: r,
            lower: r,
            upper: r,
        });
    }
    if irreducible {
        let (est, _) = power_iterate(block, 1e-10, None)?;
        return Ok(est);
    }
    // reducible path: max over irreducible blocks
    let tm = TechMatrix::new(block.clone())?;
    let btf = block_triangular_form(&tm);
    let mut best = SpectralEstimate {
        rho: 0.0,
        lower: 0.0,
        upper: 0.0,
    };
    for b in 0..btf.block_count() {
        let verts = btf.block_vertices(b);
        let sub = block.select(verts, verts);
        let est = spectral_radius(&sub, true)?;
        if est.rho > best.rho {
            best = est;
        }
    }
    Ok(best)
}

/// Positive unit eigenvector of an irreducible block with `rho = 1`.
///
/// The iterate is polished until the residual `||(I - A) v||_inf` drops to
/// machine scale, so scaled copies of the vector stay well inside the
/// solution residual budget.
pub fn perron_vector(block: &Mat) -> Result<Vec<f64>> {
    perron_vector_with_tol(block, DEFAULT_SPECTRAL_TOL)
}

/// `perron_vector` with an explicit classification tolerance.
pub fn perron_vector_with_tol(block: &Mat, tol: f64) -> Result<Vec<f64>> {
    let n = block.rows();
    if n == 1 {
        if (block[(0, 0)] - 1.0).abs() > tol {
            return Err(Error::Misuse(alloc::format!(
                "perron_vector needs rho = 1, block has rho = {}",
                block[(0, 0)]
            )));
        }
        return Ok(vec![1.0]);
    }
    let (est, mut v) = power_iterate(block, 1e-12, Some(1e-12))?;
    if (est.rho - 1.0).abs() > tol {
        return Err(Error::Misuse(alloc::format!(
            "perron_vector needs rho = 1, block has rho = {}",
            est.rho
        )));
    }
    let norm = norm2(&v);
    for x in &mut v {
        *x /= norm;
    }
    if v.iter().any(|&x| x <= 0.0) {
        return Err(Error::Inconsistency {
            residual: v.iter().fold(f64::INFINITY, |m, &x| m.min(x)),
            detail: alloc::string::String::from(
                "power iteration produced a nonpositive entry; block is not irreducible",
            ),
        });
    }
    Ok(v)
}

/// Classifies every diagonal block of the form against 1 at tolerance `tol`
/// and extracts Perron vectors for the `rho = 1` blocks.
pub fn classify_blocks(
    btf: &BlockTriangularForm,
    a: &TechMatrix,
    tol: f64,
) -> Result<SpectralClassification> {
    if !(tol > 0.0 && tol <= 0.1) {
        return Err(Error::Domain(alloc::format!(
            "spectral tolerance must lie in (0, 0.1], got {tol}"
        )));
    }
    let k = btf.block_count();
    let mut blocks = Vec::with_capacity(k);
    let mut rho_max = 0.0f64;
    let mut below = Vec::new();
    let mut at_one = Vec::new();
    let mut above = Vec::new();

    for b in 0..k {
        let verts = btf.block_vertices(b);
        let sub = a.mat().select(verts, verts);
        let est = spectral_radius(&sub, true).map_err(|e| match e {
            Error::SpectralEstimation { lower, upper, .. } => Error::SpectralEstimation {
                block: Some(b),
                lower,
                upper,
            },
            other => other,
        })?;
        let class = SpectralClass::of(est.rho, tol);
        let perron = if class == SpectralClass::One {
            Some(perron_vector_with_tol(&sub, tol)?)
        } else {
            None
        };
        rho_max = rho_max.max(est.rho);
        match class {
            SpectralClass::BelowOne => below.extend_from_slice(verts),
            SpectralClass::One => at_one.extend_from_slice(verts),
            SpectralClass::AboveOne => above.extend_from_slice(verts),
        }
        blocks.push(BlockSpectrum {
            rho: est.rho,
            class,
            bracket: (est.lower, est.upper),
            perron,
        });
    }
    below.sort_unstable();
    at_one.sort_unstable();
    above.sort_unstable();

    Ok(SpectralClassification {
        blocks,
        rho: rho_max,
        tol,
        sectors_below_one: below,
        sectors_one: at_one,
        sectors_above_one: above,
    })
}

/// Convenience: block form and classification in one call.
pub fn analyze_structure(
    a: &TechMatrix,
    tol: f64,
) -> Result<(BlockTriangularForm, SpectralClassification)> {
    let btf = block_triangular_form(a);
    let spectral = classify_blocks(&btf, a, tol)?;
    Ok((btf, spectral))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;

    fn mat(n: usize, d: &[f64]) -> Mat {
        Mat::new(n, n, d.to_vec()).unwrap()
    }

    fn tech(n: usize, d: &[f64]) -> TechMatrix {
        TechMatrix::new(mat(n, d)).unwrap()
    }

    #[test]
    fn class_boundaries_respect_tolerance() {
        let tol = 1e-9;
        assert_eq!(SpectralClass::of(1.0, tol), SpectralClass::One);
        assert_eq!(SpectralClass::of(1.0 - 0.5e-9, tol), SpectralClass::One);
        assert_eq!(SpectralClass::of(1.0 + 0.5e-9, tol), SpectralClass::One);
        assert_eq!(SpectralClass::of(1.0 - 2e-9, tol), SpectralClass::BelowOne);
        assert_eq!(SpectralClass::of(1.0 + 2e-9, tol), SpectralClass::AboveOne);
        assert_eq!(SpectralClass::of(0.96, 0.05), SpectralClass::One);
    }

    #[test]
    fn one_by_one_is_exact() {
        let est = spectral_radius(&mat(1, &[1.0]), true).unwrap();
        assert_eq!(est.rho, 1.0);
        assert_eq!(perron_vector(&mat(1, &[1.0])).unwrap(), vec![1.0]);
    }

    #[test]
    fn closed_three_sector_has_unit_radius() {
        let a = mat(
            3,
            &[
                0.25,
                0.4,
                55.0 / 300.0,
                0.14,
                0.12,
                0.1,
                0.8,
                3.6,
                40.0 / 300.0,
            ],
        );
        let est = spectral_radius(&a, true).unwrap();
        assert!((est.rho - 1.0).abs() < 1e-9, "rho = {}", est.rho);
        assert!(est.upper - est.lower <= 1e-10);
        let v = perron_vector(&a).unwrap();
        let reference = [100.0, 50.0, 300.0];
        let scale = crate::math::norm2(&reference);
        for (vi, ri) in v.iter().zip(&reference) {
            assert!((vi - ri / scale).abs() < 1e-8, "{vi} vs {}", ri / scale);
        }
    }

    #[test]
    fn open_four_sector_radius() {
        let a = mat(
            4,
            &[
                0.2, 0.5, 0.5, 0.1, 0.1, 0.2, 0.2, 0.3, 0.1, 0.1, 0.1, 0.2, 0.1, 0.1, 0.1, 0.3,
            ],
        );
        let est = spectral_radius(&a, true).unwrap();
        // independent eigenvalue computation puts the Perron root here
        assert!(
            (est.rho - 0.735735562588589).abs() < 1e-9,
            "rho = {}",
            est.rho
        );
        assert!(est.rho < 1.0);
    }

    #[test]
    fn periodic_two_cycle_converges() {
        // plain power iteration oscillates on [[0,1],[1,0]]; the shift fixes it
        let a = mat(2, &[0.0, 1.0, 1.0, 0.0]);
        let est = spectral_radius(&a, true).unwrap();
        assert!((est.rho - 1.0).abs() < 1e-9);
        let v = perron_vector(&a).unwrap();
        let s = 1.0 / crate::math::sqrt(2.0);
        assert!((v[0] - s).abs() < 1e-9 && (v[1] - s).abs() < 1e-9);
    }

    #[test]
    fn doubly_stochastic_perron() {
        let a = mat(2, &[0.5, 0.5, 0.5, 0.5]);
        let v = perron_vector(&a).unwrap();
        let s = 1.0 / crate::math::sqrt(2.0);
        assert!((v[0] - s).abs() < 1e-9 && (v[1] - s).abs() < 1e-9);
    }

    #[test]
    fn scaling_law() {
        let a = mat(3, &[0.2, 0.7, 0.1, 0.3, 0.1, 0.5, 0.4, 0.2, 0.3]);
        let base = spectral_radius(&a, true).unwrap().rho;
        for c in [0.5, 2.0, 10.0] {
            let scaled = Mat::from_fn(3, 3, |i, j| c * a[(i, j)]);
            let r = spectral_radius(&scaled, true).unwrap().rho;
            assert!((r - c * base).abs() < 1e-9 * (c * base));
        }
    }

    #[test]
    fn perron_misuse_on_sub_unit_block() {
        let a = mat(2, &[0.1, 0.2, 0.3, 0.1]);
        assert!(matches!(perron_vector(&a), Err(Error::Misuse(_))));
    }

    #[test]
    fn classify_zero_matrix() {
        let a = tech(2, &[0.0; 4]);
        let btf = crate::graph::block_triangular_form(&a);
        let cls = classify_blocks(&btf, &a, DEFAULT_SPECTRAL_TOL).unwrap();
        assert_eq!(cls.blocks.len(), 2);
        assert!(cls
            .blocks
            .iter()
            .all(|b| b.class == SpectralClass::BelowOne));
        assert_eq!(cls.sectors_below_one, vec![0, 1]);
        assert!(cls.sectors_one.is_empty());
    }

    #[test]
    fn classify_mixed_diagonal() {
        let a = tech(2, &[1.0, 0.2, 0.0, 0.5]);
        let btf = crate::graph::block_triangular_form(&a);
        let cls = classify_blocks(&btf, &a, DEFAULT_SPECTRAL_TOL).unwrap();
        assert_eq!(cls.blocks[0].class, SpectralClass::One);
        assert_eq!(cls.blocks[1].class, SpectralClass::BelowOne);
        assert_eq!(cls.sectors_one, vec![0]);
        assert_eq!(cls.sectors_below_one, vec![1]);
        assert!((cls.rho - 1.0).abs() < 1e-12);
        assert!(cls.blocks[0].perron.is_some());
        assert!(cls.blocks[1].perron.is_none());
    }

    #[test]
    fn perron_vector_commutes_with_permutation() {
        let a = mat(
            3,
            &[
                0.25,
                0.4,
                55.0 / 300.0,
                0.14,
                0.12,
                0.1,
                0.8,
                3.6,
                40.0 / 300.0,
            ],
        );
        let v = perron_vector(&a).unwrap();
        let p = crate::linalg::Permutation::new(vec![2, 0, 1]).unwrap();
        let pa = crate::linalg::apply_permutation_similarity(&a, &p).unwrap();
        let pv = perron_vector(&pa).unwrap();
        let back = p.unapply_vec(&pv);
        for (x, y) in v.iter().zip(&back) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn classify_planted_radii() {
        // block-diagonal with radii 0.3, 1.0, 1.7 planted on 2x2 blocks
        let mut d = vec![0.0; 36];
        let put = |d: &mut Vec<f64>, r: usize, c: usize, v: f64| d[r * 6 + c] = v;
        // block {0,1}: doubly stochastic scaled by 0.3
        put(&mut d, 0, 0, 0.15);
        put(&mut d, 0, 1, 0.15);
        put(&mut d, 1, 0, 0.15);
        put(&mut d, 1, 1, 0.15);
        // block {2,3}: doubly stochastic, rho exactly 1
        put(&mut d, 2, 2, 0.5);
        put(&mut d, 2, 3, 0.5);
        put(&mut d, 3, 2, 0.5);
        put(&mut d, 3, 3, 0.5);
        // block {4,5}: scaled by 1.7
        put(&mut d, 4, 4, 0.85);
        put(&mut d, 4, 5, 0.85);
        put(&mut d, 5, 4, 0.85);
        put(&mut d, 5, 5, 0.85);
        let a = tech(6, &d);
        let btf = crate::graph::block_triangular_form(&a);
        let cls = classify_blocks(&btf, &a, DEFAULT_SPECTRAL_TOL).unwrap();
        let mut classes: Vec<SpectralClass> = cls.blocks.iter().map(|b| b.class).collect();
        classes.sort_by_key(|c| match c {
            SpectralClass::BelowOne => 0,
            SpectralClass::One => 1,
            SpectralClass::AboveOne => 2,
        });
        assert_eq!(
            classes,
            vec![
                SpectralClass::BelowOne,
                SpectralClass::One,
                SpectralClass::AboveOne
            ]
        );
    }
}
