//! Witness construction for verdicts that grant uniqueness: blockwise
//! back-substitution with Perron vectors on the distinguished `rho = 1`
//! block (closed) and LU solves on `rho < 1` blocks.

use alloc::string::String;
use alloc::vec::Vec;

use crate::classify::{AnalysisVerdict, BlockStructure, DemandVector, Mode, TechMatrix};
use crate::graph::BlockTriangularForm;
use crate::math::{norm2, norm_inf};
use crate::spectral::SpectralClassification;
use crate::{Error, Result};

/// How closed-mode solutions are scaled. Open-mode solutions have a fixed
/// scale and carry no normalization.
#[derive(Debug, Clone, PartialEq)]
pub enum Normalization {
    /// Unit 2-norm.
    Unit,
    /// Same 2-norm as the reference vector (e.g. observed total outputs).
    MatchScale(Vec<f64>),
}

/// A constructed solution with its residual.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Solution in original sector order, nonnegative.
    pub x: Vec<f64>,
    pub mode: Mode,
    /// Present in closed mode only.
    pub normalization: Option<Normalization>,
    /// `||(I - A) x - d||_inf`.
    pub residual: f64,
}

fn residual_of(a: &TechMatrix, x: &[f64], d: Option<&DemandVector>) -> f64 {
    let bx = a.mat().eye_minus().mul_vec(x);
    match d {
        None => norm_inf(&bx),
        Some(dv) => bx
            .iter()
            .zip(dv.as_slice())
            .fold(0.0f64, |m, (l, r)| m.max((l - r).abs())),
    }
}

/// Solves the closed system `(I - A) x = 0` for a verdict granting a unique
/// ray: the distinguished block gets its positive Perron vector, `rho < 1`
/// blocks above it back-substitute, every other block is zero.
pub fn solve_closed(
    a: &TechMatrix,
    verdict: &AnalysisVerdict,
    spectral: &SpectralClassification,
    btf: &BlockTriangularForm,
    norm: Normalization,
) -> Result<Solution> {
    if verdict.mode != Mode::Closed {
        return Err(Error::Misuse(String::from(
            "solve_closed needs a closed-mode verdict",
        )));
    }
    if !verdict.exists_nonneg_nontrivial || !verdict.unique {
        return Err(Error::NotUnique(String::from(
            "closed solver requires a unique ray; the normalized solution set is not a point",
        )));
    }
    let distinguished = verdict.free_blocks[0];
    let st = BlockStructure::build(a, spectral, btf, 0.0);
    let x_perm = crate::classify::back_substitute(a, spectral, btf, &st, distinguished, None)?;
    let mut x = btf.perm.unapply_vec(&x_perm);

    let target = match &norm {
        Normalization::Unit => 1.0,
        Normalization::MatchScale(reference) => {
            if reference.len() != x.len() {
                return Err(Error::Dimension(String::from(
                    "reference vector length does not match the system",
                )));
            }
            norm2(reference)
        }
    };
    let scale = target / norm2(&x);
    for v in &mut x {
        *v *= scale;
    }

    let residual = residual_of(a, &x, None);
    let budget = 1e-8;
    if residual > budget * (1.0 + norm_inf(&x)) {
        return Err(Error::Inconsistency {
            residual,
            detail: String::from("closed solve residual exceeds its budget"),
        });
    }
    Ok(Solution {
        x,
        mode: Mode::Closed,
        normalization: Some(norm),
        residual,
    })
}

/// Solves the open system `(I - A) x = d` for a verdict granting a unique
/// solution, by blockwise back-substitution from the last block.
pub fn solve_open(
    a: &TechMatrix,
    d: &DemandVector,
    verdict: &AnalysisVerdict,
    spectral: &SpectralClassification,
    btf: &BlockTriangularForm,
) -> Result<Solution> {
    if verdict.mode != Mode::Open {
        return Err(Error::Misuse(String::from(
            "solve_open needs an open-mode verdict",
        )));
    }
    if !verdict.exists_nonneg_nontrivial || !verdict.unique {
        return Err(Error::NotUnique(String::from(
            "open solver requires existence and uniqueness",
        )));
    }
    let st = BlockStructure::build(a, spectral, btf, 0.0);
    let x_perm = crate::classify::back_substitute(a, spectral, btf, &st, usize::MAX, Some(d))?;
    let x = btf.perm.unapply_vec(&x_perm);

    let residual = residual_of(a, &x, Some(d));
    let budget = 1e-8 * (1.0 + norm_inf(d.as_slice()));
    if residual > budget {
        return Err(Error::Inconsistency {
            residual,
            detail: String::from("open solve residual exceeds its budget"),
        });
    }
    Ok(Solution {
        x,
        mode: Mode::Open,
        normalization: None,
        residual,
    })
}
