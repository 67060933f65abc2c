//! Analysis engine for nonnegative linear production systems `(I - A) x = d`.
//!
//! Given a square nonnegative matrix `A` and a nonnegative demand vector `d`,
//! this crate decides whether the system has nonnegative, nontrivial or
//! strictly positive solutions, whether those solutions are unique (up to
//! positive multiples when `d = 0`), constructs the solution when it is
//! unique, and computes exact derivatives and elasticities of the solution
//! with respect to every entry of `A` and `d`.
//!
//! The analysis works on the block triangular (Frobenius) form of `A`:
//! strongly connected components of the weighted digraph of `A` become
//! irreducible diagonal blocks, ordered so that all coupling sits above the
//! block diagonal. Each block is classified by its spectral radius against 1,
//! and the existence/uniqueness verdict follows from how demand and
//! inter-block flows interact with that classification. Every verdict carries
//! certificates naming the deciding condition per block.
//!
//! The crate is `no_std`-compatible (requires `alloc`); enable the `libm`
//! feature instead of the default `std` feature for `no_std` builds.
//!
//! ```
//! use leontief_core::{
//!     block_triangular_form, classify_blocks, classify_open, solve_open,
//!     DemandVector, TechMatrix, DEFAULT_SPECTRAL_TOL,
//! };
//!
//! // two sectors, the second self-sufficient, demand only on the second
//! let a = TechMatrix::from_rows(2, vec![0.5, 0.2, 0.0, 0.4])?;
//! let d = DemandVector::new(vec![0.0, 1.0])?;
//! let btf = block_triangular_form(&a);
//! let spectral = classify_blocks(&btf, &a, DEFAULT_SPECTRAL_TOL)?;
//! let verdict = classify_open(&a, &d, &spectral, &btf, 0.0)?;
//! assert!(verdict.exists_meaningful && verdict.unique);
//!
//! let solution = solve_open(&a, &d, &verdict, &spectral, &btf)?;
//! assert!((solution.x[1] - 1.0 / 0.6).abs() < 1e-12);
//! assert!((solution.x[0] - 2.0 / 3.0).abs() < 1e-12);
//! # Ok::<(), leontief_core::Error>(())
//! ```

#![cfg_attr(not(feature = "std"), no_std)]
// index loops mirror the matrix subscripts throughout
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("leontief-core requires either the `std` or the `libm` feature");

pub mod classify;
pub mod graph;
pub mod linalg;
mod math;
pub mod oracle;
pub mod sensitivity;
pub mod solver;
pub mod spectral;

mod error;

pub use error::Error;

pub use classify::{
    classify_closed, classify_open, decompose_mc, is_productive, tech_coeffs_from_transactions,
    AnalysisVerdict, Certificate, Condition, DemandVector, McDecomposition, Mode, TechMatrix,
};
pub use graph::{
    block_triangular_form, build_digraph, graph_facts, scc, BlockTriangularForm, Digraph,
    GraphFacts, SccDecomposition,
};
pub use linalg::{
    apply_permutation_similarity, leading_principal_minors, lu_factor, LuFactors, Mat, Permutation,
};
pub use sensitivity::{
    cofactor_nullvector, derivative_closed, derivative_open, elasticity, finite_difference_oracle,
    sensitivity_sweep, ClosedDerivatives, ElasticityRecord, FdProblem, LinearFunctional,
    OpenDerivatives, ParameterIndex, SensitivityResult,
};
pub use solver::{solve_closed, solve_open, Normalization, Solution};
pub use spectral::{
    classify_blocks, perron_vector, spectral_radius, BlockSpectrum, SpectralClass,
    SpectralClassification, SpectralEstimate, DEFAULT_SPECTRAL_TOL,
};

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
