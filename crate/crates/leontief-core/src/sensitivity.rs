//! Exact derivatives and elasticities of the solution with respect to every
//! coefficient of `A` and `d`.
//!
//! Open case: `x(eps) = (I - A)^-1 d` is smooth wherever `I - A` stays
//! nonsingular, and each partial derivative solves one factored system:
//! `(I - A) dx = x_j e_i` for a coefficient `a_ij`, `(I - A) dx = e_m` for a
//! demand entry `d_m`.
//!
//! Closed case: at the base point `(I - A0) x0 = 0` with `rank(I - A0) =
//! n - 1`, perturbing a single coefficient generically destroys the exact
//! nullvector, so the differentiated object is the norm-constrained
//! least-squares solution `x(eps) = argmin ||(I - A(eps)) x||` over
//! `||x|| = ||x0||`, the smallest-singular-direction of `I - A(eps)`, which
//! equals the nullvector on the singular set and is differentiable across
//! it. Its derivative satisfies the normal equations
//!
//! ```text
//!   B0^T (B0 dx - x_j e_i) = 0,   x0^T dx = 0,      B0 = I - A0.
//! ```
//!
//! Computationally: project the right-hand side against the left nullvector
//! `z` of `B0` (the raw `x_j e_i` has `z`-component `x_j z_i != 0`, so it is
//! never in the range of `B0`), take any particular solution of the
//! projected system via an anchored reduced solve, and remove the
//! `x0`-component.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::classify::{DemandVector, TechMatrix};
use crate::linalg::{lu_factor, null_vector, LuFactors, Mat};
use crate::math::{dot, norm2, norm_inf};
use crate::{Error, Result};

/// Default central-difference step for closed-mode validation.
pub const FD_STEP_CLOSED: f64 = 1e-6;
/// Default central-difference step for open-mode validation.
pub const FD_STEP_OPEN: f64 = 1e-7;

/// One coordinate of the parameter vector
/// `eps = (a_11, ..., a_nn, d_1, ..., d_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterIndex {
    /// Entry `a_ij` (0-based row and column).
    Coefficient { row: usize, col: usize },
    /// Entry `d_m` (0-based).
    Demand { index: usize },
}

impl ParameterIndex {
    /// Flat position in the parameter vector for an `n`-sector system.
    pub fn flat(&self, n: usize) -> usize {
        match *self {
            ParameterIndex::Coefficient { row, col } => row * n + col,
            ParameterIndex::Demand { index } => n * n + index,
        }
    }

    pub fn from_flat(flat: usize, n: usize) -> Option<ParameterIndex> {
        if flat < n * n {
            Some(ParameterIndex::Coefficient {
                row: flat / n,
                col: flat % n,
            })
        } else if flat < n * n + n {
            Some(ParameterIndex::Demand {
                index: flat - n * n,
            })
        } else {
            None
        }
    }

    pub fn label(&self) -> String {
        match *self {
            ParameterIndex::Coefficient { row, col } => format!("a_{}_{}", row + 1, col + 1),
            ParameterIndex::Demand { index } => format!("d_{}", index + 1),
        }
    }
}

/// Derived variable `z = sum_m weights[m] * x_m`.
#[derive(Debug, Clone)]
pub struct LinearFunctional {
    pub name: String,
    pub weights: Vec<f64>,
}

impl LinearFunctional {
    pub fn new(name: impl Into<String>, weights: Vec<f64>) -> Self {
        LinearFunctional {
            name: name.into(),
            weights,
        }
    }

    /// The coordinate functional `z = x_m`.
    pub fn component(m: usize, n: usize) -> Self {
        let mut w = vec![0.0; n];
        w[m] = 1.0;
        LinearFunctional {
            name: format!("x_{}", m + 1),
            weights: w,
        }
    }
}

/// Dimensionless elasticity of one variable with respect to one parameter.
#[derive(Debug, Clone)]
pub struct ElasticityRecord {
    pub variable: String,
    pub parameter: ParameterIndex,
    pub value: f64,
}

/// Full sweep output: Jacobians over all parameters plus the requested
/// elasticities, at the echoed base point.
#[derive(Debug, Clone)]
pub struct SensitivityResult {
    /// Base solution the derivatives refer to.
    pub base_x: Vec<f64>,
    /// `n x n^2`: row `m`, column `i*n + j` holds `dx_m / da_ij`.
    pub jacobian_a: Vec<Vec<f64>>,
    /// `n x n`: row `m`, column `k` holds `dx_m / dd_k`. Open mode only.
    pub jacobian_d: Option<Vec<Vec<f64>>>,
    pub elasticities: Vec<ElasticityRecord>,
}

/// Elasticity `E = (eps / z0) * dz`.
pub fn elasticity(z0: f64, dz: f64, eps: f64) -> Result<f64> {
    if z0 == 0.0 {
        return Err(Error::UndefinedElasticity);
    }
    Ok(eps / z0 * dz)
}

/// Reusable closed-mode derivative solver: one anchored factorization and
/// one left nullvector serve every parameter.
pub struct ClosedDerivatives {
    b: Mat,
    /// Unit left nullvector of `b`.
    z: Vec<f64>,
    anchored: LuFactors,
    anchor: usize,
    x0: Vec<f64>,
    x0_norm_sq: f64,
}

impl ClosedDerivatives {
    pub fn new(a: &TechMatrix, x0: &[f64]) -> Result<Self> {
        let n = a.n();
        if x0.len() != n {
            return Err(Error::Dimension(format!(
                "base solution length {} does not match {n} sectors",
                x0.len()
            )));
        }
        let b = a.mat().eye_minus();
        let f = lu_factor(&b)?;
        if f.rank() != n - 1 {
            return Err(Error::RankPrecondition {
                expected: n - 1,
                found: f.rank(),
            });
        }
        let z = null_vector(&b.transpose())?;
        // anchor at the largest base component; zeroing its row and column
        // leaves a nonsingular reduced system when the ray is simple
        let anchor = x0
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().total_cmp(&b.abs()))
            .map(|(i, _)| i)
            .expect("nonempty base solution");
        let mut m = b.clone();
        for j in 0..n {
            m[(anchor, j)] = 0.0;
            m[(j, anchor)] = 0.0;
        }
        m[(anchor, anchor)] = 1.0;
        let anchored = lu_factor(&m)?;
        if anchored.is_singular() {
            return Err(Error::NumericalDegeneracy(String::from(
                "anchored reduced system is singular",
            )));
        }
        Ok(ClosedDerivatives {
            b,
            z,
            anchored,
            anchor,
            x0: x0.to_vec(),
            x0_norm_sq: dot(x0, x0),
        })
    }

    /// `dx/da_ij` of the norm-constrained solution.
    pub fn derivative(&self, row: usize, col: usize) -> Result<Vec<f64>> {
        let n = self.x0.len();
        if row >= n || col >= n {
            return Err(Error::Dimension(format!(
                "coefficient index ({}, {}) out of range for n = {n}",
                row + 1,
                col + 1
            )));
        }
        let mut rhs = vec![0.0; n];
        rhs[row] = self.x0[col];
        // range projection: remove the left-nullvector component
        let zb = dot(&self.z, &rhs);
        for (r, zi) in rhs.iter_mut().zip(&self.z) {
            *r -= zb * zi;
        }
        rhs[self.anchor] = 0.0;
        let v = self.anchored.solve(&rhs)?;
        // norm constraint: remove the x0-component
        let c = -dot(&self.x0, &v) / self.x0_norm_sq;
        Ok(v.iter().zip(&self.x0).map(|(vi, xi)| vi + c * xi).collect())
    }

    pub fn base(&self) -> &[f64] {
        &self.x0
    }

    /// Residual of the normal equations at a computed derivative, for
    /// verification: `||B^T (B dx - x_j e_i)||_inf`.
    pub fn normal_residual(&self, row: usize, col: usize, dx: &[f64]) -> f64 {
        let n = self.x0.len();
        let mut r = self.b.mul_vec(dx);
        r[row] -= self.x0[col];
        let bt = self.b.transpose();
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += bt[(i, j)] * r[j];
            }
            worst = worst.max(s.abs());
        }
        worst
    }
}

/// Reusable open-mode derivative solver: one LU factorization serves every
/// parameter.
pub struct OpenDerivatives {
    lu: LuFactors,
    x0: Vec<f64>,
}

impl OpenDerivatives {
    pub fn new(a: &TechMatrix, x0: &[f64]) -> Result<Self> {
        let n = a.n();
        if x0.len() != n {
            return Err(Error::Dimension(format!(
                "base solution length {} does not match {n} sectors",
                x0.len()
            )));
        }
        let lu = lu_factor(&a.mat().eye_minus())?;
        if lu.is_singular() {
            return Err(Error::Singular);
        }
        Ok(OpenDerivatives {
            lu,
            x0: x0.to_vec(),
        })
    }

    pub fn derivative(&self, p: ParameterIndex) -> Result<Vec<f64>> {
        let n = self.x0.len();
        let mut rhs = vec![0.0; n];
        match p {
            ParameterIndex::Coefficient { row, col } => {
                if row >= n || col >= n {
                    return Err(Error::Dimension(format!(
                        "coefficient index ({}, {}) out of range for n = {n}",
                        row + 1,
                        col + 1
                    )));
                }
                rhs[row] = self.x0[col];
            }
            ParameterIndex::Demand { index } => {
                if index >= n {
                    return Err(Error::Dimension(format!(
                        "demand index {} out of range for n = {n}",
                        index + 1
                    )));
                }
                rhs[index] = 1.0;
            }
        }
        self.lu.solve(&rhs)
    }

    pub fn base(&self) -> &[f64] {
        &self.x0
    }
}

/// Convenience wrapper: one closed-mode derivative.
pub fn derivative_closed(a: &TechMatrix, x0: &[f64], row: usize, col: usize) -> Result<Vec<f64>> {
    ClosedDerivatives::new(a, x0)?.derivative(row, col)
}

/// Convenience wrapper: one open-mode derivative.
pub fn derivative_open(a: &TechMatrix, x0: &[f64], p: ParameterIndex) -> Result<Vec<f64>> {
    OpenDerivatives::new(a, x0)?.derivative(p)
}

/// Full Jacobians plus elasticities for the requested derived variables.
///
/// Closed mode (`d = None`): parameters are the `n^2` coefficients.
/// Open mode: the `n` demand entries join the parameter vector.
pub fn sensitivity_sweep(
    a: &TechMatrix,
    d: Option<&DemandVector>,
    x0: &[f64],
    functionals: &[LinearFunctional],
) -> Result<SensitivityResult> {
    let n = a.n();
    for f in functionals {
        if f.weights.len() != n {
            return Err(Error::Dimension(format!(
                "functional '{}' has {} weights for {n} sectors",
                f.name,
                f.weights.len()
            )));
        }
    }

    let mut jacobian_a = vec![vec![0.0; n * n]; n];
    let mut jacobian_d = None;
    let mut columns: Vec<(ParameterIndex, f64, Vec<f64>)> = Vec::with_capacity(n * n + n);

    match d {
        None => {
            let ctx = ClosedDerivatives::new(a, x0)?;
            for i in 0..n {
                for j in 0..n {
                    let dx = ctx.derivative(i, j)?;
                    for m in 0..n {
                        jacobian_a[m][i * n + j] = dx[m];
                    }
                    columns.push((
                        ParameterIndex::Coefficient { row: i, col: j },
                        a.entry(i, j),
                        dx,
                    ));
                }
            }
        }
        Some(dv) => {
            if dv.len() != n {
                return Err(Error::Dimension(format!(
                    "demand length {} does not match {n} sectors",
                    dv.len()
                )));
            }
            let ctx = OpenDerivatives::new(a, x0)?;
            for i in 0..n {
                for j in 0..n {
                    let p = ParameterIndex::Coefficient { row: i, col: j };
                    let dx = ctx.derivative(p)?;
                    for m in 0..n {
                        jacobian_a[m][i * n + j] = dx[m];
                    }
                    columns.push((p, a.entry(i, j), dx));
                }
            }
            let mut jd = vec![vec![0.0; n]; n];
            for k in 0..n {
                let p = ParameterIndex::Demand { index: k };
                let dx = ctx.derivative(p)?;
                for m in 0..n {
                    jd[m][k] = dx[m];
                }
                columns.push((p, dv.as_slice()[k], dx));
            }
            jacobian_d = Some(jd);
        }
    }

    let mut elasticities = Vec::with_capacity(functionals.len() * columns.len());
    for f in functionals {
        let z0 = dot(&f.weights, x0);
        for (p, eps, dx) in &columns {
            let dz = dot(&f.weights, dx);
            elasticities.push(ElasticityRecord {
                variable: f.name.clone(),
                parameter: *p,
                value: elasticity(z0, dz, *eps)?,
            });
        }
    }

    Ok(SensitivityResult {
        base_x: x0.to_vec(),
        jacobian_a,
        jacobian_d,
        elasticities,
    })
}

/// Nullvector of a rank-(n-1) matrix via explicit cofactors: `y_k` is the
/// cofactor of entry `(r, k)` along a zeroed-out row `r`. The last row is
/// tried first; rows whose deletion drops the rank yield the zero vector and
/// are skipped. Unit 2-norm, first nonzero entry positive.
///
/// This is an independent oracle for the factorization-based routes; cost
/// grows like n^5, intended for small n.
pub fn cofactor_nullvector(dmat: &Mat) -> Result<Vec<f64>> {
    if !dmat.is_square() {
        return Err(Error::Dimension(format!(
            "cofactor nullvector needs a square matrix, got {}x{}",
            dmat.rows(),
            dmat.cols()
        )));
    }
    let n = dmat.rows();
    let f = lu_factor(dmat)?;
    if f.rank() != n - 1 {
        return Err(Error::RankPrecondition {
            expected: n - 1,
            found: f.rank(),
        });
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }

    // The cofactor row must leave n-1 independent rows behind; the last row
    // is the canonical choice, other rows are fallbacks for inputs whose
    // dependent row sits elsewhere. All candidates are parallel, so the
    // first one passing the residual check wins.
    let scale = dmat.max_abs().max(1.0);
    for r in (0..n).rev() {
        let rows: Vec<usize> = (0..n).filter(|&i| i != r).collect();
        let mut y = vec![0.0; n];
        for k in 0..n {
            let cols: Vec<usize> = (0..n).filter(|&j| j != k).collect();
            let minor = dmat.select(&rows, &cols);
            let det = lu_factor(&minor)?.det();
            let sign = if (r + k) % 2 == 0 { 1.0 } else { -1.0 };
            y[k] = sign * det;
        }
        let norm = norm2(&y);
        if norm == 0.0 {
            continue;
        }
        for v in &mut y {
            *v /= norm;
        }
        if let Some(first) = y.iter().find(|v| v.abs() > 1e-12) {
            if *first < 0.0 {
                for v in &mut y {
                    *v = -*v;
                }
            }
        }
        let residual = norm_inf(&dmat.mul_vec(&y));
        if residual <= 1e-8 * scale {
            return Ok(y);
        }
    }
    Err(Error::NumericalDegeneracy(String::from(
        "no cofactor row produced a nullvector within the residual budget",
    )))
}

/// Problem description for the finite-difference oracle.
pub enum FdProblem<'a> {
    /// Homogeneous system; the perturbed solution is the
    /// smallest-singular-direction of `I - A(eps)`, sign-aligned with and
    /// scaled to the reference.
    Closed {
        a: &'a TechMatrix,
        reference: &'a [f64],
    },
    /// Demand-driven system; the perturbed solution is the direct solve.
    Open {
        a: &'a TechMatrix,
        d: &'a DemandVector,
    },
}

/// Central finite difference of the solution along one parameter.
///
/// Validation oracle for the analytic derivatives: second-order accurate,
/// kept entirely independent of the factored-solve paths above (fresh
/// factorizations at the perturbed points, nullvector fallback on the
/// singular set).
pub fn finite_difference_oracle(
    problem: &FdProblem<'_>,
    p: ParameterIndex,
    h: f64,
) -> Result<Vec<f64>> {
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::Domain(String::from("step must be positive")));
    }
    match problem {
        FdProblem::Closed { a, reference } => {
            let (row, col) = match p {
                ParameterIndex::Coefficient { row, col } => (row, col),
                ParameterIndex::Demand { .. } => {
                    return Err(Error::Misuse(String::from(
                        "closed systems have no demand parameters",
                    )))
                }
            };
            let plus =
                constrained_ls_solution(&perturbed(a.mat(), row, col, h).eye_minus(), reference)?;
            let minus =
                constrained_ls_solution(&perturbed(a.mat(), row, col, -h).eye_minus(), reference)?;
            Ok(central(&plus, &minus, h))
        }
        FdProblem::Open { a, d } => {
            let solve = |am: &Mat, dm: &[f64]| -> Result<Vec<f64>> {
                let f = lu_factor(&am.eye_minus())?;
                if f.is_singular() {
                    return Err(Error::OracleInvalid(String::from(
                        "perturbed system is singular; solution not unique there",
                    )));
                }
                f.solve(dm)
            };
            let (plus, minus) = match p {
                ParameterIndex::Coefficient { row, col } => (
                    solve(&perturbed(a.mat(), row, col, h), d.as_slice())?,
                    solve(&perturbed(a.mat(), row, col, -h), d.as_slice())?,
                ),
                ParameterIndex::Demand { index } => {
                    let mut dp = d.as_slice().to_vec();
                    let mut dm = d.as_slice().to_vec();
                    dp[index] += h;
                    dm[index] -= h;
                    (solve(a.mat(), &dp)?, solve(a.mat(), &dm)?)
                }
            };
            Ok(central(&plus, &minus, h))
        }
    }
}

fn perturbed(a: &Mat, row: usize, col: usize, h: f64) -> Mat {
    let mut m = a.clone();
    m[(row, col)] += h;
    m
}

fn central(plus: &[f64], minus: &[f64], h: f64) -> Vec<f64> {
    plus.iter()
        .zip(minus)
        .map(|(p, m)| (p - m) / (2.0 * h))
        .collect()
}

/// Norm-constrained least-squares solution of `b x = 0`: the singular
/// direction for the smallest singular value, sign-aligned with the
/// reference and scaled to its 2-norm. Inverse iteration on `b^T b` does
/// the work; an exactly singular `b` short-circuits to direct nullvector
/// extraction.
fn constrained_ls_solution(b: &Mat, reference: &[f64]) -> Result<Vec<f64>> {
    let f = lu_factor(b)?;
    let mut v: Vec<f64> = if f.is_singular() {
        null_vector(b)?
    } else {
        let ft = lu_factor(&b.transpose())?;
        let mut v = reference.to_vec();
        let norm = norm2(&v);
        for x in &mut v {
            *x /= norm;
        }
        // smallest singular value is O(h) against an O(1) spectral gap, so
        // a few iterations reach machine precision
        for _ in 0..6 {
            let y = ft.solve(&v)?;
            let mut w = f.solve(&y)?;
            let norm = norm2(&w);
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::NumericalDegeneracy(String::from(
                    "inverse iteration collapsed",
                )));
            }
            for x in &mut w {
                *x /= norm;
            }
            v = w;
        }
        v
    };
    if dot(&v, reference) < 0.0 {
        for x in &mut v {
            *x = -*x;
        }
    }
    let scale = norm2(reference);
    for x in &mut v {
        *x *= scale;
    }
    Ok(v)
}
