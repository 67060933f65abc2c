//! Dense real matrix kernel: storage, permutation similarity, LU
//! factorization with partial pivoting, solves and leading principal minors.
//!
//! Everything is dense `f64`; the target scale is a few dozen sectors, so
//! simplicity wins over asymptotics throughout.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Relative pivot threshold: a pivot below `PIVOT_RTOL * max|a_ij|` marks
/// the factorization singular.
pub const PIVOT_RTOL: f64 = 1e-12;

/// Dense row-major matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    /// Builds a matrix from row-major data, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite entry at row {}, column {}",
                pos / cols + 1,
                pos % cols + 1
            )));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// `I - self`, defined for square matrices.
    pub fn eye_minus(&self) -> Mat {
        debug_assert!(self.is_square());
        Mat::from_fn(self.rows, self.cols, |i, j| {
            let e = if i == j { 1.0 } else { 0.0 };
            e - self[(i, j)]
        })
    }

    /// Copy of the top-left `k x k` submatrix.
    pub fn leading(&self, k: usize) -> Mat {
        Mat::from_fn(k, k, |i, j| self[(i, j)])
    }

    /// Submatrix picking the given rows and columns in order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Mat {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Permutation of `n` indices, stored as the image sequence:
/// position `i` of the permuted object comes from `image[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n || seen[v] {
                return Err(Error::Domain(format!(
                    "permutation image is not a bijection on 0..{n}"
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation { image })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// Index the permuted object at `i` maps from.
    pub fn source(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.image.len()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { image: inv }
    }

    /// Reorders a vector: `out[i] = v[image[i]]`.
    pub fn apply_vec(&self, v: &[f64]) -> Vec<f64> {
        self.image.iter().map(|&s| v[s]).collect()
    }

    /// Undoes `apply_vec`.
    pub fn unapply_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (i, &s) in self.image.iter().enumerate() {
            out[s] = v[i];
        }
        out
    }
}

/// Similarity by permutation: `out[i][j] = a[p(i)][p(j)]`.
///
/// This is `P A P^-1` for the permutation matrix picking row `p(i)` into
/// row `i`; applying the inverse permutation recovers `a` exactly (pure
/// reindexing, no arithmetic).
pub fn apply_permutation_similarity(a: &Mat, p: &Permutation) -> Result<Mat> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "permutation similarity needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if p.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "permutation length {} does not match matrix size {}",
            p.len(),
            a.rows()
        )));
    }
    Ok(Mat::from_fn(a.rows(), a.cols(), |i, j| {
        a[(p.source(i), p.source(j))]
    }))
}

/// Packed LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct LuFactors {
    /// L (unit diagonal, below) and U (diagonal and above) packed together.
    lu: Mat,
    /// Row exchange at step k: row `pivots[k]` was swapped into row k.
    pivots: Vec<usize>,
    singular: bool,
    rank: usize,
    /// Sign of the row-exchange permutation, for determinants.
    perm_sign: f64,
}

impl LuFactors {
    pub fn n(&self) -> usize {
        self.lu.rows()
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Rank estimate from an independent echelon pass at the same pivot
    /// tolerance (reliable even when the plain factorization stalls).
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Determinant of the factored matrix.
    pub fn det(&self) -> f64 {
        if self.singular {
            return 0.0;
        }
        let mut d = self.perm_sign;
        for k in 0..self.n() {
            d *= self.lu[(k, k)];
        }
        d
    }

    /// Solves `A x = rhs` using the stored factors.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if self.singular {
            return Err(Error::Singular);
        }
        let n = self.n();
        if rhs.len() != n {
            return Err(Error::Dimension(format!(
                "rhs length {} does not match system size {n}",
                rhs.len()
            )));
        }
        let mut x = rhs.to_vec();
        // apply row exchanges, then forward/backward substitution
        for k in 0..n {
            x.swap(k, self.pivots[k]);
        }
        for k in 0..n {
            for i in k + 1..n {
                x[i] -= self.lu[(i, k)] * x[k];
            }
        }
        for k in (0..n).rev() {
            for j in k + 1..n {
                x[k] -= self.lu[(k, j)] * x[j];
            }
            x[k] /= self.lu[(k, k)];
        }
        Ok(x)
    }
}

/// LU factorization with partial pivoting.
///
/// The singular flag is set when a pivot falls below `PIVOT_RTOL` relative
/// to the largest input magnitude; the rank estimate always comes from a
/// column-skipping echelon pass so rank-deficient inputs report a usable
/// rank.
pub fn lu_factor(a: &Mat) -> Result<LuFactors> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "LU factorization needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let tol = pivot_tol(a);
    let mut lu = a.clone();
    let mut pivots = vec![0usize; n];
    let mut singular = false;
    let mut perm_sign = 1.0;

    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if lu[(i, k)].abs() > lu[(p, k)].abs() {
                p = i;
            }
        }
        pivots[k] = p;
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            perm_sign = -perm_sign;
        }
        let piv = lu[(k, k)];
        if piv.abs() < tol {
            singular = true;
            continue;
        }
        for i in k + 1..n {
            let m = lu[(i, k)] / piv;
            lu[(i, k)] = m;
            for j in k + 1..n {
                lu[(i, j)] -= m * lu[(k, j)];
            }
        }
    }

    let rank = rank_estimate(a, tol);
    Ok(LuFactors {
        lu,
        pivots,
        singular,
        rank,
        perm_sign,
    })
}

fn pivot_tol(a: &Mat) -> f64 {
    let scale = a.max_abs();
    if scale == 0.0 {
        f64::MIN_POSITIVE
    } else {
        PIVOT_RTOL * scale
    }
}

/// Rank via row echelon with column skipping at the given pivot tolerance.
fn rank_estimate(a: &Mat, tol: f64) -> usize {
    let mut m = a.clone();
    let (rows, cols) = (m.rows(), m.cols());
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut p = r;
        for i in r + 1..rows {
            if m[(i, c)].abs() > m[(p, c)].abs() {
                p = i;
            }
        }
        if m[(p, c)].abs() < tol {
            continue;
        }
        if p != r {
            for j in 0..cols {
                let t = m[(r, j)];
                m[(r, j)] = m[(p, j)];
                m[(p, j)] = t;
            }
        }
        for i in r + 1..rows {
            let f = m[(i, c)] / m[(r, c)];
            for j in c..cols {
                m[(i, j)] -= f * m[(r, j)];
            }
        }
        r += 1;
    }
    r
}

/// A right nullvector of a rank-deficient square matrix, extracted from a
/// column-skipping echelon form: the first skipped column becomes the free
/// variable. Unit 2-norm, first nonzero entry positive.
pub fn null_vector(a: &Mat) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "nullvector extraction needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let tol = pivot_tol(a);
    let mut m = a.clone();
    let mut pivot_col_of_row: Vec<usize> = Vec::new();
    let mut free_col = None;
    let mut r = 0;
    for c in 0..n {
        let mut p = r;
        for i in r + 1..n {
            if m[(i, c)].abs() > m[(p, c)].abs() {
                p = i;
            }
        }
        if r == n || m[(p, c)].abs() < tol {
            if free_col.is_none() {
                free_col = Some(c);
            }
            continue;
        }
        if p != r {
            for j in 0..n {
                let t = m[(r, j)];
                m[(r, j)] = m[(p, j)];
                m[(p, j)] = t;
            }
        }
        for i in r + 1..n {
            let f = m[(i, c)] / m[(r, c)];
            for j in c..n {
                m[(i, j)] -= f * m[(r, j)];
            }
        }
        pivot_col_of_row.push(c);
        r += 1;
    }
    let free = free_col.ok_or(Error::RankPrecondition {
        expected: n - 1,
        found: n,
    })?;
    let mut x = vec![0.0; n];
    x[free] = 1.0;
    for (row, &pc) in pivot_col_of_row.iter().enumerate().rev() {
        let mut s = 0.0;
        for j in pc + 1..n {
            s += m[(row, j)] * x[j];
        }
        x[pc] = -s / m[(row, pc)];
    }
    let norm = crate::math::norm2(&x);
    for v in &mut x {
        *v /= norm;
    }
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-12) {
        if *first < 0.0 {
            for v in &mut x {
                *v = -*v;
            }
        }
    }
    Ok(x)
}

/// Determinants of the leading principal submatrices `1x1 .. nxn`.
///
/// Each leading block is factored independently; this is a one-shot
/// productivity test at small n, so clarity beats reuse.
pub fn leading_principal_minors(a: &Mat) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "leading principal minors need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    (1..=a.rows())
        .map(|k| lu_factor(&a.leading(k)).map(|f| f.det()))
        .collect()
}
