//! The verdict engine: productivity test, transaction-matrix decomposition,
//! and existence/uniqueness classification for the closed (`d = 0`) and open
//! (`d != 0`) systems, with per-block certificates.
//!
//! Verdicts are decided on the block triangular form by propagating the
//! support of the solution from the last block backwards, mirroring the
//! blockwise back-substitution the solver performs:
//!
//! * a block with `rho < 1` turns positive iff it receives demand or flow
//!   from a positive later block;
//! * a block with `rho >= 1` tolerates no incoming flow at all: nonzero
//!   aggregate right-hand side there kills existence;
//! * a block with `rho = 1` and zero right-hand side carries a free Perron
//!   ray unless some `rho >= 1` block upstream would receive its flow
//!   (possibly through a chain of `rho < 1` blocks), which pins it to zero.
//!
//! Free rays are exactly the degrees of freedom of the nonnegative solution
//! set, so existence and uniqueness reduce to counting them.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::BlockTriangularForm;
use crate::linalg::{leading_principal_minors, lu_factor, Mat};
use crate::math::norm_inf;
use crate::spectral::{SpectralClass, SpectralClassification};
use crate::{Error, Result};

/// Square nonnegative matrix of technical coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TechMatrix {
    mat: Mat,
}

impl TechMatrix {
    pub fn new(mat: Mat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Dimension(format!(
                "technical coefficients must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        for i in 0..mat.rows() {
            for j in 0..mat.cols() {
                if mat[(i, j)] < 0.0 {
                    return Err(Error::Domain(format!(
                        "negative coefficient {} at row {}, column {}",
                        mat[(i, j)],
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(TechMatrix { mat })
    }

    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        TechMatrix::new(Mat::new(n, n, data)?)
    }

    pub fn n(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.mat[(i, j)]
    }
}

/// Nonnegative final-demand vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandVector {
    entries: Vec<f64>,
}

impl DemandVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        for (i, &v) in entries.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "demand entry {} for sector S_{} must be finite and nonnegative",
                    v,
                    i + 1
                )));
            }
        }
        Ok(DemandVector { entries })
    }

    pub fn zeros(n: usize) -> Self {
        DemandVector {
            entries: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    /// Blocks with a positive demand entry, recomputed from the given form
    /// (never stored, so it cannot go stale).
    pub fn positive_blocks(&self, btf: &BlockTriangularForm) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, _)| btf.block_of[i])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// `A = M C` split into observed transactions and the diagonal scaling.
#[derive(Debug, Clone)]
pub struct McDecomposition {
    /// Transaction matrix `M`.
    pub transactions: Mat,
    /// Diagonal of `C`: `c_ii = 1 / (row sum of M_i + d_i)`.
    pub scaling: Vec<f64>,
}

/// Derives technical coefficients from a transaction table and demand:
/// `a_ij = m_ij / (row sum of M_j + d_j)`.
pub fn tech_coeffs_from_transactions(
    m: &Mat,
    d: &DemandVector,
) -> Result<(TechMatrix, McDecomposition)> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "transaction matrix must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if d.len() != n {
        return Err(Error::Dimension(format!(
            "demand length {} does not match {n} sectors",
            d.len()
        )));
    }
    for i in 0..n {
        for j in 0..n {
            if m[(i, j)] < 0.0 {
                return Err(Error::Domain(format!(
                    "negative transaction at row {}, column {}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let mut scaling = Vec::with_capacity(n);
    for i in 0..n {
        let total: f64 = m.row(i).iter().sum::<f64>() + d.as_slice()[i];
        if total <= 0.0 {
            return Err(Error::DegenerateSector { sector: i });
        }
        scaling.push(1.0 / total);
    }
    let a = Mat::from_fn(n, n, |i, j| m[(i, j)] * scaling[j]);
    Ok((
        TechMatrix::new(a)?,
        McDecomposition {
            transactions: m.clone(),
            scaling,
        },
    ))
}

/// Hawkins-Simon test: `A` is productive iff every leading principal minor
/// of `I - A` is positive. Returns the flag and the minors for reporting.
pub fn is_productive(a: &TechMatrix) -> (bool, Vec<f64>) {
    let minors =
        leading_principal_minors(&a.mat().eye_minus()).expect("I - A is square by construction");
    let flag = minors.iter().all(|&m| m > 0.0);
    (flag, minors)
}

/// Recovers the transaction split from a known positive solution:
/// `M = A diag(x)`, `c_ii = 1 / x_i`.
pub fn decompose_mc(a: &TechMatrix, x: &[f64], d: &DemandVector) -> Result<McDecomposition> {
    let n = a.n();
    if x.len() != n || d.len() != n {
        return Err(Error::Dimension(format!(
            "solution/demand length must be {n}"
        )));
    }
    if x.iter().any(|&v| v <= 0.0) {
        return Err(Error::Domain(String::from(
            "decompose_mc needs a strictly positive solution",
        )));
    }
    let bx = a.mat().eye_minus().mul_vec(x);
    let residual = bx
        .iter()
        .zip(d.as_slice())
        .fold(0.0f64, |m, (l, r)| m.max((l - r).abs()));
    let scale = 1.0 + norm_inf(x).max(norm_inf(d.as_slice()));
    if residual > 1e-8 * scale {
        return Err(Error::NotASolution { residual });
    }
    let m = Mat::from_fn(n, n, |i, j| a.entry(i, j) * x[j]);
    let scaling = x.iter().map(|&v| 1.0 / v).collect();
    Ok(McDecomposition {
        transactions: m,
        scaling,
    })
}

/// Analysis mode: homogeneous (`d = 0`) or with external demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Closed,
    Open,
}

/// Condition labels used by the certificates. `ECn`/`UCn` are the closed
/// existence/uniqueness conditions, `EOn`/`UOn` the open ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[allow(clippy::upper_case_acronyms)]
pub enum Condition {
    EC1,
    EC2,
    EC3,
    EC4,
    EC5,
    EC6,
    EC7,
    UC1,
    UC2,
    UC3,
    EO1,
    EO2,
    EO3,
    EO4,
    EO5,
    EO6,
    EO7,
    UO1,
    UO2,
    UO3,
}

impl Condition {
    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::EC1 => "EC1",
            Condition::EC2 => "EC2",
            Condition::EC3 => "EC3",
            Condition::EC4 => "EC4",
            Condition::EC5 => "EC5",
            Condition::EC6 => "EC6",
            Condition::EC7 => "EC7",
            Condition::UC1 => "UC1",
            Condition::UC2 => "UC2",
            Condition::UC3 => "UC3",
            Condition::EO1 => "EO1",
            Condition::EO2 => "EO2",
            Condition::EO3 => "EO3",
            Condition::EO4 => "EO4",
            Condition::EO5 => "EO5",
            Condition::EO6 => "EO6",
            Condition::EO7 => "EO7",
            Condition::UO1 => "UO1",
            Condition::UO2 => "UO2",
            Condition::UO3 => "UO3",
        }
    }
}

/// One audited check: which condition, which block (and partner block when
/// the check concerns a coupling), outcome, and a human-readable reason in
/// canonical block order.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub condition: Condition,
    /// Block index in canonical order (0-based), when block-specific.
    pub block: Option<usize>,
    /// Partner block for coupling checks.
    pub related_block: Option<usize>,
    pub satisfied: bool,
    pub reason: String,
}

/// Existence/uniqueness verdict with certificates and, when some solution
/// exists, a witness.
#[derive(Debug, Clone)]
pub struct AnalysisVerdict {
    pub mode: Mode,
    /// Some solution with every entry strictly positive exists.
    pub exists_meaningful: bool,
    /// Some nonnegative, nontrivial solution exists.
    pub exists_nonneg_nontrivial: bool,
    /// Closed: unique up to positive multiples. Open: exactly one solution.
    pub unique: bool,
    pub certificates: Vec<Certificate>,
    /// A nonnegative nontrivial solution (unit 2-norm in closed mode),
    /// present exactly when `exists_nonneg_nontrivial` is true.
    pub witness: Option<Vec<f64>>,
    /// Blocks carrying a free Perron ray, canonical order. Closed-unique
    /// verdicts have exactly one; open-unique verdicts have none.
    pub free_blocks: Vec<usize>,
}

/// Block-level structure shared by the closed and open engines.
pub(crate) struct BlockStructure {
    pub k: usize,
    /// `edge[j][l]`: some entry of the off-diagonal block `(j, l)` exceeds
    /// `support_eps`, meaning block `j` supplies block `l`. Only `l > j` holds.
    pub edge: Vec<Vec<bool>>,
    pub class: Vec<SpectralClass>,
}

impl BlockStructure {
    pub fn build(
        a: &TechMatrix,
        spectral: &SpectralClassification,
        btf: &BlockTriangularForm,
        support_eps: f64,
    ) -> Self {
        let k = btf.block_count();
        let mut edge = vec![vec![false; k]; k];
        for j in 0..k {
            let rows = btf.block_vertices(j);
            for l in 0..k {
                if l == j {
                    continue;
                }
                let cols = btf.block_vertices(l);
                let coupled = rows
                    .iter()
                    .any(|&r| cols.iter().any(|&c| a.entry(r, c) > support_eps));
                edge[j][l] = coupled;
            }
        }
        let class = spectral.blocks.iter().map(|b| b.class).collect();
        BlockStructure { k, edge, class }
    }

    fn is_closure(&self, b: usize) -> bool {
        (0..self.k).all(|l| l == b || !self.edge[b][l])
    }

    /// True when pushing flow out of block `i` reaches some `rho >= 1`
    /// block through a chain of `rho < 1` blocks; the pinning block is
    /// returned for the certificate.
    fn pinned_by(&self, i: usize) -> Option<usize> {
        let mut seen = vec![false; self.k];
        let mut frontier = vec![i];
        seen[i] = true;
        while let Some(s) = frontier.pop() {
            for j in 0..self.k {
                if self.edge[j][s] && !seen[j] {
                    if self.class[j] != SpectralClass::BelowOne {
                        return Some(j);
                    }
                    seen[j] = true;
                    frontier.push(j);
                }
            }
        }
        None
    }
}

/// Outcome of the support-propagation pass.
pub(crate) struct SupportAnalysis {
    /// `None` when feasible; otherwise the `rho >= 1` block that receives
    /// nonzero aggregate right-hand side, with the offending source.
    pub infeasible: Option<(usize, FlowSource)>,
    /// `rho = 1` blocks with zero forced right-hand side and no pinning
    /// block upstream: each carries a free Perron ray.
    pub free: Vec<usize>,
    /// For pinned `rho = 1` blocks, the pinning block (certificate data).
    pub pinned: Vec<(usize, usize)>,
    /// Blocks that are strictly positive in the maximal-support solution
    /// (all free rays switched on).
    pub positive_able: Vec<bool>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum FlowSource {
    OwnDemand,
    FromBlock(usize),
}

pub(crate) fn propagate_support(st: &BlockStructure, demand_block: &[bool]) -> SupportAnalysis {
    let k = st.k;
    let mut forced = vec![false; k];
    let mut infeasible = None;
    for j in (0..k).rev() {
        let mut source = None;
        if demand_block[j] {
            source = Some(FlowSource::OwnDemand);
        } else {
            for l in j + 1..k {
                if st.edge[j][l] && forced[l] {
                    source = Some(FlowSource::FromBlock(l));
                    break;
                }
            }
        }
        match (st.class[j], source) {
            (SpectralClass::BelowOne, Some(_)) => forced[j] = true,
            (SpectralClass::BelowOne, None) => {}
            (_, Some(src)) => {
                if infeasible.is_none() {
                    infeasible = Some((j, src));
                }
            }
            (_, None) => {}
        }
    }

    let mut free = Vec::new();
    let mut pinned = Vec::new();
    for i in 0..k {
        if st.class[i] != SpectralClass::One {
            continue;
        }
        let has_rhs = demand_block[i] || (i + 1..k).any(|l| st.edge[i][l] && forced[l]);
        if has_rhs {
            continue; // infeasibility already recorded in the forced pass
        }
        match st.pinned_by(i) {
            Some(j) => pinned.push((i, j)),
            None => free.push(i),
        }
    }

    // maximal support: free rays on, then positivity climbs upstream
    // through rho < 1 blocks
    let mut positive_able = vec![false; k];
    for j in (0..k).rev() {
        if free.contains(&j) || forced[j] {
            positive_able[j] = true;
        } else if st.class[j] == SpectralClass::BelowOne {
            positive_able[j] =
                demand_block[j] || (j + 1..k).any(|l| st.edge[j][l] && positive_able[l]);
        }
    }

    SupportAnalysis {
        infeasible,
        free,
        pinned,
        positive_able,
    }
}

fn block_label(btf: &BlockTriangularForm, b: usize) -> String {
    let sectors: Vec<String> = btf
        .block_vertices(b)
        .iter()
        .map(|&v| format!("S_{}", v + 1))
        .collect();
    format!("block {} ({})", b + 1, sectors.join(","))
}

/// Closed-case classification of `(I - A) x = 0`.
///
/// `support_eps` is the threshold under which off-diagonal couplings count
/// as zero; data is normally exact, so 0 is the right default.
pub fn classify_closed(
    a: &TechMatrix,
    spectral: &SpectralClassification,
    btf: &BlockTriangularForm,
    support_eps: f64,
) -> AnalysisVerdict {
    let st = BlockStructure::build(a, spectral, btf, support_eps);
    let demand_block = vec![false; st.k];
    let sup = propagate_support(&st, &demand_block);
    let mut certificates = Vec::new();

    // EC3: rho(A) = 1 and every rho = 1 block is a closure <=> some x > 0.
    let mut meaningful = true;
    let mut any_one = false;
    for b in 0..st.k {
        match st.class[b] {
            SpectralClass::AboveOne => {
                meaningful = false;
                certificates.push(Certificate {
                    condition: Condition::EC3,
                    block: Some(b),
                    related_block: None,
                    satisfied: false,
                    reason: format!(
                        "{} has rho = {} > 1; no positive equilibrium can scale it",
                        block_label(btf, b),
                        spectral.blocks[b].rho
                    ),
                });
            }
            SpectralClass::One => {
                any_one = true;
                let mut violated = false;
                for l in 0..st.k {
                    if l != b && st.edge[b][l] {
                        violated = true;
                        meaningful = false;
                        certificates.push(Certificate {
                            condition: Condition::EC3,
                            block: Some(b),
                            related_block: Some(l),
                            satisfied: false,
                            reason: format!(
                                "{} has rho = 1 but supplies {}; its equation then forces that flow to zero",
                                block_label(btf, b),
                                block_label(btf, l)
                            ),
                        });
                    }
                }
                if !violated {
                    certificates.push(Certificate {
                        condition: Condition::EC3,
                        block: Some(b),
                        related_block: None,
                        satisfied: true,
                        reason: format!(
                            "{} has rho = 1 and is a closure (no direct successors)",
                            block_label(btf, b)
                        ),
                    });
                }
            }
            SpectralClass::BelowOne => {
                if st.is_closure(b) {
                    meaningful = false;
                    certificates.push(Certificate {
                        condition: Condition::EC3,
                        block: Some(b),
                        related_block: None,
                        satisfied: false,
                        reason: format!(
                            "{} is a closure with rho = {} < 1, so its output is forced to zero",
                            block_label(btf, b),
                            spectral.blocks[b].rho
                        ),
                    });
                }
            }
        }
    }
    if !any_one {
        meaningful = false;
        certificates.push(Certificate {
            condition: Condition::EC3,
            block: None,
            related_block: None,
            satisfied: false,
            reason: String::from("no block has rho = 1, so rho(A) != 1"),
        });
    }

    // EC6: free rays exist
    for &i in &sup.free {
        certificates.push(Certificate {
            condition: Condition::EC6,
            block: Some(i),
            related_block: None,
            satisfied: true,
            reason: format!(
                "{} has rho = 1 and every chain of suppliers above it stays below rho = 1; its Perron ray extends to a nonnegative solution",
                block_label(btf, i)
            ),
        });
    }
    for &(i, j) in &sup.pinned {
        certificates.push(Certificate {
            condition: Condition::EC6,
            block: Some(i),
            related_block: Some(j),
            satisfied: false,
            reason: format!(
                "{} has rho = 1 but its flow reaches {} (rho >= 1), which forces the ray to zero",
                block_label(btf, i),
                block_label(btf, j)
            ),
        });
    }
    let exists = !sup.free.is_empty();
    if sup.free.is_empty() && sup.pinned.is_empty() {
        certificates.push(Certificate {
            condition: Condition::EC6,
            block: None,
            related_block: None,
            satisfied: false,
            reason: String::from(
                "no block with rho = 1 can carry a free ray; only the trivial solution remains",
            ),
        });
    }

    let unique = sup.free.len() == 1;
    certificates.push(Certificate {
        condition: Condition::UC2,
        block: sup.free.first().copied(),
        related_block: None,
        satisfied: unique,
        reason: match sup.free.len() {
            0 => String::from("no admissible block carries a free ray"),
            1 => format!(
                "exactly one free ray, carried by {}",
                block_label(btf, sup.free[0])
            ),
            m => format!("{m} independent free rays exist, so the solution set is a cone"),
        },
    });

    let witness = if exists {
        Some(construct_witness_closed(a, spectral, btf, &st, &sup))
    } else {
        None
    };

    AnalysisVerdict {
        mode: Mode::Closed,
        exists_meaningful: meaningful,
        exists_nonneg_nontrivial: exists,
        unique,
        certificates,
        witness,
        free_blocks: sup.free,
    }
}

/// Open-case classification of `(I - A) x = d`, `d != 0`.
pub fn classify_open(
    a: &TechMatrix,
    d: &DemandVector,
    spectral: &SpectralClassification,
    btf: &BlockTriangularForm,
    support_eps: f64,
) -> Result<AnalysisVerdict> {
    if d.len() != a.n() {
        return Err(Error::Dimension(format!(
            "demand length {} does not match {} sectors",
            d.len(),
            a.n()
        )));
    }
    if d.is_zero() {
        return Err(Error::ModeMisuse(String::from(
            "demand is identically zero; analyze the closed system instead",
        )));
    }
    let st = BlockStructure::build(a, spectral, btf, support_eps);
    let mut demand_block = vec![false; st.k];
    for &b in &d.positive_blocks(btf) {
        demand_block[b] = true;
    }
    let sup = propagate_support(&st, &demand_block);
    let mut certificates = Vec::new();

    // EO6: existence <=> demand-driven flow never reaches a rho >= 1 block
    let exists = sup.infeasible.is_none();
    match sup.infeasible {
        None => {
            certificates.push(Certificate {
                condition: Condition::EO6,
                block: None,
                related_block: None,
                satisfied: true,
                reason: String::from("every block reached by demand-driven flow has rho < 1"),
            });
        }
        Some((b, FlowSource::OwnDemand)) => {
            certificates.push(Certificate {
                condition: Condition::EO6,
                block: Some(b),
                related_block: None,
                satisfied: false,
                reason: format!(
                    "{} has rho = {} >= 1 but carries positive demand, which its equation cannot absorb",
                    block_label(btf, b),
                    spectral.blocks[b].rho
                ),
            });
        }
        Some((b, FlowSource::FromBlock(l))) => {
            certificates.push(Certificate {
                condition: Condition::EO6,
                block: Some(b),
                related_block: Some(l),
                satisfied: false,
                reason: format!(
                    "{} has rho = {} >= 1 and supplies {}, whose demand-driven positive output lands on an equation that cannot absorb it",
                    block_label(btf, b),
                    spectral.blocks[b].rho,
                    block_label(btf, l)
                ),
            });
        }
    }

    // UO2: uniqueness <=> no free rays survive
    let unique = exists && sup.free.is_empty();
    for &i in &sup.free {
        certificates.push(Certificate {
            condition: Condition::UO2,
            block: Some(i),
            related_block: None,
            satisfied: false,
            reason: format!(
                "{} has rho = 1, receives nothing, and no rho >= 1 block above pins it: its Perron ray is a free direction",
                block_label(btf, i)
            ),
        });
    }
    for &(i, j) in &sup.pinned {
        certificates.push(Certificate {
            condition: Condition::UO2,
            block: Some(i),
            related_block: Some(j),
            satisfied: true,
            reason: format!(
                "{} (rho = 1) is pinned to zero by {} (rho >= 1) upstream",
                block_label(btf, i),
                block_label(btf, j)
            ),
        });
    }
    if exists && sup.free.is_empty() && sup.pinned.is_empty() {
        certificates.push(Certificate {
            condition: Condition::UO2,
            block: None,
            related_block: None,
            satisfied: true,
            reason: String::from("no block can carry a free ray; the solution is a single point"),
        });
    }
    if !exists {
        certificates.push(Certificate {
            condition: Condition::UO2,
            block: None,
            related_block: None,
            satisfied: false,
            reason: String::from("uniqueness is moot: existence already fails"),
        });
    }

    // EO3: meaningful <=> feasible and every block attains positive output
    // in the maximal-support solution
    let mut meaningful = exists;
    if !exists {
        certificates.push(Certificate {
            condition: Condition::EO3,
            block: None,
            related_block: None,
            satisfied: false,
            reason: String::from(
                "no nonnegative solution exists at all, so no strictly positive one can",
            ),
        });
    }
    for b in 0..st.k {
        if !sup.positive_able[b] {
            meaningful = false;
            let why = match st.class[b] {
                SpectralClass::BelowOne => {
                    "has rho < 1 but neither demand nor any positively-producing customer"
                }
                SpectralClass::One => "has rho = 1 and is pinned to zero output",
                SpectralClass::AboveOne => "has rho > 1, which forces zero output",
            };
            certificates.push(Certificate {
                condition: Condition::EO3,
                block: Some(b),
                related_block: None,
                satisfied: false,
                reason: format!("{} {}", block_label(btf, b), why),
            });
        }
    }
    if meaningful {
        certificates.push(Certificate {
            condition: Condition::EO3,
            block: None,
            related_block: None,
            satisfied: true,
            reason: String::from("every sector attains strictly positive output"),
        });
    }

    let witness = if exists {
        Some(construct_witness_open(a, d, spectral, btf, &st, &sup)?)
    } else {
        None
    };

    Ok(AnalysisVerdict {
        mode: Mode::Open,
        exists_meaningful: meaningful,
        exists_nonneg_nontrivial: exists,
        unique,
        certificates,
        witness,
        free_blocks: sup.free,
    })
}

/// Blockwise witness for the closed case: the first free block carries its
/// Perron vector, `rho < 1` blocks above back-substitute, everything else is
/// zero. Unit 2-norm.
fn construct_witness_closed(
    a: &TechMatrix,
    spectral: &SpectralClassification,
    btf: &BlockTriangularForm,
    st: &BlockStructure,
    sup: &SupportAnalysis,
) -> Vec<f64> {
    let i = sup.free[0];
    let x_perm = back_substitute(a, spectral, btf, st, i, None)
        .expect("free-block construction is feasible by the certificates");
    let mut x = btf.perm.unapply_vec(&x_perm);
    let norm = crate::math::norm2(&x);
    for v in &mut x {
        *v /= norm;
    }
    x
}

/// Blockwise witness for the open case: the minimal solution with every
/// free ray at zero.
fn construct_witness_open(
    a: &TechMatrix,
    d: &DemandVector,
    spectral: &SpectralClassification,
    btf: &BlockTriangularForm,
    st: &BlockStructure,
    _sup: &SupportAnalysis,
) -> Result<Vec<f64>> {
    let x_perm = back_substitute(a, spectral, btf, st, usize::MAX, Some(d))?;
    Ok(btf.perm.unapply_vec(&x_perm))
}

/// Shared blockwise back-substitution in permuted coordinates.
///
/// `ray_block` (if any) gets its Perron vector; `rho < 1` blocks solve
/// `(I - A_jj) x_j = d_j + sum of later couplings`; `rho >= 1` blocks are
/// set to zero after verifying their aggregate right-hand side vanishes.
pub(crate) fn back_substitute(
    a: &TechMatrix,
    spectral: &SpectralClassification,
    btf: &BlockTriangularForm,
    st: &BlockStructure,
    ray_block: usize,
    d: Option<&DemandVector>,
) -> Result<Vec<f64>> {
    let n = a.n();
    let k = btf.block_count();
    let mut x = vec![0.0; n]; // permuted coordinates
    let scale = a.mat().max_abs().max(1.0);

    for j in (0..k).rev() {
        let range = btf.block_range(j);
        let verts = btf.block_vertices(j).to_vec();
        // aggregate rhs: demand plus couplings into later blocks
        let mut rhs = vec![0.0; verts.len()];
        if let Some(dv) = d {
            for (t, &v) in verts.iter().enumerate() {
                rhs[t] = dv.as_slice()[v];
            }
        }
        for l in j + 1..k {
            if !st.edge[j][l] {
                continue;
            }
            let lrange = btf.block_range(l);
            let lverts = btf.block_vertices(l);
            for (t, &v) in verts.iter().enumerate() {
                for (s, &w) in lverts.iter().enumerate() {
                    rhs[t] += a.entry(v, w) * x[lrange.start + s];
                }
            }
        }

        if j == ray_block {
            let sub = a.mat().select(&verts, &verts);
            let v = crate::spectral::perron_vector_with_tol(&sub, spectral.tol)?;
            for (t, val) in v.into_iter().enumerate() {
                x[range.start + t] = val;
            }
            continue;
        }
        match st.class[j] {
            SpectralClass::BelowOne => {
                let sub = a.mat().select(&verts, &verts);
                let f = lu_factor(&sub.eye_minus())?;
                let sol = f.solve(&rhs)?;
                for (t, val) in sol.into_iter().enumerate() {
                    x[range.start + t] = val;
                }
            }
            _ => {
                let r = norm_inf(&rhs);
                let budget = 1e-9 * scale * (1.0 + norm_inf(&x));
                if r > budget {
                    return Err(Error::Inconsistency {
                        residual: r,
                        detail: format!(
                            "block {} (rho >= 1) receives nonzero right-hand side despite certificates",
                            j + 1
                        ),
                    });
                }
                // x_j stays zero
            }
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::block_triangular_form;
    use crate::spectral::{classify_blocks, DEFAULT_SPECTRAL_TOL};

    fn tech(n: usize, d: &[f64]) -> TechMatrix {
        TechMatrix::from_rows(n, d.to_vec()).unwrap()
    }

    fn pipeline(a: &TechMatrix) -> (BlockTriangularForm, SpectralClassification) {
        let btf = block_triangular_form(a);
        let spectral = classify_blocks(&btf, a, DEFAULT_SPECTRAL_TOL).unwrap();
        (btf, spectral)
    }

    #[test]
    fn transactions_closed_example() {
        let m = Mat::new(
            3,
            3,
            vec![25.0, 20.0, 55.0, 14.0, 6.0, 30.0, 80.0, 180.0, 40.0],
        )
        .unwrap();
        let d = DemandVector::zeros(3);
        let (a, mc) = tech_coeffs_from_transactions(&m, &d).unwrap();
        assert!((a.entry(0, 0) - 0.25).abs() < 1e-15);
        assert!((a.entry(2, 1) - 3.6).abs() < 1e-15);
        assert!((mc.scaling[0] - 0.01).abs() < 1e-15);
        // A = M C reproduced
        for i in 0..3 {
            for j in 0..3 {
                let rebuilt = mc.transactions[(i, j)] * mc.scaling[j];
                assert!((rebuilt - a.entry(i, j)).abs() <= 1e-10 * a.entry(i, j).abs().max(1.0));
            }
        }
    }

    #[test]
    fn transactions_identity() {
        let m = Mat::identity(3);
        let d = DemandVector::zeros(3);
        let (a, mc) = tech_coeffs_from_transactions(&m, &d).unwrap();
        for i in 0..3 {
            assert!((mc.scaling[i] - 1.0).abs() < 1e-15);
            assert!((a.entry(i, i) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn transactions_open_example_rounding() {
        // the observed 4-sector flow table; derived coefficients sit within
        // rounding of the conventional one-decimal matrix (347/696 vs 0.5)
        let m = Mat::new(
            4,
            4,
            vec![
                174.0, 255.0, 347.0, 44.0, 87.0, 102.0, 139.0, 132.0, 87.0, 51.0, 70.0, 88.0, 87.0,
                51.0, 70.0, 132.0,
            ],
        )
        .unwrap();
        let d = DemandVector::new(vec![50.0, 50.0, 400.0, 100.0]).unwrap();
        let (a, mc) = tech_coeffs_from_transactions(&m, &d).unwrap();
        // row sums + demand are the total outputs [870, 510, 696, 440]
        assert!((1.0 / mc.scaling[0] - 870.0).abs() < 1e-12);
        assert!((1.0 / mc.scaling[2] - 696.0).abs() < 1e-12);
        assert!((a.entry(0, 2) - 347.0 / 696.0).abs() < 1e-15);
        let rounded = [
            [0.2, 0.5, 0.5, 0.1],
            [0.1, 0.2, 0.2, 0.3],
            [0.1, 0.1, 0.1, 0.2],
            [0.1, 0.1, 0.1, 0.3],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (a.entry(i, j) - rounded[i][j]).abs() < 5e-3,
                    "({i},{j}): {} vs {}",
                    a.entry(i, j),
                    rounded[i][j]
                );
            }
        }
    }

    #[test]
    fn transactions_degenerate_sector() {
        let m = Mat::new(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let d = DemandVector::zeros(2);
        match tech_coeffs_from_transactions(&m, &d) {
            Err(Error::DegenerateSector { sector }) => assert_eq!(sector, 1),
            other => panic!("expected degenerate sector, got {other:?}"),
        }
    }

    #[test]
    fn productive_tests() {
        let zero = tech(2, &[0.0; 4]);
        let (p, minors) = is_productive(&zero);
        assert!(p);
        assert_eq!(minors, vec![1.0, 1.0]);

        let one = tech(1, &[1.0]);
        let (p, minors) = is_productive(&one);
        assert!(!p);
        assert_eq!(minors, vec![0.0]);

        let open = tech(
            4,
            &[
                0.2, 0.5, 0.5, 0.1, 0.1, 0.2, 0.2, 0.3, 0.1, 0.1, 0.1, 0.2, 0.1, 0.1, 0.1, 0.3,
            ],
        );
        let (p, minors) = is_productive(&open);
        assert!(p);
        let expected = [0.8, 0.59, 0.46, 0.248];
        for (got, want) in minors.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_irreducible_unit_block() {
        let a = tech(
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
        let (btf, spectral) = pipeline(&a);
        let v = classify_closed(&a, &spectral, &btf, 0.0);
        assert!(v.exists_meaningful);
        assert!(v.exists_nonneg_nontrivial);
        assert!(v.unique);
        let w = v.witness.unwrap();
        // witness proportional to [100, 50, 300]
        let t = w[0] / 100.0;
        assert!((w[1] - 50.0 * t).abs() < 1e-8);
        assert!((w[2] - 300.0 * t).abs() < 1e-8);
    }

    #[test]
    fn closed_leaky_unit_block() {
        // rho = 1 block supplies a rho < 1 block: no positive equilibrium,
        // but the ray [1, 0] survives
        let a = tech(2, &[1.0, 0.2, 0.0, 0.5]);
        let (btf, spectral) = pipeline(&a);
        let v = classify_closed(&a, &spectral, &btf, 0.0);
        assert!(!v.exists_meaningful);
        assert!(v.exists_nonneg_nontrivial);
        assert!(v.unique);
        let w = v.witness.unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && w[1].abs() < 1e-12);
        // certificates name the EC3 violation at (block 1, block 2) and UC2
        assert!(v.certificates.iter().any(|c| c.condition == Condition::EC3
            && c.block == Some(0)
            && c.related_block == Some(1)
            && !c.satisfied));
        assert!(v
            .certificates
            .iter()
            .any(|c| c.condition == Condition::UC2 && c.satisfied));
    }

    #[test]
    fn closed_sub_unit_scalar_has_no_solution() {
        let a = tech(1, &[0.5]);
        let (btf, spectral) = pipeline(&a);
        let v = classify_closed(&a, &spectral, &btf, 0.0);
        assert!(!v.exists_meaningful);
        assert!(!v.exists_nonneg_nontrivial);
        assert!(!v.unique);
        assert!(v.witness.is_none());
    }

    #[test]
    fn closed_transitive_pinning() {
        // rho=1 block 1 supplies a rho<1 block which supplies rho=1 block 3:
        // block 3's ray is pinned transitively, block 1 stays free
        let a = tech(3, &[1.0, 0.5, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 1.0]);
        let (btf, spectral) = pipeline(&a);
        let v = classify_closed(&a, &spectral, &btf, 0.0);
        assert!(v.exists_nonneg_nontrivial);
        assert!(v.unique, "only the first block's ray is free");
        let w = v.witness.unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12);
        assert!(w[1].abs() < 1e-12 && w[2].abs() < 1e-12);
    }

    #[test]
    fn support_eps_relaxes_coupling_tests() {
        // a tiny leak out of the rho = 1 block blocks positivity at eps = 0
        // but is treated as a structural zero at eps = 1e-9
        let a = tech(2, &[1.0, 1e-12, 0.0, 0.5]);
        let (btf, spectral) = pipeline(&a);
        let strict = classify_closed(&a, &spectral, &btf, 0.0);
        assert!(!strict.exists_meaningful);
        let relaxed = classify_closed(&a, &spectral, &btf, 1e-9);
        assert!(
            !relaxed.exists_meaningful,
            "the sub-unit closure still blocks positivity"
        );
        // certificates differ: the strict run cites the leak, the relaxed
        // one cites only the rho < 1 closure
        assert!(strict
            .certificates
            .iter()
            .any(|c| c.condition == Condition::EC3 && c.related_block == Some(1)));
        assert!(!relaxed
            .certificates
            .iter()
            .any(|c| c.condition == Condition::EC3 && c.related_block == Some(1)));
    }

    #[test]
    fn open_unique_positive() {
        let a = tech(
            4,
            &[
                0.2, 0.5, 0.5, 0.1, 0.1, 0.2, 0.2, 0.3, 0.1, 0.1, 0.1, 0.2, 0.1, 0.1, 0.1, 0.3,
            ],
        );
        let d = DemandVector::new(vec![50.0, 50.0, 400.0, 100.0]).unwrap();
        let (btf, spectral) = pipeline(&a);
        let v = classify_open(&a, &d, &spectral, &btf, 0.0).unwrap();
        assert!(v.exists_meaningful && v.exists_nonneg_nontrivial && v.unique);
        let w = v.witness.unwrap();
        let expected = [
            870.9677419354839,
            510.0806451612903,
            695.5645161290323,
            439.51612903225805,
        ];
        for (got, want) in w.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-8 * want);
        }
    }

    #[test]
    fn open_zero_matrix() {
        let a = tech(2, &[0.0; 4]);
        let d = DemandVector::new(vec![1.0, 2.0]).unwrap();
        let (btf, spectral) = pipeline(&a);
        let v = classify_open(&a, &d, &spectral, &btf, 0.0).unwrap();
        assert!(v.exists_meaningful && v.unique);
        assert_eq!(v.witness.unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn open_free_ray_breaks_uniqueness() {
        // blocks {1} rho=1 (isolated) and {2} rho=0.5 with demand on 2:
        // solutions are {[t, 2] : t >= 0}
        let a = tech(2, &[1.0, 0.0, 0.0, 0.5]);
        let d = DemandVector::new(vec![0.0, 1.0]).unwrap();
        let (btf, spectral) = pipeline(&a);
        let v = classify_open(&a, &d, &spectral, &btf, 0.0).unwrap();
        assert!(v.exists_nonneg_nontrivial);
        assert!(!v.unique);
        assert_eq!(v.free_blocks.len(), 1);
        let w = v.witness.unwrap();
        assert!(w[0].abs() < 1e-12 && (w[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn open_demand_on_unit_block_kills_existence() {
        let a = tech(2, &[1.0, 0.0, 0.0, 0.5]);
        let d = DemandVector::new(vec![1.0, 0.0]).unwrap();
        let (btf, spectral) = pipeline(&a);
        let v = classify_open(&a, &d, &spectral, &btf, 0.0).unwrap();
        assert!(!v.exists_nonneg_nontrivial);
        assert!(!v.exists_meaningful);
        assert!(!v.unique);
        assert!(v.witness.is_none());
    }

    #[test]
    fn open_transitive_flow_kills_existence() {
        // demand enters block 3, propagates to block 2 (rho < 1), and block 1
        // (rho = 1) supplies block 2: the flow reaches it transitively
        let a = tech(3, &[1.0, 0.5, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.5]);
        let d = DemandVector::new(vec![0.0, 0.0, 1.0]).unwrap();
        let (btf, spectral) = pipeline(&a);
        let v = classify_open(&a, &d, &spectral, &btf, 0.0).unwrap();
        assert!(!v.exists_nonneg_nontrivial, "flow reaches the rho=1 block");
    }

    #[test]
    fn open_rejects_zero_demand() {
        let a = tech(2, &[0.0; 4]);
        let d = DemandVector::zeros(2);
        let (btf, spectral) = pipeline(&a);
        assert!(matches!(
            classify_open(&a, &d, &spectral, &btf, 0.0),
            Err(Error::ModeMisuse(_))
        ));
    }

    #[test]
    fn meaningful_implies_exists() {
        // spot-check the implication on a few structured matrices
        let cases: Vec<(usize, Vec<f64>)> = vec![
            (2, vec![0.5, 0.5, 0.5, 0.5]),
            (2, vec![1.0, 0.0, 0.0, 1.0]),
            (3, vec![1.0, 0.5, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 1.0]),
        ];
        for (n, data) in cases {
            let a = tech(n, &data);
            let (btf, spectral) = pipeline(&a);
            let v = classify_closed(&a, &spectral, &btf, 0.0);
            assert!(!v.exists_meaningful || v.exists_nonneg_nontrivial);
        }
    }

    #[test]
    fn decompose_roundtrip_closed_example() {
        let a = tech(
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
        let x = [100.0, 50.0, 300.0];
        let d = DemandVector::zeros(3);
        let mc = decompose_mc(&a, &x, &d).unwrap();
        let expected = [[25.0, 20.0, 55.0], [14.0, 6.0, 30.0], [80.0, 180.0, 40.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((mc.transactions[(i, j)] - expected[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn decompose_zero_matrix() {
        let a = tech(2, &[0.0; 4]);
        let d = DemandVector::new(vec![1.0, 2.0]).unwrap();
        let mc = decompose_mc(&a, &[1.0, 2.0], &d).unwrap();
        assert!(mc.transactions.data().iter().all(|&v| v == 0.0));
        assert_eq!(mc.scaling, vec![1.0, 0.5]);
    }

    #[test]
    fn decompose_rejects_non_solution() {
        let a = tech(2, &[0.0; 4]);
        let d = DemandVector::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            decompose_mc(&a, &[5.0, 5.0], &d),
            Err(Error::NotASolution { .. })
        ));
    }
}
