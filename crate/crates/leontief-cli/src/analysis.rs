//! Orchestration: coefficients -> digraph -> SCC -> block form -> spectral
//! classes -> verdict -> solution -> sensitivity, with every stage echoed
//! into the report.

use leontief_core::{
    block_triangular_form, build_digraph, classify_blocks, classify_closed, classify_open,
    graph_facts, is_productive, scc, sensitivity_sweep, solve_closed, solve_open,
    tech_coeffs_from_transactions, DemandVector, Error as CoreError, LinearFunctional, Mode,
    Normalization, TechMatrix, DEFAULT_SPECTRAL_TOL,
};

use crate::economy::{EconomyFile, PayloadKind};
use crate::report::{
    certificate_reports, class_str, mode_str, verdict_report, BlockReport, InputsEcho, Report,
    SectorClasses, SolutionReport, StageError, Tolerances,
};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeOption {
    Unit,
    MatchTotal,
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    /// Closed/open; inferred from the demand column when absent.
    pub mode: Option<Mode>,
    pub tol_spectral: f64,
    pub support_eps: f64,
    pub normalize: NormalizeOption,
    /// Derived variables for elasticity reporting; per-sector outputs when
    /// empty and a sweep is requested.
    pub functionals: Vec<LinearFunctional>,
    pub with_sensitivity: bool,
    /// Stop after the structural stages (blocks and classes).
    pub structure_only: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            mode: None,
            tol_spectral: DEFAULT_SPECTRAL_TOL,
            support_eps: 0.0,
            normalize: NormalizeOption::Unit,
            functionals: Vec::new(),
            with_sensitivity: false,
            structure_only: false,
        }
    }
}

fn matrix_rows(m: &leontief_core::Mat) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Classifies a core error as an input problem (exit 2) or an internal
/// numerical failure (exit 3).
pub fn is_input_error(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::Dimension(_)
            | CoreError::Domain(_)
            | CoreError::DegenerateSector { .. }
            | CoreError::ModeMisuse(_)
    )
}

/// Runs the full pipeline; stage failures are embedded in the report rather
/// than returned, so callers always get the stages that did complete.
pub fn run_analysis(econ: &EconomyFile, options: &AnalysisOptions) -> Result<Report, CliError> {
    let n = econ.n();
    let mut report = Report {
        inputs: InputsEcho {
            labels: econ.labels.clone(),
            kind: econ.kind,
            matrix: matrix_rows(&econ.matrix),
            demand: econ.demand.clone(),
            totals: econ.totals.clone(),
            mode: None,
        },
        tolerances: Tolerances {
            tol_spectral: options.tol_spectral,
            support_eps: options.support_eps,
            normalization: match options.normalize {
                NormalizeOption::Unit => "unit".to_string(),
                NormalizeOption::MatchTotal => "match-total".to_string(),
            },
        },
        blocks: Vec::new(),
        sector_classes: None,
        productive: None,
        minors: None,
        verdict: None,
        certificates: Vec::new(),
        solution: None,
        jacobian_a: None,
        jacobian_d: None,
        elasticities: None,
        error: None,
    };
    let fail = |report: &mut Report, stage: &str, message: String| {
        report.error = Some(StageError {
            stage: stage.to_string(),
            message,
        });
    };

    // stage: coefficients
    let demand_vec = econ.demand.clone().unwrap_or_else(|| vec![0.0; n]);
    let demand = match DemandVector::new(demand_vec) {
        Ok(d) => d,
        Err(e) => {
            fail(&mut report, "demand", e.to_string());
            return Ok(report);
        }
    };
    let a: TechMatrix = match econ.kind {
        PayloadKind::Coefficients => match TechMatrix::new(econ.matrix.clone()) {
            Ok(a) => a,
            Err(e) => {
                fail(&mut report, "coefficients", e.to_string());
                return Ok(report);
            }
        },
        PayloadKind::Transactions => match tech_coeffs_from_transactions(&econ.matrix, &demand) {
            Ok((a, _)) => a,
            Err(e) => {
                fail(&mut report, "coefficients", e.to_string());
                return Ok(report);
            }
        },
    };

    // stage: structure
    let digraph = build_digraph(&a);
    let decomposition = scc(&digraph);
    let facts = graph_facts(&decomposition, &digraph);
    let btf = block_triangular_form(&a);
    let spectral = match classify_blocks(&btf, &a, options.tol_spectral) {
        Ok(s) => s,
        Err(e) => {
            fail(&mut report, "spectral", e.to_string());
            return Ok(report);
        }
    };
    let label_of = |v: usize| econ.labels[v].clone();
    report.blocks = (0..btf.block_count())
        .map(|b| {
            let comp = decomposition.component_of[btf.block_vertices(b)[0]];
            BlockReport {
                index: b + 1,
                sectors: btf.block_vertices(b).iter().map(|&v| label_of(v)).collect(),
                rho: spectral.blocks[b].rho,
                class: class_str(spectral.blocks[b].class).to_string(),
                closure: facts.component_is_closure[comp],
                bracket: [spectral.blocks[b].bracket.0, spectral.blocks[b].bracket.1],
            }
        })
        .collect();
    report.sector_classes = Some(SectorClasses {
        below_one: spectral
            .sectors_below_one
            .iter()
            .map(|&v| label_of(v))
            .collect(),
        one: spectral.sectors_one.iter().map(|&v| label_of(v)).collect(),
        above_one: spectral
            .sectors_above_one
            .iter()
            .map(|&v| label_of(v))
            .collect(),
    });
    let (productive, minors) = is_productive(&a);
    report.productive = Some(productive);
    report.minors = Some(minors);

    if options.structure_only {
        return Ok(report);
    }

    // stage: verdict
    let mode = options.mode.unwrap_or(if demand.is_zero() {
        Mode::Closed
    } else {
        Mode::Open
    });
    report.inputs.mode = Some(mode_str(mode).to_string());
    let verdict = match mode {
        Mode::Closed => classify_closed(&a, &spectral, &btf, options.support_eps),
        Mode::Open => match classify_open(&a, &demand, &spectral, &btf, options.support_eps) {
            Ok(v) => v,
            Err(e) => {
                fail(&mut report, "verdict", e.to_string());
                return Ok(report);
            }
        },
    };
    report.verdict = Some(verdict_report(&verdict));
    report.certificates = certificate_reports(&verdict.certificates);

    // stage: solution
    if !(verdict.exists_nonneg_nontrivial && verdict.unique) {
        return Ok(report);
    }
    let solution = match mode {
        Mode::Closed => {
            let norm = match options.normalize {
                NormalizeOption::Unit => Normalization::Unit,
                NormalizeOption::MatchTotal => match &econ.totals {
                    Some(t) => Normalization::MatchScale(t.clone()),
                    None => {
                        fail(
                            &mut report,
                            "solution",
                            "match-total normalization needs a 'total' column".to_string(),
                        );
                        return Ok(report);
                    }
                },
            };
            solve_closed(&a, &verdict, &spectral, &btf, norm)
        }
        Mode::Open => solve_open(&a, &demand, &verdict, &spectral, &btf),
    };
    let solution = match solution {
        Ok(s) => s,
        Err(e) => {
            fail(&mut report, "solution", e.to_string());
            return Ok(report);
        }
    };
    report.solution = Some(SolutionReport {
        x: solution.x.clone(),
        normalization: solution.normalization.as_ref().map(|n| match n {
            Normalization::Unit => "unit".to_string(),
            Normalization::MatchScale(_) => "match-total".to_string(),
        }),
        residual: solution.residual,
    });

    // stage: sensitivity
    if options.with_sensitivity {
        let functionals: Vec<LinearFunctional> = if options.functionals.is_empty() {
            (0..n)
                .map(|m| {
                    let mut f = LinearFunctional::component(m, n);
                    f.name = format!("x[{}]", econ.labels[m]);
                    f
                })
                .collect()
        } else {
            options.functionals.clone()
        };
        let demand_arg = match mode {
            Mode::Closed => None,
            Mode::Open => Some(&demand),
        };
        match sensitivity_sweep(&a, demand_arg, &solution.x, &functionals) {
            Ok(res) => {
                report.jacobian_a = Some(res.jacobian_a);
                report.jacobian_d = res.jacobian_d;
                report.elasticities = Some(
                    res.elasticities
                        .iter()
                        .map(|e| crate::report::ElasticityEntry {
                            variable: e.variable.clone(),
                            parameter: e.parameter.label(),
                            value: e.value,
                        })
                        .collect(),
                );
            }
            Err(e) => {
                fail(&mut report, "sensitivity", e.to_string());
                return Ok(report);
            }
        }
    }

    Ok(report)
}
