//! The analysis report: a single JSON-serializable tree with stable key
//! names; the text rendering is derived from it.

use leontief_core::{AnalysisVerdict, Certificate, Mode, SpectralClass};
use serde::{Deserialize, Serialize};

use crate::economy::PayloadKind;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputsEcho {
    pub labels: Vec<String>,
    pub kind: PayloadKind,
    /// Row-major matrix as ingested (transactions or coefficients).
    pub matrix: Vec<Vec<f64>>,
    pub demand: Option<Vec<f64>>,
    pub totals: Option<Vec<f64>>,
    pub mode: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_spectral: f64,
    pub support_eps: f64,
    pub normalization: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockReport {
    /// 1-based position in the canonical dependency order.
    pub index: usize,
    pub sectors: Vec<String>,
    pub rho: f64,
    pub class: String,
    pub closure: bool,
    pub bracket: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorClasses {
    pub below_one: Vec<String>,
    pub one: Vec<String>,
    pub above_one: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictReport {
    pub mode: String,
    pub exists_meaningful: bool,
    pub exists_nonneg_nontrivial: bool,
    pub unique: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub condition: String,
    pub block: Option<usize>,
    pub related_block: Option<usize>,
    pub satisfied: bool,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionReport {
    pub x: Vec<f64>,
    pub normalization: Option<String>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElasticityEntry {
    pub variable: String,
    pub parameter: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub inputs: InputsEcho,
    pub tolerances: Tolerances,
    pub blocks: Vec<BlockReport>,
    pub sector_classes: Option<SectorClasses>,
    pub productive: Option<bool>,
    pub minors: Option<Vec<f64>>,
    pub verdict: Option<VerdictReport>,
    pub certificates: Vec<CertificateReport>,
    pub solution: Option<SolutionReport>,
    pub jacobian_a: Option<Vec<Vec<f64>>>,
    pub jacobian_d: Option<Vec<Vec<f64>>>,
    pub elasticities: Option<Vec<ElasticityEntry>>,
    pub error: Option<StageError>,
}

pub fn mode_str(mode: Mode) -> &'static str {
    match mode {
        Mode::Closed => "closed",
        Mode::Open => "open",
    }
}

pub fn class_str(class: SpectralClass) -> &'static str {
    match class {
        SpectralClass::BelowOne => "below_one",
        SpectralClass::One => "one",
        SpectralClass::AboveOne => "above_one",
    }
}

pub fn verdict_report(v: &AnalysisVerdict) -> VerdictReport {
    VerdictReport {
        mode: mode_str(v.mode).to_string(),
        exists_meaningful: v.exists_meaningful,
        exists_nonneg_nontrivial: v.exists_nonneg_nontrivial,
        unique: v.unique,
    }
}

pub fn certificate_reports(certs: &[Certificate]) -> Vec<CertificateReport> {
    certs
        .iter()
        .map(|c| CertificateReport {
            condition: c.condition.as_str().to_string(),
            block: c.block.map(|b| b + 1),
            related_block: c.related_block.map(|b| b + 1),
            satisfied: c.satisfied,
            reason: c.reason.clone(),
        })
        .collect()
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    /// Human-readable rendering of the same content.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let n = self.inputs.labels.len();
        let _ = writeln!(
            out,
            "Economy: {n} sectors ({})",
            self.inputs.labels.join(", ")
        );
        let _ = writeln!(
            out,
            "Tolerances: spectral {}, support eps {}, normalization {}",
            self.tolerances.tol_spectral,
            self.tolerances.support_eps,
            self.tolerances.normalization
        );
        if !self.blocks.is_empty() {
            let _ = writeln!(
                out,
                "\nBlock triangular form ({} blocks):",
                self.blocks.len()
            );
            for b in &self.blocks {
                let _ = writeln!(
                    out,
                    "  block {}: [{}]  rho = {:.9}  class {}{}",
                    b.index,
                    b.sectors.join(", "),
                    b.rho,
                    b.class,
                    if b.closure { "  (closure)" } else { "" }
                );
            }
        }
        if let Some(sc) = &self.sector_classes {
            let fmt = |v: &[String]| {
                if v.is_empty() {
                    "-".to_string()
                } else {
                    v.join(", ")
                }
            };
            let _ = writeln!(
                out,
                "Sector classes: <1: {}; =1: {}; >1: {}",
                fmt(&sc.below_one),
                fmt(&sc.one),
                fmt(&sc.above_one)
            );
        }
        if let Some(p) = self.productive {
            let _ = writeln!(
                out,
                "\nProductive (Hawkins-Simon): {}",
                if p { "yes" } else { "no" }
            );
            if let Some(m) = &self.minors {
                let _ = writeln!(
                    out,
                    "Leading principal minors of I-A: {}",
                    m.iter()
                        .map(|v| format!("{v:.6}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                );
            }
        }
        if let Some(v) = &self.verdict {
            let _ = writeln!(out, "\nVerdict ({} mode):", v.mode);
            let _ = writeln!(
                out,
                "  economically meaningful solution (x > 0): {}",
                yes_no(v.exists_meaningful)
            );
            let _ = writeln!(
                out,
                "  nonnegative nontrivial solution:           {}",
                yes_no(v.exists_nonneg_nontrivial)
            );
            let uniq = match (v.mode.as_str(), v.unique) {
                ("closed", true) => "yes (up to positive multiples)",
                ("open", true) => "yes",
                _ => "no",
            };
            let _ = writeln!(out, "  unique:                                    {uniq}");
        }
        if !self.certificates.is_empty() {
            let _ = writeln!(out, "\nCertificates:");
            for c in &self.certificates {
                let blocks = match (c.block, c.related_block) {
                    (Some(b), Some(r)) => format!(" [block {b} vs {r}]"),
                    (Some(b), None) => format!(" [block {b}]"),
                    _ => String::new(),
                };
                let _ = writeln!(
                    out,
                    "  {} {}{}: {}",
                    c.condition,
                    if c.satisfied { "holds" } else { "violated" },
                    blocks,
                    c.reason
                );
            }
        }
        if let Some(s) = &self.solution {
            let _ = writeln!(out, "\nSolution (residual {:.3e}):", s.residual);
            for (label, x) in self.inputs.labels.iter().zip(&s.x) {
                let _ = writeln!(out, "  x[{label}] = {x:.6}");
            }
            if let Some(nrm) = &s.normalization {
                let _ = writeln!(out, "  normalization: {nrm}");
            }
        }
        if let Some(elas) = &self.elasticities {
            let _ = writeln!(out, "\nElasticities:");
            for e in elas {
                let _ = writeln!(
                    out,
                    "  E[{} / {}] = {:.6}",
                    e.variable, e.parameter, e.value
                );
            }
        }
        if let Some(err) = &self.error {
            let _ = writeln!(out, "\nError at stage '{}': {}", err.stage, err.message);
        }
        out
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
