use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use leontief_cli::{
    analysis::{run_analysis, AnalysisOptions, NormalizeOption},
    dot::export_dot,
    economy::{parse_economy, PayloadKind},
    CliError,
};
use leontief_core::{
    block_triangular_form, build_digraph, classify_blocks, graph_facts, scc, LinearFunctional,
    Mode, TechMatrix,
};

/// Existence, uniqueness, solution and sensitivity analysis for
/// input-output economies (I - A) x = d.
#[derive(Parser)]
#[command(name = "leontief", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Closed,
    Open,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Transactions,
    Coefficients,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizeArg {
    Unit,
    MatchTotal,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Args)]
struct SharedArgs {
    /// Input CSV: header `sector,<labels..>[,demand][,total]`.
    input: PathBuf,
    /// Closed (d = 0) or open analysis; inferred from the demand column
    /// when omitted.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Whether the matrix cells are transactions or coefficients.
    #[arg(long, value_enum, default_value = "coefficients")]
    kind: KindArg,
    /// Tolerance for classifying a block's spectral radius as 1.
    #[arg(long, default_value_t = leontief_core::DEFAULT_SPECTRAL_TOL)]
    tol_spectral: f64,
    /// Entries at or below this threshold count as structural zeros in the
    /// coupling tests.
    #[arg(long, default_value_t = 0.0)]
    support_eps: f64,
    /// Closed-mode scale convention for the solution.
    #[arg(long, value_enum, default_value = "unit")]
    normalize: NormalizeArg,
    /// Derived variable for elasticities, e.g. `emissions=1,5,0,0`
    /// (repeatable).
    #[arg(long = "functional", value_name = "NAME=W1,W2,...")]
    functionals: Vec<String>,
    /// Report format.
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Exit with status 4 when no unique solution was produced.
    #[arg(long)]
    require_solution: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Verdict, certificates and the solution when unique.
    Analyze(SharedArgs),
    /// Block triangular structure and spectral classes only.
    Btf(SharedArgs),
    /// Full sensitivity sweep: Jacobians and elasticities.
    Sensitivity(SharedArgs),
    /// Hawkins-Simon productivity test.
    CheckProductive(SharedArgs),
    /// DOT rendering of the condensation.
    ExportDot(SharedArgs),
}

fn parse_functionals(specs: &[String], n: usize) -> Result<Vec<LinearFunctional>, CliError> {
    specs
        .iter()
        .map(|s| {
            let (name, rest) = s.split_once('=').ok_or_else(|| {
                CliError::Input(format!("functional '{s}' is not NAME=W1,W2,..."))
            })?;
            let weights: Vec<f64> = rest
                .split(',')
                .map(|w| {
                    w.trim().parse::<f64>().map_err(|_| {
                        CliError::Input(format!("bad weight '{w}' in functional '{name}'"))
                    })
                })
                .collect::<Result<_, _>>()?;
            if weights.len() != n {
                return Err(CliError::Input(format!(
                    "functional '{name}' has {} weights for {n} sectors",
                    weights.len()
                )));
            }
            Ok(LinearFunctional::new(name.to_string(), weights))
        })
        .collect()
}

fn emit(args: &SharedArgs, content: String) -> Result<(), CliError> {
    match &args.output {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (args, structure_only, with_sensitivity) = match &cli.command {
        Command::Analyze(a) => (a, false, false),
        Command::Btf(a) => (a, true, false),
        Command::Sensitivity(a) => (a, false, true),
        Command::CheckProductive(a) => (a, true, false),
        Command::ExportDot(a) => (a, true, false),
    };
    let kind = match args.kind {
        KindArg::Transactions => PayloadKind::Transactions,
        KindArg::Coefficients => PayloadKind::Coefficients,
    };
    let econ = parse_economy(&args.input, kind)?;

    if let Command::ExportDot(_) = &cli.command {
        // dot export needs the coefficient matrix, not a full report
        let a = match kind {
            PayloadKind::Coefficients => {
                TechMatrix::new(econ.matrix.clone()).map_err(CliError::Numerical)?
            }
            PayloadKind::Transactions => {
                let demand = leontief_core::DemandVector::new(
                    econ.demand.clone().unwrap_or_else(|| vec![0.0; econ.n()]),
                )
                .map_err(CliError::Numerical)?;
                leontief_core::tech_coeffs_from_transactions(&econ.matrix, &demand)
                    .map_err(CliError::Numerical)?
                    .0
            }
        };
        let g = build_digraph(&a);
        let dec = scc(&g);
        let facts = graph_facts(&dec, &g);
        let btf = block_triangular_form(&a);
        let spectral = classify_blocks(&btf, &a, args.tol_spectral).map_err(CliError::Numerical)?;
        let dot = export_dot(&btf, &spectral, &dec, &facts, &econ.labels);
        emit(args, dot)?;
        return Ok(0);
    }

    let options = AnalysisOptions {
        mode: args.mode.map(|m| match m {
            ModeArg::Closed => Mode::Closed,
            ModeArg::Open => Mode::Open,
        }),
        tol_spectral: args.tol_spectral,
        support_eps: args.support_eps,
        normalize: match args.normalize {
            NormalizeArg::Unit => NormalizeOption::Unit,
            NormalizeArg::MatchTotal => NormalizeOption::MatchTotal,
        },
        functionals: parse_functionals(&args.functionals, econ.n())?,
        with_sensitivity,
        structure_only,
    };
    let report = run_analysis(&econ, &options)?;

    let content = match args.format {
        FormatArg::Text => report.to_text(),
        FormatArg::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
    };
    emit(args, content)?;

    if let Some(err) = &report.error {
        eprintln!("error at stage '{}': {}", err.stage, err.message);
        // mode misuse and malformed inputs are caller errors
        let input_like = err.stage == "coefficients"
            || err.stage == "demand"
            || err.message.starts_with("mode misuse")
            || err.message.contains("'total' column");
        return Ok(if input_like { 2 } else { 3 });
    }
    if args.require_solution && report.solution.is_none() {
        eprintln!("no unique solution was produced (--require-solution)");
        return Ok(4);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e @ CliError::Input(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(e)) => {
            eprintln!("numerical failure: {e}");
            let code = if leontief_cli::is_input_error(&e) {
                2
            } else {
                3
            };
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
