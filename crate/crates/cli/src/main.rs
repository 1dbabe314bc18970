//! quadiag: diagonalize quadratic boson, fermion, and coordinate
//! Hamiltonians described by JSON problem files, or run the regression
//! corpus of physical models.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use quadiag::{
    classify, diagonalize, dynamic_matrix, verify, Classification, DiagonalizeOptions, Error,
    Tolerances,
};

use quadiag_cli::io;
use quadiag_cli::io::{
    build_form, render_text, tag_str, transform_out, OmegaOut, ProblemFile, ReportFile,
};

#[derive(Parser)]
#[command(
    name = "quadiag",
    version,
    about = "Diagonalize quadratic boson, fermion, and coordinate Hamiltonians"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(clap::Args)]
struct TolArgs {
    /// Override the realness threshold for eigenvalue imaginary parts.
    #[arg(long)]
    tol_real: Option<f64>,
    /// Override the clustering and numerical-rank cutoff.
    #[arg(long)]
    tol_rank: Option<f64>,
    /// Override the orthonormality verification threshold.
    #[arg(long)]
    tol_orth: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Diagonalize a problem file and emit a report
    Diagonalize {
        /// JSON problem file
        input: PathBuf,
        /// Include the transformation matrix in the report
        #[arg(long)]
        emit_transform: bool,
        /// Keep conserved zero-frequency coordinate modes as residuals
        #[arg(long)]
        allow_partial: bool,
        #[command(flatten)]
        tol: TolArgs,
        /// Report format
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the report here instead of standard output
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Classify a problem file without constructing the transformation
    Check {
        /// JSON problem file
        input: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
        /// Report format
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the regression model table and compare against expectations
    Corpus {
        /// Only run fixtures whose name contains this substring
        filter: Option<String>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Diagonalize {
            input,
            emit_transform,
            allow_partial,
            tol,
            format,
            output,
        } => cmd_diagonalize(&input, emit_transform, allow_partial, &tol, format, output),
        Cmd::Check { input, tol, format } => cmd_check(&input, &tol, format),
        Cmd::Corpus { filter } => cmd_corpus(filter.as_deref()),
    }
}

fn apply_tolerances(base: &mut Tolerances, problem: Option<&io::ProblemOptions>, args: &TolArgs) {
    if let Some(opts) = problem {
        if let Some(x) = opts.tol_real {
            base.real = x;
        }
        if let Some(x) = opts.tol_rank {
            base.rank = x;
        }
        if let Some(x) = opts.tol_orth {
            base.orth = x;
        }
    }
    if let Some(x) = args.tol_real {
        base.real = x;
    }
    if let Some(x) = args.tol_rank {
        base.rank = x;
    }
    if let Some(x) = args.tol_orth {
        base.orth = x;
    }
}

fn emit(report: &ReportFile, format: Format, output: Option<&PathBuf>) -> Result<(), String> {
    let text = match format {
        Format::Json => {
            let mut t = serde_json::to_string_pretty(report)
                .map_err(|e| format!("serialization failed: {e}"))?;
            t.push('\n');
            t
        }
        Format::Text => render_text(report),
    };
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write report: {e}")),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_problem(input: &PathBuf) -> Result<ProblemFile, String> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| format!("cannot read {}: {e}", input.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("parse error: {e}"))
}

fn error_report(message: String) -> ReportFile {
    ReportFile {
        verdict: "error".into(),
        error: Some(message),
        ..Default::default()
    }
}

fn cmd_diagonalize(
    input: &PathBuf,
    emit_transform: bool,
    allow_partial: bool,
    tol_args: &TolArgs,
    format: Format,
    output: Option<PathBuf>,
) -> ExitCode {
    let (report, code) = run_diagonalize(input, emit_transform, allow_partial, tol_args);
    if let Err(e) = emit(&report, format, output.as_ref()) {
        eprintln!("{e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}

fn run_diagonalize(
    input: &PathBuf,
    emit_transform: bool,
    allow_partial: bool,
    tol_args: &TolArgs,
) -> (ReportFile, u8) {
    let problem = match load_problem(input) {
        Ok(p) => p,
        Err(e) => return (error_report(e), 1),
    };
    let form = match build_form(&problem) {
        Ok(f) => f,
        Err(e) => return (error_report(e), 1),
    };
    let mut tol = Tolerances::default();
    apply_tolerances(&mut tol, problem.options.as_ref(), tol_args);
    let opts = DiagonalizeOptions {
        allow_partial: allow_partial
            || problem.options.as_ref().map_or(false, |o| o.allow_partial),
    };
    match diagonalize(&form, &opts, &tol) {
        Ok(d) => {
            let partial = !d.residual.is_empty();
            let rep = verify(&d, &form, &tol);
            let report = ReportFile {
                verdict: if partial { "partial" } else { "diagonalized" }.into(),
                omegas: Some(
                    d.modes
                        .iter()
                        .map(|m| OmegaOut {
                            omega: m.omega,
                            tag: tag_str(m.tag).into(),
                        })
                        .collect(),
                ),
                constant: Some(d.constant),
                transformation: emit_transform.then(|| transform_out(&d.t)),
                residual_modes: partial.then(|| {
                    d.residual.iter().map(|r| r.to_vec()).collect()
                }),
                verification: Some((&rep).into()),
                ..Default::default()
            };
            (report, 0)
        }
        Err(Error::NotDiagonalizable(c)) => {
            let report = ReportFile {
                verdict: "not-diagonalizable".into(),
                classification: Some(c.to_string()),
                ..Default::default()
            };
            (report, 2)
        }
        Err(e) => (error_report(e.to_string()), 1),
    }
}

fn cmd_check(input: &PathBuf, tol_args: &TolArgs, format: Format) -> ExitCode {
    let fail = |msg: String| {
        let report = error_report(msg);
        let _ = emit(&report, format, None);
        ExitCode::from(1)
    };
    let problem = match load_problem(input) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let form = match build_form(&problem) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let mut tol = Tolerances::default();
    apply_tolerances(&mut tol, problem.options.as_ref(), tol_args);
    let dm = dynamic_matrix(&form);
    let class = match classify(&dm.d, &tol) {
        Ok(c) => c,
        Err(e) => return fail(e.to_string()),
    };
    let (verdict, code) = match &class {
        Classification::PhysicallyDiagonalizable => ("physically-diagonalizable", 0u8),
        Classification::ComplexSpectrum { .. } => ("complex-spectrum", 2),
        Classification::Defective { .. } => ("defective", 2),
    };
    let report = ReportFile {
        verdict: verdict.into(),
        classification: Some(class.to_string()),
        ..Default::default()
    };
    if let Err(e) = emit(&report, format, None) {
        eprintln!("{e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}

fn format_omegas(oms: &[(f64, &str)]) -> String {
    let parts: Vec<String> = oms
        .iter()
        .map(|(w, tag)| {
            if *tag == "normal" {
                format!("{w:.9}")
            } else {
                format!("{w:.9}({tag})")
            }
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

fn cmd_corpus(filter: Option<&str>) -> ExitCode {
    let tol = Tolerances::default();
    let mut all_ok = true;
    let mut rows = 0usize;
    println!(
        "{:<14} {:>7} {:<44} {:<44} {:>12}  {}",
        "model", "status", "expected", "got", "residual", "constant"
    );
    for spec in quadiag::corpus::fixtures() {
        if let Some(f) = filter {
            if !spec.name.contains(f) {
                continue;
            }
        }
        rows += 1;
        let expected = spec.expected.as_ref().expect("fixtures carry expectations");
        let form = match quadiag::corpus::generate(&spec.name, &spec.parameters) {
            Ok(f) => f,
            Err(e) => {
                println!("{:<14} {:>7} generation failed: {e}", spec.name, "FAIL");
                all_ok = false;
                continue;
            }
        };
        let opts = DiagonalizeOptions {
            allow_partial: expected.requires_partial,
        };
        let outcome = diagonalize(&form, &opts, &tol);
        let d = match outcome {
            Ok(d) => d,
            Err(e) => {
                println!("{:<14} {:>7} diagonalization failed: {e}", spec.name, "FAIL");
                all_ok = false;
                continue;
            }
        };
        let rep = verify(&d, &form, &tol);
        let exp_oms: Vec<(f64, &str)> = expected
            .omegas
            .iter()
            .map(|(w, t)| (*w, tag_str(*t)))
            .collect();
        let got_oms: Vec<(f64, &str)> = d
            .modes
            .iter()
            .map(|m| (m.omega, tag_str(m.tag)))
            .collect();
        let spectrum_ok = exp_oms.len() == got_oms.len()
            && exp_oms
                .iter()
                .zip(got_oms.iter())
                .all(|((we, te), (wg, tg))| (we - wg).abs() < 1e-9 && te == tg);
        let constant_ok = (expected.constant - d.constant).abs() < 1e-9;
        let residual_ok = d.residual.len() == expected.residual_count;
        let verify_ok = rep.worst() < 1e-9;
        let ok = spectrum_ok && constant_ok && residual_ok && verify_ok;
        all_ok &= ok;
        println!(
            "{:<14} {:>7} {:<44} {:<44} {:>12.3e}  {:+.9} vs {:+.9}",
            spec.name,
            if ok { "ok" } else { "FAIL" },
            format_omegas(&exp_oms),
            format_omegas(&got_oms),
            rep.worst(),
            expected.constant,
            d.constant,
        );
    }
    if rows == 0 {
        eprintln!("no fixtures match the filter");
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
