use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use residua::constraints::ConstraintSet;
use residua::driver::{self, Outputs};
use residua::interp::{diff_test, Verdict};
use residua::specializer::{specialize_program, SpecializeConfig, DEFAULT_VARIANT_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Report,
    Program,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Html,
    Both,
}

/// Specialize a MiniF77 program with respect to known input values.
#[derive(Debug, Parser)]
#[command(name = "residua", version)]
struct Args {
    /// Source files or directories of `.f` files.
    #[arg(long, required = true, num_args = 1..)]
    src: Vec<PathBuf>,
    /// Constraint file (`GLOBAL:` / `UNIT name:` bindings).
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// all | none | keep:<file>
    #[arg(long, default_value = "all")]
    policy: String,
    #[arg(long, value_enum, default_value_t = Emit::Both)]
    emit: Emit,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
    #[arg(long, default_value_t = DEFAULT_VARIANT_CAP)]
    variant_cap: usize,
    /// Differential-test trials run before the residual is written.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, env = "RESIDUA_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the residual program without differential testing.
    #[arg(long)]
    unchecked: bool,
    /// Check an existing residual (files or directories) against the
    /// sources instead of generating one; needs `--emit program`.
    #[arg(long, num_args = 1..)]
    residual: Vec<PathBuf>,
}

enum Failure {
    Input(String),
    Verification(String),
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}

fn run(args: &Args) -> Result<(), Failure> {
    let input = |e: &dyn std::fmt::Display| Failure::Input(format!("error: {e}"));
    let program = driver::load_program(&args.src).map_err(|e| input(&e))?;
    let cs = match &args.constraints {
        Some(p) => driver::load_constraints(p).map_err(|e| input(&e))?,
        None => ConstraintSet::new(),
    };
    let policy = driver::load_policy(&args.policy).map_err(|e| input(&e))?;
    let config = SpecializeConfig {
        policy,
        variant_cap: args.variant_cap,
    };
    if !args.residual.is_empty() && args.emit != Emit::Program {
        return Err(Failure::Input("error: --residual needs --emit program".into()));
    }
    let mut spec = specialize_program(&program, &cs, &config).map_err(|e| input(&e))?;
    for d in &spec.report.diagnostics {
        eprintln!("{d}");
    }
    if !args.residual.is_empty() {
        spec.program = driver::load_program(&args.residual).map_err(|e| input(&e))?;
    }

    let program_out = matches!(args.emit, Emit::Program | Emit::Both);
    if program_out && !args.unchecked {
        let verdict = diff_test(&program, &spec.program, &spec.constraints, args.trials, args.seed)
            .map_err(|e| input(&e))?;
        if let Verdict::Fail(cx) = verdict {
            return Err(Failure::Verification(format!(
                "error: residual differs from the original on trial {} (seed {})\n  input: {:?}\n  original: {:?}\n  residual: {:?}",
                cx.trial, args.seed, cx.input, cx.original, cx.residual
            )));
        }
    }
    let report_out = matches!(args.emit, Emit::Report | Emit::Both);
    let files = driver::render_outputs(
        &program,
        &spec,
        Outputs {
            program: program_out,
            json: report_out && matches!(args.format, Format::Json | Format::Both),
            html: report_out && matches!(args.format, Format::Html | Format::Both),
        },
    );
    driver::write_outputs(&args.out, &files).map_err(|e| input(&e))?;
    Ok(())
}
