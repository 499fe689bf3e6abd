//! `wellcond`: generate, check, reduce, compile and solve instances of the
//! well-conditioned matrix problems from the command line.
//!
//! Exit status: 0 on success, 1 when a promise violation is detected, 2 on
//! usage or schema errors.

mod commands;
mod json;
mod report;
mod schema;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use wellcond::problem::{Answer, Tolerances};

use commands::{CompileTarget, Ctx, Outcome, SolveMethod, UsageError};
use report::{FileDigest, RunReport};

#[derive(Debug, Parser)]
#[command(name = "wellcond", version, about = "Well-conditioned matrix problems, reductions and circuit compilation")]
struct Cli {
    /// Seed for generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Equality tolerance for identities and decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Output instance path (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Path for the JSON run report.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Run the invariant suite and print a summary table.
    #[arg(long)]
    self_test: bool,
    /// With --self-test, use the reduced instance counts.
    #[arg(long, requires = "self_test")]
    quick: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AnswerArg {
    One,
    Zero,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    Itmatprod,
    MatinvPlus,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Oracle,
    Series,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded instance satisfying its promise.
    Gen {
        /// Problem type, e.g. MATINV, DET+, ITMATPROD>=0.
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        epsilon: f64,
        /// Force the answer; otherwise it is drawn from the seed.
        #[arg(long, value_enum)]
        answer: Option<AnswerArg>,
    },
    /// Apply one reduction rule.
    Reduce {
        input: PathBuf,
        #[arg(long)]
        rule: String,
    },
    /// Apply a comma-separated list of rules, checking every intermediate promise.
    Chain {
        input: PathBuf,
        #[arg(long, default_value = "")]
        path: String,
    },
    /// Compile a circuit to a product or positive-definite inversion instance.
    CompileCircuit {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "itmatprod")]
        target: TargetArg,
    },
    /// Decide an instance.
    Solve {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "oracle")]
        method: MethodArg,
    },
    /// Check the promise of an instance file or of every `.json` file in a directory.
    Verify { input: PathBuf },
}

fn dispatch(cli: &Cli, ctx: &mut Ctx) -> Result<Outcome, UsageError> {
    if cli.self_test {
        return Ok(commands::self_test(ctx, cli.quick));
    }
    let Some(command) = &cli.command else {
        return Err(UsageError("a subcommand or --self-test is required (see --help)".into()));
    };
    match command {
        Command::Gen {
            kind,
            n,
            m,
            kappa,
            epsilon,
            answer,
        } => {
            let answer = answer.map(|a| match a {
                AnswerArg::One => Answer::One,
                AnswerArg::Zero => Answer::Zero,
            });
            commands::gen(ctx, kind, (*n, *m, *kappa, *epsilon), answer)
        }
        Command::Reduce { input, rule } => commands::reduce(ctx, input, rule),
        Command::Chain { input, path } => commands::chain(ctx, input, path),
        Command::CompileCircuit { input, target } => {
            let target = match target {
                TargetArg::Itmatprod => CompileTarget::ItMatProd,
                TargetArg::MatinvPlus => CompileTarget::MatInvPlus,
            };
            commands::compile_circuit(ctx, input, target)
        }
        Command::Solve { input, method } => {
            let method = match method {
                MethodArg::Oracle => SolveMethod::Oracle,
                MethodArg::Series => SolveMethod::Series,
            };
            commands::solve(ctx, input, method)
        }
        Command::Verify { input } => commands::verify(ctx, input),
    }
}

fn emit(cli: &Cli, ctx: &mut Ctx, outcome: &Outcome) -> Result<(), UsageError> {
    if let Some(bytes) = &outcome.output {
        let path = match &cli.out {
            Some(p) => {
                fs::write(p, bytes).map_err(|e| UsageError(format!("{}: {e}", p.display())))?;
                p.display().to_string()
            }
            None => {
                std::io::stdout().write_all(bytes)?;
                "-".to_string()
            }
        };
        ctx.report.outputs.push(FileDigest {
            path,
            sha256: json::sha256_hex(bytes),
        });
    }
    let to_stderr = outcome.output.is_some() && cli.out.is_none();
    for line in &outcome.summary {
        if to_stderr {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    }
    Ok(())
}

fn write_report(cli: &Cli, report: &RunReport) -> Result<(), UsageError> {
    if let Some(p) = &cli.report {
        fs::write(p, json::to_bytes(report)?).map_err(|e| UsageError(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = Cli::parse();
    let mut ctx = Ctx {
        seed: cli.seed,
        tol: Tolerances::with_identity(cli.tol),
        report: RunReport {
            command: std::env::args().collect(),
            ..RunReport::default()
        },
    };
    let code = match dispatch(&cli, &mut ctx).and_then(|o| emit(&cli, &mut ctx, &o).map(|()| o)) {
        Ok(o) if o.violated => 1,
        Ok(_) => 0,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    };
    ctx.report.finish(code, start.elapsed());
    if let Err(UsageError(msg)) = write_report(&cli, &ctx.report) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    ExitCode::from(code as u8)
}
