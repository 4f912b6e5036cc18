//! `germ-solver <subcommand> <file> [--trunc N] [--format json|text] [--seed S]`
//!
//! Exit codes: 0 = task completed (whatever the mathematical verdict),
//! 1 = internal error, 2 = usage or parse error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use germ_cli::pipeline::{run, RunOptions};
use germ_cli::problem::parse_problem;
use germ_cli::report::{emit, ErrorReport, Format};

#[derive(Parser)]
#[command(
    name = "germ-solver",
    about = "Order-by-order solving and solvability certificates for implicit function equations over truncated power-series rings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Problem file (see the grammar in the README).
    file: PathBuf,
    /// Override the file's truncation degree.
    #[arg(long)]
    trunc: Option<u32>,
    /// Output format.
    #[arg(long, default_value = "text")]
    format: String,
    /// Randomize lift tie-breaking (uniqueness experiments).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the order-by-order solver.
    Solve(Common),
    /// Check a solvability certificate declared in the file's task clause.
    Certify(Common),
    /// Root deformation certificates for a polynomial family.
    DeformRoot(Common),
    /// Eigenvalue deformation certificates for a matrix family.
    DeformEig(Common),
    /// Finite-determinacy bound for a germ.
    Determinacy(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Solve(c)
            | Command::Certify(c)
            | Command::DeformRoot(c)
            | Command::DeformEig(c)
            | Command::Determinacy(c) => c,
        }
    }

    fn expected_task(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Certify(_) => "certify",
            Command::DeformRoot(_) => "deform-root",
            Command::DeformEig(_) => "deform-eig",
            Command::Determinacy(_) => "determinacy",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = cli.command.common();
    let format = match common.format.as_str() {
        "json" => Format::Json,
        "text" => Format::Text,
        other => {
            eprintln!("unknown format '{other}' (use json or text)");
            return ExitCode::from(2);
        }
    };

    let usage_error = |message: String, pos: Option<(u32, u32)>| -> ExitCode {
        match format {
            Format::Json => println!("{}", ErrorReport::new(message, pos).to_json()),
            Format::Text => eprintln!("{message}"),
        }
        ExitCode::from(2)
    };

    let text = match std::fs::read_to_string(&common.file) {
        Ok(t) => t,
        Err(e) => return usage_error(format!("cannot read {}: {e}", common.file.display()), None),
    };
    let spec = match parse_problem(&text) {
        Ok(s) => s,
        Err(e) => return usage_error(e.to_string(), Some((e.line, e.col))),
    };

    let expected = cli.command.expected_task();
    if spec.task.kind() != expected {
        return usage_error(
            format!(
                "task mismatch: the file declares '{}' but the subcommand is '{}'",
                spec.task.name(),
                expected
            ),
            None,
        );
    }
    let opts = RunOptions {
        trunc_override: common.trunc,
        seed: common.seed,
    };
    match run(&spec, &opts) {
        Ok(report) => {
            println!("{}", emit(&report, format));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("internal error: {e}");
            ExitCode::from(1)
        }
    }
}
