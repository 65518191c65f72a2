//! `orient`: runs task files and axiom checks.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use orient_core::axioms::Fault;
use orient_core::fgl::TheoryKind;
use orient_core::task::{
    exit_code, render_machine, render_text, run_task, RunOptions, TaskFile, TaskKind,
    Truncation,
};
use orient_core::Error;

#[derive(Parser)]
#[command(name = "orient", version, about = "Exact computations in oriented cohomology theories")]
struct Cli {
    /// Starting equivariant truncation cap.
    #[arg(long, global = true, value_name = "CAP")]
    truncation: Option<u32>,
    /// Largest cap automatic raising may reach.
    #[arg(long, global = true, value_name = "CAP")]
    max_raise: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = Output::Text)]
    output: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML task file.
    Run { file: PathBuf },
    /// Check the theory axioms at a truncation order.
    CheckAxioms {
        #[arg(long)]
        theory: TheoryArg,
        #[arg(long, default_value_t = 12)]
        order: u32,
        /// Inject a deliberate fault.
        #[arg(long)]
        fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoryArg {
    Chow,
    Ktheory,
    Universal,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    PerturbInverse,
}

fn load(cli: &Cli) -> Result<TaskFile, Error> {
    match &cli.command {
        Command::Run { file } => {
            let src = std::fs::read_to_string(file)
                .map_err(|e| Error::InvalidTask(format!("cannot read {}: {e}", file.display())))?;
            TaskFile::parse(&src)
        }
        Command::CheckAxioms { theory, order, fault } => Ok(TaskFile {
            theory: match theory {
                TheoryArg::Chow => TheoryKind::Additive,
                TheoryArg::Ktheory => TheoryKind::Multiplicative,
                TheoryArg::Universal => TheoryKind::Universal,
            },
            task: TaskKind::CheckAxioms,
            truncation: Truncation {
                order: Some(*order),
                ..Truncation::default()
            },
            space: None,
            lines: Default::default(),
            bundles: Default::default(),
            integrand: None,
            obstruction: Default::default(),
            torus_rank: None,
            components: Vec::new(),
            n: None,
            fault: fault.map(|FaultArg::PerturbInverse| Fault::PerturbInverse),
            expect: None,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let opts = RunOptions {
        order: None,
        cap: cli.truncation,
        max_cap: cli.max_raise,
    };
    let outcome = load(&cli).and_then(|t| run_task(&t, &opts));
    match &outcome {
        Ok(report) => match cli.output {
            Output::Text => print!("{}", render_text(report)),
            Output::Machine => print!("{}", render_machine(report)),
        },
        Err(e) => match cli.output {
            Output::Text => eprintln!("error: {e}"),
            Output::Machine => println!(
                "{}",
                serde_json::json!({ "error": e.to_string(), "truncation": e.is_truncation() })
            ),
        },
    }
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    ExitCode::from(exit_code(&outcome) as u8)
}
