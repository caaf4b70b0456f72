use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mlsparse::bench::Arm;
use mlsparse::commands::{cmd_bench, cmd_generate, cmd_solve, cmd_verify, exit_code};
use mlsparse::oracle::dense_ceiling_from_env;

#[derive(Parser)]
#[command(name = "mlsparse", version, about = "Two- and three-level block-sparse solvers and benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Streamlined,
    Naive,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem from a spec file.
    Generate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a problem file.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "streamlined")]
        method: Method,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a solution file against its problem.
    Verify {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Time both methods over a ladder of group counts.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let ceiling = dense_ceiling_from_env();
    let result = match cli.command {
        Command::Generate { spec, out } => cmd_generate(&spec, &out).map(|()| 0),
        Command::Solve { input, method, out } => {
            let arm = match method {
                Method::Streamlined => Arm::Streamlined,
                Method::Naive => Arm::Naive,
            };
            cmd_solve(&input, arm, &out, ceiling).map(|file| {
                println!("log|A| = {:.12e}", file.solution.log_abs_det());
                0
            })
        }
        Command::Verify { problem, solution } => cmd_verify(&problem, &solution, ceiling).map(|report| {
            print!("{report}");
            if report.passed() {
                0
            } else {
                2
            }
        }),
        Command::Bench { config, out } => cmd_bench(&config, &out, ceiling, |note| eprintln!("{note}")).map(|outcome| {
            print!("{}", outcome.report.render());
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
