//! `pdtl`: parse, prove and simulate models of a temporal dynamic logic.

mod arith;
mod config;
mod corpus;
mod output;
mod prove;
mod simulate;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::SimArgs;

#[derive(Parser, Debug)]
#[command(name = "pdtl", version, about = "Proof checker and trace simulator for time-almost-everywhere safety")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a model and print its problem.
    Parse(ModelArg),
    /// Replay a proof script against a model.
    Prove {
        #[command(flatten)]
        model: ModelArg,
        /// Proof script file, or the name of a bundled script.
        script: String,
    },
    /// Enumerate bounded traces from a start state and check the problem on them.
    Simulate {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Print the topological closure of a formula.
    Closure { formula: String },
    /// Eliminate the quantifiers of a linear formula.
    Qe { formula: String },
    /// Print the polynomial solution of an ODE system.
    SolveOde { system: String },
    /// List the bundled models, or print one of them.
    Examples { name: Option<String> },
}

#[derive(Args, Debug)]
struct ModelArg {
    /// Model file, or the name of a bundled model.
    model: String,
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Refuted = 1,
    Unknown = 2,
    Usage = 64,
    Parse = 65,
}

/// A failure reported on stderr.
#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure { exit: Exit::Usage, message: message.into() }
    }

    pub fn parse(message: impl Into<String>) -> Failure {
        Failure { exit: Exit::Parse, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Usage } else { Exit::Success };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let out = output::Out::new(cli.json);
    let result = match cli.command {
        Command::Parse(m) => corpus::load_model(&m.model).map(|model| {
            out.parse_report(&model);
            Exit::Success
        }),
        Command::Prove { model, script } => prove::run(&out, &model.model, &script),
        Command::Simulate { model, sim } => simulate::run(&out, &model.model, &sim),
        Command::Closure { formula } => arith::closure(&out, &formula),
        Command::Qe { formula } => arith::qe(&out, &formula),
        Command::SolveOde { system } => arith::solve_ode(&out, &system),
        Command::Examples { name } => corpus::examples(&out, name.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            out.failure(&f);
            ExitCode::from(f.exit as u8)
        }
    }
}
