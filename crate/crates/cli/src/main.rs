//! `gctwist`: drives the groupoid-extension checks from `.gpd.json` files and
//! writes JSON reports.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Outcome};

#[derive(Parser, Debug)]
#[command(name = "gctwist", version, about = "Finite groupoid extensions, twists and their convolution algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Named bundle from the spec file (`bundle` is the default entry).
    #[arg(long, conflicts_with = "bundle_arrows")]
    pub bundle: Option<String>,
    /// JSON array of arrow ids forming the bundle.
    #[arg(long, value_name = "FILE")]
    pub bundle_arrows: Option<PathBuf>,
    /// Override the command's primary tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// `first`, `last`, or `custom FILE`.
    #[arg(long, num_args = 1..=2, value_names = ["POLICY", "FILE"])]
    pub section: Vec<String>,
    /// Directory for the JSON report (also printed to stdout).
    #[arg(short = 'o', long = "out", value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the groupoid axioms and weights.
    Validate {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Bundle flags, the quotient groupoid and principality.
    Quotient {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Character groups of the fibers and the dual action.
    Dual {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// The T-valued cocycle of the twist for a section.
    Cocycle {
        file: PathBuf,
        #[arg(long)]
        check_coboundary: bool,
        /// Also write the cocycle table as CSV.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Isomorphism checks between the algebra models.
    Verify {
        #[arg(value_parser = ["green", "main"])]
        which: String,
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// C*-identity, norm order and I-norm transport on random elements.
    Norms {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Wedderburn block sizes of each model.
    Blocks {
        file: PathBuf,
        /// Restrict to one model.
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// The diagonal subalgebra of the twisted model as a Cartan subalgebra.
    Cartan {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Emit a catalog instance and its manifest.
    Catalog {
        name: String,
        params: Vec<u64>,
        #[arg(short = 'o', long = "out", value_name = "DIR")]
        out: PathBuf,
    },
    /// Exact modular-function factorization and disintegration.
    ModularCheck {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn emit(name: &str, outcome: &Outcome, out: Option<&PathBuf>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&outcome.report).expect("serializable") + "\n";
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, &text).map_err(|e| CliError::io(&path, e))?;
    }
    print!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (name, outcome, out) = match cli.command {
        Command::Validate { file, common } => ("validate", commands::validate(&file, &common)?, common.out),
        Command::Quotient { file, common } => ("quotient", commands::quotient(&file, &common)?, common.out),
        Command::Dual { file, common } => ("dual", commands::dual(&file, &common)?, common.out),
        Command::Cocycle { file, check_coboundary, csv, common } => {
            ("cocycle", commands::cocycle(&file, &common, check_coboundary, csv.as_deref())?, common.out)
        }
        Command::Verify { which, file, common } => {
            if which == "green" {
                ("verify-green", commands::verify_green(&file, &common)?, common.out)
            } else {
                ("verify-main", commands::verify_main(&file, &common)?, common.out)
            }
        }
        Command::Norms { file, common } => ("norms", commands::norms(&file, &common)?, common.out),
        Command::Blocks { file, model, common } => ("blocks", commands::blocks(&file, &common, model.as_deref())?, common.out),
        Command::Cartan { file, common } => ("cartan", commands::cartan(&file, &common)?, common.out),
        Command::Catalog { name, params, out } => ("catalog", commands::catalog(&name, &params, &out)?, None),
        Command::ModularCheck { file, common } => ("modular-check", commands::modular_check(&file, &common)?, common.out),
    };
    emit(name, &outcome, out.as_ref())?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            println!("{}", serde_json::to_string_pretty(&e.report()).expect("serializable"));
            ExitCode::from(e.exit_code())
        }
    }
}
