use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;
use vcspkit::commands::{self, ResilienceOptions, RouteChoice};
use vcspkit::db::DatabaseFormat;
use vcspkit::structure::structure_to_json;
use vcspkit::Result;
use vcspkit_core::fractional::DEFAULT_OPERATION_CAP;
use vcspkit_core::gadgets::build_witness_model;

#[derive(Parser)]
#[command(name = "vcspkit", version, about = "Valued CSPs and database resilience")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Valued constraint satisfaction instances.
    Vcsp {
        #[command(subcommand)]
        command: VcspCommand,
    },
    /// Searches for cyclic and Siggers fractional polymorphisms.
    Classify {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        /// Also test for a Siggers operation in the support of a 4-ary one.
        #[arg(long)]
        siggers: bool,
        /// Largest number of candidate operations tabulated by a search.
        #[arg(long, default_value_t = DEFAULT_OPERATION_CAP)]
        cap: usize,
    },
    /// Minimum number of tuple copies whose removal falsifies a query.
    Resilience {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        db: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// auto, hitting, dual=<structure.json> or types.
        #[arg(long, default_value = "auto")]
        route: RouteChoice,
        /// Also report whether at most this many copies suffice.
        #[arg(long)]
        threshold: Option<u64>,
        /// Tuple length for the types route.
        #[arg(long)]
        m: Option<usize>,
        /// Writes the dense type structure to this file.
        #[arg(long)]
        export_types: Option<PathBuf>,
    },
    /// Gadget verification.
    Gadgets {
        #[command(subcommand)]
        command: GadgetCommand,
    },
    /// Regular path queries over binary relations.
    Rpq {
        /// For example "R;(S+T)*" or "R^-;R".
        #[arg(long)]
        query: String,
        #[arg(long)]
        db: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Report the resilience instead of the answers.
        #[arg(long)]
        resilience: bool,
    },
}

#[derive(Subcommand)]
enum VcspCommand {
    /// Exact optimum and relaxation bound of an instance.
    Solve {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        /// Overrides the instance's threshold, as `p/q`.
        #[arg(long)]
        threshold: Option<String>,
    },
}

#[derive(Subcommand)]
enum GadgetCommand {
    /// Checks a gadget's claims and prints one verdict per claim.
    Verify {
        /// nae, triangle, or mu1 (alias loop).
        #[arg(long)]
        name: String,
        /// Model to check instead of the shipped one.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Prints the shipped triangle witness model.
    Witness,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for DatabaseFormat {
    fn from(f: Format) -> DatabaseFormat {
        match f {
            Format::Json => DatabaseFormat::Json,
            Format::Csv => DatabaseFormat::Csv,
        }
    }
}

/// The JSON to print and whether every check passed.
fn run(cli: Cli) -> Result<(Value, bool)> {
    let ok = |v: Value| Ok((v, true));
    match cli.command {
        Command::Vcsp {
            command: VcspCommand::Solve {
                structure,
                instance,
                threshold,
            },
        } => {
            let gamma = commands::load_valued_structure(&structure)?;
            let text = vcspkit::error::read_file(&instance)?;
            ok(commands::vcsp_solve(&gamma, &text, threshold.as_deref())?)
        }
        Command::Classify {
            structure,
            arity,
            siggers,
            cap,
        } => {
            let gamma = commands::load_valued_structure(&structure)?;
            ok(commands::classify(&gamma, arity, siggers, cap)?)
        }
        Command::Resilience {
            query,
            db,
            format,
            route,
            threshold,
            m,
            export_types,
        } => {
            let q = commands::load_query(&query)?;
            let db = commands::load_database(&db, format.map(Into::into))?;
            let opts = ResilienceOptions {
                route,
                threshold,
                m,
                export_types: export_types.as_deref(),
            };
            ok(commands::resilience(&q, &db, &opts)?)
        }
        Command::Gadgets {
            command: GadgetCommand::Verify { name, model },
        } => {
            let model = model.map(|p| commands::load_structure(&p)).transpose()?;
            let report = commands::verify_gadget(&name, model.as_ref())?;
            Ok((commands::report_to_json(&report), report.passed()))
        }
        Command::Gadgets {
            command: GadgetCommand::Witness,
        } => ok(structure_to_json(&build_witness_model())),
        Command::Rpq {
            query,
            db,
            format,
            resilience,
        } => {
            let db = commands::load_database(&db, format.map(Into::into))?;
            ok(commands::rpq(&query, &db, resilience)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((value, passed)) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("JSON values serialize"));
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
