mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spc_core::config::HarnessConfig;

#[derive(Parser, Debug)]
#[command(name = "spc-harness", version, about = "Parse, run, score, benchmark and align structural-modeling programs")]
struct Cli {
    /// Harness configuration file (TOML).
    #[arg(long, global = true, env = "SPC_HARNESS_CONFIG")]
    config: Option<PathBuf>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Record wall time in the manifest (makes outputs non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Static analysis of a program file.
    Parse {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a program file in the sandbox.
    Run {
        file: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
        /// Ground-truth period (s); adds the relative error to the report.
        #[arg(long)]
        gt: Option<f64>,
        #[arg(long)]
        pga: Option<f64>,
        /// Print one line per executed command to stderr.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a raw model output.
    Reward {
        file: PathBuf,
        #[arg(long)]
        gt: f64,
        #[arg(long)]
        pga: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate benchmark cases.
    GenCases {
        #[arg(long, default_value_t = 128)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render template candidates for every case.
    GenCandidates {
        #[arg(long)]
        cases: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated template ids; defaults to the whole library.
        #[arg(long, value_delimiter = ',')]
        templates: Vec<String>,
        #[arg(long, value_enum, default_value_t = Assign::Random)]
        assign: Assign,
    },
    /// Generate a reference-labelled dataset for alignment.
    GenDataset {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a candidate set against cases.
    Evaluate {
        #[arg(long)]
        cases: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        k: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the flat metrics table to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value = "candidates")]
        label: String,
    },
    /// Fit the reference policy and run group-relative optimization.
    Align(AlignArgs),
}

#[derive(Args, Debug)]
struct AlignArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    group_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Assign {
    /// Candidate i uses template i modulo the list length.
    Cycle,
    /// Each candidate draws a template uniformly.
    Random,
}

#[derive(Debug)]
enum CliError {
    /// Bad input, missing file, or invalid configuration.
    Usage(String),
    /// The inputs were valid but the domain operation reported failure.
    Domain(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Domain(_) => 2,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn load_config(path: Option<&PathBuf>) -> CliResult<HarnessConfig> {
    let Some(path) = path else {
        return Ok(HarnessConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    HarnessConfig::from_toml(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = load_config(cli.config.as_ref()).and_then(|cfg| commands::dispatch(cli.command, cfg, cli.timing));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Domain(m) => eprintln!("{m}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
