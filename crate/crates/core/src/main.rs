use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use geoshot::experiment::{
    export_hamiltonian, load_config, run_scan, run_simulate, run_verify, ValidatedConfig, VerifyOptions, VerifySize,
};
use geoshot::Error;

#[derive(Parser)]
#[command(name = "geoshot", version, about = "Sampling-cost experiments for geometric measurement partitionings")]
struct Cli {
    /// Allow lattices above the desk-scale limit.
    #[arg(long, global = true)]
    large: bool,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Size {
    Default,
    Large,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every grid point of a configuration and write CSV files.
    Scan { config: PathBuf },
    /// Run the built-in verification suite.
    Verify {
        #[arg(long, value_enum, default_value = "default")]
        size: Size,
        /// Write a JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Feed a corrupted partitioning to the validation check (negative control).
        #[arg(long)]
        inject_corruption: bool,
        /// Run only these check ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        /// Print each check's trace.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Write the Hamiltonian and its partitionings in Pauli text format.
    ExportHamiltonian { config: PathBuf },
    /// Run the shot simulator on the ground state.
    Simulate { config: PathBuf },
}

fn validated(path: &Path, large: bool) -> Result<ValidatedConfig, Error> {
    let cfg = load_config(path)?;
    let v = cfg.validate(large)?;
    if v.n_qubits() > geoshot::experiment::DESK_MAX_QUBITS {
        eprintln!(
            "large run: {} qubits, about {:.2} GB",
            v.n_qubits(),
            geoshot::experiment::memory_estimate(v.n_qubits()) / 1e9
        );
    }
    Ok(v)
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Scan { config } => {
            let v = validated(&config, cli.large)?;
            let out = run_scan(&v)?;
            let failed = out.rows.iter().filter(|r| r.status != "ok").count();
            for f in &out.files {
                println!("{}", f.display());
            }
            if failed > 0 {
                eprintln!("{failed} rows did not complete; see the status column");
            }
            Ok(true)
        }
        Command::Verify {
            size,
            report,
            inject_corruption,
            only,
            verbose,
        } => {
            let opts = VerifyOptions {
                size: match size {
                    Size::Default => VerifySize::Default,
                    Size::Large => VerifySize::Large,
                },
                inject_corruption,
                only,
            };
            let r = run_verify(&opts);
            for (line, c) in r.summary_lines().iter().zip(&r.checks) {
                println!("{line}");
                if verbose || !c.passed {
                    for d in c.details.lines() {
                        println!("      {d}");
                    }
                }
            }
            if let Some(path) = report {
                std::fs::write(&path, serde_json::to_string_pretty(&r)?)?;
            }
            Ok(r.passed)
        }
        Command::ExportHamiltonian { config } => {
            let v = validated(&config, cli.large)?;
            for f in export_hamiltonian(&v)? {
                println!("{}", f.display());
            }
            Ok(true)
        }
        Command::Simulate { config } => {
            let v = validated(&config, cli.large)?;
            let rows = run_simulate(&v)?;
            println!("{} rows -> {}", rows.len(), v.config.output.join("simulation.csv").display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
