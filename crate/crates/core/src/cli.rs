//! The `liectl` command line front end.
//!
//! Subcommands: `decompose`, `accessibility`, `classify`, `simulate`,
//! `verify`. Systems come from `--system <file.json>` or a built-in
//! `--preset`. Reports go to stdout as stable `key: value` lines; clouds go
//! to the `--out` CSV path. Exit codes: 0 success, 2 usage/spec error,
//! 3 numerical error (including failed `verify` checks).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::accessibility::GammaOptions;
use crate::controllability::ClassifyOptions;
use crate::error::Error;
use crate::report;
use crate::sim::{self, CloudConfig, Direction};
use crate::specfile::SystemSpecFile;
use crate::spectral::DEFAULT_MODULUS_TOL;
use crate::system::LinearSystem;

#[derive(Parser)]
#[command(
    name = "liectl",
    about = "Discrete-time linear control systems on Lie groups: spectral decomposition, accessibility, controllability verdicts and reachable-set simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Path to a JSON system description.
    #[arg(long, value_name = "FILE")]
    system: Option<PathBuf>,
    /// Built-in preset: `heisenberg-paper` or `aff2-theorem39`.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> crate::Result<LinearSystem> {
        let spec = match (&self.system, &self.preset) {
            (Some(path), None) => SystemSpecFile::from_path(path)?,
            (None, Some(name)) => SystemSpecFile::preset(name)?,
            _ => {
                return Err(Error::Spec(
                    "give exactly one of --system <file> or --preset <name>".into(),
                ))
            }
        };
        spec.build()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of d(f0)_e and the unstable/center/stable splitting.
    Decompose {
        #[command(flatten)]
        source: Source,
        /// Eigenvalue-modulus tolerance against 1.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Forward/backward accessibility rank tests at the identity.
    Accessibility {
        #[command(flatten)]
        source: Source,
        /// Longest adjoint chain.
        #[arg(long)]
        depth: Option<usize>,
        /// Random control tuples per chain length.
        #[arg(long)]
        samples: Option<usize>,
        /// Relative singular-value threshold.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Controllability verdict with theorem citations.
    Classify {
        #[command(flatten)]
        source: Source,
        /// Longest control word in the regular-pair search (default 2·dim).
        #[arg(long)]
        max_k: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        /// Eigenvalue-modulus tolerance against 1.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Breadth-first reachable cloud over the control lattice.
    Simulate {
        #[command(flatten)]
        source: Source,
        /// Number of steps (BFS levels).
        #[arg(long)]
        steps: usize,
        /// CSV output path.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Lattice points per control channel.
        #[arg(long, default_value_t = 5)]
        lattice: usize,
        /// Spatial-hash cell size.
        #[arg(long, default_value_t = 1e-3)]
        prune_cell: f64,
        /// Point budget.
        #[arg(long, default_value_t = 1_000_000)]
        max_points: usize,
        /// `forward` or `backward`.
        #[arg(long, default_value = "forward")]
        direction: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Model self-checks (automorphism, translation identity, closure).
    Verify {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Spec(_) | Error::Argument(_) => 2,
        _ => 3,
    }
}

/// Parse arguments, dispatch and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/usage itself; keep its exit code for --help.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn dispatch(cli: Cli) -> crate::Result<i32> {
    match cli.command {
        Command::Decompose { source, tol } => {
            let sys = source.load()?;
            let report = report::decompose_report(&sys, tol.unwrap_or(DEFAULT_MODULUS_TOL))?;
            print!("{}", report.to_text());
            Ok(0)
        }
        Command::Accessibility {
            source,
            depth,
            samples,
            tol,
            seed,
        } => {
            let sys = source.load()?;
            let defaults = GammaOptions::default();
            let opts = GammaOptions {
                depth: depth.unwrap_or(defaults.depth),
                samples: samples.unwrap_or(defaults.samples),
                tol: tol.unwrap_or(defaults.tol),
                seed,
            };
            let report = report::accessibility_report(&sys, &opts)?;
            print!("{}", report.to_text());
            Ok(0)
        }
        Command::Classify {
            source,
            max_k,
            samples,
            tol,
            seed,
        } => {
            let sys = source.load()?;
            let defaults = ClassifyOptions::default();
            let opts = ClassifyOptions {
                modulus_tol: tol.unwrap_or(defaults.modulus_tol),
                max_k,
                samples: samples.unwrap_or(defaults.samples),
                rank_tol: defaults.rank_tol,
                seed,
            };
            let report = report::classify_report(&sys, &opts)?;
            print!("{}", report.to_text());
            Ok(0)
        }
        Command::Simulate {
            source,
            steps,
            out,
            lattice,
            prune_cell,
            max_points,
            direction,
            seed,
        } => {
            let sys = source.load()?;
            let direction = match direction.as_str() {
                "forward" => Direction::Forward,
                "backward" => Direction::Backward,
                other => {
                    return Err(Error::Argument(format!(
                        "direction must be forward or backward, got '{other}'"
                    )))
                }
            };
            let cfg = CloudConfig {
                steps,
                controls_per_channel: lattice,
                prune_cell,
                max_points,
                seed,
            };
            let cloud = sim::reach_cloud(&sys, &cfg, direction)?;
            if let Some(path) = &out {
                let mut file = std::fs::File::create(path)
                    .map_err(|e| Error::Spec(format!("cannot create {}: {e}", path.display())))?;
                sim::write_csv(sys.model(), &cloud, &mut file)
                    .map_err(|e| Error::Spec(format!("cannot write {}: {e}", path.display())))?;
            }
            let report = report::simulate_report(&cloud, out.as_deref().and_then(|p| p.to_str()));
            print!("{}", report.to_text());
            Ok(0)
        }
        Command::Verify { source, seed } => {
            let sys = source.load()?;
            let (report, ok) = report::verify_report(&sys, seed)?;
            print!("{}", report.to_text());
            Ok(if ok { 0 } else { 3 })
        }
    }
}
