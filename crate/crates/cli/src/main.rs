use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qlbm_cli::compare::{compare_command, CompareSettings};
use qlbm_cli::config::{read_config_file, ExperimentConfig};
use qlbm_cli::cost_report::{cost_command, DEFAULT_SIZES};
use qlbm_cli::run::run_experiment;
use qlbm_cli::tgv::tgv_command;
use qlbm_cli::CliError;
use qlbm_core::lbm::Relaxation;

/// Carleman lattice-Boltzmann emulator: classical engines, the statevector
/// circuit and its cost model.
#[derive(Debug, Parser)]
#[command(name = "qlbm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one engine and write a run directory.
    Run(ExperimentArgs),
    /// Compare run A against reference run B.
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
        /// Only threshold f channels above this fraction of the site mass.
        #[arg(long)]
        dominant: Option<f64>,
        /// Maximum accepted relative error on f.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Report directory (default: <RUN_A>/compare).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Taylor–Green velocity grids for the LBM and Carleman engines.
    Tgv {
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Maximum accepted statevector-vs-Carleman velocity difference.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Modeled gate counts per phase across lattice sizes.
    Cost {
        /// Square lattice sizes.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SIZES)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5.0)]
        tau: f64,
        /// Maximum accepted relative fit residual.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, default_value = "runs/cost")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// key=value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    lx: Option<String>,
    #[arg(long)]
    ly: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    umax: Option<String>,
    /// two-pi or pi.
    #[arg(long)]
    kmode: Option<String>,
    /// random or taylor-green.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    amplitude: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    /// statevector, shots, classical-carleman or classical-lbm.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    shots: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let file = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        let flags: BTreeMap<String, String> = [
            ("scenario", self.scenario.clone()),
            ("lx", self.lx.clone()),
            ("ly", self.ly.clone()),
            ("tau", self.tau.clone()),
            ("umax", self.umax.clone()),
            ("kmode", self.kmode.clone()),
            ("init", self.init.clone()),
            ("amplitude", self.amplitude.clone()),
            ("steps", self.steps.clone()),
            ("mode", self.mode.clone()),
            ("shots", self.shots.clone()),
            ("seed", self.seed.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
        .collect();
        ExperimentConfig::resolve(&file, &flags)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let config = args.resolve()?;
            let summary = run_experiment(&config)?;
            println!("wrote {} steps to {}", summary.steps, summary.dir.display());
            if let Some(p) = summary.cumulative_probability {
                for (t, q) in summary.success_probabilities.iter().enumerate() {
                    println!("step {}: success probability {q:.6e}", t + 1);
                }
                println!("cumulative success probability {p:.6e}");
            }
        }
        Command::Compare {
            run_a,
            run_b,
            dominant,
            tolerance,
            out,
        } => {
            let settings = CompareSettings { dominant, tolerance, out };
            match compare_command(&run_a, &run_b, &settings) {
                Ok(report) => print!("{}", report.summary()),
                Err(e @ CliError::Tolerance(_)) => {
                    if let Ok(report) = qlbm_cli::compare::compare_runs(&run_a, &run_b, &settings) {
                        print!("{}", report.summary());
                    }
                    return Err(e);
                }
                Err(e) => return Err(e),
            }
        }
        Command::Tgv { experiment, tolerance } => {
            let config = experiment.resolve()?;
            let summary = tgv_command(&config)?;
            println!("wrote {} grids per engine to {}", summary.steps.len(), summary.dir.display());
            println!("largest Carleman-vs-LBM velocity gap {:.6e}", summary.max_velocity_gap());
            println!("largest LBM mass drift {:.3e}", summary.max_mass_drift());
            if let Some(d) = summary.max_statevector_diff() {
                println!("largest statevector-vs-Carleman velocity difference {d:.3e}");
                if let Some(tol) = tolerance.filter(|&tol| d > tol) {
                    return Err(CliError::Tolerance(format!("velocity difference {d:.3e} exceeds {tol:e}")));
                }
            }
        }
        Command::Cost {
            sizes,
            tau,
            tolerance,
            out,
        } => {
            let relaxation = Relaxation::from_tau(tau)?;
            let report = cost_command(&sizes, relaxation, &out)?;
            println!("lx  log2N  qubits  permutation  collision  propagation  per_step");
            for r in &report.rows {
                println!(
                    "{:<3} {:<6} {:<7} {:<12} {:<10} {:<12} {}",
                    r.lx,
                    r.log2_n,
                    r.n_qubits,
                    r.permutation,
                    r.collision,
                    r.propagation,
                    r.per_step()
                );
            }
            let (ps, pm) = (&report.per_step, &report.permutation);
            println!(
                "per step = {:.3} + {:.3} log2(N)^2 (residual {:.2e})",
                ps.coefficients[0], ps.coefficients[1], ps.max_relative_residual
            );
            println!(
                "permutation = {:.3} log2(N)^{:.3} (residual {:.2e})",
                pm.coefficients[0], pm.coefficients[1], pm.max_relative_residual
            );
            if let Some(tol) = tolerance.filter(|&tol| report.max_residual() > tol) {
                return Err(CliError::Tolerance(format!(
                    "fit residual {:.3e} exceeds {tol:e}",
                    report.max_residual()
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
