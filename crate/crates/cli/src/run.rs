//! `run`: execute one engine and write its run directory.

use std::io::Write;
use std::path::{Path, PathBuf};

use qlbm_core::carleman::{carleman_run, CollisionTensors, Representation};
use qlbm_core::circuit::{QlbmCircuit, Readout, RunRecord};
use qlbm_core::cost::write_cost_csv;
use qlbm_core::lbm::{bgk_run, ChannelSet, LatticeGrid};
use qlbm_core::statevector::write_counts_csv;

use crate::config::{ExperimentConfig, Mode};
use crate::output::{f_path, g_path, io_context, write_f, write_g, write_with};
use crate::CliError;

/// Second-order files are written up to this many sites (64 sites is
/// already 331 776 rows per step).
pub const MAX_G_SITES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub steps: usize,
    pub success_probabilities: Vec<f64>,
    pub cumulative_probability: Option<f64>,
}

pub fn representation_for(grid: LatticeGrid) -> Representation {
    if grid.n_sites() <= MAX_G_SITES {
        Representation::Dense
    } else {
        Representation::Factored
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary, CliError> {
    let channels = ChannelSet::d2q9();
    let dir = config.out.clone();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("cannot create `{}`", dir.display()), e))?;
    let f0 = config.initial_field(&channels)?;
    let grid = config.grid();
    let tensors = CollisionTensors::new(&channels, config.relaxation());
    log::info!("{} on {}x{} for {} steps", config.mode, config.lx, config.ly, config.steps);

    let mut summary = RunSummary {
        dir: dir.clone(),
        steps: config.steps,
        success_probabilities: Vec::new(),
        cumulative_probability: None,
    };
    match config.mode {
        Mode::Statevector | Mode::Shots => {
            let readout = match (config.mode, config.shots) {
                (Mode::Shots, Some(shots)) => Readout::Shots {
                    shots,
                    seed: config.seed,
                },
                _ => Readout::Exact,
            };
            let circuit = QlbmCircuit::new(grid, &tensors, &channels)?;
            let record = circuit.run(&f0, config.steps, readout)?;
            write_quantum(&dir, &record)?;
            summary.success_probabilities = record.steps.iter().map(|s| s.success_probability).collect();
            summary.cumulative_probability = Some(record.cumulative_probability());
        }
        Mode::ClassicalCarleman => {
            let history = carleman_run(&f0, &tensors, config.steps, representation_for(grid), &channels);
            for (t, state) in history.iter().enumerate().skip(1) {
                write_f(&f_path(&dir, t), &state.field())?;
                if grid.n_sites() <= MAX_G_SITES {
                    write_g(&g_path(&dir, t), grid, &state.dense_g())?;
                }
            }
        }
        Mode::ClassicalLbm => {
            let history = bgk_run(&f0, config.relaxation(), config.steps, &channels)?;
            for (t, field) in history.iter().enumerate().skip(1) {
                write_f(&f_path(&dir, t), field)?;
            }
        }
    }
    write_echo(&dir, config)?;
    Ok(summary)
}

fn write_quantum(dir: &Path, record: &RunRecord) -> Result<(), CliError> {
    let grid = record.grid;
    for s in &record.steps {
        let field = qlbm_core::lbm::DistributionField::from_values(grid, s.decoded.f.clone())?;
        write_f(&f_path(dir, s.step), &field)?;
        if grid.n_sites() <= MAX_G_SITES {
            write_g(&g_path(dir, s.step), grid, &s.decoded.g)?;
        }
    }
    write_with(&dir.join("probabilities.csv"), |out| Ok(record.write_probabilities_csv(out)?))?;
    write_with(&dir.join("costs.csv"), |out| Ok(write_cost_csv(&record.costs, out)?))?;
    if let Some(counts) = &record.final_counts {
        write_with(&dir.join("counts.csv"), |out| Ok(write_counts_csv(counts, record.n_qubits, out)?))?;
    }
    Ok(())
}

/// `config.txt` plus `manifest.txt` with the tool version, seed and the
/// resolved configuration: enough to rerun.
pub fn write_echo(dir: &Path, config: &ExperimentConfig) -> Result<(), CliError> {
    let echo = dir.join("config.txt");
    write_with(&echo, |out| out.write_all(config.to_config_text().as_bytes()).map_err(io_context(&echo)))?;
    let path = dir.join("manifest.txt");
    write_with(&path, |out| {
        let ctx = io_context(&path);
        writeln!(out, "tool=qlbm {}", env!("CARGO_PKG_VERSION")).map_err(&ctx)?;
        writeln!(out, "seed={}", config.seed).map_err(&ctx)?;
        writeln!(out, "[config]").map_err(&ctx)?;
        out.write_all(config.to_config_text().as_bytes()).map_err(&ctx)
    })
}

/// Reads the `[config]` section of a manifest back into a configuration.
pub fn config_from_manifest(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read `{}`", path.display()), e))?;
    let body = text
        .split_once("[config]")
        .map(|(_, b)| b)
        .ok_or_else(|| CliError::Usage(format!("`{}` has no [config] section", path.display())))?;
    let settings = crate::config::parse_config_text(body)?;
    ExperimentConfig::from_settings(&settings)
}
