//! `tgv`: Taylor–Green velocity grids from the LBM and Carleman engines.

use std::io::Write;
use std::path::{Path, PathBuf};

use qlbm_core::carleman::{carleman_run, CollisionTensors};
use qlbm_core::circuit::{QlbmCircuit, Readout};
use qlbm_core::lbm::{bgk_run, ChannelSet, DistributionField};

use crate::config::{ExperimentConfig, Init, Mode};
use crate::output::{io_context, velocity, write_velocity, write_with};
use crate::run::{representation_for, write_echo};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct TgvStep {
    pub step: usize,
    /// `‖u_carleman - u_lbm‖₂ / ‖u_lbm‖₂`, or the plain norm when `u_lbm = 0`.
    pub velocity_gap: f64,
    pub lbm_mass: f64,
    pub carleman_mass: f64,
    /// Largest `|u_statevector - u_carleman|` component, circuit modes only.
    pub statevector_max_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TgvSummary {
    pub dir: PathBuf,
    pub steps: Vec<TgvStep>,
}

impl TgvSummary {
    pub fn max_velocity_gap(&self) -> f64 {
        self.steps.iter().map(|s| s.velocity_gap).fold(0.0, f64::max)
    }

    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.steps[0].lbm_mass;
        self.steps.iter().map(|s| (s.lbm_mass - m0).abs()).fold(0.0, f64::max)
    }

    pub fn max_statevector_diff(&self) -> Option<f64> {
        self.steps.iter().filter_map(|s| s.statevector_max_diff).reduce(f64::max)
    }
}

fn relative_l2(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let (mut d2, mut r2) = (0.0, 0.0);
    for (u, v) in a.iter().zip(b) {
        d2 += (u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2);
        r2 += v[0] * v[0] + v[1] * v[1];
    }
    if r2 > 0.0 {
        (d2 / r2).sqrt()
    } else {
        d2.sqrt()
    }
}

fn difference(a: &[[f64; 2]], b: &[[f64; 2]]) -> Vec<[f64; 2]> {
    a.iter().zip(b).map(|(u, v)| [u[0] - v[0], u[1] - v[1]]).collect()
}

fn grid_path(dir: &Path, name: &str, t: usize) -> PathBuf {
    dir.join(format!("{name}_step_{t}.csv"))
}

pub fn tgv_command(config: &ExperimentConfig) -> Result<TgvSummary, CliError> {
    if config.init != Init::TaylorGreen {
        return Err(CliError::Usage("invalid `init`: tgv needs init=taylor-green".into()));
    }
    let channels = ChannelSet::d2q9();
    let grid = config.grid();
    let dir = config.out.clone();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("cannot create `{}`", dir.display()), e))?;
    let f0 = config.initial_field(&channels)?;
    let tensors = CollisionTensors::new(&channels, config.relaxation());

    let lbm = bgk_run(&f0, config.relaxation(), config.steps, &channels)?;
    let carleman: Vec<DistributionField> = carleman_run(&f0, &tensors, config.steps, representation_for(grid), &channels)
        .iter()
        .map(|s| s.field())
        .collect();
    let statevector: Option<Vec<DistributionField>> = if config.mode.is_quantum() {
        let readout = match (config.mode, config.shots) {
            (Mode::Shots, Some(shots)) => Readout::Shots {
                shots,
                seed: config.seed,
            },
            _ => Readout::Exact,
        };
        let record = QlbmCircuit::new(grid, &tensors, &channels)?.run(&f0, config.steps, readout)?;
        let mut fields = vec![f0.clone()];
        for s in record.steps {
            fields.push(DistributionField::from_values(grid, s.decoded.f)?);
        }
        Some(fields)
    } else {
        None
    };

    let mut steps = Vec::new();
    for t in 0..=config.steps {
        let u_lbm = velocity(&lbm[t], &channels)?;
        let u_car = velocity(&carleman[t], &channels)?;
        write_velocity(&grid_path(&dir, "lbm", t), grid, &u_lbm)?;
        write_velocity(&grid_path(&dir, "carleman", t), grid, &u_car)?;
        write_velocity(&grid_path(&dir, "diff", t), grid, &difference(&u_car, &u_lbm))?;
        let statevector_max_diff = match &statevector {
            Some(fields) => {
                let u_sv = velocity(&fields[t], &channels)?;
                let diff = difference(&u_sv, &u_car);
                write_velocity(&grid_path(&dir, "statevector", t), grid, &u_sv)?;
                write_velocity(&grid_path(&dir, "sv_diff", t), grid, &diff)?;
                Some(diff.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())))
            }
            None => None,
        };
        steps.push(TgvStep {
            step: t,
            velocity_gap: relative_l2(&u_car, &u_lbm),
            lbm_mass: lbm[t].total_mass(),
            carleman_mass: carleman[t].total_mass(),
            statevector_max_diff,
        });
    }
    let summary = TgvSummary { dir: dir.clone(), steps };
    let path = dir.join("tgv_summary.csv");
    write_with(&path, |out| {
        let ctx = io_context(&path);
        writeln!(out, "step,velocity_l2_gap,lbm_mass,carleman_mass,statevector_max_diff").map_err(&ctx)?;
        for s in &summary.steps {
            let sv = s.statevector_max_diff.map_or_else(String::new, |v| format!("{v:.6e}"));
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{sv}",
                s.step, s.velocity_gap, s.lbm_mass, s.carleman_mass
            )
            .map_err(&ctx)?;
        }
        Ok(())
    })?;
    write_echo(&dir, config)?;
    Ok(summary)
}
