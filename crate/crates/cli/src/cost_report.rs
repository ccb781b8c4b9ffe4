//! `cost`: modeled gate counts per phase across lattice sizes.

use std::io::Write;
use std::path::Path;

use qlbm_core::cost::{fit_per_step, fit_permutation, scaling_table, write_scaling_csv, CostModel, Fit, ScalingRow};
use qlbm_core::lbm::Relaxation;

use crate::output::{io_context, write_with};
use crate::CliError;

pub const DEFAULT_SIZES: [usize; 4] = [2, 4, 8, 16];

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub rows: Vec<ScalingRow>,
    /// `a + b log2(N)^2` for collision plus propagation.
    pub per_step: Fit,
    /// `c log2(N)^k` for the encoding permutation.
    pub permutation: Fit,
    /// Largest deviation of the flag-free collision count from the first size.
    pub collision_spread: f64,
}

impl CostReport {
    pub fn max_residual(&self) -> f64 {
        self.per_step.max_relative_residual.max(self.permutation.max_relative_residual)
    }

    pub fn write_fits<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "phase,form,coefficient,value")?;
        writeln!(out, "per_step,a+b*log2(N)^2,a,{}", self.per_step.coefficients[0])?;
        writeln!(out, "per_step,a+b*log2(N)^2,b,{}", self.per_step.coefficients[1])?;
        writeln!(out, "per_step,a+b*log2(N)^2,max_relative_residual,{:e}", self.per_step.max_relative_residual)?;
        writeln!(out, "permutation,c*log2(N)^k,c,{}", self.permutation.coefficients[0])?;
        writeln!(out, "permutation,c*log2(N)^k,k,{}", self.permutation.coefficients[1])?;
        writeln!(out, "permutation,c*log2(N)^k,max_relative_residual,{:e}", self.permutation.max_relative_residual)?;
        writeln!(out, "collision,constant+2*log2(N)^2,spread,{}", self.collision_spread)
    }
}

pub fn cost_report(sizes: &[usize], relaxation: Relaxation) -> Result<CostReport, CliError> {
    if sizes.len() < 2 {
        return Err(CliError::Usage("invalid `sizes`: need at least two lattice sizes".into()));
    }
    if let Some(&l) = sizes.iter().find(|l| !l.is_power_of_two() || **l < 2) {
        return Err(CliError::Usage(format!("invalid `sizes`: {l} is not a power of two of at least 2")));
    }
    let rows = scaling_table(sizes, relaxation, &CostModel::default())?;
    let per_step = fit_per_step(&rows)?;
    let permutation = fit_permutation(&rows)?;
    let base = rows[0].collision_local();
    let collision_spread = rows.iter().map(|r| (r.collision_local() - base).abs()).fold(0.0, f64::max);
    Ok(CostReport {
        rows,
        per_step,
        permutation,
        collision_spread,
    })
}

/// Writes `cost_scaling.csv` and `cost_fits.csv` into `dir`.
pub fn cost_command(sizes: &[usize], relaxation: Relaxation, dir: &Path) -> Result<CostReport, CliError> {
    let report = cost_report(sizes, relaxation)?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create `{}`", dir.display()), e))?;
    write_with(&dir.join("cost_scaling.csv"), |out| Ok(write_scaling_csv(&report.rows, out)?))?;
    let fits = dir.join("cost_fits.csv");
    write_with(&fits, |out| report.write_fits(out).map_err(io_context(&fits)))?;
    Ok(report)
}
