//! CSV files of a run directory.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use qlbm_core::carleman::g_index;
use qlbm_core::lbm::{ChannelSet, DistributionField, LatticeGrid, Q};

use crate::CliError;

pub fn f_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("step_{step}_f.csv"))
}

pub fn g_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("step_{step}_g.csv"))
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(format!("cannot create `{}`", path.display()), e))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(format!("cannot open `{}`", path.display()), e))
}

pub fn write_with<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
{
    let mut out = create(path)?;
    body(&mut out)?;
    out.flush().map_err(|e| CliError::io(format!("cannot write `{}`", path.display()), e))
}

pub fn io_context(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(format!("cannot write `{}`", path.display()), e)
}

pub fn write_f(path: &Path, field: &DistributionField) -> Result<(), CliError> {
    write_with(path, |out| Ok(field.write_csv(out)?))
}

pub fn read_f(path: &Path) -> Result<DistributionField, CliError> {
    Ok(DistributionField::read_csv(open(path)?)?)
}

/// `x1,y1,x2,y2,i,j,g` rows of a natural-layout second-order array.
pub fn write_g(path: &Path, grid: LatticeGrid, g: &[f64]) -> Result<(), CliError> {
    let n = grid.n_sites();
    write_with(path, |out| {
        let ctx = io_context(path);
        writeln!(out, "x1,y1,x2,y2,i,j,g").map_err(&ctx)?;
        for x1 in 0..n {
            let (a, b) = grid.coords(x1);
            for x2 in 0..n {
                let (c, d) = grid.coords(x2);
                for i in 0..Q {
                    for j in 0..Q {
                        writeln!(out, "{a},{b},{c},{d},{i},{j},{:.16e}", g[g_index(n, x1, x2, i, j)]).map_err(&ctx)?;
                    }
                }
            }
        }
        Ok(())
    })
}

pub fn read_g(path: &Path, grid: LatticeGrid) -> Result<Vec<f64>, CliError> {
    let n = grid.n_sites();
    let mut g = vec![0.0; n * n * Q * Q];
    let mut seen = 0usize;
    let csv = |line: usize, reason: String| CliError::Numeric(qlbm_core::Error::Csv { line, reason });
    for (k, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| CliError::io(format!("cannot read `{}`", path.display()), e))?;
        if k == 0 {
            if line.trim() != "x1,y1,x2,y2,i,j,g" {
                return Err(csv(1, format!("unexpected header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 7 {
            return Err(csv(k + 1, "expected 7 columns".into()));
        }
        let idx: Vec<usize> = parts[..6]
            .iter()
            .map(|s| s.parse::<usize>().map_err(|e| csv(k + 1, e.to_string())))
            .collect::<Result<_, _>>()?;
        let value: f64 = parts[6].parse().map_err(|e: std::num::ParseFloatError| csv(k + 1, e.to_string()))?;
        if idx[0] >= grid.lx() || idx[2] >= grid.lx() || idx[1] >= grid.ly() || idx[3] >= grid.ly() || idx[4] >= Q || idx[5] >= Q {
            return Err(csv(k + 1, "index out of range for the run's grid".into()));
        }
        let (x1, x2) = (grid.site(idx[0], idx[1]), grid.site(idx[2], idx[3]));
        g[g_index(n, x1, x2, idx[4], idx[5])] = value;
        seen += 1;
    }
    if seen != g.len() {
        return Err(csv(0, format!("expected {} rows, found {seen}", g.len())));
    }
    Ok(g)
}

/// `x,y,ux,uy` grid.
pub fn write_velocity(path: &Path, grid: LatticeGrid, u: &[[f64; 2]]) -> Result<(), CliError> {
    write_with(path, |out| {
        let ctx = io_context(path);
        writeln!(out, "x,y,ux,uy").map_err(&ctx)?;
        for (site, v) in u.iter().enumerate() {
            let (x, y) = grid.coords(site);
            writeln!(out, "{x},{y},{:.16e},{:.16e}", v[0], v[1]).map_err(&ctx)?;
        }
        Ok(())
    })
}

pub fn velocity(field: &DistributionField, channels: &ChannelSet) -> Result<Vec<[f64; 2]>, CliError> {
    Ok(field.velocity_field(channels)?)
}
