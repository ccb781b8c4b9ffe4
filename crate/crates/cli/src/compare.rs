//! `compare`: relative errors between two run directories.
//!
//! Run `b` is the reference. Each step present in both directories is read
//! back, `f` and (when both runs wrote it) `g` are compared entry by entry,
//! and the site sums `sigma_f`, `sigma_g` are compared the same way.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use qlbm_core::circuit::{estimate_observables, Decoded};
use qlbm_core::compare::{compare_fields, CompareOptions, ErrorReport};
use qlbm_core::lbm::{LatticeGrid, Q};

use crate::output::{f_path, g_path, io_context, read_f, read_g, write_with};
use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CompareSettings {
    /// Restricts the `f` threshold to channels whose reference value exceeds
    /// this fraction of the reference site mass.
    pub dominant: Option<f64>,
    /// Maximum accepted relative error on `f` (dominant channels when set).
    pub tolerance: Option<f64>,
    /// Report directory; defaults to `<run_a>/compare`.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepComparison {
    pub step: usize,
    pub f: ErrorReport,
    /// Largest relative error over dominant `f` channels, when requested.
    pub f_dominant: Option<f64>,
    pub sigma_f: ErrorReport,
    pub g: Option<ErrorReport>,
    pub sigma_g: Option<ErrorReport>,
}

impl StepComparison {
    /// The quantity checked against the tolerance.
    pub fn f_checked(&self) -> f64 {
        self.f_dominant.unwrap_or(self.f.max_relative)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub run_a: PathBuf,
    pub run_b: PathBuf,
    pub grid: LatticeGrid,
    pub steps: Vec<StepComparison>,
    /// Success probabilities recorded by run `a`, if it is a circuit run.
    pub probabilities: Option<String>,
    /// Modeled gate count recorded by run `a`.
    pub modeled_gates: Option<f64>,
    pub tolerance: Option<f64>,
}

impl ComparisonReport {
    pub fn max_f(&self) -> f64 {
        self.steps.iter().map(StepComparison::f_checked).fold(0.0, f64::max)
    }

    pub fn max_g(&self) -> Option<f64> {
        self.steps
            .iter()
            .filter_map(|s| s.g.as_ref().map(|g| g.max_relative))
            .reduce(f64::max)
    }

    pub fn passed(&self) -> bool {
        self.tolerance.is_none_or(|tol| self.max_f() <= tol)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,quantity,key,epsilon")?;
        for s in &self.steps {
            let t = s.step;
            for (i, e) in s.f.per_col_max.iter().enumerate() {
                writeln!(out, "{t},f,channel_{i},{e:.6e}")?;
            }
            write_norms(&mut out, t, "f", &s.f)?;
            if let Some(d) = s.f_dominant {
                writeln!(out, "{t},f,dominant_max,{d:.6e}")?;
            }
            for (site, e) in s.sigma_f.relative.iter().enumerate() {
                let (x, y) = self.grid.coords(site);
                writeln!(out, "{t},sigma_f,site_{x}_{y},{:.6e}", e.unwrap_or(0.0))?;
            }
            write_norms(&mut out, t, "sigma_f", &s.sigma_f)?;
            if let Some(g) = &s.g {
                for (c, e) in g.per_col_max.iter().enumerate() {
                    writeln!(out, "{t},g,channels_{}_{},{e:.6e}", c / Q, c % Q)?;
                }
                write_norms(&mut out, t, "g", g)?;
            }
            if let Some(sg) = &s.sigma_g {
                write_norms(&mut out, t, "sigma_g", sg)?;
            }
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("run: {}\n", self.run_a.display()));
        s.push_str(&format!("reference: {}\n", self.run_b.display()));
        s.push_str(&format!("grid: {}x{}\n", self.grid.lx(), self.grid.ly()));
        s.push_str("step  max_eps_f     dominant_f    l2_f          max_eps_g     max_eps_sigma_g\n");
        for st in &self.steps {
            let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
            s.push_str(&format!(
                "{:<5} {:<13.6e} {:<13} {:<13.6e} {:<13} {}\n",
                st.step,
                st.f.max_relative,
                opt(st.f_dominant),
                st.f.l2_relative,
                opt(st.g.as_ref().map(|g| g.max_relative)),
                opt(st.sigma_g.as_ref().map(|g| g.max_relative)),
            ));
        }
        if let Some(p) = &self.probabilities {
            s.push_str("success probabilities of run:\n");
            s.push_str(p);
        }
        if let Some(c) = self.modeled_gates {
            s.push_str(&format!("modeled gate count of run: {c}\n"));
        }
        match self.tolerance {
            Some(tol) => s.push_str(&format!(
                "tolerance {tol:e} on f: {} (worst {:.6e})\n",
                if self.passed() { "pass" } else { "FAIL" },
                self.max_f()
            )),
            None => s.push_str(&format!("worst f error {:.6e}\n", self.max_f())),
        }
        s
    }
}

fn write_norms<W: Write>(out: &mut W, t: usize, quantity: &str, r: &ErrorReport) -> std::io::Result<()> {
    writeln!(out, "{t},{quantity},max,{:.6e}", r.max_relative)?;
    writeln!(out, "{t},{quantity},l2,{:.6e}", r.l2_relative)?;
    writeln!(out, "{t},{quantity},linf,{:.6e}", r.linf)
}

/// Steps `t >= 1` with an `f` file in `dir`.
pub fn list_steps(dir: &Path) -> Result<BTreeSet<usize>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(format!("cannot list `{}`", dir.display()), e))?;
    let mut steps = BTreeSet::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(format!("cannot list `{}`", dir.display()), e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(t) = name.strip_prefix("step_").and_then(|r| r.strip_suffix("_f.csv")) {
            if let Ok(t) = t.parse() {
                steps.insert(t);
            }
        }
    }
    Ok(steps)
}

/// Largest relative error over `(site, channel)` entries of `b` above
/// `fraction` of that site's mass.
pub fn dominant_error(report: &ErrorReport, b: &[f64], fraction: f64) -> f64 {
    report.max_relative_where(|site, i| {
        let mass: f64 = b[site * Q..(site + 1) * Q].iter().sum();
        b[site * Q + i] > fraction * mass
    })
}

pub fn compare_runs(run_a: &Path, run_b: &Path, settings: &CompareSettings) -> Result<ComparisonReport, CliError> {
    let (steps_a, steps_b) = (list_steps(run_a)?, list_steps(run_b)?);
    if steps_a != steps_b || steps_a.is_empty() {
        return Err(qlbm_core::Error::ShapeMismatch {
            expected: format!("steps {:?} from `{}`", steps_a, run_a.display()),
            found: format!("steps {:?} in `{}`", steps_b, run_b.display()),
        }
        .into());
    }
    let options = CompareOptions::default();
    let mut grid = None;
    let mut steps = Vec::new();
    for &t in &steps_a {
        let fa = read_f(&f_path(run_a, t))?;
        let fb = read_f(&f_path(run_b, t))?;
        if fa.grid() != fb.grid() {
            return Err(qlbm_core::Error::ShapeMismatch {
                expected: format!("{:?}", fa.grid()),
                found: format!("{:?}", fb.grid()),
            }
            .into());
        }
        let g_grid = fa.grid();
        grid = Some(g_grid);
        let n = g_grid.n_sites();
        let f = compare_fields(fa.values(), fb.values(), n, Q, options)?;
        let f_dominant = settings.dominant.map(|frac| dominant_error(&f, fb.values(), frac));
        let sum = |v: &[f64]| -> Vec<f64> { v.chunks(Q).map(|c| c.iter().sum()).collect() };
        let sigma_f = compare_fields(&sum(fa.values()), &sum(fb.values()), n, 1, options)?;

        let (ga, gb) = (g_path(run_a, t), g_path(run_b, t));
        let (g, sigma_g) = if ga.exists() && gb.exists() {
            let da = Decoded {
                f: fa.values().to_vec(),
                g: read_g(&ga, g_grid)?,
            };
            let db = Decoded {
                f: fb.values().to_vec(),
                g: read_g(&gb, g_grid)?,
            };
            let g = compare_fields(&da.g, &db.g, n * n, Q * Q, options)?;
            let (oa, ob) = (estimate_observables(g_grid, &da)?, estimate_observables(g_grid, &db)?);
            let sigma_g = compare_fields(&oa.sigma_g, &ob.sigma_g, n * n, 1, options)?;
            (Some(g), Some(sigma_g))
        } else {
            (None, None)
        };
        steps.push(StepComparison {
            step: t,
            f,
            f_dominant,
            sigma_f,
            g,
            sigma_g,
        });
    }
    let probabilities = std::fs::read_to_string(run_a.join("probabilities.csv")).ok();
    let modeled_gates = std::fs::read_to_string(run_a.join("costs.csv")).ok().map(|text| {
        text.lines()
            .skip(1)
            .filter_map(|l| l.rsplit(',').next()?.parse::<f64>().ok())
            .sum()
    });
    Ok(ComparisonReport {
        run_a: run_a.to_path_buf(),
        run_b: run_b.to_path_buf(),
        grid: grid.expect("at least one step"),
        steps,
        probabilities,
        modeled_gates,
        tolerance: settings.tolerance,
    })
}

/// Compares, writes `compare.csv` and `summary.txt`, and fails with a
/// tolerance error when a threshold was given and exceeded.
pub fn compare_command(run_a: &Path, run_b: &Path, settings: &CompareSettings) -> Result<ComparisonReport, CliError> {
    let report = compare_runs(run_a, run_b, settings)?;
    let out = settings.out.clone().unwrap_or_else(|| run_a.join("compare"));
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(format!("cannot create `{}`", out.display()), e))?;
    let csv = out.join("compare.csv");
    write_with(&csv, |w| report.write_csv(w).map_err(io_context(&csv)))?;
    let summary = out.join("summary.txt");
    write_with(&summary, |w| w.write_all(report.summary().as_bytes()).map_err(io_context(&summary)))?;
    if !report.passed() {
        return Err(CliError::Tolerance(format!(
            "worst f error {:.6e} exceeds {:e}",
            report.max_f(),
            report.tolerance.unwrap_or_default()
        )));
    }
    Ok(report)
}
