//! Analytic gate-count model for the circuit, and the scaling fits over
//! lattice size.
//!
//! Charges: a modular shift on an `r`-qubit register costs `r^2`, a
//! multi-controlled X costs the square of its lattice-register controls, a
//! dense multi-qubit unitary costs `Q^3` and a multi-qubit diagonal `Q^2`
//! with `Q` the channel count, amplitude loading costs one gate per nonzero
//! amplitude, everything on a single qubit costs 1. Controls on channel and
//! ancilla qubits are free.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::carleman::CollisionTensors;
use crate::circuit::{preparation_ops, CircuitOp, QlbmCircuit};
use crate::error::{Error, Result};
use crate::lbm::{ChannelSet, DistributionField, LatticeGrid, Relaxation};
use crate::statevector::{GateKind, RegisterLayout};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub shift: f64,
    pub mcx: f64,
    pub dense: f64,
    pub diagonal: f64,
    pub single: f64,
    pub channels: usize,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            shift: 1.0,
            mcx: 1.0,
            dense: 1.0,
            diagonal: 1.0,
            single: 1.0,
            channels: crate::lbm::Q,
        }
    }
}

impl CostModel {
    pub fn op_cost(&self, op: &CircuitOp, layout: &RegisterLayout) -> f64 {
        let gate = match op {
            CircuitOp::Gate(g) => g,
            CircuitOp::Postselect { .. } => return self.single,
        };
        let lattice = layout.p1.mask() | layout.p2.mask();
        let q = self.channels as f64;
        let width = gate.targets.len();
        match &gate.kind {
            GateKind::Permutation(_) if width == 1 => {
                let k = gate.controls.iter().filter(|c| lattice & (1 << c.qubit) != 0).count();
                if k == 0 {
                    self.single
                } else {
                    self.mcx * (k * k) as f64
                }
            }
            GateKind::Permutation(_) => self.shift * (width * width) as f64,
            GateKind::Unitary(_) if width == 1 => self.single,
            GateKind::Unitary(_) => self.dense * q.powi(3),
            GateKind::Diagonal(_) if width == 1 => self.single,
            GateKind::Diagonal(_) => self.diagonal * q.powi(2),
            GateKind::RotationY(_) => self.single,
            GateKind::Reflection(w) => self.single * w.iter().filter(|&&v| v != 0.0).count() as f64,
        }
    }

    pub fn ops_cost(&self, ops: &[CircuitOp], layout: &RegisterLayout) -> f64 {
        ops.iter().map(|op| self.op_cost(op, layout)).sum()
    }

    /// One estimate per decoded first-order amplitude.
    pub fn readout_cost(&self, layout: &RegisterLayout) -> f64 {
        self.single * (layout.grid.n_sites() * self.channels) as f64
    }
}

/// One row of the cost CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CostEntry {
    pub step: usize,
    pub component: &'static str,
    pub gate_count_model: f64,
}

impl CostEntry {
    pub fn new(step: usize, component: &'static str, gate_count_model: f64) -> Self {
        Self {
            step,
            component,
            gate_count_model,
        }
    }
}

pub fn write_cost_csv<W: Write>(entries: &[CostEntry], mut out: W) -> Result<()> {
    writeln!(out, "step,component,gate_count_model")?;
    for e in entries {
        writeln!(out, "{},{},{}", e.step, e.component, e.gate_count_model)?;
    }
    Ok(())
}

/// Modeled phase costs for one lattice size.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub lx: usize,
    pub ly: usize,
    pub log2_n: usize,
    pub n_qubits: usize,
    pub preparation: f64,
    pub permutation: f64,
    pub collision: f64,
    pub propagation: f64,
}

impl ScalingRow {
    pub fn per_step(&self) -> f64 {
        self.collision + self.propagation
    }

    /// Collision cost without the diagonal flag and unflag.
    pub fn collision_local(&self) -> f64 {
        self.collision - 2.0 * (self.log2_n * self.log2_n) as f64
    }
}

/// Builds the circuit for each square lattice and prices its phases.
pub fn scaling_table(sizes: &[usize], relaxation: Relaxation, model: &CostModel) -> Result<Vec<ScalingRow>> {
    let channels = ChannelSet::d2q9();
    let tensors = CollisionTensors::new(&channels, relaxation);
    sizes
        .iter()
        .map(|&l| {
            let grid = LatticeGrid::square(l)?;
            let circuit = QlbmCircuit::new(grid, &tensors, &channels)?;
            let layout = circuit.layout();
            let f0 = DistributionField::equilibrium_at_rest(grid, &channels);
            let (prep, _) = preparation_ops(&f0, layout)?;
            Ok(ScalingRow {
                lx: l,
                ly: l,
                log2_n: grid.log2_n(),
                n_qubits: layout.n_qubits(),
                preparation: model.ops_cost(&prep, layout),
                permutation: model.ops_cost(circuit.permutation_ops(), layout),
                collision: model.ops_cost(circuit.collision_ops(), layout),
                propagation: model.ops_cost(circuit.propagation_ops(), layout),
            })
        })
        .collect()
}

pub fn write_scaling_csv<W: Write>(rows: &[ScalingRow], mut out: W) -> Result<()> {
    writeln!(out, "lx,ly,log2_n,n_qubits,preparation,permutation,collision,propagation,per_step")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.lx,
            r.ly,
            r.log2_n,
            r.n_qubits,
            r.preparation,
            r.permutation,
            r.collision,
            r.propagation,
            r.per_step()
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub coefficients: Vec<f64>,
    /// Largest `|fit - y| / |y|` over the data.
    pub max_relative_residual: f64,
}

/// Least squares of `y` on the given feature columns.
pub fn fit_linear(features: &[Vec<f64>], y: &[f64]) -> Result<Fit> {
    let rows = y.len();
    if features.is_empty() || features.iter().any(|c| c.len() != rows) || rows < features.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} feature columns of length {rows}, at least as many rows", features.len()),
            found: format!("{:?}", features.iter().map(Vec::len).collect::<Vec<_>>()),
        });
    }
    let a = DMatrix::from_fn(rows, features.len(), |r, c| features[c][r]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().try_svd(true, true, f64::EPSILON, 0).ok_or(Error::SvdNonConvergence)?;
    let x = svd.solve(&b, 1e-12).map_err(|e| Error::invalid("features", e.to_string()))?;
    let fitted = a * &x;
    let max_relative_residual = fitted
        .iter()
        .zip(y)
        .map(|(f, y)| if *y == 0.0 { f.abs() } else { (f - y).abs() / y.abs() })
        .fold(0.0, f64::max);
    Ok(Fit {
        coefficients: x.iter().copied().collect(),
        max_relative_residual,
    })
}

/// `y = a + b log2(N)^2`.
pub fn fit_per_step(rows: &[ScalingRow]) -> Result<Fit> {
    let ones = vec![1.0; rows.len()];
    let log2sq = rows.iter().map(|r| (r.log2_n * r.log2_n) as f64).collect();
    let y: Vec<f64> = rows.iter().map(ScalingRow::per_step).collect();
    fit_linear(&[ones, log2sq], &y)
}

/// Exponent `k` in `y = c x^k`, fitted in log-log space. The residual is
/// measured on `y`.
pub fn fit_power(x: &[f64], y: &[f64]) -> Result<Fit> {
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("data", "power fit needs positive values"));
    }
    let ones = vec![1.0; x.len()];
    let lx = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let fit = fit_linear(&[ones, lx], &ly)?;
    let (c, k) = (fit.coefficients[0].exp(), fit.coefficients[1]);
    let max_relative_residual = x
        .iter()
        .zip(y)
        .map(|(x, y)| (c * x.powf(k) - y).abs() / y)
        .fold(0.0, f64::max);
    Ok(Fit {
        coefficients: vec![c, k],
        max_relative_residual,
    })
}

/// Permutation cost against `log2 N`; the exponent is expected to be 3.
pub fn fit_permutation(rows: &[ScalingRow]) -> Result<Fit> {
    let x: Vec<f64> = rows.iter().map(|r| r.log2_n as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.permutation).collect();
    fit_power(&x, &y)
}
