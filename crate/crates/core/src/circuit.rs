//! The local-encoding Carleman circuit: state preparation, permutation into
//! relative coordinates, LCU collision with per-step postselection, and
//! register-shift propagation.

use std::collections::BTreeMap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::carleman::{g_index, CollisionTensors};
use crate::cost::{CostEntry, CostModel};
use crate::encoding::{permutation_plan, Axis};
use crate::error::{Error, Result};
use crate::lbm::{ChannelSet, DistributionField, LatticeGrid, Relaxation, Q};
use crate::statevector::{
    multinomial, Control, DenseUnitary, GateOp, Register, RegisterLayout, StateVector, C64, CHANNEL_QUBITS,
    COLLISION_QUBITS,
};

/// Dimension of the `(c1, c2, tau, a_diag)` subspace.
pub const LOCAL_DIM: usize = 1 << COLLISION_QUBITS;

const CHANNEL_DIM: usize = 1 << CHANNEL_QUBITS;

/// Index into the `(c1, c2, tau, a_diag)` subspace.
pub fn collision_index(c1: usize, c2: usize, tau: usize, a_diag: usize) -> usize {
    c1 + CHANNEL_DIM * (c2 + CHANNEL_DIM * (tau + 2 * a_diag))
}

/// Real `LOCAL_DIM x LOCAL_DIM` collision operator acting on one lattice
/// address. The `tau = 0` sector holds `f` (with `c2 = 0`), `tau = 1` holds
/// `g`, and `a_diag = 1` marks the diagonal `g(x, x)` that feeds `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedCollisionOperator {
    matrix: Vec<f64>,
}

impl EmbeddedCollisionOperator {
    pub fn new(tensors: &CollisionTensors) -> Self {
        let mut m = vec![0.0; LOCAL_DIM * LOCAL_DIM];
        for k in 0..LOCAL_DIM {
            m[k * LOCAL_DIM + k] = 1.0;
        }
        let mut set = |r: usize, c: usize, v: f64| m[r * LOCAL_DIM + c] = v;
        for i in 0..Q {
            for j in 0..Q {
                set(collision_index(i, 0, 0, 0), collision_index(j, 0, 0, 0), tensors.a[i][j]);
                for k in 0..Q {
                    set(collision_index(i, 0, 0, 0), collision_index(j, k, 1, 1), tensors.b[i][j][k]);
                }
            }
        }
        for a in 0..2 {
            for i in 0..Q {
                for j in 0..Q {
                    for k in 0..Q {
                        for l in 0..Q {
                            set(
                                collision_index(i, j, 1, a),
                                collision_index(k, l, 1, a),
                                tensors.a[i][k] * tensors.a[j][l],
                            );
                        }
                    }
                }
            }
        }
        Self { matrix: m }
    }

    /// Row-major entries.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * LOCAL_DIM + col]
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..LOCAL_DIM)
            .map(|r| {
                let row = &self.matrix[r * LOCAL_DIM..(r + 1) * LOCAL_DIM];
                row.iter().zip(v).filter(|(m, _)| **m != 0.0).map(|(m, x)| x * *m).sum()
            })
            .collect()
    }
}

pub fn build_embedded_collision(tensors: &CollisionTensors) -> EmbeddedCollisionOperator {
    EmbeddedCollisionOperator::new(tensors)
}

/// `M = s U ((D1 + D2) / 2) V` with `D1,2 = D ± i sqrt(I - D^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LcuCollision {
    pub scale: f64,
    pub u: DenseUnitary,
    pub v: DenseUnitary,
    pub d: Vec<f64>,
    pub d1: Vec<C64>,
    pub d2: Vec<C64>,
}

/// SVD split of a real square matrix (`dim` a power of two).
///
/// Basis states on which `m` is exactly the identity are left out of the
/// SVD; they carry singular value 1.
pub fn lcu_decompose(m: &[f64], dim: usize) -> Result<LcuCollision> {
    if !dim.is_power_of_two() || m.len() != dim * dim {
        return Err(Error::ShapeMismatch {
            expected: format!("{dim}x{dim} with dim a power of two"),
            found: format!("{} entries", m.len()),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("M", "non-finite entry"));
    }
    let trivial = |k: usize| {
        (0..dim).all(|l| {
            let e = if l == k { 1.0 } else { 0.0 };
            m[k * dim + l] == e && m[l * dim + k] == e
        })
    };
    let active: Vec<usize> = (0..dim).filter(|&k| !trivial(k)).collect();
    let a = active.len();

    let mut sigma = vec![1.0; dim];
    let mut u_full = identity(dim);
    let mut v_full = identity(dim);
    if a > 0 {
        let block: Vec<f64> = active
            .iter()
            .flat_map(|&r| active.iter().map(move |&c| m[r * dim + c]))
            .collect();
        let svd = jacobi_svd(&block, a)?;
        for (r, &row) in active.iter().enumerate() {
            sigma[row] = svd.singular[r];
            for (c, &col) in active.iter().enumerate() {
                u_full[row * dim + col] = svd.u[r * a + c];
                // V in the split is the transpose of the right factor
                v_full[row * dim + col] = svd.v[c * a + r];
            }
        }
    }
    let scale = sigma.iter().copied().fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::invalid("M", "zero operator has no LCU split"));
    }
    let d: Vec<f64> = sigma.iter().map(|s| (s / scale).min(1.0)).collect();
    let d1: Vec<C64> = d.iter().map(|&x| C64::new(x, (1.0 - x * x).sqrt())).collect();
    let d2: Vec<C64> = d1.iter().map(|z| z.conj()).collect();
    Ok(LcuCollision {
        scale,
        u: DenseUnitary::from_real(dim, &u_full)?,
        v: DenseUnitary::from_real(dim, &v_full)?,
        d,
        d1,
        d2,
    })
}

struct Svd {
    /// Row-major; columns are left singular vectors.
    u: Vec<f64>,
    singular: Vec<f64>,
    /// Row-major; columns are right singular vectors.
    v: Vec<f64>,
}

/// One-sided Jacobi SVD of a row-major `n x n` matrix.
///
/// Chosen over a bidiagonalizing SVD because it keeps full accuracy on the
/// heavily repeated singular values of `A ⊗ A`. Columns whose norm collapses
/// to rounding level are replaced by an orthonormal completion.
fn jacobi_svd(a: &[f64], n: usize) -> Result<Svd> {
    const MAX_SWEEPS: usize = 60;
    // column-major working copies
    let mut w: Vec<f64> = (0..n * n).map(|k| a[(k % n) * n + k / n]).collect();
    let mut v = vec![0.0; n * n];
    for k in 0..n {
        v[k * n + k] = 1.0;
    }
    let col = |k: usize| k * n..(k + 1) * n;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for (x, y) in w[col(p)].iter().zip(&w[col(q)]) {
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for r in 0..n {
                        let (x, y) = (m[p * n + r], m[q * n + r]);
                        m[p * n + r] = c * x - s * y;
                        m[q * n + r] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNonConvergence);
    }
    let singular: Vec<f64> = (0..n).map(|k| w[col(k)].iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let largest = singular.iter().copied().fold(0.0, f64::max);
    let cutoff = n as f64 * f64::EPSILON * largest;
    // U column by column in decreasing singular value, each orthogonalized
    // twice against those already built; rank-deficient columns are
    // completed from unit vectors the same way
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| singular[y].total_cmp(&singular[x]));
    let mut u = vec![0.0; n * n];
    let mut done: Vec<usize> = Vec::with_capacity(n);
    let mut candidate = 0;
    for &k in &order {
        loop {
            let mut e = vec![0.0; n];
            let from_data = singular[k] > cutoff;
            if from_data {
                for r in 0..n {
                    e[r] = w[k * n + r] / singular[k];
                }
            } else {
                if candidate == n {
                    return Err(Error::SvdNonConvergence);
                }
                e[candidate] = 1.0;
                candidate += 1;
            }
            for _ in 0..2 {
                for &j in &done {
                    let uj = &u[j * n..(j + 1) * n];
                    let dot: f64 = e.iter().zip(uj).map(|(x, y)| x * y).sum();
                    for (x, y) in e.iter_mut().zip(uj) {
                        *x -= dot * y;
                    }
                }
            }
            let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
            if from_data || norm > 0.5 {
                for r in 0..n {
                    u[k * n + r] = e[r] / norm;
                }
                done.push(k);
                break;
            }
        }
    }
    let singular = (0..n).map(|k| if singular[k] > cutoff { singular[k] } else { 0.0 }).collect();
    let to_row_major = |m: &[f64]| (0..n * n).map(|k| m[(k % n) * n + k / n]).collect();
    Ok(Svd {
        u: to_row_major(&u),
        singular,
        v: to_row_major(&v),
    })
}

fn identity(dim: usize) -> Vec<f64> {
    let mut m = vec![0.0; dim * dim];
    for k in 0..dim {
        m[k * dim + k] = 1.0;
    }
    m
}

impl LcuCollision {
    /// `s U ((D1 + D2) / 2) V`, row-major.
    pub fn reconstruct(&self) -> Vec<C64> {
        let n = self.u.dim();
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in 0..n {
                let u = self.u.get(r, k);
                if u == C64::new(0.0, 0.0) {
                    continue;
                }
                let w = u * (self.d1[k] + self.d2[k]) * (0.5 * self.scale);
                for c in 0..n {
                    let v = self.v.get(k, c);
                    if v != C64::new(0.0, 0.0) {
                        out[r * n + c] += w * v;
                    }
                }
            }
        }
        out
    }
}

/// One entry of a circuit description.
#[derive(Debug, Clone, PartialEq)]
pub enum CircuitOp {
    Gate(GateOp),
    /// Keep only the branch where `register == value`.
    Postselect { register: Register, value: usize },
}

impl CircuitOp {
    pub fn label(&self) -> &'static str {
        match self {
            CircuitOp::Gate(g) => g.label,
            CircuitOp::Postselect { .. } => "postselect",
        }
    }
}

/// Runs `ops` in order; returns the probability of each postselection.
pub fn execute(state: &mut StateVector, ops: &[CircuitOp]) -> Result<Vec<f64>> {
    let mut probabilities = Vec::new();
    for op in ops {
        match op {
            CircuitOp::Gate(g) => state.apply(g)?,
            CircuitOp::Postselect { register, value } => probabilities.push(state.postselect(*register, *value)?),
        }
    }
    Ok(probabilities)
}

/// `f_i(x)` and `g_ij(x1, x2)` in their natural layouts.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    /// Read amplitudes directly.
    Exact,
    /// Estimate amplitudes from `shots` multinomial samples per step.
    Shots { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub success_probability: f64,
    pub cumulative_probability: f64,
    pub global_scale: f64,
    pub decoded: Decoded,
    /// Shots surviving every postselection up to this step.
    pub retained_shots: Option<u64>,
    /// Largest population left on `a_diag = 1` or `a_lcu = 1`.
    pub ancilla_population: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub grid: LatticeGrid,
    pub relaxation: Relaxation,
    pub n_qubits: usize,
    pub lcu_scale: f64,
    pub initial_scale: f64,
    pub readout: Readout,
    pub steps: Vec<StepRecord>,
    pub costs: Vec<CostEntry>,
    /// Final-step counts in shot mode.
    pub final_counts: Option<BTreeMap<usize, u64>>,
}

impl RunRecord {
    pub fn cumulative_probability(&self) -> f64 {
        self.steps.last().map_or(1.0, |s| s.cumulative_probability)
    }

    pub fn write_probabilities_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "step,success_probability,cumulative_probability,global_scale")?;
        for s in &self.steps {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e}",
                s.step, s.success_probability, s.cumulative_probability, s.global_scale
            )?;
        }
        Ok(())
    }
}

/// The assembled circuit for one grid and relaxation time.
#[derive(Debug, Clone)]
pub struct QlbmCircuit {
    layout: RegisterLayout,
    relaxation: Relaxation,
    lcu: LcuCollision,
    permutation: Vec<CircuitOp>,
    collision: Vec<CircuitOp>,
    propagation: Vec<CircuitOp>,
}

impl QlbmCircuit {
    pub fn new(grid: LatticeGrid, tensors: &CollisionTensors, channels: &ChannelSet) -> Result<Self> {
        let layout = RegisterLayout::for_grid(grid);
        let lcu = lcu_decompose(build_embedded_collision(tensors).matrix(), LOCAL_DIM)?;
        Ok(Self {
            layout,
            relaxation: tensors.relaxation,
            permutation: permutation_ops(&layout),
            collision: collision_ops(&layout, &lcu)?,
            propagation: propagation_ops(&layout, channels, 1),
            lcu,
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn lcu(&self) -> &LcuCollision {
        &self.lcu
    }

    pub fn permutation_ops(&self) -> &[CircuitOp] {
        &self.permutation
    }

    pub fn collision_ops(&self) -> &[CircuitOp] {
        &self.collision
    }

    pub fn propagation_ops(&self) -> &[CircuitOp] {
        &self.propagation
    }

    /// Loads `f0` and `f0 ⊗ f0`, then moves `g` into relative coordinates.
    pub fn prepare(&self, f0: &DistributionField) -> Result<StateVector> {
        let (ops, scale) = preparation_ops(f0, &self.layout)?;
        let mut state = StateVector::zero(self.layout.n_qubits());
        execute(&mut state, &ops)?;
        execute(&mut state, &self.permutation)?;
        state.set_global_scale(scale);
        Ok(state)
    }

    /// One LCU collision; returns the postselection probability.
    pub fn collide(&self, state: &mut StateVector) -> Result<f64> {
        let p = execute(state, &self.collision)?;
        state.set_global_scale(state.global_scale() * self.lcu.scale);
        Ok(p[0])
    }

    pub fn propagate(&self, state: &mut StateVector) -> Result<()> {
        execute(state, &self.propagation).map(|_| ())
    }

    pub fn decode(&self, state: &StateVector) -> Decoded {
        decode_state(state, &self.layout, |idx| (state.amplitudes()[idx] * state.global_scale()).re)
    }

    pub fn run(&self, f0: &DistributionField, steps: usize, readout: Readout) -> Result<RunRecord> {
        if steps == 0 {
            return Err(Error::invalid("steps", "must be at least 1"));
        }
        if let Readout::Shots { shots: 0, .. } = readout {
            return Err(Error::invalid("shots", "must be at least 1"));
        }
        let model = CostModel::default();
        let (prep_ops, initial_scale) = preparation_ops(f0, &self.layout)?;
        let mut costs = vec![
            CostEntry::new(0, "preparation", model.ops_cost(&prep_ops, &self.layout)),
            CostEntry::new(0, "permutation", model.ops_cost(&self.permutation, &self.layout)),
        ];
        let mut state = self.prepare(f0)?;
        let mut records = Vec::with_capacity(steps);
        let mut cumulative = 1.0;
        let mut final_counts = None;
        for t in 1..=steps {
            let p = self.collide(&mut state)?;
            self.propagate(&mut state)?;
            cumulative *= p;
            costs.push(CostEntry::new(t, "collision", model.ops_cost(&self.collision, &self.layout)));
            costs.push(CostEntry::new(t, "propagation", model.ops_cost(&self.propagation, &self.layout)));
            let ancilla_population = state
                .probability(self.layout.a_diag, 1)
                .max(state.probability(self.layout.a_lcu, 1));
            let (decoded, retained) = match readout {
                Readout::Exact => (self.decode(&state), None),
                Readout::Shots { shots, seed } => {
                    let est = self.sample_step(&state, t, cumulative, shots, seed)?;
                    if t == steps {
                        final_counts = Some(est.counts.clone());
                    }
                    (est.decoded, Some(est.retained))
                }
            };
            log::debug!("step {t}: p = {p:.6e}, cumulative = {cumulative:.6e}");
            records.push(StepRecord {
                step: t,
                success_probability: p,
                cumulative_probability: cumulative,
                global_scale: state.global_scale(),
                decoded,
                retained_shots: retained,
                ancilla_population,
            });
        }
        costs.push(CostEntry::new(steps, "readout", model.readout_cost(&self.layout)));
        Ok(RunRecord {
            grid: self.layout.grid,
            relaxation: self.relaxation,
            n_qubits: self.layout.n_qubits(),
            lcu_scale: self.lcu.scale,
            initial_scale,
            readout,
            steps: records,
            costs,
            final_counts,
        })
    }

    /// A `t`-step shot experiment on the current state: the retained shot
    /// count is binomial in the cumulative success probability, the rest is
    /// a multinomial over the postselected state. Amplitude magnitudes are
    /// estimated as `s^t * scale0 * sqrt(count / shots)`, which equals
    /// `scale_t * sqrt(count / retained)` with the cumulative probability
    /// replaced by its estimate `retained / shots`.
    fn sample_step(&self, state: &StateVector, t: usize, cumulative: f64, shots: u64, seed: u64) -> Result<ShotEstimate> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let retained = Binomial::new(shots, cumulative.clamp(0.0, 1.0))
            .map_err(|e| Error::invalid("shots", e.to_string()))?
            .sample(&mut rng);
        if retained == 0 {
            return Err(Error::PostselectionImpossible {
                probability: cumulative,
            });
        }
        let probs: Vec<f64> = state.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        let drawn = multinomial(retained, &probs, &mut rng)?;
        // scale_t = scale0 * s^t * sqrt(cumulative)
        let unconditioned = state.global_scale() / cumulative.sqrt();
        let decoded = decode_state(state, &self.layout, |idx| unconditioned * (drawn[idx] as f64 / shots as f64).sqrt());
        let counts = drawn.into_iter().enumerate().filter(|&(_, c)| c > 0).collect();
        Ok(ShotEstimate {
            retained,
            counts,
            decoded,
        })
    }
}

struct ShotEstimate {
    retained: u64,
    counts: BTreeMap<usize, u64>,
    decoded: Decoded,
}

fn decode_state(state: &StateVector, layout: &RegisterLayout, value: impl Fn(usize) -> f64) -> Decoded {
    debug_assert_eq!(state.n_qubits(), layout.n_qubits());
    let grid = layout.grid;
    let n = grid.n_sites();
    let mut f = vec![0.0; n * Q];
    let mut g = vec![0.0; n * n * Q * Q];
    for x1 in 0..n {
        for i in 0..Q {
            f[x1 * Q + i] = value(layout.f_index(x1, i));
        }
        for rel in 0..n {
            let x2 = grid.add_sites(x1, rel);
            for i in 0..Q {
                for j in 0..Q {
                    g[g_index(n, x1, x2, i, j)] = value(layout.g_index(x1, rel, i, j));
                }
            }
        }
    }
    Decoded { f, g }
}

/// Amplitude loading for `f0` and `f0 ⊗ f0`, and the matching global scale
/// `sqrt(|f|^2 + |f|^4)`.
pub fn preparation_ops(f0: &DistributionField, layout: &RegisterLayout) -> Result<(Vec<CircuitOp>, f64)> {
    if f0.grid() != layout.grid {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", layout.grid),
            found: format!("{:?}", f0.grid()),
        });
    }
    let norm2 = f0.norm_squared();
    if !(norm2 > 0.0) {
        return Err(Error::ZeroField);
    }
    let norm = norm2.sqrt();
    let n = layout.grid.n_sites();
    let mut unit = vec![0.0; n * CHANNEL_DIM];
    for x in 0..n {
        for i in 0..Q {
            unit[x * CHANNEL_DIM + i] = f0.get(x, i) / norm;
        }
    }
    let p = norm2 / (1.0 + norm2);
    let alpha = 2.0 * p.sqrt().asin();
    let first: Vec<usize> = layout.c1.qubits().into_iter().chain(layout.p1.qubits()).collect();
    let second: Vec<usize> = layout.c2.qubits().into_iter().chain(layout.p2.qubits()).collect();
    let tau = layout.tau.qubit(0);
    let ops = vec![
        CircuitOp::Gate(GateOp::load("load f", first, &unit, vec![])?),
        CircuitOp::Gate(GateOp::ry("split tau", tau, alpha, vec![])),
        CircuitOp::Gate(GateOp::load("load f (second copy)", second, &unit, vec![Control::on(tau)])?),
    ];
    Ok((ops, (norm2 + norm2 * norm2).sqrt()))
}

pub fn prepare_initial_state(f0: &DistributionField, layout: &RegisterLayout) -> Result<StateVector> {
    let (ops, scale) = preparation_ops(f0, layout)?;
    let mut state = StateVector::zero(layout.n_qubits());
    execute(&mut state, &ops)?;
    execute(&mut state, &permutation_ops(layout))?;
    state.set_global_scale(scale);
    Ok(state)
}

fn axis_register(layout: &RegisterLayout, reg: Register, axis: Axis) -> Register {
    match axis {
        Axis::X => layout.x_part(reg),
        Axis::Y => layout.y_part(reg),
    }
}

/// Controlled shifts `p2 -= p1` on the `tau = 1` sector.
pub fn permutation_ops(layout: &RegisterLayout) -> Vec<CircuitOp> {
    let tau = layout.tau.qubit(0);
    permutation_plan(layout.grid)
        .into_iter()
        .map(|d| {
            let control = axis_register(layout, layout.p1, d.axis).qubit(d.bit);
            let target = axis_register(layout, layout.p2, d.axis);
            CircuitOp::Gate(GateOp::shift(
                "permute",
                target,
                d.amount,
                vec![Control::on(control), Control::on(tau)],
            ))
        })
        .collect()
}

/// X on `a_diag` where `p2 = 0` and `tau = 1`. Self-inverse.
pub fn flag_gate(layout: &RegisterLayout, label: &'static str) -> GateOp {
    let mut controls = layout.p2.equals(0);
    controls.push(Control::on(layout.tau.qubit(0)));
    GateOp::x(label, layout.a_diag.qubit(0), controls)
}

pub fn flag_diagonal(state: &mut StateVector, layout: &RegisterLayout) -> Result<()> {
    state.apply(&flag_gate(layout, "flag"))
}

pub fn unflag_diagonal(state: &mut StateVector, layout: &RegisterLayout) -> Result<()> {
    state.apply(&flag_gate(layout, "unflag"))
}

/// Flag, `V`, LCU select on `a_lcu`, `U`, postselect `a_lcu = 0`, unflag.
pub fn collision_ops(layout: &RegisterLayout, lcu: &LcuCollision) -> Result<Vec<CircuitOp>> {
    let local: Vec<usize> = (0..COLLISION_QUBITS).collect();
    let a_lcu = layout.a_lcu.qubit(0);
    Ok(vec![
        CircuitOp::Gate(flag_gate(layout, "flag")),
        CircuitOp::Gate(GateOp::unitary("V", local.clone(), lcu.v.clone(), vec![])?),
        CircuitOp::Gate(GateOp::h("prepare a_lcu", a_lcu)),
        CircuitOp::Gate(GateOp::diagonal("D1", local.clone(), lcu.d1.clone(), vec![Control::off(a_lcu)])?),
        CircuitOp::Gate(GateOp::diagonal("D2", local.clone(), lcu.d2.clone(), vec![Control::on(a_lcu)])?),
        CircuitOp::Gate(GateOp::h("unprepare a_lcu", a_lcu)),
        CircuitOp::Gate(GateOp::unitary("U", local, lcu.u.clone(), vec![])?),
        CircuitOp::Postselect {
            register: layout.a_lcu,
            value: 0,
        },
        CircuitOp::Gate(flag_gate(layout, "unflag")),
    ])
}

/// Applies the collision and returns the postselection probability; the
/// global scale picks up `s * sqrt(probability)`.
pub fn collision_step(state: &mut StateVector, layout: &RegisterLayout, lcu: &LcuCollision) -> Result<f64> {
    let p = execute(state, &collision_ops(layout, lcu)?)?;
    state.set_global_scale(state.global_scale() * lcu.scale);
    Ok(p[0])
}

/// `p1 += c_i` on every sector and `p2 += c_j - c_i` on `tau = 1`, each
/// controlled on the channel registers. `direction = -1` streams backwards.
pub fn propagation_ops(layout: &RegisterLayout, channels: &ChannelSet, direction: i64) -> Vec<CircuitOp> {
    let mut ops = Vec::new();
    let mut push = |reg: Register, delta: i64, controls: Vec<Control>| {
        if reg.width > 0 && delta != 0 {
            ops.push(CircuitOp::Gate(GateOp::shift("stream", reg, direction * delta, controls)));
        }
    };
    for i in 0..Q {
        let c = channels.velocity(i);
        push(layout.x_part(layout.p1), c[0], layout.c1.equals(i));
        push(layout.y_part(layout.p1), c[1], layout.c1.equals(i));
    }
    for i in 0..Q {
        for j in 0..Q {
            let (ci, cj) = (channels.velocity(i), channels.velocity(j));
            let mut controls = layout.c1.equals(i);
            controls.extend(layout.c2.equals(j));
            controls.push(Control::on(layout.tau.qubit(0)));
            push(layout.x_part(layout.p2), cj[0] - ci[0], controls.clone());
            push(layout.y_part(layout.p2), cj[1] - ci[1], controls);
        }
    }
    ops
}

pub fn propagation_step(state: &mut StateVector, layout: &RegisterLayout, channels: &ChannelSet) -> Result<()> {
    execute(state, &propagation_ops(layout, channels, 1)).map(|_| ())
}

/// Builds the circuit for `f0`'s grid and runs `steps` steps.
pub fn run(
    f0: &DistributionField,
    relaxation: Relaxation,
    steps: usize,
    readout: Readout,
    channels: &ChannelSet,
) -> Result<RunRecord> {
    let tensors = CollisionTensors::new(channels, relaxation);
    QlbmCircuit::new(f0.grid(), &tensors, channels)?.run(f0, steps, readout)
}

/// Places natural-layout `(f, g)` into a state with encoded coordinates.
/// The amplitudes are normalized and the norm moved into the global scale.
pub fn embed_state(layout: &RegisterLayout, f: &[f64], g: &[f64]) -> Result<StateVector> {
    let grid = layout.grid;
    let n = grid.n_sites();
    if f.len() != n * Q || g.len() != n * n * Q * Q {
        return Err(Error::ShapeMismatch {
            expected: format!("f: {}, g: {}", n * Q, n * n * Q * Q),
            found: format!("f: {}, g: {}", f.len(), g.len()),
        });
    }
    let mut amps = vec![C64::new(0.0, 0.0); layout.dim()];
    for x1 in 0..n {
        for i in 0..Q {
            amps[layout.f_index(x1, i)] = C64::new(f[x1 * Q + i], 0.0);
        }
        for x2 in 0..n {
            let rel = grid.sub_sites(x2, x1);
            for i in 0..Q {
                for j in 0..Q {
                    amps[layout.g_index(x1, rel, i, j)] = C64::new(g[g_index(n, x1, x2, i, j)], 0.0);
                }
            }
        }
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::ZeroField);
    }
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(layout.n_qubits(), amps, norm)
}

/// Site sums `sigma_f(x) = sum_i f_i(x)` and `sigma_g(x1, x2) = sum_ij g_ij(x1, x2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub sigma_f: Vec<f64>,
    /// Indexed `x1 * N + x2`.
    pub sigma_g: Vec<f64>,
}

pub fn estimate_observables(grid: LatticeGrid, decoded: &Decoded) -> Result<Observables> {
    let n = grid.n_sites();
    if decoded.f.len() != n * Q || decoded.g.len() != n * n * Q * Q {
        return Err(Error::ShapeMismatch {
            expected: format!("f: {}, g: {}", n * Q, n * n * Q * Q),
            found: format!("f: {}, g: {}", decoded.f.len(), decoded.g.len()),
        });
    }
    Ok(Observables {
        sigma_f: decoded.f.chunks(Q).map(|c| c.iter().sum()).collect(),
        sigma_g: decoded.g.chunks(Q * Q).map(|c| c.iter().sum()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carleman::{carleman_collision, carleman_run, carleman_stream, CarlemanState, Representation};
    use crate::compare::{compare_fields, CompareOptions};
    use crate::encoding::encode;
    use crate::lbm::{random_init, taylor_green_init, WaveMode};
    use crate::statevector::GateKind;
    use rand::Rng;

    fn ch() -> ChannelSet {
        ChannelSet::d2q9()
    }

    fn tensors(tau: f64) -> CollisionTensors {
        CollisionTensors::new(&ch(), Relaxation::from_tau(tau).unwrap())
    }

    fn max_rel(a: &[f64], b: &[f64]) -> f64 {
        compare_fields(a, b, 1, a.len(), CompareOptions::default()).unwrap().max_relative
    }

    fn max_abs(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn embedded_operator_blocks() {
        let t = tensors(2.0);
        let m = build_embedded_collision(&t);
        assert_eq!(m.get(collision_index(1, 0, 0, 0), collision_index(2, 0, 0, 0)), t.a[1][2]);
        assert_eq!(m.get(collision_index(3, 0, 0, 0), collision_index(4, 5, 1, 1)), t.b[3][4][5]);
        assert_eq!(m.get(collision_index(3, 0, 0, 0), collision_index(4, 5, 1, 0)), 0.0);
        assert_eq!(
            m.get(collision_index(1, 2, 1, 0), collision_index(3, 4, 1, 0)),
            t.a[1][3] * t.a[2][4]
        );
        // padding channels are the identity
        for k in [collision_index(9, 0, 0, 0), collision_index(2, 12, 1, 1), collision_index(0, 3, 0, 1)] {
            for l in 0..LOCAL_DIM {
                assert_eq!(m.get(k, l), if k == l { 1.0 } else { 0.0 });
                assert_eq!(m.get(l, k), if k == l { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn embedded_operator_without_b_is_block_diagonal() {
        let mut t = tensors(5.0);
        t.b = [[[0.0; Q]; Q]; Q];
        let m = build_embedded_collision(&t);
        let sector = |k: usize| (k / 256) % 2 + 2 * (k / 512);
        for r in 0..LOCAL_DIM {
            for c in 0..LOCAL_DIM {
                if sector(r) != sector(c) {
                    assert_eq!(m.get(r, c), 0.0);
                }
            }
        }
    }

    #[test]
    fn frozen_relaxation_gives_identity() {
        let t = CollisionTensors::new(&ch(), Relaxation::frozen());
        let m = build_embedded_collision(&t);
        assert!(max_abs(m.matrix(), &identity(LOCAL_DIM)) < 1e-15);
    }

    #[test]
    fn embedded_operator_matches_carleman_collision() {
        let grid = LatticeGrid::square(1).unwrap();
        let f0 = random_init(grid, 4, 0.3, &ch()).unwrap();
        let t = tensors(0.9);
        let state = CarlemanState::from_field(&f0, Representation::Dense);
        let expected = carleman_collision(&state, &t);

        let mut v = vec![C64::new(0.0, 0.0); LOCAL_DIM];
        for i in 0..Q {
            v[collision_index(i, 0, 0, 0)] = C64::new(state.f()[i], 0.0);
            for j in 0..Q {
                // single site: every g entry is diagonal and flagged
                v[collision_index(i, j, 1, 1)] = C64::new(state.g(0, 0, i, j), 0.0);
            }
        }
        let out = m_apply(&t, &v);
        for i in 0..Q {
            assert!((out[collision_index(i, 0, 0, 0)].re - expected.f()[i]).abs() < 1e-13);
            for j in 0..Q {
                assert!((out[collision_index(i, j, 1, 1)].re - expected.g(0, 0, i, j)).abs() < 1e-13);
            }
        }
    }

    fn m_apply(t: &CollisionTensors, v: &[C64]) -> Vec<C64> {
        build_embedded_collision(t).apply(v)
    }

    fn check_reconstruction(m: &[f64], dim: usize) -> LcuCollision {
        let lcu = lcu_decompose(m, dim).unwrap();
        let r = lcu.reconstruct();
        let err = r.iter().zip(m).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12, "reconstruction error {err}");
        for (z1, z2) in lcu.d1.iter().zip(&lcu.d2) {
            assert!((z1.norm() - 1.0).abs() <= 1e-12 && (z2.norm() - 1.0).abs() <= 1e-12);
        }
        assert!(lcu.d.iter().all(|&d| (0.0..=1.0).contains(&d)));
        lcu
    }

    #[test]
    fn lcu_of_identity_and_scalar() {
        let lcu = check_reconstruction(&identity(8), 8);
        assert_eq!(lcu.scale, 1.0);
        assert!(lcu.d.iter().all(|&d| d == 1.0));
        assert!(lcu.d1.iter().chain(&lcu.d2).all(|&z| z == C64::new(1.0, 0.0)));

        let half: Vec<f64> = identity(4).iter().map(|v| 0.5 * v).collect();
        let lcu = check_reconstruction(&half, 4);
        assert!((lcu.scale - 0.5).abs() < 1e-15);
        assert!(lcu.d.iter().all(|&d| (d - 1.0).abs() < 1e-15));
        assert!(lcu_decompose(&[0.0; 4], 2).is_err());
        assert!(lcu_decompose(&[1.0; 3], 3).is_err());
    }

    #[test]
    fn lcu_of_random_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m: Vec<f64> = (0..64).map(|_| rng.random_range(-2.0..2.0)).collect();
        check_reconstruction(&m, 8);
    }

    #[test]
    fn lcu_of_collision_operator() {
        for tau in [1.0, 2.0, 5.0, 10.0] {
            let m = build_embedded_collision(&tensors(tau));
            let lcu = check_reconstruction(m.matrix(), LOCAL_DIM);
            assert!(lcu.scale >= 1.0);
        }
    }

    fn small_layout(l: usize) -> RegisterLayout {
        RegisterLayout::for_grid(LatticeGrid::square(l).unwrap())
    }

    #[test]
    fn preparation_with_unit_norm_splits_evenly() {
        let grid = LatticeGrid::square(2).unwrap();
        let mut values = vec![0.0; 4 * Q];
        values[3] = 0.6;
        values[Q + 2] = 0.8;
        let f0 = DistributionField::from_values(grid, values).unwrap();
        let layout = small_layout(2);
        let s = prepare_initial_state(&f0, &layout).unwrap();
        assert!((s.probability(layout.tau, 0) - 0.5).abs() < 1e-15);
        assert!((s.probability(layout.tau, 1) - 0.5).abs() < 1e-15);
        assert!((s.global_scale() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn preparation_amplitudes() {
        for l in [2, 4] {
            let grid = LatticeGrid::square(l).unwrap();
            let f0 = random_init(grid, 11, 0.2, &ch()).unwrap();
            let layout = small_layout(l);
            let s = prepare_initial_state(&f0, &layout).unwrap();
            let norm2 = f0.norm_squared();
            let denom = (norm2 + norm2 * norm2).sqrt();
            assert!((s.global_scale() - denom).abs() <= 1e-14 * denom);
            assert!((s.norm() - 1.0).abs() < 1e-12);
            let n = grid.n_sites();
            for x in 0..n {
                for i in 0..Q {
                    let a = s.amplitudes()[layout.f_index(x, i)];
                    assert!((a.re - f0.get(x, i) / denom).abs() < 1e-14 && a.im == 0.0);
                }
            }
            let state = CarlemanState::from_field(&f0, Representation::Dense);
            let local = encode(grid, &state.dense_g()).unwrap();
            for x1 in 0..n {
                for rel in 0..n {
                    for i in 0..Q {
                        for j in 0..Q {
                            let a = s.amplitudes()[layout.g_index(x1, rel, i, j)];
                            let expected = local[crate::encoding::local_index(n, x1, rel, i, j)] / denom;
                            assert!((a.re - expected).abs() < 1e-14);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn preparation_rejects_zero_field() {
        let grid = LatticeGrid::square(2).unwrap();
        let f0 = DistributionField::zeros(grid);
        assert!(matches!(prepare_initial_state(&f0, &small_layout(2)), Err(Error::ZeroField)));
    }

    #[test]
    fn flag_examples() {
        let layout = small_layout(2);
        let idx = layout.g_index(1, 3, 2, 2);
        let mut s = StateVector::basis(layout.n_qubits(), idx);
        flag_diagonal(&mut s, &layout).unwrap();
        assert_eq!(s, StateVector::basis(layout.n_qubits(), idx));

        let f0 = random_init(layout.grid, 2, 0.2, &ch()).unwrap();
        let s0 = prepare_initial_state(&f0, &layout).unwrap();
        let mut s = s0.clone();
        flag_diagonal(&mut s, &layout).unwrap();
        assert!(s.probability(layout.a_diag, 1) > 0.0);
        unflag_diagonal(&mut s, &layout).unwrap();
        assert_eq!(s, s0);
    }

    #[test]
    fn collision_with_identity_operator_is_trivial() {
        let layout = small_layout(2);
        let lcu = lcu_decompose(&identity(LOCAL_DIM), LOCAL_DIM).unwrap();
        let f0 = random_init(layout.grid, 3, 0.2, &ch()).unwrap();
        let s0 = prepare_initial_state(&f0, &layout).unwrap();
        let mut s = s0.clone();
        let p = collision_step(&mut s, &layout, &lcu).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        for (a, b) in s.amplitudes().iter().zip(s0.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    /// `(M / s) psi` computed fiber by fiber, outside the circuit.
    fn dense_collision(state: &StateVector, layout: &RegisterLayout, t: &CollisionTensors, s: f64) -> StateVector {
        let m = build_embedded_collision(t);
        let mut flagged = state.clone();
        flag_diagonal(&mut flagged, layout).unwrap();
        let mut out = flagged.amplitudes().to_vec();
        for fiber in (0..layout.dim()).step_by(LOCAL_DIM) {
            let v = &flagged.amplitudes()[fiber..fiber + LOCAL_DIM];
            let w = m.apply(v);
            for (k, x) in w.into_iter().enumerate() {
                out[fiber + k] = x / s;
            }
        }
        let mut result = StateVector::from_amplitudes(layout.n_qubits(), out, state.global_scale() * s).unwrap();
        unflag_diagonal(&mut result, layout).unwrap();
        result
    }

    #[test]
    fn collision_step_matches_dense_oracle() {
        let layout = small_layout(2);
        for tau in [1.0, 5.0] {
            let t = tensors(tau);
            let lcu = lcu_decompose(build_embedded_collision(&t).matrix(), LOCAL_DIM).unwrap();
            let f0 = random_init(layout.grid, 8, 0.2, &ch()).unwrap();
            let s0 = prepare_initial_state(&f0, &layout).unwrap();
            let oracle = dense_collision(&s0, &layout, &t, lcu.scale);
            let p_oracle = oracle.norm().powi(2);

            let mut s = s0.clone();
            let p = collision_step(&mut s, &layout, &lcu).unwrap();
            assert!((p - p_oracle).abs() <= 1e-12);
            for (k, a) in s.amplitudes().iter().enumerate() {
                let expected = oracle.physical(k);
                assert!((s.physical(k) - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
                let _ = a;
            }
            assert!(s.probability(layout.a_diag, 1) <= 1e-24);
            assert!(s.probability(layout.a_lcu, 1) == 0.0);

            // physical values equal the classical local collision
            let state = CarlemanState::from_field(&f0, Representation::Dense);
            let expected = carleman_collision(&state, &t);
            let circuit = QlbmCircuit::new(layout.grid, &t, &ch()).unwrap();
            let d = circuit.decode(&s);
            assert!(max_rel(&d.f, expected.f()) <= 1e-10);
            assert!(max_rel(&d.g, &expected.dense_g()) <= 1e-10);
        }
    }

    #[test]
    fn collision_gates_are_local() {
        let layout = small_layout(4);
        let circuit = QlbmCircuit::new(layout.grid, &tensors(5.0), &ch()).unwrap();
        let lattice = layout.p1.mask() | layout.p2.mask();
        let local = (1usize << COLLISION_QUBITS) - 1;
        for op in circuit.collision_ops() {
            let CircuitOp::Gate(g) = op else { continue };
            let targets: usize = g.targets.iter().map(|q| 1usize << q).sum();
            let controls: usize = g.controls.iter().map(|c| 1usize << c.qubit).sum();
            assert_eq!(targets & lattice, 0, "{} targets a lattice register", g.label);
            match g.label {
                "flag" | "unflag" => {
                    assert_eq!(controls & layout.p1.mask(), 0);
                    assert_eq!(controls & layout.p2.mask(), layout.p2.mask());
                    assert_eq!(targets, layout.a_diag.mask());
                }
                "V" | "U" | "D1" | "D2" => {
                    assert_eq!(targets, local);
                    assert_eq!(controls & lattice, 0);
                }
                _ => assert_eq!(targets, layout.a_lcu.mask()),
            }
        }
    }

    #[test]
    fn rest_channel_state_does_not_propagate() {
        let layout = small_layout(4);
        let idx = layout.g_index(5, 7, 0, 0);
        let mut s = StateVector::basis(layout.n_qubits(), idx);
        propagation_step(&mut s, &layout, &ch()).unwrap();
        assert_eq!(s, StateVector::basis(layout.n_qubits(), idx));
    }

    #[test]
    fn propagation_forward_then_backward_is_identity() {
        let layout = small_layout(4);
        let f0 = random_init(layout.grid, 1, 0.2, &ch()).unwrap();
        let s0 = prepare_initial_state(&f0, &layout).unwrap();
        let mut s = s0.clone();
        propagation_step(&mut s, &layout, &ch()).unwrap();
        assert_ne!(s, s0);
        execute(&mut s, &propagation_ops(&layout, &ch(), -1)).unwrap();
        assert_eq!(s, s0);
    }

    #[test]
    fn propagation_matches_carleman_stream_exhaustively() {
        // every basis pair (x1, x2, i, j) at 2x2, plus f entries
        let layout = small_layout(2);
        let grid = layout.grid;
        let n = grid.n_sites();
        let circuit = QlbmCircuit::new(grid, &tensors(5.0), &ch()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f: Vec<f64> = (0..n * Q).map(|_| rng.random_range(0.1..1.0)).collect();
        let g: Vec<f64> = (0..n * n * Q * Q).map(|_| rng.random_range(0.1..1.0)).collect();
        let mut s = embed_state(&layout, &f, &g).unwrap();
        propagation_step(&mut s, &layout, &ch()).unwrap();
        let decoded = circuit.decode(&s);
        let expected = carleman_stream(&CarlemanState::from_parts(grid, f, g).unwrap(), &ch());
        assert!(max_abs(&decoded.f, expected.f()) < 1e-14);
        assert!(max_abs(&decoded.g, &expected.dense_g()) < 1e-14);
    }

    fn check_run(l: usize, tau: f64, steps: usize, f0: &DistributionField) -> RunRecord {
        let t = tensors(tau);
        let record = run(f0, t.relaxation, steps, Readout::Exact, &ch()).unwrap();
        let reference = carleman_run(f0, &t, steps, Representation::Dense, &ch());
        for (step, expected) in record.steps.iter().zip(&reference[1..]) {
            assert!(max_rel(&step.decoded.f, expected.f()) <= 1e-9, "L={l} tau={tau} step {}", step.step);
            assert!(max_rel(&step.decoded.g, &expected.dense_g()) <= 1e-9);
            assert!(step.ancilla_population <= 1e-12);
        }
        let product: f64 = record.steps.iter().map(|s| s.success_probability).product();
        assert_eq!(record.cumulative_probability(), product);
        record
    }

    #[test]
    fn run_matches_classical_carleman() {
        let grid = LatticeGrid::square(2).unwrap();
        let random = random_init(grid, 7, 0.2, &ch()).unwrap();
        let tg = taylor_green_init(grid, 0.15, WaveMode::TwoPi, &ch()).unwrap();
        let a = check_run(2, 5.0, 5, &random);
        let b = check_run(2, 1.0, 3, &random);
        check_run(2, 5.0, 5, &tg);
        // different success probabilities, same physics through the scale
        assert!((a.steps[0].success_probability - b.steps[0].success_probability).abs() > 0.01);
    }

    #[test]
    fn non_square_run_matches_classical_carleman() {
        let grid = LatticeGrid::new(4, 2).unwrap();
        let f0 = random_init(grid, 3, 0.2, &ch()).unwrap();
        check_run(4, 5.0, 3, &f0);
    }

    #[test]
    fn shot_readout_is_seeded() {
        let grid = LatticeGrid::square(2).unwrap();
        let f0 = random_init(grid, 7, 0.2, &ch()).unwrap();
        let relaxation = Relaxation::from_tau(5.0).unwrap();
        let readout = Readout::Shots { shots: 1_000_000, seed: 3 };
        let a = run(&f0, relaxation, 2, readout, &ch()).unwrap();
        let b = run(&f0, relaxation, 2, readout, &ch()).unwrap();
        assert_eq!(a, b);
        let counts = a.final_counts.as_ref().unwrap();
        assert_eq!(counts.values().sum::<u64>(), a.steps[1].retained_shots.unwrap());
        let exact = run(&f0, relaxation, 2, Readout::Exact, &ch()).unwrap();
        let rest = |r: &RunRecord| r.steps[1].decoded.f[0];
        assert!((rest(&a) - rest(&exact)).abs() < 0.05 * rest(&exact));
        assert!(run(&f0, relaxation, 2, Readout::Shots { shots: 0, seed: 1 }, &ch()).is_err());
    }

    #[test]
    fn observables_examples() {
        let grid = LatticeGrid::square(2).unwrap();
        let f0 = DistributionField::equilibrium_at_rest(grid, &ch());
        let state = CarlemanState::from_field(&f0, Representation::Dense);
        let decoded = Decoded {
            f: state.f().to_vec(),
            g: state.dense_g(),
        };
        let obs = estimate_observables(grid, &decoded).unwrap();
        assert!(obs.sigma_f.iter().all(|s| (s - 1.0).abs() < 1e-15));
        let f1 = random_init(grid, 2, 0.2, &ch()).unwrap();
        let state = CarlemanState::from_field(&f1, Representation::Dense);
        let obs = estimate_observables(
            grid,
            &Decoded {
                f: state.f().to_vec(),
                g: state.dense_g(),
            },
        )
        .unwrap();
        for x in 0..4 {
            assert!((obs.sigma_g[x * 4 + x] - obs.sigma_f[x].powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn payload_kinds_used_by_the_circuit() {
        let layout = small_layout(2);
        let circuit = QlbmCircuit::new(layout.grid, &tensors(5.0), &ch()).unwrap();
        let dense = circuit
            .collision_ops()
            .iter()
            .filter(|op| matches!(op, CircuitOp::Gate(g) if matches!(g.kind, GateKind::Unitary(_)) && g.targets.len() > 1))
            .count();
        assert_eq!(dense, 2);
        assert_eq!(circuit.permutation_ops().len(), layout.grid.log2_n());
    }
}
