//! Equilibrium and collision tensors of the D2Q9 BGK model and the
//! second-order Carleman evolution in natural `(x1, x2)` coordinates.

use std::io::Write;

use crate::error::{Error, Result};
use crate::lbm::{ChannelSet, DistributionField, LatticeGrid, Relaxation, Q};

pub type Matrix = [[f64; Q]; Q];
pub type Tensor3 = [[[f64; Q]; Q]; Q];

/// `f_eq = L f + Qt f f + Tt f f f` around unit density.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumTensors {
    pub linear: Matrix,
    pub quadratic: Tensor3,
    /// Slice of the quartic tensor; identical for every fourth index.
    pub cubic: Tensor3,
}

/// Collision written as `f' = A f + B f f + C f f f`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionTensors {
    pub relaxation: Relaxation,
    pub a: Matrix,
    pub b: Tensor3,
    /// Slice of the quartic tensor; identical for every fourth index.
    pub c: Tensor3,
}

pub fn build_tensors(channels: &ChannelSet, relaxation: Relaxation) -> (EquilibriumTensors, CollisionTensors) {
    let cs2 = channels.cs2();
    let mut linear = [[0.0; Q]; Q];
    let mut quadratic = [[[0.0; Q]; Q]; Q];
    for i in 0..Q {
        let w = channels.weight(i);
        for j in 0..Q {
            linear[i][j] = w * (1.0 + channels.dot(i, j) / cs2);
            for k in 0..Q {
                quadratic[i][j][k] =
                    w / (cs2 * cs2) * (channels.dot(i, j) * channels.dot(i, k) - cs2 * channels.dot(j, k));
            }
        }
    }
    let mut cubic = quadratic;
    cubic.iter_mut().flatten().flatten().for_each(|v| *v *= -0.5);

    let omega = relaxation.omega();
    let mut a = [[0.0; Q]; Q];
    for i in 0..Q {
        for j in 0..Q {
            let delta = if i == j { 1.0 } else { 0.0 };
            a[i][j] = (1.0 - omega) * delta + omega * linear[i][j];
        }
    }
    let mut b = quadratic;
    b.iter_mut().flatten().flatten().for_each(|v| *v *= omega);
    let mut c = quadratic;
    c.iter_mut().flatten().flatten().for_each(|v| *v *= -0.5 * omega);

    (
        EquilibriumTensors {
            linear,
            quadratic,
            cubic,
        },
        CollisionTensors { relaxation, a, b, c },
    )
}

impl CollisionTensors {
    pub fn new(channels: &ChannelSet, relaxation: Relaxation) -> Self {
        build_tensors(channels, relaxation).1
    }

    /// `A x` for one site's channel vector.
    pub fn apply_linear(&self, x: &[f64]) -> [f64; Q] {
        let mut out = [0.0; Q];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..Q).map(|j| self.a[i][j] * x[j]).sum();
        }
        out
    }

    /// `sum_jk B_ijk g_jk` for a row-major `Q x Q` block.
    pub fn apply_quadratic(&self, g: &[f64]) -> [f64; Q] {
        let mut out = [0.0; Q];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..Q {
                for k in 0..Q {
                    acc += self.b[i][j][k] * g[j * Q + k];
                }
            }
            *o = acc;
        }
        out
    }

    /// `A G A^T` on a row-major `Q x Q` block, i.e. `(A ⊗ A) vec(G)`.
    pub fn apply_kron(&self, g: &[f64]) -> [f64; Q * Q] {
        let mut tmp = [0.0; Q * Q];
        for k in 0..Q {
            for j in 0..Q {
                tmp[k * Q + j] = (0..Q).map(|l| g[k * Q + l] * self.a[j][l]).sum();
            }
        }
        let mut out = [0.0; Q * Q];
        for i in 0..Q {
            for j in 0..Q {
                out[i * Q + j] = (0..Q).map(|k| self.a[i][k] * tmp[k * Q + j]).sum();
            }
        }
        out
    }
}

/// Storage for the second-order Carleman variable `g`.
///
/// Under the truncated evolution `g` only ever sees `A ⊗ A` and leg-wise
/// streaming, so a state initialized as `f ⊗ f` stays an exact tensor
/// square `h ⊗ h`; `Factored` keeps only `h` and scales to large grids.
#[derive(Debug, Clone, PartialEq)]
pub enum SecondOrder {
    /// `g[((x1 * N + x2) * Q + i) * Q + j]`.
    Dense(Vec<f64>),
    /// `g_ij(x1, x2) = h_i(x1) h_j(x2)` with `h` stored like a field.
    Factored(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Dense,
    Factored,
}

/// Index of `g_ij(x1, x2)` in the dense natural layout.
pub fn g_index(n_sites: usize, x1: usize, x2: usize, i: usize, j: usize) -> usize {
    ((x1 * n_sites + x2) * Q + i) * Q + j
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanState {
    grid: LatticeGrid,
    f: Vec<f64>,
    second: SecondOrder,
    time: u64,
}

impl CarlemanState {
    /// `f = f0`, `g = f0 ⊗ f0`.
    pub fn from_field(field: &DistributionField, representation: Representation) -> Self {
        let grid = field.grid();
        let f = field.values().to_vec();
        let second = match representation {
            Representation::Factored => SecondOrder::Factored(f.clone()),
            Representation::Dense => SecondOrder::Dense(outer(&f, &f, grid.n_sites())),
        };
        Self {
            grid,
            f,
            second,
            time: field.time(),
        }
    }

    pub fn from_parts(grid: LatticeGrid, f: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        let n = grid.n_sites();
        if f.len() != n * Q || g.len() != n * n * Q * Q {
            return Err(Error::ShapeMismatch {
                expected: format!("f: {}, g: {}", n * Q, n * n * Q * Q),
                found: format!("f: {}, g: {}", f.len(), g.len()),
            });
        }
        Ok(Self {
            grid,
            f,
            second: SecondOrder::Dense(g),
            time: 0,
        })
    }

    pub fn grid(&self) -> LatticeGrid {
        self.grid
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn second(&self) -> &SecondOrder {
        &self.second
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn field(&self) -> DistributionField {
        DistributionField::from_values(self.grid, self.f.clone())
            .expect("shape is maintained")
            .with_time(self.time)
    }

    pub fn g(&self, x1: usize, x2: usize, i: usize, j: usize) -> f64 {
        match &self.second {
            SecondOrder::Dense(g) => g[g_index(self.grid.n_sites(), x1, x2, i, j)],
            SecondOrder::Factored(h) => h[x1 * Q + i] * h[x2 * Q + j],
        }
    }

    /// Dense `g`, materializing the factored form if needed.
    pub fn dense_g(&self) -> Vec<f64> {
        match &self.second {
            SecondOrder::Dense(g) => g.clone(),
            SecondOrder::Factored(h) => outer(h, h, self.grid.n_sites()),
        }
    }

    /// The `Q x Q` block `g(x, x)`.
    fn diagonal_block(&self, x: usize) -> [f64; Q * Q] {
        let mut out = [0.0; Q * Q];
        match &self.second {
            SecondOrder::Dense(g) => {
                let start = g_index(self.grid.n_sites(), x, x, 0, 0);
                out.copy_from_slice(&g[start..start + Q * Q]);
            }
            SecondOrder::Factored(h) => {
                let hx = &h[x * Q..(x + 1) * Q];
                for i in 0..Q {
                    for j in 0..Q {
                        out[i * Q + j] = hx[i] * hx[j];
                    }
                }
            }
        }
        out
    }
}

fn outer(a: &[f64], b: &[f64], n_sites: usize) -> Vec<f64> {
    let mut g = vec![0.0; n_sites * n_sites * Q * Q];
    for x1 in 0..n_sites {
        for x2 in 0..n_sites {
            for i in 0..Q {
                let base = g_index(n_sites, x1, x2, i, 0);
                let ai = a[x1 * Q + i];
                for j in 0..Q {
                    g[base + j] = ai * b[x2 * Q + j];
                }
            }
        }
    }
    g
}

/// Local Carleman collision: `f' = A f + B g(x, x)`, `g' = (A ⊗ A) g`.
pub fn carleman_collision(state: &CarlemanState, tensors: &CollisionTensors) -> CarlemanState {
    let n = state.grid.n_sites();
    let mut f = vec![0.0; n * Q];
    for x in 0..n {
        let lin = tensors.apply_linear(&state.f[x * Q..(x + 1) * Q]);
        let quad = tensors.apply_quadratic(&state.diagonal_block(x));
        for i in 0..Q {
            f[x * Q + i] = lin[i] + quad[i];
        }
    }
    let second = match &state.second {
        SecondOrder::Dense(g) => {
            let mut out = vec![0.0; g.len()];
            for (src, dst) in g.chunks_exact(Q * Q).zip(out.chunks_exact_mut(Q * Q)) {
                dst.copy_from_slice(&tensors.apply_kron(src));
            }
            SecondOrder::Dense(out)
        }
        SecondOrder::Factored(h) => {
            let mut out = vec![0.0; h.len()];
            for (src, dst) in h.chunks_exact(Q).zip(out.chunks_exact_mut(Q)) {
                dst.copy_from_slice(&tensors.apply_linear(src));
            }
            SecondOrder::Factored(out)
        }
    };
    CarlemanState {
        grid: state.grid,
        f,
        second,
        time: state.time,
    }
}

fn stream_with(state: &CarlemanState, channels: &ChannelSet, sign: i64) -> CarlemanState {
    let grid = state.grid;
    let n = grid.n_sites();
    let vel = |i: usize| {
        let c = channels.velocity(i);
        [sign * c[0], sign * c[1]]
    };
    let stream_field = |src: &[f64]| {
        let mut out = vec![0.0; src.len()];
        for x in 0..n {
            for i in 0..Q {
                out[grid.offset(x, vel(i)) * Q + i] = src[x * Q + i];
            }
        }
        out
    };
    let f = stream_field(&state.f);
    let second = match &state.second {
        SecondOrder::Dense(g) => {
            let mut out = vec![0.0; g.len()];
            for x1 in 0..n {
                for x2 in 0..n {
                    for i in 0..Q {
                        let y1 = grid.offset(x1, vel(i));
                        for j in 0..Q {
                            let y2 = grid.offset(x2, vel(j));
                            out[g_index(n, y1, y2, i, j)] = g[g_index(n, x1, x2, i, j)];
                        }
                    }
                }
            }
            SecondOrder::Dense(out)
        }
        SecondOrder::Factored(h) => SecondOrder::Factored(stream_field(h)),
    };
    CarlemanState {
        grid,
        f,
        second,
        time: state.time,
    }
}

/// Streams `f_i(x) -> x + c_i` and each leg of `g_ij(x1, x2)` by its own channel.
pub fn carleman_stream(state: &CarlemanState, channels: &ChannelSet) -> CarlemanState {
    let mut out = stream_with(state, channels, 1);
    out.time += 1;
    out
}

/// Inverse of [`carleman_stream`].
pub fn carleman_stream_reversed(state: &CarlemanState, channels: &ChannelSet) -> CarlemanState {
    let mut out = stream_with(state, channels, -1);
    out.time = out.time.saturating_sub(1);
    out
}

/// Collide-then-stream for `steps` steps; the first entry is the initial state.
pub fn carleman_run(
    initial: &DistributionField,
    tensors: &CollisionTensors,
    steps: usize,
    representation: Representation,
    channels: &ChannelSet,
) -> Vec<CarlemanState> {
    let mut history = Vec::with_capacity(steps + 1);
    history.push(CarlemanState::from_field(initial, representation));
    for _ in 0..steps {
        let last = history.last().expect("non-empty");
        let next = carleman_stream(&carleman_collision(last, tensors), channels);
        history.push(next);
    }
    history
}

pub fn write_matrix_csv<W: Write>(m: &Matrix, mut out: W) -> Result<()> {
    writeln!(out, "i,j,value")?;
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            writeln!(out, "{i},{j},{v:.16e}")?;
        }
    }
    Ok(())
}

pub fn write_tensor3_csv<W: Write>(t: &Tensor3, mut out: W) -> Result<()> {
    writeln!(out, "i,j,k,value")?;
    for (i, plane) in t.iter().enumerate() {
        for (j, row) in plane.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                writeln!(out, "{i},{j},{k},{v:.16e}")?;
            }
        }
    }
    Ok(())
}
