//! Relative-coordinate ("local") layout of the second-order Carleman variable.
//!
//! `g(x1, x2)` is stored at `(x1, r)` with `r = (x2 - x1) mod (Lx, Ly)`
//! componentwise, so every diagonal `g(x1, x1)` sits at `r = 0` and the
//! collision becomes the same operator at every `(x1, r)`. Streaming in this
//! layout moves `x1` by `c_i` and `r` by `c_j - c_i`.

use std::fmt;
use std::io::Write;

use crate::carleman::{g_index, CarlemanState, CollisionTensors};
use crate::error::{Error, Result};
use crate::lbm::{ChannelSet, LatticeGrid, Q};

/// Encoded `g` index of `(x1, r, i, j)`; same packing as the natural layout.
pub fn local_index(n_sites: usize, x1: usize, rel: usize, i: usize, j: usize) -> usize {
    g_index(n_sites, x1, rel, i, j)
}

fn check_len(grid: LatticeGrid, len: usize) -> Result<()> {
    let n = grid.n_sites();
    if len != n * n * Q * Q {
        return Err(Error::ShapeMismatch {
            expected: format!("{} entries", n * n * Q * Q),
            found: format!("{len} entries"),
        });
    }
    Ok(())
}

/// Natural `g[x1][x2]` to encoded `g[x1][x2 - x1]`.
pub fn encode(grid: LatticeGrid, natural: &[f64]) -> Result<Vec<f64>> {
    check_len(grid, natural.len())?;
    let n = grid.n_sites();
    let mut out = vec![0.0; natural.len()];
    for x1 in 0..n {
        for rel in 0..n {
            let x2 = grid.add_sites(x1, rel);
            let src = g_index(n, x1, x2, 0, 0);
            let dst = local_index(n, x1, rel, 0, 0);
            out[dst..dst + Q * Q].copy_from_slice(&natural[src..src + Q * Q]);
        }
    }
    Ok(out)
}

/// Inverse of [`encode`].
pub fn decode(grid: LatticeGrid, local: &[f64]) -> Result<Vec<f64>> {
    check_len(grid, local.len())?;
    let n = grid.n_sites();
    let mut out = vec![0.0; local.len()];
    for x1 in 0..n {
        for rel in 0..n {
            let x2 = grid.add_sites(x1, rel);
            let src = local_index(n, x1, rel, 0, 0);
            let dst = g_index(n, x1, x2, 0, 0);
            out[dst..dst + Q * Q].copy_from_slice(&local[src..src + Q * Q]);
        }
    }
    Ok(out)
}

/// Per-register displacement of `(p1, p2)` when streaming channel pair `(i, j)`.
///
/// For the first-order sector only the first vector applies.
pub fn shift_vectors(channels: &ChannelSet, i: usize, j: usize) -> ([i64; 2], [i64; 2]) {
    let ci = channels.velocity(i);
    let cj = channels.velocity(j);
    (ci, [cj[0] - ci[0], cj[1] - ci[1]])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => f.write_str("x"),
            Axis::Y => f.write_str("y"),
        }
    }
}

/// "If bit `bit` of the `axis` component of `p1` is set, add `amount` to the
/// same component of `p2`", for the second-order sector only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftDescriptor {
    pub axis: Axis,
    pub bit: usize,
    pub amount: i64,
}

/// Controlled shifts turning the natural layout of `g` into the local one.
/// One descriptor per address bit, each subtracting `2^bit`.
pub fn permutation_plan(grid: LatticeGrid) -> Vec<ShiftDescriptor> {
    let axis_plan = |axis, bits| (0..bits).map(move |bit| ShiftDescriptor { axis, bit, amount: -(1i64 << bit) });
    axis_plan(Axis::X, grid.log2_lx())
        .chain(axis_plan(Axis::Y, grid.log2_ly()))
        .collect()
}

/// The plan that undoes `plan` (used to recover natural coordinates).
pub fn inverse_plan(plan: &[ShiftDescriptor]) -> Vec<ShiftDescriptor> {
    plan.iter()
        .rev()
        .map(|d| ShiftDescriptor {
            amount: -d.amount,
            ..*d
        })
        .collect()
}

/// Classical mirror of running `plan` on a `g` array indexed `[x1][p2][i][j]`.
pub fn apply_plan(grid: LatticeGrid, g: &[f64], plan: &[ShiftDescriptor]) -> Result<Vec<f64>> {
    check_len(grid, g.len())?;
    let n = grid.n_sites();
    let mut cur = g.to_vec();
    for d in plan {
        let mut next = cur.clone();
        for x1 in 0..n {
            let (row, col) = grid.coords(x1);
            let coord = match d.axis {
                Axis::X => row,
                Axis::Y => col,
            };
            if (coord >> d.bit) & 1 == 0 {
                continue;
            }
            let delta = match d.axis {
                Axis::X => [d.amount, 0],
                Axis::Y => [0, d.amount],
            };
            for p2 in 0..n {
                let dst = grid.offset(p2, delta);
                let s = local_index(n, x1, p2, 0, 0);
                let t = local_index(n, x1, dst, 0, 0);
                next[t..t + Q * Q].copy_from_slice(&cur[s..s + Q * Q]);
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// Text dump, one `axis bit amount` line per descriptor.
pub fn write_plan<W: Write>(plan: &[ShiftDescriptor], mut out: W) -> Result<()> {
    for d in plan {
        writeln!(out, "{} {} {}", d.axis, d.bit, d.amount)?;
    }
    Ok(())
}

/// Carleman state with `g` in the local layout.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCarlemanState {
    grid: LatticeGrid,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl LocalCarlemanState {
    pub fn new(grid: LatticeGrid, f: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        check_len(grid, g.len())?;
        if f.len() != grid.n_sites() * Q {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries", grid.n_sites() * Q),
                found: format!("{} entries", f.len()),
            });
        }
        Ok(Self { grid, f, g })
    }

    pub fn from_natural(state: &CarlemanState) -> Self {
        let g = encode(state.grid(), &state.dense_g()).expect("state shapes are consistent");
        Self {
            grid: state.grid(),
            f: state.f().to_vec(),
            g,
        }
    }

    pub fn to_natural(&self) -> CarlemanState {
        let g = decode(self.grid, &self.g).expect("state shapes are consistent");
        CarlemanState::from_parts(self.grid, self.f.clone(), g).expect("state shapes are consistent")
    }

    pub fn grid(&self) -> LatticeGrid {
        self.grid
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// Same operator at every `(x1, r)`; `B` reads only `r = 0`.
    pub fn collide(&self, tensors: &CollisionTensors) -> Self {
        let n = self.grid.n_sites();
        let mut f = vec![0.0; self.f.len()];
        for x1 in 0..n {
            let diag = local_index(n, x1, 0, 0, 0);
            let lin = tensors.apply_linear(&self.f[x1 * Q..(x1 + 1) * Q]);
            let quad = tensors.apply_quadratic(&self.g[diag..diag + Q * Q]);
            for i in 0..Q {
                f[x1 * Q + i] = lin[i] + quad[i];
            }
        }
        let mut g = vec![0.0; self.g.len()];
        for (src, dst) in self.g.chunks_exact(Q * Q).zip(g.chunks_exact_mut(Q * Q)) {
            dst.copy_from_slice(&tensors.apply_kron(src));
        }
        Self { grid: self.grid, f, g }
    }

    /// Streaming in the local layout: `p1 += c_i`, `p2 += c_j - c_i`.
    pub fn stream(&self, channels: &ChannelSet) -> Self {
        let grid = self.grid;
        let n = grid.n_sites();
        let mut f = vec![0.0; self.f.len()];
        for x1 in 0..n {
            for i in 0..Q {
                f[grid.offset(x1, channels.velocity(i)) * Q + i] = self.f[x1 * Q + i];
            }
        }
        let mut g = vec![0.0; self.g.len()];
        for x1 in 0..n {
            for rel in 0..n {
                for i in 0..Q {
                    for j in 0..Q {
                        let (d1, d2) = shift_vectors(channels, i, j);
                        let dst = local_index(n, grid.offset(x1, d1), grid.offset(rel, d2), i, j);
                        g[dst] = self.g[local_index(n, x1, rel, i, j)];
                    }
                }
            }
        }
        Self { grid, f, g }
    }
}
