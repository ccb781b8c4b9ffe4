//! D2Q9 BGK lattice-Boltzmann reference solver on a periodic grid.
//!
//! Channel layout:
//! ```text
//!   6   2   5
//!    \  |  /
//!   3 - 0 - 1
//!    /  |  \
//!   7   4   8
//! ```
//! The first velocity component moves the lattice row (extent `Lx`), the
//! second moves the column (extent `Ly`). Sites are stored row-major,
//! `site = row * Ly + col`.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Number of D2Q9 channels.
pub const Q: usize = 9;

const VELOCITIES: [[i64; 2]; Q] = [
    [0, 0],
    [1, 0],
    [0, 1],
    [-1, 0],
    [0, -1],
    [1, 1],
    [-1, 1],
    [-1, -1],
    [1, -1],
];

const WEIGHTS: [f64; Q] = [
    4.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
];

/// Discrete velocities, weights and lattice speed of sound of the D2Q9 model.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    velocities: [[i64; 2]; Q],
    weights: [f64; Q],
    cs2: f64,
}

impl Default for ChannelSet {
    fn default() -> Self {
        Self::d2q9()
    }
}

impl ChannelSet {
    pub fn d2q9() -> Self {
        Self {
            velocities: VELOCITIES,
            weights: WEIGHTS,
            cs2: 1.0 / 3.0,
        }
    }

    pub fn len(&self) -> usize {
        Q
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn velocity(&self, i: usize) -> [i64; 2] {
        self.velocities[i]
    }

    pub fn velocities(&self) -> &[[i64; 2]; Q] {
        &self.velocities
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64; Q] {
        &self.weights
    }

    pub fn cs2(&self) -> f64 {
        self.cs2
    }

    /// Euclidean dot product `c_i · c_j`.
    pub fn dot(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.velocities[i], self.velocities[j]);
        (a[0] * b[0] + a[1] * b[1]) as f64
    }

    /// Index of the channel with velocity `-c_i`.
    pub fn opposite(&self, i: usize) -> usize {
        let [cx, cy] = self.velocities[i];
        self.velocities
            .iter()
            .position(|&v| v == [-cx, -cy])
            .expect("D2Q9 is closed under negation")
    }
}

/// Periodic 2D lattice with power-of-two extents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeGrid {
    lx: usize,
    ly: usize,
}

impl LatticeGrid {
    pub fn new(lx: usize, ly: usize) -> Result<Self> {
        for dim in [lx, ly] {
            if !dim.is_power_of_two() {
                return Err(Error::NotPowerOfTwo(dim));
            }
        }
        Ok(Self { lx, ly })
    }

    pub fn square(l: usize) -> Result<Self> {
        Self::new(l, l)
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn n_sites(&self) -> usize {
        self.lx * self.ly
    }

    pub fn log2_lx(&self) -> usize {
        self.lx.trailing_zeros() as usize
    }

    pub fn log2_ly(&self) -> usize {
        self.ly.trailing_zeros() as usize
    }

    /// Qubits needed to address one site.
    pub fn log2_n(&self) -> usize {
        self.log2_lx() + self.log2_ly()
    }

    pub fn site(&self, row: usize, col: usize) -> usize {
        row * self.ly + col
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site / self.ly, site % self.ly)
    }

    /// `site + d` with periodic wrap in both dimensions.
    pub fn offset(&self, site: usize, d: [i64; 2]) -> usize {
        let (row, col) = self.coords(site);
        let row = (row as i64 + d[0]).rem_euclid(self.lx as i64) as usize;
        let col = (col as i64 + d[1]).rem_euclid(self.ly as i64) as usize;
        self.site(row, col)
    }

    /// Componentwise `a + b` of two site coordinates, modulo the lattice.
    pub fn add_sites(&self, a: usize, b: usize) -> usize {
        let (ar, ac) = self.coords(a);
        let (br, bc) = self.coords(b);
        self.site((ar + br) % self.lx, (ac + bc) % self.ly)
    }

    /// Componentwise `a - b` of two site coordinates, modulo the lattice.
    pub fn sub_sites(&self, a: usize, b: usize) -> usize {
        let (ar, ac) = self.coords(a);
        let (br, bc) = self.coords(b);
        self.site((ar + self.lx - br) % self.lx, (ac + self.ly - bc) % self.ly)
    }
}

/// Relaxation time together with its rate `omega = 1 / tau`.
///
/// `tau = inf` gives `omega = 0`, which turns collisions off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relaxation {
    tau: f64,
    omega: f64,
}

impl Relaxation {
    pub fn from_tau(tau: f64) -> Result<Self> {
        if tau.is_nan() || tau <= 0.0 {
            return Err(Error::invalid("tau", format!("must be positive, got {tau}")));
        }
        Ok(Self {
            tau,
            omega: 1.0 / tau,
        })
    }

    pub fn frozen() -> Self {
        Self {
            tau: f64::INFINITY,
            omega: 0.0,
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// Distribution values `f_i(x)` stored site-major, `values[site * Q + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField {
    grid: LatticeGrid,
    values: Vec<f64>,
    time: u64,
}

impl DistributionField {
    pub fn zeros(grid: LatticeGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_sites() * Q],
            time: 0,
        }
    }

    pub fn from_values(grid: LatticeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_sites() * Q {
            return Err(Error::ShapeMismatch {
                expected: format!("{} values", grid.n_sites() * Q),
                found: format!("{} values", values.len()),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("values", format!("entry {bad} is not finite")));
        }
        Ok(Self {
            grid,
            values,
            time: 0,
        })
    }

    /// Every site set to the channel weights (rho = 1, u = 0).
    pub fn equilibrium_at_rest(grid: LatticeGrid, channels: &ChannelSet) -> Self {
        let mut field = Self::zeros(grid);
        for site in 0..grid.n_sites() {
            field.site_mut(site).copy_from_slice(channels.weights());
        }
        field
    }

    pub fn grid(&self) -> LatticeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn with_time(mut self, time: u64) -> Self {
        self.time = time;
        self
    }

    pub fn get(&self, site: usize, i: usize) -> f64 {
        self.values[site * Q + i]
    }

    pub fn set(&mut self, site: usize, i: usize, value: f64) {
        self.values[site * Q + i] = value;
    }

    pub fn site(&self, site: usize) -> &[f64] {
        &self.values[site * Q..(site + 1) * Q]
    }

    pub fn site_mut(&mut self, site: usize) -> &mut [f64] {
        &mut self.values[site * Q..(site + 1) * Q]
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Density and velocity at one site.
    pub fn macroscopics(&self, site: usize, channels: &ChannelSet) -> Result<(f64, [f64; 2])> {
        macroscopics(self.site(site), channels).ok_or(Error::ZeroDensity { site })
    }

    /// Velocity at every site; zero-density sites are an error.
    pub fn velocity_field(&self, channels: &ChannelSet) -> Result<Vec<[f64; 2]>> {
        (0..self.grid.n_sites())
            .map(|s| self.macroscopics(s, channels).map(|(_, u)| u))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,y,i,f")?;
        for site in 0..self.grid.n_sites() {
            let (x, y) = self.grid.coords(site);
            for i in 0..Q {
                writeln!(out, "{x},{y},{i},{:.16e}", self.get(site, i))?;
            }
        }
        Ok(())
    }

    /// Reads a field written by [`DistributionField::write_csv`]; the grid
    /// extents are inferred from the largest coordinates present.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            if n == 0 {
                if line.trim() != "x,y,i,f" {
                    return Err(Error::Csv {
                        line: 1,
                        reason: format!("unexpected header `{line}`"),
                    });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(Error::Csv {
                    line: n + 1,
                    reason: "expected 4 columns".into(),
                });
            }
            let parse_idx = |s: &str| {
                s.trim().parse::<usize>().map_err(|e| Error::Csv {
                    line: n + 1,
                    reason: e.to_string(),
                })
            };
            let value = parts[3].trim().parse::<f64>().map_err(|e| Error::Csv {
                line: n + 1,
                reason: e.to_string(),
            })?;
            rows.push((parse_idx(parts[0])?, parse_idx(parts[1])?, parse_idx(parts[2])?, value));
        }
        let lx = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let ly = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        let grid = LatticeGrid::new(lx, ly)?;
        if rows.len() != grid.n_sites() * Q {
            return Err(Error::Csv {
                line: 0,
                reason: format!("expected {} rows, found {}", grid.n_sites() * Q, rows.len()),
            });
        }
        let mut field = Self::zeros(grid);
        for (x, y, i, v) in rows {
            if i >= Q {
                return Err(Error::Csv {
                    line: 0,
                    reason: format!("channel {i} out of range"),
                });
            }
            field.set(grid.site(x, y), i, v);
        }
        Ok(field)
    }
}

/// `(rho, u)` of one site's populations, `None` when the density vanishes.
pub fn macroscopics(f: &[f64], channels: &ChannelSet) -> Option<(f64, [f64; 2])> {
    let rho: f64 = f.iter().sum();
    if rho == 0.0 || !rho.is_finite() {
        return None;
    }
    let mut j = [0.0; 2];
    for (i, fi) in f.iter().enumerate() {
        let c = channels.velocity(i);
        j[0] += fi * c[0] as f64;
        j[1] += fi * c[1] as f64;
    }
    Some((rho, [j[0] / rho, j[1] / rho]))
}

/// Second-order equilibrium populations.
pub fn equilibrium(rho: f64, u: [f64; 2], channels: &ChannelSet) -> [f64; Q] {
    let uu = u[0] * u[0] + u[1] * u[1];
    if uu > 0.09 {
        log::warn!("|u| = {:.3} exceeds the weakly compressible regime", uu.sqrt());
    }
    let cs2 = channels.cs2();
    let mut feq = [0.0; Q];
    for (i, out) in feq.iter_mut().enumerate() {
        let c = channels.velocity(i);
        let cu = u[0] * c[0] as f64 + u[1] * c[1] as f64;
        *out = channels.weight(i) * rho * (1.0 + cu / cs2 + cu * cu / (2.0 * cs2 * cs2) - uu / (2.0 * cs2));
    }
    feq
}

/// Streams every population to `x + c_i` with periodic wrap.
pub fn stream(field: &DistributionField, channels: &ChannelSet) -> DistributionField {
    let grid = field.grid();
    let mut out = DistributionField::zeros(grid).with_time(field.time());
    for site in 0..grid.n_sites() {
        for i in 0..Q {
            let dest = grid.offset(site, channels.velocity(i));
            out.set(dest, i, field.get(site, i));
        }
    }
    out
}

/// One BGK collide-and-stream step.
pub fn bgk_step(field: &DistributionField, relaxation: Relaxation, channels: &ChannelSet) -> Result<DistributionField> {
    if relaxation.tau() < 0.5 {
        return Err(Error::invalid("tau", format!("BGK needs tau >= 0.5, got {}", relaxation.tau())));
    }
    let omega = relaxation.omega();
    let mut collided = field.clone();
    if omega != 0.0 {
        for site in 0..field.grid().n_sites() {
            let (rho, u) = field.macroscopics(site, channels)?;
            let feq = equilibrium(rho, u, channels);
            for (fi, eq) in collided.site_mut(site).iter_mut().zip(feq) {
                *fi += omega * (eq - *fi);
            }
        }
    }
    let mut out = stream(&collided, channels);
    out.time = field.time + 1;
    Ok(out)
}

/// Runs `steps` BGK steps, returning the initial field followed by every step.
pub fn bgk_run(
    initial: &DistributionField,
    relaxation: Relaxation,
    steps: usize,
    channels: &ChannelSet,
) -> Result<Vec<DistributionField>> {
    let mut history = Vec::with_capacity(steps + 1);
    history.push(initial.clone());
    for _ in 0..steps {
        let next = bgk_step(history.last().expect("non-empty"), relaxation, channels)?;
        history.push(next);
    }
    Ok(history)
}

/// Taylor–Green wave vector choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveMode {
    /// `k = 2π / L` per dimension; one full period across the box.
    TwoPi,
    /// `k = π / L` per dimension.
    Pi,
}

impl WaveMode {
    pub fn wave_number(&self, extent: usize) -> f64 {
        match self {
            WaveMode::TwoPi => 2.0 * PI / extent as f64,
            WaveMode::Pi => PI / extent as f64,
        }
    }
}

/// Taylor–Green velocity at lattice coordinates `(x, y)`.
pub fn taylor_green_velocity(grid: LatticeGrid, u_max: f64, mode: WaveMode, x: usize, y: usize) -> [f64; 2] {
    let kx = mode.wave_number(grid.lx());
    let ky = mode.wave_number(grid.ly());
    let (x, y) = (x as f64, y as f64);
    [
        u_max * (kx * x).cos() * (ky * y).sin(),
        -u_max * (kx * x).sin() * (ky * y).cos(),
    ]
}

/// Unit-density equilibrium field carrying a Taylor–Green vortex array.
pub fn taylor_green_init(grid: LatticeGrid, u_max: f64, mode: WaveMode, channels: &ChannelSet) -> Result<DistributionField> {
    if !(0.0..0.3).contains(&u_max) {
        return Err(Error::invalid("u_max", format!("must lie in [0, 0.3), got {u_max}")));
    }
    let mut field = DistributionField::zeros(grid);
    for site in 0..grid.n_sites() {
        let (x, y) = grid.coords(site);
        let u = taylor_green_velocity(grid, u_max, mode, x, y);
        field.site_mut(site).copy_from_slice(&equilibrium(1.0, u, channels));
    }
    Ok(field)
}

/// `f_i(x) = w_i (1 + amplitude * xi)` with `xi ~ U[-1, 1]` from a seeded stream.
pub fn random_init(grid: LatticeGrid, seed: u64, amplitude: f64, channels: &ChannelSet) -> Result<DistributionField> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::invalid("amplitude", format!("must be non-negative, got {amplitude}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = DistributionField::zeros(grid);
    for site in 0..grid.n_sites() {
        for i in 0..Q {
            let xi: f64 = rng.random_range(-1.0..=1.0);
            field.set(site, i, channels.weight(i) * (1.0 + amplitude * xi));
        }
    }
    Ok(field)
}
