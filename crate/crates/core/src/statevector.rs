//! Register-structured statevector simulator.
//!
//! Qubit `q` is bit `q` of the basis index. Gates act on an ordered target
//! list (target `b` is bit `b` of the gate's local index) and fire only on
//! basis states where every control qubit has the requested polarity.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::lbm::LatticeGrid;

pub type C64 = Complex64;

const UNITARY_TOL: f64 = 1e-12;

/// Contiguous block of qubits read as an unsigned integer, LSB first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Register {
    pub offset: usize,
    pub width: usize,
}

impl Register {
    pub const fn new(offset: usize, width: usize) -> Self {
        Self { offset, width }
    }

    pub fn qubit(&self, k: usize) -> usize {
        debug_assert!(k < self.width);
        self.offset + k
    }

    pub fn qubits(&self) -> Vec<usize> {
        (self.offset..self.offset + self.width).collect()
    }

    pub fn mask(&self) -> usize {
        ((1usize << self.width) - 1) << self.offset
    }

    pub fn size(&self) -> usize {
        1 << self.width
    }

    pub fn read(&self, index: usize) -> usize {
        (index >> self.offset) & ((1 << self.width) - 1)
    }

    pub fn write(&self, index: usize, value: usize) -> usize {
        (index & !self.mask()) | ((value << self.offset) & self.mask())
    }

    /// Controls selecting basis states where this register equals `value`.
    pub fn equals(&self, value: usize) -> Vec<Control> {
        (0..self.width)
            .map(|k| Control::new(self.qubit(k), (value >> k) & 1 == 1))
            .collect()
    }
}

/// Qubit layout of the Carleman lattice-Boltzmann circuit.
///
/// From the least significant bit: `c1` (4), `c2` (4), `tau` (1),
/// `a_diag` (1), `p2`, `p1`, `a_lcu` (1). Each lattice register holds a
/// site index `row * Ly + col`, so its low `log2 Ly` bits are the y
/// component and the high `log2 Lx` bits the x component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterLayout {
    pub grid: LatticeGrid,
    pub c1: Register,
    pub c2: Register,
    pub tau: Register,
    pub a_diag: Register,
    pub p2: Register,
    pub p1: Register,
    pub a_lcu: Register,
}

/// Width of each channel register.
pub const CHANNEL_QUBITS: usize = 4;
/// Qubits the collision operator acts on: `c1, c2, tau, a_diag`.
pub const COLLISION_QUBITS: usize = 2 * CHANNEL_QUBITS + 2;

/// Decoded basis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisLabel {
    pub p1: usize,
    pub p2: usize,
    pub c1: usize,
    pub c2: usize,
    pub tau: usize,
    pub a_diag: usize,
    pub a_lcu: usize,
}

impl RegisterLayout {
    pub fn for_grid(grid: LatticeGrid) -> Self {
        let nb = grid.log2_n();
        let c1 = Register::new(0, CHANNEL_QUBITS);
        let c2 = Register::new(CHANNEL_QUBITS, CHANNEL_QUBITS);
        let tau = Register::new(2 * CHANNEL_QUBITS, 1);
        let a_diag = Register::new(2 * CHANNEL_QUBITS + 1, 1);
        let p2 = Register::new(COLLISION_QUBITS, nb);
        let p1 = Register::new(COLLISION_QUBITS + nb, nb);
        let a_lcu = Register::new(COLLISION_QUBITS + 2 * nb, 1);
        Self {
            grid,
            c1,
            c2,
            tau,
            a_diag,
            p2,
            p1,
            a_lcu,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.a_lcu.offset + 1
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    pub fn registers(&self) -> [(&'static str, Register); 7] {
        [
            ("p1", self.p1),
            ("p2", self.p2),
            ("c1", self.c1),
            ("c2", self.c2),
            ("tau", self.tau),
            ("a_diag", self.a_diag),
            ("a_lcu", self.a_lcu),
        ]
    }

    /// x (row) component of a lattice register.
    pub fn x_part(&self, reg: Register) -> Register {
        Register::new(reg.offset + self.grid.log2_ly(), self.grid.log2_lx())
    }

    /// y (column) component of a lattice register.
    pub fn y_part(&self, reg: Register) -> Register {
        Register::new(reg.offset, self.grid.log2_ly())
    }

    pub fn index(&self, label: BasisLabel) -> usize {
        let mut idx = 0;
        idx = self.p1.write(idx, label.p1);
        idx = self.p2.write(idx, label.p2);
        idx = self.c1.write(idx, label.c1);
        idx = self.c2.write(idx, label.c2);
        idx = self.tau.write(idx, label.tau);
        idx = self.a_diag.write(idx, label.a_diag);
        self.a_lcu.write(idx, label.a_lcu)
    }

    pub fn label(&self, index: usize) -> BasisLabel {
        BasisLabel {
            p1: self.p1.read(index),
            p2: self.p2.read(index),
            c1: self.c1.read(index),
            c2: self.c2.read(index),
            tau: self.tau.read(index),
            a_diag: self.a_diag.read(index),
            a_lcu: self.a_lcu.read(index),
        }
    }

    /// Basis index of `f_i(x)`: `tau = 0`, `p2 = 0`, `c2 = 0`, ancillas clear.
    pub fn f_index(&self, x: usize, i: usize) -> usize {
        self.index(BasisLabel {
            p1: x,
            p2: 0,
            c1: i,
            c2: 0,
            tau: 0,
            a_diag: 0,
            a_lcu: 0,
        })
    }

    /// Basis index of the second-order entry at `(p1, p2, i, j)`, ancillas clear.
    pub fn g_index(&self, p1: usize, p2: usize, i: usize, j: usize) -> usize {
        self.index(BasisLabel {
            p1,
            p2,
            c1: i,
            c2: j,
            tau: 1,
            a_diag: 0,
            a_lcu: 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    /// Fires when the qubit is `|1>` (true) or `|0>` (false).
    pub polarity: bool,
}

impl Control {
    pub fn new(qubit: usize, polarity: bool) -> Self {
        Self { qubit, polarity }
    }

    pub fn on(qubit: usize) -> Self {
        Self::new(qubit, true)
    }

    pub fn off(qubit: usize) -> Self {
        Self::new(qubit, false)
    }
}

/// Dense unitary matrix, validated at construction.
///
/// Basis states whose row and column are both exactly the identity are
/// tracked as inactive and skipped at application time.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseUnitary {
    dim: usize,
    matrix: Vec<C64>,
    active: Vec<usize>,
    active_matrix: Vec<C64>,
}

impl DenseUnitary {
    /// `matrix` is row-major `dim x dim`.
    pub fn new(dim: usize, matrix: Vec<C64>) -> Result<Self> {
        if !dim.is_power_of_two() || matrix.len() != dim * dim {
            return Err(Error::MalformedGate(format!(
                "dense payload must be 2^k square, got {} entries for dim {dim}",
                matrix.len()
            )));
        }
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let trivial = |k: usize| {
            (0..dim).all(|m| {
                let expected = if m == k { one } else { zero };
                matrix[k * dim + m] == expected && matrix[m * dim + k] == expected
            })
        };
        let active: Vec<usize> = (0..dim).filter(|&k| !trivial(k)).collect();
        let a = active.len();
        let mut active_matrix = vec![zero; a * a];
        for (r, &row) in active.iter().enumerate() {
            for (c, &col) in active.iter().enumerate() {
                active_matrix[r * a + c] = matrix[row * dim + col];
            }
        }
        let mut deviation = 0.0f64;
        for r in 0..a {
            for c in 0..a {
                let mut acc = zero;
                for k in 0..a {
                    acc += active_matrix[k * a + r].conj() * active_matrix[k * a + c];
                }
                let expected = if r == c { one } else { zero };
                deviation = deviation.max((acc - expected).norm());
            }
        }
        if !(deviation <= UNITARY_TOL) {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(Self {
            dim,
            matrix,
            active,
            active_matrix,
        })
    }

    pub fn from_real(dim: usize, matrix: &[f64]) -> Result<Self> {
        Self::new(dim, matrix.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[row * self.dim + col]
    }

    /// Number of basis states the matrix does not leave fixed.
    pub fn active_len(&self) -> usize {
        self.active.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    Unitary(DenseUnitary),
    /// Diagonal unitary given by its phases.
    Diagonal(Vec<C64>),
    /// Basis permutation: local index `l` moves to `map[l]`.
    Permutation(Vec<usize>),
    /// `exp(-i angle Y / 2)`.
    RotationY(f64),
    /// Householder reflection `I - 2 w w^T`, `w` unit or zero. Loads a real
    /// amplitude vector onto a register starting from `|0>`.
    Reflection(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub label: &'static str,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
    pub kind: GateKind,
}

fn h_matrix() -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)]
}

impl GateOp {
    pub fn unitary(label: &'static str, targets: Vec<usize>, matrix: DenseUnitary, controls: Vec<Control>) -> Result<Self> {
        if matrix.dim() != 1 << targets.len() {
            return Err(Error::MalformedGate(format!(
                "{label}: {} targets for a {}-dimensional payload",
                targets.len(),
                matrix.dim()
            )));
        }
        Ok(Self {
            label,
            targets,
            controls,
            kind: GateKind::Unitary(matrix),
        })
    }

    pub fn diagonal(label: &'static str, targets: Vec<usize>, phases: Vec<C64>, controls: Vec<Control>) -> Result<Self> {
        if phases.len() != 1 << targets.len() {
            return Err(Error::MalformedGate(format!("{label}: diagonal length mismatch")));
        }
        let deviation = phases.iter().map(|p| (p.norm() - 1.0).abs()).fold(0.0, f64::max);
        if !(deviation <= UNITARY_TOL) {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(Self {
            label,
            targets,
            controls,
            kind: GateKind::Diagonal(phases),
        })
    }

    pub fn permutation(label: &'static str, register: Register, map: Vec<usize>, controls: Vec<Control>) -> Result<Self> {
        if map.len() != register.size() {
            return Err(Error::MalformedGate(format!("{label}: permutation length mismatch")));
        }
        let mut seen = vec![false; map.len()];
        for &m in &map {
            if m >= map.len() || std::mem::replace(&mut seen[m], true) {
                return Err(Error::NotBijective);
            }
        }
        Ok(Self {
            label,
            targets: register.qubits(),
            controls,
            kind: GateKind::Permutation(map),
        })
    }

    /// `r -> (r + delta) mod 2^width` on `register`.
    pub fn shift(label: &'static str, register: Register, delta: i64, controls: Vec<Control>) -> Self {
        let m = register.size() as i64;
        let map = (0..m).map(|r| (r + delta).rem_euclid(m) as usize).collect();
        Self::permutation(label, register, map, controls).expect("modular shift is a bijection")
    }

    /// Reflection mapping `|0>` on `targets` to the unit vector `amplitudes`.
    pub fn load(label: &'static str, targets: Vec<usize>, amplitudes: &[f64], controls: Vec<Control>) -> Result<Self> {
        if amplitudes.len() != 1 << targets.len() {
            return Err(Error::MalformedGate(format!("{label}: amplitude length mismatch")));
        }
        let norm = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= UNITARY_TOL) {
            return Err(Error::invalid("amplitudes", format!("must be a unit vector, norm {norm}")));
        }
        let mut w: Vec<f64> = amplitudes.iter().map(|a| -a).collect();
        w[0] += 1.0;
        let wn = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if wn > 0.0 {
            w.iter_mut().for_each(|a| *a /= wn);
        }
        Ok(Self {
            label,
            targets,
            controls,
            kind: GateKind::Reflection(w),
        })
    }

    pub fn ry(label: &'static str, target: usize, angle: f64, controls: Vec<Control>) -> Self {
        Self {
            label,
            targets: vec![target],
            controls,
            kind: GateKind::RotationY(angle),
        }
    }

    pub fn x(label: &'static str, target: usize, controls: Vec<Control>) -> Self {
        Self::permutation(label, Register::new(target, 1), vec![1, 0], controls).expect("X is a bijection")
    }

    pub fn h(label: &'static str, target: usize) -> Self {
        let m = DenseUnitary::new(2, h_matrix()).expect("H is unitary");
        Self::unitary(label, vec![target], m, vec![]).expect("one target")
    }

    /// Every qubit the gate reads or writes.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().copied().chain(self.controls.iter().map(|c| c.qubit))
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let mut used = 0usize;
        for q in self.support() {
            if q >= n_qubits {
                return Err(Error::MalformedGate(format!("{}: qubit {q} out of range", self.label)));
            }
            if used & (1 << q) != 0 {
                return Err(Error::MalformedGate(format!("{}: qubit {q} used twice", self.label)));
            }
            used |= 1 << q;
        }
        Ok(())
    }
}

/// Complex amplitudes plus the classical factor turning them into physical values.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
    global_scale: f64,
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self {
            n_qubits,
            amplitudes,
            global_scale: 1.0,
        }
    }

    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<C64>, global_scale: f64) -> Result<Self> {
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::ShapeMismatch {
                expected: format!("{} amplitudes", 1usize << n_qubits),
                found: format!("{} amplitudes", amplitudes.len()),
            });
        }
        if !(global_scale > 0.0 && global_scale.is_finite()) {
            return Err(Error::invalid("global_scale", format!("must be positive, got {global_scale}")));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
            global_scale,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn global_scale(&self) -> f64 {
        self.global_scale
    }

    pub fn set_global_scale(&mut self, scale: f64) {
        self.global_scale = scale;
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Amplitude times the global scale.
    pub fn physical(&self, index: usize) -> C64 {
        self.amplitudes[index] * self.global_scale
    }

    /// `sum |amp|^2` over basis states where `register == value`.
    pub fn probability(&self, register: Register, value: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| register.read(*i) == value)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let k = gate.targets.len();
        let target_mask: usize = gate.targets.iter().map(|t| 1usize << t).sum();
        let ctrl_mask: usize = gate.controls.iter().map(|c| 1usize << c.qubit).sum();
        let ctrl_value: usize = gate.controls.iter().filter(|c| c.polarity).map(|c| 1usize << c.qubit).sum();
        let free_mask = ((1usize << self.n_qubits) - 1) & !(target_mask | ctrl_mask);
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|l| {
                gate.targets
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| (l >> b) & 1 == 1)
                    .map(|(_, t)| 1usize << t)
                    .sum()
            })
            .collect();
        let amps = &mut self.amplitudes;
        let zero = C64::new(0.0, 0.0);

        // all submasks of free_mask, in increasing order
        let mut visit = |mut body: Box<dyn FnMut(usize, &mut [C64]) + '_>| {
            let mut free = 0usize;
            loop {
                body(free | ctrl_value, amps);
                free = free.wrapping_sub(free_mask) & free_mask;
                if free == 0 {
                    break;
                }
            }
        };

        match &gate.kind {
            GateKind::Unitary(u) => {
                let a = u.active.len();
                let act_offsets: Vec<usize> = u.active.iter().map(|&l| offsets[l]).collect();
                let m = &u.active_matrix;
                let mut input = vec![zero; a];
                visit(Box::new(move |base, amps| {
                    let mut any = false;
                    for (v, off) in input.iter_mut().zip(&act_offsets) {
                        *v = amps[base | off];
                        any |= *v != zero;
                    }
                    if !any {
                        return;
                    }
                    for (r, off) in act_offsets.iter().enumerate() {
                        let row = &m[r * a..(r + 1) * a];
                        let mut acc = zero;
                        for (mv, v) in row.iter().zip(&input) {
                            acc += mv * v;
                        }
                        amps[base | off] = acc;
                    }
                }));
            }
            GateKind::Diagonal(phases) => {
                visit(Box::new(|base, amps| {
                    for (p, off) in phases.iter().zip(&offsets) {
                        amps[base | off] *= p;
                    }
                }));
            }
            GateKind::Permutation(map) => {
                let mut tmp = vec![zero; map.len()];
                visit(Box::new(move |base, amps| {
                    for (t, off) in tmp.iter_mut().zip(&offsets) {
                        *t = amps[base | off];
                    }
                    for (l, &dst) in map.iter().enumerate() {
                        amps[base | offsets[dst]] = tmp[l];
                    }
                }));
            }
            GateKind::RotationY(angle) => {
                let (s, c) = (angle / 2.0).sin_cos();
                let bit = offsets[1];
                visit(Box::new(move |base, amps| {
                    let a0 = amps[base];
                    let a1 = amps[base | bit];
                    amps[base] = a0 * c - a1 * s;
                    amps[base | bit] = a0 * s + a1 * c;
                }));
            }
            GateKind::Reflection(w) => {
                if w.iter().all(|&v| v == 0.0) {
                    return Ok(());
                }
                let support: Vec<(usize, f64)> =
                    w.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(l, &v)| (offsets[l], v)).collect();
                visit(Box::new(move |base, amps| {
                    let mut dot = zero;
                    for &(off, v) in &support {
                        dot += amps[base | off] * v;
                    }
                    if dot == zero {
                        return;
                    }
                    for &(off, v) in &support {
                        amps[base | off] -= dot * (2.0 * v);
                    }
                }));
            }
        }
        Ok(())
    }

    /// Adds `delta` modulo `modulus` to `register` where the controls match.
    pub fn apply_register_shift(&mut self, register: Register, delta: i64, modulus: usize, controls: &[Control]) -> Result<()> {
        if modulus != register.size() {
            return Err(Error::MalformedGate(format!(
                "shift modulus {modulus} does not match register size {}",
                register.size()
            )));
        }
        self.apply(&GateOp::shift("shift", register, delta, controls.to_vec()))
    }

    /// Projects `register` onto `value` and renormalizes.
    ///
    /// Returns the probability of the kept branch. The global scale absorbs
    /// `sqrt(probability)` so `amplitude * global_scale` still gives the
    /// physical value of the projected (unnormalized) state.
    pub fn postselect(&mut self, register: Register, value: usize) -> Result<f64> {
        let probability = self.probability(register, value);
        if !(probability >= 1e-300) {
            return Err(Error::PostselectionImpossible { probability });
        }
        let inv = 1.0 / probability.sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if register.read(i) == value {
                *a *= inv;
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        self.global_scale *= probability.sqrt();
        Ok(probability)
    }

    /// Multinomial measurement of all qubits, `shots` times.
    pub fn sample_counts(&self, shots: u64, seed: u64) -> Result<BTreeMap<usize, u64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let probs: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        let counts = multinomial(shots, &probs, &mut rng)?;
        Ok(counts.into_iter().enumerate().filter(|&(_, c)| c > 0).collect())
    }
}

/// Draws a multinomial sample by sequential conditional binomials.
/// `weights` need not be normalized.
pub fn multinomial(trials: u64, weights: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    if trials == 0 {
        return Err(Error::invalid("shots", "must be at least 1"));
    }
    let mut remaining_mass: f64 = weights.iter().sum();
    if !(remaining_mass > 0.0) {
        return Err(Error::invalid("weights", "total probability must be positive"));
    }
    let mut remaining = trials;
    let mut out = vec![0u64; weights.len()];
    for (k, &w) in weights.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if w <= 0.0 {
            continue;
        }
        let p = (w / remaining_mass).clamp(0.0, 1.0);
        let draw = if p >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, p)
                .map_err(|e| Error::invalid("weights", e.to_string()))?
                .sample(rng)
        };
        out[k] = draw;
        remaining -= draw;
        remaining_mass -= w;
    }
    // rounding can leave a few trials unassigned; they belong to the last
    // state with positive weight
    if remaining > 0 {
        if let Some(last) = weights.iter().rposition(|&w| w > 0.0) {
            out[last] += remaining;
        }
    }
    Ok(out)
}

/// `bitstring,count` CSV, most significant qubit first.
pub fn write_counts_csv<W: Write>(counts: &BTreeMap<usize, u64>, n_qubits: usize, mut out: W) -> Result<()> {
    writeln!(out, "bitstring,count")?;
    for (idx, count) in counts {
        writeln!(out, "{idx:0n_qubits$b},{count}")?;
    }
    Ok(())
}
