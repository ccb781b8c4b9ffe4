//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero when any
//! criterion fails. Oracles here are written independently of the library
//! code they check.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64 as C64;

use qlbm_cli::config::ExperimentConfig;
use qlbm_cli::cost_report::cost_report;
use qlbm_cli::tgv::tgv_command;
use qlbm_core::carleman::{carleman_run, g_index, CollisionTensors, Representation};
use qlbm_core::circuit::{
    build_embedded_collision, collision_index, execute, lcu_decompose, run, QlbmCircuit, Readout, LOCAL_DIM,
};
use qlbm_core::encoding::{apply_plan, encode, permutation_plan, LocalCarlemanState};
use qlbm_core::lbm::{
    bgk_run, random_init, taylor_green_init, ChannelSet, LatticeGrid, Relaxation, WaveMode, Q,
};
use qlbm_core::statevector::{RegisterLayout, StateVector};

/// Largest Carleman-vs-LBM relative L2 velocity gap over the 32x32, ten-step
/// Taylor–Green run, measured once (4.439873989153343e-2 at step 7) and
/// frozen with 20% headroom.
const FROZEN_TGV_GAP: f64 = 4.439873989153343e-2 * 1.2;

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
            notes: Vec::new(),
        }
    }
}

// ---- oracles -------------------------------------------------------------

const C: [[i64; 2]; Q] = [[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1], [1, 1], [-1, 1], [-1, -1], [1, -1]];
const W: [f64; Q] = [
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

fn wrap(v: i64, l: usize) -> usize {
    v.rem_euclid(l as i64) as usize
}

/// Site `(x, y)` moved by `d`, as a flat index with `y` fastest.
fn moved(lx: usize, ly: usize, site: usize, d: [i64; 2]) -> usize {
    let (x, y) = (site / ly, site % ly);
    wrap(x as i64 + d[0], lx) * ly + wrap(y as i64 + d[1], ly)
}

fn rel(lx: usize, ly: usize, x1: usize, x2: usize) -> usize {
    let (a, b) = (x1 / ly, x1 % ly);
    let (c, d) = (x2 / ly, x2 % ly);
    wrap(c as i64 - a as i64, lx) * ly + wrap(d as i64 - b as i64, ly)
}

fn gi(n: usize, x1: usize, x2: usize, i: usize, j: usize) -> usize {
    ((x1 * n + x2) * Q + i) * Q + j
}

fn oracle_encode(lx: usize, ly: usize, g: &[f64]) -> Vec<f64> {
    let n = lx * ly;
    let mut out = vec![f64::NAN; g.len()];
    for x1 in 0..n {
        for x2 in 0..n {
            for i in 0..Q {
                for j in 0..Q {
                    out[gi(n, x1, rel(lx, ly, x1, x2), i, j)] = g[gi(n, x1, x2, i, j)];
                }
            }
        }
    }
    out
}

fn oracle_stream_g(lx: usize, ly: usize, g: &[f64]) -> Vec<f64> {
    let n = lx * ly;
    let mut out = vec![f64::NAN; g.len()];
    for x1 in 0..n {
        for x2 in 0..n {
            for i in 0..Q {
                for j in 0..Q {
                    out[gi(n, moved(lx, ly, x1, C[i]), moved(lx, ly, x2, C[j]), i, j)] = g[gi(n, x1, x2, i, j)];
                }
            }
        }
    }
    out
}

fn oracle_velocity(f: &[f64]) -> Vec<[f64; 2]> {
    f.chunks(Q)
        .map(|s| {
            let rho: f64 = s.iter().sum();
            let mut u = [0.0; 2];
            for i in 0..Q {
                u[0] += s[i] * C[i][0] as f64;
                u[1] += s[i] * C[i][1] as f64;
            }
            [u[0] / rho, u[1] / rho]
        })
        .collect()
}

fn rel_l2(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(u, v)| (u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2)).sum();
    let r: f64 = b.iter().map(|v| v[0] * v[0] + v[1] * v[1]).sum();
    (d / r).sqrt()
}

/// Per-entry relative error; reference entries at or below `1e-12 max|b|`
/// contribute their absolute error.
fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let floor = 1e-12 * b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .map(|(x, y)| if y.abs() > floor { (x - y).abs() / y.abs() } else { (x - y).abs() })
        .fold(0.0, f64::max)
}

fn dot(a: [i64; 2], b: [i64; 2]) -> f64 {
    (a[0] * b[0] + a[1] * b[1]) as f64
}

// ---- criteria ------------------------------------------------------------

fn oracle_equivalence() -> Outcome {
    let ch = ChannelSet::d2q9();
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    let cases: [(usize, &str, usize, WaveMode); 5] = [
        (2, "random", 5, WaveMode::TwoPi),
        (2, "taylor-green", 6, WaveMode::TwoPi),
        (4, "random", 5, WaveMode::TwoPi),
        (4, "taylor-green", 6, WaveMode::TwoPi),
        (8, "taylor-green", 6, WaveMode::Pi),
    ];
    for (l, init, steps, mode) in cases {
        let start = Instant::now();
        let grid = LatticeGrid::square(l).unwrap();
        let f0 = match init {
            "random" => random_init(grid, 1, 0.2, &ch).unwrap(),
            _ => taylor_green_init(grid, 0.15, mode, &ch).unwrap(),
        };
        let relaxation = Relaxation::from_tau(5.0).unwrap();
        let record = run(&f0, relaxation, steps, Readout::Exact, &ch).unwrap();
        let classical = carleman_run(&f0, &CollisionTensors::new(&ch, relaxation), steps, Representation::Dense, &ch);
        let (mut ef, mut eg) = (0.0f64, 0.0f64);
        for s in &record.steps {
            ef = ef.max(max_rel(&s.decoded.f, classical[s.step].f()));
            eg = eg.max(max_rel(&s.decoded.g, &classical[s.step].dense_g()));
        }
        worst = worst.max(ef).max(eg);
        notes.push(format!(
            "{l}x{l} {init} T={steps}: {} qubits, max eps f {ef:.2e}, g {eg:.2e}, {:.1}s",
            record.n_qubits,
            start.elapsed().as_secs_f64()
        ));
    }
    let mut o = Outcome::new(worst <= 1e-9, format!("statevector vs classical Carleman, worst per-entry eps {worst:.2e} (<= 1e-9)"));
    o.notes = notes;
    o
}

fn success_probability() -> Outcome {
    let ch = ChannelSet::d2q9();
    let grid = LatticeGrid::square(4).unwrap();
    let mut notes = Vec::new();
    let mut in_window = true;
    let mut at_tau5 = Vec::new();
    for tau in [1.0, 2.0, 5.0, 10.0] {
        let tensors = CollisionTensors::new(&ch, Relaxation::from_tau(tau).unwrap());
        let circuit = QlbmCircuit::new(grid, &tensors, &ch).unwrap();
        for init in ["random", "taylor-green"] {
            let f0 = match init {
                "random" => random_init(grid, 1, 0.2, &ch).unwrap(),
                _ => taylor_green_init(grid, 0.15, WaveMode::TwoPi, &ch).unwrap(),
            };
            let record = circuit.run(&f0, 3, Readout::Exact).unwrap();
            let p: Vec<f64> = record.steps.iter().map(|s| s.success_probability).collect();
            notes.push(format!(
                "tau={tau:<4} {init:<12} s={:.3} 1/s^2={:.3e} p per step {}",
                record.lcu_scale,
                1.0 / (record.lcu_scale * record.lcu_scale),
                p.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(" ")
            ));
            if tau == 5.0 {
                in_window &= p.iter().all(|&v| (1e-3..=1e-1).contains(&v));
                at_tau5.extend(p);
            }
        }
    }
    let lo = at_tau5.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = at_tau5.iter().copied().fold(0.0, f64::max);
    let mut o = Outcome::new(
        in_window,
        format!("N=16, tau=5 per-step p in [{lo:.3e}, {hi:.3e}], window [1e-3, 1e-1]"),
    );
    o.notes = notes;
    o
}

fn shot_readout() -> Outcome {
    let ch = ChannelSet::d2q9();
    let grid = LatticeGrid::square(2).unwrap();
    let f0 = random_init(grid, 1, 0.2, &ch).unwrap();
    let relaxation = Relaxation::from_tau(5.0).unwrap();
    let start = Instant::now();
    let record = run(&f0, relaxation, 2, Readout::Shots { shots: 500_000_000, seed: 1 }, &ch).unwrap();
    let classical = carleman_run(&f0, &CollisionTensors::new(&ch, relaxation), 2, Representation::Dense, &ch);
    let mut worst_f = 0.0f64;
    let mut notes = Vec::new();
    for s in &record.steps {
        let reference = classical[s.step].f();
        for (site, chunk) in reference.chunks(Q).enumerate() {
            let mass: f64 = chunk.iter().sum();
            for (i, &v) in chunk.iter().enumerate() {
                if v > 0.01 * mass {
                    worst_f = worst_f.max((s.decoded.f[site * Q + i] - v).abs() / v);
                }
            }
        }
        let g_ref = classical[s.step].dense_g();
        let mut g_errs: Vec<f64> = s
            .decoded
            .g
            .iter()
            .zip(&g_ref)
            .filter(|(_, &r)| r.abs() > 1e-12)
            .map(|(a, r)| (a - r).abs() / r.abs())
            .collect();
        g_errs.sort_by(f64::total_cmp);
        notes.push(format!(
            "step {}: retained shots {}, g eps median {:.2e}, max {:.2e} (reported only)",
            s.step,
            s.retained_shots.unwrap_or(0),
            g_errs[g_errs.len() / 2],
            g_errs.last().copied().unwrap_or(0.0)
        ));
    }
    notes.push(format!("{:.1}s", start.elapsed().as_secs_f64()));
    let mut o = Outcome::new(
        worst_f < 0.05,
        format!("5e8 shots, worst eps on f channels above 1% of site mass {worst_f:.3e} (< 5e-2)"),
    );
    o.notes = notes;
    o
}

fn carleman_vs_lbm() -> Outcome {
    let ch = ChannelSet::d2q9();
    let grid = LatticeGrid::square(32).unwrap();
    let relaxation = Relaxation::from_tau(5.0).unwrap();
    let f0 = taylor_green_init(grid, 0.15, WaveMode::TwoPi, &ch).unwrap();
    let lbm = bgk_run(&f0, relaxation, 10, &ch).unwrap();
    let car = carleman_run(&f0, &CollisionTensors::new(&ch, relaxation), 10, Representation::Factored, &ch);
    let m0: f64 = f0.values().iter().sum();
    let mut gap = 0.0f64;
    let mut drift = 0.0f64;
    for t in 0..=10 {
        gap = gap.max(rel_l2(&oracle_velocity(car[t].f()), &oracle_velocity(lbm[t].values())));
        let m: f64 = lbm[t].values().iter().sum();
        drift = drift.max((m - m0).abs() / m0);
    }

    // the harness subcommand must agree with the oracle
    let tmp = tempfile::tempdir().unwrap();
    let mut flags = std::collections::BTreeMap::new();
    flags.insert("scenario".to_string(), "tgv-l32".to_string());
    flags.insert("out".to_string(), tmp.path().join("t").display().to_string());
    let config = ExperimentConfig::resolve(&Default::default(), &flags).unwrap();
    let summary = tgv_command(&config).unwrap();
    let agree = (summary.max_velocity_gap() - gap).abs() <= 1e-12 * gap && summary.steps.len() == 11;

    Outcome::new(
        gap <= FROZEN_TGV_GAP && drift <= 1e-12 && agree,
        format!(
            "32x32 T=10 velocity gap {gap:.4e} (<= frozen {FROZEN_TGV_GAP:.4e}), LBM relative mass drift {drift:.1e} (<= 1e-12), harness agrees: {agree}"
        ),
    )
}

fn operator_invariants() -> Outcome {
    let ch = ChannelSet::d2q9();
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for tau in [1.0, 2.0, 5.0, 10.0] {
        let omega = 1.0 / tau;
        let t = CollisionTensors::new(&ch, Relaxation::from_tau(tau).unwrap());
        let (mut col_a, mut col_b, mut t_half, mut b_formula) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for j in 0..Q {
            col_a = col_a.max(((0..Q).map(|i| t.a[i][j]).sum::<f64>() - 1.0).abs());
            for k in 0..Q {
                col_b = col_b.max((0..Q).map(|i| t.b[i][j][k]).sum::<f64>().abs());
                for i in 0..Q {
                    let cs2 = 1.0 / 3.0;
                    let q = W[i] / (cs2 * cs2) * (dot(C[i], C[j]) * dot(C[i], C[k]) - cs2 * dot(C[j], C[k]));
                    b_formula = b_formula.max((t.b[i][j][k] - omega * q).abs());
                    t_half = t_half.max((t.c[i][j][k] + 0.5 * t.b[i][j][k]).abs());
                }
            }
        }

        let m = build_embedded_collision(&t);
        let lcu = lcu_decompose(m.matrix(), LOCAL_DIM).unwrap();
        let n = LOCAL_DIM;
        // coordinates where U or V is not the identity; the rest are
        // orthonormal to everything by construction
        let is_id = |get: &dyn Fn(usize, usize) -> C64, k: usize| {
            (0..n).all(|r| get(r, k) == if r == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
                && (0..n).all(|c| get(k, c) == if c == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
        };
        let (u, v) = (|r, c| lcu.u.get(r, c), |r, c| lcu.v.get(r, c));
        let active: Vec<usize> = (0..n).filter(|&k| !is_id(&u, k) || !is_id(&v, k)).collect();
        let mut in_active = vec![false; n];
        active.iter().for_each(|&k| in_active[k] = true);
        // compensated sums keep the check's own rounding below the factors' error
        let inf_norm = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        let (mut sum, mut comp) = (C64::new(-m.get(r, c), 0.0), C64::new(0.0, 0.0));
                        let inside = in_active[r] && in_active[c];
                        for &k in active.iter().filter(|_| inside) {
                            let term = u(r, k) * (lcu.d1[k] + lcu.d2[k]) * 0.5 * lcu.scale * v(k, c);
                            let next = sum + term;
                            comp += if sum.norm() >= term.norm() { (sum - next) + term } else { (term - next) + sum };
                            sum = next;
                        }
                        if !in_active[r] && r == c {
                            sum += (lcu.d1[r] + lcu.d2[r]) * 0.5 * lcu.scale;
                        }
                        (sum + comp).norm()
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let phase = lcu
            .d1
            .iter()
            .chain(&lcu.d2)
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        let gram = |get: &dyn Fn(usize, usize) -> C64| {
            let mut worst = 0.0f64;
            for (ia, &a) in active.iter().enumerate() {
                for &b in &active[ia..] {
                    let s: C64 = active.iter().map(|&k| get(k, a).conj() * get(k, b)).sum();
                    let e = if a == b { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                    worst = worst.max((s - e).norm());
                }
            }
            worst
        };
        let unitary = gram(&u).max(gram(&v));
        // spot value of the embedding
        let embed = (m.get(collision_index(1, 0, 0, 0), collision_index(2, 3, 1, 1)) - t.b[1][2][3]).abs();

        let grid = LatticeGrid::square(2).unwrap();
        let f0 = random_init(grid, 3, 0.2, &ch).unwrap();
        let record = run(&f0, Relaxation::from_tau(tau).unwrap(), 3, Readout::Exact, &ch).unwrap();
        let hygiene = record.steps.iter().map(|s| s.ancilla_population).fold(0.0, f64::max);

        let checks = [
            ("sum_i A_ij = 1", col_a, 1e-14),
            ("sum_i B_ijk = 0", col_b, 1e-14),
            ("B = omega * quadratic equilibrium", b_formula, 1e-14),
            ("cubic = -quadratic/2", t_half, 1e-15),
            ("LCU reconstruction inf-norm", inf_norm, 1e-12),
            ("D1/D2 unit modulus", phase, 1e-12),
            ("U, V unitarity", unitary, 1e-12),
            ("embedding", embed, 0.0),
            ("ancilla hygiene", hygiene, 1e-12),
        ];
        for (name, value, tol) in checks {
            if value > tol {
                failures.push(format!("tau={tau}: {name} {value:.2e} > {tol:.0e}"));
            }
        }
        notes.push(format!(
            "tau={tau}: s={:.4}, reconstruction {inf_norm:.2e}, unitarity {unitary:.2e}, |D1,2|-1 {phase:.1e}, ancilla {hygiene:.1e}",
            lcu.scale
        ));
    }
    let mut o = Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            "tensor identities, LCU reconstruction, D1/D2 and ancilla hygiene for tau in {1,2,5,10}".to_string()
        } else {
            failures.join("; ")
        },
    );
    o.notes = notes;
    o
}

fn proof_suite() -> Outcome {
    let ch = ChannelSet::d2q9();
    let mut failures = Vec::new();
    let mut checked = 0usize;
    for (lx, ly) in [(2, 2), (2, 4), (4, 2), (4, 4)] {
        let grid = LatticeGrid::new(lx, ly).unwrap();
        let n = lx * ly;
        // distinct values make every comparison a bijection check
        let g: Vec<f64> = (0..n * n * Q * Q).map(|k| 1.0 + k as f64).collect();
        let f: Vec<f64> = (0..n * Q).map(|k| 1.0 + k as f64).collect();
        let expected = oracle_encode(lx, ly, &g);
        checked += g.len();

        let encoded = encode(grid, &g).unwrap();
        let mut seen = encoded.clone();
        seen.sort_by(f64::total_cmp);
        if encoded != expected || seen != g {
            failures.push(format!("{lx}x{ly}: encoding is not the relative-coordinate bijection"));
        }
        if apply_plan(grid, &g, &permutation_plan(grid)).unwrap() != expected {
            failures.push(format!("{lx}x{ly}: shift plan does not produce the encoding"));
        }
        // diagonal at zero offset
        for x in 0..n {
            for i in 0..Q {
                for j in 0..Q {
                    if encoded[g_index(n, x, 0, i, j)] != g[gi(n, x, x, i, j)] {
                        failures.push(format!("{lx}x{ly}: g({x},{x}) not at zero offset"));
                    }
                }
            }
        }
        // streaming in the local layout equals natural streaming, encoded
        let local = LocalCarlemanState::new(grid, f.clone(), encoded.clone()).unwrap().stream(&ch);
        if local.g() != oracle_encode(lx, ly, &oracle_stream_g(lx, ly, &g)).as_slice() {
            failures.push(format!("{lx}x{ly}: local streaming differs from natural streaming"));
        }

        // the same two statements on the circuit: permutation and propagation
        let layout = RegisterLayout::for_grid(grid);
        let tensors = CollisionTensors::new(&ch, Relaxation::from_tau(5.0).unwrap());
        let circuit = QlbmCircuit::new(grid, &tensors, &ch).unwrap();
        let mut amps = vec![C64::new(0.0, 0.0); layout.dim()];
        for x1 in 0..n {
            for x2 in 0..n {
                for i in 0..Q {
                    for j in 0..Q {
                        amps[layout.g_index(x1, x2, i, j)] = C64::new(g[gi(n, x1, x2, i, j)], 0.0);
                    }
                }
            }
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        let mut state = StateVector::from_amplitudes(layout.n_qubits(), amps, norm).unwrap();
        execute(&mut state, circuit.permutation_ops()).unwrap();
        let read = |state: &StateVector, x1: usize, r: usize, i: usize, j: usize| {
            state.physical(layout.g_index(x1, r, i, j)).re
        };
        let mut worst = 0.0f64;
        for x1 in 0..n {
            for r in 0..n {
                for i in 0..Q {
                    for j in 0..Q {
                        worst = worst.max((read(&state, x1, r, i, j) - expected[gi(n, x1, r, i, j)]).abs());
                    }
                }
            }
        }
        execute(&mut state, circuit.propagation_ops()).unwrap();
        let streamed = oracle_encode(lx, ly, &oracle_stream_g(lx, ly, &g));
        for x1 in 0..n {
            for r in 0..n {
                for i in 0..Q {
                    for j in 0..Q {
                        worst = worst.max((read(&state, x1, r, i, j) - streamed[gi(n, x1, r, i, j)]).abs());
                    }
                }
            }
        }
        if worst > 1e-9 {
            failures.push(format!("{lx}x{ly}: circuit permutation/propagation off by {worst:.2e}"));
        }
    }
    Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            format!("encoding bijection, diagonal at zero offset, shift equivalence over {checked} (site pair, channel pair) entries")
        } else {
            failures.join("; ")
        },
    )
}

fn cost_fit() -> Outcome {
    let report = cost_report(&[2, 4, 8, 16], Relaxation::from_tau(5.0).unwrap()).unwrap();
    let (ps, pm) = (&report.per_step, &report.permutation);
    let mut o = Outcome::new(
        report.max_residual() < 0.01 && report.collision_spread == 0.0 && (pm.coefficients[1] - 3.0).abs() < 0.01,
        format!(
            "per step {:.1} + {:.2} log2(N)^2 (residual {:.1e}), permutation {:.3} log2(N)^{:.3} (residual {:.1e})",
            ps.coefficients[0], ps.coefficients[1], ps.max_relative_residual, pm.coefficients[0], pm.coefficients[1], pm.max_relative_residual
        ),
    );
    o.notes = report
        .rows
        .iter()
        .map(|r| {
            format!(
                "L={:<3} qubits {:<3} permutation {:<5} collision {:<6} propagation {:<6} per step {}",
                r.lx,
                r.n_qubits,
                r.permutation,
                r.collision,
                r.propagation,
                r.per_step()
            )
        })
        .collect();
    o
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("oracle equivalence", oracle_equivalence),
        ("per-step success probability", success_probability),
        ("shot readout accuracy", shot_readout),
        ("Carleman vs LBM physics", carleman_vs_lbm),
        ("operator invariants", operator_invariants),
        ("encoding and shift proofs", proof_suite),
        ("cost-model fit", cost_fit),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = match std::panic::catch_unwind(check) {
            Ok(o) => o,
            Err(_) => Outcome::new(false, "panicked"),
        };
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name}: {} [{:.1}s]",
            if outcome.pass { "PASS" } else { "FAIL" },
            k + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
        for note in &outcome.notes {
            println!("    {note}");
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
