//! Experiment configuration: scenario presets, flat `key=value` files and
//! flag overrides, layered in that order.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qlbm_core::lbm::{random_init, taylor_green_init, ChannelSet, DistributionField, LatticeGrid, Relaxation, WaveMode};
use qlbm_core::statevector::RegisterLayout;

use crate::CliError;

/// Largest register the statevector engine will allocate (2^27 amplitudes, 2 GiB).
pub const MAX_QUBITS: usize = 27;

pub const KEYS: [&str; 13] = [
    "scenario", "lx", "ly", "tau", "umax", "kmode", "init", "amplitude", "steps", "mode", "shots", "seed", "out",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Statevector,
    Shots,
    ClassicalCarleman,
    ClassicalLbm,
}

impl Mode {
    pub fn is_quantum(self) -> bool {
        matches!(self, Mode::Statevector | Mode::Shots)
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "statevector" => Ok(Mode::Statevector),
            "shots" => Ok(Mode::Shots),
            "classical-carleman" => Ok(Mode::ClassicalCarleman),
            "classical-lbm" => Ok(Mode::ClassicalLbm),
            _ => Err(format!(
                "unknown mode `{s}` (statevector, shots, classical-carleman, classical-lbm)"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Statevector => "statevector",
            Mode::Shots => "shots",
            Mode::ClassicalCarleman => "classical-carleman",
            Mode::ClassicalLbm => "classical-lbm",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Random,
    TaylorGreen,
}

impl FromStr for Init {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Init::Random),
            "taylor-green" => Ok(Init::TaylorGreen),
            _ => Err(format!("unknown init `{s}` (random, taylor-green)")),
        }
    }
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Init::Random => "random",
            Init::TaylorGreen => "taylor-green",
        })
    }
}

fn parse_kmode(s: &str) -> Result<WaveMode, String> {
    match s {
        "two-pi" => Ok(WaveMode::TwoPi),
        "pi" => Ok(WaveMode::Pi),
        _ => Err(format!("unknown kmode `{s}` (two-pi, pi)")),
    }
}

fn kmode_name(mode: WaveMode) -> &'static str {
    match mode {
        WaveMode::TwoPi => "two-pi",
        WaveMode::Pi => "pi",
    }
}

/// Values every scenario starts from.
const DEFAULTS: [(&str, &str); 12] = [
    ("scenario", "custom"),
    ("lx", "2"),
    ("ly", "2"),
    ("tau", "5"),
    ("umax", "0.15"),
    ("kmode", "two-pi"),
    ("init", "random"),
    ("amplitude", "0.2"),
    ("steps", "5"),
    ("mode", "statevector"),
    ("seed", "1"),
    ("out", "runs/custom"),
];

/// Built-in scenarios. Shot counts follow the published runs and can be
/// lowered with `--shots`.
pub fn preset(name: &str) -> Option<Vec<(&'static str, &'static str)>> {
    let p = match name {
        "random-l2" | "random-L2" | "random-l2-exact" => vec![("lx", "2"), ("ly", "2"), ("steps", "5")],
        "random-l2-shots" => vec![
            ("lx", "2"),
            ("ly", "2"),
            ("steps", "2"),
            ("mode", "shots"),
            ("shots", "500000000"),
        ],
        "random-l4" | "random-L4" | "random-l4-exact" => vec![("lx", "4"), ("ly", "4"), ("steps", "6")],
        "random-l4-shots" => vec![
            ("lx", "4"),
            ("ly", "4"),
            ("steps", "2"),
            ("mode", "shots"),
            ("shots", "500000000"),
        ],
        "tgv-l32" => vec![
            ("lx", "32"),
            ("ly", "32"),
            ("steps", "10"),
            ("init", "taylor-green"),
            ("mode", "classical-carleman"),
        ],
        "tgv-l8" => vec![
            ("lx", "8"),
            ("ly", "8"),
            ("steps", "6"),
            ("init", "taylor-green"),
            ("kmode", "pi"),
        ],
        _ => return None,
    };
    Some(p)
}

pub const SCENARIOS: [&str; 6] = [
    "random-l2",
    "random-l2-shots",
    "random-l4",
    "random-l4-shots",
    "tgv-l32",
    "tgv-l8",
];

/// Parses a flat `key=value` file; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value, got `{line}`", n + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", n + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config `{}`: {e}", path.display())))?;
    parse_config_text(&text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub lx: usize,
    pub ly: usize,
    pub tau: f64,
    pub umax: f64,
    pub kmode: WaveMode,
    pub init: Init,
    /// Perturbation size of the random initial state around the weights.
    pub amplitude: f64,
    pub steps: usize,
    pub mode: Mode,
    pub shots: Option<u64>,
    pub seed: u64,
    pub out: PathBuf,
}

fn field<T: FromStr>(settings: &BTreeMap<String, String>, key: &'static str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    let raw = settings
        .get(key)
        .ok_or_else(|| CliError::Usage(format!("missing value for `{key}`")))?;
    raw.parse()
        .map_err(|e| CliError::Usage(format!("invalid value `{raw}` for `{key}`: {e}")))
}

impl ExperimentConfig {
    /// Layers defaults, the scenario preset, `file` and `flags`, then validates.
    pub fn resolve(
        file: &BTreeMap<String, String>,
        flags: &BTreeMap<String, String>,
    ) -> Result<Self, CliError> {
        let scenario = flags
            .get("scenario")
            .or_else(|| file.get("scenario"))
            .cloned()
            .unwrap_or_else(|| "custom".to_string());
        let mut settings: BTreeMap<String, String> =
            DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        if scenario != "custom" {
            let preset = preset(&scenario).ok_or_else(|| {
                CliError::Usage(format!("unknown scenario `{scenario}` (one of {})", SCENARIOS.join(", ")))
            })?;
            settings.extend(preset.into_iter().map(|(k, v)| (k.to_string(), v.to_string())));
            settings.insert("out".into(), format!("runs/{scenario}"));
        }
        for (k, v) in file.iter().chain(flags) {
            if !KEYS.contains(&k.as_str()) {
                return Err(CliError::Usage(format!("unknown key `{k}`")));
            }
            settings.insert(k.clone(), v.clone());
        }
        settings.insert("scenario".into(), scenario);
        Self::from_settings(&settings)
    }

    pub fn from_settings(settings: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let kmode_raw: String = field(settings, "kmode")?;
        let config = Self {
            scenario: field(settings, "scenario")?,
            lx: field(settings, "lx")?,
            ly: field(settings, "ly")?,
            tau: field(settings, "tau")?,
            umax: field(settings, "umax")?,
            kmode: parse_kmode(&kmode_raw).map_err(|e| CliError::Usage(format!("`kmode`: {e}")))?,
            init: field(settings, "init")?,
            amplitude: field(settings, "amplitude")?,
            steps: field(settings, "steps")?,
            mode: field(settings, "mode")?,
            shots: match settings.get("shots") {
                Some(s) if !s.is_empty() => Some(parse_count(s)?),
                _ => None,
            },
            seed: field(settings, "seed")?,
            out: PathBuf::from(field::<String>(settings, "out")?),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        let usage = |key: &str, why: String| Err(CliError::Usage(format!("invalid `{key}`: {why}")));
        for (key, v) in [("lx", self.lx), ("ly", self.ly)] {
            if v == 0 || !v.is_power_of_two() {
                return usage(key, format!("{v} is not a positive power of two"));
            }
        }
        if !(self.tau >= 0.5 && self.tau.is_finite()) {
            return usage("tau", format!("{} is below the stability limit 0.5", self.tau));
        }
        if !(0.0..0.3).contains(&self.umax) {
            return usage("umax", format!("{} outside [0, 0.3)", self.umax));
        }
        if !(self.amplitude >= 0.0 && self.amplitude < 1.0) {
            return usage("amplitude", format!("{} outside [0, 1)", self.amplitude));
        }
        if self.steps == 0 {
            return usage("steps", "must be at least 1".into());
        }
        match (self.mode, self.shots) {
            (Mode::Shots, None) => return usage("shots", "required in shots mode".into()),
            (Mode::Shots, Some(0)) => return usage("shots", "must be at least 1".into()),
            _ => {}
        }
        if self.mode.is_quantum() {
            let qubits = RegisterLayout::for_grid(self.grid()).n_qubits();
            if qubits > MAX_QUBITS {
                return usage(
                    "lx",
                    format!("the statevector needs {qubits} qubits, more than the {MAX_QUBITS} this build allocates"),
                );
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> LatticeGrid {
        LatticeGrid::new(self.lx, self.ly).expect("validated")
    }

    pub fn relaxation(&self) -> Relaxation {
        Relaxation::from_tau(self.tau).expect("validated")
    }

    pub fn initial_field(&self, channels: &ChannelSet) -> Result<DistributionField, CliError> {
        let f = match self.init {
            Init::Random => random_init(self.grid(), self.seed, self.amplitude, channels)?,
            Init::TaylorGreen => taylor_green_init(self.grid(), self.umax, self.kmode, channels)?,
        };
        Ok(f)
    }

    /// Resolved settings in a fixed order; feeding them back reproduces `self`.
    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("scenario", self.scenario.clone()),
            ("lx", self.lx.to_string()),
            ("ly", self.ly.to_string()),
            ("tau", self.tau.to_string()),
            ("umax", self.umax.to_string()),
            ("kmode", kmode_name(self.kmode).to_string()),
            ("init", self.init.to_string()),
            ("amplitude", self.amplitude.to_string()),
            ("steps", self.steps.to_string()),
            ("mode", self.mode.to_string()),
            ("shots", self.shots.map(|s| s.to_string()).unwrap_or_default()),
            ("seed", self.seed.to_string()),
            ("out", self.out.display().to_string()),
        ]
    }

    pub fn to_config_text(&self) -> String {
        self.key_values().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

/// Accepts plain integers and `5e8`-style counts.
pub fn parse_count(s: &str) -> Result<u64, CliError> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid count `{s}`")))?;
    if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 {
        Ok(v as u64)
    } else {
        Err(CliError::Usage(format!("invalid count `{s}`")))
    }
}
