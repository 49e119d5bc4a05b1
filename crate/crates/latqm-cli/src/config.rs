//! Subcommand schemas and `--key value` parsing with optional config files.
//!
//! Every run resolves to a flat key/value map validated against the
//! subcommand's schema: unknown keys and malformed values are usage errors
//! naming the offending key, file keys are overridden by flags, and the
//! resolved map (plus the raw file and flag maps) is echoed into the run
//! manifest so a run can be reproduced from its own output.

use std::collections::BTreeMap;
use std::path::PathBuf;

use latqm_core::{Engine, Integrator, KernelVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Dispersion,
    Scatter,
    Commutator,
    Hop,
    KernelDump,
    DerivativeCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dispersion => "dispersion",
            Command::Scatter => "scatter",
            Command::Commutator => "commutator",
            Command::Hop => "hop",
            Command::KernelDump => "kernel-dump",
            Command::DerivativeCheck => "derivative-check",
        }
    }

    fn from_name(name: &str) -> Option<Command> {
        Some(match name {
            "dispersion" => Command::Dispersion,
            "scatter" => Command::Scatter,
            "commutator" => Command::Commutator,
            "hop" => Command::Hop,
            "kernel-dump" => Command::KernelDump,
            "derivative-check" => Command::DerivativeCheck,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    UInt,
    Float,
    Kernel,
    Integrator,
}

struct Key {
    name: &'static str,
    kind: Kind,
    /// None marks a default computed from other keys (N-dependent).
    default: Option<&'static str>,
}

const PI_6: &str = "0.5235987755982988"; // pi/6
const PI2_8: &str = "1.2337005501361697"; // pi^2/8

fn schema(command: Command) -> &'static [Key] {
    match command {
        Command::Scatter => &[
            Key { name: "N", kind: Kind::UInt, default: Some("500") },
            Key { name: "ell", kind: Kind::Float, default: Some("1") },
            Key { name: "k0", kind: Kind::Float, default: Some(PI_6) },
            Key { name: "sigma_over_ell", kind: Kind::Float, default: Some("15") },
            Key { name: "E0_over_U", kind: Kind::Float, default: Some(PI2_8) },
            Key { name: "W_over_ell", kind: Kind::UInt, default: Some("10") },
            Key { name: "dtau", kind: Kind::Float, default: Some("0.001") },
            Key { name: "kernel", kind: Kind::Kernel, default: Some("exact-finite") },
            Key { name: "integrator", kind: Kind::Integrator, default: Some("euler") },
            Key { name: "barrier_left", kind: Kind::UInt, default: None },
        ],
        Command::Dispersion => &[
            Key { name: "kernel", kind: Kind::Kernel, default: Some("central") },
            Key { name: "N", kind: Kind::UInt, default: Some("500") },
            Key { name: "ell", kind: Kind::Float, default: Some("1") },
            Key { name: "m_max", kind: Kind::UInt, default: None },
        ],
        Command::Commutator => &[
            Key { name: "N", kind: Kind::UInt, default: Some("8") },
            Key { name: "ell", kind: Kind::Float, default: Some("1") },
        ],
        Command::Hop => &[
            Key { name: "N", kind: Kind::UInt, default: Some("500") },
            Key { name: "ell", kind: Kind::Float, default: Some("1") },
            Key { name: "dtau", kind: Kind::Float, default: Some("0.001") },
        ],
        Command::KernelDump => &[
            Key { name: "kernel", kind: Kind::Kernel, default: Some("exact-finite") },
            Key { name: "N", kind: Kind::UInt, default: Some("500") },
            Key { name: "ell", kind: Kind::Float, default: Some("1") },
            Key { name: "m_max", kind: Kind::UInt, default: None },
        ],
        Command::DerivativeCheck => &[
            Key { name: "N", kind: Kind::UInt, default: Some("500") },
            Key { name: "ell", kind: Kind::Float, default: Some("1") },
            Key { name: "sigma_over_ell", kind: Kind::Float, default: Some("15") },
            Key { name: "m_max", kind: Kind::UInt, default: None },
        ],
    }
}

#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A fully resolved run request.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    /// Resolved values (defaults merged; computed defaults still absent).
    pub values: BTreeMap<String, String>,
    pub file_values: BTreeMap<String, String>,
    pub flag_values: BTreeMap<String, String>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl RunConfig {
    pub fn get_usize(&self, key: &str) -> usize {
        self.values[key].parse().expect("validated at parse time")
    }

    pub fn get_f64(&self, key: &str) -> f64 {
        self.values[key].parse().expect("validated at parse time")
    }

    pub fn get_kernel(&self, key: &str, m_max: usize) -> KernelVariant {
        match self.values[key].as_str() {
            "central" => KernelVariant::Central,
            "exact-finite" => KernelVariant::ExactFiniteN,
            "exact-truncated" => KernelVariant::ExactTruncated { m_max },
            other => unreachable!("validated kernel name {other}"),
        }
    }

    pub fn get_integrator(&self, key: &str) -> Integrator {
        match self.values[key].as_str() {
            "euler" => Integrator::Euler,
            "rk4" => Integrator::Rk4,
            other => unreachable!("validated integrator name {other}"),
        }
    }

    /// Record a computed default so the manifest echoes the value actually
    /// used.
    pub fn record_resolved(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }

    /// Engine selection is automatic: spectral above the measured crossover.
    pub fn engine(&self) -> Engine {
        Engine::Auto
    }
}

fn validate(command: Command, key: &str, value: &str) -> Result<(), UsageError> {
    let spec = schema(command)
        .iter()
        .find(|k| k.name == key)
        .ok_or_else(|| {
            UsageError(format!("unknown key --{key} for subcommand {}", command.name()))
        })?;
    let ok = match spec.kind {
        Kind::UInt => value.parse::<u64>().is_ok(),
        Kind::Float => value.parse::<f64>().map(|v| v.is_finite()).unwrap_or(false),
        Kind::Kernel => matches!(value, "central" | "exact-finite" | "exact-truncated"),
        Kind::Integrator => matches!(value, "euler" | "rk4"),
    };
    if ok {
        Ok(())
    } else {
        Err(UsageError(format!(
            "bad value for --{key}: {value:?} is not a valid {}",
            match spec.kind {
                Kind::UInt => "nonnegative integer",
                Kind::Float => "finite number",
                Kind::Kernel => "kernel (central | exact-finite | exact-truncated)",
                Kind::Integrator => "integrator (euler | rk4)",
            }
        )))
    }
}

fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        // "key value" or "key = value"
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => line
                .split_once(char::is_whitespace)
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| {
                    UsageError(format!("config line {}: expected 'key value'", lineno + 1))
                })?,
        };
        if value.is_empty() {
            return Err(UsageError(format!("config line {}: missing value for {key}", lineno + 1)));
        }
        map.insert(key.to_string(), value.to_string());
    }
    Ok(map)
}

pub const USAGE: &str = "usage: latqm <subcommand> [--key value]...

subcommands:
  scatter           Gaussian packet vs square barrier; defaults reproduce the
                    reference run (N=500, ell=1, k0=pi/6, sigma=15 ell,
                    E0/U=pi^2/8, W=10 ell, dtau=0.001, exact-finite kernel,
                    Euler). Packet launches from site N/4; barrier_left
                    defaults to N/2+1.
  dispersion        CSV sweep of the kernel dispersion against hbar^2k^2/2M.
  commutator        Dense [X,P] identity check at small N.
  hop               One-step jump statistics and the uncertainty product.
  kernel-dump       Coefficient table of a kernel.
  derivative-check  Nonlocal derivative of a Gaussian vs the closed form.

global flags:
  --config FILE     Key/value file ('key value' or 'key = value' lines, '#'
                    comments); command-line flags override file entries.
  --output-dir DIR  Output directory (fallback: LATQM_OUTPUT_DIR, then '.').
  --seed INT        Recorded in the manifest; runs are deterministic.

exit codes: 0 ok, 2 usage, 3 numerical instability, 4 i/o error.";

/// Parse argv (without the program name) plus environment fallbacks.
pub fn parse_config(args: &[String]) -> Result<RunConfig, UsageError> {
    let sub = args.first().ok_or_else(|| UsageError(USAGE.to_string()))?;
    if sub == "--help" || sub == "help" || sub == "-h" {
        return Err(UsageError(USAGE.to_string()));
    }
    let command = Command::from_name(sub)
        .ok_or_else(|| UsageError(format!("unknown subcommand {sub:?}\n\n{USAGE}")))?;

    let mut flag_values = BTreeMap::new();
    let mut config_path: Option<String> = None;
    let mut output_dir: Option<String> = None;
    let mut seed: u64 = 0;

    let mut it = args[1..].iter();
    while let Some(arg) = it.next() {
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| UsageError(format!("expected --key, got {arg:?}")))?;
        let value = it
            .next()
            .ok_or_else(|| UsageError(format!("missing value for --{key}")))?
            .clone();
        match key {
            "config" => config_path = Some(value),
            "output-dir" => output_dir = Some(value),
            "seed" => {
                seed = value
                    .parse()
                    .map_err(|_| UsageError(format!("bad value for --seed: {value:?}")))?;
            }
            _ => {
                validate(command, key, &value)?;
                flag_values.insert(key.to_string(), value);
            }
        }
    }

    let file_values = match &config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("cannot read config file {path}: {e}")))?;
            let map = parse_config_file(&text)?;
            for (k, v) in &map {
                validate(command, k, v)?;
            }
            map
        }
        None => BTreeMap::new(),
    };

    // defaults, then file, then flags
    let mut values = BTreeMap::new();
    for key in schema(command) {
        if let Some(d) = key.default {
            values.insert(key.name.to_string(), d.to_string());
        }
    }
    for (k, v) in &file_values {
        values.insert(k.clone(), v.clone());
    }
    for (k, v) in &flag_values {
        values.insert(k.clone(), v.clone());
    }

    let output_dir = output_dir
        .or_else(|| std::env::var("LATQM_OUTPUT_DIR").ok())
        .unwrap_or_else(|| ".".to_string());

    Ok(RunConfig {
        command,
        values,
        file_values,
        flag_values,
        output_dir: PathBuf::from(output_dir),
        seed,
    })
}
