//! Run configuration: `key = value` lines grouped under `[section]` headers.
//! Keys are addressed as `section.key`; `--set section.key=value` overrides
//! any of them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mc2_core::optimizer::LiftMode;

use crate::CliError;

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("code.gamma", "base rows"),
    ("code.kappa", "base columns"),
    ("code.z", "circulant size"),
    ("code.L", "coupling length"),
    ("code.m", "memory"),
    ("code.base", "base matrix file (all-one when absent)"),
    ("partition.weights", "cycle-4, cycle-6, cycle-8 weights"),
    ("partition.allowed", "allowed component indices (TC codes)"),
    ("partition.l1_cap", "L1 distance cap from the initial matrix"),
    ("partition.linf_cap", "max-norm distance cap from the initial matrix"),
    ("partition.input", "initial partitioning matrix"),
    ("lift.mode", "cycles or uts"),
    ("lift.partition", "partitioning matrix of the code"),
    ("lift.lifting", "lifting matrix of the code"),
    ("anneal.d", "entries changed per transition"),
    ("anneal.targets", "acceptance targets, equal budgets"),
    ("anneal.transitions", "transition budget per stage"),
    ("anneal.beta_scale", "initial beta as a multiple of alpha"),
    ("anneal.gibbs", "plain Gibbs draws instead of overrelaxation"),
    ("estimate.problem", "partition or lift"),
    ("estimate.betas", "fixed beta values (ladder when absent)"),
    ("estimate.samples", "samples per beta"),
    ("estimate.ladder_budget", "transitions per ladder probe"),
    ("estimate.eps", "normalized tolerance"),
    ("estimate.overrelax", "sample with overrelaxation instead of Gibbs draws"),
    ("simulate.rates", "erasure probabilities"),
    ("simulate.frames", "frames per rate"),
    ("simulate.code", "alist file of the code"),
    ("enumerate.g", "cycle half-length"),
    ("enumerate.target", "base or protograph"),
    ("run.seed", "master seed"),
    ("run.threads", "worker threads"),
    ("run.out", "output directory"),
];

/// Keys that do not change any output and stay out of the config hash.
const VOLATILE: &[&str] = &["run.threads", "run.out"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = ConfigMap::default();
        let mut section = String::from("run");
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::Usage(format!("config line {}: unterminated section", n + 1)))?;
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
            map.set(&format!("{section}.{}", k.trim()), v.trim())
                .map_err(|e| CliError::Usage(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(map)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let key = if key == "code.coupling_length" { "code.L" } else { key };
        if !known(key) {
            return Err(format!("unknown key {key:?}"));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// `key=value` lines of every output-relevant entry, sorted.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            if !VOLATILE.contains(&k.as_str()) {
                s.push_str(&format!("{k}={v}\n"));
            }
        }
        s
    }
}

fn parse_one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split([',', ' '])
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_one(key, t))
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Usage(format!("{key}: expected true or false, got {v:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateProblem {
    Partition,
    Lift,
}

/// Typed view of a [`ConfigMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gamma: Option<usize>,
    pub kappa: Option<usize>,
    pub z: Option<usize>,
    pub coupling_length: Option<usize>,
    pub memory: Option<usize>,
    pub base: Option<PathBuf>,
    pub weights: [f64; 3],
    pub allowed: Option<Vec<u32>>,
    pub l1_cap: Option<u64>,
    pub linf_cap: Option<u32>,
    pub partition_input: Option<PathBuf>,
    pub lift_mode: LiftMode,
    pub partition: Option<PathBuf>,
    pub lifting: Option<PathBuf>,
    pub d: usize,
    pub targets: Vec<f64>,
    pub transitions: Option<u64>,
    pub beta_scale: f64,
    pub gibbs: bool,
    pub estimate_problem: EstimateProblem,
    pub betas: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub ladder_budget: Option<u64>,
    pub eps: Option<f64>,
    pub overrelax: bool,
    pub rates: Vec<f64>,
    pub frames: usize,
    pub code: Option<PathBuf>,
    pub g: usize,
    pub target_protograph: bool,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self, CliError> {
        let num = |k: &str| -> Result<Option<usize>, CliError> { map.get(k).map(|v| parse_one(k, v)).transpose() };
        let path = |k: &str| -> Result<Option<PathBuf>, CliError> {
            match map.get(k) {
                None => Ok(None),
                Some(v) => {
                    let p = PathBuf::from(v);
                    if !p.exists() {
                        return Err(CliError::Usage(format!("{k}: file {v:?} does not exist")));
                    }
                    Ok(Some(p))
                }
            }
        };
        let weights = match map.get("partition.weights") {
            Some(v) => {
                let w: Vec<f64> = parse_list("partition.weights", v)?;
                if w.len() != 3 || w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(CliError::Usage("partition.weights: three non-negative numbers".into()));
                }
                [w[0], w[1], w[2]]
            }
            None => [0.0, 1.0, 0.2],
        };
        let lift_mode = match map.get("lift.mode").unwrap_or("cycles") {
            "cycles" => LiftMode::Cycles,
            "uts" => LiftMode::Uts,
            v => return Err(CliError::Usage(format!("lift.mode: expected cycles or uts, got {v:?}"))),
        };
        let estimate_problem = match map.get("estimate.problem").unwrap_or("lift") {
            "partition" => EstimateProblem::Partition,
            "lift" => EstimateProblem::Lift,
            v => return Err(CliError::Usage(format!("estimate.problem: expected partition or lift, got {v:?}"))),
        };
        let target_protograph = match map.get("enumerate.target").unwrap_or("base") {
            "base" => false,
            "protograph" => true,
            v => return Err(CliError::Usage(format!("enumerate.target: expected base or protograph, got {v:?}"))),
        };
        let targets = match map.get("anneal.targets") {
            Some(v) => parse_list("anneal.targets", v)?,
            None => vec![0.5, 0.3, 0.15, 0.05],
        };
        if targets.is_empty() || targets.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return Err(CliError::Usage("anneal.targets: values in (0, 1)".into()));
        }
        let cfg = RunConfig {
            gamma: num("code.gamma")?,
            kappa: num("code.kappa")?,
            z: num("code.z")?,
            coupling_length: num("code.L")?,
            memory: num("code.m")?,
            base: path("code.base")?,
            weights,
            allowed: map.get("partition.allowed").map(|v| parse_list("partition.allowed", v)).transpose()?,
            l1_cap: map.get("partition.l1_cap").map(|v| parse_one("partition.l1_cap", v)).transpose()?,
            linf_cap: map.get("partition.linf_cap").map(|v| parse_one("partition.linf_cap", v)).transpose()?,
            partition_input: path("partition.input")?,
            lift_mode,
            partition: path("lift.partition")?,
            lifting: path("lift.lifting")?,
            d: num("anneal.d")?.unwrap_or(1),
            targets,
            transitions: map.get("anneal.transitions").map(|v| parse_one("anneal.transitions", v)).transpose()?,
            beta_scale: map.get("anneal.beta_scale").map(|v| parse_one("anneal.beta_scale", v)).transpose()?.unwrap_or(1.0),
            gibbs: map.get("anneal.gibbs").map(|v| parse_bool("anneal.gibbs", v)).transpose()?.unwrap_or(false),
            estimate_problem,
            betas: map.get("estimate.betas").map(|v| parse_list("estimate.betas", v)).transpose()?,
            samples: num("estimate.samples")?,
            ladder_budget: map.get("estimate.ladder_budget").map(|v| parse_one("estimate.ladder_budget", v)).transpose()?,
            eps: map.get("estimate.eps").map(|v| parse_one("estimate.eps", v)).transpose()?,
            overrelax: map.get("estimate.overrelax").map(|v| parse_bool("estimate.overrelax", v)).transpose()?.unwrap_or(false),
            rates: map.get("simulate.rates").map(|v| parse_list("simulate.rates", v)).transpose()?.unwrap_or_default(),
            frames: num("simulate.frames")?.unwrap_or(1000),
            code: path("simulate.code")?,
            g: num("enumerate.g")?.unwrap_or(3),
            target_protograph,
            seed: map.get("run.seed").map(|v| parse_one("run.seed", v)).transpose()?.unwrap_or(0),
            threads: num("run.threads")?,
            out: PathBuf::from(map.get("run.out").unwrap_or("mc2_out")),
        };
        if cfg.d == 0 {
            return Err(CliError::Usage("anneal.d must be positive".into()));
        }
        if cfg.threads == Some(0) {
            return Err(CliError::Usage("run.threads must be positive".into()));
        }
        if !(cfg.beta_scale > 0.0 && cfg.beta_scale.is_finite()) {
            return Err(CliError::Usage("anneal.beta_scale must be positive".into()));
        }
        Ok(cfg)
    }

    fn need(&self, v: Option<usize>, key: &str) -> Result<usize, CliError> {
        v.ok_or_else(|| CliError::Usage(format!("{key} is required for this command")))
    }

    pub fn gamma_kappa(&self) -> Result<(usize, usize), CliError> {
        Ok((self.need(self.gamma, "code.gamma")?, self.need(self.kappa, "code.kappa")?))
    }

    pub fn memory(&self) -> Result<usize, CliError> {
        self.need(self.memory, "code.m")
    }

    /// `(gamma, kappa, z, L, m)`.
    pub fn code_tuple(&self) -> Result<(usize, usize, usize, usize, usize), CliError> {
        let (g, k) = self.gamma_kappa()?;
        Ok((
            g,
            k,
            self.need(self.z, "code.z")?,
            self.need(self.coupling_length, "code.L")?,
            self.memory()?,
        ))
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
