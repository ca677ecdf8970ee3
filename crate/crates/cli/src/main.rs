use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::{ConfigMap, RunConfig};

/// Design SC-LDPC codes with the MC2 optimizer.
#[derive(Parser, Debug)]
#[command(name = "mc2", version, about)]
struct Cli {
    /// Config file of `key = value` lines under `[section]` headers
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. `--set anneal.d=2`
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Code parameters gamma,kappa,z,L,m
    #[arg(long, value_name = "G,K,Z,L,M", global = true)]
    code: Option<String>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (results do not depend on it)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Report length and rate; write the protograph and alist when matrices are given
    Construct,
    /// Enumerate cycle candidates of the base matrix or SC protograph
    Enumerate {
        /// Cycle half-length (2, 3 or 4)
        #[arg(long)]
        g: Option<usize>,
        /// Enumerate on the SC protograph instead of the base matrix
        #[arg(long)]
        protograph: bool,
    },
    /// Optimize the partitioning matrix
    OptimizePartition,
    /// Optimize the lifting matrix in stages
    OptimizeLift,
    /// Fixed-beta sampling and model fits
    Estimate,
    /// Compare fast cycle counts with the exact graph oracle
    Validate,
    /// Write the lifted code as alist
    Export,
    /// Peeling-decoder FER over the erasure channel
    SimulateBec,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Construct => "construct",
            Command::Enumerate { .. } => "enumerate",
            Command::OptimizePartition => "optimize-partition",
            Command::OptimizeLift => "optimize-lift",
            Command::Estimate => "estimate",
            Command::Validate => "validate",
            Command::Export => "export",
            Command::SimulateBec => "simulate-bec",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, malformed config, missing files.
    Usage(String),
    /// Infeasible inputs or failed validation.
    Failed(String),
}

impl From<mc2_core::Error> for CliError {
    fn from(e: mc2_core::Error) -> Self {
        match e {
            mc2_core::Error::Io(m) => CliError::Usage(m),
            e => CliError::Failed(e.to_string()),
        }
    }
}

fn resolve(cli: &Cli) -> Result<(ConfigMap, RunConfig), CliError> {
    let mut map = match &cli.config {
        Some(p) => ConfigMap::parse(&config::read_text(p)?)?,
        None => ConfigMap::default(),
    };
    for o in &cli.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {o:?}")))?;
        map.set(k.trim(), v.trim()).map_err(CliError::Usage)?;
    }
    if let Some(code) = &cli.code {
        let parts: Vec<&str> = code.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(CliError::Usage(format!("--code expects five values, got {code:?}")));
        }
        for (k, v) in ["code.gamma", "code.kappa", "code.z", "code.L", "code.m"].iter().zip(parts) {
            map.set(k, v).map_err(CliError::Usage)?;
        }
    }
    if let Some(s) = cli.seed {
        map.set("run.seed", &s.to_string()).map_err(CliError::Usage)?;
    }
    if let Some(t) = cli.threads {
        map.set("run.threads", &t.to_string()).map_err(CliError::Usage)?;
    }
    if let Some(o) = &cli.out {
        map.set("run.out", &o.to_string_lossy()).map_err(CliError::Usage)?;
    }
    if let Command::Enumerate { g, protograph } = cli.command {
        if let Some(g) = g {
            map.set("enumerate.g", &g.to_string()).map_err(CliError::Usage)?;
        }
        if protograph {
            map.set("enumerate.target", "protograph").map_err(CliError::Usage)?;
        }
    }
    let cfg = RunConfig::from_map(&map)?;
    Ok((map, cfg))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let start = Instant::now();
    let result = resolve(&cli).and_then(|(map, cfg)| {
        if let Some(t) = cfg.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        commands::execute(cli.command, &map, &cfg)
    });
    match result {
        Ok(summary) => {
            println!("{summary} wall_time={:.2}s", start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Failed(m)) => {
            eprintln!("failed: {m}");
            ExitCode::from(2)
        }
    }
}
