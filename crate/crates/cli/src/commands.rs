use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use mc2_core::bec::{extract_stopping_set, fer_csv, residual_size_histogram, run_fer};
use mc2_core::cycles::{enumerate_candidates, enumerate_protograph_candidates, ObjectClass, ObjectiveSpec};
use mc2_core::estimator::{analyze, beta_ladder, collect_samples, histogram_csv, DEFAULT_LADDER_FRACTIONS};
use mc2_core::matrix::{
    build_sc_protograph, export_alist, lift_to_tanner, read_alist, read_binary_grid, read_int_grid, write_binary_grid,
    write_int_grid, BinaryMatrix, EntrySpace, IntGrid, LiftingMatrix, PartitioningMatrix, SCCodeParams, SCProtograph,
    TannerGraph,
};
use mc2_core::optimizer::{
    lift_objects, log_csv, optimize_lift_protograph, optimize_partition, partition_problem, random_cycle4_free,
    LiftCandidates, OptProblem, OptimizeOptions, SamplerConfig,
};
use mc2_core::oracle::count_cycles_graph;

use crate::config::{read_text, ConfigMap, EstimateProblem, RunConfig};
use crate::{CliError, Command};

/// Files of one run, written together with the manifest.
struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(cfg: &RunConfig) -> Self {
        Outputs {
            dir: cfg.out.clone(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: impl Into<String>, content: String) {
        self.files.push((name.into(), content));
    }

    fn write(self, command: Command, map: &ConfigMap, cfg: &RunConfig) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Usage(format!("{}: {e}", self.dir.display()));
        fs::create_dir_all(&self.dir).map_err(io)?;
        let canonical = map.canonical();
        let mut manifest = String::new();
        writeln!(manifest, "command={}", command.name()).unwrap();
        writeln!(manifest, "mc2_version={}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(manifest, "seed={}", cfg.seed).unwrap();
        writeln!(manifest, "config_sha256={}", sha256_hex(canonical.as_bytes())).unwrap();
        for line in canonical.lines() {
            writeln!(manifest, "config {line}").unwrap();
        }
        for (name, content) in &self.files {
            fs::write(self.dir.join(name), content).map_err(io)?;
            writeln!(manifest, "output {name} sha256={}", sha256_hex(content.as_bytes())).unwrap();
        }
        fs::write(self.dir.join("manifest.txt"), manifest).map_err(io)?;
        Ok(())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn fmt_count(v: f64) -> String {
    format!("{}", (v * 1e6).round() / 1e6)
}

fn base_matrix(cfg: &RunConfig) -> Result<BinaryMatrix, CliError> {
    let (g, k) = cfg.gamma_kappa()?;
    match &cfg.base {
        Some(p) => {
            let b = read_binary_grid(&read_text(p)?)?;
            if b.rows() != g || b.cols() != k {
                return Err(CliError::Usage(format!(
                    "base matrix is {}x{}, config says {g}x{k}",
                    b.rows(),
                    b.cols()
                )));
            }
            Ok(b)
        }
        None => Ok(BinaryMatrix::ones(g, k)),
    }
}

fn params(cfg: &RunConfig) -> Result<SCCodeParams, CliError> {
    let (g, k, z, l, m) = cfg.code_tuple()?;
    Ok(SCCodeParams::new(g, k, z, l, m)?)
}

fn read_partition(path: &Path, base: &BinaryMatrix, cfg: &RunConfig) -> Result<PartitioningMatrix, CliError> {
    let grid = read_int_grid(&read_text(path)?)?;
    Ok(PartitioningMatrix::new(grid, base, cfg.memory()?, cfg.allowed.as_deref())?)
}

/// The configured partitioning matrix, or a uniformly random one from the seed.
fn partition_or_random(base: &BinaryMatrix, cfg: &RunConfig) -> Result<(PartitioningMatrix, bool), CliError> {
    if let Some(p) = &cfg.partition {
        return Ok((read_partition(p, base, cfg)?, false));
    }
    let m = cfg.memory()?;
    let alphabet: Vec<u32> = cfg.allowed.clone().unwrap_or_else(|| (0..=m as u32).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7061_7274);
    let mut grid = IntGrid::filled(base, 0);
    for i in 0..base.rows() {
        for j in 0..base.cols() {
            if base.get(i, j) {
                grid.set(i, j, Some(alphabet[rng.gen_range(0..alphabet.len())]));
            }
        }
    }
    Ok((PartitioningMatrix::new(grid, base, m, cfg.allowed.as_deref())?, true))
}

fn read_lifting(path: &Path, base: &BinaryMatrix, z: usize) -> Result<LiftingMatrix, CliError> {
    Ok(LiftingMatrix::new(read_int_grid(&read_text(path)?)?, base, z)?)
}

fn optimize_options(cfg: &RunConfig, gamma: usize, kappa: usize) -> OptimizeOptions {
    let mut o = OptimizeOptions::for_base(gamma, kappa, cfg.seed);
    o.d = cfg.d;
    o.targets = cfg.targets.clone();
    if let Some(t) = cfg.transitions {
        o.max_transitions = t;
    }
    o.beta_scale = cfg.beta_scale;
    o.gibbs = cfg.gibbs;
    o
}

/// Protograph and lifted graph from the configured partition and lifting files.
fn configured_code(cfg: &RunConfig) -> Result<(SCProtograph, LiftingMatrix, TannerGraph), CliError> {
    let p = params(cfg)?;
    let base = base_matrix(cfg)?;
    let part = cfg
        .partition
        .as_ref()
        .ok_or_else(|| CliError::Usage("lift.partition is required for this command".into()))?;
    let lift = cfg
        .lifting
        .as_ref()
        .ok_or_else(|| CliError::Usage("lift.lifting is required for this command".into()))?;
    let partition = read_partition(part, &base, cfg)?;
    let lifting = read_lifting(lift, &base, p.z)?;
    let proto = build_sc_protograph(&p, &partition, &base)?;
    let graph = lift_to_tanner(&proto, &lifting, p.z)?;
    Ok((proto, lifting, graph))
}

pub fn execute(command: Command, map: &ConfigMap, cfg: &RunConfig) -> Result<String, CliError> {
    let mut out = Outputs::new(cfg);
    let summary = match command {
        Command::Construct => construct(cfg, &mut out)?,
        Command::Enumerate { .. } => enumerate(cfg, &mut out)?,
        Command::OptimizePartition => optimize_partition_cmd(cfg, &mut out)?,
        Command::OptimizeLift => optimize_lift_cmd(cfg, &mut out)?,
        Command::Estimate => estimate(cfg, &mut out)?,
        Command::Validate => {
            let (summary, ok) = validate(cfg, &mut out)?;
            out.write(command, map, cfg)?;
            return if ok { Ok(summary) } else { Err(CliError::Failed(summary)) };
        }
        Command::Export => export(cfg, &mut out)?,
        Command::SimulateBec => simulate(cfg, &mut out)?,
    };
    out.write(command, map, cfg)?;
    Ok(summary)
}

fn construct(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let p = params(cfg)?;
    let rate = p.design_rate();
    let mut s = format!(
        "construct: length={} rate={:.2} rate_exact={rate} checks={}",
        p.code_length(),
        rate.as_f64(),
        p.check_count()
    );
    if let Some(path) = &cfg.partition {
        let base = base_matrix(cfg)?;
        let proto = build_sc_protograph(&p, &read_partition(path, &base, cfg)?, &base)?;
        out.add("protograph.txt", write_binary_grid(proto.matrix()));
        if let Some(l) = &cfg.lifting {
            let graph = lift_to_tanner(&proto, &read_lifting(l, &base, p.z)?, p.z)?;
            write!(s, " edges={}", graph.n_edges()).unwrap();
            out.add("code.alist", export_alist(&graph));
        }
    }
    Ok(s)
}

fn enumerate(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let list = if cfg.target_protograph {
        let p = params(cfg)?;
        let base = base_matrix(cfg)?;
        let (part, _) = partition_or_random(&base, cfg)?;
        enumerate_protograph_candidates(&build_sc_protograph(&p, &part, &base)?, cfg.g)?
    } else {
        enumerate_candidates(&base_matrix(cfg)?, cfg.g)?
    };
    out.add(format!("candidates_g{}.csv", cfg.g), list.to_csv());
    Ok(format!(
        "enumerate: candidates={} g={} target={}",
        list.len(),
        cfg.g,
        if cfg.target_protograph { "protograph" } else { "base" }
    ))
}

fn optimize_partition_cmd(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let (g, k) = cfg.gamma_kappa()?;
    let m = cfg.memory()?;
    let base = base_matrix(cfg)?;
    let init = cfg
        .partition_input
        .as_ref()
        .map(|p| read_partition(p, &base, cfg))
        .transpose()?;
    let opts = optimize_options(cfg, g, k);
    let r = optimize_partition(
        &base,
        m,
        cfg.allowed.as_deref(),
        init.as_ref(),
        cfg.weights,
        (cfg.l1_cap, cfg.linf_cap),
        &opts,
    )?;
    out.add("partition.txt", write_int_grid(r.matrix.grid()));
    out.add("log.csv", log_csv(&r.run.log));
    let c = r.run.counts_opt;
    Ok(format!(
        "optimize-partition: final_count={} cycle4={} cycle6={} cycle8={} iterations={}",
        fmt_count(r.run.c_opt * r.alpha),
        c[0],
        c[1],
        c[2],
        r.run.transitions
    ))
}

fn optimize_lift_cmd(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let p = params(cfg)?;
    let base = base_matrix(cfg)?;
    let (part, random) = partition_or_random(&base, cfg)?;
    if random {
        out.add("partition.txt", write_int_grid(part.grid()));
    }
    let proto = build_sc_protograph(&p, &part, &base)?;
    let opts = optimize_options(cfg, p.gamma, p.kappa);
    let r = optimize_lift_protograph(&proto, &base, p.z, cfg.lift_mode, &opts)?;
    out.add("lifting.txt", write_int_grid(r.lifting.grid()));
    let mut iterations = 0;
    for s in &r.stages {
        out.add(format!("log_{}.csv", s.objective.name()), log_csv(&s.run.log));
        iterations += s.run.transitions;
    }
    let graph = lift_to_tanner(&proto, &r.lifting, p.z)?;
    out.add("code.alist", export_alist(&graph));

    let space = EntrySpace::new(&base);
    let mut cands = LiftCandidates::new(&proto);
    let set = lift_objects(&mut cands, &space, p.z, &[2, 3], false)?;
    let mut s = format!(
        "optimize-lift: cycle4={} cycle6={}",
        set.lifted_cycle_count(&r.x, ObjectClass::Cycle4, p.z),
        set.lifted_cycle_count(&r.x, ObjectClass::Cycle6, p.z)
    );
    if let Some(last) = r.stages.last() {
        write!(
            s,
            " final_count={} objective={}",
            fmt_count(last.run.c_opt * last.alpha),
            last.objective.name()
        )
        .unwrap();
    }
    write!(s, " iterations={iterations} repair_steps={}", r.repair_steps).unwrap();
    Ok(s)
}

fn estimate(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let (g, k) = cfg.gamma_kappa()?;
    let base = base_matrix(cfg)?;
    let (problem, x0, z): (OptProblem, Vec<u32>, usize) = match cfg.estimate_problem {
        EstimateProblem::Partition => {
            let m = cfg.memory()?;
            let prob = partition_problem(&base, m, cfg.allowed.as_deref(), cfg.weights, cfg.d)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let x0 = prob.alphabets().iter().map(|a| a[rng.gen_range(0..a.len())]).collect();
            let size = prob.alphabets().first().map_or(1, Vec::len);
            (prob, x0, size)
        }
        EstimateProblem::Lift => {
            let p = params(cfg)?;
            let (part, random) = partition_or_random(&base, cfg)?;
            if random {
                out.add("partition.txt", write_int_grid(part.grid()));
            }
            let proto = build_sc_protograph(&p, &part, &base)?;
            let space = EntrySpace::new(&base);
            let start = random_cycle4_free(&proto, &base, p.z, cfg.seed)?;
            let mut cands = LiftCandidates::new(&proto);
            let set = lift_objects(&mut cands, &space, p.z, &[2, 3], false)?;
            let spec = ObjectiveSpec::single(ObjectClass::Cycle6, vec![ObjectClass::Cycle4]);
            let alphabet: Vec<u32> = (0..p.z as u32).collect();
            let prob = OptProblem::new(set, spec, vec![alphabet; space.len()], cfg.d)?;
            (prob, space.vector(start.grid())?, p.z)
        }
    };
    let alpha = problem.alpha();
    let sampler = SamplerConfig {
        gibbs: !cfg.overrelax,
        ..SamplerConfig::default()
    };
    let betas = match &cfg.betas {
        Some(b) => b.clone(),
        None => {
            let budget = cfg.ladder_budget.unwrap_or(2000 * (g * k) as u64);
            beta_ladder(&problem, &x0, &DEFAULT_LADDER_FRACTIONS, budget, alpha, cfg.seed, sampler)?
        }
    };
    let samples = cfg.samples.unwrap_or(100 * g * k);
    let series = collect_samples(&problem, &x0, &betas, samples, cfg.seed, sampler)?;
    let mut hist = String::from("beta,bin,count\n");
    for s in &series {
        if let Ok(h) = histogram_csv(&s.samples, alpha) {
            for line in h.lines().skip(1) {
                writeln!(hist, "{},{line}", s.beta).unwrap();
            }
        }
    }
    out.add("histograms.csv", hist);
    let eps = cfg.eps.unwrap_or(1.0 / alpha);
    let report = analyze(&series, alpha, eps, z)?;
    out.add("stats.csv", report.stats_csv());
    out.add("report.txt", report.to_text());
    Ok(format!(
        "estimate: min_estimate={} cardinality_log_z={:.3} fit_a={:.6} fit_b={:.6} fit_c={:.6} betas={}",
        fmt_count(report.min_estimate),
        report.cardinality_log_z,
        report.fit.a,
        report.fit.b,
        report.fit.c,
        betas.len()
    ))
}

/// Configured code when both matrices are given, otherwise a seeded random one.
fn validate(cfg: &RunConfig, out: &mut Outputs) -> Result<(String, bool), CliError> {
    let p = match cfg.code_tuple() {
        Ok(_) => params(cfg)?,
        Err(_) => SCCodeParams::new(3, 5, 5, 3, 1)?,
    };
    let base = if cfg.gamma.is_some() {
        base_matrix(cfg)?
    } else {
        BinaryMatrix::ones(p.gamma, p.kappa)
    };
    let space = EntrySpace::new(&base);
    let (part, lifting) = match (&cfg.partition, &cfg.lifting) {
        (Some(pp), Some(lp)) => (read_partition(pp, &base, cfg)?, read_lifting(lp, &base, p.z)?),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut pg = IntGrid::filled(&base, 0);
            let mut lg = IntGrid::filled(&base, 0);
            for (i, j) in (0..space.len()).map(|e| space.position(e)) {
                pg.set(i, j, Some(rng.gen_range(0..=p.memory as u32)));
                lg.set(i, j, Some(rng.gen_range(0..p.z as u32)));
            }
            (
                PartitioningMatrix::new(pg, &base, p.memory, None)?,
                LiftingMatrix::new(lg, &base, p.z)?,
            )
        }
    };
    let proto = build_sc_protograph(&p, &part, &base)?;
    let graph = lift_to_tanner(&proto, &lifting, p.z)?;
    let x = space.vector(lifting.grid())?;
    let mut cands = LiftCandidates::new(&proto);
    let mut csv = String::from("length,fast,oracle\n");
    let mut ok = true;
    let mut parts = Vec::new();
    for g in 2..=4 {
        let class = ObjectClass::for_half_length(g)?;
        let set = lift_objects(&mut cands, &space, p.z, &[g], false)?;
        let fast = set.lifted_cycle_count(&x, class, p.z);
        let exact = count_cycles_graph(&graph, 2 * g)?;
        ok &= fast == exact;
        writeln!(csv, "{},{fast},{exact}", 2 * g).unwrap();
        parts.push(format!("cycle{}={fast}/{exact}", 2 * g));
    }
    out.add("validate.csv", csv);
    let verdict = if ok { "match" } else { "mismatch" };
    Ok((format!("validate: {verdict} {}", parts.join(" ")), ok))
}

fn export(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let (proto, lifting, graph) = configured_code(cfg)?;
    out.add("protograph.txt", write_binary_grid(proto.matrix()));
    out.add("lifting.txt", write_int_grid(lifting.grid()));
    out.add("code.alist", export_alist(&graph));
    Ok(format!(
        "export: variables={} checks={} edges={}",
        graph.n_vars(),
        graph.n_checks(),
        graph.n_edges()
    ))
}

/// Stopping sets reported per erasure rate.
const REPORTED_RESIDUALS: usize = 5;

fn simulate(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    if cfg.rates.is_empty() {
        return Err(CliError::Usage("simulate.rates is required".into()));
    }
    if cfg.rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(CliError::Usage("simulate.rates must lie in [0, 1]".into()));
    }
    let graph = match &cfg.code {
        Some(p) => read_alist(p)?,
        None => configured_code(cfg)?.2,
    };
    let points = run_fer(&graph, &cfg.rates, cfg.frames, cfg.seed, cfg.threads)?;
    out.add("fer.csv", fer_csv(&points));
    let mut sets = String::new();
    let mut hist = String::from("rate,residual_size,failures\n");
    for p in &points {
        for r in p.residuals.iter().take(REPORTED_RESIDUALS) {
            writeln!(sets, "# rate {}", p.rate).unwrap();
            sets.push_str(&extract_stopping_set(r, &graph)?.to_text());
        }
        for (size, n) in residual_size_histogram(&p.residuals) {
            writeln!(hist, "{},{size},{n}", p.rate).unwrap();
        }
    }
    out.add("stopping_sets.txt", sets);
    out.add("residual_sizes.csv", hist);
    let fers: Vec<String> = points.iter().map(|p| format!("{}:{:.3e}", p.rate, p.fer)).collect();
    Ok(format!(
        "simulate-bec: frames={} fer={}",
        cfg.frames,
        fers.join(",")
    ))
}
