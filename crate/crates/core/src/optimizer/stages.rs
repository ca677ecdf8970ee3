use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::chain::{run, AnnealSchedule, DistanceCaps, OptProblem, RunOptions, RunResult};
use crate::cycles::{
    enumerate_candidates, enumerate_protograph_candidates, CandidateList, ObjectClass, ObjectSet, ObjectiveSpec,
};
use crate::error::{Error, Result};
use crate::matrix::{
    build_sc_protograph, BinaryMatrix, EntrySpace, IntGrid, LiftingMatrix, PartitioningMatrix, SCCodeParams,
    SCProtograph,
};

/// Settings shared by the partitioning and lifting drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOptions {
    pub d: usize,
    /// Acceptance targets of the anneal schedule (equal budgets).
    pub targets: Vec<f64>,
    /// Transition budget `T` of every optimization stage.
    pub max_transitions: u64,
    /// Initial beta as a multiple of `alpha`, so one object costs a factor `e^-k`.
    pub beta_scale: f64,
    pub seed: u64,
    pub gibbs: bool,
}

impl OptimizeOptions {
    /// `T = 2000 gamma kappa`, `d = 1`, default targets.
    pub fn for_base(gamma: usize, kappa: usize, seed: u64) -> Self {
        OptimizeOptions {
            d: 1,
            targets: vec![0.5, 0.3, 0.15, 0.05],
            max_transitions: 2000 * (gamma * kappa) as u64,
            beta_scale: 1.0,
            seed,
            gibbs: false,
        }
    }

    fn run_options(&self, alpha: f64, seed: u64) -> Result<RunOptions> {
        let mut o = RunOptions::new(
            AnnealSchedule::equal(&self.targets, self.max_transitions)?,
            self.beta_scale * alpha,
            seed,
        );
        o.sampler.gibbs = self.gibbs;
        Ok(o)
    }
}

/// Result of [`optimize_partition`].
#[derive(Debug, Clone)]
pub struct PartitionOutcome {
    pub matrix: PartitioningMatrix,
    pub x_init: Vec<u32>,
    pub run: RunResult,
    pub alpha: f64,
}

/// Builds the partitioning problem: base-matrix candidates of every class with
/// nonzero weight, alphabet `0..=m` or the TC set, optional distance caps.
pub fn partition_problem(
    base: &BinaryMatrix,
    memory: usize,
    allowed: Option<&[u32]>,
    weights: [f64; 3],
    d: usize,
) -> Result<OptProblem> {
    let space = EntrySpace::new(base);
    let mut lists = Vec::new();
    for (g, w) in (2..=4).zip(weights) {
        if w > 0.0 {
            lists.push(enumerate_candidates(base, g)?);
        }
    }
    let refs: Vec<&CandidateList> = lists.iter().collect();
    let set = ObjectSet::partition(&refs, &space)?;
    let alphabet: Vec<u32> = match allowed {
        Some(a) => {
            let mut a = a.to_vec();
            a.sort_unstable();
            a.dedup();
            if a.iter().any(|&v| v as usize > memory) {
                return Err(Error::InvalidArgument(format!("allowed values exceed m = {memory}")));
            }
            a
        }
        None => (0..=memory as u32).collect(),
    };
    OptProblem::new(
        set,
        ObjectiveSpec::weighted(weights[0], weights[1], weights[2]),
        vec![alphabet; space.len()],
        d,
    )
}

/// Optimizes a partitioning matrix from `x_init` (uniformly random when absent)
/// within the distance caps.
#[allow(clippy::too_many_arguments)]
pub fn optimize_partition(
    base: &BinaryMatrix,
    memory: usize,
    allowed: Option<&[u32]>,
    x_init: Option<&PartitioningMatrix>,
    weights: [f64; 3],
    caps: (Option<u64>, Option<u32>),
    opts: &OptimizeOptions,
) -> Result<PartitionOutcome> {
    let space = EntrySpace::new(base);
    let mut problem = partition_problem(base, memory, allowed, weights, opts.d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let x0 = match x_init {
        Some(p) => space.vector(p.grid())?,
        None => problem
            .alphabets()
            .iter()
            .map(|a| *a.choose(&mut rng).unwrap())
            .collect(),
    };
    if caps.0.is_some() || caps.1.is_some() {
        problem = problem.with_caps(DistanceCaps {
            reference: x0.clone(),
            l1: caps.0,
            linf: caps.1,
        })?;
    }
    let run_opts = opts.run_options(problem.alpha(), rng.gen())?;
    let result = run(&problem, x0.clone(), &run_opts)?;
    let matrix = PartitioningMatrix::new(space.grid(&result.x_opt), base, memory, allowed)?;
    Ok(PartitionOutcome {
        matrix,
        x_init: x0,
        run: result,
        alpha: problem.alpha(),
    })
}

/// Which objects the last lifting stage minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftMode {
    /// Cycle-6, then cycle-8 once cycle-6 reaches zero.
    Cycles,
    /// Cycle-8 without internal connections, under the cycle-4 constraint.
    Uts,
}

/// Report of one lifting stage.
#[derive(Debug, Clone)]
pub struct LiftStage {
    pub objective: ObjectClass,
    pub constraints: Vec<ObjectClass>,
    pub alpha: f64,
    pub run: RunResult,
}

#[derive(Debug, Clone)]
pub struct LiftOutcome {
    pub lifting: LiftingMatrix,
    pub x: Vec<u32>,
    pub stages: Vec<LiftStage>,
    /// Repair iterations spent finding the cycle-4-free start.
    pub repair_steps: u64,
}

/// Candidate lists of a protograph for `g = 2, 3, 4`, computed on demand.
#[derive(Debug)]
pub struct LiftCandidates<'a> {
    proto: &'a SCProtograph,
    lists: [Option<CandidateList>; 3],
}

impl<'a> LiftCandidates<'a> {
    pub fn new(proto: &'a SCProtograph) -> Self {
        LiftCandidates {
            proto,
            lists: [None, None, None],
        }
    }

    pub fn get(&mut self, g: usize) -> Result<&CandidateList> {
        let slot = g.checked_sub(2).filter(|&k| k < 3).ok_or(Error::UnsupportedHalfLength(g))?;
        if self.lists[slot].is_none() {
            self.lists[slot] = Some(enumerate_protograph_candidates(self.proto, g)?);
        }
        Ok(self.lists[slot].as_ref().unwrap())
    }
}

/// Object set of a lifting problem with the given candidate half-lengths.
pub fn lift_objects(
    cands: &mut LiftCandidates,
    space: &EntrySpace,
    z: usize,
    gs: &[usize],
    uts: bool,
) -> Result<ObjectSet> {
    for &g in gs {
        cands.get(g)?;
    }
    let proto = cands.proto;
    let refs: Vec<&CandidateList> = gs.iter().map(|&g| cands.lists[g - 2].as_ref().unwrap()).collect();
    ObjectSet::lift(&refs, proto, space, z, uts)
}

/// Searches for a vector with no active object in `constraints` by randomized
/// greedy repair: pick an active object, pick one of its entries, and move it
/// to a value minimizing the number of active objects (random tie-break).
/// Restarts from a fresh random vector after `steps_per_restart`.
pub fn repair_to_feasible(
    constraints: &ObjectSet,
    alphabet: &[u32],
    rng: &mut ChaCha8Rng,
    restarts: usize,
    steps_per_restart: usize,
) -> Result<(Vec<u32>, u64)> {
    let n = constraints.n_entries();
    let m = constraints.modulus();
    let mut by_entry: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (id, o) in constraints.objects().iter().enumerate() {
        for &e in &o.deps {
            by_entry[e as usize].push(id);
        }
    }
    let mut steps = 0u64;
    for _ in 0..restarts.max(1) {
        let mut x: Vec<u32> = (0..n).map(|_| *alphabet.choose(rng).unwrap()).collect();
        for _ in 0..steps_per_restart {
            let active: Vec<usize> = constraints
                .objects()
                .iter()
                .enumerate()
                .filter(|(_, o)| o.is_active(&x, m))
                .map(|(id, _)| id)
                .collect();
            if active.is_empty() {
                return Ok((x, steps));
            }
            steps += 1;
            let id = *active.choose(rng).unwrap();
            let deps = &constraints.get(id).deps;
            let e = *deps.choose(rng).unwrap() as usize;
            let mut best = Vec::new();
            let mut best_count = usize::MAX;
            for &v in alphabet {
                x[e] = v;
                let c = by_entry[e]
                    .iter()
                    .filter(|&&k| constraints.get(k).is_active(&x, m))
                    .count();
                if c < best_count {
                    best_count = c;
                    best.clear();
                }
                if c == best_count {
                    best.push(v);
                }
            }
            x[e] = *best.choose(rng).unwrap();
        }
    }
    Err(Error::Infeasible(format!(
        "no arrangement free of the constraint objects found in {restarts} restarts"
    )))
}

/// Staged lifting optimization on a protograph. The lifting matrix has the
/// support of `base` and is shared by all replicas.
pub fn optimize_lift_protograph(
    proto: &SCProtograph,
    base: &BinaryMatrix,
    z: usize,
    mode: LiftMode,
    opts: &OptimizeOptions,
) -> Result<LiftOutcome> {
    let space = EntrySpace::new(base);
    let alphabet: Vec<u32> = (0..z as u32).collect();
    let mut cands = LiftCandidates::new(proto);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let c4 = lift_objects(&mut cands, &space, z, &[2], false)?;
    let (mut x, repair_steps) = repair_to_feasible(&c4, &alphabet, &mut rng, 50, 200 * space.len().max(1))?;
    let mut stages = Vec::new();

    let plan: Vec<(Vec<usize>, bool, ObjectClass, Vec<ObjectClass>)> = match mode {
        LiftMode::Cycles => vec![
            (vec![2, 3], false, ObjectClass::Cycle6, vec![ObjectClass::Cycle4]),
            (
                vec![2, 3, 4],
                false,
                ObjectClass::Cycle8,
                vec![ObjectClass::Cycle4, ObjectClass::Cycle6],
            ),
        ],
        LiftMode::Uts => vec![(vec![2, 4], true, ObjectClass::Uts, vec![ObjectClass::Cycle4])],
    };
    for (k, (gs, uts, objective, constraints)) in plan.into_iter().enumerate() {
        let mut keep = constraints.clone();
        keep.push(objective);
        let set = lift_objects(&mut cands, &space, z, &gs, uts)?.restricted(&keep);
        let spec = ObjectiveSpec::single(objective, constraints.clone());
        let alpha = spec.alpha(&set);
        if alpha == 0.0 {
            // nothing to count at this length (e.g. no cycle-6 candidates at all)
            continue;
        }
        let problem = OptProblem::new(set, spec, vec![alphabet.clone(); space.len()], opts.d)?;
        if !problem.is_feasible(&x) {
            return Err(Error::Infeasible(format!(
                "stage {k} start violates {constraints:?}"
            )));
        }
        let result = run(&problem, x.clone(), &opts.run_options(alpha, rng.gen())?)?;
        x.clone_from(&result.x_opt);
        let reached_zero = result.c_opt == 0.0;
        stages.push(LiftStage {
            objective,
            constraints,
            alpha,
            run: result,
        });
        if mode == LiftMode::Cycles && objective == ObjectClass::Cycle6 && !reached_zero {
            break;
        }
    }
    let lifting = LiftingMatrix::new(space.grid(&x), base, z)?;
    Ok(LiftOutcome {
        lifting,
        x,
        stages,
        repair_steps,
    })
}

/// Staged lifting of the SC protograph built from `params`, `partition` and `base`.
pub fn optimize_lift(
    params: &SCCodeParams,
    partition: &PartitioningMatrix,
    base: &BinaryMatrix,
    mode: LiftMode,
    opts: &OptimizeOptions,
) -> Result<LiftOutcome> {
    params.validate()?;
    let proto = build_sc_protograph(params, partition, base)?;
    optimize_lift_protograph(&proto, base, params.z, mode, opts)
}

/// A random arrangement free of cycle-4 candidates, found by greedy repair.
pub fn random_cycle4_free(proto: &SCProtograph, base: &BinaryMatrix, z: usize, seed: u64) -> Result<LiftingMatrix> {
    let space = EntrySpace::new(base);
    let mut cands = LiftCandidates::new(proto);
    let c4 = lift_objects(&mut cands, &space, z, &[2], false)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet: Vec<u32> = (0..z as u32).collect();
    let (x, _) = repair_to_feasible(&c4, &alphabet, &mut rng, 50, 200 * space.len().max(1))?;
    LiftingMatrix::new(space.grid(&x), base, z)
}

/// Picks `(d, f_T)` by short constant-target probes from `x_init`: lowest
/// probe-end objective wins, ties go to the smaller `d`, then the earlier target.
pub fn grid_search_hyperparams(
    problem: &OptProblem,
    x_init: &[u32],
    ds: &[usize],
    targets: &[f64],
    probe_budget: u64,
    beta_init: f64,
    seed: u64,
) -> Result<(usize, f64)> {
    if ds.is_empty() || targets.is_empty() {
        return Err(Error::InvalidArgument("empty hyper-parameter grid".into()));
    }
    let mut ds = ds.to_vec();
    ds.sort_unstable();
    ds.dedup();
    let mut best: Option<(f64, usize, f64)> = None;
    for &d in &ds {
        let p = problem.clone().with_d(d)?;
        for &t in targets {
            let mut o = RunOptions::new(AnnealSchedule::constant(t, probe_budget)?, beta_init, seed);
            o.early_stop = true;
            let r = run(&p, x_init.to_vec(), &o)?;
            if best.is_none_or(|b| r.c_opt < b.0) {
                best = Some((r.c_opt, d, t));
            }
        }
    }
    let (_, d, t) = best.unwrap();
    Ok((d, t))
}

/// Grid of the given vector over the base support.
pub fn vector_to_grid(base: &BinaryMatrix, x: &[u32]) -> IntGrid {
    EntrySpace::new(base).grid(x)
}
