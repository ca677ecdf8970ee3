use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sampling::{conditional_pmf, overrelax_sample, sample_kernel, update_beta, PidGains, PidState};
use crate::cycles::{EntryIndex, ObjectClass, ObjectSet, ObjectiveSpec};
use crate::error::{Error, Result};

/// Default cap on `|a|^d`, the number of conditional evaluations per transition.
pub const DEFAULT_MAX_ASSIGNMENTS: usize = 1 << 14;

/// Distance caps around a reference vector (partitioning).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceCaps {
    pub reference: Vec<u32>,
    /// Cap on `sum |x_e - ref_e|`.
    pub l1: Option<u64>,
    /// Cap on `max |x_e - ref_e|`.
    pub linf: Option<u32>,
}

impl DistanceCaps {
    fn entry_ok(&self, e: usize, v: u32) -> bool {
        self.linf.is_none_or(|c| v.abs_diff(self.reference[e]) <= c)
    }

    fn l1(&self, x: &[u32]) -> u64 {
        x.iter().zip(&self.reference).map(|(&a, &b)| a.abs_diff(b) as u64).sum()
    }
}

/// Everything the sampler needs: objects, objective, per-entry alphabets,
/// feasibility rules and the tuple structure.
#[derive(Debug, Clone)]
pub struct OptProblem {
    objects: ObjectSet,
    spec: ObjectiveSpec,
    alphabets: Vec<Vec<u32>>,
    caps: Option<DistanceCaps>,
    d: usize,
    index: EntryIndex,
    tuples: Vec<Vec<u32>>,
    affected: Vec<Vec<u32>>,
    alpha: f64,
    max_assignments: usize,
}

impl OptProblem {
    pub fn new(objects: ObjectSet, spec: ObjectiveSpec, alphabets: Vec<Vec<u32>>, d: usize) -> Result<Self> {
        if alphabets.len() != objects.n_entries() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} alphabets", objects.n_entries()),
                found: alphabets.len().to_string(),
            });
        }
        if alphabets.iter().any(Vec::is_empty) {
            return Err(Error::InvalidArgument("empty alphabet".into()));
        }
        let alpha = spec.alpha(&objects);
        if alpha <= 0.0 {
            return Err(Error::EmptyObjective);
        }
        let index = EntryIndex::build(&objects, &spec);
        let mut p = OptProblem {
            objects,
            spec,
            alphabets,
            caps: None,
            d,
            index,
            tuples: Vec::new(),
            affected: Vec::new(),
            alpha,
            max_assignments: DEFAULT_MAX_ASSIGNMENTS,
        };
        p.set_d(d)?;
        Ok(p)
    }

    pub fn with_caps(mut self, caps: DistanceCaps) -> Result<Self> {
        if caps.reference.len() != self.n_entries() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", self.n_entries()),
                found: caps.reference.len().to_string(),
            });
        }
        self.caps = Some(caps);
        Ok(self)
    }

    pub fn with_max_assignments(mut self, max: usize) -> Result<Self> {
        self.max_assignments = max;
        self.set_d(self.d)?;
        Ok(self)
    }

    /// Rebuilds the tuple list for a new cardinality.
    pub fn with_d(mut self, d: usize) -> Result<Self> {
        self.set_d(d)?;
        Ok(self)
    }

    fn set_d(&mut self, d: usize) -> Result<()> {
        let tuples = build_tuple_list(&self.index, d)?;
        for t in &tuples {
            let n: f64 = t.iter().map(|&e| self.alphabets[e as usize].len() as f64).product();
            if n > self.max_assignments as f64 {
                return Err(Error::InvalidArgument(format!(
                    "{n} assignments per transition exceed the budget of {}",
                    self.max_assignments
                )));
            }
        }
        self.affected = tuples.iter().map(|t| self.index.affected(t)).collect();
        self.tuples = tuples;
        self.d = d;
        Ok(())
    }

    pub fn objects(&self) -> &ObjectSet {
        &self.objects
    }

    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn alphabets(&self) -> &[Vec<u32>] {
        &self.alphabets
    }

    pub fn caps(&self) -> Option<&DistanceCaps> {
        self.caps.as_ref()
    }

    pub fn n_entries(&self) -> usize {
        self.alphabets.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn index(&self) -> &EntryIndex {
        &self.index
    }

    pub fn tuples(&self) -> &[Vec<u32>] {
        &self.tuples
    }

    /// Maximum weighted count, the normalizer of the objective.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Normalized objective of per-class counts, or `None` when a constraint
    /// object is active.
    pub fn cost(&self, counts: &[u64; 4]) -> Option<f64> {
        if self.spec.constraints.iter().any(|c| counts[c.index()] > 0) {
            return None;
        }
        Some(self.spec.weighted_count(counts) / self.alpha)
    }

    /// Normalized objective of `x`, or `None` when `x` is infeasible.
    pub fn evaluate(&self, x: &[u32]) -> Option<f64> {
        if x.len() != self.n_entries() {
            return None;
        }
        if x.iter().zip(&self.alphabets).any(|(v, a)| !a.contains(v)) {
            return None;
        }
        if let Some(caps) = &self.caps {
            if (0..x.len()).any(|e| !caps.entry_ok(e, x[e])) || caps.l1.is_some_and(|c| caps.l1(x) > c) {
                return None;
            }
        }
        self.cost(&self.objects.active_counts(x))
    }

    pub fn is_feasible(&self, x: &[u32]) -> bool {
        self.evaluate(x).is_some()
    }

    /// `log10` of the number of vectors over the alphabets.
    pub fn log10_state_space(&self) -> f64 {
        self.alphabets.iter().map(|a| (a.len() as f64).log10()).sum()
    }
}

/// For every entry, the entry itself followed by the `d - 1` entries with the
/// highest weighted co-occurrence (then raw co-occurrence, then lowest index).
pub fn build_tuple_list(index: &EntryIndex, d: usize) -> Result<Vec<Vec<u32>>> {
    let n = index.n_entries();
    if d == 0 || d > n {
        return Err(Error::TupleTooLarge { d, entries: n });
    }
    let mut out = Vec::with_capacity(n);
    for e in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&f| f != e).collect();
        others.sort_by(|&a, &b| {
            index
                .weighted_co_occurrence(e, b)
                .total_cmp(&index.weighted_co_occurrence(e, a))
                .then(index.co_occurrence(e, b).cmp(&index.co_occurrence(e, a)))
                .then(a.cmp(&b))
        });
        let mut t = vec![e as u32];
        t.extend(others.into_iter().take(d - 1).map(|f| f as u32));
        out.push(t);
    }
    Ok(out)
}

/// Target acceptance stages with transition budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    stages: Vec<(f64, u64)>,
}

impl AnnealSchedule {
    pub fn new(stages: Vec<(f64, u64)>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidArgument("empty anneal schedule".into()));
        }
        for w in stages.windows(2) {
            if w[1].0 >= w[0].0 {
                return Err(Error::InvalidArgument("acceptance targets must strictly decrease".into()));
            }
        }
        if stages.iter().any(|s| !(0.0..=1.0).contains(&s.0)) {
            return Err(Error::InvalidArgument("acceptance targets must lie in [0, 1]".into()));
        }
        Ok(AnnealSchedule { stages })
    }

    /// Equal budgets over the given targets, summing to `total`.
    pub fn equal(targets: &[f64], total: u64) -> Result<Self> {
        let k = targets.len().max(1) as u64;
        let mut stages: Vec<(f64, u64)> = targets.iter().map(|&t| (t, total / k)).collect();
        if let Some(last) = stages.last_mut() {
            last.1 += total % k;
        }
        AnnealSchedule::new(stages)
    }

    /// Targets 0.5, 0.3, 0.15, 0.05 with equal budgets.
    pub fn default_for(total: u64) -> Self {
        AnnealSchedule::equal(&[0.5, 0.3, 0.15, 0.05], total).expect("valid default")
    }

    pub fn constant(target: f64, total: u64) -> Result<Self> {
        AnnealSchedule::new(vec![(target, total)])
    }

    pub fn stages(&self) -> &[(f64, u64)] {
        &self.stages
    }

    /// Maximum transition count.
    pub fn total(&self) -> u64 {
        self.stages.iter().map(|s| s.1).sum()
    }
}

/// Sampler settings shared by optimization and estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[derive(Default)]
pub struct SamplerConfig {
    /// Plain inverse-CDF Gibbs draws instead of ordered overrelaxation.
    pub gibbs: bool,
    pub pid: PidGains,
}


/// One line of the run log, written after every pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub iteration: u64,
    pub c_current: f64,
    pub c_opt: f64,
    pub beta: f64,
    /// Fraction of the pass's transitions that changed the state.
    pub acceptance: f64,
    pub stage: usize,
}

pub fn log_csv(records: &[LogRecord]) -> String {
    let mut s = String::from("iteration,c_current,c_opt,beta,acceptance,stage\n");
    for r in records {
        writeln!(
            s,
            "{},{:.10},{:.10},{:.10e},{:.6},{}",
            r.iteration, r.c_current, r.c_opt, r.beta, r.acceptance, r.stage
        )
        .unwrap();
    }
    s
}

/// Markov chain over feasible vectors of a problem.
#[derive(Debug, Clone)]
pub struct Chain<'a> {
    problem: &'a OptProblem,
    config: SamplerConfig,
    x: Vec<u32>,
    active: Vec<bool>,
    counts: [u64; 4],
    l1: u64,
    c_current: f64,
    c_opt: f64,
    x_opt: Vec<u32>,
    counts_opt: [u64; 4],
    i: u64,
    i_a: u64,
    beta: f64,
    rng: ChaCha8Rng,
    order: Vec<usize>,
}

impl<'a> Chain<'a> {
    pub fn new(problem: &'a OptProblem, x_init: Vec<u32>, beta: f64, seed: u64, config: SamplerConfig) -> Result<Self> {
        if beta < 0.0 || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("beta = {beta}")));
        }
        let c = problem
            .evaluate(&x_init)
            .ok_or_else(|| Error::Infeasible("x_init violates a constraint, cap or alphabet".into()))?;
        let m = problem.objects.modulus();
        let active: Vec<bool> = problem.objects.objects().iter().map(|o| o.is_active(&x_init, m)).collect();
        let counts = problem.objects.active_counts(&x_init);
        let l1 = problem.caps.as_ref().map_or(0, |c| c.l1(&x_init));
        Ok(Chain {
            problem,
            config,
            x_opt: x_init.clone(),
            x: x_init,
            active,
            counts,
            l1,
            c_current: c,
            c_opt: c,
            counts_opt: counts,
            i: 0,
            i_a: 0,
            beta,
            rng: ChaCha8Rng::seed_from_u64(seed),
            order: (0..problem.tuples.len()).collect(),
        })
    }

    pub fn x(&self) -> &[u32] {
        &self.x
    }

    pub fn counts(&self) -> [u64; 4] {
        self.counts
    }

    pub fn c_current(&self) -> f64 {
        self.c_current
    }

    pub fn c_opt(&self) -> f64 {
        self.c_opt
    }

    pub fn x_opt(&self) -> &[u32] {
        &self.x_opt
    }

    pub fn counts_opt(&self) -> [u64; 4] {
        self.counts_opt
    }

    pub fn transitions(&self) -> u64 {
        self.i
    }

    pub fn distinct_transitions(&self) -> u64 {
        self.i_a
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn set_beta(&mut self, beta: f64) {
        self.beta = beta;
    }

    /// Moves the chain to another feasible vector, keeping counters and incumbent.
    pub fn reset_state(&mut self, x: Vec<u32>) -> Result<()> {
        let c = self
            .problem
            .evaluate(&x)
            .ok_or_else(|| Error::Infeasible("reset vector is infeasible".into()))?;
        let m = self.problem.objects.modulus();
        self.active = self.problem.objects.objects().iter().map(|o| o.is_active(&x, m)).collect();
        self.counts = self.problem.objects.active_counts(&x);
        self.l1 = self.problem.caps.as_ref().map_or(0, |c| c.l1(&x));
        self.c_current = c;
        self.x = x;
        Ok(())
    }

    fn radix(&self, t: usize) -> Vec<usize> {
        self.problem.tuples[t]
            .iter()
            .map(|&e| self.problem.alphabets[e as usize].len())
            .collect()
    }

    fn current_assignment(&self, t: usize) -> usize {
        let tuple = &self.problem.tuples[t];
        let mut code = 0;
        for &e in tuple.iter() {
            let a = &self.problem.alphabets[e as usize];
            let pos = a.iter().position(|&v| v == self.x[e as usize]).expect("value in alphabet");
            code = code * a.len() + pos;
        }
        code
    }

    /// Writes assignment `code` of tuple `t` into `x`.
    fn write_assignment(&self, x: &mut [u32], t: usize, mut code: usize) {
        let tuple = &self.problem.tuples[t];
        for &e in tuple.iter().rev() {
            let a = &self.problem.alphabets[e as usize];
            x[e as usize] = a[code % a.len()];
            code /= a.len();
        }
    }

    /// Costs of every assignment of tuple `t` (`None` if infeasible), in the
    /// fixed mixed-radix order with the first tuple entry most significant.
    pub fn assignment_costs(&mut self, t: usize) -> Vec<Option<f64>> {
        let problem = self.problem;
        let tuple = &problem.tuples[t];
        let affected = &problem.affected[t];
        let objects = &problem.objects;
        let m = objects.modulus();
        let n: usize = self.radix(t).iter().product();
        let saved: Vec<u32> = tuple.iter().map(|&e| self.x[e as usize]).collect();
        let mut base = self.counts;
        for &id in affected {
            if self.active[id as usize] {
                base[objects.get(id as usize).class.index()] -= objects.multiplicity(id as usize) as u64;
            }
        }
        let base_l1 = problem.caps.as_ref().map(|c| {
            self.l1 - tuple.iter().map(|&e| self.x[e as usize].abs_diff(c.reference[e as usize]) as u64).sum::<u64>()
        });
        let mut x = std::mem::take(&mut self.x);
        let mut costs = Vec::with_capacity(n);
        for code in 0..n {
            self.write_assignment(&mut x, t, code);
            if let Some(caps) = &problem.caps {
                let ok_inf = tuple.iter().all(|&e| caps.entry_ok(e as usize, x[e as usize]));
                let l1 = base_l1.unwrap()
                    + tuple.iter().map(|&e| x[e as usize].abs_diff(caps.reference[e as usize]) as u64).sum::<u64>();
                if !ok_inf || caps.l1.is_some_and(|c| l1 > c) {
                    costs.push(None);
                    continue;
                }
            }
            let mut counts = base;
            for &id in affected {
                let o = objects.get(id as usize);
                if o.is_active(&x, m) {
                    counts[o.class.index()] += objects.multiplicity(id as usize) as u64;
                }
            }
            costs.push(problem.cost(&counts));
        }
        for (&e, &v) in tuple.iter().zip(&saved) {
            x[e as usize] = v;
        }
        self.x = x;
        costs
    }

    /// Exact successor distribution of one transition on tuple `t` from the
    /// current state, as `(next vector, probability)` pairs with nonzero mass.
    pub fn kernel(&mut self, t: usize) -> Result<Vec<(Vec<u32>, f64)>> {
        let costs = self.assignment_costs(t);
        let pmf = conditional_pmf(&costs, self.beta)?;
        let cur = self.current_assignment(t);
        let k = sample_kernel(&pmf, cur, self.config.gibbs);
        let mut out = Vec::new();
        for (code, p) in k.into_iter().enumerate() {
            if p > 0.0 {
                let mut x = self.x.clone();
                self.write_assignment(&mut x, t, code);
                out.push((x, p));
            }
        }
        Ok(out)
    }

    /// Conditional pmf of tuple `t` from the current state.
    pub fn conditional(&mut self, t: usize) -> Result<Vec<f64>> {
        let costs = self.assignment_costs(t);
        conditional_pmf(&costs, self.beta)
    }

    /// One transition on tuple `t`. Returns whether the state changed.
    pub fn transition(&mut self, t: usize) -> Result<bool> {
        let costs = self.assignment_costs(t);
        let pmf = conditional_pmf(&costs, self.beta)?;
        let cur = self.current_assignment(t);
        let next = overrelax_sample(&pmf, cur, &mut self.rng, self.config.gibbs)?;
        self.i += 1;
        if next == cur {
            return Ok(false);
        }
        self.i_a += 1;
        let problem = self.problem;
        let tuple = &problem.tuples[t];
        if let Some(caps) = &problem.caps {
            for &e in tuple {
                self.l1 -= self.x[e as usize].abs_diff(caps.reference[e as usize]) as u64;
            }
        }
        let mut x = std::mem::take(&mut self.x);
        self.write_assignment(&mut x, t, next);
        self.x = x;
        if let Some(caps) = &problem.caps {
            for &e in tuple {
                self.l1 += self.x[e as usize].abs_diff(caps.reference[e as usize]) as u64;
            }
        }
        let objects = &problem.objects;
        let m = objects.modulus();
        for &id in &problem.affected[t] {
            let id = id as usize;
            let o = objects.get(id);
            let now = o.is_active(&self.x, m);
            if now != self.active[id] {
                let w = objects.multiplicity(id) as u64;
                if now {
                    self.counts[o.class.index()] += w;
                } else {
                    self.counts[o.class.index()] -= w;
                }
                self.active[id] = now;
            }
        }
        self.c_current = costs[next].expect("sampled assignment is feasible");
        if self.c_current < self.c_opt {
            self.c_opt = self.c_current;
            self.x_opt.clone_from(&self.x);
            self.counts_opt = self.counts;
        }
        Ok(true)
    }

    /// Shuffles the tuple order with the chain RNG and returns it.
    pub fn shuffled_order(&mut self) -> Vec<usize> {
        let mut order = std::mem::take(&mut self.order);
        order.shuffle(&mut self.rng);
        self.order.clone_from(&order);
        order
    }

    /// One pass over all tuples in shuffled order, calling `observe` with the
    /// cost and change flag after each transition. Stops early when `stop`
    /// returns true.
    pub fn pass(
        &mut self,
        mut observe: impl FnMut(&Chain, bool),
        mut stop: impl FnMut(&Chain) -> bool,
    ) -> Result<()> {
        for t in self.shuffled_order() {
            if stop(self) {
                break;
            }
            let changed = self.transition(t)?;
            observe(self, changed);
        }
        Ok(())
    }
}

/// Options of one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub schedule: AnnealSchedule,
    pub beta_init: f64,
    pub seed: u64,
    pub sampler: SamplerConfig,
    /// Stop as soon as the objective reaches zero.
    pub early_stop: bool,
}

impl RunOptions {
    pub fn new(schedule: AnnealSchedule, beta_init: f64, seed: u64) -> Self {
        RunOptions {
            schedule,
            beta_init,
            seed,
            sampler: SamplerConfig::default(),
            early_stop: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub c_opt: f64,
    pub x_opt: Vec<u32>,
    pub counts_opt: [u64; 4],
    pub transitions: u64,
    pub distinct_transitions: u64,
    pub final_beta: f64,
    pub stopped_early: bool,
    pub log: Vec<LogRecord>,
}

/// Runs the annealed sampler from `x_init`, adapting beta once per pass toward
/// the current stage's acceptance target from the acceptance of that pass.
/// The controller state is reset when a stage begins.
pub fn run(problem: &OptProblem, x_init: Vec<u32>, opts: &RunOptions) -> Result<RunResult> {
    let mut chain = Chain::new(problem, x_init, opts.beta_init, opts.seed, opts.sampler)?;
    let total = opts.schedule.total();
    let mut log = Vec::new();
    let mut stopped_early = opts.early_stop && chain.c_opt() == 0.0;
    for (stage, &(target, budget)) in opts.schedule.stages().iter().enumerate() {
        if stopped_early {
            break;
        }
        let start_i = chain.transitions();
        let mut pid = PidState::default();
        while chain.transitions() - start_i < budget && chain.transitions() < total {
            let stage_end = start_i + budget;
            let early = opts.early_stop;
            let (pass_i, pass_a) = (chain.transitions(), chain.distinct_transitions());
            chain.pass(|_, _| {}, |c| c.transitions() >= stage_end || (early && c.c_opt() == 0.0))?;
            let i = chain.transitions() - pass_i;
            if i == 0 {
                break;
            }
            let f = (chain.distinct_transitions() - pass_a) as f64 / i as f64;
            let beta = update_beta(chain.beta(), f, target, &mut pid, &opts.sampler.pid);
            chain.set_beta(beta);
            log.push(LogRecord {
                iteration: chain.transitions(),
                c_current: chain.c_current(),
                c_opt: chain.c_opt(),
                beta,
                acceptance: f,
                stage,
            });
            if opts.early_stop && chain.c_opt() == 0.0 {
                stopped_early = true;
                break;
            }
        }
    }
    Ok(RunResult {
        c_opt: chain.c_opt(),
        x_opt: chain.x_opt().to_vec(),
        counts_opt: chain.counts_opt(),
        transitions: chain.transitions(),
        distinct_transitions: chain.distinct_transitions(),
        final_beta: chain.beta(),
        stopped_early,
        log,
    })
}

/// Classes whose objects are evaluated by a problem, for reporting.
pub fn objective_classes(spec: &ObjectiveSpec) -> Vec<ObjectClass> {
    ObjectClass::ALL
        .iter()
        .copied()
        .filter(|c| spec.weight(*c) > 0.0 && !spec.is_constraint(*c))
        .collect()
}
