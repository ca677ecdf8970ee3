//! Brute-force ground truth: simple-cycle counts on Tanner graphs and
//! exhaustive enumeration of tiny optimization problems.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::matrix::TannerGraph;
use crate::optimizer::OptProblem;

/// Largest graph (in edges) the cycle counter accepts.
pub const MAX_ORACLE_EDGES: usize = 50_000;
/// Largest state space exhaustive search accepts.
pub const MAX_EXHAUSTIVE_STATES: f64 = 1e6;

struct CycleDfs<'a> {
    graph: &'a TannerGraph,
    n_vars: usize,
    len: usize,
    start: usize,
    on_path: Vec<bool>,
    count: u64,
}

impl CycleDfs<'_> {
    // vertices: variable v -> v, check c -> n_vars + c
    fn neighbors(&self, u: usize) -> Box<dyn Iterator<Item = usize> + '_> {
        if u < self.n_vars {
            Box::new(self.graph.var_neighbors(u).iter().map(move |&c| c as usize + self.n_vars))
        } else {
            Box::new(self.graph.check_neighbors(u - self.n_vars).iter().map(|&v| v as usize))
        }
    }

    fn walk(&mut self, u: usize, depth: usize) {
        let next: Vec<usize> = self.neighbors(u).collect();
        for w in next {
            if depth + 1 == self.len {
                if w == self.start {
                    self.count += 1;
                }
                continue;
            }
            if w <= self.start || self.on_path[w] {
                continue;
            }
            self.on_path[w] = true;
            self.walk(w, depth + 1);
            self.on_path[w] = false;
        }
    }
}

/// Exact number of simple cycles of length `len` (4, 6 or 8). Every cycle is
/// found from its smallest vertex, once per orientation.
pub fn count_cycles_graph(graph: &TannerGraph, len: usize) -> Result<u64> {
    if ![4, 6, 8].contains(&len) {
        return Err(Error::UnsupportedHalfLength(len / 2));
    }
    if graph.n_edges() > MAX_ORACLE_EDGES {
        return Err(Error::TooLarge(format!(
            "{} edges exceed the oracle limit of {MAX_ORACLE_EDGES}",
            graph.n_edges()
        )));
    }
    let n_vars = graph.n_vars();
    let total = n_vars + graph.n_checks();
    let mut dfs = CycleDfs {
        graph,
        n_vars,
        len,
        start: 0,
        on_path: vec![false; total],
        count: 0,
    };
    for s in 0..total {
        dfs.start = s;
        dfs.on_path[s] = true;
        dfs.walk(s, 0);
        dfs.on_path[s] = false;
    }
    Ok(dfs.count / 2)
}

/// 4-cycles from pairwise check-node overlaps: `sum C(|N(c1) & N(c2)|, 2)`.
pub fn count_four_cycles_closed_form(graph: &TannerGraph) -> u64 {
    let m = graph.n_checks();
    let mut total = 0u64;
    for a in 0..m {
        for b in a + 1..m {
            let (na, nb) = (graph.check_neighbors(a), graph.check_neighbors(b));
            let (mut i, mut j, mut k) = (0, 0, 0u64);
            while i < na.len() && j < nb.len() {
                match na[i].cmp(&nb[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        k += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
            total += k * k.saturating_sub(1) / 2;
        }
    }
    total
}

/// Result of [`exhaustive_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveReport {
    pub true_min: f64,
    pub argmins: Vec<Vec<u32>>,
    pub feasible_count: usize,
    /// Size of the class reachable from the start vector.
    pub reachable_size: usize,
    pub reachable_min: f64,
}

fn check_size(problem: &OptProblem) -> Result<()> {
    let log = problem.log10_state_space();
    if log > MAX_EXHAUSTIVE_STATES.log10() {
        return Err(Error::TooLarge(format!("10^{log:.1} states")));
    }
    Ok(())
}

/// Every feasible vector with its objective, in mixed-radix order.
pub fn feasible_states(problem: &OptProblem) -> Result<Vec<(Vec<u32>, f64)>> {
    check_size(problem)?;
    let alph = problem.alphabets();
    let n = alph.len();
    let mut digits = vec![0usize; n];
    let mut out = Vec::new();
    loop {
        let x: Vec<u32> = digits.iter().zip(alph).map(|(&d, a)| a[d]).collect();
        if let Some(c) = problem.evaluate(&x) {
            out.push((x, c));
        }
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < alph[k].len() {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// Feasible vectors reachable from `start` through single-tuple moves with
/// nonzero probability (any feasible reassignment of one tuple), breadth first.
pub fn reachable_class(problem: &OptProblem, start: &[u32]) -> Result<Vec<(Vec<u32>, f64)>> {
    check_size(problem)?;
    let c0 = problem
        .evaluate(start)
        .ok_or_else(|| Error::Infeasible("start vector".into()))?;
    let mut seen: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(start.to_vec(), c0);
    queue.push_back(start.to_vec());
    while let Some(x) = queue.pop_front() {
        order.push((x.clone(), seen[&x]));
        for tuple in problem.tuples() {
            let sizes: Vec<usize> = tuple.iter().map(|&e| problem.alphabets()[e as usize].len()).collect();
            let n: usize = sizes.iter().product();
            for mut code in 0..n {
                let mut y = x.clone();
                for (&e, &s) in tuple.iter().zip(&sizes).rev() {
                    y[e as usize] = problem.alphabets()[e as usize][code % s];
                    code /= s;
                }
                if seen.contains_key(&y) {
                    continue;
                }
                if let Some(c) = problem.evaluate(&y) {
                    seen.insert(y.clone(), c);
                    queue.push_back(y);
                }
            }
        }
    }
    Ok(order)
}

/// True minimum, all minimizers and the reachable class from `start`.
pub fn exhaustive_search(problem: &OptProblem, start: &[u32]) -> Result<ExhaustiveReport> {
    let all = feasible_states(problem)?;
    let true_min = all.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let argmins = all.iter().filter(|s| s.1 == true_min).map(|s| s.0.clone()).collect();
    let class = reachable_class(problem, start)?;
    let reachable_min = class.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    Ok(ExhaustiveReport {
        true_min,
        argmins,
        feasible_count: all.len(),
        reachable_size: class.len(),
        reachable_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::{enumerate_candidates, ObjectSet, ObjectiveSpec};
    use crate::matrix::{BinaryMatrix, EntrySpace};
    use crate::optimizer::DistanceCaps;

    #[test]
    fn complete_bipartite_counts() {
        let k22 = TannerGraph::from_dense(&BinaryMatrix::ones(2, 2));
        assert_eq!(count_cycles_graph(&k22, 4).unwrap(), 1);
        let k33 = TannerGraph::from_dense(&BinaryMatrix::ones(3, 3));
        assert_eq!(count_cycles_graph(&k33, 4).unwrap(), 9);
        assert_eq!(count_cycles_graph(&k33, 6).unwrap(), 6);
        assert_eq!(count_four_cycles_closed_form(&k33), 9);
        // K3,4: an 8-cycle needs 4 checks, so none; each 6-cycle picks 3 of the
        // 4 columns and then one of the 6 six-cycles of K3,3
        let k34 = TannerGraph::from_dense(&BinaryMatrix::ones(3, 4));
        assert_eq!(count_cycles_graph(&k34, 6).unwrap(), 4 * 6);
        assert_eq!(count_cycles_graph(&k34, 8).unwrap(), 0);
        // K4,4 8-cycles: Hamiltonian cycles of K4,4 = 4! * 3! / 2
        let k44 = TannerGraph::from_dense(&BinaryMatrix::ones(4, 4));
        assert_eq!(count_cycles_graph(&k44, 8).unwrap(), 72);
    }

    #[test]
    fn rejects_odd_or_long_cycles() {
        let g = TannerGraph::from_dense(&BinaryMatrix::ones(2, 2));
        assert!(count_cycles_graph(&g, 5).is_err());
        assert!(count_cycles_graph(&g, 10).is_err());
    }

    fn partition_2x3() -> OptProblem {
        let base = BinaryMatrix::ones(2, 3);
        let space = EntrySpace::new(&base);
        let l = enumerate_candidates(&base, 2).unwrap();
        let set = ObjectSet::partition(&[&l], &space).unwrap();
        OptProblem::new(set, ObjectiveSpec::weighted(1.0, 0.0, 0.0), vec![vec![0, 1]; 6], 1).unwrap()
    }

    #[test]
    fn unconstrained_partition_reaches_everything() {
        let p = partition_2x3();
        let r = exhaustive_search(&p, &[0; 6]).unwrap();
        assert_eq!(r.feasible_count, 64);
        assert_eq!(r.reachable_size, 64);
        assert_eq!(r.true_min, r.reachable_min);
    }

    #[test]
    fn caps_shrink_the_class() {
        let p = partition_2x3()
            .with_caps(DistanceCaps {
                reference: vec![0; 6],
                l1: Some(2),
                linf: None,
            })
            .unwrap();
        let r = exhaustive_search(&p, &[0; 6]).unwrap();
        // vectors with at most two ones
        assert_eq!(r.reachable_size, 1 + 6 + 15);
        assert!(r.reachable_size < 64);
    }

    #[test]
    fn single_entry_problem() {
        let base = BinaryMatrix::ones(2, 2);
        let space = EntrySpace::new(&base);
        let l = enumerate_candidates(&base, 2).unwrap();
        let set = ObjectSet::partition(&[&l], &space).unwrap();
        let mut alph = vec![vec![0]; 4];
        alph[0] = vec![0, 1, 2];
        let p = OptProblem::new(set, ObjectiveSpec::weighted(1.0, 0.0, 0.0), alph, 1).unwrap();
        let r = exhaustive_search(&p, &[0; 4]).unwrap();
        assert_eq!(r.feasible_count, 3);
        assert_eq!(r.true_min, 0.0);
        assert_eq!(r.argmins, vec![vec![1, 0, 0, 0], vec![2, 0, 0, 0]]);
    }
}
