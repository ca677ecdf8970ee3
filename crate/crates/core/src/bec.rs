//! Peeling decoding over the binary erasure channel, frame-error-rate
//! measurement and stopping-set extraction.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::TannerGraph;
use crate::oracle::count_cycles_graph;

/// Residual subgraphs above this many edges are not searched for cycle-8s.
pub const MAX_RESIDUAL_EDGES: usize = 4000;

/// Erased variable nodes of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ErasurePattern {
    pub erased: Vec<u32>,
    pub rate: f64,
    pub seed: u64,
}

impl ErasurePattern {
    /// Each of `n` positions erased independently with probability `rate`.
    pub fn draw(n: usize, rate: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let erased = (0..n as u32).filter(|_| rng.gen::<f64>() < rate).collect();
        ErasurePattern { erased, rate, seed }
    }

    pub fn from_indices(mut erased: Vec<u32>) -> Self {
        erased.sort_unstable();
        erased.dedup();
        ErasurePattern {
            erased,
            rate: f64::NAN,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub success: bool,
    pub residual_vars: Vec<u32>,
    pub residual_checks: Vec<u32>,
    pub peel_steps: usize,
}

/// Resolves erased variables through checks with a single erased neighbor
/// until no such check remains.
pub fn peel(graph: &TannerGraph, erasures: &ErasurePattern) -> Result<DecodeResult> {
    let n = graph.n_vars();
    let mut erased = vec![false; n];
    for &v in &erasures.erased {
        let v = v as usize;
        if v >= n {
            return Err(Error::InvalidArgument(format!("erased index {v} outside 0..{n}")));
        }
        erased[v] = true;
    }
    let mut pending: Vec<u32> = (0..graph.n_checks())
        .map(|c| graph.check_neighbors(c).iter().filter(|&&v| erased[v as usize]).count() as u32)
        .collect();
    let mut queue: Vec<usize> = (0..graph.n_checks()).filter(|&c| pending[c] == 1).collect();
    let mut steps = 0;
    while let Some(c) = queue.pop() {
        if pending[c] != 1 {
            continue;
        }
        let Some(&v) = graph.check_neighbors(c).iter().find(|&&v| erased[v as usize]) else {
            continue;
        };
        erased[v as usize] = false;
        steps += 1;
        for &c2 in graph.var_neighbors(v as usize) {
            let c2 = c2 as usize;
            pending[c2] -= 1;
            if pending[c2] == 1 {
                queue.push(c2);
            }
        }
    }
    let residual_vars: Vec<u32> = (0..n as u32).filter(|&v| erased[v as usize]).collect();
    let residual_checks: Vec<u32> = (0..graph.n_checks() as u32).filter(|&c| pending[c as usize] > 0).collect();
    Ok(DecodeResult {
        success: residual_vars.is_empty(),
        residual_vars,
        residual_checks,
        peel_steps: steps,
    })
}

/// True when every check adjacent to `vars` has at least two neighbors in `vars`.
pub fn is_stopping_set(graph: &TannerGraph, vars: &[u32]) -> bool {
    let mut hits = vec![0u32; graph.n_checks()];
    for &v in vars {
        for &c in graph.var_neighbors(v as usize) {
            hits[c as usize] += 1;
        }
    }
    hits.iter().all(|&h| h != 1)
}

/// One point of an FER curve.
#[derive(Debug, Clone, PartialEq)]
pub struct FerPoint {
    pub rate: f64,
    pub frames: usize,
    pub failures: usize,
    pub fer: f64,
    /// Normal-approximation 95% half-width.
    pub half_width: f64,
    /// Fewer than 10 failures: the half-width is unreliable.
    pub low_confidence: bool,
    /// Decoder outputs of the failed frames, in frame order.
    pub residuals: Vec<DecodeResult>,
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of frame `frame` at point `point`, independent of scheduling.
pub fn frame_seed(seed: u64, point: usize, frame: usize) -> u64 {
    mix(mix(mix(seed) ^ point as u64) ^ frame as u64)
}

/// Measures FER at each erasure rate. Frames are decoded in parallel on
/// `threads` workers (all available when `None`); results do not depend on it.
pub fn run_fer(
    graph: &TannerGraph,
    rates: &[f64],
    frames: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<FerPoint>> {
    if frames == 0 {
        return Err(Error::InvalidArgument("frames per point must be at least 1".into()));
    }
    if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(Error::InvalidArgument("erasure rates must lie in [0, 1]".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let n = graph.n_vars();
    pool.install(|| {
        rates
            .iter()
            .enumerate()
            .map(|(p, &rate)| {
                let outcomes: Vec<DecodeResult> = (0..frames)
                    .into_par_iter()
                    .map(|f| peel(graph, &ErasurePattern::draw(n, rate, frame_seed(seed, p, f))))
                    .collect::<Result<_>>()?;
                let residuals: Vec<DecodeResult> = outcomes.into_iter().filter(|r| !r.success).collect();
                let failures = residuals.len();
                let fer = failures as f64 / frames as f64;
                Ok(FerPoint {
                    rate,
                    frames,
                    failures,
                    fer,
                    half_width: 1.96 * (fer * (1.0 - fer) / frames as f64).sqrt(),
                    low_confidence: failures < 10,
                    residuals,
                })
            })
            .collect()
    })
}

pub fn fer_csv(points: &[FerPoint]) -> String {
    let mut s = String::from("rate,frames,failures,fer,half_width\n");
    for p in points {
        writeln!(s, "{},{},{},{:.6e},{:.6e}", p.rate, p.frames, p.failures, p.fer, p.half_width).unwrap();
    }
    s
}

/// Residual of a failed decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingSetReport {
    pub vars: Vec<u32>,
    pub checks: Vec<u32>,
    pub size: usize,
    /// Induced check degree -> number of checks.
    pub check_degrees: BTreeMap<usize, usize>,
    /// Cycle-8s of the induced subgraph (`None` above [`MAX_RESIDUAL_EDGES`]).
    pub cycle8: Option<u64>,
}

/// Describes the residual stopping set of a failed decoding.
pub fn extract_stopping_set(result: &DecodeResult, graph: &TannerGraph) -> Result<StoppingSetReport> {
    if result.success {
        return Err(Error::InvalidArgument("decoding succeeded; no residual".into()));
    }
    let vars: Vec<usize> = result.residual_vars.iter().map(|&v| v as usize).collect();
    let (sub, checks) = graph.induced_by_vars(&vars);
    let checks: Vec<u32> = checks.into_iter().map(|c| c as u32).collect();
    let mut check_degrees = BTreeMap::new();
    for c in 0..sub.n_checks() {
        *check_degrees.entry(sub.check_neighbors(c).len()).or_insert(0) += 1;
    }
    let cycle8 = if sub.n_edges() <= MAX_RESIDUAL_EDGES {
        count_cycles_graph(&sub, 8).ok()
    } else {
        None
    };
    Ok(StoppingSetReport {
        size: result.residual_vars.len(),
        vars: result.residual_vars.clone(),
        checks,
        check_degrees,
        cycle8,
    })
}

impl StoppingSetReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "size {}", self.size).unwrap();
        writeln!(s, "variables {:?}", self.vars).unwrap();
        writeln!(s, "checks {:?}", self.checks).unwrap();
        let prof: Vec<String> = self.check_degrees.iter().map(|(d, n)| format!("{d}:{n}")).collect();
        writeln!(s, "check degrees {}", prof.join(" ")).unwrap();
        match self.cycle8 {
            Some(c) => writeln!(s, "cycle8 {c}").unwrap(),
            None => writeln!(s, "cycle8 n/a").unwrap(),
        }
        s
    }
}

/// Residual size -> number of failures.
pub fn residual_size_histogram(results: &[DecodeResult]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for r in results.iter().filter(|r| !r.success) {
        *h.entry(r.residual_vars.len()).or_insert(0) += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::BinaryMatrix;
    use proptest::prelude::*;

    /// 3x4 toy whose variables 0 and 1 both sit on checks 0 and 1 only.
    fn toy() -> TannerGraph {
        TannerGraph::from_dense(&BinaryMatrix::from_rows(&[[1, 1, 1, 0], [1, 1, 0, 1], [0, 0, 1, 1]]).unwrap())
    }

    #[test]
    fn zero_erasures() {
        let r = peel(&toy(), &ErasurePattern::from_indices(vec![])).unwrap();
        assert!(r.success);
        assert_eq!(r.peel_steps, 0);
    }

    #[test]
    fn single_erasure_resolves() {
        for v in 0..4 {
            assert!(peel(&toy(), &ErasurePattern::from_indices(vec![v])).unwrap().success);
        }
    }

    #[test]
    fn designed_weight_two_stopping_set() {
        let g = toy();
        assert!(is_stopping_set(&g, &[0, 1]));
        let r = peel(&g, &ErasurePattern::from_indices(vec![0, 1])).unwrap();
        assert!(!r.success);
        assert_eq!(r.residual_vars, vec![0, 1]);
        let rep = extract_stopping_set(&r, &g).unwrap();
        assert_eq!(rep.size, 2);
        assert_eq!(rep.check_degrees, BTreeMap::from([(2, 2)]));
        assert_eq!(rep.cycle8, Some(0));
        assert!(extract_stopping_set(&peel(&g, &ErasurePattern::from_indices(vec![])).unwrap(), &g).is_err());
    }

    /// Largest stopping set inside `erased`, by brute force over subsets.
    fn max_stopping_subset(g: &TannerGraph, erased: &[u32]) -> Vec<u32> {
        let mut best: Vec<u32> = Vec::new();
        for mask in 0u32..(1 << erased.len()) {
            let s: Vec<u32> = (0..erased.len()).filter(|k| mask >> k & 1 == 1).map(|k| erased[k]).collect();
            if s.len() > best.len() && is_stopping_set(g, &s) {
                best = s;
            }
        }
        best
    }

    proptest! {
        #[test]
        fn residual_is_maximal_stopping_set(
            rows in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 7), 4),
            mask in 0u32..128,
        ) {
            let bits: Vec<Vec<u8>> = rows.iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect();
            let h = BinaryMatrix::from_rows(&bits).unwrap();
            let g = TannerGraph::from_dense(&h);
            let erased: Vec<u32> = (0..7).filter(|k| mask >> k & 1 == 1).collect();
            let r = peel(&g, &ErasurePattern::from_indices(erased.clone())).unwrap();
            prop_assert!(is_stopping_set(&g, &r.residual_vars));
            prop_assert_eq!(&r.residual_vars, &max_stopping_subset(&g, &erased));
            prop_assert_eq!(r.success, r.residual_vars.is_empty());
        }
    }

    #[test]
    fn fer_endpoints_and_reproducibility() {
        let g = toy();
        let a = run_fer(&g, &[0.0, 0.5, 1.0], 200, 9, Some(1)).unwrap();
        let b = run_fer(&g, &[0.0, 0.5, 1.0], 200, 9, Some(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].fer, 0.0);
        assert_eq!(a[2].fer, 1.0);
        assert_eq!(fer_csv(&a), fer_csv(&b));
        for p in &a {
            for r in &p.residuals {
                assert!(is_stopping_set(&g, &r.residual_vars));
            }
        }
        assert_eq!(residual_size_histogram(&a[2].residuals), BTreeMap::from([(4, 200)]));
    }
}
