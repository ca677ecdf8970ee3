//! Python module `mc2py`: code parameters, candidate enumeration, the
//! partitioning and lifting optimizers, lifted codes with erasure-channel
//! simulation, and the decay-model estimators.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mc2_core::bec::run_fer;
use mc2_core::cycles::{enumerate_candidates, ObjectClass};
use mc2_core::estimator;
use mc2_core::matrix::{
    build_sc_protograph, export_alist, lift_to_tanner, BinaryMatrix, EntrySpace, IntGrid, LiftingMatrix,
    PartitioningMatrix, SCCodeParams, TannerGraph,
};
use mc2_core::optimizer::{self, lift_objects, LiftCandidates, LiftMode, OptimizeOptions};
use mc2_core::oracle::count_cycles_graph;

fn err(e: mc2_core::Error) -> PyErr {
    match e {
        mc2_core::Error::Infeasible(_) | mc2_core::Error::FitRejected(_) | mc2_core::Error::TooLarge(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn grid_from(rows: &[Vec<i64>]) -> PyResult<IntGrid> {
    IntGrid::from_signed_rows(rows).map_err(err)
}

fn base_from(rows: Option<Vec<Vec<u8>>>, gamma: usize, kappa: usize) -> PyResult<BinaryMatrix> {
    match rows {
        Some(r) => BinaryMatrix::from_rows(&r).map_err(err),
        None => Ok(BinaryMatrix::ones(gamma, kappa)),
    }
}

/// SC code parameters `(gamma, kappa, z, L, m)`.
#[pyclass(name = "CodeParams", frozen)]
#[derive(Clone)]
struct PyCodeParams {
    inner: SCCodeParams,
}

#[pymethods]
impl PyCodeParams {
    #[new]
    #[pyo3(signature = (gamma, kappa, z, coupling_length, memory))]
    fn new(gamma: usize, kappa: usize, z: usize, coupling_length: usize, memory: usize) -> PyResult<Self> {
        Ok(PyCodeParams {
            inner: SCCodeParams::new(gamma, kappa, z, coupling_length, memory).map_err(err)?,
        })
    }

    #[getter]
    fn length(&self) -> usize {
        self.inner.code_length()
    }

    #[getter]
    fn checks(&self) -> usize {
        self.inner.check_count()
    }

    #[getter]
    fn rate(&self) -> f64 {
        self.inner.design_rate().as_f64()
    }

    /// Design rate as `(numerator, denominator)`.
    #[getter]
    fn rate_fraction(&self) -> (i64, i64) {
        let r = self.inner.design_rate();
        (r.num, r.den)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "CodeParams(gamma={}, kappa={}, z={}, L={}, m={})",
            p.gamma, p.kappa, p.z, p.coupling_length, p.memory
        )
    }
}

/// Number of cycle-`2g` candidates of a base matrix (all-one when `base` is omitted).
#[pyfunction]
#[pyo3(signature = (gamma, kappa, g, base = None))]
fn count_candidates(gamma: usize, kappa: usize, g: usize, base: Option<Vec<Vec<u8>>>) -> PyResult<usize> {
    let b = base_from(base, gamma, kappa)?;
    Ok(enumerate_candidates(&b, g).map_err(err)?.len())
}

fn options(gamma: usize, kappa: usize, seed: u64, transitions: Option<u64>, d: usize) -> OptimizeOptions {
    let mut o = OptimizeOptions::for_base(gamma, kappa, seed);
    if let Some(t) = transitions {
        o.max_transitions = t;
    }
    o.d = d;
    o
}

/// Optimizes a partitioning matrix. Returns `(matrix, count, transitions)`
/// where `count` is the weighted number of active candidates.
#[pyfunction]
#[pyo3(signature = (gamma, kappa, memory, weights = (0.0, 1.0, 0.2), seed = 0, transitions = None, d = 1, allowed = None))]
#[allow(clippy::too_many_arguments)]
fn optimize_partition(
    gamma: usize,
    kappa: usize,
    memory: usize,
    weights: (f64, f64, f64),
    seed: u64,
    transitions: Option<u64>,
    d: usize,
    allowed: Option<Vec<u32>>,
) -> PyResult<(Vec<Vec<i64>>, f64, u64)> {
    let base = BinaryMatrix::ones(gamma, kappa);
    let opts = options(gamma, kappa, seed, transitions, d);
    let r = optimizer::optimize_partition(
        &base,
        memory,
        allowed.as_deref(),
        None,
        [weights.0, weights.1, weights.2],
        (None, None),
        &opts,
    )
    .map_err(err)?;
    Ok((r.matrix.grid().to_signed_rows(), r.run.c_opt * r.alpha, r.run.transitions))
}

/// A lifted SC code.
#[pyclass(name = "Code")]
struct PyCode {
    params: SCCodeParams,
    base: BinaryMatrix,
    partition: PartitioningMatrix,
    lifting: LiftingMatrix,
    graph: TannerGraph,
}

impl PyCode {
    fn build(params: SCCodeParams, partition: PartitioningMatrix, lifting: LiftingMatrix) -> PyResult<Self> {
        let base = BinaryMatrix::ones(params.gamma, params.kappa);
        let proto = build_sc_protograph(&params, &partition, &base).map_err(err)?;
        let graph = lift_to_tanner(&proto, &lifting, params.z).map_err(err)?;
        Ok(PyCode {
            params,
            base,
            partition,
            lifting,
            graph,
        })
    }
}

#[pymethods]
impl PyCode {
    /// Code from explicit partitioning and lifting matrices over an all-one base.
    #[new]
    fn new(params: &PyCodeParams, partition: Vec<Vec<i64>>, lifting: Vec<Vec<i64>>) -> PyResult<Self> {
        let p = params.inner;
        let base = BinaryMatrix::ones(p.gamma, p.kappa);
        let part = PartitioningMatrix::new(grid_from(&partition)?, &base, p.memory, None).map_err(err)?;
        let lift = LiftingMatrix::new(grid_from(&lifting)?, &base, p.z).map_err(err)?;
        PyCode::build(p, part, lift)
    }

    /// Staged lifting optimization for a given partitioning matrix.
    #[staticmethod]
    #[pyo3(signature = (params, partition, seed = 0, mode = "cycles", transitions = None))]
    fn optimize(
        params: &PyCodeParams,
        partition: Vec<Vec<i64>>,
        seed: u64,
        mode: &str,
        transitions: Option<u64>,
    ) -> PyResult<Self> {
        let p = params.inner;
        let mode = match mode {
            "cycles" => LiftMode::Cycles,
            "uts" => LiftMode::Uts,
            m => return Err(PyValueError::new_err(format!("mode must be 'cycles' or 'uts', got {m:?}"))),
        };
        let base = BinaryMatrix::ones(p.gamma, p.kappa);
        let part = PartitioningMatrix::new(grid_from(&partition)?, &base, p.memory, None).map_err(err)?;
        let opts = options(p.gamma, p.kappa, seed, transitions, 1);
        let r = optimizer::optimize_lift(&p, &part, &base, mode, &opts).map_err(err)?;
        PyCode::build(p, part, r.lifting)
    }

    #[getter]
    fn n_vars(&self) -> usize {
        self.graph.n_vars()
    }

    #[getter]
    fn n_checks(&self) -> usize {
        self.graph.n_checks()
    }

    #[getter]
    fn partition(&self) -> Vec<Vec<i64>> {
        self.partition.grid().to_signed_rows()
    }

    #[getter]
    fn lifting(&self) -> Vec<Vec<i64>> {
        self.lifting.grid().to_signed_rows()
    }

    /// Lifted cycles of length `2g` from the candidate conditions.
    fn cycle_count(&self, g: usize) -> PyResult<u64> {
        let class = ObjectClass::for_half_length(g).map_err(err)?;
        let proto = build_sc_protograph(&self.params, &self.partition, &self.base).map_err(err)?;
        let space = EntrySpace::new(&self.base);
        let mut cands = LiftCandidates::new(&proto);
        let set = lift_objects(&mut cands, &space, self.params.z, &[g], false).map_err(err)?;
        let x = space.vector(self.lifting.grid()).map_err(err)?;
        Ok(set.lifted_cycle_count(&x, class, self.params.z))
    }

    /// Cycles of the given length counted directly on the Tanner graph.
    fn exact_cycle_count(&self, length: usize) -> PyResult<u64> {
        count_cycles_graph(&self.graph, length).map_err(err)
    }

    fn alist(&self) -> String {
        export_alist(&self.graph)
    }

    /// Peeling-decoder FER: `[(rate, fer, half_width)]`.
    #[pyo3(signature = (rates, frames = 1000, seed = 0))]
    fn fer(&self, py: Python<'_>, rates: Vec<f64>, frames: usize, seed: u64) -> PyResult<Vec<(f64, f64, f64)>> {
        let pts = py
            .allow_threads(|| run_fer(&self.graph, &rates, frames, seed, None))
            .map_err(err)?;
        Ok(pts.iter().map(|p| (p.rate, p.fer, p.half_width)).collect())
    }
}

/// Gaussian upper-tail approximation.
#[pyfunction]
fn q_approx(x: f64) -> f64 {
    estimator::q_approx(x)
}

/// Fits `mu = c + a exp(-b beta)` to `(beta, mu)` points; returns `(a, b, c)`.
#[pyfunction]
fn fit_decay(points: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64)> {
    let f = estimator::fit_decay(&points).map_err(err)?;
    Ok((f.a, f.b, f.c))
}

#[pymodule]
fn mc2py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCodeParams>()?;
    m.add_class::<PyCode>()?;
    m.add_function(wrap_pyfunction!(count_candidates, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_partition, m)?)?;
    m.add_function(wrap_pyfunction!(q_approx, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay, m)?)?;
    Ok(())
}
