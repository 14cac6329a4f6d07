//! Python bindings: build, verify and cost spanning spheres from Python.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spansphere::boltzmann::{run_chain, Beta};
use spansphere::bounds::{bounds_report, BoundsParams};
use spansphere::constructions::tight_path_sphere;
use spansphere::exact::{enumerate_2spheres, min_spanning_sphere_exact, patch_exact};
use spansphere::experiments::{construct as build, Method, Model};
use spansphere::lc::{sample_lc_2sphere_with, LcSampling};
use spansphere::patcher::patch_2sphere;
use spansphere::{s_star as pole_cycle_sphere, verify, PureComplex, Vertex, WeightOracle};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A pure simplicial complex on vertices `1..=n`.
#[pyclass(name = "Complex", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyComplex {
    inner: PureComplex,
}

#[pymethods]
impl PyComplex {
    #[new]
    fn new(d: usize, n: u32, facets: Vec<Vec<Vertex>>) -> PyResult<Self> {
        let lists: Vec<&[Vertex]> = facets.iter().map(Vec::as_slice).collect();
        PureComplex::from_lists(d, n, &lists).map(|inner| PyComplex { inner }).map_err(value_error)
    }

    /// Parses the `d=<int> n=<int>` header plus one facet per line format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        text.parse().map(|inner| PyComplex { inner }).map_err(value_error)
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn facets(&self) -> Vec<Vec<Vertex>> {
        self.inner.facets().iter().map(|f| f.vertices().to_vec()).collect()
    }

    fn num_facets(&self) -> usize {
        self.inner.num_facets()
    }

    fn edges(&self) -> Vec<(Vertex, Vertex)> {
        self.inner.edges()
    }

    fn euler_characteristic(&self) -> i64 {
        self.inner.euler_characteristic()
    }

    fn is_spanning(&self) -> bool {
        self.inner.is_spanning()
    }

    /// `(outcome, spanning)`, e.g. `("Sphere2", True)`.
    fn verify(&self) -> PyResult<(String, bool)> {
        let v = verify(&self.inner).map_err(value_error)?;
        Ok((v.outcome.to_string(), v.spanning))
    }

    /// Cost under i.i.d. uniform facet costs (`model="facet"`) or pair costs (`"edge"`).
    #[pyo3(signature = (seed, model = "facet"))]
    fn cost(&self, seed: u64, model: &str) -> PyResult<f64> {
        let model: Model = model.parse().map_err(value_error)?;
        WeightOracle::new(seed, model.cost_model(self.inner.dim())).complex_cost(&self.inner).map_err(value_error)
    }

    fn __len__(&self) -> usize {
        self.inner.num_facets()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Complex(d={}, n={}, facets={})", self.inner.dim(), self.inner.n(), self.inner.num_facets())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

fn wrap(inner: PureComplex) -> PyComplex {
    PyComplex { inner }
}

/// Builds a cheap spanning sphere; returns `(complex, cost)`.
#[pyfunction]
#[pyo3(signature = (n, d = 2, model = "facet", method = None, seed = 0))]
fn construct(n: u32, d: usize, model: &str, method: Option<&str>, seed: u64) -> PyResult<(PyComplex, f64)> {
    let model: Model = model.parse().map_err(value_error)?;
    let method = match method {
        Some(m) => m.parse().map_err(value_error)?,
        None => Method::default_for(model),
    };
    let o = WeightOracle::new(seed, model.cost_model(d));
    let b = build(d, n, method, &o).map_err(value_error)?;
    Ok((wrap(b.complex), b.cost))
}

/// The pole/cycle sphere with cycle `d+1, ..., n`.
#[pyfunction]
#[pyo3(signature = (n, d = 2))]
fn s_star(n: u32, d: usize) -> PyResult<PyComplex> {
    pole_cycle_sphere(n, d).map(|s| wrap(s.complex)).map_err(value_error)
}

/// Greedy tight-path sphere under edge costs; returns `(complex, cost, max pair queries)`.
#[pyfunction]
#[pyo3(signature = (n, seed = 0))]
fn tight_path(n: u32, seed: u64) -> PyResult<(PyComplex, f64, u32)> {
    let tp = tight_path_sphere(n, &WeightOracle::edges(seed)).map_err(value_error)?;
    Ok((wrap(tp.complex), tp.cost, tp.log.max_count()))
}

/// A 2-sphere with `m` facets grown by local constructions.
#[pyfunction]
#[pyo3(signature = (m, seed = 0, adaptive = true))]
fn sample_lc(m: usize, seed: u64, adaptive: bool) -> PyResult<PyComplex> {
    let mode = if adaptive { LcSampling::Adaptive } else { LcSampling::Uniform };
    sample_lc_2sphere_with(m, seed, mode).map(|(k, _)| wrap(k)).map_err(value_error)
}

/// `(labeled spheres, isomorphism classes)` on `[n]`.
#[pyfunction]
fn enumerate(n: u32) -> PyResult<(u64, usize)> {
    let e = enumerate_2spheres(n).map_err(value_error)?;
    Ok((e.labeled_count, e.classes.len()))
}

/// Exact minimum-cost spanning 2-sphere; returns `(complex, cost)`.
#[pyfunction]
#[pyo3(signature = (n, seed = 0))]
fn exact_min(n: u32, seed: u64) -> PyResult<(PyComplex, f64)> {
    let (k, c) = min_spanning_sphere_exact(n, &WeightOracle::facets(seed, 2)).map_err(value_error)?;
    Ok((wrap(k), c))
}

/// Fewest and cheapest facets completing `h` to a spanning 2-sphere; `(rho, cost)`.
#[pyfunction]
#[pyo3(signature = (h, n, seed = 0))]
fn exact_patch(h: &PyComplex, n: u32, seed: u64) -> PyResult<(usize, f64)> {
    let q = patch_exact(&h.inner, n, &WeightOracle::facets(seed, 2)).map_err(value_error)?;
    Ok((q.rho, q.patch_cost))
}

/// Patches `h` inside the sphere `witness`; returns a dict with the final sphere and costs.
#[pyfunction]
#[pyo3(signature = (h, witness, s, seed = 0))]
fn patch<'py>(py: Python<'py>, h: &PyComplex, witness: &PyComplex, s: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let r = patch_2sphere(&h.inner, &witness.inner, &WeightOracle::facets(seed, 2), s).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("k", r.k)?;
    d.set_item("cost", r.cost)?;
    d.set_item("trivial_cost", r.trivial_cost)?;
    d.set_item("separator", r.separator.cycle.clone())?;
    d.set_item("freed", r.separator.q_set.clone())?;
    d.set_item("sphere", wrap(r.final_sphere))?;
    Ok(d)
}

/// Runs the flip chain; `beta` is a number or `"inf"` for descent.
#[pyfunction]
#[pyo3(signature = (n, beta, steps, seed = 0, thin = 1))]
fn flip_chain<'py>(py: Python<'py>, n: u32, beta: &str, steps: u64, seed: u64, thin: u64) -> PyResult<Bound<'py, PyDict>> {
    let beta: Beta = beta.parse().map_err(value_error)?;
    let o = WeightOracle::facets(spansphere::derive_seed(seed, "boltzmann-weights", 0), 2);
    let r = run_chain(n, beta, &o, steps, seed, thin).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("final_cost", r.final_cost)?;
    d.set_item("mean_cost", r.mean_cost)?;
    d.set_item("acceptance_rate", r.acceptance_rate)?;
    d.set_item("trace", r.trace.iter().map(|t| (t.step, t.cost, t.accepted)).collect::<Vec<_>>())?;
    d.set_item("sphere", wrap(r.final_sphere))?;
    Ok(d)
}

/// The `key=value` report of the bounds calculators, as a dict of strings.
#[pyfunction]
fn bounds<'py>(py: Python<'py>, d: usize, n: u64) -> PyResult<Bound<'py, PyDict>> {
    let report = bounds_report(BoundsParams::new(d, n)).map_err(value_error)?.to_string();
    let out = PyDict::new(py);
    for (k, v) in report.lines().filter_map(|l| l.split_once('=')) {
        out.set_item(k, v)?;
    }
    Ok(out)
}

#[pymodule]
pub fn spansphere_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyComplex>()?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    m.add_function(wrap_pyfunction!(s_star, m)?)?;
    m.add_function(wrap_pyfunction!(tight_path, m)?)?;
    m.add_function(wrap_pyfunction!(sample_lc, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(exact_min, m)?)?;
    m.add_function(wrap_pyfunction!(exact_patch, m)?)?;
    m.add_function(wrap_pyfunction!(patch, m)?)?;
    m.add_function(wrap_pyfunction!(flip_chain, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    Ok(())
}
