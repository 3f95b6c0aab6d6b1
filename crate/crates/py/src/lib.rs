//! Python bindings: graphs, models, formulas, EF games, kernels and the
//! certification schemes.

use std::collections::BTreeMap;

use loccert::cert::{
    adversarial_prover, cert_size_bits, certs_from_json, certs_to_json, count_escapes, dump_certs, mutate_certs,
    run_verification, CertMap, Scheme,
};
use loccert::ef::{ef_equivalent_with_budget, DEFAULT_BUDGET};
use loccert::kernel::{end_type_consistency_check, k_reduce, Reduction};
use loccert::schemes::{build_scheme, SchemeParams};
use loccert::treedepth::{compute_treedepth_exact, is_coherent, is_valid_model, load_model, make_coherent};
use loccert::{load_graph, Graph, Model, NodeId, Sentence};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(pyloccert, CannotCertify, PyException);
create_exception!(pyloccert, Undecided, PyException);

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Graph", module = "pyloccert", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyGraph {
    inner: Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(ids: Vec<u64>, edges: Vec<(u64, u64)>) -> PyResult<Self> {
        let inner = Graph::new(ids.into_iter().map(NodeId), edges.into_iter().map(|(a, b)| (NodeId(a), NodeId(b))))
            .map_err(value_err)?;
        Ok(PyGraph { inner })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyGraph { inner: load_graph(text).map_err(value_err)? })
    }

    #[staticmethod]
    fn path(n: usize) -> Self {
        PyGraph { inner: Graph::path(n) }
    }

    #[staticmethod]
    fn cycle(n: usize) -> Self {
        PyGraph { inner: Graph::cycle(n) }
    }

    #[staticmethod]
    fn complete(n: usize) -> Self {
        PyGraph { inner: Graph::complete(n) }
    }

    #[staticmethod]
    fn star(leaves: usize) -> Self {
        PyGraph { inner: Graph::star(leaves) }
    }

    /// Random connected graph of treedepth at most `t` with its model.
    #[staticmethod]
    #[pyo3(signature = (t, n, seed = 0))]
    fn random_bounded_treedepth(t: usize, n: usize, seed: u64) -> PyResult<(Self, PyModel)> {
        let (g, m) = loccert::generate::random_bounded_treedepth_graph(t, n, seed).map_err(value_err)?;
        Ok((PyGraph { inner: g }, PyModel { inner: m }))
    }

    fn ids(&self) -> Vec<u64> {
        self.inner.ids().iter().map(|v| v.0).collect()
    }

    fn edges(&self) -> Vec<(u64, u64)> {
        self.inner.edge_ids().map(|(a, b)| (a.0, b.0)).collect()
    }

    fn to_edge_list(&self) -> String {
        self.inner.to_edge_list()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: PyRef<'_, PyGraph>) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.len(), self.inner.edge_count())
    }
}

#[pyclass(name = "Model", module = "pyloccert", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyModel {
    inner: Model,
}

#[pymethods]
impl PyModel {
    /// From a map child -> parent; the root maps to itself.
    #[new]
    fn new(parents: BTreeMap<u64, u64>) -> PyResult<Self> {
        let parents = parents.into_iter().map(|(v, p)| (NodeId(v), NodeId(p))).collect();
        Ok(PyModel { inner: Model::from_parents(parents).map_err(value_err)? })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyModel { inner: load_model(text).map_err(value_err)? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn root(&self) -> u64 {
        self.inner.root().0
    }

    fn height(&self) -> usize {
        self.inner.height()
    }

    fn depth(&self, v: u64) -> PyResult<usize> {
        if !self.inner.contains(NodeId(v)) {
            return Err(value_err(format!("no vertex {v}")));
        }
        Ok(self.inner.depth(NodeId(v)))
    }

    fn parents(&self) -> BTreeMap<u64, u64> {
        self.inner.parents().iter().map(|(v, p)| (v.0, p.0)).collect()
    }

    fn is_valid_for(&self, g: PyRef<'_, PyGraph>, t: usize) -> PyResult<bool> {
        is_valid_model(&g.inner, &self.inner, t).map_err(value_err)
    }

    fn is_coherent_for(&self, g: PyRef<'_, PyGraph>) -> bool {
        is_coherent(&g.inner, &self.inner)
    }

    fn make_coherent(&self, g: PyRef<'_, PyGraph>) -> PyResult<PyModel> {
        Ok(PyModel { inner: make_coherent(&g.inner, &self.inner).map_err(value_err)? })
    }

    fn __repr__(&self) -> String {
        format!("Model(root={}, height={})", self.inner.root(), self.inner.height())
    }
}

/// Exact treedepth (root depth 0) and an optimal coherent model.
#[pyfunction]
fn treedepth(g: PyRef<'_, PyGraph>) -> PyResult<(usize, PyModel)> {
    let (t, m) = compute_treedepth_exact(&g.inner).map_err(value_err)?;
    Ok((t, PyModel { inner: m }))
}

#[pyfunction]
fn evaluate(g: PyRef<'_, PyGraph>, sentence: &str) -> PyResult<bool> {
    Ok(Sentence::parse(sentence).map_err(value_err)?.evaluate(&g.inner))
}

#[pyfunction]
fn quantifier_depth(sentence: &str) -> PyResult<usize> {
    Ok(Sentence::parse(sentence).map_err(value_err)?.quantifier_depth())
}

/// Whether Duplicator wins the `k`-round EF game on `g` and `h`.
#[pyfunction]
#[pyo3(signature = (g, h, k, budget = DEFAULT_BUDGET))]
fn ef_equivalent(g: PyRef<'_, PyGraph>, h: PyRef<'_, PyGraph>, k: usize, budget: u64) -> PyResult<bool> {
    ef_equivalent_with_budget(&g.inner, &h.inner, k, budget).map_err(|e| Undecided::new_err(e.to_string()))
}

#[pyclass(name = "Reduction", module = "pyloccert", frozen)]
pub struct PyReduction {
    inner: Reduction,
}

#[pymethods]
impl PyReduction {
    #[getter]
    fn kernel(&self) -> PyGraph {
        PyGraph { inner: self.inner.kernel.clone() }
    }

    #[getter]
    fn pruned(&self) -> Vec<u64> {
        self.inner.pruned.iter().map(|v| v.0).collect()
    }

    #[getter]
    fn deleted(&self) -> Vec<u64> {
        self.inner.deleted.iter().map(|v| v.0).collect()
    }

    #[getter]
    fn prune_log(&self) -> Vec<(u64, usize)> {
        self.inner.prune_log.iter().map(|(v, d)| (v.0, *d)).collect()
    }

    fn dump(&self) -> String {
        self.inner.to_dump()
    }

    fn check(&self) -> bool {
        self.inner.exactly_k_check() && end_type_consistency_check(&self.inner)
    }
}

/// `k`-reduction along `model`, or along an optimal model when none is given.
#[pyfunction]
#[pyo3(signature = (g, k, model = None))]
fn kernelize(g: PyRef<'_, PyGraph>, k: usize, model: Option<PyRef<'_, PyModel>>) -> PyResult<PyReduction> {
    let m = match model {
        Some(m) => make_coherent(&g.inner, &m.inner).map_err(value_err)?,
        None => compute_treedepth_exact(&g.inner).map_err(value_err)?.1,
    };
    Ok(PyReduction { inner: k_reduce(&g.inner, &m, k).map_err(value_err)? })
}

#[pyclass(name = "Certificates", module = "pyloccert", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyCerts {
    inner: CertMap,
}

#[pymethods]
impl PyCerts {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyCerts { inner: certs_from_json(text).map_err(value_err)? })
    }

    fn to_json(&self) -> String {
        certs_to_json(&self.inner)
    }

    fn dump(&self) -> String {
        dump_certs(&self.inner)
    }

    fn max_bits(&self) -> usize {
        cert_size_bits(&self.inner).max_bits
    }

    fn total_bits(&self) -> usize {
        cert_size_bits(&self.inner).total_bits
    }

    fn bits_of(&self, v: u64) -> PyResult<usize> {
        self.inner.get(&NodeId(v)).map(|c| c.size_bits()).ok_or_else(|| value_err(format!("no vertex {v}")))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "Scheme", module = "pyloccert", frozen)]
pub struct PyScheme {
    inner: Box<dyn Scheme + Send>,
}

#[pymethods]
impl PyScheme {
    /// One of `st`, `count`, `efo`, `fo2`, `td`, `kernel`, `fo-td`.
    #[new]
    #[pyo3(signature = (name, t = None, k = None, formula = None, expected = None, root = None))]
    fn new(
        name: &str,
        t: Option<usize>,
        k: Option<usize>,
        formula: Option<String>,
        expected: Option<u64>,
        root: Option<u64>,
    ) -> PyResult<Self> {
        let p = SchemeParams { t, k, formula, expected, root };
        Ok(PyScheme { inner: build_scheme(name, &p).map_err(value_err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name()
    }

    fn strategies(&self) -> Vec<&'static str> {
        self.inner.strategies()
    }

    /// Honest certificates; raises `CannotCertify` on a no-instance.
    #[pyo3(signature = (g, model = None))]
    fn prove(&self, g: PyRef<'_, PyGraph>, model: Option<PyRef<'_, PyModel>>) -> PyResult<PyCerts> {
        let c = self
            .inner
            .prove(&g.inner, model.as_ref().map(|m| &m.inner))
            .map_err(|e| CannotCertify::new_err(e.to_string()))?;
        Ok(PyCerts { inner: c })
    }

    /// `(accepted, rejecting vertex ids)`.
    fn verify(&self, g: PyRef<'_, PyGraph>, certs: PyRef<'_, PyCerts>) -> PyResult<(bool, Vec<u64>)> {
        let v = run_verification(&g.inner, &certs.inner, self.inner.as_ref()).map_err(value_err)?;
        Ok((v.accepted, v.rejecting.iter().map(|x| x.0).collect()))
    }

    /// Number of accepted assignments among all adversaries and `mutations`
    /// mutations of them.
    #[pyo3(signature = (g, mutations = 1000, seed = 0))]
    fn fuzz(&self, py: Python<'_>, g: PyRef<'_, PyGraph>, mutations: usize, seed: u64) -> usize {
        let s = self.inner.as_ref();
        let graph = &g.inner;
        py.detach(|| {
            let bases: Vec<CertMap> =
                adversarial_prover(graph, s, &s.strategies(), seed).into_iter().map(|b| b.1).collect();
            let share = mutations / bases.len().max(1);
            let mut escapes = count_escapes(graph, s, bases.iter().cloned());
            for (i, b) in bases.iter().enumerate() {
                escapes += count_escapes(graph, s, mutate_certs(b, seed.wrapping_add(i as u64), share));
            }
            escapes
        })
    }

    fn __repr__(&self) -> String {
        format!("Scheme({})", self.inner.name())
    }
}

#[pymodule]
fn pyloccert(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Adds every class, function and exception to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyReduction>()?;
    m.add_class::<PyCerts>()?;
    m.add_class::<PyScheme>()?;
    m.add_function(wrap_pyfunction!(treedepth, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(quantifier_depth, m)?)?;
    m.add_function(wrap_pyfunction!(ef_equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(kernelize, m)?)?;
    m.add("CannotCertify", m.py().get_type::<CannotCertify>())?;
    m.add("Undecided", m.py().get_type::<Undecided>())?;
    Ok(())
}
