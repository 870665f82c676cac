use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use drgcert::certify::{self, Bases, CertifyOptions, CheckList, DrgOutcome, Family, IntersectionArray, SrgOutcome};
use drgcert::graph::{self, Side};
use drgcert::zgraph::{self, ZVertex};
use drgcert::{quadgeom, Elem};

fn err(e: drgcert::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Simple undirected graph on vertices `0..n`.
#[pyclass(name = "Graph", module = "drgcert", frozen)]
struct PyGraph {
    inner: drgcert::Graph,
}

impl PyGraph {
    fn wrap(inner: drgcert::Graph) -> Self {
        PyGraph { inner }
    }

    fn check_vertex(&self, v: usize) -> PyResult<()> {
        if v >= self.inner.n() {
            return Err(PyIndexError::new_err(format!("vertex {v} out of range")));
        }
        Ok(())
    }
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (n, edges = Vec::new()))]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        drgcert::Graph::new(n, &edges).map(Self::wrap).map_err(err)
    }

    #[staticmethod]
    fn from_graph6(data: &str) -> PyResult<Self> {
        graph::graph6_decode(data.as_bytes()).map(Self::wrap).map_err(err)
    }

    fn to_graph6(&self) -> String {
        String::from_utf8(graph::graph6_encode(&self.inner)).expect("graph6 is ASCII")
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, edges={})", self.inner.n(), self.inner.edge_count())
    }

    fn __eq__(&self, other: &PyGraph) -> bool {
        self.inner.n() == other.inner.n() && self.inner.edges().eq(other.inner.edges())
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<u32>> {
        self.check_vertex(v)?;
        Ok(self.inner.neighbors(v).to_vec())
    }

    fn degree(&self, v: usize) -> PyResult<usize> {
        self.check_vertex(v)?;
        Ok(self.inner.degree(v))
    }

    fn has_edge(&self, u: usize, v: usize) -> PyResult<bool> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        Ok(self.inner.has_edge(u, v))
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn labels(&self) -> Option<Vec<String>> {
        self.inner.labels().map(<[String]>::to_vec)
    }

    fn regular_degree(&self) -> Option<usize> {
        self.inner.regular_degree()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    /// Sizes of the distance classes around `base`.
    fn distance_classes(&self, base: usize) -> PyResult<Vec<usize>> {
        self.check_vertex(base)?;
        Ok(graph::bfs_partition(&self.inner, base).class_sizes)
    }

    fn distances(&self, base: usize) -> PyResult<Vec<Option<u32>>> {
        self.check_vertex(base)?;
        let p = graph::bfs_partition(&self.inner, base);
        Ok(p.dist.iter().map(|&d| (d != graph::UNREACHABLE).then_some(d)).collect())
    }
}

/// Arithmetic in GF(q) on integer-encoded elements.
#[pyclass(name = "GF", module = "drgcert", frozen)]
struct PyField {
    inner: drgcert::Field,
}

impl PyField {
    fn elem(&self, a: u32) -> PyResult<Elem> {
        if a >= self.inner.order() {
            return Err(PyValueError::new_err(format!("{a} is not an element of GF({})", self.inner.order())));
        }
        Ok(Elem(a))
    }
}

#[pymethods]
impl PyField {
    #[new]
    fn new(q: u64) -> PyResult<Self> {
        drgcert::Field::new(q).map(|inner| PyField { inner }).map_err(err)
    }

    #[getter]
    fn order(&self) -> u32 {
        self.inner.order()
    }

    #[getter]
    fn characteristic(&self) -> u32 {
        self.inner.characteristic()
    }

    #[getter]
    fn modulus(&self) -> String {
        self.inner.modulus_string()
    }

    fn add(&self, a: u32, b: u32) -> PyResult<u32> {
        Ok(self.inner.add(self.elem(a)?, self.elem(b)?).0)
    }

    fn sub(&self, a: u32, b: u32) -> PyResult<u32> {
        Ok(self.inner.sub(self.elem(a)?, self.elem(b)?).0)
    }

    fn mul(&self, a: u32, b: u32) -> PyResult<u32> {
        Ok(self.inner.mul(self.elem(a)?, self.elem(b)?).0)
    }

    fn neg(&self, a: u32) -> PyResult<u32> {
        Ok(self.inner.neg(self.elem(a)?).0)
    }

    fn inv(&self, a: u32) -> PyResult<u32> {
        self.inner.inv(self.elem(a)?).map(|x| x.0).map_err(err)
    }

    fn pow(&self, a: u32, n: u64) -> PyResult<u32> {
        Ok(self.inner.pow(self.elem(a)?, n).0)
    }

    fn __repr__(&self) -> String {
        format!("GF({})", self.inner.order())
    }
}

#[pyfunction]
fn build_z(q: u64) -> PyResult<PyGraph> {
    zgraph::build_z(q).map(PyGraph::wrap).map_err(err)
}

#[pyfunction]
fn dual_polar_b3(q: u64) -> PyResult<PyGraph> {
    quadgeom::dual_polar_b3(q).map(PyGraph::wrap).map_err(err)
}

#[pyfunction]
fn dual_polar_d4(q: u64) -> PyResult<PyGraph> {
    quadgeom::dual_polar_d4(q).map(PyGraph::wrap).map_err(err)
}

#[pyfunction]
fn far_from_vertex_b3(q: u64) -> PyResult<PyGraph> {
    quadgeom::far_from_vertex_b3(q).map(PyGraph::wrap).map_err(err)
}

#[pyfunction]
fn far_from_edge_d4(q: u64) -> PyResult<PyGraph> {
    quadgeom::far_from_edge_d4(q).map(PyGraph::wrap).map_err(err)
}

#[pyfunction]
fn bipartite_double(g: &PyGraph) -> PyGraph {
    PyGraph::wrap(graph::bipartite_double(&g.inner))
}

#[pyfunction]
fn extended_bipartite_double(g: &PyGraph) -> PyGraph {
    PyGraph::wrap(graph::extended_bipartite_double(&g.inner))
}

#[pyfunction]
#[pyo3(signature = (g, side = "plus"))]
fn halved_graph(g: &PyGraph, side: &str) -> PyResult<PyGraph> {
    let side = match side {
        "plus" => Side::Plus,
        "minus" => Side::Minus,
        s => return Err(PyValueError::new_err(format!("side must be 'plus' or 'minus', got {s:?}"))),
    };
    let inner = match g.inner.bipartition() {
        Some(_) => g.inner.clone(),
        None => g.inner.clone().with_detected_bipartition().map_err(err)?,
    };
    graph::halved_graph(&inner, side).map(PyGraph::wrap).map_err(err)
}

#[pyfunction]
fn distance_1_or_2(g: &PyGraph) -> PyGraph {
    PyGraph::wrap(graph::distance_1_or_2(&g.inner))
}

#[pyfunction]
fn complement(g: &PyGraph) -> PyGraph {
    PyGraph::wrap(graph::complement(&g.inner))
}

fn bases(sample: Option<usize>) -> Bases {
    sample.map_or(Bases::All, Bases::Sample)
}

/// Returns a dict with `regular`, and either `array = (b, c)` or `witness`.
#[pyfunction]
#[pyo3(signature = (g, sample = None))]
fn check_distance_regular<'py>(py: Python<'py>, g: &PyGraph, sample: Option<usize>) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    match py.detach(|| certify::check_distance_regular(&g.inner, bases(sample))).map_err(err)? {
        DrgOutcome::Regular { array, bases_checked } => {
            out.set_item("regular", true)?;
            out.set_item("array", (array.b, array.c))?;
            out.set_item("bases_checked", bases_checked)?;
        }
        DrgOutcome::Refuted(w) => {
            out.set_item("regular", false)?;
            let wd = PyDict::new(py);
            wd.set_item("base", w.base)?;
            wd.set_item("vertex", w.vertex)?;
            wd.set_item("distance", w.distance)?;
            wd.set_item("expected", w.expected)?;
            wd.set_item("found", w.found)?;
            out.set_item("witness", wd)?;
        }
    }
    Ok(out)
}

/// `[(theta, multiplicity), ...]` for the array `{b; c}` on `n` vertices.
#[pyfunction]
fn drg_spectrum(b: Vec<u64>, c: Vec<u64>, n: u64) -> PyResult<Vec<(i64, u64)>> {
    let ia = IntersectionArray::new(b, c).map_err(err)?;
    certify::drg_spectrum(&ia, n).map(|s| s.pairs).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (g, theta, limit = certify::DEFAULT_RANK_LIMIT))]
fn multiplicity_by_rank(py: Python<'_>, g: &PyGraph, theta: i64, limit: usize) -> PyResult<u64> {
    py.detach(|| certify::multiplicity_by_rank(&g.inner, theta, limit)).map_err(err)
}

/// `(v, k, lambda, mu)`, or None when the graph is not strongly regular.
#[pyfunction]
fn check_srg(py: Python<'_>, g: &PyGraph) -> PyResult<Option<(u64, u64, u64, u64)>> {
    if g.inner.n() < 2 {
        return Err(PyValueError::new_err("need at least two vertices"));
    }
    Ok(match py.detach(|| certify::check_srg(&g.inner)) {
        SrgOutcome::Strong(p) => Some((p.v, p.k, p.lambda, p.mu)),
        SrgOutcome::Refuted { .. } => None,
    })
}

fn parse_family(name: &str) -> PyResult<Family> {
    Family::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown family {name:?}")))
}

/// Closed-form parameters as a JSON string.
#[pyfunction]
fn expected_params(family: &str, q: u64) -> PyResult<String> {
    let fam = parse_family(family)?;
    drgcert::Field::new(q).map_err(err)?;
    Ok(serde_json::to_string(&certify::expected_params(fam, q)).expect("serializable"))
}

/// Full certification report as a JSON string. `expect` is `"family:q"`.
#[pyfunction]
#[pyo3(signature = (g, source = "", expect = None, sample = None))]
fn certify_graph(py: Python<'_>, g: &PyGraph, source: &str, expect: Option<&str>, sample: Option<usize>) -> PyResult<String> {
    let expected = match expect {
        None => None,
        Some(s) => {
            let (fam, q) = s
                .split_once(':')
                .ok_or_else(|| PyValueError::new_err("expect takes 'family:q'"))?;
            let q: u64 = q.parse().map_err(|_| PyValueError::new_err(format!("bad q in {s:?}")))?;
            drgcert::Field::new(q).map_err(err)?;
            Some(certify::expected_params(parse_family(fam)?, q))
        }
    };
    let opts = CertifyOptions {
        bases: bases(sample),
        ..CertifyOptions::default()
    };
    let report = py.detach(|| {
        let mut r = certify::certify_graph(&g.inner, source, opts);
        if let Some(e) = &expected {
            let cmp = certify::compare_expected(&r, e);
            r.checks.extend(cmp);
        }
        r
    });
    Ok(serde_json::to_string(&report).expect("serializable"))
}

fn check_tuples(list: CheckList) -> Vec<(String, bool, Option<String>)> {
    list.checks.into_iter().map(|c| (c.name, c.pass, c.witness)).collect()
}

/// `[(name, passed, witness), ...]`
#[pyfunction]
fn verify_prop32_iso(py: Python<'_>, q: u64) -> PyResult<Vec<(String, bool, Option<String>)>> {
    py.detach(|| zgraph::verify_prop32_iso(q)).map(check_tuples).map_err(err)
}

#[pyfunction]
fn reflection_quotient_check(py: Python<'_>, q: u64) -> PyResult<Vec<(String, bool, Option<String>)>> {
    py.detach(|| quadgeom::reflection_quotient_check(q)).map(check_tuples).map_err(err)
}

/// Distance of `(u, u')` from the origin in Z, from the coordinates alone.
#[pyfunction]
fn z_distance_class(q: u64, u: [u32; 3], up: [u32; 3]) -> PyResult<u8> {
    let f = drgcert::Field::new(q).map_err(err)?;
    if u.iter().chain(&up).any(|&x| x >= f.order()) {
        return Err(PyValueError::new_err("coordinate outside the field"));
    }
    Ok(zgraph::z_distance_class(&f, &ZVertex::new(u.map(Elem), up.map(Elem))))
}

#[pymodule]
#[pyo3(name = "drgcert")]
fn drgcert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(build_z, m)?)?;
    m.add_function(wrap_pyfunction!(dual_polar_b3, m)?)?;
    m.add_function(wrap_pyfunction!(dual_polar_d4, m)?)?;
    m.add_function(wrap_pyfunction!(far_from_vertex_b3, m)?)?;
    m.add_function(wrap_pyfunction!(far_from_edge_d4, m)?)?;
    m.add_function(wrap_pyfunction!(bipartite_double, m)?)?;
    m.add_function(wrap_pyfunction!(extended_bipartite_double, m)?)?;
    m.add_function(wrap_pyfunction!(halved_graph, m)?)?;
    m.add_function(wrap_pyfunction!(distance_1_or_2, m)?)?;
    m.add_function(wrap_pyfunction!(complement, m)?)?;
    m.add_function(wrap_pyfunction!(check_distance_regular, m)?)?;
    m.add_function(wrap_pyfunction!(drg_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(multiplicity_by_rank, m)?)?;
    m.add_function(wrap_pyfunction!(check_srg, m)?)?;
    m.add_function(wrap_pyfunction!(expected_params, m)?)?;
    m.add_function(wrap_pyfunction!(certify_graph, m)?)?;
    m.add_function(wrap_pyfunction!(verify_prop32_iso, m)?)?;
    m.add_function(wrap_pyfunction!(reflection_quotient_check, m)?)?;
    m.add_function(wrap_pyfunction!(z_distance_class, m)?)?;
    Ok(())
}
