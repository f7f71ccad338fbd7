//! Python bindings: the `pyafk` extension module.
//!
//! Results with structure (dimensions, verdicts, certificates) come back as
//! plain dicts and lists mirroring the JSON reports of the `afk` CLI; big
//! integers stay Python ints.

use afk_core::colimit::{self, Dimension};
use afk_core::io::{serde_int, DiagramDocument, TailDocument};
use afk_core::kstability::{self, ChainSearch, TelescopeError};
use afk_core::linalg::{self, IntMatrix};
use afk_core::{truncation, BratteliDiagram, LevelProfile, MultiplicityMatrix};
use num_bigint::BigInt;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

create_exception!(pyafk, InconclusiveError, PyRuntimeError, "The analysis could not be completed within the budget.");
create_exception!(pyafk, InfiniteChainError, PyValueError, "An infinite K-chain prevents telescoping.");

const DEFAULT_BUDGET: usize = 64;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match serde_int::from_number(n) {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n
                .as_f64()
                .unwrap_or(f64::NAN)
                .into_pyobject(py)?
                .into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let items = a.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn serialized<'py, T: serde::Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &serde_json::to_value(x).map_err(value_error)?)
}

fn matrix(rows: &[Vec<BigInt>], cols_if_empty: usize) -> PyResult<IntMatrix> {
    let cols = rows.first().map_or(cols_if_empty, Vec::len);
    IntMatrix::from_rows(cols, rows).map_err(value_error)
}

fn matrix_rows(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    m.to_rows()
}

/// A validated Bratteli diagram.
#[pyclass(name = "Diagram", module = "pyafk", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyDiagram {
    inner: BratteliDiagram,
}

impl PyDiagram {
    fn from_document(doc: &DiagramDocument) -> PyResult<Self> {
        Ok(PyDiagram {
            inner: doc.to_diagram().map_err(value_error)?,
        })
    }
}

#[pymethods]
impl PyDiagram {
    /// `levels`: list of size lists; `matrices`: target-major multiplicity
    /// matrices; `tail`/`slack`: optional affine continuation `q' = Φq + s`.
    #[new]
    #[pyo3(signature = (levels, matrices = Vec::new(), tail = None, slack = None))]
    fn new(
        levels: Vec<Vec<BigInt>>,
        matrices: Vec<Vec<Vec<BigInt>>>,
        tail: Option<Vec<Vec<BigInt>>>,
        slack: Option<Vec<BigInt>>,
    ) -> PyResult<Self> {
        let tail = match (tail, slack) {
            (None, None) => None,
            (None, Some(_)) => return Err(PyValueError::new_err("slack given without a tail matrix")),
            (Some(matrix), slack) => {
                let slack = slack.unwrap_or_else(|| vec![BigInt::from(0); matrix.len()]);
                Some(TailDocument { matrix, slack })
            }
        };
        Self::from_document(&DiagramDocument {
            levels,
            matrices,
            tail,
            metadata: None,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Self::from_document(&afk_core::io::parse(text).map_err(value_error)?)
    }

    fn to_json(&self) -> String {
        DiagramDocument::from_diagram(&self.inner).serialize()
    }

    #[getter]
    fn levels(&self) -> Vec<Vec<BigInt>> {
        self.inner.prefix_levels().iter().map(|l| l.sizes().to_vec()).collect()
    }

    #[getter]
    fn matrices(&self) -> Vec<Vec<Vec<BigInt>>> {
        self.inner.prefix_matrices().iter().map(|m| matrix_rows(m.matrix())).collect()
    }

    #[getter]
    fn tail(&self) -> Option<(Vec<Vec<BigInt>>, Vec<BigInt>)> {
        self.inner
            .tail()
            .map(|t| (matrix_rows(t.matrix().matrix()), t.slack().to_vec()))
    }

    #[getter]
    fn is_injective(&self) -> bool {
        self.inner.is_injective()
    }

    #[getter]
    fn is_finite_dimensional(&self) -> bool {
        self.inner.is_finite_dimensional()
    }

    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialized(py, self.inner.report())
    }

    #[pyo3(signature = (m, budget = DEFAULT_BUDGET))]
    fn fm_dimension<'py>(&self, py: Python<'py>, m: u64, budget: usize) -> PyResult<Bound<'py, PyAny>> {
        fm_dimension(py, self, m, budget)
    }

    #[pyo3(signature = (max_m, budget = DEFAULT_BUDGET))]
    fn fm_profile<'py>(&self, py: Python<'py>, max_m: u64, budget: usize) -> PyResult<Bound<'py, PyAny>> {
        fm_profile(py, self, max_m, budget)
    }

    #[pyo3(signature = (budget = DEFAULT_BUDGET))]
    fn k0_dimension<'py>(&self, py: Python<'py>, budget: usize) -> PyResult<Bound<'py, PyAny>> {
        k0_dimension(py, self, budget)
    }

    #[pyo3(signature = (budget = DEFAULT_BUDGET, m_max = kstability::DEFAULT_MAX_STAGE))]
    fn classify<'py>(&self, py: Python<'py>, budget: usize, m_max: u64) -> PyResult<Bound<'py, PyAny>> {
        classify(py, self, budget, m_max)
    }

    /// The smallest infinite K-chain as a dict, or `None` when there is none.
    fn find_infinite_chain<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyAny>>> {
        match kstability::find_infinite_k_chain(&self.inner) {
            ChainSearch::Found(w) => Ok(Some(serialized(py, &w)?)),
            ChainSearch::NoneExists => Ok(None),
            ChainSearch::Inconclusive => Err(InconclusiveError::new_err("the diagram has no tail")),
        }
    }

    #[pyo3(signature = (min_dim, budget = DEFAULT_BUDGET))]
    fn telescope(&self, min_dim: u64, budget: usize) -> PyResult<PyDiagram> {
        telescope(self, min_dim, budget)
    }

    #[pyo3(signature = (degree = None, budget = DEFAULT_BUDGET))]
    fn export_dot(&self, degree: Option<u64>, budget: usize) -> PyResult<String> {
        export_dot(self, degree, budget)
    }

    fn __eq__(&self, other: &PyDiagram) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        let levels: Vec<String> = self
            .inner
            .prefix_levels()
            .iter()
            .map(|l| format!("{:?}", l.sizes().iter().map(ToString::to_string).collect::<Vec<_>>()))
            .collect();
        format!(
            "Diagram(levels={}, tail={})",
            levels.join(" -> ").replace('"', ""),
            if self.inner.tail().is_some() { "yes" } else { "no" }
        )
    }
}

/// Rank of an integer matrix given as a list of rows.
#[pyfunction]
fn rank(rows: Vec<Vec<BigInt>>) -> PyResult<usize> {
    Ok(linalg::rank(&matrix(&rows, 0)?))
}

/// Stabilised rank of the powers of a square integer matrix.
#[pyfunction]
fn eventual_rank(rows: Vec<Vec<BigInt>>) -> PyResult<usize> {
    linalg::eventual_rank(&matrix(&rows, 0)?).map_err(value_error)
}

/// Whether `M_p` contributes a coordinate in degree `m`.
#[pyfunction]
fn contributes(m: u64, p: BigInt) -> bool {
    truncation::contributes(m, &p)
}

/// The degree-`m` truncation of the multiplicity matrix `phi` from a level
/// with sizes `src` to one with sizes `dst`.
#[pyfunction]
fn truncate_map(phi: Vec<Vec<BigInt>>, src: Vec<BigInt>, dst: Vec<BigInt>, m: u64) -> PyResult<Vec<Vec<BigInt>>> {
    let src = LevelProfile::new(src, 1).map_err(value_error)?;
    let dst = LevelProfile::new(dst, 2).map_err(value_error)?;
    let phi = MultiplicityMatrix::new(matrix(&phi, src.len())?).map_err(value_error)?;
    let t = truncation::truncate_map(&phi, &src, &dst, m).map_err(value_error)?;
    Ok(matrix_rows(&t))
}

fn dimension_dict<'py>(py: Python<'py>, dim: &Dimension) -> PyResult<Bound<'py, PyAny>> {
    serialized(py, dim)
}

#[pyfunction]
#[pyo3(signature = (diagram, m, budget = DEFAULT_BUDGET))]
fn fm_dimension<'py>(py: Python<'py>, diagram: &PyDiagram, m: u64, budget: usize) -> PyResult<Bound<'py, PyAny>> {
    if m == 0 {
        return Err(PyValueError::new_err("degree must be at least 1"));
    }
    serialized(py, &colimit::fm_dimension(&diagram.inner, m, budget))
}

#[pyfunction]
#[pyo3(signature = (diagram, max_m, budget = DEFAULT_BUDGET))]
fn fm_profile<'py>(py: Python<'py>, diagram: &PyDiagram, max_m: u64, budget: usize) -> PyResult<Bound<'py, PyAny>> {
    let rows = colimit::fm_profile(&diagram.inner, max_m, budget)
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("m", r.m)?;
            d.set_item("dimension", dimension_dict(py, &r.result.dimension)?)?;
            d.set_item("even_shortcut", r.even_shortcut)?;
            Ok(d.into_any())
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok(PyList::new(py, rows)?.into_any())
}

#[pyfunction]
#[pyo3(signature = (diagram, budget = DEFAULT_BUDGET))]
fn k0_dimension<'py>(py: Python<'py>, diagram: &PyDiagram, budget: usize) -> PyResult<Bound<'py, PyAny>> {
    serialized(py, &colimit::k0_rational_dimension(&diagram.inner, budget))
}

#[pyfunction]
#[pyo3(signature = (diagram, budget = DEFAULT_BUDGET, m_max = kstability::DEFAULT_MAX_STAGE))]
fn classify<'py>(py: Python<'py>, diagram: &PyDiagram, budget: usize, m_max: u64) -> PyResult<Bound<'py, PyAny>> {
    let verdict = kstability::classify(&diagram.inner, budget, m_max).map_err(value_error)?;
    serialized(py, &verdict)
}

#[pyfunction]
#[pyo3(signature = (diagram, min_dim, budget = DEFAULT_BUDGET))]
fn telescope(diagram: &PyDiagram, min_dim: u64, budget: usize) -> PyResult<PyDiagram> {
    match kstability::telescope(&diagram.inner, min_dim, budget) {
        Ok(t) => Ok(PyDiagram { inner: t.diagram }),
        Err(TelescopeError::InfiniteChain(w)) => Err(InfiniteChainError::new_err(format!(
            "an infinite {}-chain starting at level {} blocks min-dim {min_dim}",
            w.k, w.start_level
        ))),
        Err(TelescopeError::Inconclusive(reason)) => Err(InconclusiveError::new_err(reason)),
        Err(e @ TelescopeError::InjectivityRequired) => Err(value_error(e)),
        Err(e @ TelescopeError::Internal(_)) => Err(PyRuntimeError::new_err(e.to_string())),
    }
}

#[pyfunction]
#[pyo3(signature = (diagram, degree = None, budget = DEFAULT_BUDGET))]
fn export_dot(diagram: &PyDiagram, degree: Option<u64>, budget: usize) -> PyResult<String> {
    afk_core::export_dot(&diagram.inner, degree, budget).map_err(value_error)
}

#[pymodule]
fn pyafk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDiagram>()?;
    m.add("InconclusiveError", m.py().get_type::<InconclusiveError>())?;
    m.add("InfiniteChainError", m.py().get_type::<InfiniteChainError>())?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    m.add_function(wrap_pyfunction!(eventual_rank, m)?)?;
    m.add_function(wrap_pyfunction!(contributes, m)?)?;
    m.add_function(wrap_pyfunction!(truncate_map, m)?)?;
    m.add_function(wrap_pyfunction!(fm_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(fm_profile, m)?)?;
    m.add_function(wrap_pyfunction!(k0_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(telescope, m)?)?;
    m.add_function(wrap_pyfunction!(export_dot, m)?)?;
    Ok(())
}
