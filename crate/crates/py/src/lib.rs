//! Python bindings: load diagrams from JSON text, build persistent minimal
//! models, and decompose persistence modules.

use pmm_core::cli_io::{working_cap, InputDocument, ModelDocument, ModuleDocument, DEFAULT_DEGREE_CAP};
use pmm_core::exactla::{format_rational, parse_rational};
use pmm_core::persistence::bar_records;
use pmm_core::pminimal::{build_persistent_minimal_model, presentation, validate_model, PersistentCdga, TameMinimalModel};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

type BarTuple = (usize, String, Option<String>);

fn to_py(e: pmm_core::Error) -> PyErr {
    match e.exit_code() {
        3 => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A persistent CDGA read from the JSON input format.
#[pyclass(module = "pmm")]
struct Diagram {
    doc: InputDocument,
}

#[pymethods]
impl Diagram {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc = InputDocument::from_json(text).map_err(to_py)?;
        doc.load(working_cap(doc.degree_cap.unwrap_or(DEFAULT_DEGREE_CAP))).map_err(to_py)?;
        Ok(Diagram { doc })
    }

    #[getter]
    fn grid(&self) -> Vec<String> {
        self.doc.grid.clone()
    }

    /// Persistent minimal model through `degree_cap`.
    #[pyo3(signature = (degree_cap=None))]
    fn build(&self, degree_cap: Option<usize>) -> PyResult<Model> {
        let cap = degree_cap.or(self.doc.degree_cap).unwrap_or(DEFAULT_DEGREE_CAP);
        let input = self.doc.load(working_cap(cap)).map_err(to_py)?;
        let model = build_persistent_minimal_model(&input, cap).map_err(to_py)?;
        Ok(Model { doc: self.doc.clone(), input, model })
    }

    fn __repr__(&self) -> String {
        format!("Diagram(grid={:?})", self.doc.grid)
    }
}

#[pyclass(module = "pmm")]
struct Model {
    doc: InputDocument,
    input: PersistentCdga,
    model: TameMinimalModel,
}

#[pymethods]
impl Model {
    /// `(degree, birth, death)` per generator; `death` is `None` for bars that never end.
    fn barcode(&self) -> Vec<BarTuple> {
        bar_records(&self.input.grid, &self.model.homotopy_barcode())
            .into_iter()
            .map(|b| (b.degree, b.birth, b.death))
            .collect()
    }

    #[pyo3(signature = (verbose=false))]
    fn presentation(&self, verbose: bool) -> String {
        presentation(&self.model, verbose).to_text()
    }

    /// Validation report as JSON text.
    fn report(&self) -> String {
        serde_json::to_string(&validate_model(&self.model, &self.input)).expect("serializable")
    }

    fn passed(&self) -> bool {
        validate_model(&self.model, &self.input).passed
    }

    /// Saved-model JSON, readable by `pmm check`.
    fn to_json(&self) -> String {
        ModelDocument::from_model(&self.model, &self.input, &self.doc).to_json()
    }

    fn __repr__(&self) -> String {
        format!("Model(generators={}, degree={})", self.model.generators.len(), self.model.degree)
    }
}

/// Barcode of a persistence module given in the JSON module format.
#[pyfunction]
fn decompose(text: &str) -> PyResult<Vec<BarTuple>> {
    let doc: ModuleDocument = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let m = doc.load().map_err(to_py)?;
    let dec = m.decompose(doc.degree);
    Ok(bar_records(&m.grid, &dec.bars).into_iter().map(|b| (b.degree, b.birth, b.death)).collect())
}

/// Normal form of a rational number string, e.g. `"6/4"` becomes `"3/2"`.
#[pyfunction]
fn normalize_rational(text: &str) -> PyResult<String> {
    parse_rational(text)
        .map(|r| format_rational(&r))
        .ok_or_else(|| PyValueError::new_err(format!("'{text}' is not a rational number")))
}

#[pymodule]
fn pmm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Diagram>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_rational, m)?)?;
    Ok(())
}
