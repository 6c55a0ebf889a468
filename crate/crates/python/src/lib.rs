//! Python bindings. Reports cross the boundary as plain dicts and lists
//! (decoded from the library's JSON reports), matrices as nested lists.

use std::path::Path;

use nalgebra::{Matrix6, Vector3, Vector6};
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

use ::pkm_stiffness::link::{beam_compliance as beam_compliance_rs, BeamSpec, Section};
use ::pkm_stiffness::model::{Model as ModelRs, ModelDocument, ParamsDoc};
use ::pkm_stiffness::orthoglide::{self, Architecture, AssemblyMode};
use ::pkm_stiffness::study::{self, GridSpec, ValidateOptions};
use ::pkm_stiffness::{Error, Wrench};

create_exception!(pkm_stiffness, StiffnessError, PyValueError);
create_exception!(pkm_stiffness, OutOfWorkspaceError, StiffnessError);
create_exception!(pkm_stiffness, NumericalError, PyArithmeticError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::OutOfWorkspace { .. } => OutOfWorkspaceError::new_err(e.to_string()),
        Error::Numerical(_) | Error::LoadedInstability { .. } | Error::SingularStiffness { .. } => {
            NumericalError::new_err(e.to_string())
        }
        _ => StiffnessError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| StiffnessError::new_err(e.to_string()))
}

fn matrix_rows(m: &Matrix6<f64>) -> Vec<Vec<f64>> {
    (0..6).map(|i| (0..6).map(|j| m[(i, j)]).collect()).collect()
}

fn to_point(p: Option<[f64; 3]>) -> Option<Vector3<f64>> {
    p.map(Vector3::from)
}

/// Orthoglide parameter set (mm, N, rad). Unset values keep the defaults.
#[pyclass(name = "OrthoglideParams", from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: ParamsDoc,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (leg_length=None, foot_length=None, parallelogram_width=None, actuator_stiffness=None, assembly_mode=None))]
    fn new(
        leg_length: Option<f64>,
        foot_length: Option<f64>,
        parallelogram_width: Option<f64>,
        actuator_stiffness: Option<f64>,
        assembly_mode: Option<&str>,
    ) -> PyResult<Self> {
        let mut p = ParamsDoc::default();
        if let Some(l) = leg_length {
            p.leg_length = l;
            p.bar.length = l;
        }
        if let Some(f) = foot_length {
            p.foot.length = f;
        }
        if let Some(d) = parallelogram_width {
            p.parallelogram_width = d;
        }
        if let Some(k) = actuator_stiffness {
            p.actuator_stiffness = k;
        }
        if let Some(m) = assembly_mode {
            p.assembly_mode = match m {
                "rail_behind" => AssemblyMode::RailBehind,
                "rail_ahead" => AssemblyMode::RailAhead,
                _ => return Err(StiffnessError::new_err(format!("unknown assembly mode '{m}'"))),
            };
        }
        p.to_params(Path::new(".")).map_err(to_py)?;
        Ok(Self { inner: p })
    }

    /// Parses the `params` object of a model document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: ParamsDoc = serde_json::from_str(text).map_err(|e| StiffnessError::new_err(e.to_string()))?;
        inner.to_params(Path::new(".")).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.inner)
    }

    #[getter]
    fn leg_length(&self) -> f64 {
        self.inner.leg_length
    }

    #[getter]
    fn foot_length(&self) -> f64 {
        self.inner.foot.length
    }

    #[getter]
    fn parallelogram_width(&self) -> f64 {
        self.inner.parallelogram_width
    }

    #[getter]
    fn actuator_stiffness(&self) -> f64 {
        self.inner.actuator_stiffness
    }

    fn __repr__(&self) -> String {
        format!(
            "OrthoglideParams(leg_length={}, foot_length={}, parallelogram_width={}, actuator_stiffness={})",
            self.inner.leg_length, self.inner.foot.length, self.inner.parallelogram_width, self.inner.actuator_stiffness
        )
    }
}

impl PyParams {
    fn params(&self) -> PyResult<orthoglide::OrthoglideParams> {
        self.inner.to_params(Path::new(".")).map_err(to_py)
    }
}

/// A manipulator model: an Orthoglide builder or explicit chains.
#[pyclass(name = "Model", skip_from_py_object)]
struct PyModel {
    inner: ModelRs,
}

fn architecture(name: &str) -> PyResult<Architecture> {
    name.parse().map_err(to_py)
}

#[pymethods]
impl PyModel {
    /// Reads a schema-v1 model file.
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let path = Path::new(path);
        let doc = ModelDocument::read(path).map_err(to_py)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Ok(Self {
            inner: doc.build(base).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (text, base_dir="."))]
    fn from_json(text: &str, base_dir: &str) -> PyResult<Self> {
        let doc = ModelDocument::from_json(text).map_err(to_py)?;
        Ok(Self {
            inner: doc.build(Path::new(base_dir)).map_err(to_py)?,
        })
    }

    /// `architecture` is "3-PUU" or "3-PRPaR".
    #[staticmethod]
    #[pyo3(signature = (architecture_name, params=None))]
    fn orthoglide(architecture_name: &str, params: Option<PyParams>) -> PyResult<Self> {
        let doc = ModelDocument::builder(
            architecture(architecture_name)?,
            params.map(|p| p.inner).unwrap_or_default(),
        );
        Ok(Self {
            inner: doc.build(Path::new(".")).map_err(to_py)?,
        })
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    /// Full report at `point` (mm) under an optional 6-component `load`.
    #[pyo3(signature = (point=None, load=None))]
    fn evaluate<'py>(
        &self,
        py: Python<'py>,
        point: Option<[f64; 3]>,
        load: Option<[f64; 6]>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let w = load.map(|l| Wrench::from_vector(&Vector6::from(l)));
        let r = study::evaluate_point(&self.inner, to_point(point).as_ref(), w.as_ref()).map_err(to_py)?;
        json_to_py(py, &to_json(&r)?)
    }

    /// 6×6 Cartesian stiffness at `point` as nested lists.
    #[pyo3(signature = (point=None, load=None))]
    fn stiffness(&self, point: Option<[f64; 3]>, load: Option<[f64; 6]>) -> PyResult<Vec<Vec<f64>>> {
        let w = load.map(|l| Wrench::from_vector(&Vector6::from(l)));
        let posed = self.inner.evaluate(to_point(point).as_ref(), w.as_ref()).map_err(to_py)?;
        Ok(matrix_rows(&posed.stiffness.k_total))
    }

    /// Rows for a "xmin:xmax:n,ymin:ymax:n,zmin:zmax:n" grid.
    #[pyo3(signature = (grid, full=false))]
    fn sweep<'py>(&self, py: Python<'py>, grid: &str, full: bool) -> PyResult<Bound<'py, PyAny>> {
        let g: GridSpec = grid.parse().map_err(to_py)?;
        let rows = py.detach(|| study::sweep(&self.inner, &g.points(), full)).map_err(to_py)?;
        json_to_py(py, &to_json(&rows)?)
    }

    #[pyo3(signature = (seed=0, postures=50, fd_step=1e-6))]
    fn validate<'py>(&self, py: Python<'py>, seed: u64, postures: usize, fd_step: f64) -> PyResult<Bound<'py, PyAny>> {
        let opts = ValidateOptions {
            seed,
            postures,
            fd_step,
            fd_sweep: false,
        };
        let r = py.detach(|| study::validate(&self.inner, &opts)).map_err(to_py)?;
        json_to_py(py, &to_json(&r)?)
    }
}

/// Rows pairing two models at each point, with stiffness ratios.
#[pyfunction]
fn compare<'py>(py: Python<'py>, a: &PyModel, b: &PyModel, points: Vec<[f64; 3]>) -> PyResult<Bound<'py, PyAny>> {
    let pts: Vec<Vector3<f64>> = points.into_iter().map(Vector3::from).collect();
    let rows = study::compare(&a.inner, &b.inner, &pts).map_err(to_py)?;
    json_to_py(py, &to_json(&rows)?)
}

/// Cantilever compliance of a straight beam along x; give either `width`
/// and `height` or `diameter`.
#[pyfunction]
#[pyo3(signature = (length, elastic_modulus, shear_modulus, width=None, height=None, diameter=None))]
fn beam_compliance(
    length: f64,
    elastic_modulus: f64,
    shear_modulus: f64,
    width: Option<f64>,
    height: Option<f64>,
    diameter: Option<f64>,
) -> PyResult<Vec<Vec<f64>>> {
    let section = match (width, height, diameter) {
        (Some(width), Some(height), None) => Section::Rectangle { width, height },
        (None, None, Some(diameter)) => Section::Circle { diameter },
        _ => return Err(StiffnessError::new_err("give width and height, or diameter")),
    };
    let spec = BeamSpec {
        length,
        elastic_modulus,
        shear_modulus,
        section,
    };
    Ok(matrix_rows(beam_compliance_rs(&spec).map_err(to_py)?.matrix()))
}

#[pyfunction]
#[pyo3(signature = (q2, params=None))]
fn parallelogram_compliance(q2: f64, params: Option<PyParams>) -> PyResult<Vec<Vec<f64>>> {
    let p = params.map(|p| p.params()).transpose()?.unwrap_or_default();
    Ok(matrix_rows(orthoglide::parallelogram_compliance(&p, q2).map_err(to_py)?.matrix()))
}

/// Per-chain `(rho, q1, q2, discriminant)` for a platform position.
#[pyfunction]
#[pyo3(signature = (point, params=None))]
fn inverse_kinematics(point: [f64; 3], params: Option<PyParams>) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let p = params.map(|p| p.params()).transpose()?.unwrap_or_default();
    let ik = orthoglide::inverse_kinematics(&p, &Vector3::from(point)).map_err(to_py)?;
    Ok(ik.chains.iter().map(|c| (c.rho, c.q1, c.q2, c.discriminant)).collect())
}

#[pymodule]
#[pyo3(name = "pkm_stiffness")]
pub fn pkm_stiffness_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(beam_compliance, m)?)?;
    m.add_function(wrap_pyfunction!(parallelogram_compliance, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_kinematics, m)?)?;
    m.add("StiffnessError", m.py().get_type::<StiffnessError>())?;
    m.add("OutOfWorkspaceError", m.py().get_type::<OutOfWorkspaceError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add("TABLE_POINTS", orthoglide::table_points().map(|p| [p.x, p.y, p.z]).to_vec())?;
    Ok(())
}
