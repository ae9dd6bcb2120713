use hsbif::closed_forms::{self, RadialKind};
use hsbif::continuation::{self, NehariOptions, SwitchOptions, TraceOptions};
use hsbif::params;
use hsbif::pde2d::{self, Cone, Discretization, Field2D, Grid2D, Profile};
use hsbif::spectral::{self, SpectrumOptions};
use hsbif::{Error, SymmetryClass};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};
use serde_json::Value;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::InvalidArgument(_) | Error::Parse(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(a) => {
            let l = PyList::empty(py);
            for x in a {
                l.append(to_py(py, x)?)?;
            }
            l.into_any()
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

fn ser<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &value)
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

/// Problem parameters `(N, s, gamma)`.
#[pyclass(name = "ProblemParams", frozen)]
struct PyParams(hsbif::ProblemParams);

#[pymethods]
impl PyParams {
    #[new]
    fn new(n: u32, s: f64, gamma: f64) -> PyResult<Self> {
        hsbif::ProblemParams::new(n, s, gamma).map(Self).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> u32 {
        self.0.n
    }

    #[getter]
    fn s(&self) -> f64 {
        self.0.s
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma
    }

    fn constants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        ser(py, &self.0.constants())
    }

    fn gamma_j(&self, j: u32) -> f64 {
        self.0.gamma_j(j)
    }

    fn lambda1_rad(&self) -> f64 {
        self.0.lambda1_rad()
    }

    #[pyo3(signature = (symmetry = "full"))]
    fn morse_index(&self, symmetry: &str) -> PyResult<u128> {
        params::morse_index_symmetric(&self.0, parse::<SymmetryClass>(symmetry)?).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("ProblemParams(n={}, s={}, gamma={})", self.0.n, self.0.s, self.0.gamma)
    }
}

/// Field on the `(t, theta)` grid in Emden-Fowler variables.
#[pyclass(name = "Field", frozen)]
struct PyField(Field2D);

#[pymethods]
impl PyField {
    /// `(M_t, M_theta)`.
    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.grid.mt, self.0.grid.mth)
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.params.gamma
    }

    fn t(&self) -> Vec<f64> {
        (0..self.0.grid.mt).map(|i| self.0.grid.t(i)).collect()
    }

    fn theta(&self) -> Vec<f64> {
        (0..self.0.grid.mth).map(|j| self.0.grid.theta(j)).collect()
    }

    /// Row-major values, one list per `t` node.
    fn values(&self) -> Vec<Vec<f64>> {
        (0..self.0.grid.mt).map(|i| self.0.row(i).to_vec()).collect()
    }

    fn sup_norm(&self) -> f64 {
        self.0.sup_norm()
    }

    fn sup_distance(&self, other: &PyField) -> f64 {
        self.0.sup_distance(&other.0)
    }

    fn kelvin_defect(&self) -> f64 {
        self.0.kelvin_defect()
    }

    fn theta_defect(&self) -> f64 {
        self.0.theta_defect()
    }

    fn reflect_theta(&self) -> PyField {
        PyField(self.0.reflect_theta())
    }

    fn decay_rate(&self) -> f64 {
        pde2d::decay_rate(&self.0)
    }

    /// Residual sup-norm of the discrete equation.
    fn residual(&self) -> PyResult<f64> {
        Discretization::new(&self.0.params, self.0.grid)
            .and_then(|d| d.residual_norm(&self.0))
            .map_err(py_err)
    }

    fn cone_check<'py>(&self, py: Python<'py>, cone: &str) -> PyResult<Bound<'py, PyAny>> {
        ser(py, &pde2d::cone_check(&self.0, parse(cone)?, pde2d::CONE_TOL))
    }

    fn energy<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let d = Discretization::new(&self.0.params, self.0.grid).map_err(py_err)?;
        ser(py, &continuation::energy_f(&d, &self.0))
    }
}

fn grid_for(p: &hsbif::ProblemParams, profile: &str) -> PyResult<Grid2D> {
    Ok(Grid2D::for_profile(p, parse::<Profile>(profile)?))
}

#[pyfunction]
fn gamma_j(n: u32, s: f64, j: u32) -> PyResult<f64> {
    params::gamma_j(n, s, j).map_err(py_err)
}

#[pyfunction]
fn mu_j(n: u32, j: u32) -> f64 {
    params::mu_j(n, j)
}

#[pyfunction]
fn harmonic_multiplicity(n: u32, j: u32) -> PyResult<u128> {
    params::harmonic_multiplicity(n, j).map_err(py_err)
}

/// Closed-form radial profile: kind is `u`, `z` or `v`.
#[pyfunction]
#[pyo3(signature = (kind, params, r, lam = 1.0))]
fn eval_radial(kind: &str, params: &PyParams, r: f64, lam: f64) -> PyResult<f64> {
    let k = match kind.to_ascii_lowercase().as_str() {
        "u" => RadialKind::ULambda(lam),
        "z" => RadialKind::Z,
        "v" => RadialKind::VOneDim,
        _ => return Err(PyValueError::new_err(format!("unknown radial kind '{kind}'"))),
    };
    closed_forms::eval_radial(k, &params.0, r).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (params, j_max = None, m = 2000))]
fn singular_spectrum<'py>(
    py: Python<'py>,
    params: &PyParams,
    j_max: Option<u32>,
    m: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = SpectrumOptions {
        m,
        ..SpectrumOptions::default()
    };
    let j_max = j_max.unwrap_or_else(|| spectral::default_j_max(&params.0));
    let r = spectral::singular_spectrum(&params.0, j_max, &opts).map_err(py_err)?;
    ser(py, &r)
}

#[pyfunction]
#[pyo3(signature = (n, s, lo, hi, j, m = 2000))]
fn locate_degeneracies(n: u32, s: f64, lo: f64, hi: f64, j: u32, m: usize) -> PyResult<Vec<f64>> {
    let opts = SpectrumOptions {
        m,
        ..SpectrumOptions::default()
    };
    spectral::locate_degeneracies(n, s, (lo, hi), j, &opts).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (params, profile = "coarse"))]
fn radial_solution(params: &PyParams, profile: &str) -> PyResult<PyField> {
    let d = Discretization::new(&params.0, grid_for(&params.0, profile)?).map_err(py_err)?;
    d.radial_solution().map(PyField).map_err(py_err)
}

/// Branch switch at `gamma_j` into `cone` and Newton correction below it.
/// Returns `(summary, field)`.
#[pyfunction]
#[pyo3(signature = (n, s, cone, profile = "coarse", eps = 0.05))]
fn switch_and_correct<'py>(
    py: Python<'py>,
    n: u32,
    s: f64,
    cone: &str,
    profile: &str,
    eps: f64,
) -> PyResult<(Bound<'py, PyAny>, PyField)> {
    let cone: Cone = parse(cone)?;
    let p = hsbif::ProblemParams::new(n, s, params::gamma_j(n, s, cone.degree()).map_err(py_err)?)
        .map_err(py_err)?;
    let opts = SwitchOptions {
        eps,
        ..SwitchOptions::default()
    };
    let r = continuation::switch_and_correct(n, s, grid_for(&p, profile)?, cone, &opts).map_err(py_err)?;
    let summary = serde_json::json!({
        "gamma_j": r.gamma_j,
        "gamma_h": r.gamma_h,
        "gamma": r.gamma,
        "amplitude": r.amplitude,
        "deflated": r.deflated,
        "non_radial": r.non_radial,
        "cone": r.cone,
        "newton": r.report,
    });
    Ok((to_py(py, &summary)?, PyField(r.field)))
}

/// Trace the branch through `start` in `cone` down to `gamma_min`.
#[pyfunction]
#[pyo3(signature = (start, cone, gamma_min, max_points = 400))]
fn trace_branch<'py>(
    py: Python<'py>,
    start: &PyField,
    cone: &str,
    gamma_min: f64,
    max_points: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let d = Discretization::new(&start.0.params, start.0.grid).map_err(py_err)?;
    let opts = TraceOptions {
        gamma_min,
        max_points,
        ..TraceOptions::default()
    };
    let rec = continuation::trace_branch(&d, &start.0, parse(cone)?, &opts).map_err(py_err)?;
    ser(py, &rec)
}

#[pyfunction]
#[pyo3(signature = (params, symmetry = "axial", profile = "coarse"))]
fn nehari_minimize<'py>(
    py: Python<'py>,
    params: &PyParams,
    symmetry: &str,
    profile: &str,
) -> PyResult<(Bound<'py, PyAny>, Option<PyField>)> {
    let class: SymmetryClass = parse(symmetry)?;
    let grid = grid_for(&params.0, profile)?;
    let d = Discretization::new(&params.0, grid).map_err(py_err)?;
    let degree = if class == SymmetryClass::AxialEven { 2 } else { 1 };
    let r = Field2D::radial(&params.0, grid);
    let k = Field2D::kernel(&params.0, grid, degree);
    let mut init = r.axpy(0.3 * r.sup_norm() / k.sup_norm(), &k);
    init.theta_even = degree == 2;
    let mut res = continuation::nehari_minimize(&d, class, &init, &NehariOptions::default()).map_err(py_err)?;
    let field = res.field.take().map(PyField);
    Ok((ser(py, &res)?, field))
}

#[pymodule]
fn pyhsbif(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", hsbif::VERSION)?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(gamma_j, m)?)?;
    m.add_function(wrap_pyfunction!(mu_j, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_multiplicity, m)?)?;
    m.add_function(wrap_pyfunction!(eval_radial, m)?)?;
    m.add_function(wrap_pyfunction!(singular_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(locate_degeneracies, m)?)?;
    m.add_function(wrap_pyfunction!(radial_solution, m)?)?;
    m.add_function(wrap_pyfunction!(switch_and_correct, m)?)?;
    m.add_function(wrap_pyfunction!(trace_branch, m)?)?;
    m.add_function(wrap_pyfunction!(nehari_minimize, m)?)?;
    Ok(())
}
