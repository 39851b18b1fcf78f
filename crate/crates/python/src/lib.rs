//! Python bindings: geometry, polynomial spaces, constraint operators,
//! constants and certification. Reports come back as plain dicts.

use nalgebra::{DMatrix, DVector};
use poincare_korn::constants::{self as k, BoundCase, BoundInputs};
use poincare_korn::geometry::{self as geo, parse_mesh, write_mesh};
use poincare_korn::operators::matrix_operator_norm;
use poincare_korn::verify::{counterexample_flat, injectivity_report, random_trials, sup_ratio};
use poincare_korn::{
    BoundaryPortion as CorePortion, CaseKind, CertifySetup, ConstantKind, Domain as CoreDomain, Form, NormKind,
    NullKind, PolySpace as CoreSpace, ProjKind, ProjectionOp as CoreOp, Region as CoreRegion,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::de::DeserializeOwned;
use serde::Serialize;

create_exception!(poincare_korn_py, PoincareKornError, PyValueError);
create_exception!(poincare_korn_py, FlatPortionError, PoincareKornError);

fn err(e: poincare_korn::Error) -> PyErr {
    match e {
        poincare_korn::Error::FlatPortion => FlatPortionError::new_err(e.to_string()),
        _ => PoincareKornError::new_err(e.to_string()),
    }
}

fn parse<T: DeserializeOwned>(what: &str, name: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(name.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown {what} '{name}'")))
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(PyModule::import(py, "json")?.call_method1("loads", (text,))?.unbind())
}

fn from_py<T: DeserializeOwned>(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = PyModule::import(py, "json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[pyclass(module = "poincare_korn_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Domain {
    inner: CoreDomain,
}

#[pymethods]
impl Domain {
    #[staticmethod]
    #[pyo3(signature = (cells = 4))]
    fn unit_square(cells: usize) -> PyResult<Self> {
        Self::rectangle(1.0, 1.0, cells, cells)
    }

    #[staticmethod]
    #[pyo3(signature = (width, height, cells_x = 4, cells_y = 4))]
    fn rectangle(width: f64, height: f64, cells_x: usize, cells_y: usize) -> PyResult<Self> {
        if cells_x == 0 || cells_y == 0 || !(width > 0.0 && height > 0.0) {
            return Err(PyValueError::new_err("positive sides and at least one cell per direction"));
        }
        let inner = CoreDomain::mesh(geo::rectangle(width, height, cells_x, cells_y)).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (cells = 4))]
    fn l_shape(cells: usize) -> PyResult<Self> {
        if cells == 0 {
            return Err(PyValueError::new_err("at least one cell"));
        }
        Ok(Self {
            inner: CoreDomain::mesh(geo::l_shape(cells)).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (sides, radius = 1.0))]
    fn disk_polygon(sides: usize, radius: f64) -> PyResult<Self> {
        if sides < 3 || !(radius > 0.0) {
            return Err(PyValueError::new_err("sides >= 3 and radius > 0"));
        }
        Ok(Self {
            inner: CoreDomain::mesh(geo::disk_polygon(radius, sides)).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (dim, radius = 1.0, center = None))]
    fn ball(dim: usize, radius: f64, center: Option<Vec<f64>>) -> PyResult<Self> {
        let center = center.unwrap_or_else(|| vec![0.0; dim]);
        Ok(Self {
            inner: CoreDomain::ball(dim, radius, center).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_mesh_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: CoreDomain::mesh(parse_mesh(text).map_err(err)?).map_err(err)?,
        })
    }

    fn mesh_text(&self) -> Option<String> {
        self.inner.as_mesh().map(write_mesh)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn measure(&self) -> PyResult<f64> {
        geo::measure(&self.inner).map_err(err)
    }

    #[getter]
    fn diameter(&self) -> f64 {
        geo::diameter(&self.inner)
    }

    #[getter]
    fn centroid(&self) -> PyResult<Vec<f64>> {
        geo::centroid(&self.inner).map_err(err)
    }

    #[getter]
    fn boundary_tags(&self) -> Vec<String> {
        self.inner
            .as_mesh()
            .map(|m| m.tags().into_iter().map(str::to_string).collect())
            .unwrap_or_default()
    }

    fn moment(&self, alpha: Vec<u32>) -> PyResult<f64> {
        geo::moment(&self.inner, &alpha).map_err(err)
    }

    fn __repr__(&self) -> String {
        match self.inner.as_ball() {
            Some(b) => format!("Domain.ball(dim={}, radius={})", b.dim, b.radius),
            None => format!(
                "Domain(mesh, {} triangles)",
                self.inner.as_mesh().map(|m| m.triangles.len()).unwrap_or(0)
            ),
        }
    }
}

#[pyclass(module = "poincare_korn_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Region {
    inner: CoreRegion,
}

#[pymethods]
impl Region {
    #[staticmethod]
    fn centroid_box(domain: &Domain, lo: [f64; 2], hi: [f64; 2]) -> PyResult<Self> {
        Ok(Self {
            inner: CoreRegion::centroid_box(&domain.inner, lo, hi).map_err(err)?,
        })
    }

    #[staticmethod]
    fn elements(domain: &Domain, triangles: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: CoreRegion::elements(&domain.inner, triangles).map_err(err)?,
        })
    }

    #[staticmethod]
    fn concentric_ball(domain: &Domain, radius: f64) -> PyResult<Self> {
        Ok(Self {
            inner: CoreRegion::concentric_ball(&domain.inner, radius).map_err(err)?,
        })
    }

    #[staticmethod]
    fn whole(domain: &Domain) -> Self {
        Self {
            inner: CoreRegion::whole(&domain.inner),
        }
    }

    #[getter]
    fn measure(&self) -> PyResult<f64> {
        geo::measure(&self.inner).map_err(err)
    }

    #[getter]
    fn centroid(&self) -> PyResult<Vec<f64>> {
        geo::centroid(&self.inner).map_err(err)
    }
}

#[pyclass(module = "poincare_korn_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct BoundaryPortion {
    inner: CorePortion,
}

#[pymethods]
impl BoundaryPortion {
    #[staticmethod]
    fn from_tags(domain: &Domain, tags: Vec<String>) -> PyResult<Self> {
        Ok(Self {
            inner: CorePortion::from_tags(&domain.inner, &tags).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_edges(domain: &Domain, edges: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: CorePortion::from_edges(&domain.inner, edges).map_err(err)?,
        })
    }

    #[staticmethod]
    fn whole_boundary(domain: &Domain) -> PyResult<Self> {
        Ok(Self {
            inner: CorePortion::whole_boundary(&domain.inner).map_err(err)?,
        })
    }

    #[getter]
    fn measure(&self) -> PyResult<f64> {
        geo::measure(&self.inner).map_err(err)
    }

    #[getter]
    fn edges(&self) -> Vec<usize> {
        self.inner.edges().to_vec()
    }

    /// `(dimension, flat)` of the affine hull.
    fn affine_hull(&self) -> PyResult<(usize, bool)> {
        let h = geo::affine_hull_dim(&self.inner).map_err(err)?;
        Ok((h.dim, h.flat))
    }
}

#[pyclass(module = "poincare_korn_py", frozen)]
struct PolySpace {
    inner: CoreSpace,
}

#[derive(FromPyObject)]
enum TargetArg {
    Region(Py<Region>),
    Portion(Py<BoundaryPortion>),
    Functional(Vec<f64>),
}

#[pymethods]
impl PolySpace {
    #[new]
    #[pyo3(signature = (domain, degree, codim = 1))]
    fn new(py: Python<'_>, domain: &Domain, degree: usize, codim: usize) -> PyResult<Self> {
        let d = domain.inner.clone();
        let inner = py.detach(|| CoreSpace::build(&d, degree, codim)).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn codim(&self) -> usize {
        self.inner.codim()
    }

    /// Gram matrix of `form` in the orthonormal basis. `form` is one of
    /// `l2`, `grad`, `hessian`, `symgrad`, `w12`, `w22`; with a region or
    /// portion `target`, `l2` restricts to it.
    #[pyo3(signature = (form, target = None))]
    fn gram(&self, form: &str, target: Option<TargetArg>) -> PyResult<Vec<Vec<f64>>> {
        let space = &self.inner;
        let g = match (form, &target) {
            ("l2", None) => space.assemble_gram(Form::L2Omega),
            ("l2", Some(TargetArg::Region(r))) => space.assemble_gram(Form::L2Region(&r.get().inner)),
            ("l2", Some(TargetArg::Portion(p))) => space.assemble_gram(Form::L2Trace(&p.get().inner)),
            ("grad", None) => space.assemble_gram(Form::Grad),
            ("hessian", None) => space.assemble_gram(Form::Hessian),
            ("symgrad", None) => space.assemble_gram(Form::SymGrad),
            ("w12", None) => space.assemble_gram(Form::W12),
            ("w22", None) => space.assemble_gram(Form::W22),
            _ => return Err(PyValueError::new_err(format!("unknown form '{form}' for this target"))),
        }
        .map_err(err)?;
        Ok(rows(&g.matrix))
    }

    /// Coefficients of `a + b . x` (scalar spaces).
    fn affine_coefficients(&self, a: f64, b: Vec<f64>) -> PyResult<Vec<f64>> {
        if self.inner.is_vector() || b.len() != self.inner.spatial_dim() {
            return Err(PyValueError::new_err("scalar space and len(b) == dim required"));
        }
        Ok(self.inner.affine_coefficients(a, &b).iter().copied().collect())
    }

    /// `(value, gradient, hessian)` of component `component` at `point`.
    #[pyo3(signature = (coefficients, point, component = 0))]
    fn evaluate(&self, coefficients: Vec<f64>, point: Vec<f64>, component: usize) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
        if coefficients.len() != self.inner.dim() || point.len() != self.inner.spatial_dim() || component >= self.inner.codim() {
            return Err(PyValueError::new_err("coefficient, point or component size mismatch"));
        }
        Ok(self.inner.eval_function(&DVector::from_vec(coefficients), component, &point))
    }
}

#[pyclass(module = "poincare_korn_py", frozen)]
struct ProjectionOp {
    inner: CoreOp,
}

#[pymethods]
impl ProjectionOp {
    #[getter]
    fn kind(&self) -> String {
        format!("{:?}", self.inner.kind)
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label.clone()
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.matrix)
    }

    fn apply(&self, coefficients: Vec<f64>) -> PyResult<Vec<f64>> {
        if coefficients.len() != self.inner.matrix.ncols() {
            return Err(PyValueError::new_err("coefficient length mismatch"));
        }
        Ok(self.inner.apply(&DVector::from_vec(coefficients)).iter().copied().collect())
    }
}

/// Builds `kind` (`AvgRegion`, `TraceAvg`, `AffineRegion`, `AffineTrace`,
/// `TauTrace`, `RigidRegion`, `RhoTrace`, `Custom`) on a region, a portion or,
/// for `Custom`, a coefficient vector.
#[pyfunction]
fn build_projection(space: &PolySpace, kind: &str, target: TargetArg) -> PyResult<ProjectionOp> {
    let kind: ProjKind = parse("projection kind", kind)?;
    let inner = match target {
        TargetArg::Region(r) => poincare_korn::build_projection(&space.inner, kind, &r.get().inner),
        TargetArg::Portion(p) => poincare_korn::build_projection(&space.inner, kind, &p.get().inner),
        TargetArg::Functional(f) => poincare_korn::build_projection(&space.inner, kind, &DVector::from_vec(f)),
    };
    Ok(ProjectionOp { inner: inner.map_err(err)? })
}

/// `||op||` in `L(X, X)` restricted to the space, `X` one of `L2`, `W12`, `W22`.
#[pyfunction]
fn operator_norm(py: Python<'_>, op: &ProjectionOp, norm: &str, space: &PolySpace) -> PyResult<f64> {
    let norm: NormKind = parse("norm", norm)?;
    py.detach(|| poincare_korn::operator_norm(&op.inner, norm, &space.inner)).map_err(err)
}

/// `||a - b||` in the given norm.
#[pyfunction]
fn difference_norm(a: &ProjectionOp, b: &ProjectionOp, norm: &str, space: &PolySpace) -> PyResult<f64> {
    let norm: NormKind = parse("norm", norm)?;
    let d = poincare_korn::op_subtract(&a.inner, &b.inner).map_err(err)?;
    matrix_operator_norm(&d, norm, &space.inner).map_err(err)
}

/// `PoincareQ`, `TraceC`, `KornK`, `ENormAffine` or `ENormRigid` as a dict.
#[pyfunction]
#[pyo3(signature = (space, kind, portion = None))]
fn sharp_constant(py: Python<'_>, space: &PolySpace, kind: &str, portion: Option<&BoundaryPortion>) -> PyResult<Py<PyAny>> {
    let kind: ConstantKind = parse("constant", kind)?;
    let c = py
        .detach(|| poincare_korn::sharp_constant(&space.inner, kind, portion.map(|p| &p.inner)))
        .map_err(err)?;
    to_py(py, &c)
}

#[pyfunction]
fn e_inverse_norm(space: &PolySpace, portion: &BoundaryPortion, kind: &str) -> PyResult<f64> {
    let kind: NullKind = parse("null space", kind)?;
    poincare_korn::e_inverse_norm(&space.inner, &portion.inner, kind).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (base, norm_t, norm_t_minus_p = None))]
fn meyers_compose(base: f64, norm_t: f64, norm_t_minus_p: Option<f64>) -> f64 {
    poincare_korn::meyers_compose(base, norm_t, norm_t_minus_p)
}

/// Explicit bound. `case` is a dict such as `{"case": "H2Balls", "n": 2,
/// "rho": 0.5}`; `inputs` holds the measured quantities by name.
#[pyfunction]
#[pyo3(signature = (case, inputs = None))]
fn paper_bound(py: Python<'_>, case: &Bound<'_, PyAny>, inputs: Option<&Bound<'_, PyAny>>) -> PyResult<f64> {
    let case: BoundCase = from_py(py, case)?;
    let inputs: BoundInputs = match inputs {
        Some(i) => from_py(py, i)?,
        None => BoundInputs::default(),
    };
    k::paper_bound(case, &inputs).map_err(err)
}

/// Largest `||u - T u||_X / |L u|` over the space and over random samples.
#[pyfunction]
#[pyo3(signature = (space, op, norm, seminorm, trials = 1000, seed = 0))]
fn worst_ratios(
    py: Python<'_>,
    space: &PolySpace,
    op: &ProjectionOp,
    norm: &str,
    seminorm: &str,
    trials: usize,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let norm: NormKind = parse("norm", norm)?;
    let form = match seminorm {
        "grad" => Form::Grad,
        "hessian" => Form::Hessian,
        "symgrad" => Form::SymGrad,
        other => return Err(PyValueError::new_err(format!("unknown seminorm '{other}'"))),
    };
    py.detach(|| {
        let sup = sup_ratio(&space.inner, &op.inner, norm, form)?;
        let random = random_trials(&space.inner, &op.inner, norm, form, trials, seed)?;
        Ok((sup, random))
    })
    .map_err(err)
}

#[pyfunction]
fn check_flat(py: Python<'_>, space: &PolySpace, portion: &BoundaryPortion) -> PyResult<Py<PyAny>> {
    let c = counterexample_flat(&space.inner, &portion.inner).map_err(err)?;
    to_py(py, &c)
}

#[pyfunction]
fn injectivity(py: Python<'_>, space: &PolySpace, portion: &BoundaryPortion, kind: &str) -> PyResult<Py<PyAny>> {
    let kind: NullKind = parse("null space", kind)?;
    let r = injectivity_report(&space.inner, &portion.inner, kind).map_err(err)?;
    to_py(py, &r)
}

/// Full certification chain for one case; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (domain, case, region = None, portion = None, scalar_degree = 8, vector_degree = 6, trials = 1000, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn certify(
    py: Python<'_>,
    domain: &Domain,
    case: &str,
    region: Option<&Region>,
    portion: Option<&BoundaryPortion>,
    scalar_degree: usize,
    vector_degree: usize,
    trials: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let case = CaseKind::parse(case).ok_or_else(|| PyValueError::new_err(format!("unknown case '{case}'")))?;
    let mut setup = CertifySetup::new(domain.inner.clone());
    setup.region = region.map(|r| r.inner.clone());
    setup.portion = portion.map(|p| p.inner.clone());
    setup.scalar_degree = scalar_degree;
    setup.vector_degree = vector_degree;
    setup.trials = trials;
    setup.seed = seed;
    let report = py.detach(|| setup.certify(case)).map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
fn case_names() -> Vec<&'static str> {
    CaseKind::ALL.iter().map(CaseKind::name).collect()
}

#[pymodule]
fn poincare_korn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Domain>()?;
    m.add_class::<Region>()?;
    m.add_class::<BoundaryPortion>()?;
    m.add_class::<PolySpace>()?;
    m.add_class::<ProjectionOp>()?;
    m.add_function(wrap_pyfunction!(build_projection, m)?)?;
    m.add_function(wrap_pyfunction!(operator_norm, m)?)?;
    m.add_function(wrap_pyfunction!(difference_norm, m)?)?;
    m.add_function(wrap_pyfunction!(sharp_constant, m)?)?;
    m.add_function(wrap_pyfunction!(e_inverse_norm, m)?)?;
    m.add_function(wrap_pyfunction!(meyers_compose, m)?)?;
    m.add_function(wrap_pyfunction!(paper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(worst_ratios, m)?)?;
    m.add_function(wrap_pyfunction!(check_flat, m)?)?;
    m.add_function(wrap_pyfunction!(injectivity, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(case_names, m)?)?;
    m.add("PoincareKornError", m.py().get_type::<PoincareKornError>())?;
    m.add("FlatPortionError", m.py().get_type::<FlatPortionError>())?;
    Ok(())
}
