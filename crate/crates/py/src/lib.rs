use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use twoatom::algebra;
use twoatom::information::{self, InfoMode, SurfacePoint};
use twoatom::liouvillian::{self, Orientation};
use twoatom::{measurement, propagator, verify, Error, Op2, Op4, C64};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Eigensolver(_) | Error::MethodDisagreement { .. } | Error::Quadrature(_) | Error::StepUnderflow(_) => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

type Rows = Vec<Vec<C64>>;

fn square<const N: usize>(rows: &Rows) -> PyResult<nalgebra::SMatrix<C64, N, N>> {
    if rows.len() != N || rows.iter().any(|r| r.len() != N) {
        return Err(PyValueError::new_err(format!("expected a {N}x{N} matrix")));
    }
    Ok(nalgebra::SMatrix::from_fn(|i, j| rows[i][j]))
}

fn rows<const N: usize>(m: &nalgebra::SMatrix<C64, N, N>) -> Rows {
    (0..N).map(|i| (0..N).map(|j| m[(i, j)]).collect()).collect()
}

fn mode(name: &str) -> PyResult<InfoMode> {
    match name {
        "two" => Ok(InfoMode::Two),
        "four" => Ok(InfoMode::Four),
        _ => Err(PyValueError::new_err(format!("mode must be 'two' or 'four', got {name:?}"))),
    }
}

fn orientation(antiparallel: bool) -> Orientation {
    if antiparallel {
        Orientation::Antiparallel
    } else {
        Orientation::Parallel
    }
}

/// Single two-level atom: excited population `n` and coherence `c = ρ₁₂`.
#[pyclass(name = "TlaState", frozen, from_py_object)]
#[derive(Clone)]
struct PyTlaState(algebra::TlaState);

#[pymethods]
impl PyTlaState {
    #[new]
    #[pyo3(signature = (n, c = C64::new(0.0, 0.0)))]
    fn new(n: f64, c: C64) -> PyResult<Self> {
        algebra::TlaState::new(n, c).map(Self).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> f64 {
        self.0.n()
    }

    #[getter]
    fn coherence(&self) -> C64 {
        self.0.coherence()
    }

    fn matrix(&self) -> Rows {
        rows(&self.0.matrix())
    }

    fn __repr__(&self) -> String {
        format!("TlaState(n={}, c={})", self.0.n(), self.0.coherence())
    }
}

/// Two-atom density matrix in the basis gg, ge, eg, ee.
#[pyclass(name = "DensityMatrix", frozen, from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix(algebra::DensityMatrix);

#[pymethods]
impl PyDensityMatrix {
    #[new]
    fn new(matrix: Rows) -> PyResult<Self> {
        algebra::DensityMatrix::new(square::<4>(&matrix)?).map(Self).map_err(to_py)
    }

    fn matrix(&self) -> Rows {
        rows(self.0.matrix())
    }

    fn min_eigenvalue(&self) -> f64 {
        self.0.min_eigenvalue()
    }

    fn trace(&self) -> f64 {
        self.0.matrix().trace().re
    }
}

/// Heisenberg-picture generator as a 16×16 matrix in the pair operator basis.
#[pyclass(name = "Superoperator", frozen)]
struct PySuperoperator(liouvillian::Superoperator);

#[pymethods]
impl PySuperoperator {
    fn matrix(&self) -> Rows {
        rows(self.0.matrix())
    }

    fn apply(&self, op: Rows) -> PyResult<Rows> {
        Ok(rows(&self.0.apply(&square::<4>(&op)?)))
    }

    fn spectrum(&self) -> PyResult<Vec<C64>> {
        liouvillian::spectrum(&self.0).map_err(to_py)
    }
}

#[pyclass(name = "ChannelMap", frozen)]
struct PyChannelMap(propagator::ChannelMap);

#[pymethods]
impl PyChannelMap {
    #[staticmethod]
    fn identity() -> Self {
        Self(propagator::ChannelMap::identity())
    }

    fn matrix(&self) -> Rows {
        rows(self.0.superop().matrix())
    }

    fn heisenberg(&self, op: Rows) -> PyResult<Rows> {
        Ok(rows(&self.0.heisenberg(&square::<4>(&op)?)))
    }

    fn schrodinger(&self, rho: Rows) -> PyResult<Rows> {
        Ok(rows(&self.0.schrodinger(&square::<4>(&rho)?)))
    }

    fn apply_to_state(&self, rho: &PyDensityMatrix) -> PyResult<PyDensityMatrix> {
        propagator::apply_to_state(&self.0, &rho.0).map(PyDensityMatrix).map_err(to_py)
    }
}

/// Probability table with every axis ordered (excited, ground).
#[pyclass(name = "JointDistribution", frozen)]
struct PyJointDistribution(measurement::JointDistribution);

#[pymethods]
impl PyJointDistribution {
    #[getter]
    fn arity(&self) -> usize {
        self.0.arity()
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.0.probs().to_vec()
    }

    #[getter]
    fn clamped(&self) -> usize {
        self.0.clamped()
    }

    fn table(&self) -> Vec<Vec<f64>> {
        self.0.table()
    }

    fn mutual_information<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = information::mutual_information(&self.0);
        let d = PyDict::new(py);
        d.set_item("value_bits", r.value_bits)?;
        d.set_item("h_first", r.h_first)?;
        d.set_item("h_second", r.h_second)?;
        d.set_item("h_joint", r.h_joint)?;
        Ok(d)
    }
}

#[pyfunction]
#[pyo3(signature = (phi, antiparallel = false))]
fn exchange_factor(phi: f64, antiparallel: bool) -> PyResult<f64> {
    let geom = liouvillian::Geometry::new(phi, orientation(antiparallel)).map_err(to_py)?;
    Ok(liouvillian::exchange_factor(&geom))
}

#[pyfunction]
#[pyo3(signature = (phi, antiparallel = false))]
fn exchange_factor_quadrature(phi: f64, antiparallel: bool) -> PyResult<f64> {
    let geom = liouvillian::Geometry::new(phi, orientation(antiparallel)).map_err(to_py)?;
    liouvillian::exchange_factor_integral(&geom).map_err(to_py)
}

/// `Tr A†B` for two 2×2 or two 4×4 matrices.
#[pyfunction]
fn hs_inner(a: Rows, b: Rows) -> PyResult<C64> {
    match (a.len(), b.len()) {
        (2, 2) => Ok(algebra::hs_inner::<2>(&square::<2>(&a)?, &square::<2>(&b)?)),
        (4, 4) => Ok(algebra::hs_inner::<4>(&square::<4>(&a)?, &square::<4>(&b)?)),
        (x, y) => Err(PyValueError::new_err(format!("dimension mismatch: {x}x{x} vs {y}x{y}"))),
    }
}

#[pyfunction]
fn product_state(a: &PyTlaState, b: &PyTlaState) -> PyDensityMatrix {
    PyDensityMatrix(algebra::product_state(&a.0, &b.0))
}

#[pyfunction]
#[pyo3(signature = (g, gamma = 1.0, gc = None))]
fn collective_decay_generator(g: f64, gamma: f64, gc: Option<f64>) -> PyResult<PySuperoperator> {
    let rates = liouvillian::DecayRates::new(gamma, g).map_err(to_py)?;
    let gen = liouvillian::collective_decay_generator(&rates);
    let gen = match gc {
        Some(gc) => liouvillian::add_coherent_exchange(&gen, gc).map_err(to_py)?,
        None => gen,
    };
    Ok(PySuperoperator(gen))
}

#[pyfunction]
fn evolve(gen: &PySuperoperator, t: f64) -> PyResult<PyChannelMap> {
    propagator::evolve(&gen.0, t).map(PyChannelMap).map_err(to_py)
}

#[pyfunction]
fn quasi_stationary_map(gen: &PySuperoperator) -> PyResult<PyChannelMap> {
    propagator::quasi_stationary_map(&gen.0).map(PyChannelMap).map_err(to_py)
}

#[pyfunction]
fn singlet_probability(a: &PyTlaState, b: &PyTlaState) -> f64 {
    propagator::singlet_probability(&a.0, &b.0)
}

#[pyfunction]
fn joint_two_point(rho: &PyDensityMatrix, map: &PyChannelMap) -> PyResult<PyJointDistribution> {
    measurement::joint_two_point(&rho.0, &map.0).map(PyJointDistribution).map_err(to_py)
}

#[pyfunction]
fn joint_four_point(rho: &PyDensityMatrix, map: &PyChannelMap) -> PyResult<PyJointDistribution> {
    measurement::joint_four_point(&rho.0, &map.0).map(PyJointDistribution).map_err(to_py)
}

#[pyfunction]
fn entropy_bits(w: Vec<f64>) -> PyResult<f64> {
    information::entropy_bits(&w).map_err(to_py)
}

/// `[(n1, n2, info_bits), ...]`, row-major in n1.
#[pyfunction]
#[pyo3(signature = (mode, grid = 101))]
fn info_surface(py: Python<'_>, mode: &str, grid: usize) -> PyResult<Vec<(f64, f64, f64)>> {
    let m = self::mode(mode)?;
    let points = py.detach(|| information::info_surface(m, grid)).map_err(to_py)?;
    Ok(points.iter().map(|p: &SurfacePoint| (p.n1, p.n2, p.info_bits)).collect())
}

#[pyfunction]
fn optimize<'py>(py: Python<'py>, mode: &str) -> PyResult<Bound<'py, PyDict>> {
    let m = self::mode(mode)?;
    let report = py.detach(|| information::optimize(m)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("value_bits", report.value_bits)?;
    d.set_item("points", report.points.iter().map(|p| (p.n1, p.n2)).collect::<Vec<_>>())?;
    Ok(d)
}

#[pyfunction]
fn closed_form_max() -> f64 {
    information::closed_form_max()
}

/// Runs every acceptance check; returns `[(id, title, passed), ...]`.
#[pyfunction]
fn run_verification(py: Python<'_>) -> Vec<(u8, String, bool)> {
    py.detach(verify::run_all).into_iter().map(|o| (o.id, o.title.to_string(), o.passed)).collect()
}

/// Single-atom lowering operator `|g><e|`.
#[pyfunction]
fn lowering() -> Rows {
    let m: Op2 = liouvillian::single_atom_lowering();
    rows(&m)
}

#[pyfunction]
fn singlet_state() -> Rows {
    let s = propagator::singlet_vector();
    let m: Op4 = s * s.adjoint();
    rows(&m)
}

#[pymodule(name = "twoatom")]
fn twoatom_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTlaState>()?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PySuperoperator>()?;
    m.add_class::<PyChannelMap>()?;
    m.add_class::<PyJointDistribution>()?;
    m.add_function(wrap_pyfunction!(exchange_factor, m)?)?;
    m.add_function(wrap_pyfunction!(exchange_factor_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(hs_inner, m)?)?;
    m.add_function(wrap_pyfunction!(product_state, m)?)?;
    m.add_function(wrap_pyfunction!(collective_decay_generator, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(quasi_stationary_map, m)?)?;
    m.add_function(wrap_pyfunction!(singlet_probability, m)?)?;
    m.add_function(wrap_pyfunction!(joint_two_point, m)?)?;
    m.add_function(wrap_pyfunction!(joint_four_point, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_bits, m)?)?;
    m.add_function(wrap_pyfunction!(info_surface, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_max, m)?)?;
    m.add_function(wrap_pyfunction!(run_verification, m)?)?;
    m.add_function(wrap_pyfunction!(lowering, m)?)?;
    m.add_function(wrap_pyfunction!(singlet_state, m)?)?;
    Ok(())
}
