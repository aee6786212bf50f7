//! Python module `lsigma`.
//!
//! Random variables are passed as a list of floats (scalar) or a list of
//! rows, with optional weights (equal weights when omitted).

use lsigma::{DualityCertificate, FiniteSpace, RandomVector, VecNorm};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(lsigma, CertificateError, PyValueError, "Duality certificate failed verification.");

fn to_py(e: lsigma::Error) -> PyErr {
    match e {
        lsigma::Error::CertificateGap { .. } => CertificateError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn vecnorm(r: f64) -> PyResult<VecNorm> {
    VecNorm::new(r).map_err(to_py)
}

#[pyclass(name = "Distortion", module = "lsigma", frozen)]
struct PyDistortion(lsigma::Distortion);

#[pymethods]
impl PyDistortion {
    /// Parse `constant`, `avar:B`, `power:S`, `log` or `step:B1,L1;B2,L2;...`.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        spec.parse().map(PyDistortion).map_err(to_py)
    }

    #[getter]
    fn u0(&self) -> f64 {
        self.0.u0()
    }

    #[getter]
    fn is_bounded(&self) -> bool {
        self.0.is_bounded()
    }

    #[getter]
    fn sup(&self) -> Option<f64> {
        self.0.sup()
    }

    fn sigma_at(&self, u: f64) -> PyResult<f64> {
        self.0.sigma_at(u).map_err(to_py)
    }

    /// ∫_α^1 σ(u) du
    fn tail(&self, alpha: f64) -> PyResult<f64> {
        self.0.tail_at(alpha).map_err(to_py)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Distortion('{}')", self.0)
    }
}

#[pyclass(name = "RandomVector", module = "lsigma", frozen)]
struct PyRandomVector(RandomVector);

#[pymethods]
impl PyRandomVector {
    #[new]
    #[pyo3(signature = (values, weights = None))]
    fn new(values: &Bound<'_, PyAny>, weights: Option<Vec<f64>>) -> PyResult<Self> {
        let rows: Vec<Vec<f64>> = match values.extract::<Vec<f64>>() {
            Ok(v) => v.into_iter().map(|x| vec![x]).collect(),
            Err(_) => values.extract()?,
        };
        let space = match weights {
            Some(w) => FiniteSpace::new(w),
            None if rows.is_empty() => FiniteSpace::new(Vec::new()),
            None => Ok(FiniteSpace::uniform(rows.len())),
        }
        .map_err(to_py)?;
        RandomVector::new(space, rows).map(PyRandomVector).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.space().weights().to_vec()
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<f64>> {
        self.0.to_rows()
    }

    fn __repr__(&self) -> String {
        format!("RandomVector(n={}, dim={})", self.0.len(), self.0.dim())
    }
}

#[pyclass(name = "Certificate", module = "lsigma", frozen)]
struct PyCertificate(DualityCertificate);

#[pymethods]
impl PyCertificate {
    #[getter]
    fn dual_value(&self) -> f64 {
        self.0.dual_value
    }

    #[getter]
    fn pairing(&self) -> f64 {
        self.0.pairing
    }

    #[getter]
    fn upper(&self) -> f64 {
        self.0.upper
    }

    #[getter]
    fn gap(&self) -> f64 {
        self.0.gap
    }

    #[getter]
    fn approximation_bound(&self) -> f64 {
        self.0.approximation_bound
    }

    /// Dominating envelope Z′, one value per atom.
    #[getter]
    fn envelope(&self) -> PyRandomVector {
        PyRandomVector(self.0.envelope.clone())
    }

    #[getter]
    fn witness(&self) -> PyRandomVector {
        PyRandomVector(self.0.witness.clone())
    }

    fn is_tight(&self) -> bool {
        self.0.is_tight()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("finite certificate")
    }

    fn __repr__(&self) -> String {
        format!("Certificate(dual_value={}, gap={})", self.0.dual_value, self.0.gap)
    }
}

/// ‖Y‖_{σ,p} with the vector norm ℓ^r on values.
#[pyfunction]
#[pyo3(signature = (y, sigma, p, r = 2.0))]
fn norm(y: &PyRandomVector, sigma: &PyDistortion, p: f64, r: f64) -> PyResult<f64> {
    lsigma::norm(&y.0, &sigma.0, p, &vecnorm(r)?).map_err(to_py)
}

/// Dual norm of Z with its verified certificate.
#[pyfunction]
#[pyo3(signature = (z, sigma, p, r = 2.0))]
fn dual_norm(z: &PyRandomVector, sigma: &PyDistortion, p: f64, r: f64) -> PyResult<PyCertificate> {
    lsigma::vector_dual_norm(&z.0, &sigma.0, p, &vecnorm(r)?).map(PyCertificate).map_err(to_py)
}

/// Dual norm for p = ∞ (scalar Z).
#[pyfunction]
fn dual_norm_inf(z: &PyRandomVector, sigma: &PyDistortion) -> PyResult<f64> {
    lsigma::dual_norm_inf(&z.0, &sigma.0).map_err(to_py)
}

#[pyfunction]
fn avar(z: &PyRandomVector, alpha: f64) -> PyResult<f64> {
    lsigma::avar(&z.0, alpha).map_err(to_py)
}

/// `(holds, margin)` for Z′ σ-dominating Z.
#[pyfunction]
fn sigma_dominates(zp: &PyRandomVector, z: &PyRandomVector, sigma: &PyDistortion) -> PyResult<(bool, f64)> {
    lsigma::sigma_dominates(&zp.0, &z.0, &sigma.0).map(|d| (d.holds, d.margin)).map_err(to_py)
}

#[pyfunction]
fn pairing(z: &PyRandomVector, y: &PyRandomVector) -> PyResult<f64> {
    lsigma::pairing(&z.0, &y.0).map_err(to_py)
}

/// ρ_Z(Y) and the maximizing rearrangement of Y's atoms.
#[pyfunction]
fn rho(z: &PyRandomVector, y: &PyRandomVector) -> PyResult<(f64, Vec<usize>)> {
    lsigma::rho_assignment(&z.0, &y.0).map_err(to_py)
}

/// Full risk report as a JSON string.
#[pyfunction]
#[pyo3(signature = (z, y, p = None, r = 2.0))]
fn risk_report(z: &PyRandomVector, y: &PyRandomVector, p: Option<f64>, r: f64) -> PyResult<String> {
    let report = lsigma::RiskReport::new(&z.0, &y.0, &vecnorm(r)?, p).map_err(to_py)?;
    Ok(serde_json::to_string(&report).expect("finite report"))
}

#[pymodule(name = "lsigma")]
fn lsigma_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDistortion>()?;
    m.add_class::<PyRandomVector>()?;
    m.add_class::<PyCertificate>()?;
    m.add("CertificateError", m.py().get_type::<CertificateError>())?;
    m.add_function(wrap_pyfunction!(norm, m)?)?;
    m.add_function(wrap_pyfunction!(dual_norm, m)?)?;
    m.add_function(wrap_pyfunction!(dual_norm_inf, m)?)?;
    m.add_function(wrap_pyfunction!(avar, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_dominates, m)?)?;
    m.add_function(wrap_pyfunction!(pairing, m)?)?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(risk_report, m)?)?;
    Ok(())
}
