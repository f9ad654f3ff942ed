//! Python bindings. States are lists of complex amplitudes in the
//! weight-ascending (or Fock) basis; labels accept exact strings such as
//! `"3/2"` or plain numbers.

use coherent_split::algebra::{
    su11_generators, su2_generators, verify_structure, weyl_heisenberg_generators, BargmannIndex, Ket, SpinLabel,
};
use coherent_split::belltest::{self, ChshOptions};
use coherent_split::coherent::{self, CoherentParam, GlauberParam};
use coherent_split::splitting::{self, Isometry, SplitSpec};
use coherent_split::uniqueness::{self, ScanOptions, ScanSource};
use coherent_split::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Consistency(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Twice a half-integer given as a float, or `None` if it is not one.
fn twice_half_integer(x: f64) -> Option<u32> {
    let t = 2.0 * x;
    (x.is_finite() && x >= 0.0 && t.fract() == 0.0 && t <= f64::from(u32::MAX)).then_some(t as u32)
}

fn spin(label: &Bound<'_, PyAny>) -> PyResult<SpinLabel> {
    if let Ok(s) = label.extract::<String>() {
        return s.parse().map_err(py_err);
    }
    let x: f64 = label.extract()?;
    twice_half_integer(x)
        .map(SpinLabel::from_twice)
        .ok_or_else(|| PyValueError::new_err(format!("spin must be a non-negative half-integer, got {x}")))
}

fn bargmann(label: &Bound<'_, PyAny>, dim: usize) -> PyResult<BargmannIndex> {
    if let Ok(s) = label.extract::<String>() {
        return BargmannIndex::parse(&s, dim).map_err(py_err);
    }
    BargmannIndex::new(label.extract()?, dim).map_err(py_err)
}

fn ket(amps: Vec<Complex64>) -> PyResult<Ket> {
    Ket::new(amps).map_err(py_err)
}

fn amps(k: &Ket) -> Vec<Complex64> {
    k.amplitudes().to_vec()
}

/// Normalized spin coherent state `|j, ζ⟩`.
#[pyfunction]
fn su2_coherent(j: &Bound<'_, PyAny>, zeta: Complex64) -> PyResult<Vec<Complex64>> {
    let p = CoherentParam::new(zeta).map_err(py_err)?;
    Ok(amps(&coherent::su2_coherent(spin(j)?, p)))
}

/// Normalized SU(1,1) coherent state `|k, τ⟩`, `|τ| < 1`, truncated at `dim`.
#[pyfunction]
#[pyo3(signature = (k, tau, dim=128))]
fn su11_coherent(k: &Bound<'_, PyAny>, tau: Complex64, dim: usize) -> PyResult<Vec<Complex64>> {
    let rep = su11_generators(bargmann(k, dim)?);
    Ok(amps(&coherent::generalized_coherent(&rep, tau).map_err(py_err)?))
}

/// Glauber state `|α⟩`; the default truncation keeps all but 1e-24 of the weight.
#[pyfunction]
#[pyo3(signature = (alpha, dim=None))]
fn glauber_coherent(alpha: Complex64, dim: Option<usize>) -> PyResult<Vec<Complex64>> {
    let dim = dim.unwrap_or_else(|| GlauberParam::precise_dim(alpha));
    Ok(amps(&coherent::glauber_coherent(GlauberParam::new(alpha, dim).map_err(py_err)?)))
}

/// Largest structure-relation residual of a representation; `kind` is
/// `"su2"`, `"su11"` or `"wh"`.
#[pyfunction]
#[pyo3(signature = (kind, label=None, dim=32))]
fn structure_residual(kind: &str, label: Option<&Bound<'_, PyAny>>, dim: usize) -> PyResult<f64> {
    let need = || label.ok_or_else(|| PyValueError::new_err(format!("{kind} needs a label")));
    let rep = match kind {
        "su2" => su2_generators(spin(need()?)?),
        "su11" => su11_generators(bargmann(need()?, dim)?),
        "wh" => weyl_heisenberg_generators(dim).map_err(py_err)?,
        _ => return Err(PyValueError::new_err(format!("unknown kind '{kind}'"))),
    };
    Ok(verify_structure(&rep, 0.0).max_residual())
}

/// Embedding of a system into two subsystems of the same symmetry.
#[pyclass(frozen)]
struct Split {
    spec: SplitSpec,
    iso: Isometry,
}

impl Split {
    fn build(spec: SplitSpec) -> PyResult<Self> {
        let iso = splitting::build_isometry(&spec).map_err(py_err)?;
        Ok(Split { spec, iso })
    }
}

#[pymethods]
impl Split {
    /// `j_A = j_B + j_C`.
    #[staticmethod]
    fn su2(j_b: &Bound<'_, PyAny>, j_c: &Bound<'_, PyAny>) -> PyResult<Self> {
        Split::build(SplitSpec::su2_parts(spin(j_b)?, spin(j_c)?))
    }

    /// `k_A = k_B + k_C`, all three truncated at `dim`.
    #[staticmethod]
    #[pyo3(signature = (k_b, k_c, dim=64))]
    fn su11(k_b: &Bound<'_, PyAny>, k_c: &Bound<'_, PyAny>, dim: usize) -> PyResult<Self> {
        let (b, c) = (bargmann(k_b, dim)?, bargmann(k_c, dim)?);
        let a = BargmannIndex::new(b.k() + c.k(), dim).map_err(py_err)?;
        Split::build(SplitSpec::su11(a, b, c).map_err(py_err)?)
    }

    /// Beamsplitter `exp[θ(a b† − a† b)]` acting on mode A with vacuum in C.
    #[staticmethod]
    #[pyo3(signature = (dim, theta_bs=std::f64::consts::FRAC_PI_4, dim_out=None))]
    fn weyl_heisenberg(dim: usize, theta_bs: f64, dim_out: Option<usize>) -> PyResult<Self> {
        Split::build(SplitSpec::weyl_heisenberg(dim, dim_out.unwrap_or(dim), theta_bs).map_err(py_err)?)
    }

    /// `(dim_A, dim_B, dim_C)`.
    #[getter]
    fn dims(&self) -> (usize, usize, usize) {
        self.spec.dims()
    }

    /// Split state in H_B ⊗ H_C, index `b·dim_C + c`.
    fn apply(&self, state: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        Ok(amps(&splitting::split_state(&ket(state)?, &self.iso).map_err(py_err)?))
    }

    /// Schmidt values of the split state, descending.
    fn schmidt_values(&self, state: Vec<Complex64>) -> PyResult<Vec<f64>> {
        let (_, b, c) = self.spec.dims();
        let out = splitting::split_state(&ket(state)?, &self.iso).map_err(py_err)?;
        splitting::schmidt_values(&out, b, c).map_err(py_err)
    }

    /// Entanglement entropy (natural log) of the split state.
    fn entropy(&self, state: Vec<Complex64>) -> PyResult<f64> {
        Ok(splitting::entropy_from_schmidt(&self.schmidt_values(state)?))
    }

    /// Factors `(ψ_B, ψ_C)` when the second Schmidt value is below `tol`, else `None`.
    #[pyo3(signature = (state, tol=splitting::DEFAULT_SCHMIDT_TOL))]
    fn factor(&self, state: Vec<Complex64>, tol: f64) -> PyResult<Option<(Vec<Complex64>, Vec<Complex64>)>> {
        let (_, b, c) = self.spec.dims();
        let out = splitting::split_state(&ket(state)?, &self.iso).map_err(py_err)?;
        let f = splitting::factor_state(&out, b, c, tol).map_err(py_err)?;
        Ok(f.map(|(fb, fc)| (amps(&fb), amps(&fc))))
    }
}

/// Singular values of a bipartite state reshaped to `dim_b × dim_c`.
#[pyfunction]
fn schmidt_values(state: Vec<Complex64>, dim_b: usize, dim_c: usize) -> PyResult<Vec<f64>> {
    splitting::schmidt_values(&ket(state)?, dim_b, dim_c).map_err(py_err)
}

#[pyfunction]
fn entanglement_entropy(state: Vec<Complex64>, dim_b: usize, dim_c: usize) -> PyResult<f64> {
    splitting::entanglement_entropy(&ket(state)?, dim_b, dim_c).map_err(py_err)
}

/// Optimized CHSH value and its settings `(a, a′, b, b′)` as unit 3-vectors.
#[pyclass(frozen, get_all)]
struct BellResult {
    chsh: f64,
    settings: Option<Vec<[f64; 3]>>,
    converged_starts: usize,
}

#[pyfunction]
#[pyo3(signature = (state, dim_b, dim_c, seed, starts=32, tied_settings=false))]
fn optimize_chsh(
    py: Python<'_>,
    state: Vec<Complex64>,
    dim_b: usize,
    dim_c: usize,
    seed: u64,
    starts: usize,
    tied_settings: bool,
) -> PyResult<BellResult> {
    let psi = ket(state)?;
    let opts = ChshOptions { starts, tied_settings, ..ChshOptions::with_seed(seed) };
    let r = py
        .detach(|| belltest::optimize_chsh(&psi, dim_b, dim_c, &opts))
        .map_err(py_err)?;
    Ok(BellResult {
        chsh: r.chsh,
        settings: r.settings.map(|s| vec![s.a, s.a_prime, s.b, s.b_prime]),
        converged_starts: r.converged_starts,
    })
}

/// Closed-form CHSH maximum of a two-qubit pure state.
#[pyfunction]
fn horodecki_bound(state: Vec<Complex64>) -> PyResult<f64> {
    belltest::horodecki_bound(&ket(state)?).map_err(py_err)
}

/// Nearest spin coherent state: `(theta, phi, fidelity)`.
#[pyfunction]
fn nearest_coherent(state: Vec<Complex64>, j: &Bound<'_, PyAny>) -> PyResult<(f64, f64, f64)> {
    let n = uniqueness::nearest_coherent(&ket(state)?, spin(j)?).map_err(py_err)?;
    Ok((n.theta, n.phi, n.fidelity))
}

#[pyclass(frozen, get_all)]
struct ScanSummary {
    n_samples: usize,
    coherent: usize,
    entangling: usize,
    factorizing: usize,
    disagreements: usize,
    min_entropy: f64,
    max_entropy: f64,
    min_fidelity: f64,
    max_fidelity: f64,
}

/// Classifies sampled states of spin `j_B + j_C` by split entropy and by
/// distance to the coherent manifold; `source` is `"haar"` or `"cs"`.
#[pyfunction]
#[pyo3(signature = (j_b, j_c, n_samples, seed, source="haar"))]
fn haar_scan(
    py: Python<'_>,
    j_b: &Bound<'_, PyAny>,
    j_c: &Bound<'_, PyAny>,
    n_samples: usize,
    seed: u64,
    source: &str,
) -> PyResult<ScanSummary> {
    let source = match source {
        "haar" => ScanSource::Haar,
        "cs" => ScanSource::CoherentManifold,
        _ => return Err(PyValueError::new_err(format!("source must be 'haar' or 'cs', got '{source}'"))),
    };
    let spec = SplitSpec::su2_parts(spin(j_b)?, spin(j_c)?);
    let opts = ScanOptions { source, ..ScanOptions::new(n_samples, seed) };
    let (_, s) = py.detach(|| uniqueness::haar_scan(&spec, &opts)).map_err(py_err)?;
    Ok(ScanSummary {
        n_samples: s.n_samples,
        coherent: s.coherent,
        entangling: s.entangling,
        factorizing: s.factorizing,
        disagreements: s.disagreements,
        min_entropy: s.min_entropy,
        max_entropy: s.max_entropy,
        min_fidelity: s.min_fidelity,
        max_fidelity: s.max_fidelity,
    })
}

/// Multi-start entropy minimization over states of spin `j_B + j_C`:
/// one `(entropy, nearest_cs_fidelity, state)` per start.
#[pyfunction]
#[pyo3(signature = (j_b, j_c, n_starts, seed))]
fn minimize_entropy(
    py: Python<'_>,
    j_b: &Bound<'_, PyAny>,
    j_c: &Bound<'_, PyAny>,
    n_starts: usize,
    seed: u64,
) -> PyResult<Vec<(f64, f64, Vec<Complex64>)>> {
    let spec = SplitSpec::su2_parts(spin(j_b)?, spin(j_c)?);
    let minima = py.detach(|| uniqueness::minimize_entropy(&spec, n_starts, seed)).map_err(py_err)?;
    Ok(minima.iter().map(|m| (m.entropy, m.nearest_cs_fidelity, amps(&m.state))).collect())
}

#[pymodule]
#[pyo3(name = "coherent_split")]
fn coherent_split_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TSIRELSON", belltest::TSIRELSON)?;
    m.add_class::<Split>()?;
    m.add_class::<BellResult>()?;
    m.add_class::<ScanSummary>()?;
    m.add_function(wrap_pyfunction!(su2_coherent, m)?)?;
    m.add_function(wrap_pyfunction!(su11_coherent, m)?)?;
    m.add_function(wrap_pyfunction!(glauber_coherent, m)?)?;
    m.add_function(wrap_pyfunction!(structure_residual, m)?)?;
    m.add_function(wrap_pyfunction!(schmidt_values, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_chsh, m)?)?;
    m.add_function(wrap_pyfunction!(horodecki_bound, m)?)?;
    m.add_function(wrap_pyfunction!(nearest_coherent, m)?)?;
    m.add_function(wrap_pyfunction!(haar_scan, m)?)?;
    m.add_function(wrap_pyfunction!(minimize_entropy, m)?)?;
    Ok(())
}
