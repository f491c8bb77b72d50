//! Python bindings: distributions, kernels, posteriors, ordering checks and
//! the Monte Carlo oracle.

use fosd_screen_core as core;
use fosd_screen_core::scenario::{self, Overrides, RunOptions};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use std::path::PathBuf;

create_exception!(fosd_screen, FosdError, PyException);

fn err(e: core::Error) -> PyErr {
    FosdError::new_err(e.to_string())
}

/// Piecewise distribution with optional atoms and tail.
#[pyclass(name = "Distribution", module = "fosd_screen", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDistribution(core::Distribution);

#[pymethods]
impl PyDistribution {
    #[staticmethod]
    fn uniform(lo: f64, hi: f64) -> PyResult<Self> {
        core::Distribution::uniform(lo, hi).map(Self).map_err(err)
    }

    /// Named family: uniform, exponential, neg_exponential, pareto, normal,
    /// footnote_mixture.
    #[staticmethod]
    fn named(family: &str, params: Vec<f64>) -> PyResult<Self> {
        core::make_named_prior(family, &params).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        core::Distribution::from_text(text).map(Self).map_err(err)
    }

    #[staticmethod]
    fn mixture(components: Vec<(f64, PyRef<'_, PyDistribution>)>) -> PyResult<Self> {
        let parts: Vec<(f64, &core::Distribution)> = components.iter().map(|(w, d)| (*w, &d.0)).collect();
        core::Distribution::mixture(&parts).map(Self).map_err(err)
    }

    fn to_text(&self) -> PyResult<String> {
        self.0.to_text().map_err(err)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.0.cdf(x)
    }

    fn density(&self, x: f64) -> f64 {
        self.0.density_at(x)
    }

    fn atom_mass(&self, x: f64) -> f64 {
        self.0.atom_mass_at(x)
    }

    fn quantile(&self, q: f64) -> f64 {
        self.0.quantile(q)
    }

    fn mean(&self) -> PyResult<f64> {
        self.0.mean().map_err(err)
    }

    fn support(&self) -> (f64, f64) {
        self.0.support()
    }

    fn truncate(&self, lo: f64, hi: f64) -> PyResult<Self> {
        self.0.truncate(lo, hi).map(Self).map_err(err)
    }

    fn __repr__(&self) -> String {
        let (a, b) = self.0.support();
        format!(
            "Distribution(support=({a}, {b}), pieces={}, atoms={})",
            self.0.pieces().len(),
            self.0.atoms().len()
        )
    }
}

/// Signal kernel `f(z | x)`.
#[pyclass(name = "Kernel", module = "fosd_screen", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyKernel(core::SignalKernel);

#[pymethods]
impl PyKernel {
    #[staticmethod]
    fn triangle_rectangle() -> Self {
        Self(core::triangle_rectangle_kernel())
    }

    #[staticmethod]
    fn three_piece(iota: f64, xi: f64) -> PyResult<Self> {
        core::three_piece_kernel(iota, xi).map(Self).map_err(err)
    }

    #[staticmethod]
    fn additive(noise: &PyDistribution) -> Self {
        Self(core::additive_kernel(noise.0.clone()))
    }

    /// Truthful report with constant probability `p`, else `x + e`, `e ~ g`.
    #[staticmethod]
    fn evasion(p: f64, g: &PyDistribution) -> PyResult<Self> {
        core::evasion_kernel(core::PFunction::Constant(p), g.0.clone()).map(Self).map_err(err)
    }

    fn density(&self, z: f64, x: f64) -> f64 {
        self.0.density(z, x)
    }

    fn total_mass(&self, x: f64) -> f64 {
        self.0.total_mass(x)
    }

    fn noise_range(&self) -> (f64, f64) {
        self.0.noise_range()
    }

    fn threshold_transform(&self) -> PyResult<PyThresholdSignal> {
        core::threshold_transform(&self.0).map(PyThresholdSignal).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Kernel({})", self.0.name())
    }
}

/// Threshold signal `S` derived from a kernel.
#[pyclass(name = "ThresholdSignal", module = "fosd_screen", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyThresholdSignal(core::ThresholdSignal);

#[pymethods]
impl PyThresholdSignal {
    fn cdf(&self, s: f64, x: f64) -> f64 {
        self.0.cdf(s, x)
    }

    fn range(&self) -> (f64, f64) {
        self.0.range()
    }
}

#[pyclass(name = "Posterior", module = "fosd_screen", frozen)]
struct PyPosterior(core::Posterior);

#[pymethods]
impl PyPosterior {
    #[getter]
    fn dist(&self) -> PyDistribution {
        PyDistribution(self.0.dist.clone())
    }

    #[getter]
    fn evidence(&self) -> f64 {
        self.0.evidence
    }

    fn cdf(&self, w: f64) -> f64 {
        self.0.dist.cdf(w)
    }

    fn to_text(&self) -> PyResult<String> {
        self.0.to_text().map_err(err)
    }
}

#[pyclass(name = "FosdVerdict", module = "fosd_screen", frozen, get_all)]
struct PyFosdVerdict {
    relation: String,
    witness_points: Vec<f64>,
    max_gap_pos: f64,
    max_gap_neg: f64,
    min_interior_gap: f64,
}

#[pymethods]
impl PyFosdVerdict {
    fn __repr__(&self) -> String {
        format!(
            "FosdVerdict(relation={}, max_gap_pos={:e}, max_gap_neg={:e})",
            self.relation, self.max_gap_pos, self.max_gap_neg
        )
    }
}

#[pyfunction]
fn posterior_point(prior: &PyDistribution, kernel: &PyKernel, z: f64) -> PyResult<PyPosterior> {
    core::posterior_point(&prior.0, &kernel.0, z).map(PyPosterior).map_err(err)
}

#[pyfunction]
fn posterior_threshold(prior: &PyDistribution, signal: &PyThresholdSignal, b: f64) -> PyResult<PyPosterior> {
    core::posterior_threshold(&prior.0, &signal.0, b).map(PyPosterior).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (d1, d2, tol = core::ordering::DEFAULT_TOL, grid = core::ordering::DEFAULT_GRID))]
fn fosd_compare(d1: &PyDistribution, d2: &PyDistribution, tol: f64, grid: usize) -> PyFosdVerdict {
    let v = core::fosd_compare_grid(&d1.0, &d2.0, tol, grid);
    PyFosdVerdict {
        relation: v.relation.as_str().to_string(),
        witness_points: v.witness_points,
        max_gap_pos: v.max_gap_pos,
        max_gap_neg: v.max_gap_neg,
        min_interior_gap: v.min_interior_gap,
    }
}

/// `E[X | S >= b]` for each cutoff; returns `(values, evidences)`.
#[pyfunction]
fn screening_curve(prior: &PyDistribution, signal: &PyThresholdSignal, cutoffs: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let c = core::screening_curve(&prior.0, core::ScreeningSignal::Threshold(&signal.0), &cutoffs).map_err(err)?;
    Ok((c.values, c.evidences))
}

/// Index pairs `(i, j)`, `i < j`, where the curve drops.
#[pyfunction]
#[pyo3(signature = (prior, signal, cutoffs, tol = core::ordering::DEFAULT_TOL))]
fn detect_reversals(prior: &PyDistribution, signal: &PyThresholdSignal, cutoffs: Vec<f64>, tol: f64) -> PyResult<Vec<(usize, usize)>> {
    let c = core::screening_curve(&prior.0, core::ScreeningSignal::Threshold(&signal.0), &cutoffs).map_err(err)?;
    Ok(core::detect_reversals(&c, tol))
}

/// `(precluded, trigger)` for one signal pair.
#[pyfunction]
fn ruleout_lemma(prior: &PyDistribution, kernel: &PyKernel, z1: f64, z2: f64) -> PyResult<(bool, String)> {
    let v = core::ruleout_lemma(&prior.0, kernel.0.noise_range(), z1, z2).map_err(err)?;
    Ok((v.precluded, v.trigger.as_str().to_string()))
}

#[pyfunction]
fn ruleout_corollary(prior: &PyDistribution, kernel: &PyKernel) -> PyResult<(bool, String)> {
    let v = core::ruleout_corollary(&prior.0, kernel.0.noise_range()).map_err(err)?;
    Ok((v.precluded, v.trigger.as_str().to_string()))
}

#[pyfunction]
#[pyo3(signature = (n, confidence = core::mc::DKW_CONFIDENCE))]
fn dkw_band(n: usize, confidence: f64) -> f64 {
    core::dkw_band(n, confidence)
}

/// Samples `X | |Z - z| <= bandwidth` and compares against the analytic
/// posterior; returns `(statistic, band, passed)`.
#[pyfunction]
#[pyo3(signature = (prior, kernel, z, n = core::mc::DEFAULT_MC_N, seed = 1, bandwidth = core::mc::DEFAULT_BANDWIDTH))]
fn oracle_check(py: Python<'_>, prior: &PyDistribution, kernel: &PyKernel, z: f64, n: usize, seed: u64, bandwidth: f64) -> PyResult<(f64, f64, bool)> {
    let (p, k) = (prior.0.clone(), kernel.0.clone());
    py.detach(move || {
        let analytic = core::posterior_point(&p, &k, z)?;
        core::oracle_check(&p, &k, &core::McCondition::band(z, bandwidth), &analytic.dist, n, seed)
    })
    .map(|r| (r.statistic, r.band, r.pass))
    .map_err(err)
}

#[pyfunction]
fn list_builtins() -> Vec<&'static str> {
    scenario::list_builtins()
}

/// Runs a builtin scenario or config file; returns `(passed, failures, report_dir)`.
#[pyfunction]
#[pyo3(signature = (target, out = "fosd-report".to_string(), mc_n = None, seed = None, timestamp = false))]
fn run_scenario(py: Python<'_>, target: &str, out: String, mc_n: Option<usize>, seed: Option<u64>, timestamp: bool) -> PyResult<(bool, Vec<String>, String)> {
    let opts = RunOptions {
        out: PathBuf::from(out),
        timestamp,
        dump_samples: false,
        overrides: Overrides {
            mc_n,
            seed,
            ..Overrides::default()
        },
    };
    let target = target.to_string();
    let rep = py
        .detach(move || scenario::load(&target).and_then(|s| scenario::run_scenario(&s, &opts)))
        .map_err(err)?;
    Ok((rep.passed(), rep.failures.clone(), rep.dir.display().to_string()))
}

#[pymodule]
fn fosd_screen(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FosdError", m.py().get_type::<FosdError>())?;
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyThresholdSignal>()?;
    m.add_class::<PyPosterior>()?;
    m.add_class::<PyFosdVerdict>()?;
    m.add_function(wrap_pyfunction!(posterior_point, m)?)?;
    m.add_function(wrap_pyfunction!(posterior_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(fosd_compare, m)?)?;
    m.add_function(wrap_pyfunction!(screening_curve, m)?)?;
    m.add_function(wrap_pyfunction!(detect_reversals, m)?)?;
    m.add_function(wrap_pyfunction!(ruleout_lemma, m)?)?;
    m.add_function(wrap_pyfunction!(ruleout_corollary, m)?)?;
    m.add_function(wrap_pyfunction!(dkw_band, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_check, m)?)?;
    m.add_function(wrap_pyfunction!(list_builtins, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
