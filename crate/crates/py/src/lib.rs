//! Python bindings: clustering primitives, code tables, range rules and the
//! full pipeline.
//!
//! Points are passed as lists of equal-length float lists. Errors in the
//! input raise `ValueError`, file problems raise `OSError`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use influence_core::cluster::{self as core_cluster, Dataset, PotentialState};
use influence_core::microdata::{income_bin_label as core_income_bin_label, Education};
use influence_core::report::{write_influence_report, ReportOptions};
use influence_core::search::pipeline::{run_pipeline as core_run_pipeline, PipelineConfig};
use influence_core::search as core_search;
use influence_core::synth::{self as core_synth, SynthParams};
use influence_core::Error;

fn to_py(e: Error) -> PyErr {
    match e.root() {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Verify(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn dataset(points: &[Vec<f64>]) -> PyResult<Dataset> {
    Dataset::from_rows(points).map_err(to_py)
}

#[pyclass(name = "ClusterParams", from_py_object)]
#[derive(Clone)]
struct PyClusterParams {
    inner: core_cluster::ClusterParams,
}

#[pymethods]
impl PyClusterParams {
    #[new]
    #[pyo3(signature = (cluster_radius=0.5, quash_factor=1.25, accept_ratio=0.5, reject_ratio=0.15, max_centers=None))]
    fn new(
        cluster_radius: f64,
        quash_factor: f64,
        accept_ratio: f64,
        reject_ratio: f64,
        max_centers: Option<usize>,
    ) -> PyResult<Self> {
        let inner = core_cluster::ClusterParams {
            cluster_radius,
            quash_factor,
            accept_ratio,
            reject_ratio,
            max_centers,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn cluster_radius(&self) -> f64 {
        self.inner.cluster_radius
    }

    #[getter]
    fn quash_factor(&self) -> f64 {
        self.inner.quash_factor
    }

    #[getter]
    fn accept_ratio(&self) -> f64 {
        self.inner.accept_ratio
    }

    #[getter]
    fn reject_ratio(&self) -> f64 {
        self.inner.reject_ratio
    }

    #[getter]
    fn max_centers(&self) -> Option<usize> {
        self.inner.max_centers
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "ClusterParams(cluster_radius={}, quash_factor={}, accept_ratio={}, reject_ratio={}, max_centers={:?})",
            p.cluster_radius, p.quash_factor, p.accept_ratio, p.reject_ratio, p.max_centers
        )
    }
}

fn params_or_default(params: Option<PyClusterParams>) -> core_cluster::ClusterParams {
    params.map(|p| p.inner).unwrap_or_default()
}

#[pyclass(name = "ClusterModel", skip_from_py_object)]
struct PyClusterModel {
    inner: core_cluster::ClusterModel,
}

#[pymethods]
impl PyClusterModel {
    #[getter]
    fn n_clusters(&self) -> usize {
        self.inner.n_clusters()
    }

    /// Centers in normalized coordinates.
    #[getter]
    fn centers(&self) -> Vec<Vec<f64>> {
        self.inner.centers.clone()
    }

    /// Centers in the input's units.
    #[getter]
    fn centers_original(&self) -> Vec<Vec<f64>> {
        self.inner.centers_original.clone()
    }

    #[getter]
    fn center_indices(&self) -> Vec<usize> {
        self.inner.center_indices.clone()
    }

    #[getter]
    fn assignment(&self) -> Vec<usize> {
        self.inner.assignment.clone()
    }

    fn sizes(&self) -> Vec<usize> {
        self.inner.sizes()
    }

    fn __repr__(&self) -> String {
        format!("ClusterModel(n_clusters={}, sizes={:?})", self.inner.n_clusters(), self.inner.sizes())
    }
}

/// Min-max scaling into the unit hypercube. Returns the scaled points and
/// the per-dimension `(min, max)` bounds.
#[pyfunction]
fn normalize(points: Vec<Vec<f64>>) -> PyResult<(Vec<Vec<f64>>, Vec<(f64, f64)>)> {
    let (scaled, map) = core_cluster::normalize(&dataset(&points)?);
    Ok((scaled.to_rows(), map.bounds))
}

/// Initial potential of every (already normalized) point.
#[pyfunction]
#[pyo3(signature = (points, params=None))]
fn initial_potentials(points: Vec<Vec<f64>>, params: Option<PyClusterParams>) -> PyResult<Vec<f64>> {
    let params = params_or_default(params);
    Ok(core_cluster::initial_potentials(&dataset(&points)?, &params).potentials)
}

/// Potentials after removing the influence of the point at `center`.
#[pyfunction]
#[pyo3(signature = (potentials, points, center, params=None))]
fn subtract_center(
    potentials: Vec<f64>,
    points: Vec<Vec<f64>>,
    center: usize,
    params: Option<PyClusterParams>,
) -> PyResult<Vec<f64>> {
    let params = params_or_default(params);
    let mut state = PotentialState {
        potentials,
        iteration: 0,
        first_center_potential: None,
    };
    core_cluster::subtract_center(&mut state, center, &dataset(&points)?, &params).map_err(to_py)?;
    Ok(state.potentials)
}

/// Indices of the accepted centers among normalized points, in acceptance order.
#[pyfunction]
#[pyo3(signature = (points, params=None))]
fn select_centers(points: Vec<Vec<f64>>, params: Option<PyClusterParams>) -> PyResult<Vec<usize>> {
    core_cluster::select_centers(&dataset(&points)?, &params_or_default(params)).map_err(to_py)
}

/// Index of the nearest center for every point.
#[pyfunction]
fn assign(points: Vec<Vec<f64>>, centers: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
    core_cluster::assign(&dataset(&points)?, &centers).map_err(to_py)
}

/// Normalizes, selects centers and assigns every point.
#[pyfunction]
#[pyo3(signature = (points, params=None))]
fn fit(points: Vec<Vec<f64>>, params: Option<PyClusterParams>) -> PyResult<PyClusterModel> {
    let inner = core_cluster::fit(&dataset(&points)?, &params_or_default(params)).map_err(to_py)?;
    Ok(PyClusterModel { inner })
}

/// Income bin (1-11) of a dollar amount.
#[pyfunction]
fn income_bin(dollars: i64) -> PyResult<u8> {
    influence_core::microdata::income_bin(dollars).map_err(to_py)
}

#[pyfunction]
fn income_bin_label(bin: u8) -> PyResult<String> {
    if !(1..=influence_core::microdata::INCOME_BIN_COUNT).contains(&bin) {
        return Err(PyValueError::new_err(format!("income bin {bin} is outside 1..=11")));
    }
    Ok(core_income_bin_label(bin))
}

#[pyfunction]
fn education_label(code: i64) -> PyResult<&'static str> {
    Education::try_from(code).map(Education::label).map_err(to_py)
}

#[pyfunction]
fn education_code(label: &str) -> PyResult<u8> {
    Education::from_label(label)
        .map(Education::code)
        .ok_or_else(|| PyValueError::new_err(format!("unknown education label `{label}`")))
}

/// Hull of the values whose count is at least `fraction` of the largest count.
#[pyfunction]
#[pyo3(signature = (counts, fraction=0.8))]
fn range_from_counts(counts: BTreeMap<i64, usize>, fraction: f64) -> PyResult<Option<(i64, i64)>> {
    Ok(core_search::range_from_counts(&counts, fraction)
        .map_err(to_py)?
        .map(|r| (r.lo, r.hi)))
}

/// Hull of the values whose count reaches `threshold`.
#[pyfunction]
fn window_from_counts(counts: BTreeMap<i64, usize>, threshold: usize) -> PyResult<(i64, i64)> {
    let r = core_search::window_from_counts(&counts, threshold).map_err(to_py)?;
    Ok((r.lo, r.hi))
}

/// Total variation distance between two histograms; `None` if either is empty.
#[pyfunction]
fn total_variation(p: Vec<f64>, q: Vec<f64>) -> Option<f64> {
    core_search::total_variation(&p, &q)
}

/// Runs the pipeline from a TOML config. Writes the report directory when
/// `out_dir` is given (or `write=True`), and returns a summary dict.
#[pyfunction]
#[pyo3(signature = (config, out_dir=None, write=false))]
fn run_pipeline<'py>(
    py: Python<'py>,
    config: PathBuf,
    out_dir: Option<PathBuf>,
    write: bool,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let mut config = PipelineConfig::load(&config).map_err(to_py)?;
    let write = write || out_dir.is_some();
    if let Some(dir) = out_dir {
        config.report.output_dir = dir;
    }
    let outcome = py.detach(|| core_run_pipeline(&config)).map_err(to_py)?;
    if write {
        write_influence_report(&config.report.output_dir, &config, &outcome, ReportOptions::default())
            .map_err(to_py)?;
    }
    let d = pyo3::types::PyDict::new(py);
    d.set_item("families", outcome.families.len())?;
    d.set_item("n1", outcome.cohorts.n1.len())?;
    d.set_item("n2", outcome.cohorts.n2.len())?;
    if let Some(w) = &outcome.window {
        d.set_item("father_window", (w.father.lo, w.father.hi))?;
        d.set_item("mother_window", (w.mother.lo, w.mother.hi))?;
    }
    d.set_item("centers", outcome.clusters.model.centers_original.clone())?;
    d.set_item("sizes", outcome.clusters.sizes())?;
    d.set_item("prototype_sizes", outcome.prototypes.sizes())?;
    let ranges: Vec<Vec<(i64, i64)>> = outcome
        .ranges
        .ranges
        .iter()
        .map(|rs| rs.iter().map(|r| (r.lo, r.hi)).collect())
        .collect();
    d.set_item("ranges", ranges)?;
    let divergence: Vec<(usize, &str, Option<f64>, bool)> = outcome
        .report
        .entries
        .iter()
        .map(|e| (e.cluster + 1, e.attribute.name(), e.divergence, e.flagged))
        .collect();
    d.set_item("divergence", divergence)?;
    if write {
        d.set_item("output_dir", config.report.output_dir)?;
    }
    Ok(d)
}

/// Fixed-width synthetic microdata text.
#[pyfunction]
#[pyo3(signature = (seed=core_synth::DEFAULT_SEED, households=core_synth::DEFAULT_HOUSEHOLDS))]
fn generate_microdata(seed: u64, households: usize) -> String {
    core_synth::generate_microdata(&SynthParams { seed, households })
}

/// Writes microdata, schema and pipeline config into `out_dir`; returns the paths.
#[pyfunction]
#[pyo3(signature = (out_dir, seed=core_synth::DEFAULT_SEED, households=core_synth::DEFAULT_HOUSEHOLDS))]
fn synth(out_dir: PathBuf, seed: u64, households: usize) -> PyResult<Vec<PathBuf>> {
    core_synth::write_fixture(&out_dir, &SynthParams { seed, households }).map_err(to_py)
}

#[pymodule]
fn influence(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyClusterParams>()?;
    m.add_class::<PyClusterModel>()?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(initial_potentials, m)?)?;
    m.add_function(wrap_pyfunction!(subtract_center, m)?)?;
    m.add_function(wrap_pyfunction!(select_centers, m)?)?;
    m.add_function(wrap_pyfunction!(assign, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(income_bin, m)?)?;
    m.add_function(wrap_pyfunction!(income_bin_label, m)?)?;
    m.add_function(wrap_pyfunction!(education_label, m)?)?;
    m.add_function(wrap_pyfunction!(education_code, m)?)?;
    m.add_function(wrap_pyfunction!(range_from_counts, m)?)?;
    m.add_function(wrap_pyfunction!(window_from_counts, m)?)?;
    m.add_function(wrap_pyfunction!(total_variation, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(generate_microdata, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    Ok(())
}
