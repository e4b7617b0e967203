//! Python bindings, importable as `axsat`.

use std::collections::BTreeMap;

use axsat::config::KEYS;
use axsat::engine::{analyze_detailed, validate as validate_engines};
use axsat::model::{expected_backoff_slots as backoff, SlotDistribution};
use axsat::phy::{phy_rate_mbps as rate, ChannelWidth, Mcs};
use axsat::scenario::Scenario;
use axsat::scheduler::{allocate_mu as allocate, AntennaConfig};
use axsat::sim::{run_replicated, SimConfig};
use axsat::sweep::{self as sweeps, run_sweep, to_csv_string, EngineSel, SimSettings, SweepRow, SweepSpec};
use axsat::{Error, WlanConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict};

fn err(e: Error) -> PyErr {
    if e.is_config_error() || matches!(e, Error::Precondition(_) | Error::Domain(_)) {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn text(value: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(b) = value.cast::<PyBool>() {
        return Ok(b.is_true().to_string());
    }
    Ok(value.str()?.to_cow()?.into_owned())
}

/// Network configuration. Keyword arguments override the defaults.
#[pyclass(name = "Config", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: WlanConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = WlanConfig::default();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                inner.set(&k.extract::<String>()?, &text(&v)?).map_err(err)?;
            }
        }
        Ok(PyConfig { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyConfig { inner: WlanConfig::from_text(text).map_err(err)? })
    }

    #[staticmethod]
    fn keys() -> Vec<&'static str> {
        KEYS.to_vec()
    }

    fn get(&self, key: &str) -> PyResult<String> {
        self.inner.get(key).map_err(err)
    }

    fn set(&mut self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        self.inner.set(key, &text(value)?).map_err(err)
    }

    /// Copy with the given keys replaced.
    #[pyo3(signature = (**kwargs))]
    fn replace(&self, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut out = self.clone();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                out.inner.set(&k.extract::<String>()?, &text(&v)?).map_err(err)?;
            }
        }
        Ok(out)
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn as_dict(&self) -> BTreeMap<&'static str, String> {
        KEYS.iter().map(|k| (*k, self.inner.get(k).expect("known key"))).collect()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!("Config(n={}, alpha={}, beta={}, b_mhz={}, mcs={}, amendment={})", c.n, c.alpha, c.beta, c.b_mhz, c.mcs, c.get("amendment").unwrap_or_default())
    }
}

fn config_or_default(config: Option<PyConfig>) -> WlanConfig {
    config.map(|c| c.inner).unwrap_or_default()
}

fn slot_map(d: [f64; 9]) -> BTreeMap<&'static str, f64> {
    SlotDistribution::LABELS.iter().copied().zip(d).collect()
}

#[pyclass(name = "Report", get_all, frozen, skip_from_py_object)]
struct PyReport {
    s_d: f64,
    s_u: f64,
    e_d_d: f64,
    e_d_u: f64,
    mean_slot_us: f64,
    tau_ap: f64,
    tau_sta: f64,
    pc_ap: f64,
    pc_sta: f64,
    csi_factor: f64,
    t_csi_us: f64,
    slot_probabilities: BTreeMap<&'static str, f64>,
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!("Report(s_d={:.3}, s_u={:.3}, csi_factor={:.5})", self.s_d, self.s_u, self.csi_factor)
    }
}

#[pyclass(name = "SimResult", get_all, frozen, skip_from_py_object)]
struct PySimResult {
    s_d: f64,
    s_u: f64,
    s_d_std: f64,
    s_u_std: f64,
    replications: u32,
    tau_ap: f64,
    tau_sta: f64,
    pc_ap: f64,
    pc_sta: f64,
    csi_factor: f64,
    soundings: u64,
    slot_frequencies: BTreeMap<&'static str, f64>,
}

#[pymethods]
impl PySimResult {
    fn __repr__(&self) -> String {
        format!(
            "SimResult(s_d={:.3}+-{:.3}, s_u={:.3}+-{:.3}, replications={})",
            self.s_d, self.s_d_std, self.s_u, self.s_u_std, self.replications
        )
    }
}

fn sim_result(r: &axsat::SimResult, cfg: &WlanConfig) -> PySimResult {
    PySimResult {
        s_d: r.s_d_mean,
        s_u: r.s_u_mean,
        s_d_std: r.s_d_std,
        s_u_std: r.s_u_std,
        replications: r.replications,
        tau_ap: r.tau_ap(),
        tau_sta: if cfg.contention_free { 0.0 } else { r.tau_sta(cfg.n) },
        pc_ap: r.pc_ap(),
        pc_sta: r.pc_sta(),
        csi_factor: r.csi_factor(),
        soundings: r.event_counts.soundings,
        slot_frequencies: slot_map(r.slot_frequencies()),
    }
}

fn sim_config(wlan: WlanConfig, seed: u64, reps: u32, sim_time: f64) -> SimConfig {
    SimConfig { seed, replications: reps, sim_time_s: sim_time, ..SimConfig::new(wlan) }
}

/// Closed-form throughput.
#[pyfunction]
#[pyo3(signature = (config=None))]
fn analyze(config: Option<PyConfig>) -> PyResult<PyReport> {
    let (s, r) = analyze_detailed(&config_or_default(config)).map_err(err)?;
    let fp = r.fixed_point;
    Ok(PyReport {
        s_d: r.s_d,
        s_u: r.s_u,
        e_d_d: r.e_d_d,
        e_d_u: r.e_d_u,
        mean_slot_us: r.mean_slot_us,
        tau_ap: fp.tau_ap,
        tau_sta: fp.tau_sta,
        pc_ap: fp.pc_ap,
        pc_sta: fp.pc_sta,
        csi_factor: r.csi_factor,
        t_csi_us: s.t_csi_us(),
        slot_probabilities: slot_map(r.slot_dist.as_array()),
    })
}

/// Monte Carlo throughput, averaged over replications.
#[pyfunction]
#[pyo3(signature = (config=None, seed=1, reps=20, sim_time=10.0))]
fn simulate(py: Python<'_>, config: Option<PyConfig>, seed: u64, reps: u32, sim_time: f64) -> PyResult<PySimResult> {
    let cfg = config_or_default(config);
    let sc = sim_config(cfg.clone(), seed, reps, sim_time);
    let r = py.detach(|| run_replicated(&sc)).map_err(err)?;
    Ok(sim_result(&r, &cfg))
}

/// Runs both engines; returns a dict with both results, the gaps and `passed`.
#[pyfunction]
#[pyo3(signature = (config=None, tolerance=0.03, seed=1, reps=20, sim_time=10.0))]
fn validate<'py>(
    py: Python<'py>,
    config: Option<PyConfig>,
    tolerance: f64,
    seed: u64,
    reps: u32,
    sim_time: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config_or_default(config);
    let sc = sim_config(cfg.clone(), seed, reps, sim_time);
    let v = py.detach(|| validate_engines(&sc, tolerance)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("analysis", analyze(Some(PyConfig { inner: cfg.clone() }))?)?;
    d.set_item("simulation", sim_result(&v.simulation, &cfg))?;
    d.set_item("gap_d", v.gap_d)?;
    d.set_item("gap_u", v.gap_u)?;
    d.set_item("tolerance", v.tolerance)?;
    d.set_item("passed", v.passed)?;
    Ok(d)
}

/// Single-user PHY rate in Mb/s.
#[pyfunction]
#[pyo3(signature = (mcs, v_s=1, b_mhz=20, dcm=false))]
fn phy_rate_mbps(mcs: u8, v_s: u32, b_mhz: u32, dcm: bool) -> PyResult<f64> {
    rate(Mcs::he(mcs, dcm).map_err(err)?, v_s, b_mhz).map_err(err)
}

/// RU and spatial-stream allocation for one MU transmission.
#[pyfunction]
#[pyo3(signature = (n, m_ap=4, m_sta=1, b_mhz=160))]
fn allocate_mu(n: u32, m_ap: u32, m_sta: u32, b_mhz: u32) -> PyResult<BTreeMap<&'static str, u32>> {
    let b = ChannelWidth::from_mhz(b_mhz).map_err(err)?;
    let a = allocate(n, &AntennaConfig { m_ap, m_sta }, b).map_err(err)?;
    Ok(BTreeMap::from([
        ("v_u", a.v_u),
        ("n_ru", a.n_ru),
        ("b_ru_mhz", a.b_ru.mhz()),
        ("v_m", a.v_m),
        ("v_s", a.v_s),
    ]))
}

/// Duration of one sounding round in us; 0 when nothing is sounded.
#[pyfunction]
#[pyo3(signature = (config=None))]
fn t_csi(config: Option<PyConfig>) -> PyResult<f64> {
    Ok(Scenario::build(&config_or_default(config)).map_err(err)?.t_csi_us())
}

/// Mean backoff slots per attempt.
#[pyfunction]
fn expected_backoff_slots(cw_min: u32, m: u32, p_c: f64) -> PyResult<f64> {
    backoff(cw_min, m, p_c).map_err(err)
}

fn row_dict<'py>(py: Python<'py>, row: &SweepRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("parameter", &row.parameter)?;
    d.set_item("value", &row.value)?;
    d.set_item("engine", row.engine)?;
    for (k, v) in [
        ("s_d", row.s_d),
        ("s_u", row.s_u),
        ("s_d_std", row.s_d_std),
        ("s_u_std", row.s_u_std),
        ("tau_ap", row.tau_ap),
        ("tau_sta", row.tau_sta),
        ("pc_ap", row.pc_ap),
        ("pc_sta", row.pc_sta),
        ("csi_factor", row.csi_factor),
    ] {
        d.set_item(k, v)?;
    }
    Ok(d)
}

fn sweep_rows(
    py: Python<'_>,
    config: Option<PyConfig>,
    param: &str,
    values: &[Bound<'_, PyAny>],
    engine: &str,
    sim: SimSettings,
) -> PyResult<Vec<SweepRow>> {
    let values: Vec<String> = values.iter().map(text).collect::<PyResult<_>>()?;
    let spec = SweepSpec { engines: engine.parse::<EngineSel>().map_err(err)?, ..SweepSpec::new(param, values) };
    let base = config_or_default(config);
    py.detach(|| run_sweep(&base, &spec, &sim)).map_err(err)
}

/// Sweeps one config key; returns one dict per value and engine.
#[pyfunction]
#[pyo3(signature = (param, values, config=None, engine="analysis", seed=1, reps=20, sim_time=10.0))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    param: &str,
    values: Vec<Bound<'py, PyAny>>,
    config: Option<PyConfig>,
    engine: &str,
    seed: u64,
    reps: u32,
    sim_time: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let sim = SimSettings { seed, replications: reps, sim_time_s: sim_time };
    let rows = sweep_rows(py, config, param, &values, engine, sim)?;
    rows.iter().map(|r| row_dict(py, r)).collect()
}

/// Same as `sweep`, rendered as CSV text.
#[pyfunction]
#[pyo3(signature = (param, values, config=None, engine="analysis", seed=1, reps=20, sim_time=10.0))]
#[allow(clippy::too_many_arguments)]
fn sweep_csv(
    py: Python<'_>,
    param: &str,
    values: Vec<Bound<'_, PyAny>>,
    config: Option<PyConfig>,
    engine: &str,
    seed: u64,
    reps: u32,
    sim_time: f64,
) -> PyResult<String> {
    let sim = SimSettings { seed, replications: reps, sim_time_s: sim_time };
    let rows = sweep_rows(py, config, param, &values, engine, sim)?;
    to_csv_string(&rows).map_err(err)
}

/// Preset ids mapped to their descriptions.
#[pyfunction]
fn presets() -> BTreeMap<&'static str, &'static str> {
    sweeps::presets().into_iter().map(|p| (p.id, p.description)).collect()
}

/// Runs every series of a preset; returns `{label: csv_text}`.
#[pyfunction]
#[pyo3(signature = (id, engine="analysis", seed=1, reps=20, sim_time=10.0))]
fn run_preset(py: Python<'_>, id: &str, engine: &str, seed: u64, reps: u32, sim_time: f64) -> PyResult<BTreeMap<String, String>> {
    let preset = sweeps::preset(id).map_err(err)?;
    let engines = engine.parse::<EngineSel>().map_err(err)?;
    let sim = SimSettings { seed, replications: reps, sim_time_s: sim_time };
    py.detach(|| {
        preset
            .series
            .iter()
            .map(|s| {
                let spec = SweepSpec { engines, ..s.spec.clone() };
                let rows = run_sweep(&WlanConfig::default(), &spec, &sim)?;
                Ok((s.label.clone(), to_csv_string(&rows)?))
            })
            .collect::<axsat::Result<_>>()
    })
    .map_err(err)
}

#[pymodule]
#[pyo3(name = "axsat")]
fn axsat_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PySimResult>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(phy_rate_mbps, m)?)?;
    m.add_function(wrap_pyfunction!(allocate_mu, m)?)?;
    m.add_function(wrap_pyfunction!(t_csi, m)?)?;
    m.add_function(wrap_pyfunction!(expected_backoff_slots, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add("CSV_HEADER", sweeps::CSV_HEADER.to_vec())?;
    Ok(())
}
