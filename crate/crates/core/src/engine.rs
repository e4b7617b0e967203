//! End-to-end entry points: analytical model, simulator and the comparison
//! between them.

use crate::config::WlanConfig;
use crate::error::{Error, Result};
use crate::model::{
    slot_distribution, solve_fixed_point, throughput, ThroughputInputs, ThroughputReport,
    DEFAULT_MAX_ITER, DEFAULT_TOLERANCE,
};
use crate::scenario::Scenario;
use crate::sim::{run_replicated, SimConfig, SimResult};

/// Analytical throughput of `config`.
pub fn analyze(config: &WlanConfig) -> Result<ThroughputReport> {
    analyze_detailed(config).map(|(_, r)| r)
}

/// Like [`analyze`], also returning the derived airtime scenario.
pub fn analyze_detailed(config: &WlanConfig) -> Result<(Scenario, ThroughputReport)> {
    let s = Scenario::build(config)?;
    let report = analyze_scenario(&s)?;
    Ok((s, report))
}

pub fn analyze_scenario(s: &Scenario) -> Result<ThroughputReport> {
    let fp = solve_fixed_point(&s.contention, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)?;
    let dist = slot_distribution(&fp, &s.contention)?;
    let inputs = ThroughputInputs {
        durations: s.durations,
        t_e: s.config.t_e_us,
        aggregation: s.aggregation,
        l_d: s.config.l_d as f64,
        v_u: s.v_u,
        csi_factor: s.csi_factor,
    };
    throughput(&dist, &fp, &inputs)
}

/// Replicated simulation with the default run length.
pub fn simulate(config: &WlanConfig, seed: u64, replications: u32) -> Result<SimResult> {
    run_replicated(&SimConfig {
        seed,
        replications,
        ..SimConfig::new(config.clone())
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub analysis: ThroughputReport,
    pub simulation: SimResult,
    pub tolerance: f64,
    pub gap_d: f64,
    pub gap_u: f64,
    pub passed: bool,
}

/// Relative gap of `sim` from `model`. Two zeros agree exactly.
pub fn relative_gap(model: f64, sim: f64) -> f64 {
    if model == sim {
        0.0
    } else if model == 0.0 {
        f64::INFINITY
    } else {
        (sim - model).abs() / model.abs()
    }
}

/// Runs both engines and compares DL and UL throughput.
pub fn validate(sim: &SimConfig, tolerance: f64) -> Result<ValidationReport> {
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(Error::config("tolerance", format!("must be non-negative, got {tolerance}")));
    }
    let analysis = analyze(&sim.wlan)?;
    let simulation = run_replicated(sim)?;
    let gap_d = relative_gap(analysis.s_d, simulation.s_d_mean);
    let gap_u = relative_gap(analysis.s_u, simulation.s_u_mean);
    let within = |g: f64| g <= tolerance && tolerance > 0.0;
    Ok(ValidationReport {
        passed: within(gap_d) && within(gap_u),
        analysis,
        simulation,
        tolerance,
        gap_d,
        gap_u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_positive() {
        let r = analyze(&WlanConfig::default()).unwrap();
        assert!(r.s_d > 0.0 && r.s_u > 0.0);
        assert!(r.csi_factor < 1.0);
    }

    #[test]
    fn no_stations_no_uplink() {
        let r = analyze(&WlanConfig { n: 0, ..Default::default() }).unwrap();
        assert_eq!(r.s_u, 0.0);
        assert!(r.s_d > 0.0);
    }

    #[test]
    fn ac_rejects_uplink_mu() {
        let cfg = WlanConfig { beta: 0.5, ..WlanConfig::ac_defaults() };
        assert!(analyze(&cfg).unwrap_err().is_config_error());
    }

    #[test]
    fn gaps() {
        assert_eq!(relative_gap(0.0, 0.0), 0.0);
        assert!(relative_gap(0.0, 1.0).is_infinite());
        assert!((relative_gap(100.0, 97.0) - 0.03).abs() < 1e-12);
    }

    #[test]
    fn zero_tolerance_fails() {
        let sim = SimConfig {
            sim_time_s: 0.2,
            replications: 1,
            ..SimConfig::new(WlanConfig::default())
        };
        assert!(!validate(&sim, 0.0).unwrap().passed);
    }
}
