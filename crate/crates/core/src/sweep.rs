//! Parameter sweeps, CSV output and the named figure presets.

use std::io::Write;

use rayon::prelude::*;

use crate::config::{WlanConfig, KEYS};
use crate::engine::analyze;
use crate::error::{Error, Result};
use crate::sim::{run_replicated, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EngineSel {
    #[default]
    Analysis,
    Simulation,
    Both,
}

impl EngineSel {
    pub fn runs_analysis(self) -> bool {
        matches!(self, EngineSel::Analysis | EngineSel::Both)
    }

    pub fn runs_simulation(self) -> bool {
        matches!(self, EngineSel::Simulation | EngineSel::Both)
    }
}

impl std::str::FromStr for EngineSel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analysis" | "model" => Ok(EngineSel::Analysis),
            "sim" | "simulation" => Ok(EngineSel::Simulation),
            "both" => Ok(EngineSel::Both),
            other => Err(Error::config("engine", format!("expected analysis, sim or both, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub seed: u64,
    pub replications: u32,
    pub sim_time_s: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            seed: 1,
            replications: 20,
            sim_time_s: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<String>,
    /// `key=value` overrides applied before each swept value.
    pub overrides: Vec<String>,
    pub engines: EngineSel,
}

impl SweepSpec {
    pub fn new<S: ToString>(parameter: &str, values: impl IntoIterator<Item = S>) -> Self {
        SweepSpec {
            parameter: parameter.to_string(),
            values: values.into_iter().map(|v| v.to_string()).collect(),
            overrides: Vec::new(),
            engines: EngineSel::Analysis,
        }
    }

    pub fn with_overrides(mut self, overrides: &[&str]) -> Self {
        self.overrides.extend(overrides.iter().map(|s| s.to_string()));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !KEYS.contains(&self.parameter.as_str()) {
            return Err(Error::UnknownParameter {
                name: self.parameter.clone(),
                valid: KEYS.join(", "),
            });
        }
        if self.values.is_empty() {
            return Err(Error::config("values", "sweep needs at least one value"));
        }
        Ok(())
    }

    /// Config for the `i`-th value.
    pub fn config_at(&self, base: &WlanConfig, i: usize) -> Result<WlanConfig> {
        let mut cfg = base.clone();
        cfg.apply_overrides(&self.overrides)?;
        cfg.set(&self.parameter, &self.values[i])?;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub const CSV_HEADER: [&str; 12] = [
    "parameter", "value", "engine", "s_d", "s_u", "s_d_std", "s_u_std", "tau_ap", "tau_sta", "pc_ap",
    "pc_sta", "csi_factor",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter: String,
    pub value: String,
    pub engine: &'static str,
    pub s_d: f64,
    pub s_u: f64,
    pub s_d_std: f64,
    pub s_u_std: f64,
    pub tau_ap: f64,
    pub tau_sta: f64,
    pub pc_ap: f64,
    pub pc_sta: f64,
    pub csi_factor: f64,
}

impl SweepRow {
    pub fn fields(&self) -> [String; 12] {
        [
            self.parameter.clone(),
            self.value.clone(),
            self.engine.to_string(),
            fmt_g(self.s_d),
            fmt_g(self.s_u),
            fmt_g(self.s_d_std),
            fmt_g(self.s_u_std),
            fmt_g(self.tau_ap),
            fmt_g(self.tau_sta),
            fmt_g(self.pc_ap),
            fmt_g(self.pc_sta),
            fmt_g(self.csi_factor),
        ]
    }
}

fn rows_for(base: &WlanConfig, spec: &SweepSpec, sim: &SimSettings, i: usize) -> Result<Vec<SweepRow>> {
    let cfg = spec.config_at(base, i)?;
    let mut rows = Vec::new();
    let row = |engine| SweepRow {
        parameter: spec.parameter.clone(),
        value: spec.values[i].clone(),
        engine,
        s_d: 0.0,
        s_u: 0.0,
        s_d_std: 0.0,
        s_u_std: 0.0,
        tau_ap: 0.0,
        tau_sta: 0.0,
        pc_ap: 0.0,
        pc_sta: 0.0,
        csi_factor: 1.0,
    };
    if spec.engines.runs_analysis() {
        let r = analyze(&cfg)?;
        let fp = r.fixed_point;
        rows.push(SweepRow {
            s_d: r.s_d,
            s_u: r.s_u,
            tau_ap: fp.tau_ap,
            tau_sta: fp.tau_sta,
            pc_ap: fp.pc_ap,
            pc_sta: fp.pc_sta,
            csi_factor: r.csi_factor,
            ..row("analysis")
        });
    }
    if spec.engines.runs_simulation() {
        let r = run_replicated(&SimConfig {
            seed: sim.seed,
            replications: sim.replications,
            sim_time_s: sim.sim_time_s,
            ..SimConfig::new(cfg.clone())
        })?;
        rows.push(SweepRow {
            s_d: r.s_d_mean,
            s_u: r.s_u_mean,
            s_d_std: r.s_d_std,
            s_u_std: r.s_u_std,
            tau_ap: r.tau_ap(),
            tau_sta: if cfg.contention_free { 0.0 } else { r.tau_sta(cfg.n) },
            pc_ap: r.pc_ap(),
            pc_sta: r.pc_sta(),
            csi_factor: r.csi_factor(),
            ..row("sim")
        });
    }
    Ok(rows)
}

/// Evaluates every value of the sweep, in order.
pub fn run_sweep(base: &WlanConfig, spec: &SweepSpec, sim: &SimSettings) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let per_value: Vec<Result<Vec<SweepRow>>> = (0..spec.values.len())
        .into_par_iter()
        .map(|i| rows_for(base, spec, sim, i))
        .collect();
    let mut rows = Vec::new();
    for r in per_value {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// `printf("%g")`: six significant digits, trailing zeros removed.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub id: &'static str,
    pub description: &'static str,
    pub series: Vec<Series>,
}

fn series(label: &str, spec: SweepSpec) -> Series {
    Series { label: label.to_string(), spec }
}

fn powers_of_two(max: u32) -> Vec<u32> {
    std::iter::successors(Some(1u32), |v| Some(v * 2)).take_while(|v| *v <= max).collect()
}

const N_GRID: [u32; 12] = [1, 2, 4, 8, 12, 16, 24, 32, 40, 48, 56, 64];
const AC: [&str; 4] = ["amendment=ac", "beta=1", "max_ampdu=64", "sigma_us=4"];

pub const PRESET_IDS: [&str; 12] = [
    "fig1a", "fig1b", "fig3a", "fig3b", "fig4a", "fig4b", "fig5", "fig6", "fig7", "fig8", "fig9a", "fig9b",
];

pub fn preset(id: &str) -> Result<Preset> {
    let mcs = 0..=11;
    let (description, series) = match id {
        "fig1a" => (
            "AP alone, SU DL throughput per MCS, no sounding",
            vec![
                series("na1", SweepSpec::new("mcs", mcs.clone()).with_overrides(&["n=0", "alpha=1", "lambda_csi=0", "max_ampdu=1"])),
                series("na256", SweepSpec::new("mcs", mcs).with_overrides(&["n=0", "alpha=1", "lambda_csi=0"])),
            ],
        ),
        "fig1b" => (
            "AP alone, MU DL throughput to 64 stations per MCS, no sounding",
            vec![
                series("na1", SweepSpec::new("mcs", mcs.clone()).with_overrides(&["n=64", "contention_free=true", "alpha=0", "beta=1", "lambda_csi=0", "max_ampdu=1"])),
                series("na256", SweepSpec::new("mcs", mcs).with_overrides(&["n=64", "contention_free=true", "alpha=0", "beta=1", "lambda_csi=0"])),
            ],
        ),
        "fig3a" => {
            let ac_nocsi: Vec<&str> = AC.iter().copied().chain(["lambda_csi=0"]).collect();
            (
                "DL and UL throughput against N, 11ax and 11ac, with and without sounding",
                vec![
                    series("ax", SweepSpec::new("n", N_GRID)),
                    series("ax-nocsi", SweepSpec::new("n", N_GRID).with_overrides(&["lambda_csi=0"])),
                    series("ac", SweepSpec::new("n", N_GRID).with_overrides(&AC)),
                    series("ac-nocsi", SweepSpec::new("n", N_GRID).with_overrides(&ac_nocsi)),
                ],
            )
        }
        "fig3b" => (
            "Throughput against N for several sounding rates, plus stations that never contend",
            vec![
                series("csi0", SweepSpec::new("n", N_GRID).with_overrides(&["lambda_csi=0"])),
                series("csi10", SweepSpec::new("n", N_GRID).with_overrides(&["lambda_csi=10"])),
                series("csi20", SweepSpec::new("n", N_GRID).with_overrides(&["lambda_csi=20"])),
                series("csi50", SweepSpec::new("n", N_GRID).with_overrides(&["lambda_csi=50"])),
                series("nocontention", SweepSpec::new("n", N_GRID).with_overrides(&["contention_free=true"])),
            ],
        ),
        "fig4a" => (
            "Effect of alpha against N",
            ["0.2", "0.6", "1"]
                .iter()
                .map(|a| {
                    let o = format!("alpha={a}");
                    series(&format!("alpha{a}"), SweepSpec::new("n", N_GRID).with_overrides(&[&o]))
                })
                .collect(),
        ),
        "fig4b" => (
            "Effect of beta against N",
            ["0.2", "0.5", "0.8"]
                .iter()
                .map(|b| {
                    let o = format!("beta={b}");
                    series(&format!("beta{b}"), SweepSpec::new("n", N_GRID).with_overrides(&[&o]))
                })
                .collect(),
        ),
        "fig5" => (
            "Throughput against sounding rate for 8 and 64 stations",
            [8, 64]
                .iter()
                .map(|n| {
                    let o = format!("n={n}");
                    series(&format!("n{n}"), SweepSpec::new("lambda_csi", [0, 1, 2, 5, 10, 20, 50, 100]).with_overrides(&[&o]))
                })
                .collect(),
        ),
        "fig6" => (
            "Throughput against maximum A-MPDU size at 80 MHz",
            [8, 64]
                .iter()
                .map(|n| {
                    let o = format!("n={n}");
                    series(&format!("n{n}"), SweepSpec::new("max_ampdu", powers_of_two(256)).with_overrides(&[&o, "b_mhz=80"]))
                })
                .collect(),
        ),
        "fig7" => (
            "Throughput against channel width for 32 stations",
            [64, 256]
                .iter()
                .map(|a| {
                    let o = format!("max_ampdu={a}");
                    series(&format!("ampdu{a}"), SweepSpec::new("b_mhz", [20, 40, 80, 160]).with_overrides(&[&o, "n=32"]))
                })
                .collect(),
        ),
        "fig8" => (
            "Throughput against AP antennas for 32 stations",
            [20, 80, 160]
                .iter()
                .map(|b| {
                    let o = format!("b_mhz={b}");
                    series(&format!("b{b}"), SweepSpec::new("m_ap", 1..=8).with_overrides(&[&o, "n=32"]))
                })
                .collect(),
        ),
        "fig9a" | "fig9b" => {
            let beta = if id == "fig9a" { "beta=0.8" } else { "beta=0.2" };
            (
                if id == "fig9a" {
                    "Throughput against station CW_min, alpha 0.2, beta 0.8"
                } else {
                    "Throughput against station CW_min, alpha 0.2, beta 0.2"
                },
                [8, 32]
                    .iter()
                    .map(|n| {
                        let o = format!("n={n}");
                        series(
                            &format!("n{n}"),
                            SweepSpec::new("cw_min_sta", [15, 31, 63, 127, 255, 511, 1023])
                                .with_overrides(&[&o, "alpha=0.2", beta]),
                        )
                    })
                    .collect(),
            )
        }
        other => {
            return Err(Error::config(
                "preset",
                format!("unknown preset `{other}`; known: {}", PRESET_IDS.join(", ")),
            ))
        }
    };
    Ok(Preset {
        id: PRESET_IDS.iter().find(|p| **p == id).expect("listed id"),
        description,
        series,
    })
}

pub fn presets() -> Vec<Preset> {
    PRESET_IDS.iter().map(|id| preset(id).expect("built-in preset")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(123.456789), "123.457");
        assert_eq!(fmt_g(0.000123456), "0.000123456");
        assert_eq!(fmt_g(0.0000123456), "1.23456e-05");
        assert_eq!(fmt_g(1234567.0), "1.23457e+06");
        assert_eq!(fmt_g(999999.5), "1e+06");
        assert_eq!(fmt_g(-2.5), "-2.5");
        assert_eq!(fmt_g(100000.0), "100000");
        assert_eq!(fmt_g(f64::INFINITY), "inf");
    }

    #[test]
    fn unknown_parameter() {
        let spec = SweepSpec::new("bogus", [1]);
        let err = run_sweep(&WlanConfig::default(), &spec, &SimSettings::default()).unwrap_err();
        match err {
            Error::UnknownParameter { valid, .. } => assert!(valid.contains("cw_min_sta")),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn empty_values() {
        let spec = SweepSpec::new::<u32>("n", []);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn rows_in_value_order() {
        let spec = SweepSpec::new("n", [4, 1, 16]);
        let rows = run_sweep(&WlanConfig::default(), &spec, &SimSettings::default()).unwrap();
        let values: Vec<&str> = rows.iter().map(|r| r.value.as_str()).collect();
        assert_eq!(values, ["4", "1", "16"]);
        let csv = to_csv_string(&rows).unwrap();
        assert!(csv.starts_with("parameter,value,engine,s_d,s_u,"));
        assert!(csv.ends_with('\n'));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn every_preset_builds_valid_configs() {
        for p in presets() {
            assert!(!p.series.is_empty());
            for s in &p.series {
                s.spec.validate().unwrap();
                for i in 0..s.spec.values.len() {
                    s.spec
                        .config_at(&WlanConfig::default(), i)
                        .unwrap_or_else(|e| panic!("{} {} {}: {e}", p.id, s.label, s.spec.values[i]));
                }
            }
        }
        assert!(preset("fig99").is_err());
    }
}
