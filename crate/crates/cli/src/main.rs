use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use axsat::engine::{analyze_detailed, validate};
use axsat::model::SlotDistribution;
use axsat::sim::{run_replicated, SimConfig};
use axsat::sweep::{self, fmt_g, run_sweep, write_csv, EngineSel, SimSettings, SweepRow, SweepSpec};
use axsat::{Error, WlanConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "axsat", version, about = "Saturation throughput of 802.11ax WLANs: analytical model and slotted simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form throughput for one configuration.
    Analyze {
        #[command(flatten)]
        config: ConfigArgs,
        /// Also write the result as a one-row CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo throughput for one configuration.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs both engines and checks that they agree.
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Largest accepted relative gap on DL and UL throughput.
        #[arg(long, default_value_t = 0.03)]
        tolerance: f64,
    },
    /// Sweeps one parameter and emits CSV.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Config key to vary.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, default_value = "analysis")]
        engine: String,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Named sweeps reproducing the reference figures.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
    /// Prints the effective configuration.
    Config {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Writes one CSV per series as `<id>_<label>.csv`.
    Run {
        id: String,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value = "analysis")]
        engine: String,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key=value` override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    reps: u32,
    /// Seconds of simulated time per replication.
    #[arg(long = "sim-time", default_value_t = 10.0)]
    sim_time: f64,
}

impl SimArgs {
    fn settings(&self) -> SimSettings {
        SimSettings {
            seed: self.seed,
            replications: self.reps,
            sim_time_s: self.sim_time,
        }
    }

    fn sim_config(&self, wlan: WlanConfig) -> SimConfig {
        SimConfig {
            seed: self.seed,
            replications: self.reps,
            sim_time_s: self.sim_time,
            ..SimConfig::new(wlan)
        }
    }
}

enum Failure {
    Invalid(String),
    Rejected(String),
    /// Reader went away, as with `| head`.
    ClosedPipe,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if matches!(&e, Error::Io(msg) if msg.contains("Broken pipe")) {
            return Failure::ClosedPipe;
        }
        if e.is_config_error() {
            Failure::Invalid(e.to_string())
        } else {
            Failure::Rejected(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Failure::ClosedPipe;
        }
        Failure::Rejected(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

impl ConfigArgs {
    fn load(&self) -> Result<WlanConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => WlanConfig::load(path)?,
            None => WlanConfig::default(),
        };
        cfg.apply_overrides(&self.set)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn engine(s: &str) -> Result<EngineSel, Failure> {
    Ok(s.parse::<EngineSel>()?)
}

/// Single-row sweep over `n` at its current value.
fn single(cfg: &WlanConfig) -> Result<Vec<SweepRow>, Failure> {
    Ok(run_sweep(cfg, &SweepSpec::new("n", [cfg.n]), &SimSettings::default())?)
}

fn write_rows(rows: &[SweepRow], out: Option<&Path>) -> Outcome {
    match out {
        Some(path) => write_csv(rows, BufWriter::new(File::create(path)?))?,
        None => write_csv(rows, io::stdout().lock())?,
    }
    Ok(())
}

fn print_fields(out: &mut impl Write, fields: &[(&str, f64)]) -> io::Result<()> {
    for (k, v) in fields {
        writeln!(out, "{k:<12} {}", fmt_g(*v))?;
    }
    Ok(())
}

fn cmd_analyze(config: &ConfigArgs, out: Option<&Path>) -> Outcome {
    let cfg = config.load()?;
    let (scenario, r) = analyze_detailed(&cfg)?;
    let fp = &r.fixed_point;
    let mut so = io::stdout().lock();
    print_fields(
        &mut so,
        &[
            ("s_d", r.s_d),
            ("s_u", r.s_u),
            ("e_d_d", r.e_d_d),
            ("e_d_u", r.e_d_u),
            ("mean_slot", r.mean_slot_us),
            ("tau_ap", fp.tau_ap),
            ("tau_sta", fp.tau_sta),
            ("pc_ap", fp.pc_ap),
            ("pc_sta", fp.pc_sta),
            ("csi_factor", r.csi_factor),
            ("t_csi", scenario.t_csi_us()),
            ("t_su", scenario.durations.t_su),
            ("t_mu_d", scenario.durations.t_mu_d),
            ("t_mu_u", scenario.durations.t_mu_u),
        ],
    )?;
    for (label, p) in SlotDistribution::LABELS.iter().zip(r.slot_dist.as_array()) {
        writeln!(so, "p_{label:<10} {}", fmt_g(p))?;
    }
    drop(so);
    if let Some(path) = out {
        write_rows(&single(&cfg)?, Some(path))?;
    }
    Ok(())
}

fn cmd_simulate(config: &ConfigArgs, sim: &SimArgs, out: Option<&Path>) -> Outcome {
    let cfg = config.load()?;
    let r = run_replicated(&sim.sim_config(cfg.clone()))?;
    let mut so = io::stdout().lock();
    print_fields(
        &mut so,
        &[
            ("s_d", r.s_d_mean),
            ("s_u", r.s_u_mean),
            ("s_d_std", r.s_d_std),
            ("s_u_std", r.s_u_std),
            ("tau_ap", r.tau_ap()),
            ("tau_sta", if cfg.contention_free { 0.0 } else { r.tau_sta(cfg.n) }),
            ("pc_ap", r.pc_ap()),
            ("pc_sta", r.pc_sta()),
            ("csi_factor", r.csi_factor()),
        ],
    )?;
    writeln!(so, "{:<12} {}", "reps", r.replications)?;
    writeln!(so, "{:<12} {}", "slots", r.event_counts.total_slots())?;
    writeln!(so, "{:<12} {}", "soundings", r.event_counts.soundings)?;
    drop(so);
    if let Some(path) = out {
        let row = SweepRow {
            parameter: "n".into(),
            value: cfg.n.to_string(),
            engine: "sim",
            s_d: r.s_d_mean,
            s_u: r.s_u_mean,
            s_d_std: r.s_d_std,
            s_u_std: r.s_u_std,
            tau_ap: r.tau_ap(),
            tau_sta: if cfg.contention_free { 0.0 } else { r.tau_sta(cfg.n) },
            pc_ap: r.pc_ap(),
            pc_sta: r.pc_sta(),
            csi_factor: r.csi_factor(),
        };
        write_rows(&[row], Some(path))?;
    }
    Ok(())
}

fn cmd_validate(config: &ConfigArgs, sim: &SimArgs, tolerance: f64) -> Outcome {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Failure::Invalid(format!("tolerance must be positive, got {tolerance}")));
    }
    let cfg = config.load()?;
    let v = validate(&sim.sim_config(cfg), tolerance)?;
    println!("{:<8} {:>12} {:>12} {:>10}", "", "analysis", "sim", "gap");
    println!("{:<8} {:>12} {:>12} {:>9.3}%", "s_d", fmt_g(v.analysis.s_d), fmt_g(v.simulation.s_d_mean), 100.0 * v.gap_d);
    println!("{:<8} {:>12} {:>12} {:>9.3}%", "s_u", fmt_g(v.analysis.s_u), fmt_g(v.simulation.s_u_mean), 100.0 * v.gap_u);
    if v.passed {
        println!("PASS within {}%", fmt_g(100.0 * tolerance));
        Ok(())
    } else {
        println!("FAIL outside {}%", fmt_g(100.0 * tolerance));
        Err(Failure::Rejected("engines disagree".into()))
    }
}

fn cmd_sweep(config: &ConfigArgs, sim: &SimArgs, param: &str, values: &[String], eng: &str, out: Option<&Path>) -> Outcome {
    let base = config.load()?;
    let spec = SweepSpec {
        engines: engine(eng)?,
        ..SweepSpec::new(param, values)
    };
    let rows = run_sweep(&base, &spec, &sim.settings())?;
    write_rows(&rows, out)
}

fn cmd_presets(action: &PresetAction) -> Outcome {
    match action {
        PresetAction::List => {
            for p in sweep::presets() {
                let labels: Vec<&str> = p.series.iter().map(|s| s.label.as_str()).collect();
                println!("{:<6} {} [{}]", p.id, p.description, labels.join(", "));
            }
            Ok(())
        }
        PresetAction::Run { id, config, sim, engine: eng, out } => {
            let preset = sweep::preset(id)?;
            let base = config.load()?;
            let engines = engine(eng)?;
            std::fs::create_dir_all(out)?;
            for s in &preset.series {
                let spec = SweepSpec { engines, ..s.spec.clone() };
                let rows = run_sweep(&base, &spec, &sim.settings())?;
                let path = out.join(format!("{}_{}.csv", preset.id, s.label));
                write_rows(&rows, Some(&path))?;
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Analyze { config, out } => cmd_analyze(config, out.as_deref()),
        Command::Simulate { config, sim, out } => cmd_simulate(config, sim, out.as_deref()),
        Command::Validate { config, sim, tolerance } => cmd_validate(config, sim, *tolerance),
        Command::Sweep { config, sim, param, values, engine, out } => {
            cmd_sweep(config, sim, param, values, engine, out.as_deref())
        }
        Command::Presets { action } => cmd_presets(action),
        Command::Config { config } => {
            print!("{}", config.load()?.to_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) | Err(Failure::ClosedPipe) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("axsat: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Rejected(msg)) => {
            eprintln!("axsat: {msg}");
            ExitCode::from(1)
        }
    }
}
