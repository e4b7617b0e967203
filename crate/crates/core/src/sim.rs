//! Slotted Monte Carlo simulator of the same MAC.
//!
//! Time advances in backoff slots. Every node counts down its backoff once
//! per slot, whether the slot is empty or holds a transmission; nodes whose
//! counter is zero at a slot boundary transmit in that slot. A slot with
//! one transmitter is a success, with more a collision. Busy slots last the
//! exchange (or collision) duration plus one empty slot. Sounding rounds
//! take the channel at the first slot boundary after they fall due and
//! freeze all counters while they run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::WlanConfig;
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::scheduler::pick_stations;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Ap,
    Sta,
}

/// How the contention window grows with the backoff stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowRule {
    /// `CW(i) = 2^i * CW_min`: the stage-`i` mean is exactly
    /// `2^i * CW_min / 2`, the window assumed by the analytical model.
    #[default]
    Scaled,
    /// `CW(i) = min(2^i * (CW_min + 1) - 1, CW_max)`, as in 802.11.
    Standard,
}

impl WindowRule {
    pub fn window(self, cw_min: u32, cw_max: u32, stage: u32) -> u32 {
        match self {
            WindowRule::Scaled => (cw_min as u64) << stage,
            WindowRule::Standard => {
                (((cw_min as u64 + 1) << stage) - 1).min(cw_max as u64)
            }
        }
        .min(u32::MAX as u64) as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeState {
    pub role: Role,
    pub backoff_counter: u32,
    pub backoff_stage: u32,
    pub cw_current: u32,
}

#[derive(Debug, Clone, Copy)]
struct Backoff {
    cw_min: u32,
    cw_max: u32,
    stages: u32,
    rule: WindowRule,
}

impl NodeState {
    fn new<R: Rng>(role: Role, b: &Backoff, rng: &mut R) -> Self {
        let mut node = NodeState {
            role,
            backoff_counter: 0,
            backoff_stage: 0,
            cw_current: 0,
        };
        node.redraw(b, rng);
        node
    }

    fn redraw<R: Rng>(&mut self, b: &Backoff, rng: &mut R) {
        self.cw_current = b.rule.window(b.cw_min, b.cw_max, self.backoff_stage);
        self.backoff_counter = rng.random_range(0..=self.cw_current);
    }

    fn on_success<R: Rng>(&mut self, b: &Backoff, rng: &mut R) {
        self.backoff_stage = 0;
        self.redraw(b, rng);
    }

    fn on_collision<R: Rng>(&mut self, b: &Backoff, rng: &mut R) {
        self.backoff_stage = (self.backoff_stage + 1).min(b.stages);
        self.redraw(b, rng);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub wlan: WlanConfig,
    pub seed: u64,
    pub sim_time_s: f64,
    pub replications: u32,
    pub window_rule: WindowRule,
}

impl SimConfig {
    pub fn new(wlan: WlanConfig) -> Self {
        SimConfig {
            wlan,
            seed: 1,
            sim_time_s: 10.0,
            replications: 20,
            window_rule: WindowRule::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sim_time_s.is_finite() && self.sim_time_s > 0.0) {
            return Err(Error::config("sim_time", "simulated time must be positive"));
        }
        if self.replications == 0 {
            return Err(Error::config("reps", "at least one replication is required"));
        }
        Ok(())
    }
}

/// Slot classes, in the order a1 a2 a3 a4 b1 c1 c2 c3 c4.
pub const SLOT_CLASSES: usize = 9;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventCounts {
    /// Slots per class: DL-SU, UL-SU, DL-MU, UL-MU successes, empty slots,
    /// then AP-SU, AP-DL-MU, AP-UL-MU and station-only collisions.
    pub slots: [u64; SLOT_CLASSES],
    pub soundings: u64,
    pub ap_attempts: u64,
    pub ap_collisions: u64,
    pub sta_attempts: u64,
    pub sta_collisions: u64,
}

impl EventCounts {
    pub fn total_slots(&self) -> u64 {
        self.slots.iter().sum()
    }

    pub fn successes(&self) -> u64 {
        self.slots[..4].iter().sum()
    }

    pub fn collisions(&self) -> u64 {
        self.slots[5..].iter().sum()
    }

    fn add(&mut self, o: &EventCounts) {
        for (a, b) in self.slots.iter_mut().zip(o.slots) {
            *a += b;
        }
        self.soundings += o.soundings;
        self.ap_attempts += o.ap_attempts;
        self.ap_collisions += o.ap_collisions;
        self.sta_attempts += o.sta_attempts;
        self.sta_collisions += o.sta_collisions;
    }
}

/// Where the simulated time went, in us.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AirtimeBreakdown {
    pub empty_us: f64,
    pub success_us: f64,
    pub collision_us: f64,
    pub sounding_us: f64,
}

impl AirtimeBreakdown {
    pub fn total(&self) -> f64 {
        self.empty_us + self.success_us + self.collision_us + self.sounding_us
    }

    fn scaled_add(&mut self, o: &AirtimeBreakdown, w: f64) {
        self.empty_us += w * o.empty_us;
        self.success_us += w * o.success_us;
        self.collision_us += w * o.collision_us;
        self.sounding_us += w * o.sounding_us;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub s_d_mean: f64,
    pub s_u_mean: f64,
    /// Sample standard deviation across replications (0 for one run).
    pub s_d_std: f64,
    pub s_u_std: f64,
    pub replications: u32,
    /// Summed over replications.
    pub event_counts: EventCounts,
    /// Mean over replications.
    pub airtime: AirtimeBreakdown,
    /// Mean simulated duration of one replication, us.
    pub elapsed_us: f64,
    /// Frames delivered per station id `1..=n` (index 0 is station 1),
    /// summed over replications.
    pub station_frames: Vec<u64>,
}

impl SimResult {
    /// Measured per-slot AP transmit probability.
    pub fn tau_ap(&self) -> f64 {
        ratio(self.event_counts.ap_attempts, self.event_counts.total_slots())
    }

    /// Measured per-slot transmit probability of one station.
    pub fn tau_sta(&self, n: u32) -> f64 {
        ratio(self.event_counts.sta_attempts, self.event_counts.total_slots() * n as u64)
    }

    pub fn pc_ap(&self) -> f64 {
        ratio(self.event_counts.ap_collisions, self.event_counts.ap_attempts)
    }

    pub fn pc_sta(&self) -> f64 {
        ratio(self.event_counts.sta_collisions, self.event_counts.sta_attempts)
    }

    /// Fraction of simulated time not spent sounding.
    pub fn csi_factor(&self) -> f64 {
        if self.elapsed_us > 0.0 {
            1.0 - self.airtime.sounding_us / self.elapsed_us
        } else {
            1.0
        }
    }

    /// Observed frequency of each slot class.
    pub fn slot_frequencies(&self) -> [f64; SLOT_CLASSES] {
        let total = self.event_counts.total_slots();
        self.event_counts.slots.map(|c| ratio(c, total))
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ApAttempt {
    Su,
    MuDl,
    MuUl,
}

/// One replication.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let scenario = Scenario::build(&config.wlan)?;
    Ok(run_scenario(&scenario, config.seed, config.sim_time_s, config.window_rule))
}

fn run_scenario(s: &Scenario, seed: u64, sim_time_s: f64, rule: WindowRule) -> SimResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = &s.config;
    let c = &s.contention;
    let d = &s.durations;
    let te = cfg.t_e_us;
    let l_d = cfg.l_d as f64;
    let n = cfg.n;
    let contenders = c.contenders() as usize;

    let ap_backoff = Backoff {
        cw_min: c.cw_min_ap,
        cw_max: cfg.cw_max_ap,
        stages: c.m_ap_stages,
        rule,
    };
    let sta_backoff = Backoff {
        cw_min: c.cw_min_sta,
        cw_max: cfg.cw_max_sta,
        stages: c.m_sta_stages,
        rule,
    };

    let mut ap = NodeState::new(Role::Ap, &ap_backoff, &mut rng);
    let mut stations: Vec<NodeState> = (0..contenders)
        .map(|_| NodeState::new(Role::Sta, &sta_backoff, &mut rng))
        .collect();

    let end = sim_time_s * 1e6;
    let period = s.csi_period_us();
    let t_csi = s.t_csi_us();
    let mut next_csi = period;

    let mut clock = 0.0;
    let mut events = EventCounts::default();
    let mut air = AirtimeBreakdown::default();
    let mut station_frames = vec![0u64; n as usize];
    let (mut dl_bits, mut ul_bits) = (0.0f64, 0.0f64);
    let mut transmitters: Vec<usize> = Vec::with_capacity(contenders);

    let n_su = s.aggregation.su.n_a as u64;
    let n_mu_dl = s.aggregation.mu_dl.n_a as u64;
    let n_mu_ul = s.aggregation.mu_ul.n_a as u64;

    while clock < end {
        if clock >= next_csi {
            clock += t_csi;
            air.sounding_us += t_csi;
            events.soundings += 1;
            next_csi += period;
            continue;
        }

        let min_counter = stations
            .iter()
            .map(|s| s.backoff_counter)
            .fold(ap.backoff_counter, u32::min);
        if min_counter > 0 {
            let mut k = min_counter as u64;
            if next_csi.is_finite() {
                k = k.min(((next_csi - clock) / te).ceil().max(1.0) as u64);
            }
            k = k.min(((end - clock) / te).ceil().max(1.0) as u64);
            let dt = k as f64 * te;
            clock += dt;
            air.empty_us += dt;
            events.slots[4] += k;
            let k = k as u32;
            ap.backoff_counter -= k;
            for st in &mut stations {
                st.backoff_counter -= k;
            }
            continue;
        }

        let ap_tx = ap.backoff_counter == 0;
        transmitters.clear();
        transmitters.extend(
            stations
                .iter()
                .enumerate()
                .filter(|(_, st)| st.backoff_counter == 0)
                .map(|(i, _)| i),
        );

        let attempt = if ap_tx {
            events.ap_attempts += 1;
            Some(if rng.random::<f64>() < c.alpha {
                ApAttempt::Su
            } else if rng.random::<f64>() < c.beta {
                ApAttempt::MuDl
            } else {
                ApAttempt::MuUl
            })
        } else {
            None
        };
        events.sta_attempts += transmitters.len() as u64;

        let count = transmitters.len() + ap_tx as usize;
        let busy = if count == 1 {
            let (class, busy) = match attempt {
                Some(ApAttempt::Su) => {
                    dl_bits += (n_su as f64) * l_d;
                    if n > 0 {
                        let dst = rng.random_range(0..n as usize);
                        station_frames[dst] += n_su;
                    }
                    (0, d.t_su)
                }
                Some(kind) => {
                    let (frames, class, busy) = if kind == ApAttempt::MuDl {
                        (n_mu_dl, 2, d.t_mu_d)
                    } else {
                        (n_mu_ul, 3, d.t_mu_u)
                    };
                    let served = pick_stations(n, s.v_u, &mut rng)
                        .expect("v_u never exceeds the station count");
                    let bits = (served.len() as u64 * frames) as f64 * l_d;
                    if kind == ApAttempt::MuDl {
                        dl_bits += bits;
                    } else {
                        ul_bits += bits;
                    }
                    for id in served {
                        station_frames[id as usize - 1] += frames;
                    }
                    (class, busy)
                }
                None => {
                    ul_bits += (n_su as f64) * l_d;
                    station_frames[transmitters[0]] += n_su;
                    (1, d.t_su)
                }
            };
            events.slots[class] += 1;
            air.success_us += busy + te;
            busy
        } else {
            let (class, busy) = match attempt {
                Some(ApAttempt::Su) => (5, d.t_c_su),
                Some(ApAttempt::MuDl) => (6, d.t_c_mu),
                Some(ApAttempt::MuUl) => (7, d.t_c_mu),
                None => (8, d.t_c_su),
            };
            events.slots[class] += 1;
            if ap_tx {
                events.ap_collisions += 1;
            }
            events.sta_collisions += transmitters.len() as u64;
            air.collision_us += busy + te;
            busy
        };
        clock += busy + te;

        let success = count == 1;
        if ap_tx {
            if success {
                ap.on_success(&ap_backoff, &mut rng);
            } else {
                ap.on_collision(&ap_backoff, &mut rng);
            }
        } else {
            ap.backoff_counter -= 1;
        }
        let mut next_tx = transmitters.iter().peekable();
        for (i, st) in stations.iter_mut().enumerate() {
            if next_tx.peek() == Some(&&i) {
                next_tx.next();
                if success {
                    st.on_success(&sta_backoff, &mut rng);
                } else {
                    st.on_collision(&sta_backoff, &mut rng);
                }
            } else {
                st.backoff_counter -= 1;
            }
        }
    }

    SimResult {
        s_d_mean: dl_bits / clock,
        s_u_mean: ul_bits / clock,
        s_d_std: 0.0,
        s_u_std: 0.0,
        replications: 1,
        event_counts: events,
        airtime: air,
        elapsed_us: clock,
        station_frames,
    }
}

/// Seed of replication `index`, derived from the master seed (SplitMix64).
pub fn replication_seed(master: u64, index: u32) -> u64 {
    let mut z = master
        .wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `replications` independent replications and aggregates them.
pub fn run_replicated(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let scenario = Scenario::build(&config.wlan)?;
    let runs: Vec<SimResult> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            run_scenario(
                &scenario,
                replication_seed(config.seed, r),
                config.sim_time_s,
                config.window_rule,
            )
        })
        .collect();
    Ok(aggregate(&runs))
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn aggregate(runs: &[SimResult]) -> SimResult {
    let (s_d_mean, s_d_std) = mean_std(runs.iter().map(|r| r.s_d_mean));
    let (s_u_mean, s_u_std) = mean_std(runs.iter().map(|r| r.s_u_mean));
    let w = 1.0 / runs.len() as f64;
    let mut events = EventCounts::default();
    let mut airtime = AirtimeBreakdown::default();
    let mut station_frames = vec![0u64; runs[0].station_frames.len()];
    let mut elapsed = 0.0;
    for r in runs {
        events.add(&r.event_counts);
        airtime.scaled_add(&r.airtime, w);
        elapsed += w * r.elapsed_us;
        for (a, b) in station_frames.iter_mut().zip(&r.station_frames) {
            *a += b;
        }
    }
    SimResult {
        s_d_mean,
        s_u_mean,
        s_d_std,
        s_u_std,
        replications: runs.len() as u32,
        event_counts: events,
        airtime,
        elapsed_us: elapsed,
        station_frames,
    }
}
