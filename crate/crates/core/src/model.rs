//! Closed-form saturation model.
//!
//! The AP and the `N` stations are two classes of saturated contenders. Each
//! class transmits in a backoff slot with probability
//! `tau = 1 / (E[backoff slots] + 1)`, where the expected backoff depends on
//! the conditional collision probability of that class. The coupled system
//! is solved by damped fixed-point iteration, the slot outcome distribution
//! follows from the two `tau`s, and throughput is bits delivered per
//! expected slot duration.

use crate::error::{Error, Result};
use crate::frames::{AggregationPlan, ExchangeDurations};

/// Half-width of the band around `p_c = 1/2` where the closed form is
/// replaced by the equivalent finite sum.
const HALF_BAND: f64 = 1e-4;

/// Expected number of backoff slots drawn per transmission attempt.
///
/// Stage `i` draws from a window of mean `2^i * cw_min / 2`, capped at
/// stage `m`, and an attempt reaches stage `i` with probability
/// `p_c^i (1 - p_c)` (the tail beyond `m` is lumped into stage `m`).
pub fn expected_backoff_slots(cw_min: u32, m: u32, p_c: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p_c) {
        return Err(Error::Domain(format!(
            "collision probability must lie in [0, 1), got {p_c}"
        )));
    }
    if cw_min == 0 {
        return Ok(0.0);
    }
    let half = cw_min as f64 / 2.0;
    let two_p = 2.0 * p_c;
    if (p_c - 0.5).abs() < HALF_BAND {
        // (1 - p) * sum_{i<=m} (2p)^i + 2^m p^(m+1)
        let mut geometric = 0.0;
        let mut term = 1.0;
        for _ in 0..=m {
            geometric += term;
            term *= two_p;
        }
        let tail = 2f64.powi(m as i32) * p_c.powi(m as i32 + 1);
        return Ok(half * ((1.0 - p_c) * geometric + tail));
    }
    let num = 1.0 - p_c - p_c * two_p.powi(m as i32);
    Ok(num / (1.0 - two_p) * half)
}

/// Per-slot transmit probability for a backoff process. At `p_c = 1`
/// every attempt ends in the last stage, so the backoff tends to
/// `2^m * cw_min / 2`.
fn attempt_probability(cw_min: u32, m: u32, p_c: f64) -> Result<f64> {
    let slots = if p_c >= 1.0 {
        cw_min as f64 / 2.0 * 2f64.powi(m as i32)
    } else {
        expected_backoff_slots(cw_min, m, p_c)?
    };
    Ok(1.0 / (slots + 1.0))
}

/// Number of backoff stages between `cw_min` and `cw_max`,
/// `log2((cw_max + 1) / (cw_min + 1))` rounded down.
pub fn backoff_stages(cw_min: u32, cw_max: u32) -> u32 {
    if cw_max <= cw_min {
        return 0;
    }
    let ratio = (cw_max as u64 + 1) / (cw_min as u64 + 1);
    63 - ratio.leading_zeros()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentionParams {
    pub cw_min_ap: u32,
    pub cw_min_sta: u32,
    pub m_ap_stages: u32,
    pub m_sta_stages: u32,
    /// Number of stations.
    pub n: u32,
    /// Fraction of AP accesses that are SU.
    pub alpha: f64,
    /// Fraction of AP MU accesses that are DL.
    pub beta: f64,
    /// Stations never contend; only the AP accesses the channel.
    pub contention_free: bool,
}

impl Default for ContentionParams {
    fn default() -> Self {
        ContentionParams {
            cw_min_ap: 15,
            cw_min_sta: 15,
            m_ap_stages: 6,
            m_sta_stages: 6,
            n: 16,
            alpha: 0.2,
            beta: 0.8,
            contention_free: false,
        }
    }
}

impl ContentionParams {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(key, format!("must lie in [0, 1], got {v}")));
            }
        }
        if self.m_ap_stages > 30 || self.m_sta_stages > 30 {
            return Err(Error::config("cw_max", "more than 30 backoff stages"));
        }
        Ok(())
    }

    /// Stations that actually contend for the channel.
    pub fn contenders(&self) -> u32 {
        if self.contention_free {
            0
        } else {
            self.n
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// No coupling to solve (AP alone or contention disabled).
    Direct,
    Damped,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSolution {
    pub tau_ap: f64,
    pub tau_sta: f64,
    pub pc_ap: f64,
    pub pc_sta: f64,
    pub iterations: usize,
    pub residual: f64,
    pub method: SolveMethod,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;
const DAMPING: f64 = 0.5;
/// Iterations without a new best residual before switching to bisection.
const STALL_WINDOW: usize = 500;

struct System {
    p: ContentionParams,
    n: u32,
}

impl System {
    fn pc_ap(&self, tau_sta: f64) -> f64 {
        1.0 - (1.0 - tau_sta).powi(self.n as i32)
    }

    fn pc_sta(&self, tau_ap: f64, tau_sta: f64) -> f64 {
        1.0 - (1.0 - tau_ap) * (1.0 - tau_sta).powi(self.n as i32 - 1)
    }

    fn tau_ap(&self, pc_ap: f64) -> Result<f64> {
        attempt_probability(self.p.cw_min_ap, self.p.m_ap_stages, pc_ap)
    }

    fn tau_sta(&self, pc_sta: f64) -> Result<f64> {
        attempt_probability(self.p.cw_min_sta, self.p.m_sta_stages, pc_sta)
    }

    fn map(&self, tau_ap: f64, tau_sta: f64) -> Result<(f64, f64)> {
        Ok((
            self.tau_ap(self.pc_ap(tau_sta))?,
            self.tau_sta(self.pc_sta(tau_ap, tau_sta))?,
        ))
    }

    fn residual(&self, tau_ap: f64, tau_sta: f64) -> Result<f64> {
        let (a, s) = self.map(tau_ap, tau_sta)?;
        Ok((a - tau_ap).abs().max((s - tau_sta).abs()))
    }

    fn solution(&self, tau_ap: f64, tau_sta: f64, iterations: usize, method: SolveMethod) -> Result<FixedPointSolution> {
        Ok(FixedPointSolution {
            tau_ap,
            tau_sta,
            pc_ap: self.pc_ap(tau_sta),
            pc_sta: self.pc_sta(tau_ap, tau_sta),
            iterations,
            residual: self.residual(tau_ap, tau_sta)?,
            method,
        })
    }

    /// Solves the system reduced to `tau_sta` alone by bisection.
    fn bisect(&self, iterations: usize) -> Result<FixedPointSolution> {
        let gap = |t: f64| -> Result<f64> {
            let tau_ap = self.tau_ap(self.pc_ap(t))?;
            Ok(self.tau_sta(self.pc_sta(tau_ap, t))? - t)
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        if gap(lo)? < 0.0 || gap(hi)? > 0.0 {
            return Err(Error::Numerical("reduced system has no sign change on [0, 1]".into()));
        }
        let mut steps = 0;
        while hi - lo > 1e-16 && steps < 200 {
            let mid = 0.5 * (lo + hi);
            if gap(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            steps += 1;
        }
        let tau_sta = 0.5 * (lo + hi);
        let tau_ap = self.tau_ap(self.pc_ap(tau_sta))?;
        self.solution(tau_ap, tau_sta, iterations + steps, SolveMethod::Bisection)
    }
}

/// Solves for the AP and station transmit probabilities.
pub fn solve_fixed_point(params: &ContentionParams, tol: f64, max_iter: usize) -> Result<FixedPointSolution> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    params.validate()?;
    let n = params.contenders();
    let sys = System { p: *params, n };

    if n == 0 {
        let tau_ap = sys.tau_ap(0.0)?;
        // A lone station attempt would only meet the AP.
        let pc_sta = if params.n > 0 { tau_ap } else { 0.0 };
        return Ok(FixedPointSolution {
            tau_ap,
            tau_sta: 0.0,
            pc_ap: 0.0,
            pc_sta,
            iterations: 0,
            residual: 0.0,
            method: SolveMethod::Direct,
        });
    }

    let (mut tau_ap, mut tau_sta) = (sys.tau_ap(0.0)?, sys.tau_sta(0.0)?);
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for it in 0..max_iter {
        let (next_ap, next_sta) = sys.map(tau_ap, tau_sta)?;
        let residual = (next_ap - tau_ap).abs().max((next_sta - tau_sta).abs());
        if residual < tol {
            return sys.solution(tau_ap, tau_sta, it, SolveMethod::Damped);
        }
        if residual < best {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > STALL_WINDOW {
                break;
            }
        }
        tau_ap += DAMPING * (next_ap - tau_ap);
        tau_sta += DAMPING * (next_sta - tau_sta);
    }

    let fallback = sys.bisect(max_iter)?;
    if fallback.residual < tol {
        Ok(fallback)
    } else {
        Err(Error::NoConvergence {
            iterations: fallback.iterations,
            residual: fallback.residual,
            tau_ap: fallback.tau_ap,
            tau_sta: fallback.tau_sta,
        })
    }
}

/// Probability of each slot outcome.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SlotDistribution {
    /// AP DL SU success.
    pub a1: f64,
    /// Station UL SU success.
    pub a2: f64,
    /// AP DL MU success.
    pub a3: f64,
    /// AP UL MU success.
    pub a4: f64,
    /// Empty slot.
    pub b1: f64,
    /// AP SU attempt collides with stations.
    pub c1: f64,
    /// AP DL MU attempt collides with stations.
    pub c2: f64,
    /// AP UL MU attempt collides with stations.
    pub c3: f64,
    /// Two or more stations collide without the AP.
    pub c4: f64,
}

impl SlotDistribution {
    pub fn as_array(&self) -> [f64; 9] {
        [
            self.a1, self.a2, self.a3, self.a4, self.b1, self.c1, self.c2, self.c3, self.c4,
        ]
    }

    pub const LABELS: [&'static str; 9] = ["a1", "a2", "a3", "a4", "b1", "c1", "c2", "c3", "c4"];

    pub fn total(&self) -> f64 {
        self.as_array().iter().sum()
    }
}

const PROB_SLACK: f64 = 1e-12;

pub fn slot_distribution(fp: &FixedPointSolution, params: &ContentionParams) -> Result<SlotDistribution> {
    let n = params.contenders();
    let (ta, ts) = (fp.tau_ap, fp.tau_sta);
    let (alpha, beta) = (params.alpha, params.beta);
    let silent = (1.0 - ts).powi(n as i32);
    let busy = 1.0 - silent;
    let one_station = if n == 0 {
        0.0
    } else {
        n as f64 * ts * (1.0 - ta) * (1.0 - ts).powi(n as i32 - 1)
    };

    let mut d = SlotDistribution {
        a1: alpha * ta * silent,
        a2: one_station,
        a3: (1.0 - alpha) * beta * ta * silent,
        a4: (1.0 - alpha) * (1.0 - beta) * ta * silent,
        b1: (1.0 - ta) * silent,
        c1: alpha * ta * busy,
        c2: (1.0 - alpha) * beta * ta * busy,
        c3: (1.0 - alpha) * (1.0 - beta) * ta * busy,
        c4: 0.0,
    };
    d.c4 = 1.0 - d.a1 - d.a2 - d.a3 - d.a4 - d.b1 - d.c1 - d.c2 - d.c3;

    for (label, v) in SlotDistribution::LABELS.iter().zip(d.as_array()) {
        if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&v) || v.is_nan() {
            return Err(Error::Numerical(format!("slot probability {label} = {v} out of range")));
        }
    }
    if d.c4 < 0.0 {
        d.c4 = 0.0;
    }
    Ok(d)
}

/// Inputs to the throughput formulas besides the slot distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputInputs {
    pub durations: ExchangeDurations,
    /// Empty slot duration, us.
    pub t_e: f64,
    pub aggregation: AggregationPlan,
    /// Payload bits per frame.
    pub l_d: f64,
    /// Stations served per MU transmission.
    pub v_u: u32,
    /// Fraction of airtime left after sounding.
    pub csi_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputReport {
    /// DL throughput, Mb/s.
    pub s_d: f64,
    /// UL throughput, Mb/s.
    pub s_u: f64,
    /// Expected DL service time per frame, us.
    pub e_d_d: f64,
    /// Expected UL service time per frame, us.
    pub e_d_u: f64,
    /// Expected slot duration (the throughput denominator), us.
    pub mean_slot_us: f64,
    pub slot_dist: SlotDistribution,
    pub fixed_point: FixedPointSolution,
    pub csi_factor: f64,
}

impl ThroughputReport {
    pub fn total(&self) -> f64 {
        self.s_d + self.s_u
    }
}

pub fn throughput(
    dist: &SlotDistribution,
    fp: &FixedPointSolution,
    inp: &ThroughputInputs,
) -> Result<ThroughputReport> {
    let d = &inp.durations;
    for (name, v) in [
        ("t_su", d.t_su),
        ("t_mu_d", d.t_mu_d),
        ("t_mu_u", d.t_mu_u),
        ("t_c_su", d.t_c_su),
        ("t_c_mu", d.t_c_mu),
        ("t_e", inp.t_e),
    ] {
        if v.is_nan() || v <= 0.0 {
            return Err(Error::Precondition(format!("{name} must be positive, got {v}")));
        }
    }
    if !(inp.csi_factor > 0.0 && inp.csi_factor <= 1.0) {
        return Err(Error::Precondition(format!(
            "csi factor must lie in (0, 1], got {}",
            inp.csi_factor
        )));
    }

    let te = inp.t_e;
    let denom = dist.b1 * te
        + dist.a1 * (d.t_su + te)
        + dist.a2 * (d.t_su + te)
        + dist.a3 * (d.t_mu_d + te)
        + dist.a4 * (d.t_mu_u + te)
        + dist.c1 * (d.t_c_su + te)
        + dist.c2 * (d.t_c_mu + te)
        + dist.c3 * (d.t_c_mu + te)
        + dist.c4 * (d.t_c_su + te);
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::Degenerate("expected slot duration is zero".into()));
    }

    let agg = &inp.aggregation;
    let v_u = inp.v_u as f64;
    let dl_bits = (dist.a1 * agg.su.n_a as f64 + dist.a3 * v_u * agg.mu_dl.n_a as f64) * inp.l_d;
    let ul_bits = (dist.a2 * agg.su.n_a as f64 + dist.a4 * v_u * agg.mu_ul.n_a as f64) * inp.l_d;
    let s_d = inp.csi_factor * dl_bits / denom;
    let s_u = inp.csi_factor * ul_bits / denom;
    let service = |s: f64| if s > 0.0 { inp.l_d / s } else { f64::INFINITY };

    Ok(ThroughputReport {
        s_d,
        s_u,
        e_d_d: service(s_d),
        e_d_u: service(s_u),
        mean_slot_us: denom,
        slot_dist: *dist,
        fixed_point: *fp,
        csi_factor: inp.csi_factor,
    })
}
