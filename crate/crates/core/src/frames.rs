//! Frame lengths and the microsecond durations of control frames, data
//! PPDUs, complete exchanges and collisions.

use crate::error::{Error, Result};
use crate::phy::{ChannelWidth, Mcs, PhyProfile};
use crate::scheduler::RuAllocation;

/// Frame and field lengths in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameConstants {
    /// Service field.
    pub l_sf: u64,
    /// MPDU delimiter.
    pub l_md: u64,
    /// MAC header.
    pub l_mh: u64,
    /// Tail bits.
    pub l_tb: u64,
    pub l_rts: u64,
    pub l_cts: u64,
    pub l_back: u64,
    /// Payload of one data frame.
    pub l_d: u64,
}

impl Default for FrameConstants {
    fn default() -> Self {
        FrameConstants {
            l_sf: 16,
            l_md: 32,
            l_mh: 320,
            l_tb: 18,
            l_rts: 160,
            l_cts: 112,
            l_back: 256,
            l_d: 12000,
        }
    }
}

impl FrameConstants {
    pub fn mu_rts_len(&self, v_u: u32) -> u64 {
        224 + 40 * v_u as u64
    }

    pub fn basic_trigger_len(&self, v_u: u32) -> u64 {
        224 + 48 * v_u as u64
    }

    pub fn brp_trigger_len(&self, v_u: u32) -> u64 {
        224 + 48 * v_u as u64
    }

    pub fn ms_back_len(&self, v_u: u32) -> u64 {
        176 + 288 * v_u as u64
    }

    pub fn ndpa_len(&self, n: u32) -> u64 {
        168 + 32 * n as u64
    }

    /// Bits of a data PSDU carrying `n_a` frames, service field and tail
    /// included. A single frame is sent without an A-MPDU delimiter.
    pub fn payload_bits(&self, n_a: u32) -> u64 {
        let body = if n_a == 1 {
            self.l_mh + self.l_d
        } else {
            n_a as u64 * (self.l_md + self.l_mh + self.l_d)
        };
        self.l_sf + body + self.l_tb
    }
}

/// Inter-frame spaces, the empty slot and the PPDU length cap, in us.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingConstants {
    pub sifs_us: f64,
    pub aifs_us: f64,
    pub aifs_csi_us: f64,
    pub t_empty_slot_us: f64,
    pub max_ppdu_us: f64,
}

impl Default for TimingConstants {
    fn default() -> Self {
        TimingConstants {
            sifs_us: 16.0,
            aifs_us: 34.0,
            aifs_csi_us: 25.0,
            t_empty_slot_us: 9.0,
            max_ppdu_us: 5488.4,
        }
    }
}

impl TimingConstants {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("sifs_us", self.sifs_us),
            ("aifs_us", self.aifs_us),
            ("aifs_csi_us", self.aifs_csi_us),
            ("t_e_us", self.t_empty_slot_us),
            ("max_ppdu_us", self.max_ppdu_us),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// HE PPDU format of a data transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PpduKind {
    /// Single-user PPDU (DL or UL).
    Su,
    /// DL multi-user PPDU.
    MuDl,
    /// Trigger-based UL PPDU.
    Tb,
}

/// Aggregation actually used for one exchange kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Aggregation {
    pub n_a: u32,
    /// Set when even a single frame overruns the PPDU cap.
    pub over_limit: bool,
}

/// Frames per A-MPDU for each exchange kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregationPlan {
    pub su: Aggregation,
    pub mu_dl: Aggregation,
    pub mu_ul: Aggregation,
}

impl AggregationPlan {
    pub fn uniform(n_a: u32) -> Self {
        let a = Aggregation {
            n_a,
            over_limit: false,
        };
        AggregationPlan {
            su: a,
            mu_dl: a,
            mu_ul: a,
        }
    }
}

/// Busy-channel durations of every exchange, in us.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeDurations {
    pub t_su: f64,
    pub t_mu_d: f64,
    pub t_mu_u: f64,
    pub t_c_su: f64,
    pub t_c_mu: f64,
}

/// Everything needed to turn bit counts into airtime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Airtime {
    pub phy: PhyProfile,
    pub frames: FrameConstants,
    pub timing: TimingConstants,
    pub mcs: Mcs,
}

impl Airtime {
    pub fn new(phy: PhyProfile, frames: FrameConstants, timing: TimingConstants, mcs: Mcs) -> Self {
        Airtime {
            phy,
            frames,
            timing,
            mcs,
        }
    }

    /// Legacy-mode control frame carrying `len_bits` of MAC content.
    pub fn legacy_frame_duration(&self, len_bits: u64) -> f64 {
        let bits = self.frames.l_sf + len_bits + self.frames.l_tb;
        self.legacy_symbols(bits)
    }

    fn legacy_symbols(&self, bits: u64) -> f64 {
        let symbols = bits.div_ceil(self.phy.r_legacy_bits_per_symbol);
        self.phy.t_phy_legacy_us + symbols as f64 * self.phy.sigma_legacy_us
    }

    pub fn rts(&self) -> f64 {
        self.legacy_frame_duration(self.frames.l_rts)
    }

    pub fn cts(&self) -> f64 {
        self.legacy_frame_duration(self.frames.l_cts)
    }

    pub fn back(&self) -> f64 {
        self.legacy_frame_duration(self.frames.l_back)
    }

    pub fn mu_rts(&self, v_u: u32) -> f64 {
        self.legacy_frame_duration(self.frames.mu_rts_len(v_u))
    }

    pub fn trigger(&self, v_u: u32) -> f64 {
        self.legacy_frame_duration(self.frames.basic_trigger_len(v_u))
    }

    pub fn ms_back(&self, v_u: u32) -> f64 {
        self.legacy_frame_duration(self.frames.ms_back_len(v_u))
    }

    pub fn ndpa(&self, n: u32) -> f64 {
        self.legacy_frame_duration(self.frames.ndpa_len(n))
    }

    /// Beamforming report poll trigger. Its length is divided by the legacy
    /// rate as-is, without service field and tail bits.
    pub fn brp_trigger(&self, n: u32) -> f64 {
        self.legacy_symbols(self.frames.brp_trigger_len(n))
    }

    /// Block ACK sent in a trigger-based PPDU.
    pub fn tb_back(&self, v_s: u32, b_ru: ChannelWidth) -> Result<f64> {
        let rate = self.phy.symbol_rate(self.mcs, v_s, b_ru)?;
        let bits = self.frames.l_sf + self.frames.l_back + self.frames.l_tb;
        Ok(self.phy.t_phy_he_tb_us + rate.symbols_for(bits) as f64 * self.phy.sigma_us)
    }

    pub fn preamble(&self, kind: PpduKind) -> f64 {
        match kind {
            PpduKind::Su => self.phy.t_phy_he_su_us,
            PpduKind::MuDl => self.phy.t_phy_he_mu_us,
            PpduKind::Tb => self.phy.t_phy_he_tb_us,
        }
    }

    /// Duration of a data PPDU carrying `n_a` frames per user.
    pub fn data_ppdu_duration(
        &self,
        kind: PpduKind,
        n_a: u32,
        v_s: u32,
        b_ru: ChannelWidth,
    ) -> Result<f64> {
        if n_a == 0 {
            return Err(Error::Precondition("a data PPDU carries at least one frame".into()));
        }
        let rate = self.phy.symbol_rate(self.mcs, v_s, b_ru)?;
        let symbols = rate.symbols_for(self.frames.payload_bits(n_a));
        Ok(self.preamble(kind) + symbols as f64 * self.phy.sigma_us)
    }

    /// Largest `n_a <= n_a_limit` whose PPDU fits within the maximum PPDU
    /// duration. Never less than one frame.
    pub fn max_aggregation(
        &self,
        kind: PpduKind,
        v_s: u32,
        b_ru: ChannelWidth,
        n_a_limit: u32,
    ) -> Result<Aggregation> {
        if n_a_limit == 0 {
            return Err(Error::Precondition("aggregation limit must be at least 1".into()));
        }
        let rate = self.phy.symbol_rate(self.mcs, v_s, b_ru)?;
        let budget = self.timing.max_ppdu_us - self.preamble(kind);
        let max_symbols = if budget > 0.0 {
            (budget / self.phy.sigma_us).floor() as u64
        } else {
            0
        };
        let max_bits = rate.bits_in(max_symbols);
        let f = &self.frames;
        let per_frame = f.l_md + f.l_mh + f.l_d;
        let overhead = f.l_sf + f.l_tb;
        let mut n_a = if max_bits < f.payload_bits(1) {
            0
        } else if max_bits < f.payload_bits(2) {
            1
        } else {
            ((max_bits - overhead) / per_frame).min(u32::MAX as u64) as u32
        };
        n_a = n_a.min(n_a_limit);
        while n_a > 1 && self.data_ppdu_duration(kind, n_a, v_s, b_ru)? > self.timing.max_ppdu_us {
            n_a -= 1;
        }
        if n_a == 0 {
            return Ok(Aggregation {
                n_a: 1,
                over_limit: true,
            });
        }
        Ok(Aggregation {
            n_a,
            over_limit: false,
        })
    }

    /// Assembles the SU, MU-DL and MU-UL exchanges and both collision kinds.
    ///
    /// SU transmissions use `su_streams` over the full channel; MU
    /// transmissions use the allocation's RU width and per-user streams.
    pub fn exchange_durations(
        &self,
        su_streams: u32,
        alloc: &RuAllocation,
        plan: &AggregationPlan,
    ) -> Result<ExchangeDurations> {
        let sifs = self.timing.sifs_us;
        let aifs = self.timing.aifs_us;
        let width = self.phy.channel_width;
        let v_u = alloc.v_u;

        let (rts, cts, back) = (self.rts(), self.cts(), self.back());
        let mu_rts = self.mu_rts(v_u);

        let data_su = self.data_ppdu_duration(PpduKind::Su, plan.su.n_a, su_streams, width)?;
        let data_mu_d =
            self.data_ppdu_duration(PpduKind::MuDl, plan.mu_dl.n_a, alloc.v_s, alloc.b_ru)?;
        let data_mu_u =
            self.data_ppdu_duration(PpduKind::Tb, plan.mu_ul.n_a, alloc.v_s, alloc.b_ru)?;

        let t_su = rts + sifs + cts + sifs + data_su + sifs + back + aifs;
        let t_mu_d = mu_rts + sifs + cts + sifs + data_mu_d + sifs + back + aifs;
        let t_mu_u = mu_rts
            + sifs
            + cts
            + sifs
            + self.trigger(v_u)
            + sifs
            + data_mu_u
            + sifs
            + self.ms_back(v_u)
            + aifs;

        // ACK timeout = CTS + AIFS.
        let t_c_su = rts + sifs + cts + aifs;
        let t_c_mu = mu_rts + sifs + cts + aifs;

        Ok(ExchangeDurations {
            t_su,
            t_mu_d,
            t_mu_u,
            t_c_su,
            t_c_mu,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::ChannelWidth::*;

    fn airtime(width: ChannelWidth, mcs: u8) -> Airtime {
        Airtime::new(
            PhyProfile::he(width),
            FrameConstants::default(),
            TimingConstants::default(),
            Mcs::he(mcs, false).unwrap(),
        )
    }

    #[test]
    fn legacy_control_frames() {
        let a = airtime(Mhz160, 6);
        assert_eq!(a.rts(), 56.0);
        assert_eq!(a.cts(), 48.0);
        assert_eq!(a.legacy_frame_duration(0), 28.0);
        assert_eq!(a.back(), 72.0);
        // 224 + 40 = 264 bits, (16 + 264 + 18) / 24 -> 13 symbols.
        assert_eq!(a.mu_rts(1), 72.0);
    }

    #[test]
    fn data_ppdu_examples() {
        let a = airtime(Mhz160, 9);
        assert_eq!(a.data_ppdu_duration(PpduKind::Su, 1, 4, Mhz160).unwrap(), 180.0);
        let a = airtime(Mhz20, 6);
        assert_eq!(a.data_ppdu_duration(PpduKind::Tb, 1, 1, Mhz20).unwrap(), 420.0);
        let a = airtime(Mhz20, 0);
        assert_eq!(a.data_ppdu_duration(PpduKind::Su, 1, 1, Mhz20).unwrap(), 1860.0);
        assert!(a.data_ppdu_duration(PpduKind::Su, 0, 1, Mhz20).is_err());
    }

    #[test]
    fn payload_bits_single_frame_has_no_delimiter() {
        let f = FrameConstants::default();
        assert_eq!(f.payload_bits(1), 12354);
        assert_eq!(f.payload_bits(2), 34 + 2 * 12352);
    }

    #[test]
    fn aggregation_cap() {
        let a = airtime(Mhz20, 6);
        let agg = a.max_aggregation(PpduKind::Tb, 1, Mhz20, 256).unwrap();
        assert_eq!(agg, Aggregation { n_a: 27, over_limit: false });
        assert_eq!(a.max_aggregation(PpduKind::Tb, 1, Mhz20, 1).unwrap().n_a, 1);
        let wide = airtime(Mhz160, 11);
        assert_eq!(wide.max_aggregation(PpduKind::Su, 4, Mhz160, 256).unwrap().n_a, 256);
    }

    #[test]
    fn oversized_single_frame_is_flagged() {
        let mut a = airtime(Mhz20, 0);
        a.timing.max_ppdu_us = 500.0;
        let agg = a.max_aggregation(PpduKind::Su, 1, Mhz20, 64).unwrap();
        assert_eq!(agg, Aggregation { n_a: 1, over_limit: true });
    }

    #[test]
    fn exchange_examples() {
        let a = airtime(Mhz160, 9);
        let alloc = RuAllocation {
            v_u: 1,
            n_ru: 1,
            b_ru: Mhz160,
            v_m: 1,
            v_s: 4,
        };
        let d = a
            .exchange_durations(4, &alloc, &AggregationPlan::uniform(1))
            .unwrap();
        assert_eq!(d.t_su, 438.0);
        assert_eq!(d.t_c_su, 154.0);
        assert!(d.t_c_mu >= d.t_c_su);
        assert!(d.t_c_su < d.t_su);
        assert!(d.t_c_mu < d.t_mu_d.min(d.t_mu_u));
    }

    #[test]
    fn tb_back_duration() {
        let a = airtime(Mhz20, 6);
        // 290 bits over 1053 bits/symbol -> one symbol.
        assert_eq!(a.tb_back(1, Mhz20).unwrap(), 244.0);
    }
}
