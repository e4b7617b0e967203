//! Duration and airtime cost of explicit channel sounding.
//!
//! One sounding round is NDPA, NDP, then `K` poll/report pairs, each pair
//! being a BRP trigger followed by the stations of one group answering
//! together in a trigger-based PPDU.

use crate::error::{Error, Result};
use crate::frames::Airtime;
use crate::phy::{Amendment, ChannelWidth, SubcarrierTable};
use crate::scheduler::AntennaConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoundingParams {
    /// Sounding rounds per second.
    pub lambda_csi: f64,
    /// Number of report groups.
    pub k_groups: u32,
    /// Angles per subcarrier group.
    pub n_ang: u32,
    pub b_psi: u32,
    pub b_phi: u32,
    /// Subcarrier grouping.
    pub n_sg: u32,
}

impl Default for SoundingParams {
    fn default() -> Self {
        SoundingParams {
            lambda_csi: 20.0,
            k_groups: 1,
            n_ang: 56,
            b_psi: 8,
            b_phi: 8,
            n_sg: 16,
        }
    }
}

impl SoundingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_csi.is_finite() && self.lambda_csi >= 0.0) {
            return Err(Error::config(
                "lambda_csi",
                format!("must be a non-negative rate, got {}", self.lambda_csi),
            ));
        }
        if self.k_groups == 0 {
            return Err(Error::config("k_groups", "at least one report group is required"));
        }
        if self.n_sg == 0 {
            return Err(Error::config("n_sg", "subcarrier grouping must be at least 1"));
        }
        Ok(())
    }

    /// Beamforming report length for `y_sc` data subcarriers. Partial
    /// subcarrier groups are rounded up.
    pub fn report_bits(&self, y_sc: u32) -> u64 {
        let groups = y_sc.div_ceil(self.n_sg) as u64;
        let angle_bits = self.n_ang as u64 * (self.b_psi + self.b_phi) as u64 * groups;
        64 + angle_bits.div_ceil(2)
    }
}

/// HE beamforming report length for a channel of width `b`.
pub fn breport_len(b: ChannelWidth, p: &SoundingParams) -> u64 {
    let y_sc = SubcarrierTable::HE
        .data_subcarriers(b)
        .expect("every width is in the HE table");
    p.report_bits(y_sc)
}

/// Smallest admissible RU split that lets `group` stations report at once
/// with one stream each. Falls back to the finest split if the group is
/// larger than the RU x MU-MIMO capacity.
pub fn report_ru_width(group: u32, ant: &AntennaConfig, b: ChannelWidth) -> ChannelWidth {
    let mut n_ru = 1;
    while n_ru * ant.m_ap < group && n_ru * 2 <= b.subchannels() {
        n_ru *= 2;
    }
    b.split(n_ru).expect("power-of-two split of a supported width")
}

/// Itemised duration of one sounding round, in us.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoundingDurations {
    pub ndpa: f64,
    pub ndp: f64,
    pub brp_trigger: f64,
    pub breport: f64,
    pub report_ru: ChannelWidth,
    /// Poll/report rounds actually performed.
    pub rounds: u32,
    pub total: f64,
}

/// Duration of a sounding round for `n` stations.
///
/// 11ax stations report in parallel, `K` groups of `ceil(n / K)` stations;
/// 11ac polls every station in turn with a single-station poll and a
/// full-width report.
pub fn t_csi(n: u32, airtime: &Airtime, ant: &AntennaConfig, p: &SoundingParams) -> Result<SoundingDurations> {
    if n == 0 {
        return Err(Error::Precondition("sounding needs at least one station".into()));
    }
    p.validate()?;
    let phy = &airtime.phy;
    let b = phy.channel_width;
    let f = &airtime.frames;
    let sifs = airtime.timing.sifs_us;

    let (rounds, report_ru, brp_trigger) = match phy.amendment {
        Amendment::Ac => (n, b, airtime.brp_trigger(1)),
        _ => {
            let group = n.div_ceil(p.k_groups);
            (p.k_groups, report_ru_width(group, ant, b), airtime.brp_trigger(n))
        }
    };

    let report_len = p.report_bits(phy.subcarriers().data_subcarriers(b)?);
    let rate = phy.symbol_rate(airtime.mcs, 1, report_ru)?;
    let bits = f.l_sf + f.l_mh + report_len + f.l_tb;
    let breport = phy.t_phy_he_tb_us + rate.symbols_for(bits) as f64 * phy.sigma_us;

    let ndpa = airtime.ndpa(n);
    let ndp = phy.t_ndp_us;
    let total = ndpa
        + sifs
        + ndp
        + rounds as f64 * (sifs + brp_trigger + sifs + breport)
        + airtime.timing.aifs_csi_us;

    Ok(SoundingDurations {
        ndpa,
        ndp,
        brp_trigger,
        breport,
        report_ru,
        rounds,
        total,
    })
}

/// Fraction of time left for data: `(1/lambda - T_csi) * lambda`.
pub fn csi_airtime_factor(lambda_csi: f64, t_csi_us: f64) -> Result<f64> {
    if !(lambda_csi.is_finite() && lambda_csi >= 0.0) {
        return Err(Error::config("lambda_csi", format!("invalid rate {lambda_csi}")));
    }
    if lambda_csi == 0.0 {
        return Ok(1.0);
    }
    let period_us = 1e6 / lambda_csi;
    if t_csi_us >= period_us {
        return Err(Error::SoundingStarvesData { t_csi_us, period_us });
    }
    Ok((period_us - t_csi_us) / period_us)
}
