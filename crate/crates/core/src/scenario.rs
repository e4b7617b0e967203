//! Airtime quantities derived once from a [`WlanConfig`] and shared by the
//! analytical model and the simulator.

use crate::config::WlanConfig;
use crate::error::Result;
use crate::frames::{AggregationPlan, Airtime, ExchangeDurations, PpduKind};
use crate::model::ContentionParams;
use crate::phy::Amendment;
use crate::scheduler::{allocate_mu_with, su_streams, AntennaConfig, MuPolicy, RuAllocation};
use crate::sounding::{csi_airtime_factor, t_csi, SoundingDurations};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: WlanConfig,
    pub airtime: Airtime,
    pub antennas: AntennaConfig,
    pub su_streams: u32,
    /// MU allocation. With no stations this is the one-station allocation,
    /// kept only so MU durations are defined.
    pub allocation: RuAllocation,
    /// Stations served per MU transmission (0 without stations).
    pub v_u: u32,
    pub aggregation: AggregationPlan,
    pub durations: ExchangeDurations,
    /// `None` when sounding is off or there is nobody to sound.
    pub sounding: Option<SoundingDurations>,
    pub csi_factor: f64,
    pub contention: ContentionParams,
}

impl Scenario {
    pub fn build(config: &WlanConfig) -> Result<Scenario> {
        config.validate()?;
        let phy = config.phy()?;
        let airtime = Airtime::new(phy, config.frames(), config.timing(), config.mcs()?);
        let antennas = config.antennas();
        let width = phy.channel_width;
        let policy = match config.amendment {
            Amendment::Ac => MuPolicy::VHT,
            _ => MuPolicy::HE,
        };

        let su = su_streams(&antennas);
        let allocation = allocate_mu_with(config.n.max(1), &antennas, width, policy)?;
        let v_u = if config.n == 0 { 0 } else { allocation.v_u };

        let limit = config.max_ampdu;
        let aggregation = AggregationPlan {
            su: airtime.max_aggregation(PpduKind::Su, su, width, limit)?,
            mu_dl: airtime.max_aggregation(PpduKind::MuDl, allocation.v_s, allocation.b_ru, limit)?,
            mu_ul: airtime.max_aggregation(PpduKind::Tb, allocation.v_s, allocation.b_ru, limit)?,
        };
        let durations = airtime.exchange_durations(su, &allocation, &aggregation)?;

        let sounding_params = config.sounding();
        let sounding = if config.n > 0 && sounding_params.lambda_csi > 0.0 {
            Some(t_csi(config.n, &airtime, &antennas, &sounding_params)?)
        } else {
            None
        };
        let csi_factor = match &sounding {
            Some(s) => csi_airtime_factor(sounding_params.lambda_csi, s.total)?,
            None => 1.0,
        };

        let mut contention = config.contention();
        if config.n == 0 {
            // Nobody to serve with MU: every AP access is SU.
            contention.alpha = 1.0;
        }

        Ok(Scenario {
            config: config.clone(),
            airtime,
            antennas,
            su_streams: su,
            allocation,
            v_u,
            aggregation,
            durations,
            sounding,
            csi_factor,
            contention,
        })
    }

    pub fn t_csi_us(&self) -> f64 {
        self.sounding.map_or(0.0, |s| s.total)
    }

    /// Sounding period in us, infinite when sounding is off.
    pub fn csi_period_us(&self) -> f64 {
        if self.sounding.is_some() {
            1e6 / self.config.lambda_csi
        } else {
            f64::INFINITY
        }
    }
}
