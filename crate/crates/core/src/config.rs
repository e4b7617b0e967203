//! The WLAN configuration shared by both engines, and its flat
//! `key = value` text format.
//!
//! ```text
//! # 802.11ax, 32 stations
//! n = 32
//! b_mhz = 80
//! lambda_csi = 20
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown and repeated keys are
//! errors.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::frames::{FrameConstants, TimingConstants};
use crate::model::{backoff_stages, ContentionParams};
use crate::phy::{Amendment, ChannelWidth, Mcs, PhyProfile};
use crate::scheduler::AntennaConfig;
use crate::sounding::SoundingParams;

#[derive(Debug, Clone, PartialEq)]
pub struct WlanConfig {
    pub amendment: Amendment,
    /// Number of stations.
    pub n: u32,
    pub alpha: f64,
    pub beta: f64,
    /// Frame payload, bits.
    pub l_d: u64,
    /// Maximum frames per A-MPDU.
    pub max_ampdu: u32,
    pub max_ppdu_us: f64,
    pub cw_min_ap: u32,
    pub cw_max_ap: u32,
    pub cw_min_sta: u32,
    pub cw_max_sta: u32,
    pub aifs_us: f64,
    pub aifs_csi_us: f64,
    pub sifs_us: f64,
    pub t_e_us: f64,
    pub m_ap: u32,
    pub m_sta: u32,
    pub b_mhz: u32,
    pub sigma_us: f64,
    pub sigma_legacy_us: f64,
    pub mcs: u8,
    pub dcm: bool,
    pub lambda_csi: f64,
    pub k_groups: u32,
    pub n_ang: u32,
    pub b_psi: u32,
    pub b_phi: u32,
    pub n_sg: u32,
    /// Only the AP accesses the channel (no station contention).
    pub contention_free: bool,
}

impl Default for WlanConfig {
    fn default() -> Self {
        WlanConfig {
            amendment: Amendment::Ax,
            n: 16,
            alpha: 0.2,
            beta: 0.8,
            l_d: 12000,
            max_ampdu: 256,
            max_ppdu_us: 5488.4,
            cw_min_ap: 15,
            cw_max_ap: 1023,
            cw_min_sta: 15,
            cw_max_sta: 1023,
            aifs_us: 34.0,
            aifs_csi_us: 25.0,
            sifs_us: 16.0,
            t_e_us: 9.0,
            m_ap: 8,
            m_sta: 4,
            b_mhz: 160,
            sigma_us: 16.0,
            sigma_legacy_us: 4.0,
            mcs: 6,
            dcm: false,
            lambda_csi: 20.0,
            k_groups: 1,
            n_ang: 56,
            b_psi: 8,
            b_phi: 8,
            n_sg: 16,
            contention_free: false,
        }
    }
}

/// Every config key, in serialization order.
pub const KEYS: [&str; 29] = [
    "amendment",
    "n",
    "alpha",
    "beta",
    "l_d",
    "max_ampdu",
    "max_ppdu_us",
    "cw_min_ap",
    "cw_max_ap",
    "cw_min_sta",
    "cw_max_sta",
    "aifs_us",
    "aifs_csi_us",
    "sifs_us",
    "t_e_us",
    "m_ap",
    "m_sta",
    "b_mhz",
    "sigma_us",
    "sigma_legacy_us",
    "mcs",
    "dcm",
    "lambda_csi",
    "k_groups",
    "n_ang",
    "b_psi",
    "b_phi",
    "n_sg",
    "contention_free",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{}`", value.trim())))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::config(key, format!("expected a boolean, got `{other}`"))),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    let v: f64 = parse(key, value)?;
    if !v.is_finite() {
        return Err(Error::config(key, "value must be finite"));
    }
    Ok(v)
}

impl WlanConfig {
    /// 802.11ac comparison setup: VHT rates with 4 us symbols, DL-only MU
    /// and the 64-frame A-MPDU limit.
    pub fn ac_defaults() -> Self {
        WlanConfig {
            amendment: Amendment::Ac,
            beta: 1.0,
            max_ampdu: 64,
            sigma_us: 4.0,
            ..Default::default()
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "amendment" => self.amendment = value.parse()?,
            "n" => self.n = parse(key, value)?,
            "alpha" => self.alpha = parse_f64(key, value)?,
            "beta" => self.beta = parse_f64(key, value)?,
            "l_d" => self.l_d = parse(key, value)?,
            "max_ampdu" => self.max_ampdu = parse(key, value)?,
            "max_ppdu_us" => self.max_ppdu_us = parse_f64(key, value)?,
            "cw_min_ap" => self.cw_min_ap = parse(key, value)?,
            "cw_max_ap" => self.cw_max_ap = parse(key, value)?,
            "cw_min_sta" => self.cw_min_sta = parse(key, value)?,
            "cw_max_sta" => self.cw_max_sta = parse(key, value)?,
            "aifs_us" => self.aifs_us = parse_f64(key, value)?,
            "aifs_csi_us" => self.aifs_csi_us = parse_f64(key, value)?,
            "sifs_us" => self.sifs_us = parse_f64(key, value)?,
            "t_e_us" => self.t_e_us = parse_f64(key, value)?,
            "m_ap" => self.m_ap = parse(key, value)?,
            "m_sta" => self.m_sta = parse(key, value)?,
            "b_mhz" => self.b_mhz = parse(key, value)?,
            "sigma_us" => self.sigma_us = parse_f64(key, value)?,
            "sigma_legacy_us" => self.sigma_legacy_us = parse_f64(key, value)?,
            "mcs" => self.mcs = parse(key, value)?,
            "dcm" => self.dcm = parse_bool(key, value)?,
            "lambda_csi" => self.lambda_csi = parse_f64(key, value)?,
            "k_groups" => self.k_groups = parse(key, value)?,
            "n_ang" => self.n_ang = parse(key, value)?,
            "b_psi" => self.b_psi = parse(key, value)?,
            "b_phi" => self.b_phi = parse(key, value)?,
            "n_sg" => self.n_sg = parse(key, value)?,
            "contention_free" => self.contention_free = parse_bool(key, value)?,
            other => {
                return Err(Error::UnknownKey {
                    key: other.to_string(),
                    valid: KEYS.join(", "),
                })
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Result<String> {
        let s = match key {
            "amendment" => self.amendment.to_string(),
            "n" => self.n.to_string(),
            "alpha" => self.alpha.to_string(),
            "beta" => self.beta.to_string(),
            "l_d" => self.l_d.to_string(),
            "max_ampdu" => self.max_ampdu.to_string(),
            "max_ppdu_us" => self.max_ppdu_us.to_string(),
            "cw_min_ap" => self.cw_min_ap.to_string(),
            "cw_max_ap" => self.cw_max_ap.to_string(),
            "cw_min_sta" => self.cw_min_sta.to_string(),
            "cw_max_sta" => self.cw_max_sta.to_string(),
            "aifs_us" => self.aifs_us.to_string(),
            "aifs_csi_us" => self.aifs_csi_us.to_string(),
            "sifs_us" => self.sifs_us.to_string(),
            "t_e_us" => self.t_e_us.to_string(),
            "m_ap" => self.m_ap.to_string(),
            "m_sta" => self.m_sta.to_string(),
            "b_mhz" => self.b_mhz.to_string(),
            "sigma_us" => self.sigma_us.to_string(),
            "sigma_legacy_us" => self.sigma_legacy_us.to_string(),
            "mcs" => self.mcs.to_string(),
            "dcm" => self.dcm.to_string(),
            "lambda_csi" => self.lambda_csi.to_string(),
            "k_groups" => self.k_groups.to_string(),
            "n_ang" => self.n_ang.to_string(),
            "b_psi" => self.b_psi.to_string(),
            "b_phi" => self.b_phi.to_string(),
            "n_sg" => self.n_sg.to_string(),
            "contention_free" => self.contention_free.to_string(),
            other => {
                return Err(Error::UnknownKey {
                    key: other.to_string(),
                    valid: KEYS.join(", "),
                })
            }
        };
        Ok(s)
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for item in overrides {
            let item = item.as_ref();
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::config(item, "override must look like key=value"))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Reads `key = value` lines on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = WlanConfig::default();
        cfg.merge_text(text)?;
        Ok(cfg)
    }

    /// Reads `key = value` lines on top of `self`.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::config(key, format!("repeated on line {}", lineno + 1)));
            }
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key).expect("known key"));
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn width(&self) -> Result<ChannelWidth> {
        ChannelWidth::from_mhz(self.b_mhz)
    }

    pub fn mcs(&self) -> Result<Mcs> {
        Mcs::for_amendment(self.amendment, self.mcs, self.dcm)
    }

    pub fn phy(&self) -> Result<PhyProfile> {
        let mut phy = PhyProfile::for_amendment(self.amendment, self.width()?)?;
        phy.sigma_us = self.sigma_us;
        phy.sigma_legacy_us = self.sigma_legacy_us;
        phy.validate()?;
        Ok(phy)
    }

    pub fn frames(&self) -> FrameConstants {
        FrameConstants {
            l_d: self.l_d,
            ..FrameConstants::default()
        }
    }

    pub fn timing(&self) -> TimingConstants {
        TimingConstants {
            sifs_us: self.sifs_us,
            aifs_us: self.aifs_us,
            aifs_csi_us: self.aifs_csi_us,
            t_empty_slot_us: self.t_e_us,
            max_ppdu_us: self.max_ppdu_us,
        }
    }

    pub fn antennas(&self) -> AntennaConfig {
        AntennaConfig {
            m_ap: self.m_ap,
            m_sta: self.m_sta,
        }
    }

    pub fn sounding(&self) -> SoundingParams {
        SoundingParams {
            lambda_csi: self.lambda_csi,
            k_groups: self.k_groups,
            n_ang: self.n_ang,
            b_psi: self.b_psi,
            b_phi: self.b_phi,
            n_sg: self.n_sg,
        }
    }

    pub fn contention(&self) -> ContentionParams {
        ContentionParams {
            cw_min_ap: self.cw_min_ap,
            cw_min_sta: self.cw_min_sta,
            m_ap_stages: backoff_stages(self.cw_min_ap, self.cw_max_ap),
            m_sta_stages: backoff_stages(self.cw_min_sta, self.cw_max_sta),
            n: self.n,
            alpha: self.alpha,
            beta: self.beta,
            contention_free: self.contention_free,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.phy()?;
        self.mcs()?;
        self.timing().validate()?;
        self.antennas().validate()?;
        self.sounding().validate()?;
        self.contention().validate()?;
        if self.l_d == 0 {
            return Err(Error::config("l_d", "frames must carry at least one bit"));
        }
        if self.max_ampdu == 0 {
            return Err(Error::config("max_ampdu", "must allow at least one frame"));
        }
        if self.cw_max_ap < self.cw_min_ap {
            return Err(Error::config("cw_max_ap", "must not be below cw_min_ap"));
        }
        if self.cw_max_sta < self.cw_min_sta {
            return Err(Error::config("cw_max_sta", "must not be below cw_min_sta"));
        }
        if self.amendment == Amendment::Ac {
            if self.beta != 1.0 {
                return Err(Error::config("beta", "802.11ac has no UL MU; beta must be 1"));
            }
            if self.max_ampdu > 64 {
                return Err(Error::config("max_ampdu", "802.11ac aggregates at most 64 frames"));
            }
            if self.sigma_us != 4.0 {
                return Err(Error::config("sigma_us", "802.11ac uses 4 us symbols"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_validate() {
        WlanConfig::default().validate().unwrap();
        WlanConfig::ac_defaults().validate().unwrap();
    }

    #[test]
    fn parse_text() {
        let cfg = WlanConfig::from_text("# comment\n\nn = 32  # stations\nb_mhz=80\ndcm = on\n").unwrap();
        assert_eq!(cfg.n, 32);
        assert_eq!(cfg.b_mhz, 80);
        assert!(cfg.dcm);
        assert_eq!(cfg.alpha, 0.2);
    }

    #[test]
    fn unknown_and_repeated_keys_fail() {
        assert!(matches!(
            WlanConfig::from_text("lamda_csi = 3"),
            Err(Error::UnknownKey { .. })
        ));
        assert!(WlanConfig::from_text("n = 3\nn = 4").is_err());
        assert!(WlanConfig::from_text("n 3").is_err());
        assert!(WlanConfig::from_text("n = -3").is_err());
        assert!(WlanConfig::from_text("alpha = nan").is_err());
    }

    #[test]
    fn ac_constraints() {
        let mut cfg = WlanConfig::ac_defaults();
        cfg.beta = 0.5;
        assert!(matches!(cfg.validate(), Err(Error::Config { key, .. }) if key == "beta"));
        let mut cfg = WlanConfig::ac_defaults();
        cfg.max_ampdu = 256;
        assert!(cfg.validate().is_err());
        let mut cfg = WlanConfig::ac_defaults();
        cfg.mcs = 11;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn range_checks() {
        for (k, v) in [("alpha", "1.5"), ("beta", "-0.1"), ("b_mhz", "60"), ("mcs", "12"), ("k_groups", "0"), ("lambda_csi", "-1"), ("max_ampdu", "0"), ("cw_max_sta", "7")] {
            let mut cfg = WlanConfig::default();
            cfg.set(k, v).unwrap();
            assert!(cfg.validate().is_err(), "{k}={v} accepted");
        }
    }

    #[test]
    fn overrides() {
        let mut cfg = WlanConfig::default();
        cfg.apply_overrides(&["n=40", "m_ap = 6"]).unwrap();
        assert_eq!((cfg.n, cfg.m_ap), (40, 6));
        assert!(cfg.apply_overrides(&["n"]).is_err());
    }

    #[test]
    fn stage_counts_follow_windows() {
        let c = WlanConfig::default().contention();
        assert_eq!((c.m_ap_stages, c.m_sta_stages), (6, 6));
    }

    fn arb_config() -> impl Strategy<Value = WlanConfig> {
        (
            0u32..300,
            0.0f64..=1.0,
            0.0f64..=1.0,
            1u32..=256,
            prop::sample::select(vec![20u32, 40, 80, 160]),
            0u8..=11,
            0.0f64..200.0,
            any::<bool>(),
            1u32..=8,
            1000.0f64..10000.0,
        )
            .prop_map(|(n, alpha, beta, max_ampdu, b, mcs, lambda, cf, m_ap, ppdu)| WlanConfig {
                n,
                alpha,
                beta,
                max_ampdu,
                b_mhz: b,
                mcs,
                lambda_csi: lambda,
                contention_free: cf,
                m_ap,
                max_ppdu_us: ppdu,
                ..Default::default()
            })
    }

    proptest! {
        #[test]
        fn text_round_trip(cfg in arb_config()) {
            let back = WlanConfig::from_text(&cfg.to_text()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
