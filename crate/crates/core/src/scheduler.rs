//! AP resource allocation for MU transmissions: how many stations to serve,
//! how to split the channel into equal RUs and how many spatial streams
//! each station gets.

use rand::Rng;

use crate::error::{Error, Result};
use crate::phy::ChannelWidth;

/// RU counts that land the RU width on a supported channel width.
const RU_COUNTS: [u32; 4] = [8, 4, 2, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AntennaConfig {
    pub m_ap: u32,
    pub m_sta: u32,
}

impl Default for AntennaConfig {
    fn default() -> Self {
        AntennaConfig { m_ap: 8, m_sta: 4 }
    }
}

impl AntennaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_ap == 0 {
            return Err(Error::config("m_ap", "the AP needs at least one antenna"));
        }
        if self.m_sta == 0 {
            return Err(Error::config("m_sta", "stations need at least one antenna"));
        }
        Ok(())
    }

    /// Within the 8x4 antenna envelope of the standard.
    pub fn is_standard(&self) -> bool {
        1 <= self.m_sta && self.m_sta <= self.m_ap && self.m_ap <= 8
    }
}

/// Result of the MU scheduling rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuAllocation {
    /// Stations served by one MU transmission.
    pub v_u: u32,
    /// Number of RUs.
    pub n_ru: u32,
    /// Width of each RU.
    pub b_ru: ChannelWidth,
    /// Stations spatially multiplexed per RU.
    pub v_m: u32,
    /// Spatial streams per station.
    pub v_s: u32,
}

impl RuAllocation {
    pub fn check(&self, ant: &AntennaConfig, b: ChannelWidth) -> Result<()> {
        let fail = |msg: String| Err(Error::Numerical(format!("invalid RU allocation {self:?}: {msg}")));
        if self.v_u != self.n_ru * self.v_m {
            return fail("v_u != n_ru * v_m".into());
        }
        if self.b_ru.mhz() * self.n_ru != b.mhz() {
            return fail(format!("RUs do not tile {b}"));
        }
        if self.v_m > ant.m_ap || self.v_m * self.v_s > ant.m_ap {
            return fail("stream budget exceeded".into());
        }
        if self.v_s != ant.m_sta.min(ant.m_ap / self.v_m) {
            return fail("v_s != min(m_sta, m_ap / v_m)".into());
        }
        Ok(())
    }
}

/// Which MU capabilities the AP has.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MuPolicy {
    /// Frequency-domain multiplexing allowed.
    pub ofdma: bool,
    /// Cap on users per MU transmission, if any.
    pub max_users: Option<u32>,
}

impl MuPolicy {
    /// 802.11ax: OFDMA plus MU-MIMO, no extra user cap.
    pub const HE: MuPolicy = MuPolicy {
        ofdma: true,
        max_users: None,
    };
    /// 802.11ac: DL MU-MIMO only, at most four users.
    pub const VHT: MuPolicy = MuPolicy {
        ofdma: false,
        max_users: Some(4),
    };
}

/// 802.11ax allocation for `n` stations on a `b`-wide channel.
pub fn allocate_mu(n: u32, ant: &AntennaConfig, b: ChannelWidth) -> Result<RuAllocation> {
    allocate_mu_with(n, ant, b, MuPolicy::HE)
}

/// Picks `v_u` and the RU split.
///
/// With fewer stations than MU-MIMO streams, everyone shares one
/// full-width RU. Otherwise the AP fills `n_ru` equal RUs with `m_ap`
/// stations each, taking the largest `n_ru` for which enough stations exist.
pub fn allocate_mu_with(
    n: u32,
    ant: &AntennaConfig,
    b: ChannelWidth,
    policy: MuPolicy,
) -> Result<RuAllocation> {
    if n == 0 {
        return Err(Error::Precondition("MU allocation needs at least one station".into()));
    }
    ant.validate()?;
    let per_ru = policy.max_users.map_or(ant.m_ap, |cap| cap.min(ant.m_ap));

    if n < per_ru {
        return Ok(RuAllocation {
            v_u: n,
            n_ru: 1,
            b_ru: b,
            v_m: n,
            v_s: ant.m_sta.min(ant.m_ap / n),
        });
    }

    let n_ru = if policy.ofdma {
        RU_COUNTS
            .iter()
            .copied()
            .find(|&k| k <= b.subchannels() && per_ru * k <= n)
            .unwrap_or(1)
    } else {
        1
    };
    Ok(RuAllocation {
        v_u: per_ru * n_ru,
        n_ru,
        b_ru: b.split(n_ru)?,
        v_m: per_ru,
        v_s: ant.m_sta.min(ant.m_ap / per_ru),
    })
}

/// Streams used by an SU transmission.
pub fn su_streams(ant: &AntennaConfig) -> u32 {
    ant.m_sta.min(ant.m_ap)
}

/// Uniformly random `v_u`-subset of the station ids `1..=n`, sorted.
pub fn pick_stations<R: Rng + ?Sized>(n: u32, v_u: u32, rng: &mut R) -> Result<Vec<u32>> {
    if v_u > n {
        return Err(Error::Precondition(format!(
            "cannot pick {v_u} stations out of {n}"
        )));
    }
    let mut ids: Vec<u32> = rand::seq::index::sample(rng, n as usize, v_u as usize)
        .into_iter()
        .map(|i| i as u32 + 1)
        .collect();
    ids.sort_unstable();
    Ok(ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::ChannelWidth::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn worked_example_forty_stations() {
        let ant = AntennaConfig { m_ap: 6, m_sta: 4 };
        let a = allocate_mu(40, &ant, Mhz160).unwrap();
        assert_eq!(
            a,
            RuAllocation { v_u: 24, n_ru: 4, b_ru: Mhz40, v_m: 6, v_s: 1 }
        );
    }

    #[test]
    fn sixty_four_single_stream_users() {
        let a = allocate_mu(64, &AntennaConfig::default(), Mhz160).unwrap();
        assert_eq!(
            a,
            RuAllocation { v_u: 64, n_ru: 8, b_ru: Mhz20, v_m: 8, v_s: 1 }
        );
    }

    #[test]
    fn few_stations_share_full_channel() {
        let a = allocate_mu(2, &AntennaConfig::default(), Mhz160).unwrap();
        assert_eq!(
            a,
            RuAllocation { v_u: 2, n_ru: 1, b_ru: Mhz160, v_m: 2, v_s: 4 }
        );
    }

    #[test]
    fn uneven_station_count_keeps_multiple_of_m_ap() {
        let a = allocate_mu(9, &AntennaConfig::default(), Mhz160).unwrap();
        assert_eq!(a.v_u, 8);
        assert_eq!(a.n_ru, 1);
    }

    #[test]
    fn narrow_channel_limits_ru_count() {
        let a = allocate_mu(64, &AntennaConfig::default(), Mhz80).unwrap();
        assert_eq!((a.v_u, a.n_ru, a.b_ru), (32, 4, Mhz20));
    }

    #[test]
    fn vht_policy_caps_users() {
        let ant = AntennaConfig::default();
        let a = allocate_mu_with(32, &ant, Mhz160, MuPolicy::VHT).unwrap();
        assert_eq!(a, RuAllocation { v_u: 4, n_ru: 1, b_ru: Mhz160, v_m: 4, v_s: 2 });
        let a = allocate_mu_with(3, &ant, Mhz160, MuPolicy::VHT).unwrap();
        assert_eq!((a.v_u, a.v_s), (3, 2));
    }

    #[test]
    fn zero_stations_rejected() {
        assert!(allocate_mu(0, &AntennaConfig::default(), Mhz20).is_err());
    }

    #[test]
    fn su_stream_counts() {
        assert_eq!(su_streams(&AntennaConfig { m_ap: 8, m_sta: 4 }), 4);
        assert_eq!(su_streams(&AntennaConfig { m_ap: 1, m_sta: 1 }), 1);
        assert_eq!(su_streams(&AntennaConfig { m_ap: 2, m_sta: 4 }), 2);
    }

    #[test]
    fn pick_stations_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(pick_stations(5, 5, &mut rng).unwrap(), vec![1, 2, 3, 4, 5]);
        assert!(pick_stations(4, 0, &mut rng).unwrap().is_empty());
        assert!(pick_stations(3, 4, &mut rng).is_err());
    }

    #[test]
    fn pick_stations_is_deterministic() {
        let a = pick_stations(40, 24, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = pick_stations(40, 24, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 24);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(a.iter().all(|&id| (1..=40).contains(&id)));
    }

    #[test]
    fn every_allocation_is_valid() {
        for b in ChannelWidth::ALL {
            for m_ap in 1..=8 {
                for m_sta in 1..=4 {
                    let ant = AntennaConfig { m_ap, m_sta };
                    for n in 1..=256 {
                        let a = allocate_mu(n, &ant, b).unwrap();
                        a.check(&ant, b).unwrap();
                        assert!(a.v_u <= n);
                        if n < m_ap {
                            assert_eq!(a.v_u, n);
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn picked_sets_are_subsets(n in 1u32..200, frac in 0.0f64..=1.0, seed: u64) {
            let v_u = (n as f64 * frac).floor() as u32;
            let ids = pick_stations(n, v_u, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert_eq!(ids.len() as u32, v_u);
            prop_assert!(ids.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(ids.iter().all(|&id| id >= 1 && id <= n));
        }
    }
}
