//! Static PHY knowledge: MCS definitions, data subcarrier counts, symbol and
//! preamble durations, and the bits-per-OFDM-symbol rate function.
//!
//! Rates are carried as exact rationals ([`SymbolRate`]) so that the
//! `ceil(bits / rate)` symbol counts used by every airtime formula never see
//! floating point rounding.

use std::fmt;

use crate::error::{Error, Result};

/// PHY generation a rate table belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Amendment {
    /// 802.11ax (HE), 16 us symbols with 3.2 us GI.
    Ax,
    /// 802.11ac (VHT), 4 us symbols with 0.8 us GI.
    Ac,
    /// 802.11a OFDM, 20 MHz only.
    Legacy,
}

impl Amendment {
    pub fn name(self) -> &'static str {
        match self {
            Amendment::Ax => "ax",
            Amendment::Ac => "ac",
            Amendment::Legacy => "legacy",
        }
    }
}

impl fmt::Display for Amendment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Amendment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ax" | "11ax" => Ok(Amendment::Ax),
            "ac" | "11ac" => Ok(Amendment::Ac),
            "legacy" | "11a" => Ok(Amendment::Legacy),
            other => Err(Error::config("amendment", format!("unknown amendment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelWidth {
    Mhz20,
    Mhz40,
    Mhz80,
    Mhz160,
}

impl ChannelWidth {
    pub const ALL: [ChannelWidth; 4] = [
        ChannelWidth::Mhz20,
        ChannelWidth::Mhz40,
        ChannelWidth::Mhz80,
        ChannelWidth::Mhz160,
    ];

    pub fn from_mhz(mhz: u32) -> Result<Self> {
        match mhz {
            20 => Ok(ChannelWidth::Mhz20),
            40 => Ok(ChannelWidth::Mhz40),
            80 => Ok(ChannelWidth::Mhz80),
            160 => Ok(ChannelWidth::Mhz160),
            other => Err(Error::UnsupportedWidth(other)),
        }
    }

    pub fn mhz(self) -> u32 {
        match self {
            ChannelWidth::Mhz20 => 20,
            ChannelWidth::Mhz40 => 40,
            ChannelWidth::Mhz80 => 80,
            ChannelWidth::Mhz160 => 160,
        }
    }

    /// Number of 20 MHz sub-channels.
    pub fn subchannels(self) -> u32 {
        self.mhz() / 20
    }

    /// Width of one of `parts` equal sub-channels, if that is a supported width.
    pub fn split(self, parts: u32) -> Result<Self> {
        if parts == 0 || !self.mhz().is_multiple_of(parts) {
            return Err(Error::Precondition(format!(
                "cannot split {} MHz into {parts} equal parts",
                self.mhz()
            )));
        }
        ChannelWidth::from_mhz(self.mhz() / parts)
    }
}

impl fmt::Display for ChannelWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} MHz", self.mhz())
    }
}

/// Code rate as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodingRate {
    pub num: u32,
    pub den: u32,
}

impl CodingRate {
    pub const fn new(num: u32, den: u32) -> Self {
        CodingRate { num, den }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for CodingRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A modulation and coding scheme row.
///
/// For DCM rows `y_c` is the effective code rate (half the non-DCM rate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mcs {
    pub index: u8,
    /// Bits per constellation symbol.
    pub y_m: u32,
    pub y_c: CodingRate,
    pub dcm: bool,
}

const fn row(index: u8, y_m: u32, num: u32, den: u32, dcm: bool) -> Mcs {
    Mcs {
        index,
        y_m,
        y_c: CodingRate::new(num, den),
        dcm,
    }
}

/// Every HE MCS row, DCM variants included.
pub const HE_MCS_TABLE: [Mcs; 16] = [
    row(0, 1, 1, 4, true),
    row(0, 1, 1, 2, false),
    row(1, 2, 1, 4, true),
    row(1, 2, 1, 2, false),
    row(2, 2, 3, 4, false),
    row(3, 4, 1, 4, true),
    row(3, 4, 1, 2, false),
    row(4, 4, 3, 8, true),
    row(4, 4, 3, 4, false),
    row(5, 6, 2, 3, false),
    row(6, 6, 3, 4, false),
    row(7, 6, 5, 6, false),
    row(8, 8, 3, 4, false),
    row(9, 8, 5, 6, false),
    row(10, 10, 3, 4, false),
    row(11, 10, 5, 6, false),
];

impl Mcs {
    /// Looks up an HE MCS row.
    pub fn he(index: u8, dcm: bool) -> Result<Mcs> {
        HE_MCS_TABLE
            .iter()
            .copied()
            .find(|m| m.index == index && m.dcm == dcm)
            .ok_or(Error::InvalidMcs {
                index,
                dcm,
                amendment: "ax",
            })
    }

    /// Looks up a row valid for `amendment`.
    ///
    /// 11ac has no DCM and stops at MCS 9; 11a maps seven of its rates onto
    /// MCS 0-6 of the same table (BPSK 1/2 up to 64-QAM 3/4).
    pub fn for_amendment(amendment: Amendment, index: u8, dcm: bool) -> Result<Mcs> {
        let limit = match amendment {
            Amendment::Ax => 11,
            Amendment::Ac => 9,
            Amendment::Legacy => 6,
        };
        if index > limit || (dcm && amendment != Amendment::Ax) {
            return Err(Error::InvalidMcs {
                index,
                dcm,
                amendment: amendment.name(),
            });
        }
        Mcs::he(index, dcm)
    }

    pub fn modulation(&self) -> &'static str {
        match self.y_m {
            1 => "BPSK",
            2 => "QPSK",
            4 => "16-QAM",
            6 => "64-QAM",
            8 => "256-QAM",
            10 => "1024-QAM",
            _ => "?",
        }
    }
}

impl fmt::Display for Mcs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MCS{} ({} {}", self.index, self.modulation(), self.y_c)?;
        if self.dcm {
            f.write_str(" DCM")?;
        }
        f.write_str(")")
    }
}

/// Data subcarriers per channel width for one amendment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubcarrierTable {
    amendment: Amendment,
}

impl SubcarrierTable {
    pub const HE: SubcarrierTable = SubcarrierTable {
        amendment: Amendment::Ax,
    };

    pub fn new(amendment: Amendment) -> Self {
        SubcarrierTable { amendment }
    }

    pub fn amendment(&self) -> Amendment {
        self.amendment
    }

    pub fn data_subcarriers(&self, width: ChannelWidth) -> Result<u32> {
        use ChannelWidth::*;
        let n = match (self.amendment, width) {
            (Amendment::Ax, Mhz20) => 234,
            (Amendment::Ax, Mhz40) => 468,
            (Amendment::Ax, Mhz80) => 980,
            (Amendment::Ax, Mhz160) => 1960,
            (Amendment::Ac, Mhz20) => 52,
            (Amendment::Ac, Mhz40) => 108,
            (Amendment::Ac, Mhz80) => 234,
            (Amendment::Ac, Mhz160) => 468,
            (Amendment::Legacy, Mhz20) => 48,
            (Amendment::Legacy, w) => return Err(Error::UnsupportedWidth(w.mhz())),
        };
        Ok(n)
    }
}

/// HE data subcarriers for a width given in MHz.
pub fn data_subcarriers(width_mhz: u32) -> Result<u32> {
    SubcarrierTable::HE.data_subcarriers(ChannelWidth::from_mhz(width_mhz)?)
}

/// Bits carried by one OFDM symbol, as the exact fraction `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolRate {
    num: u64,
    den: u64,
}

impl SymbolRate {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::Precondition(format!(
                "symbol rate {num}/{den} must be positive"
            )));
        }
        Ok(SymbolRate { num, den })
    }

    /// Integer bits per symbol, rounded down.
    pub fn bits_floor(&self) -> u64 {
        self.num / self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// OFDM symbols needed for `bits`: `ceil(bits / rate)`.
    pub fn symbols_for(&self, bits: u64) -> u64 {
        (bits * self.den).div_ceil(self.num)
    }

    /// Largest payload that fits in `symbols` symbols.
    pub fn bits_in(&self, symbols: u64) -> u64 {
        symbols * self.num / self.den
    }
}

/// `r(V_s, B) = V_s * Y_m * Y_c * Y_sc(B)` for the given subcarrier table.
pub fn symbol_rate(
    table: SubcarrierTable,
    mcs: Mcs,
    v_s: u32,
    width: ChannelWidth,
) -> Result<SymbolRate> {
    if v_s == 0 {
        return Err(Error::Precondition("at least one spatial stream is required".into()));
    }
    let y_sc = table.data_subcarriers(width)? as u64;
    SymbolRate::new(
        v_s as u64 * mcs.y_m as u64 * mcs.y_c.num as u64 * y_sc,
        mcs.y_c.den as u64,
    )
}

/// HE bits per OFDM symbol, rounded down to whole bits.
pub fn bits_per_symbol(mcs: Mcs, v_s: u32, width_mhz: u32) -> Result<u64> {
    let width = ChannelWidth::from_mhz(width_mhz)?;
    Ok(symbol_rate(SubcarrierTable::HE, mcs, v_s, width)?.bits_floor())
}

/// HE PHY rate in Mb/s with the default 16 us symbol.
pub fn phy_rate_mbps(mcs: Mcs, v_s: u32, width_mhz: u32) -> Result<f64> {
    let width = ChannelWidth::from_mhz(width_mhz)?;
    PhyProfile::he(width).rate_mbps(mcs, v_s, width)
}

/// Symbol clock and preamble durations (all in microseconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhyProfile {
    pub amendment: Amendment,
    pub channel_width: ChannelWidth,
    pub sigma_us: f64,
    pub sigma_legacy_us: f64,
    pub t_phy_legacy_us: f64,
    pub t_phy_he_su_us: f64,
    pub t_phy_he_mu_us: f64,
    pub t_phy_he_tb_us: f64,
    pub t_ndp_us: f64,
    pub r_legacy_bits_per_symbol: u64,
}

impl PhyProfile {
    pub fn he(channel_width: ChannelWidth) -> Self {
        PhyProfile {
            amendment: Amendment::Ax,
            channel_width,
            sigma_us: 16.0,
            sigma_legacy_us: 4.0,
            t_phy_legacy_us: 20.0,
            t_phy_he_su_us: 164.0,
            t_phy_he_mu_us: 168.0,
            t_phy_he_tb_us: 228.0,
            t_ndp_us: 168.0,
            r_legacy_bits_per_symbol: 24,
        }
    }

    /// VHT profile. The 52 us preamble is L-STF/L-LTF/L-SIG (20 us), VHT-SIG-A
    /// (8), VHT-STF (4), four VHT-LTFs (16) and VHT-SIG-B (4). It is used for
    /// every PPDU kind, and the NDP carries the same preamble.
    pub fn vht(channel_width: ChannelWidth) -> Self {
        PhyProfile {
            amendment: Amendment::Ac,
            channel_width,
            sigma_us: 4.0,
            sigma_legacy_us: 4.0,
            t_phy_legacy_us: 20.0,
            t_phy_he_su_us: 52.0,
            t_phy_he_mu_us: 52.0,
            t_phy_he_tb_us: 52.0,
            t_ndp_us: 52.0,
            r_legacy_bits_per_symbol: 24,
        }
    }

    pub fn for_amendment(amendment: Amendment, channel_width: ChannelWidth) -> Result<Self> {
        match amendment {
            Amendment::Ax => Ok(Self::he(channel_width)),
            Amendment::Ac => Ok(Self::vht(channel_width)),
            Amendment::Legacy => Err(Error::config(
                "amendment",
                "the 11a table is reference-only and has no MAC profile",
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let durations = [
            ("sigma_us", self.sigma_us),
            ("sigma_legacy_us", self.sigma_legacy_us),
            ("t_phy_legacy_us", self.t_phy_legacy_us),
            ("t_phy_he_su_us", self.t_phy_he_su_us),
            ("t_phy_he_mu_us", self.t_phy_he_mu_us),
            ("t_phy_he_tb_us", self.t_phy_he_tb_us),
            ("t_ndp_us", self.t_ndp_us),
        ];
        for (key, v) in durations {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, format!("duration must be positive, got {v}")));
            }
        }
        let ratio = self.sigma_us / self.sigma_legacy_us;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::config(
                "sigma_us",
                format!(
                    "{} us is not a multiple of the {} us legacy symbol",
                    self.sigma_us, self.sigma_legacy_us
                ),
            ));
        }
        if self.r_legacy_bits_per_symbol == 0 {
            return Err(Error::config("r_legacy", "legacy rate must be positive"));
        }
        Ok(())
    }

    pub fn subcarriers(&self) -> SubcarrierTable {
        SubcarrierTable::new(self.amendment)
    }

    pub fn symbol_rate(&self, mcs: Mcs, v_s: u32, width: ChannelWidth) -> Result<SymbolRate> {
        symbol_rate(self.subcarriers(), mcs, v_s, width)
    }

    pub fn rate_mbps(&self, mcs: Mcs, v_s: u32, width: ChannelWidth) -> Result<f64> {
        Ok(self.symbol_rate(mcs, v_s, width)?.as_f64() / self.sigma_us)
    }
}

/// Single-stream rate of the reference tables (11a, 11ac, 11ax) in Mb/s.
///
/// 11a and 11ac use 4 us symbols; 11ax uses 16 us.
pub fn reference_rate_mbps(
    amendment: Amendment,
    mcs_index: u8,
    dcm: bool,
    width: ChannelWidth,
) -> Result<f64> {
    let mcs = Mcs::for_amendment(amendment, mcs_index, dcm)?;
    let table = SubcarrierTable::new(amendment);
    let rate = symbol_rate(table, mcs, 1, width)?;
    // 11ac MCS 9 at 20 MHz would need a fractional number of bits per symbol.
    if amendment == Amendment::Ac && rate.num % rate.den != 0 {
        return Err(Error::InvalidMcs {
            index: mcs_index,
            dcm,
            amendment: amendment.name(),
        });
    }
    let sigma = if amendment == Amendment::Ax { 16.0 } else { 4.0 };
    Ok(rate.as_f64() / sigma)
}
