//! Saturation throughput of an 802.11ax WLAN with SU and MU (OFDMA and
//! MU-MIMO) transmissions, periodic channel sounding and EDCA contention.
//!
//! Two engines share one [`WlanConfig`]: a closed-form model
//! ([`engine::analyze`]) and a slotted Monte Carlo simulator
//! ([`engine::simulate`]).

pub mod config;
pub mod engine;
pub mod error;
pub mod frames;
pub mod model;
pub mod phy;
pub mod scenario;
pub mod scheduler;
pub mod sim;
pub mod sounding;
pub mod sweep;

pub use config::WlanConfig;
pub use engine::{analyze, analyze_detailed, simulate, validate, ValidationReport};
pub use error::{Error, Result};
pub use frames::{Airtime, ExchangeDurations, FrameConstants, TimingConstants};
pub use model::{FixedPointSolution, SlotDistribution, ThroughputReport};
pub use phy::{phy_rate_mbps, Amendment, ChannelWidth, Mcs, PhyProfile};
pub use scenario::Scenario;
pub use scheduler::{allocate_mu, AntennaConfig, RuAllocation};
pub use sim::{SimConfig, SimResult, WindowRule};
pub use sweep::{run_sweep, EngineSel, SimSettings, SweepRow, SweepSpec};
