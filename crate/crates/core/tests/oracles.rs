mod common;

use axsat::frames::{AggregationPlan, Airtime, FrameConstants, TimingConstants};
use axsat::model::{
    expected_backoff_slots, slot_distribution, solve_fixed_point, ContentionParams,
    FixedPointSolution, SlotDistribution, SolveMethod,
};
use axsat::phy::{
    bits_per_symbol, data_subcarriers, phy_rate_mbps, reference_rate_mbps, Amendment,
    ChannelWidth, Mcs, PhyProfile,
};
use axsat::scheduler::{allocate_mu, su_streams, AntennaConfig};
use common::*;

#[test]
fn ax_rate_table() {
    for (index, dcm, rates) in AX_RATES {
        let mcs = Mcs::he(index, dcm).unwrap();
        for (w, expected) in WIDTHS.iter().zip(rates) {
            let r = phy_rate_mbps(mcs, 1, *w).unwrap();
            assert!((r - expected).abs() <= 0.1, "MCS{index} dcm={dcm} {w} MHz: {r} vs {expected}");
        }
    }
}

#[test]
fn ac_and_legacy_rate_tables() {
    for (index, rates) in AC_RATES {
        for (w, expected) in WIDTHS.iter().zip(rates) {
            let width = ChannelWidth::from_mhz(*w).unwrap();
            let got = reference_rate_mbps(Amendment::Ac, index, false, width);
            match expected {
                Some(e) => {
                    let r = got.unwrap();
                    assert!((r - e).abs() <= 0.1, "ac MCS{index} {w}: {r} vs {e}");
                }
                None => assert!(got.is_err(), "ac MCS{index} {w} should be undefined"),
            }
        }
    }
    for (index, expected) in LEGACY_RATES {
        let r = reference_rate_mbps(Amendment::Legacy, index, false, ChannelWidth::Mhz20).unwrap();
        assert!((r - expected).abs() < 1e-9);
    }
    assert!(reference_rate_mbps(Amendment::Legacy, 7, false, ChannelWidth::Mhz20).is_err());
    assert!(reference_rate_mbps(Amendment::Ac, 10, false, ChannelWidth::Mhz80).is_err());
}

/// Every published rate pins the subcarrier count to an interval; the
/// intersection over all rows of a width must hold the count in use.
#[test]
fn subcarriers_follow_from_inverting_the_rate_table() {
    for (col, w) in WIDTHS.iter().enumerate() {
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        for (index, dcm, rates) in AX_RATES {
            let mcs = Mcs::he(index, dcm).unwrap();
            let per_sc = mcs.y_m as f64 * mcs.y_c.as_f64() / 16.0;
            lo = lo.max((rates[col] - 0.1) / per_sc);
            hi = hi.min((rates[col] + 0.1) / per_sc);
        }
        let y = data_subcarriers(*w).unwrap() as f64;
        assert!(lo <= y && y <= hi, "{w} MHz: {y} outside [{lo}, {hi}]");
        let candidates = (lo.ceil() as u32..=hi.floor() as u32).count();
        assert!(candidates <= 2, "{w} MHz inversion is ambiguous: [{lo}, {hi}]");
        if *w == 20 {
            assert!(!(lo..=hi).contains(&242.0));
        }
    }
    assert!(data_subcarriers(60).is_err());
}

#[test]
fn bits_per_symbol_is_the_plain_product() {
    for (index, dcm, _) in AX_RATES {
        let mcs = Mcs::he(index, dcm).unwrap();
        for w in WIDTHS {
            for v_s in 1..=8u32 {
                let y = data_subcarriers(w).unwrap() as u64;
                let exact = v_s as u64 * mcs.y_m as u64 * mcs.y_c.num as u64 * y;
                assert_eq!(bits_per_symbol(mcs, v_s, w).unwrap(), exact / mcs.y_c.den as u64);
            }
        }
    }
}

fn airtime(width: u32, mcs: u8) -> Airtime {
    let w = ChannelWidth::from_mhz(width).unwrap();
    Airtime::new(PhyProfile::he(w), FrameConstants::default(), TimingConstants::default(), Mcs::he(mcs, false).unwrap())
}

#[test]
fn control_frames_from_their_bit_lengths() {
    let a = airtime(160, 6);
    assert_eq!(a.rts(), legacy_us(160));
    assert_eq!(a.cts(), legacy_us(112));
    assert_eq!(a.back(), legacy_us(256));
    for v in [1u32, 2, 8, 37, 74] {
        assert_eq!(a.mu_rts(v), legacy_us(224 + 40 * v as u64));
        assert_eq!(a.trigger(v), legacy_us(224 + 48 * v as u64));
        assert_eq!(a.ms_back(v), legacy_us(176 + 288 * v as u64));
        assert_eq!(a.ndpa(v), legacy_us(168 + 32 * v as u64));
    }
}

/// SU exchange rebuilt by hand for every MCS, width and aggregation level.
#[test]
fn su_exchange_rebuilt_by_hand() {
    let ant = AntennaConfig::default();
    for w in WIDTHS {
        for m in 0..=11u8 {
            let a = airtime(w, m);
            let mcs = Mcs::he(m, false).unwrap();
            let r = bits_per_symbol(mcs, 4, w).unwrap() as f64;
            let width = ChannelWidth::from_mhz(w).unwrap();
            let alloc = allocate_mu(16, &ant, width).unwrap();
            for n_a in [1u32, 2, 7, 64] {
                let d = a.exchange_durations(su_streams(&ant), &alloc, &AggregationPlan::uniform(n_a)).unwrap();
                let data = he_data_us(164.0, n_a as u64, r);
                let expected = 56.0 + 16.0 + 48.0 + 16.0 + data + 16.0 + 72.0 + 34.0;
                assert_eq!(d.t_su, expected, "{w} MHz MCS{m} n_a={n_a}");
                assert_eq!(d.t_c_su, 56.0 + 16.0 + 48.0 + 34.0);
            }
        }
    }
}

#[test]
fn data_ppdu_examples() {
    use axsat::frames::PpduKind::*;
    assert_eq!(airtime(160, 9).data_ppdu_duration(Su, 1, 4, ChannelWidth::Mhz160).unwrap(), 180.0);
    assert_eq!(airtime(20, 6).data_ppdu_duration(Tb, 1, 1, ChannelWidth::Mhz20).unwrap(), 420.0);
    assert_eq!(airtime(20, 0).data_ppdu_duration(Su, 1, 1, ChannelWidth::Mhz20).unwrap(), 1860.0);
    assert!(airtime(20, 0).data_ppdu_duration(Su, 0, 1, ChannelWidth::Mhz20).is_err());
}

#[test]
fn backoff_closed_form_matches_summation() {
    for (cw, m) in [(15u32, 6u32), (31, 5), (7, 0), (1023, 0), (15, 10)] {
        let mut grid: Vec<f64> = (0..=950).map(|i| i as f64 / 1000.0).collect();
        grid.extend((-2000..=2000).map(|k| 0.5 + k as f64 * 1e-7));
        for p in grid {
            let closed = expected_backoff_slots(cw, m, p).unwrap();
            let summed = backoff_by_summation(cw, m, p);
            assert!(
                (closed - summed).abs() <= 1e-9 * summed.max(1.0),
                "cw={cw} m={m} p={p}: {closed} vs {summed}"
            );
        }
    }
    assert_eq!(expected_backoff_slots(15, 6, 0.0).unwrap(), 7.5);
    assert_eq!(expected_backoff_slots(0, 0, 0.7).unwrap(), 0.0);
    assert!(expected_backoff_slots(15, 6, 1.0).is_err());
}

#[test]
fn fixed_point_matches_bisection_oracle() {
    for n in [1u32, 2, 16, 64] {
        let p = ContentionParams { n, ..Default::default() };
        let fp = solve_fixed_point(&p, 1e-12, 10_000).unwrap();
        let (ap, sta) = fixed_point_by_bisection(15, 6, 15, 6, n);
        assert!((fp.tau_ap - ap).abs() < 1e-8, "n={n}: {} vs {ap}", fp.tau_ap);
        assert!((fp.tau_sta - sta).abs() < 1e-8, "n={n}: {} vs {sta}", fp.tau_sta);
    }
    let p = ContentionParams { n: 16, cw_min_sta: 255, m_sta_stages: 2, ..Default::default() };
    let fp = solve_fixed_point(&p, 1e-12, 10_000).unwrap();
    let (ap, sta) = fixed_point_by_bisection(15, 6, 255, 2, 16);
    assert!((fp.tau_ap - ap).abs() < 1e-8 && (fp.tau_sta - sta).abs() < 1e-8);
}

#[test]
fn lone_ap_and_symmetric_pair() {
    let fp = solve_fixed_point(&ContentionParams { n: 0, ..Default::default() }, 1e-10, 100).unwrap();
    assert_eq!(fp.pc_ap, 0.0);
    assert!((fp.tau_ap - 1.0 / 8.5).abs() < 1e-15);
    let fp = solve_fixed_point(&ContentionParams { n: 1, ..Default::default() }, 1e-12, 10_000).unwrap();
    assert!((fp.tau_ap - fp.tau_sta).abs() < 1e-10);
}

fn fake_fp(tau_ap: f64, tau_sta: f64) -> FixedPointSolution {
    FixedPointSolution {
        tau_ap,
        tau_sta,
        pc_ap: 0.0,
        pc_sta: 0.0,
        iterations: 0,
        residual: 0.0,
        method: SolveMethod::Direct,
    }
}

#[test]
fn slot_distribution_matches_enumeration() {
    for (n, ta, ts, alpha, beta) in [
        (2u32, 0.1, 0.1, 0.2, 0.8),
        (1, 0.3, 0.05, 0.5, 0.5),
        (5, 0.02, 0.07, 1.0, 0.3),
        (7, 0.2, 0.01, 0.0, 0.0),
    ] {
        let p = ContentionParams { n, alpha, beta, ..Default::default() };
        let d = slot_distribution(&fake_fp(ta, ts), &p).unwrap().as_array();
        let e = enumerate_slots(n, ta, ts, alpha, beta);
        for (i, (a, b)) in d.iter().zip(e).enumerate() {
            assert!((a - b).abs() < 1e-14, "n={n} {}: {a} vs {b}", SlotDistribution::LABELS[i]);
        }
    }
}

#[test]
fn scheduler_worked_example() {
    let ant = AntennaConfig { m_ap: 6, m_sta: 4 };
    let a = allocate_mu(40, &ant, ChannelWidth::Mhz160).unwrap();
    assert_eq!((a.v_u, a.n_ru, a.b_ru.mhz(), a.v_m, a.v_s), (24, 4, 40, 6, 1));
}
