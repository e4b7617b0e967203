#![allow(dead_code)]

/// Published single-stream 11ax rates (Mb/s) at 20/40/80/160 MHz.
pub const AX_RATES: [(u8, bool, [f64; 4]); 16] = [
    (0, true, [3.6, 7.3, 15.3, 30.6]),
    (0, false, [7.3, 14.6, 30.6, 61.3]),
    (1, true, [7.3, 14.6, 30.6, 61.3]),
    (1, false, [14.6, 29.3, 61.3, 122.5]),
    (2, false, [21.9, 43.9, 91.9, 183.8]),
    (3, true, [14.6, 29.3, 61.3, 122.5]),
    (3, false, [29.3, 58.5, 122.5, 245.0]),
    (4, true, [21.9, 43.9, 91.9, 183.8]),
    (4, false, [43.9, 87.8, 183.8, 367.5]),
    (5, false, [58.5, 117.0, 245.0, 490.0]),
    (6, false, [65.8, 131.6, 275.6, 551.3]),
    (7, false, [73.1, 146.3, 306.3, 612.5]),
    (8, false, [87.8, 175.5, 367.5, 735.0]),
    (9, false, [97.5, 195.0, 408.3, 816.6]),
    (10, false, [109.7, 219.4, 459.4, 918.8]),
    (11, false, [121.9, 243.8, 510.4, 1020.8]),
];

/// Published 11ac rates; `None` where the table has no entry.
pub const AC_RATES: [(u8, [Option<f64>; 4]); 10] = [
    (0, [Some(6.5), Some(13.5), Some(29.3), Some(58.5)]),
    (1, [Some(13.0), Some(27.0), Some(58.5), Some(117.0)]),
    (2, [Some(19.5), Some(40.5), Some(87.8), Some(175.5)]),
    (3, [Some(26.0), Some(54.0), Some(117.0), Some(234.0)]),
    (4, [Some(39.0), Some(81.0), Some(175.5), Some(351.0)]),
    (5, [Some(52.0), Some(108.0), Some(234.0), Some(468.0)]),
    (6, [Some(58.5), Some(121.5), Some(263.3), Some(526.5)]),
    (7, [Some(65.0), Some(135.0), Some(292.5), Some(585.0)]),
    (8, [Some(78.0), Some(162.0), Some(351.0), Some(702.0)]),
    (9, [None, Some(180.0), Some(390.0), Some(780.0)]),
];

pub const LEGACY_RATES: [(u8, f64); 7] =
    [(0, 6.0), (1, 12.0), (2, 18.0), (3, 24.0), (4, 36.0), (5, 48.0), (6, 54.0)];

pub const WIDTHS: [u32; 4] = [20, 40, 80, 160];

/// Mean backoff per attempt from its definition: stage `i` is reached
/// with probability `p^i`, ends there with `1 - p`, and draws a mean of
/// `2^min(i, m) * cw / 2` slots. Summed until terms fall below 1e-15 of
/// the running total; past 200000 stages the rest, all at the final
/// window, is added in one piece.
pub fn backoff_by_summation(cw: u32, m: u32, p: f64) -> f64 {
    let half = cw as f64 / 2.0;
    if p >= 1.0 {
        // Every attempt runs into the last stage.
        return half * 2f64.powi(m as i32);
    }
    let mut total = 0.0;
    let mut reach = 1.0;
    let mut i = 0u32;
    loop {
        let window = half * 2f64.powi(i.min(m) as i32);
        let term = reach * (1.0 - p) * window;
        total += term;
        if i > m && (term <= 1e-15 * total || total == 0.0) {
            break;
        }
        reach *= p;
        i += 1;
        if i > 200_000 {
            total += reach * half * 2f64.powi(m as i32);
            break;
        }
    }
    total
}

pub fn tau_by_summation(cw: u32, m: u32, p: f64) -> f64 {
    1.0 / (backoff_by_summation(cw, m, p) + 1.0)
}

/// Fixed point by plain bisection on the station attempt probability:
/// for a trial `t`, the AP's probability follows directly, and the gap
/// `tau_sta(pc_sta) - t` changes sign once on [0, 1].
pub fn fixed_point_by_bisection(cw_ap: u32, m_ap: u32, cw_sta: u32, m_sta: u32, n: u32) -> (f64, f64) {
    let ap = |t: f64| tau_by_summation(cw_ap, m_ap, 1.0 - (1.0 - t).powi(n as i32));
    let gap = |t: f64| {
        let a = ap(t);
        let pc = 1.0 - (1.0 - a) * (1.0 - t).powi(n as i32 - 1);
        tau_by_summation(cw_sta, m_sta, pc) - t
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    (ap(t), t)
}

/// Slot outcome probabilities of one AP and `n` stations by enumerating
/// every transmit/idle combination, in the order
/// a1 a2 a3 a4 b1 c1 c2 c3 c4.
pub fn enumerate_slots(n: u32, tau_ap: f64, tau_sta: f64, alpha: f64, beta: f64) -> [f64; 9] {
    let mut out = [0.0; 9];
    for mask in 0u32..(1 << (n + 1)) {
        let ap = mask & 1 == 1;
        let stations = (mask >> 1).count_ones();
        let mut p = if ap { tau_ap } else { 1.0 - tau_ap };
        for k in 0..n {
            p *= if (mask >> (k + 1)) & 1 == 1 { tau_sta } else { 1.0 - tau_sta };
        }
        let (su, dl, ul) = (alpha, (1.0 - alpha) * beta, (1.0 - alpha) * (1.0 - beta));
        match (ap, stations) {
            (false, 0) => out[4] += p,
            (false, 1) => out[1] += p,
            (false, _) => out[8] += p,
            (true, 0) => {
                out[0] += p * su;
                out[2] += p * dl;
                out[3] += p * ul;
            }
            (true, _) => {
                out[5] += p * su;
                out[6] += p * dl;
                out[7] += p * ul;
            }
        }
    }
    out
}

/// Legacy control frame duration written out from the frame format:
/// 20 us preamble plus 4 us symbols of 24 bits covering service field,
/// body and tail.
pub fn legacy_us(body_bits: u64) -> f64 {
    20.0 + ((16 + body_bits + 18) as f64 / 24.0).ceil() * 4.0
}

/// HE data PPDU duration for `n_a` frames of 12000 bits at `bits_per_symbol`.
pub fn he_data_us(preamble: f64, n_a: u64, bits_per_symbol: f64) -> f64 {
    let payload = if n_a == 1 { 16 + 320 + 12000 + 18 } else { 16 + n_a * (32 + 320 + 12000) + 18 };
    preamble + (payload as f64 / bits_per_symbol).ceil() * 16.0
}
