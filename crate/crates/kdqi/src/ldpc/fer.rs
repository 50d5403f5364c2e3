//! Frame-error-rate scans with Wilson confidence intervals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::split_seed;
use crate::ldpc::bp::{bp_decode, transmit, Channel};
use crate::ldpc::code::LdpcCode;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const WILSON_Z: f64 = 1.959_963_984_540_054;

/// 95% Wilson score interval for `errors` failures in `trials` trials.
pub fn wilson_interval(errors: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FerPoint {
    /// Channel scan parameter (erasure/crossover probability, or Eb/N0 dB).
    pub param: f64,
    pub trials: usize,
    pub errors: usize,
    pub fer: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FerTable {
    pub channel_kind: String,
    pub rows: Vec<FerPoint>,
    /// Channel parameter where FER crosses one half, linearly interpolated
    /// between the first adjacent pair of rows straddling it.
    pub midpoint: Option<f64>,
}

/// A frame errs when decoding fails or lands on a nonzero word.
fn frame_errs(code: &LdpcCode, channel: Channel, max_iters: usize, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rx = match transmit(channel, code.n, code.rate(), &mut rng) {
        Ok(rx) => rx,
        Err(_) => return true,
    };
    match bp_decode(code, channel, &rx, max_iters) {
        Ok(out) => !(out.success && out.decoded.iter().all(|&b| !b)),
        Err(_) => true,
    }
}

/// Monte Carlo FER scan over channels of one kind. Trials are independently
/// seeded from `seed`, so results are byte-identical across thread counts.
pub fn fer_scan(
    code: &LdpcCode,
    channels: &[Channel],
    trials: usize,
    max_iters: usize,
    seed: u64,
) -> Result<FerTable> {
    if channels.is_empty() {
        return Err(Error::Argument("FER scan needs at least one channel point".into()));
    }
    if trials == 0 {
        return Err(Error::Argument("FER scan needs at least one trial".into()));
    }
    let kind = channels[0].kind();
    for ch in channels {
        ch.validate()?;
        if ch.kind() != kind {
            return Err(Error::Argument(
                "FER scan channels must share one channel kind".into(),
            ));
        }
    }
    let rows: Vec<FerPoint> = channels
        .iter()
        .enumerate()
        .map(|(i, &ch)| {
            let errors = (0..trials)
                .into_par_iter()
                .filter(|&t| {
                    frame_errs(code, ch, max_iters, split_seed(seed, "fer", (i * trials + t) as u64))
                })
                .count();
            let (wilson_lo, wilson_hi) = wilson_interval(errors, trials);
            FerPoint {
                param: ch.param(),
                trials,
                errors,
                fer: errors as f64 / trials as f64,
                wilson_lo,
                wilson_hi,
            }
        })
        .collect();
    let midpoint = crossing_param(&rows, 0.5);
    Ok(FerTable { channel_kind: kind.to_string(), rows, midpoint })
}

/// First adjacent pair of rows straddling `level`, linearly interpolated.
fn crossing_param(rows: &[FerPoint], level: f64) -> Option<f64> {
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let da = a.fer - level;
        let db = b.fer - level;
        if da == 0.0 {
            return Some(a.param);
        }
        if da * db < 0.0 {
            let t = da / (a.fer - b.fer);
            return Some(a.param + t * (b.param - a.param));
        }
    }
    rows.last().filter(|r| r.fer == level).map(|r| r.param)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::code::build_code;
    use crate::ldpc::de::LdpcEnsemble;

    #[test]
    fn wilson_interval_behaves() {
        let (lo, hi) = wilson_interval(0, 100);
        assert!(lo < 1e-12);
        assert!(hi > 0.0 && hi < 0.06);
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5);
        assert!(hi - lo < 0.25);
        let (lo, hi) = wilson_interval(100, 100);
        assert!(lo > 0.94);
        assert!(hi > 1.0 - 1e-12);
    }

    #[test]
    fn fer_scan_is_deterministic_and_trial_order_free() {
        let code = build_code(LdpcEnsemble::new(3, 6).unwrap(), 120, 0).unwrap();
        let channels = [Channel::Bec { eps: 0.35 }, Channel::Bec { eps: 0.5 }];
        let a = fer_scan(&code, &channels, 40, 50, 7).unwrap();
        let b = fer_scan(&code, &channels, 40, 50, 7).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.errors, y.errors);
        }
    }

    #[test]
    fn fer_rises_with_erasure_probability() {
        let code = build_code(LdpcEnsemble::new(3, 6).unwrap(), 240, 1).unwrap();
        let channels = [
            Channel::Bec { eps: 0.2 },
            Channel::Bec { eps: 0.43 },
            Channel::Bec { eps: 0.6 },
        ];
        let table = fer_scan(&code, &channels, 60, 100, 11).unwrap();
        assert!(table.rows[0].fer < 0.2);
        assert!(table.rows[2].fer > 0.9);
        assert!(table.rows[0].fer <= table.rows[2].fer);
    }

    #[test]
    fn midpoint_interpolates_between_straddling_rows() {
        let rows = vec![
            FerPoint { param: 0.1, trials: 10, errors: 1, fer: 0.1, wilson_lo: 0.0, wilson_hi: 0.3 },
            FerPoint { param: 0.2, trials: 10, errors: 3, fer: 0.3, wilson_lo: 0.1, wilson_hi: 0.6 },
            FerPoint { param: 0.3, trials: 10, errors: 7, fer: 0.7, wilson_lo: 0.4, wilson_hi: 0.9 },
        ];
        let mid = crossing_param(&rows, 0.5).unwrap();
        assert!((mid - 0.25).abs() < 1e-12);
        let none = crossing_param(&rows[..2], 0.5);
        assert!(none.is_none());
    }

    #[test]
    fn scan_validates_inputs() {
        let code = build_code(LdpcEnsemble::new(3, 6).unwrap(), 60, 2).unwrap();
        assert!(fer_scan(&code, &[], 10, 10, 0).is_err());
        assert!(fer_scan(&code, &[Channel::Bec { eps: 0.1 }], 0, 10, 0).is_err());
        let mixed = [Channel::Bec { eps: 0.1 }, Channel::Bsc { eps: 0.1 }];
        assert!(fer_scan(&code, &mixed, 10, 10, 0).is_err());
    }
}
