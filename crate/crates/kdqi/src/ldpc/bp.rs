//! Message-passing decoders: peeling on the erasure channel, log-domain
//! sum-product on the binary symmetric and AWGN channels. All simulations
//! transmit the all-zero codeword.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldpc::code::LdpcCode;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Channel {
    /// Binary erasure channel with erasure probability `eps`.
    Bec { eps: f64 },
    /// Binary symmetric channel with crossover probability `eps`.
    Bsc { eps: f64 },
    /// BPSK over AWGN at `ebn0_db` dB of Eb/N0.
    Awgn { ebn0_db: f64 },
}

impl Channel {
    pub fn validate(&self) -> Result<()> {
        match self {
            Channel::Bec { eps } if !(0.0..=1.0).contains(eps) => Err(Error::Argument(
                format!("erasure probability {eps} outside [0, 1]"),
            )),
            Channel::Bsc { eps } if !(*eps > 0.0 && *eps < 0.5) => Err(Error::Argument(
                format!("crossover probability {eps} outside (0, 0.5)"),
            )),
            _ => Ok(()),
        }
    }

    /// Scan parameter: erasure or crossover probability, or Eb/N0 in dB.
    pub fn param(&self) -> f64 {
        match self {
            Channel::Bec { eps } | Channel::Bsc { eps } => *eps,
            Channel::Awgn { ebn0_db } => *ebn0_db,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Channel::Bec { .. } => "bec",
            Channel::Bsc { .. } => "bsc",
            Channel::Awgn { .. } => "awgn",
        }
    }

    /// Noise variance per dimension for BPSK at the given code rate.
    pub fn awgn_sigma_sq(ebn0_db: f64, rate: f64) -> f64 {
        1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))
    }
}

/// Channel observations for the all-zero codeword.
#[derive(Debug, Clone)]
pub enum Received {
    /// `None` marks an erasure.
    Erasures(Vec<Option<bool>>),
    /// Hard bits.
    Bits(Vec<bool>),
    /// BPSK soft values; bit zero transmits `+1`.
    Soft(Vec<f64>),
}

/// Transmit the all-zero codeword over a channel.
pub fn transmit<R: Rng>(channel: Channel, n: usize, rate: f64, rng: &mut R) -> Result<Received> {
    channel.validate()?;
    Ok(match channel {
        Channel::Bec { eps } => Received::Erasures(
            (0..n)
                .map(|_| if rng.gen::<f64>() < eps { None } else { Some(false) })
                .collect(),
        ),
        Channel::Bsc { eps } => {
            Received::Bits((0..n).map(|_| rng.gen::<f64>() < eps).collect())
        }
        Channel::Awgn { ebn0_db } => {
            let sigma = Channel::awgn_sigma_sq(ebn0_db, rate).sqrt();
            let normal = Normal::new(1.0, sigma)
                .map_err(|e| Error::Argument(format!("bad AWGN parameters: {e}")))?;
            Received::Soft((0..n).map(|_| normal.sample(rng)).collect())
        }
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecodeOutcome {
    /// Syndrome clean (and, on the erasure channel, everything resolved).
    pub success: bool,
    pub iterations: usize,
    pub decoded: Vec<bool>,
}

/// Cap on message magnitudes in the log domain.
const LLR_CLAMP: f64 = 30.0;

/// Decode one received word. The observation variant must match the channel.
pub fn bp_decode(
    code: &LdpcCode,
    channel: Channel,
    received: &Received,
    max_iters: usize,
) -> Result<DecodeOutcome> {
    match (channel, received) {
        (Channel::Bec { .. }, Received::Erasures(obs)) => peel(code, obs, max_iters),
        (Channel::Bsc { eps }, Received::Bits(obs)) => {
            let base = ((1.0 - eps) / eps).ln();
            let llr: Vec<f64> = obs.iter().map(|&y| if y { -base } else { base }).collect();
            sum_product(code, &llr, max_iters)
        }
        (Channel::Awgn { ebn0_db }, Received::Soft(obs)) => {
            let sigma_sq = Channel::awgn_sigma_sq(ebn0_db, code.rate());
            let llr: Vec<f64> = obs.iter().map(|&y| 2.0 * y / sigma_sq).collect();
            sum_product(code, &llr, max_iters)
        }
        _ => Err(Error::Argument(
            "received-word variant does not match the channel".into(),
        )),
    }
}

fn peel(code: &LdpcCode, obs: &[Option<bool>], max_iters: usize) -> Result<DecodeOutcome> {
    if obs.len() != code.n {
        return Err(Error::DomainMismatch(format!(
            "received word length {} for block length {}",
            obs.len(),
            code.n
        )));
    }
    let mut known: Vec<Option<bool>> = obs.to_vec();
    let mut iterations = 0;
    loop {
        let mut progressed = false;
        for c in 0..code.m {
            let mut unknown_edge: Option<usize> = None;
            let mut parity = false;
            let mut unknowns = 0;
            for &e in code.chk_edges(c) {
                let v = code.edge_endpoints(e as usize).0;
                match known[v] {
                    Some(b) => parity ^= b,
                    None => {
                        unknowns += 1;
                        unknown_edge = Some(v);
                    }
                }
            }
            if unknowns == 1 {
                known[unknown_edge.unwrap()] = Some(parity);
                progressed = true;
            }
        }
        if progressed {
            iterations += 1;
        }
        if !progressed || iterations >= max_iters {
            break;
        }
    }
    let resolved = known.iter().all(|k| k.is_some());
    let decoded: Vec<bool> = known.iter().map(|k| k.unwrap_or(true)).collect();
    let success = resolved && code.syndrome_ok(&decoded);
    Ok(DecodeOutcome { success, iterations, decoded })
}

fn sum_product(code: &LdpcCode, llr0: &[f64], max_iters: usize) -> Result<DecodeOutcome> {
    if llr0.len() != code.n {
        return Err(Error::DomainMismatch(format!(
            "received word length {} for block length {}",
            llr0.len(),
            code.n
        )));
    }
    let edges = code.edge_count();
    // variable-to-check messages, indexed by edge
    let mut v2c: Vec<f64> = (0..edges)
        .map(|e| llr0[code.edge_endpoints(e).0])
        .collect();
    let mut c2v = vec![0.0f64; edges];
    let mut decoded = vec![false; code.n];
    for iter in 1..=max_iters {
        // check update: tanh rule with stable forward-backward products
        for c in 0..code.m {
            let es = code.chk_edges(c);
            let t: Vec<f64> = es
                .iter()
                .map(|&e| {
                    let x = (v2c[e as usize] / 2.0).tanh();
                    x.clamp(-(1.0 - 1e-15), 1.0 - 1e-15)
                })
                .collect();
            let k = es.len();
            let mut fwd = vec![1.0f64; k + 1];
            let mut bwd = vec![1.0f64; k + 1];
            for i in 0..k {
                fwd[i + 1] = fwd[i] * t[i];
            }
            for i in (0..k).rev() {
                bwd[i] = bwd[i + 1] * t[i];
            }
            for (i, &e) in es.iter().enumerate() {
                let excl = fwd[i] * bwd[i + 1];
                c2v[e as usize] =
                    (2.0 * excl.atanh()).clamp(-LLR_CLAMP, LLR_CLAMP);
            }
        }
        // variable update and posterior decision
        for v in 0..code.n {
            let es = code.var_edges(v);
            let total: f64 = es.iter().map(|&e| c2v[e as usize]).sum();
            let posterior = llr0[v] + total;
            decoded[v] = posterior < 0.0;
            for &e in es {
                v2c[e as usize] =
                    (llr0[v] + total - c2v[e as usize]).clamp(-LLR_CLAMP, LLR_CLAMP);
            }
        }
        if code.syndrome_ok(&decoded) {
            return Ok(DecodeOutcome { success: true, iterations: iter, decoded });
        }
    }
    Ok(DecodeOutcome { success: false, iterations: max_iters, decoded })
}
