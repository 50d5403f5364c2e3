//! Index domains, shaped states, discrete transforms, and head-set selection.
//!
//! # Overview
//!
//! Everything downstream works on a [`Spectrum`]: a complex amplitude vector
//! over an [`IndexDomain`], either the Boolean cube `{0,1}^n` or a p-adic
//! digit lattice of size `p^m` (p an odd prime). States are built by applying
//! a shaping polynomial to an objective table, normalized on construction, and
//! pushed through the matching Fourier layer: the Walsh-Hadamard transform on
//! Boolean domains, a digitwise p-ary DFT on p-adic ones.
//!
//! Transforms are pure functions returning fresh spectra; output is identical
//! regardless of thread count.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Largest domain size accepted by the default constructors.
pub const DEFAULT_DOMAIN_CAP: usize = 1 << 22;

/// Domain size below which transforms stay single-threaded.
const PAR_MIN: usize = 1 << 16;

/// Compensated (Neumaier) summation; keeps norm checks honest on large domains.
pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn is_odd_prime(p: u32) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut k = 3u32;
    while (k as u64) * (k as u64) <= p as u64 {
        if p % k == 0 {
            return false;
        }
        k += 2;
    }
    true
}

/// Measurement-index domain: Boolean cube or p-adic digit lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexDomain {
    /// `{0,1}^n`, indices `0..2^n`.
    Boolean { qubits: usize },
    /// `F_p^m` digit lattice, indices `0..p^m`, little-endian digits.
    PAdic { p: u32, digits: usize },
}

impl IndexDomain {
    /// Boolean cube on `qubits` qubits, capped at the default domain size.
    pub fn boolean(qubits: usize) -> Result<Self> {
        Self::boolean_with_cap(qubits, DEFAULT_DOMAIN_CAP)
    }

    pub fn boolean_with_cap(qubits: usize, cap: usize) -> Result<Self> {
        if qubits == 0 {
            return Err(Error::Argument("boolean domain needs at least 1 qubit".into()));
        }
        if qubits >= usize::BITS as usize || (1usize << qubits) > cap {
            return Err(Error::Argument(format!(
                "boolean domain 2^{qubits} exceeds cap {cap}"
            )));
        }
        Ok(IndexDomain::Boolean { qubits })
    }

    /// p-adic lattice `F_p^m` for odd prime `p`, capped at the default size.
    pub fn p_adic(p: u32, digits: usize) -> Result<Self> {
        Self::p_adic_with_cap(p, digits, DEFAULT_DOMAIN_CAP)
    }

    pub fn p_adic_with_cap(p: u32, digits: usize, cap: usize) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::Argument(format!("p = {p} is not an odd prime")));
        }
        if digits == 0 {
            return Err(Error::Argument("p-adic domain needs at least 1 digit".into()));
        }
        let mut size = 1usize;
        for _ in 0..digits {
            size = size
                .checked_mul(p as usize)
                .filter(|&s| s <= cap)
                .ok_or_else(|| Error::Argument(format!("p-adic domain {p}^{digits} exceeds cap {cap}")))?;
        }
        Ok(IndexDomain::PAdic { p, digits })
    }

    /// Total number of indices.
    pub fn size(&self) -> usize {
        match *self {
            IndexDomain::Boolean { qubits } => 1usize << qubits,
            IndexDomain::PAdic { p, digits } => (p as usize).pow(digits as u32),
        }
    }

    /// Digits per index: qubit count or p-adic digit count.
    pub fn digits(&self) -> usize {
        match *self {
            IndexDomain::Boolean { qubits } => qubits,
            IndexDomain::PAdic { digits, .. } => digits,
        }
    }

    /// Per-digit alphabet size: 2 or p.
    pub fn base(&self) -> usize {
        match *self {
            IndexDomain::Boolean { .. } => 2,
            IndexDomain::PAdic { p, .. } => p as usize,
        }
    }

    /// Number of nonzero digits of `index` (Hamming weight in the index basis).
    pub fn digit_weight(&self, index: usize) -> u32 {
        match *self {
            IndexDomain::Boolean { .. } => index.count_ones(),
            IndexDomain::PAdic { p, .. } => {
                let mut x = index;
                let mut w = 0;
                while x > 0 {
                    if x % p as usize != 0 {
                        w += 1;
                    }
                    x /= p as usize;
                }
                w
            }
        }
    }
}

/// Real-coefficient shaping polynomial applied pointwise to an objective table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapingPolynomial {
    coeffs: Vec<f64>,
}

impl ShapingPolynomial {
    /// Coefficients low degree first; at least one must be present and finite.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Argument("shaping polynomial needs coefficients".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Argument("shaping coefficients must be finite".into()));
        }
        Ok(ShapingPolynomial { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }
}

/// Normalized amplitude vector over an index domain.
///
/// The L2 norm the amplitudes had *before* normalization is retained; the
/// coherence penalty in the effective head bound is quoted against it.
#[derive(Debug, Clone)]
pub struct Spectrum {
    domain: IndexDomain,
    amps: Vec<Complex64>,
    norm_before: f64,
}

impl Spectrum {
    /// Normalize `amps` and wrap them. Errors if the norm is zero or not finite.
    pub fn normalized(domain: IndexDomain, mut amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != domain.size() {
            return Err(Error::DomainMismatch(format!(
                "amplitude vector has length {}, domain needs {}",
                amps.len(),
                domain.size()
            )));
        }
        let norm_sq = kahan_sum(amps.iter().map(|a| a.norm_sqr()));
        if !norm_sq.is_finite() {
            return Err(Error::Normalization("non-finite amplitude norm".into()));
        }
        if norm_sq <= 0.0 {
            return Err(Error::Normalization("all-zero amplitude vector".into()));
        }
        let norm = norm_sq.sqrt();
        let inv = 1.0 / norm;
        for a in &mut amps {
            *a *= inv;
        }
        Ok(Spectrum { domain, amps, norm_before: norm })
    }

    /// Wrap amplitudes that are already normalized, preserving a previously
    /// recorded pre-normalization norm. Transforms use this to carry the norm.
    pub(crate) fn carrying_norm(domain: IndexDomain, amps: Vec<Complex64>, norm_before: f64) -> Self {
        Spectrum { domain, amps, norm_before }
    }

    pub fn domain(&self) -> IndexDomain {
        self.domain
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// L2 norm of the amplitudes before normalization.
    pub fn norm_before(&self) -> f64 {
        self.norm_before
    }

    /// `|amps[s]|^2`.
    pub fn probability(&self, s: usize) -> f64 {
        self.amps[s].norm_sqr()
    }

    /// True when the squared norm is within `tol` of one.
    pub fn is_normalized(&self, tol: f64) -> bool {
        (kahan_sum(self.amps.iter().map(|a| a.norm_sqr())) - 1.0).abs() <= tol
    }
}

/// Build the shaped state `g(x) = P(f(x))`, normalized.
///
/// `objective` is the value table of `f` over the whole domain.
pub fn build_shaped_state(
    domain: IndexDomain,
    objective: &[f64],
    shaping: &ShapingPolynomial,
) -> Result<Spectrum> {
    if objective.len() != domain.size() {
        return Err(Error::DomainMismatch(format!(
            "objective table has length {}, domain needs {}",
            objective.len(),
            domain.size()
        )));
    }
    if objective.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("objective values must be finite".into()));
    }
    let amps: Vec<Complex64> = objective
        .iter()
        .map(|&v| Complex64::new(shaping.eval(v), 0.0))
        .collect();
    Spectrum::normalized(domain, amps)
}

/// Build a unit-modulus phase state `g_x = e^{2 pi i k_x / modulus}` from
/// integer phase numerators; `None` entries get zero amplitude.
///
/// Equal residues map to bit-identical complex values, so later integer
/// phase cancellations are exact rather than float-approximate.
pub fn phase_state(
    domain: IndexDomain,
    numerators: &[Option<i64>],
    modulus: u32,
) -> Result<Spectrum> {
    if numerators.len() != domain.size() {
        return Err(Error::DomainMismatch(format!(
            "phase table has length {}, domain needs {}",
            numerators.len(),
            domain.size()
        )));
    }
    if modulus == 0 {
        return Err(Error::Argument("phase modulus must be positive".into()));
    }
    let table = phase_table(modulus);
    let amps: Vec<Complex64> = numerators
        .iter()
        .map(|n| match n {
            Some(k) => table[k.rem_euclid(modulus as i64) as usize],
            None => Complex64::new(0.0, 0.0),
        })
        .collect();
    Spectrum::normalized(domain, amps)
}

/// `e^{2 pi i k / modulus}` for `k = 0..modulus`.
pub(crate) fn phase_table(modulus: u32) -> Vec<Complex64> {
    (0..modulus)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / modulus as f64))
        .collect()
}

/// Walsh-Hadamard transform, `alpha_u = 2^{-n/2} sum_x (-1)^{u.x} amps_x`.
/// Self-inverse and unitary.
pub fn walsh_hadamard(s: &Spectrum) -> Result<Spectrum> {
    let IndexDomain::Boolean { qubits } = s.domain() else {
        return Err(Error::DomainMismatch("walsh_hadamard needs a Boolean domain".into()));
    };
    let n = s.len();
    let mut a = s.amps().to_vec();
    let mut half = 1usize;
    while half < n {
        let block = half * 2;
        let butterfly = |chunk: &mut [Complex64]| {
            for i in 0..half {
                let x = chunk[i];
                let y = chunk[i + half];
                chunk[i] = x + y;
                chunk[i + half] = x - y;
            }
        };
        if n >= PAR_MIN && n / block >= 2 {
            a.par_chunks_mut(block).for_each(butterfly);
        } else {
            a.chunks_mut(block).for_each(butterfly);
        }
        half = block;
    }
    let scale = 2.0f64.powi(-((qubits as i32) / 2)) * if qubits % 2 == 1 { 0.5f64.sqrt() } else { 1.0 };
    for v in &mut a {
        *v *= scale;
    }
    Ok(Spectrum::carrying_norm(s.domain(), a, s.norm_before()))
}

/// p-ary DFT applied digit by digit (mixed radix, direct per-digit transform).
///
/// Forward: `alpha_m = p^{-m_digits/2} sum_x e^{-2 pi i <m,x> / p} amps_x`
/// with the digitwise inner product `<m,x> = sum_t m_t x_t mod p`.
pub fn dft_p(s: &Spectrum, inverse: bool) -> Result<Spectrum> {
    let IndexDomain::PAdic { p, digits } = s.domain() else {
        return Err(Error::DomainMismatch("dft_p needs a p-adic domain".into()));
    };
    let p = p as usize;
    let n = s.len();
    let mut a = s.amps().to_vec();
    let mut scratch = vec![Complex64::new(0.0, 0.0); p];

    // Twiddle row j holds e^{(+/-) 2 pi i j k / p} for k = 0..p.
    let sign = if inverse { 1.0 } else { -1.0 };
    let twiddle: Vec<Vec<Complex64>> = (0..p)
        .map(|j| {
            (0..p)
                .map(|k| Complex64::from_polar(1.0, sign * TAU * ((j * k) % p) as f64 / p as f64))
                .collect()
        })
        .collect();
    let scale = 1.0 / (p as f64).sqrt();

    let mut stride = 1usize;
    for _ in 0..digits {
        let group = stride * p;
        for base in 0..n / group {
            for offset in 0..stride {
                let start = base * group + offset;
                for (j, slot) in scratch.iter_mut().enumerate() {
                    let row = &twiddle[j];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..p {
                        acc += row[k] * a[start + k * stride];
                    }
                    *slot = acc * scale;
                }
                for (j, v) in scratch.iter().enumerate() {
                    a[start + j * stride] = *v;
                }
            }
        }
        stride = group;
    }
    Ok(Spectrum::carrying_norm(s.domain(), a, s.norm_before()))
}

/// Fourier layer matching the domain: WHT on Boolean, forward p-ary DFT on p-adic.
pub fn fourier(s: &Spectrum) -> Result<Spectrum> {
    match s.domain() {
        IndexDomain::Boolean { .. } => walsh_hadamard(s),
        IndexDomain::PAdic { .. } => dft_p(s, false),
    }
}

/// Inverse of [`fourier`].
pub fn fourier_inverse(s: &Spectrum) -> Result<Spectrum> {
    match s.domain() {
        IndexDomain::Boolean { .. } => walsh_hadamard(s),
        IndexDomain::PAdic { .. } => dft_p(s, true),
    }
}

/// Indices of the `d` largest squared magnitudes, stored in ascending index
/// order. Ties break toward the lower index, so selection is deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadSet {
    indices: Vec<usize>,
}

impl HeadSet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn d(&self) -> usize {
        self.indices.len()
    }

    pub fn contains(&self, s: usize) -> bool {
        self.indices.binary_search(&s).is_ok()
    }

    /// Unweighted head mass `sum_{s in head} |amps_s|^2`.
    pub fn mass(&self, s: &Spectrum) -> f64 {
        kahan_sum(self.indices.iter().map(|&i| s.probability(i)))
    }

    /// Build directly from indices (sorted, deduplicated). Test support and
    /// reference-head construction.
    pub fn from_indices(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            return Err(Error::Argument("head set must be nonempty".into()));
        }
        Ok(HeadSet { indices })
    }
}

/// Select the head set `S_d`: the `d` indices with largest `|amps|^2`.
pub fn head_set(s: &Spectrum, d: usize) -> Result<HeadSet> {
    let n = s.len();
    if d == 0 || d > n {
        return Err(Error::Argument(format!("head size {d} out of range 1..={n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&i, &j| {
        s.probability(j)
            .total_cmp(&s.probability(i))
            .then_with(|| i.cmp(&j))
    });
    order.truncate(d);
    order.sort_unstable();
    Ok(HeadSet { indices: order })
}
