//! Programmable interference kernels and their circuit-level synthesis.
//!
//! # Overview
//!
//! A kernel is the unitary inserted between state shaping and the Fourier
//! layer. Supported families:
//!
//! * [`KernelSpec::Identity`]: the bare interferometer.
//! * [`KernelSpec::Chirp`]: diagonal quadratic phase. On Boolean domains the
//!   phase is `rate * q(x)` radians; on p-adic domains it is
//!   `2 pi * rate * (q(x) mod p) / p`, evaluated through an exact residue
//!   table whenever `rate` is an integer so tuned cancellations are exact.
//! * [`KernelSpec::BlockChirp`]: quadratic phase with couplings between
//!   different `bits`-wide blocks of the binary index dropped; the
//!   block-local circuit counterpart of a global chirp.
//! * [`KernelSpec::Lct`]: linear canonical transform assembled as
//!   `D_outer . F . D_mid . F^{-1} . D_inner` from three quadratic phases.
//! * [`KernelSpec::BlockLocal`]: dense per-block unitaries on disjoint digit
//!   blocks, validated unitary at construction.
//!
//! [`synthesize_chirp`] expands a Boolean chirp `diag(e^{i theta j^2})` into
//! single-qubit and controlled phase rotations using the binary expansion
//! `j^2 = sum_r 2^{2r} j_r + 2 sum_{r<s} 2^{r+s} j_r j_s`, scheduling the
//! pair rotations by round-robin edge coloring so depth grows linearly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::spectral::{self, fourier, fourier_inverse, IndexDomain, Spectrum};

/// Integer quadratic phase `q(x) = c2 x^2 + c1 x + c0` with a real rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticPhase {
    /// Coefficients `[c0, c1, c2]`.
    pub coeffs: [i64; 3],
    /// Phase rate multiplying `q(x)`.
    pub rate: f64,
}

impl QuadraticPhase {
    pub fn new(coeffs: [i64; 3], rate: f64) -> Self {
        QuadraticPhase { coeffs, rate }
    }

    /// Pure quadratic `rate * x^2`.
    pub fn square(rate: f64) -> Self {
        QuadraticPhase { coeffs: [0, 0, 1], rate }
    }

    pub fn is_zero(&self) -> bool {
        self.rate == 0.0 || self.coeffs == [0, 0, 0]
    }

    fn q(&self, x: usize) -> i128 {
        let x = x as i128;
        self.coeffs[2] as i128 * x * x + self.coeffs[1] as i128 * x + self.coeffs[0] as i128
    }
}

/// Which interference kernel to apply, with its parameters. Serializes to
/// JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelSpec {
    Identity,
    Chirp(QuadraticPhase),
    /// Quadratic chirp truncated to `bits`-wide blocks of the binary index:
    /// cross-block couplings of `x^2` are dropped, so the phase is
    /// `sum_j v_j^2` where `v_j` is block `j` of `x` kept in place.
    BlockChirp { bits: usize, rate: f64 },
    Lct {
        outer: QuadraticPhase,
        mid: QuadraticPhase,
        inner: QuadraticPhase,
    },
    /// Dense unitaries on disjoint blocks of `width` digits each.
    BlockLocal {
        width: usize,
        blocks: Vec<Vec<Complex64>>,
    },
}

/// Tolerance for the unitarity check on dense kernel blocks.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Default cap on block width for dense block-local kernels, in digits.
pub const DEFAULT_BLOCK_WIDTH_CAP: usize = 4;

impl KernelSpec {
    pub fn chirp(coeffs: [i64; 3], rate: f64) -> Self {
        KernelSpec::Chirp(QuadraticPhase::new(coeffs, rate))
    }

    /// Validate and wrap dense per-block unitaries (row-major, all square of
    /// the same dimension).
    pub fn block_local(width: usize, blocks: Vec<Vec<Complex64>>) -> Result<Self> {
        if width == 0 || width > DEFAULT_BLOCK_WIDTH_CAP {
            return Err(Error::Argument(format!(
                "block width {width} out of range 1..={DEFAULT_BLOCK_WIDTH_CAP}"
            )));
        }
        if blocks.is_empty() {
            return Err(Error::Argument("block-local kernel needs at least one block".into()));
        }
        for (i, b) in blocks.iter().enumerate() {
            let dim = (b.len() as f64).sqrt().round() as usize;
            if dim * dim != b.len() || dim == 0 {
                return Err(Error::Argument(format!("block {i} is not square")));
            }
            let dev = unitarity_deviation(b, dim);
            if dev > UNITARITY_TOL {
                return Err(Error::Unitarity(format!(
                    "block {i} deviates from unitarity by {dev:.3e}"
                )));
            }
        }
        Ok(KernelSpec::BlockLocal { width, blocks })
    }
}

/// Max-abs deviation of `m^H m` from the identity; `m` is row-major `dim x dim`.
fn unitarity_deviation(m: &[Complex64], dim: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += m[k * dim + i].conj() * m[k * dim + j];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Diagonal phase factor of a quadratic phase map at index `x`.
fn phase_factor(
    phase: &QuadraticPhase,
    domain: IndexDomain,
    table: Option<&[Complex64]>,
    x: usize,
) -> Complex64 {
    match domain {
        IndexDomain::Boolean { .. } => {
            let q = phase.q(x) as f64;
            Complex64::from_polar(1.0, phase.rate * q)
        }
        IndexDomain::PAdic { p, .. } => {
            let qm = phase.q(x).rem_euclid(p as i128) as i64;
            if let Some(t) = table {
                // integer rate: exact residue arithmetic
                let k = (phase.rate as i128 * qm as i128).rem_euclid(p as i128) as usize;
                t[k]
            } else {
                let frac = (phase.rate * qm as f64 / p as f64).rem_euclid(1.0);
                Complex64::from_polar(1.0, TAU * frac)
            }
        }
    }
}

fn residue_table(phase: &QuadraticPhase, domain: IndexDomain) -> Option<Vec<Complex64>> {
    match domain {
        IndexDomain::PAdic { p, .. }
            if phase.rate.fract() == 0.0 && phase.rate.abs() < 2f64.powi(52) =>
        {
            Some(spectral::phase_table(p))
        }
        _ => None,
    }
}

fn apply_quadratic(phase: &QuadraticPhase, s: &Spectrum) -> Spectrum {
    let domain = s.domain();
    let table = residue_table(phase, domain);
    let amps: Vec<Complex64> = s
        .amps()
        .iter()
        .enumerate()
        .map(|(x, a)| a * phase_factor(phase, domain, table.as_deref(), x))
        .collect();
    Spectrum::carrying_norm(domain, amps, s.norm_before())
}

/// Block-truncated square: `sum_j v_j^2` over `bits`-wide binary blocks of `x`.
fn block_square(x: usize, bits: usize) -> i128 {
    let mask = if bits >= usize::BITS as usize {
        usize::MAX
    } else {
        (1usize << bits) - 1
    };
    let mut acc: i128 = 0;
    let mut shift = 0usize;
    while (x >> shift) != 0 {
        let v = ((x >> shift) & mask) << shift;
        acc += (v as i128) * (v as i128);
        shift += bits;
    }
    acc
}

fn apply_block_chirp(bits: usize, rate: f64, s: &Spectrum) -> Result<Spectrum> {
    if bits == 0 {
        return Err(Error::Argument("block chirp width must be positive".into()));
    }
    let domain = s.domain();
    let amps: Vec<Complex64> = match domain {
        IndexDomain::Boolean { .. } => s
            .amps()
            .iter()
            .enumerate()
            .map(|(x, a)| a * Complex64::from_polar(1.0, rate * block_square(x, bits) as f64))
            .collect(),
        IndexDomain::PAdic { p, .. } => {
            let table = if rate.fract() == 0.0 && rate.abs() < 2f64.powi(52) {
                Some(spectral::phase_table(p))
            } else {
                None
            };
            s.amps()
                .iter()
                .enumerate()
                .map(|(x, a)| {
                    let qm = block_square(x, bits).rem_euclid(p as i128) as i64;
                    let ph = if let Some(t) = &table {
                        t[(rate as i128 * qm as i128).rem_euclid(p as i128) as usize]
                    } else {
                        let frac = (rate * qm as f64 / p as f64).rem_euclid(1.0);
                        Complex64::from_polar(1.0, TAU * frac)
                    };
                    a * ph
                })
                .collect()
        }
    };
    Ok(Spectrum::carrying_norm(domain, amps, s.norm_before()))
}

fn apply_block_local(width: usize, blocks: &[Vec<Complex64>], s: &Spectrum) -> Result<Spectrum> {
    let domain = s.domain();
    let digits = domain.digits();
    let base = domain.base();
    if digits % width != 0 || blocks.len() != digits / width {
        return Err(Error::DomainMismatch(format!(
            "{} blocks of width {width} cannot tile {digits} digits",
            blocks.len()
        )));
    }
    let dim = base.pow(width as u32);
    for (i, b) in blocks.iter().enumerate() {
        if b.len() != dim * dim {
            return Err(Error::DomainMismatch(format!(
                "block {i} has dimension {}, domain block needs {dim}",
                (b.len() as f64).sqrt()
            )));
        }
    }
    let n = s.len();
    let mut a = s.amps().to_vec();
    let mut gathered = vec![Complex64::new(0.0, 0.0); dim];
    let mut stride = 1usize;
    for block in blocks {
        let group = stride * dim;
        for basei in 0..n / group {
            for offset in 0..stride {
                let start = basei * group + offset;
                for (k, g) in gathered.iter_mut().enumerate() {
                    *g = a[start + k * stride];
                }
                for r in 0..dim {
                    let row = &block[r * dim..(r + 1) * dim];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (k, g) in gathered.iter().enumerate() {
                        acc += row[k] * g;
                    }
                    a[start + r * stride] = acc;
                }
            }
        }
        stride = group;
    }
    Ok(Spectrum::carrying_norm(domain, a, s.norm_before()))
}

/// Apply a kernel to a spectrum. Pure; the input is unchanged.
pub fn apply_kernel(kernel: &KernelSpec, s: &Spectrum) -> Result<Spectrum> {
    match kernel {
        KernelSpec::Identity => Ok(s.clone()),
        KernelSpec::Chirp(phase) => Ok(apply_quadratic(phase, s)),
        KernelSpec::BlockChirp { bits, rate } => apply_block_chirp(*bits, *rate, s),
        KernelSpec::Lct { outer, mid, inner } => {
            let t = apply_quadratic(inner, s);
            let t = fourier_inverse(&t)?;
            let t = apply_quadratic(mid, &t);
            let t = fourier(&t)?;
            Ok(apply_quadratic(outer, &t))
        }
        KernelSpec::BlockLocal { width, blocks } => apply_block_local(*width, blocks, s),
    }
}

/// Kernel followed by the domain's Fourier layer: the spectrum the detector sees.
pub fn interfere(kernel: &KernelSpec, g: &Spectrum) -> Result<Spectrum> {
    fourier(&apply_kernel(kernel, g)?)
}

/// One rotation in a synthesized chirp circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Rotation {
    /// `R_Z(angle)` on one qubit.
    Rz { qubit: usize, angle: f64 },
    /// Controlled `R_Z(angle)` on a qubit pair.
    CRz { control: usize, target: usize, angle: f64 },
}

/// Rotation-level synthesis record for a diagonal kernel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateSynthesis {
    pub rotations: Vec<Rotation>,
    pub single_qubit_rotations: usize,
    pub two_qubit_controlled_rotations: usize,
    /// Parallel depth assuming commuting diagonal rotations scheduled by
    /// edge coloring.
    pub depth_estimate: usize,
    /// Per-rotation T-count constant `c` in `c * log2(1/eps_synth)`.
    pub t_rate: f64,
}

/// Default per-rotation T-count constant.
pub const DEFAULT_T_RATE: f64 = 4.0;

impl GateSynthesis {
    /// Total T-count at synthesis tolerance `eps_synth`:
    /// `(singles + controlled) * t_rate * log2(1/eps_synth)`.
    pub fn t_count(&self, eps_synth: f64) -> f64 {
        let rotations = (self.single_qubit_rotations + self.two_qubit_controlled_rotations) as f64;
        rotations * self.t_rate * (1.0 / eps_synth).log2()
    }

    /// Rotation list as CSV rows `gate,qubits,angle`.
    pub fn rotations_csv(&self) -> String {
        let mut out = String::from("gate,qubits,angle\n");
        for r in &self.rotations {
            match r {
                Rotation::Rz { qubit, angle } => {
                    out.push_str(&format!("rz,{qubit},{angle}\n"));
                }
                Rotation::CRz { control, target, angle } => {
                    out.push_str(&format!("crz,{control}:{target},{angle}\n"));
                }
            }
        }
        out
    }
}

/// Expand `diag(e^{i theta j^2})` on `n` qubits into `n` single rotations and
/// `n(n-1)/2` controlled rotations.
pub fn synthesize_chirp(theta: f64, n: usize) -> Result<GateSynthesis> {
    if n == 0 {
        return Err(Error::Argument("chirp synthesis needs at least one qubit".into()));
    }
    let mut rotations = Vec::with_capacity(n + n * (n - 1) / 2);
    for r in 0..n {
        rotations.push(Rotation::Rz { qubit: r, angle: theta * 2f64.powi(2 * r as i32) });
    }
    for r in 0..n {
        for s in (r + 1)..n {
            rotations.push(Rotation::CRz {
                control: r,
                target: s,
                angle: 2.0 * theta * 2f64.powi((r + s) as i32),
            });
        }
    }
    // Round-robin edge coloring of the complete pair graph: n-1 layers for
    // even n, n for odd, plus one layer of single-qubit rotations.
    let pair_layers = if n == 1 {
        0
    } else if n % 2 == 0 {
        n - 1
    } else {
        n
    };
    Ok(GateSynthesis {
        single_qubit_rotations: n,
        two_qubit_controlled_rotations: n * (n - 1) / 2,
        depth_estimate: pair_layers + 1,
        t_rate: DEFAULT_T_RATE,
        rotations,
    })
}

/// Exact double-length product: returns `(hi, lo)` with `hi + lo == a * b`.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    let lo = a.mul_add(b, -hi);
    (hi, lo)
}

/// Reduce `hi + lo` modulo 2 pi with a double-double modulus. Plain f64
/// reduction loses the last ~7 digits of phase once angles reach 1e7, which
/// is routine for the top rotations of a 12-qubit chirp.
fn mod_tau(hi: f64, lo: f64) -> f64 {
    const TAU_HI: f64 = 6.283185307179586;
    const TAU_LO: f64 = 2.4492935982947064e-16;
    let k = (hi / TAU_HI).round();
    let (p_hi, p_lo) = two_prod(k, TAU_HI);
    // hi and p_hi agree to within one period, so their difference is exact
    ((hi - p_hi) + (lo - p_lo)) - k * TAU_LO
}

/// Check that the rotation list of [`synthesize_chirp`] reproduces the dense
/// diagonal `diag(e^{i theta j^2})` within 1e-9. Dense check, so `n <= 12`.
pub fn synthesized_matches_diagonal(theta: f64, n: usize) -> Result<bool> {
    if n == 0 || n > 12 {
        return Err(Error::Argument(format!("dense chirp check needs 1 <= n <= 12, got {n}")));
    }
    let synth = synthesize_chirp(theta, n)?;
    let size = 1usize << n;
    for j in 0..size {
        let mut angle = 0.0f64;
        for r in &synth.rotations {
            match *r {
                Rotation::Rz { qubit, angle: a } => {
                    if (j >> qubit) & 1 == 1 {
                        angle += mod_tau(a, 0.0);
                    }
                }
                Rotation::CRz { control, target, angle: a } => {
                    if (j >> control) & 1 == 1 && (j >> target) & 1 == 1 {
                        angle += mod_tau(a, 0.0);
                    }
                }
            }
        }
        let built = Complex64::from_polar(1.0, angle);
        let (w_hi, w_lo) = two_prod(theta, (j * j) as f64);
        let want = Complex64::from_polar(1.0, mod_tau(w_hi, w_lo));
        if (built - want).norm() > 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Depth and rotation-count model for a linear canonical transform kernel:
/// two Fourier layers plus three chirp layers. `block_width = None` means a
/// global chirp (depth term `n^2`); `Some(b)` a block-local one (`n*b`).
pub fn lct_cost(n: usize, truncated_qft: bool, block_width: Option<usize>) -> GateSynthesis {
    let fourier_depth = if truncated_qft { n } else { n * n };
    let (chirp_depth, chirp_pairs) = match block_width {
        None => (n * n, n * (n - 1) / 2),
        Some(b) => {
            let b = b.min(n.max(1));
            (n * b, n * b.saturating_sub(1) / 2 + n / 2)
        }
    };
    GateSynthesis {
        rotations: Vec::new(),
        single_qubit_rotations: 3 * n,
        two_qubit_controlled_rotations: 3 * chirp_pairs,
        depth_estimate: 2 * fourier_depth + 3 * chirp_depth,
        t_rate: DEFAULT_T_RATE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{dft_p, phase_state, Spectrum};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_spectrum(domain: IndexDomain, seed: u64) -> Spectrum {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps: Vec<Complex64> = (0..domain.size())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Spectrum::normalized(domain, amps).unwrap()
    }

    fn opi_state(p: u32, h: [i64; 3]) -> Spectrum {
        let domain = IndexDomain::p_adic(p, 1).unwrap();
        let nums: Vec<Option<i64>> = (0..p as i64)
            .map(|x| Some(h[2] * x * x + h[1] * x + h[0]))
            .collect();
        phase_state(domain, &nums, p).unwrap()
    }

    #[test]
    fn identity_kernel_is_noop() {
        let domain = IndexDomain::boolean(4).unwrap();
        let s = random_spectrum(domain, 1);
        let t = apply_kernel(&KernelSpec::Identity, &s).unwrap();
        assert_eq!(s.amps(), t.amps());
    }

    #[test]
    fn tuned_chirp_cancels_quadratic_phase() {
        // g_x ~ e^{2 pi i (3x^2+2x+5)/7}; chirp at rate -3 then DFT -> mode 2
        let s = opi_state(7, [5, 2, 3]);
        let k = KernelSpec::chirp([0, 0, 1], -3.0);
        let t = dft_p(&apply_kernel(&k, &s).unwrap(), false).unwrap();
        assert!((t.probability(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chirp_rates_compose_additively() {
        let domain = IndexDomain::p_adic(11, 1).unwrap();
        let s = random_spectrum(domain, 3);
        let a = apply_kernel(&KernelSpec::chirp([0, 0, 1], 4.0), &s).unwrap();
        let ab = apply_kernel(&KernelSpec::chirp([0, 0, 1], 3.0), &a).unwrap();
        let direct = apply_kernel(&KernelSpec::chirp([0, 0, 1], 7.0), &s).unwrap();
        for (x, y) in ab.amps().iter().zip(direct.amps()) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn lct_with_zero_mid_and_inner_is_outer_phase() {
        let domain = IndexDomain::p_adic(7, 1).unwrap();
        let s = random_spectrum(domain, 5);
        let outer = QuadraticPhase::new([1, 2, 3], 0.7);
        let k = KernelSpec::Lct {
            outer,
            mid: QuadraticPhase::new([0, 0, 0], 0.0),
            inner: QuadraticPhase::new([0, 0, 0], 0.0),
        };
        let via_lct = apply_kernel(&k, &s).unwrap();
        let direct = apply_kernel(&KernelSpec::Chirp(outer), &s).unwrap();
        for (x, y) in via_lct.amps().iter().zip(direct.amps()) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn block_local_requires_unitary_blocks() {
        let not_unitary = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)];
        match KernelSpec::block_local(1, vec![not_unitary]) {
            Err(Error::Unitarity(_)) => {}
            other => panic!("expected unitarity error, got {other:?}"),
        }
    }

    #[test]
    fn block_local_acts_identity_outside_its_block() {
        // Two 1-qubit blocks: X on block 0 (bit 0), identity on block 1.
        let x_gate = vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let eye = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let k = KernelSpec::block_local(1, vec![x_gate, eye]).unwrap();
        let domain = IndexDomain::boolean(2).unwrap();
        let s = Spectrum::normalized(domain, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let t = apply_kernel(&k, &s).unwrap();
        // |00> -> |01> (bit 0 flipped, bit 1 untouched)
        assert!((t.probability(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn block_local_rejects_mismatched_tiling() {
        let eye = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let k = KernelSpec::block_local(1, vec![eye]).unwrap();
        let domain = IndexDomain::boolean(2).unwrap();
        let s = random_spectrum(domain, 8);
        assert!(apply_kernel(&k, &s).is_err());
    }

    #[test]
    fn kernels_preserve_norm() {
        let booldom = IndexDomain::boolean(6).unwrap();
        let pdom = IndexDomain::p_adic(5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut hadamard = vec![c(0.5f64.sqrt(), 0.0); 4];
        hadamard[3] = c(-(0.5f64.sqrt()), 0.0);
        let kernels: Vec<(KernelSpec, IndexDomain)> = vec![
            (KernelSpec::Identity, booldom),
            (KernelSpec::chirp([0, 1, 2], 0.37), booldom),
            (KernelSpec::chirp([1, 0, 1], 2.0), pdom),
            (KernelSpec::BlockChirp { bits: 2, rate: 0.9 }, booldom),
            (
                KernelSpec::Lct {
                    outer: QuadraticPhase::square(0.3),
                    mid: QuadraticPhase::square(-0.2),
                    inner: QuadraticPhase::new([0, 1, 0], 0.1),
                },
                booldom,
            ),
            (
                KernelSpec::block_local(1, vec![hadamard; 6]).unwrap(),
                booldom,
            ),
        ];
        for (k, domain) in kernels {
            let s = random_spectrum(domain, rng.gen());
            let t = apply_kernel(&k, &s).unwrap();
            assert!(t.is_normalized(1e-10), "kernel {k:?} broke normalization");
        }
    }

    #[test]
    fn dense_kernel_matrices_are_unitary() {
        // Columns of the dense matrix must be orthonormal within 1e-10.
        let domain = IndexDomain::boolean(5).unwrap();
        let n = domain.size();
        let kernels = vec![
            KernelSpec::chirp([0, 0, 1], 0.61),
            KernelSpec::BlockChirp { bits: 2, rate: 1.3 },
            KernelSpec::Lct {
                outer: QuadraticPhase::square(0.5),
                mid: QuadraticPhase::square(0.25),
                inner: QuadraticPhase::square(-0.75),
            },
        ];
        for k in kernels {
            let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
            for s in 0..n {
                let mut amps = vec![c(0.0, 0.0); n];
                amps[s] = c(1.0, 0.0);
                let e = Spectrum::normalized(domain, amps).unwrap();
                cols.push(apply_kernel(&k, &e).unwrap().amps().to_vec());
            }
            for i in 0..n {
                for j in i..n {
                    let dot: Complex64 = cols[i]
                        .iter()
                        .zip(&cols[j])
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (dot - c(want, 0.0)).norm() < 1e-10,
                        "kernel {k:?} columns {i},{j} not orthonormal"
                    );
                }
            }
        }
    }

    #[test]
    fn block_chirp_equals_global_chirp_when_block_covers_index() {
        let domain = IndexDomain::p_adic(31, 1).unwrap();
        let s = random_spectrum(domain, 12);
        let global = apply_kernel(&KernelSpec::chirp([0, 0, 1], 3.0), &s).unwrap();
        let block = apply_kernel(&KernelSpec::BlockChirp { bits: 5, rate: 3.0 }, &s).unwrap();
        for (x, y) in global.amps().iter().zip(block.amps()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn chirp_rotation_counts() {
        for (n, singles, pairs) in [(1usize, 1usize, 0usize), (4, 4, 6), (10, 10, 45)] {
            let g = synthesize_chirp(0.31, n).unwrap();
            assert_eq!(g.single_qubit_rotations, singles);
            assert_eq!(g.two_qubit_controlled_rotations, pairs);
            assert_eq!(g.rotations.len(), singles + pairs);
        }
        for n in 1..=32usize {
            let g = synthesize_chirp(1.0, n).unwrap();
            assert_eq!(g.two_qubit_controlled_rotations, n * (n - 1) / 2);
            // depth stays linear
            assert!(g.depth_estimate <= n + 1);
        }
    }

    #[test]
    fn synthesized_chirp_reproduces_diagonal() {
        assert!(synthesized_matches_diagonal(0.0, 3).unwrap());
        assert!(synthesized_matches_diagonal(0.37, 5).unwrap());
        assert!(synthesized_matches_diagonal(std::f64::consts::PI / 3.0, 8).unwrap());
        assert!(synthesized_matches_diagonal(0.37, 13).is_err());
    }

    #[test]
    fn t_count_scales_with_rotations_and_precision() {
        let g = synthesize_chirp(0.5, 4).unwrap();
        let t = g.t_count(1e-10);
        assert!((t - 10.0 * DEFAULT_T_RATE * (1e10f64).log2()).abs() < 1e-9);
        assert!(g.t_count(1e-12) > t);
    }

    #[test]
    fn lct_cost_models() {
        let n = 16;
        let global = lct_cost(n, true, None);
        assert_eq!(global.depth_estimate, 2 * n + 3 * n * n);
        let block = lct_cost(n, true, Some(4));
        assert_eq!(block.depth_estimate, 2 * n + 3 * n * 4);
        let full_qft = lct_cost(n, false, None);
        assert!(full_qft.depth_estimate > global.depth_estimate);
    }

    #[test]
    fn kernel_spec_round_trips_through_json() {
        let k = KernelSpec::Lct {
            outer: QuadraticPhase::square(0.4),
            mid: QuadraticPhase::new([1, 2, 3], -1.5),
            inner: QuadraticPhase::square(0.0),
        };
        let text = serde_json::to_string(&k).unwrap();
        let back: KernelSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(k, back);
    }
}
