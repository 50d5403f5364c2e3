//! Mode-local noise channel and head-mass loss accounting.
//!
//! The channel acts on a measured spectrum in three stages. First every mode
//! probability is attenuated by `(1 - eta)^{q(s)} * tau(s)` where `q` is the
//! digit weight of the mode index; the removed mass reappears as a uniform
//! background, so the distribution keeps trace one. Second, a seeded banded
//! mixing pass applies pairwise probability rotations between modes at
//! offsets `1..=width`; the one-sided mass displaced by mixing is reported as
//! leakage, which upper-bounds the mass any head set can lose to mixing.
//! Third, the distribution is renormalized to absorb rounding drift.
//!
//! [`head_tail_coherence`] measures how strongly the interference operator
//! couples a head set to its complement: the operator norm of the tail-row,
//! head-column block of the kernel-then-Fourier unitary. Small domains take
//! an explicit dense block and a Jacobi eigensolver; large domains use the
//! Gram identity `B^H B = I - H^H H` (valid because the operator is unitary)
//! and power iteration, so only the head-row block is ever materialized.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{interfere, KernelSpec};
use crate::spectral::{kahan_sum, HeadSet, IndexDomain, Spectrum};

/// Domain size up to which coherence uses the dense tail block directly.
pub const DENSE_COHERENCE_MAX: usize = 1 << 12;
/// Convergence tolerance on the leading eigenvalue in power iteration.
pub const POWER_ITERATION_TOL: f64 = 1e-8;
/// Iteration cap for power iteration.
pub const POWER_ITERATION_MAX: usize = 10_000;

/// Mode-quality factor applied on top of weight-dependent attenuation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Tau {
    /// Same factor for every mode.
    Constant(f64),
    /// One factor per mode index.
    PerMode(Vec<f64>),
}

impl Tau {
    fn validate(&self) -> Result<()> {
        let check = |v: f64| -> Result<()> {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::Argument(format!("tau value {v} outside (0, 1]")))
            }
        };
        match self {
            Tau::Constant(v) => check(*v),
            Tau::PerMode(vs) => {
                if vs.is_empty() {
                    return Err(Error::Argument("per-mode tau table is empty".into()));
                }
                vs.iter().try_for_each(|v| check(*v))
            }
        }
    }

    fn value(&self, s: usize) -> f64 {
        match self {
            Tau::Constant(v) => *v,
            Tau::PerMode(vs) => vs[s],
        }
    }

    fn len_matches(&self, n: usize) -> bool {
        match self {
            Tau::Constant(_) => true,
            Tau::PerMode(vs) => vs.len() == n,
        }
    }
}

/// Weight-dependent attenuation with banded mixing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Depolarizing rate per unit digit weight, in `[0, 1]`.
    pub eta: f64,
    /// Mixing band half-width; zero disables mixing.
    pub width: usize,
    pub tau: Tau,
    /// Seed for the mixing angles.
    pub mix_seed: u64,
}

impl NoiseModel {
    pub fn new(eta: f64, width: usize, tau: Tau, mix_seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Argument(format!("eta {eta} outside [0, 1]")));
        }
        tau.validate()?;
        Ok(NoiseModel { eta, width, tau, mix_seed })
    }

    /// Attenuation only: no mixing, unit mode quality.
    pub fn depolarizing(eta: f64) -> Result<Self> {
        NoiseModel::new(eta, 0, Tau::Constant(1.0), 0)
    }

    /// Noiseless channel.
    pub fn noiseless() -> Self {
        NoiseModel { eta: 0.0, width: 0, tau: Tau::Constant(1.0), mix_seed: 0 }
    }

    /// Survival factor `(1 - eta)^{q(s)} * tau(s)` for mode `s`.
    pub fn eta_k(&self, domain: IndexDomain, s: usize) -> f64 {
        (1.0 - self.eta).powi(domain.digit_weight(s) as i32) * self.tau.value(s)
    }
}

/// Channel output: mode distribution and the mass displaced by mixing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelOutput {
    pub probs: Vec<f64>,
    /// One-sided mass displaced by the mixing pass:
    /// `sum_s max(0, p_before_mix(s) - p_after_mix(s))`.
    pub leakage: f64,
}

/// Push a normalized spectrum through the noise channel.
pub fn apply_channel(nm: &NoiseModel, s: &Spectrum) -> Result<ChannelOutput> {
    if !s.is_normalized(1e-8) {
        return Err(Error::Normalization(
            "channel input spectrum is not normalized".into(),
        ));
    }
    let n = s.len();
    if !nm.tau.len_matches(n) {
        return Err(Error::DomainMismatch(format!(
            "per-mode tau table does not cover {n} modes"
        )));
    }
    let domain = s.domain();
    let mut probs: Vec<f64> = (0..n)
        .map(|i| s.probability(i) * nm.eta_k(domain, i))
        .collect();
    let lost = 1.0 - kahan_sum(probs.iter().copied());
    let background = lost.max(0.0) / n as f64;
    for p in probs.iter_mut() {
        *p += background;
    }
    let leakage = mix_in_place(nm, &mut probs);
    let total = kahan_sum(probs.iter().copied());
    if total > 0.0 {
        for p in probs.iter_mut() {
            *p /= total;
        }
    }
    Ok(ChannelOutput { probs, leakage })
}

/// Banded mixing pass; returns the one-sided displaced mass. No-op when the
/// model's width is zero.
fn mix_in_place(nm: &NoiseModel, probs: &mut [f64]) -> f64 {
    if nm.width == 0 {
        return 0.0;
    }
    let n = probs.len();
    let before = probs.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(nm.mix_seed);
    let half = std::f64::consts::PI / nm.width.max(1) as f64;
    for offset in 1..=nm.width {
        if offset >= n {
            break;
        }
        for i in 0..n - offset {
            let theta: f64 = rng.gen_range(-half..half);
            let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
            let (pi, pj) = (probs[i], probs[i + offset]);
            probs[i] = c2 * pi + s2 * pj;
            probs[i + offset] = s2 * pi + c2 * pj;
        }
    }
    kahan_sum(
        before
            .iter()
            .zip(probs.iter())
            .map(|(b, a)| (b - a).max(0.0)),
    )
}

/// Attenuation and loss profile for one noise model, kernel, and head set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttenuationProfile {
    /// Survival factor per mode.
    pub eta_k: Vec<f64>,
    /// Mixing leakage of a reference distribution spread uniformly over the
    /// head set, measured through [`apply_channel`].
    pub delta_w: f64,
    /// Head-tail coherence of the kernel-then-Fourier operator.
    pub mu: f64,
}

/// Profile for the reference head `{0, .., d-1}`.
pub fn attenuation(
    nm: &NoiseModel,
    domain: IndexDomain,
    kernel: &KernelSpec,
    d: usize,
) -> Result<AttenuationProfile> {
    let head = HeadSet::from_indices((0..d).collect())?;
    attenuation_for_head(nm, domain, kernel, &head)
}

/// Profile for an explicit head set.
pub fn attenuation_for_head(
    nm: &NoiseModel,
    domain: IndexDomain,
    kernel: &KernelSpec,
    head: &HeadSet,
) -> Result<AttenuationProfile> {
    let n = domain.size();
    if !nm.tau.len_matches(n) {
        return Err(Error::DomainMismatch(format!(
            "per-mode tau table does not cover {n} modes"
        )));
    }
    let eta_k: Vec<f64> = (0..n).map(|s| nm.eta_k(domain, s)).collect();
    let d = head.d();
    let amp = Complex64::new((1.0 / d as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); n];
    for &s in head.indices() {
        amps[s] = amp;
    }
    let reference = Spectrum::normalized(domain, amps)?;
    let delta_w = apply_channel(nm, &reference)?.leakage;
    let mu = head_tail_coherence(domain, kernel, head)?;
    Ok(AttenuationProfile { eta_k, delta_w, mu })
}

/// Lower bound on post-channel head mass:
/// `max(0, sigma_k - delta_w - mu^2 * g_norm_sq)`.
pub fn effective_head_bound(sigma_k: f64, delta_w: f64, mu: f64, g_norm_sq: f64) -> f64 {
    (sigma_k - delta_w - mu * mu * g_norm_sq).max(0.0)
}

/// Operator norm of the tail-row, head-column block of the kernel-then-Fourier
/// unitary. Returns a value in `[0, 1]`; exactly zero when the head covers the
/// whole domain.
pub fn head_tail_coherence(
    domain: IndexDomain,
    kernel: &KernelSpec,
    head: &HeadSet,
) -> Result<f64> {
    coherence_by_route(domain, kernel, head, domain.size() <= DENSE_COHERENCE_MAX)
}

fn coherence_by_route(
    domain: IndexDomain,
    kernel: &KernelSpec,
    head: &HeadSet,
    dense: bool,
) -> Result<f64> {
    let n = domain.size();
    let d = head.d();
    if d == n {
        return Ok(0.0);
    }
    if dense && d * n <= 1 << 22 {
        let lambda = jacobi_max_eigenvalue(dense_tail_gram(domain, kernel, head)?);
        return Ok(lambda.max(0.0).sqrt().min(1.0));
    }
    // Gram identity route: B^H B = I - H^H H with H the head-row block.
    let h = head_block(domain, kernel, head)?;
    let mut m = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d {
                acc += h[k][i].conj() * h[k][j];
            }
            m[i][j] = if i == j { Complex64::new(1.0, 0.0) - acc } else { -acc };
        }
    }
    let lambda = power_iteration_max(&m);
    Ok(lambda.max(0.0).sqrt().min(1.0))
}

/// Column `s` of the kernel-then-Fourier unitary.
fn operator_column(domain: IndexDomain, kernel: &KernelSpec, s: usize) -> Result<Vec<Complex64>> {
    let mut amps = vec![Complex64::new(0.0, 0.0); domain.size()];
    amps[s] = Complex64::new(1.0, 0.0);
    let e = Spectrum::normalized(domain, amps)?;
    Ok(interfere(kernel, &e)?.amps().to_vec())
}

/// Head-row block `H[r][j] = (F K e_{s_j})[s_r]`, a `d x d` matrix.
fn head_block(
    domain: IndexDomain,
    kernel: &KernelSpec,
    head: &HeadSet,
) -> Result<Vec<Vec<Complex64>>> {
    let d = head.d();
    let mut h = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for (j, &s) in head.indices().iter().enumerate() {
        let col = operator_column(domain, kernel, s)?;
        for (r, &row_idx) in head.indices().iter().enumerate() {
            h[r][j] = col[row_idx];
        }
    }
    Ok(h)
}

/// Explicit tail-block Gram matrix `B^H B`, a `d x d` Hermitian matrix.
fn dense_tail_gram(
    domain: IndexDomain,
    kernel: &KernelSpec,
    head: &HeadSet,
) -> Result<Vec<Vec<Complex64>>> {
    let n = domain.size();
    let d = head.d();
    let mut in_head = vec![false; n];
    for &s in head.indices() {
        in_head[s] = true;
    }
    let cols: Vec<Vec<Complex64>> = head
        .indices()
        .iter()
        .map(|&s| operator_column(domain, kernel, s))
        .collect::<Result<_>>()?;
    let mut g = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..n {
                if !in_head[r] {
                    acc += cols[i][r].conj() * cols[j][r];
                }
            }
            g[i][j] = acc;
        }
    }
    Ok(g)
}

/// Largest eigenvalue of a Hermitian matrix by cyclic Jacobi rotations.
fn jacobi_max_eigenvalue(mut a: Vec<Vec<Complex64>>) -> f64 {
    let d = a.len();
    if d == 0 {
        return 0.0;
    }
    if d == 1 {
        return a[0][0].re;
    }
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..d {
            for j in i + 1..d {
                off += a[i][j].norm_sqr();
            }
        }
        let scale = (0..d).map(|i| a[i][i].re.abs()).fold(1.0f64, f64::max);
        if off.sqrt() < 1e-14 * scale {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p][q];
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let delta = (app - aqq) / 2.0;
                let r = (delta * delta + apq.norm_sqr()).sqrt();
                let lam_plus = (app + aqq) / 2.0 + r;
                // eigenvector of the 2x2 block for lam_plus
                let v0 = apq;
                let v1 = Complex64::new(lam_plus - app, 0.0);
                let nv = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
                if nv < 1e-300 {
                    continue;
                }
                let c0 = v0 / nv;
                let c1 = v1 / nv;
                // unitary J = [[c0, -conj(c1)], [c1, conj(c0)]]; A <- J^H A J
                for row in a.iter_mut() {
                    let akp = row[p];
                    let akq = row[q];
                    row[p] = akp * c0 + akq * c1;
                    row[q] = akp * (-c1.conj()) + akq * c0.conj();
                }
                for k in 0..d {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c0.conj() * apk + c1.conj() * aqk;
                    a[q][k] = -c1 * apk + c0 * aqk;
                }
            }
        }
    }
    (0..d).map(|i| a[i][i].re).fold(f64::NEG_INFINITY, f64::max)
}

/// Leading eigenvalue of a Hermitian PSD matrix by power iteration.
fn power_iteration_max(m: &[Vec<Complex64>]) -> f64 {
    let d = m.len();
    if d == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b64_7169);
    let mut v: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5)))
        .collect();
    let norm = |x: &[Complex64]| kahan_sum(x.iter().map(|c| c.norm_sqr())).sqrt();
    let nv = norm(&v);
    v.iter_mut().for_each(|c| *c /= nv);
    let mut lambda = 0.0f64;
    for _ in 0..POWER_ITERATION_MAX {
        let mut w = vec![Complex64::new(0.0, 0.0); d];
        for (i, wi) in w.iter_mut().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                *wi += m[i][j] * vj;
            }
        }
        let nw = norm(&w);
        if nw < 1e-300 {
            return 0.0;
        }
        // Rayleigh quotient: v^H (M v) with unit v
        let next = kahan_sum(v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re));
        w.iter_mut().for_each(|c| *c /= nw);
        v = w;
        if (next - lambda).abs() < POWER_ITERATION_TOL {
            return next;
        }
        lambda = next;
    }
    lambda
}
