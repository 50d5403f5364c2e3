//! Optimized phase instances: low-degree polynomial phase problems over a
//! prime field whose spectra concentrate perfectly under a tuned chirp.
//!
//! An instance is `h(x) = a x^2 + b x + c mod p` evaluated on all of `F_p`
//! or on a contiguous window. The shaped state carries the exact phases
//! `e^{2 pi i h(x) / p}`; applying a chirp at rate `-a` cancels the
//! quadratic term, so the Fourier spectrum collapses onto the single mode
//! `b mod p`. With the identity kernel instead, the quadratic Gauss sum
//! spreads the spectrum perfectly flat at `1/p` per mode. [`theta_scan`]
//! sweeps real chirp rates and records the head-mass profile, which peaks at
//! the tuned rate and repeats with period `p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{interfere, KernelSpec};
use crate::noise::NoiseModel;
use crate::spectral::{head_set, kahan_sum, phase_state, IndexDomain, Spectrum};

/// Evaluation set of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalSet {
    /// All of `F_p`.
    Full,
    /// The window `start, start+1, .., start+len-1` (indices mod p).
    Contiguous { start: u32, len: u32 },
}

/// A polynomial phase instance `h(x) = a x^2 + b x + c mod p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpiInstance {
    pub p: u32,
    /// Coefficients `[c, b, a]`, constant first.
    pub h: [i64; 3],
    pub eval: EvalSet,
}

impl OpiInstance {
    /// Quadratic instance on all of `F_p`; `a` must be nonzero mod `p`.
    pub fn quadratic(p: u32, a: i64, b: i64, c: i64) -> Result<Self> {
        let inst = OpiInstance { p, h: [c, b, a], eval: EvalSet::Full };
        inst.validate()?;
        if inst.degree() != 2 {
            return Err(Error::Argument(format!(
                "leading coefficient {a} vanishes mod {p}"
            )));
        }
        Ok(inst)
    }

    /// Affine instance on all of `F_p`; `b` must be nonzero mod `p`.
    pub fn affine(p: u32, b: i64, c: i64) -> Result<Self> {
        let inst = OpiInstance { p, h: [c, b, 0], eval: EvalSet::Full };
        inst.validate()?;
        if inst.degree() != 1 {
            return Err(Error::Argument(format!(
                "linear coefficient {b} vanishes mod {p}"
            )));
        }
        Ok(inst)
    }

    /// Quadratic instance restricted to the window `0..len`.
    pub fn truncated(p: u32, len: u32, a: i64, b: i64, c: i64) -> Result<Self> {
        let mut inst = OpiInstance::quadratic(p, a, b, c)?;
        inst.eval = EvalSet::Contiguous { start: 0, len };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        // the domain constructor enforces odd primality and the size cap
        IndexDomain::p_adic(self.p, 1)?;
        if self.degree() == 0 {
            return Err(Error::Argument(
                "instance degree must be 1 or 2 after reduction mod p".into(),
            ));
        }
        if let EvalSet::Contiguous { start, len } = self.eval {
            if len == 0 || len > self.p {
                return Err(Error::Argument(format!(
                    "window length {len} outside 1..={}",
                    self.p
                )));
            }
            if start >= self.p {
                return Err(Error::Argument(format!(
                    "window start {start} outside 0..{}",
                    self.p
                )));
            }
        }
        Ok(())
    }

    /// Degree after reduction mod `p`.
    pub fn degree(&self) -> u32 {
        let p = self.p as i64;
        if self.h[2].rem_euclid(p) != 0 {
            2
        } else if self.h[1].rem_euclid(p) != 0 {
            1
        } else {
            0
        }
    }

    /// Number of evaluation points.
    pub fn eval_len(&self) -> usize {
        match self.eval {
            EvalSet::Full => self.p as usize,
            EvalSet::Contiguous { len, .. } => len as usize,
        }
    }

    /// Chirp rate that cancels the quadratic term.
    pub fn tuned_rate(&self) -> i64 {
        self.h[2].rem_euclid(self.p as i64)
    }

    /// Concentration mode of the tuned spectrum: `b mod p`.
    pub fn tuned_mode(&self) -> usize {
        self.h[1].rem_euclid(self.p as i64) as usize
    }

    pub fn domain(&self) -> IndexDomain {
        IndexDomain::p_adic(self.p, 1).expect("validated at construction")
    }

    fn in_window(&self, x: u32) -> bool {
        match self.eval {
            EvalSet::Full => true,
            EvalSet::Contiguous { start, len } => {
                let offset = (x + self.p - start) % self.p;
                offset < len
            }
        }
    }
}

/// Shaped state `e^{2 pi i h(x)/p} / sqrt(|eval|)` on the evaluation set,
/// zero elsewhere. Phases are exact for equal residues.
pub fn opi_shaped_state(inst: &OpiInstance) -> Result<Spectrum> {
    inst.validate()?;
    let numerators: Vec<Option<i64>> = (0..inst.p)
        .map(|x| {
            if inst.in_window(x) {
                let xi = x as i64;
                Some(inst.h[2] * xi * xi + inst.h[1] * xi + inst.h[0])
            } else {
                None
            }
        })
        .collect();
    phase_state(inst.domain(), &numerators, inst.p)
}

/// Spectrum check outcome for one chirp rate.
#[derive(Debug, Clone)]
pub struct PpcOutcome {
    /// Most likely mode, lowest index on ties.
    pub mode: usize,
    pub top_mass: f64,
    pub spectrum: Spectrum,
}

/// Apply a chirp at rate `-gamma` and measure the spectrum's peak. Integer
/// rates take the exact residue-arithmetic path.
pub fn ppc_check(inst: &OpiInstance, gamma: i64) -> Result<PpcOutcome> {
    let g = opi_shaped_state(inst)?;
    let kernel = KernelSpec::chirp([0, 0, 1], -(gamma as f64));
    let alpha = interfere(&kernel, &g)?;
    let mut mode = 0usize;
    let mut top_mass = f64::NEG_INFINITY;
    for s in 0..alpha.len() {
        let m = alpha.probability(s);
        if m > top_mass {
            top_mass = m;
            mode = s;
        }
    }
    Ok(PpcOutcome { mode, top_mass, spectrum: alpha })
}

/// Off-peak spectral mass of a truncated instance at its tuned rate. For a
/// window of `len >= 2` points the peak sits at the tuned mode and the tail
/// is exactly `1 - len/p`.
pub fn truncated_tail(inst: &OpiInstance) -> Result<f64> {
    match inst.eval {
        EvalSet::Contiguous { .. } => {}
        EvalSet::Full => {
            return Err(Error::Argument(
                "tail measurement needs a truncated instance".into(),
            ))
        }
    }
    let outcome = ppc_check(inst, inst.tuned_rate())?;
    Ok(1.0 - outcome.top_mass)
}

/// One row of a chirp-rate scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaScanRow {
    pub theta: f64,
    /// Noise-weighted head mass at this rate.
    pub sigma_k: f64,
    pub sigma_unweighted: f64,
    pub above: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaScan {
    pub rows: Vec<ThetaScanRow>,
    /// Rate of the largest head mass; earliest grid point on ties.
    pub theta_star: f64,
    pub peak_sigma: f64,
    /// Grid measure of the region at or above the threshold.
    pub peak_width: f64,
    /// Whether the above-threshold region is one contiguous run.
    pub contiguous_peak: bool,
}

/// Sweep chirp rates over a grid and record noise-weighted head mass.
pub fn theta_scan(
    inst: &OpiInstance,
    grid: &[f64],
    nm: &NoiseModel,
    d: usize,
    threshold: f64,
) -> Result<ThetaScan> {
    if grid.len() < 2 {
        return Err(Error::Argument("scan grid needs at least two points".into()));
    }
    let g = opi_shaped_state(inst)?;
    let domain = g.domain();
    let mut rows = Vec::with_capacity(grid.len());
    for &theta in grid {
        let kernel = KernelSpec::chirp([0, 0, 1], -theta);
        let alpha = interfere(&kernel, &g)?;
        let head = head_set(&alpha, d)?;
        let sigma_unweighted = head.mass(&alpha);
        let sigma_k = kahan_sum(
            head.indices()
                .iter()
                .map(|&s| nm.eta_k(domain, s) * alpha.probability(s)),
        );
        rows.push(ThetaScanRow { theta, sigma_k, sigma_unweighted, above: sigma_k >= threshold });
    }
    let mut best = 0usize;
    for (i, row) in rows.iter().enumerate() {
        if row.sigma_k > rows[best].sigma_k {
            best = i;
        }
    }
    let step = (grid[grid.len() - 1] - grid[0]).abs() / (grid.len() - 1) as f64;
    let above_count = rows.iter().filter(|r| r.above).count();
    let first_above = rows.iter().position(|r| r.above);
    let last_above = rows.iter().rposition(|r| r.above);
    let contiguous_peak = match (first_above, last_above) {
        (Some(f), Some(l)) => l - f + 1 == above_count,
        _ => true,
    };
    Ok(ThetaScan {
        theta_star: rows[best].theta,
        peak_sigma: rows[best].sigma_k,
        peak_width: step * above_count as f64,
        contiguous_peak,
        rows,
    })
}

/// Fit `tail(len) = 1 - C * len / p` over several window lengths, returning
/// the least-squares constant `C` (one for ideal concentration).
pub fn fit_tail_constant(p: u32, a: i64, b: i64, c: i64, lens: &[u32]) -> Result<f64> {
    if lens.is_empty() {
        return Err(Error::Argument("tail fit needs at least one window".into()));
    }
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for &len in lens {
        let inst = OpiInstance::truncated(p, len, a, b, c)?;
        let tail = truncated_tail(&inst)?;
        let x = len as f64 / p as f64;
        num += x * (1.0 - tail);
        den += x * x;
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::fourier;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constructors_validate() {
        assert!(OpiInstance::quadratic(7, 3, 2, 5).is_ok());
        assert!(OpiInstance::quadratic(7, 7, 2, 5).is_err(), "a = 0 mod p");
        assert!(OpiInstance::quadratic(9, 1, 1, 0).is_err(), "p must be prime");
        assert!(OpiInstance::affine(11, 11, 3).is_err(), "b = 0 mod p");
        assert!(OpiInstance::affine(11, 4, 3).is_ok());
        assert!(OpiInstance::truncated(31, 0, 1, 1, 0).is_err());
        assert!(OpiInstance::truncated(31, 32, 1, 1, 0).is_err());
        assert!(OpiInstance::truncated(31, 13, 1, 1, 0).is_ok());
    }

    #[test]
    fn degree_reduces_mod_p() {
        assert_eq!(OpiInstance::quadratic(7, 3, 2, 5).unwrap().degree(), 2);
        assert_eq!(OpiInstance::affine(7, 2, 5).unwrap().degree(), 1);
        let wrapped = OpiInstance { p: 7, h: [0, 9, 14], eval: EvalSet::Full };
        assert_eq!(wrapped.degree(), 1, "14 = 0 and 9 = 2 mod 7");
    }

    #[test]
    fn shaped_state_is_uniform_magnitude_on_window() {
        let inst = OpiInstance::truncated(31, 13, 2, 4, 1).unwrap();
        let g = opi_shaped_state(&inst).unwrap();
        let expect = 1.0 / 13.0;
        for x in 0..31usize {
            let p = g.probability(x);
            if x < 13 {
                assert!((p - expect).abs() < 1e-15);
            } else {
                assert_eq!(p, 0.0);
            }
        }
    }

    #[test]
    fn tuned_chirp_concentrates_on_the_linear_mode() {
        let inst = OpiInstance::quadratic(7, 3, 2, 5).unwrap();
        let out = ppc_check(&inst, inst.tuned_rate()).unwrap();
        assert_eq!(out.mode, 2);
        assert!((out.top_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn affine_instances_concentrate_without_tuning() {
        let inst = OpiInstance::affine(11, 4, 9).unwrap();
        assert_eq!(inst.tuned_rate(), 0);
        let out = ppc_check(&inst, 0).unwrap();
        assert_eq!(out.mode, 4);
        assert!((out.top_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_instances_concentrate_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &p in &[5u32, 7, 11, 13, 31] {
            for _ in 0..10 {
                let a = rng.gen_range(1..p as i64);
                let b = rng.gen_range(0..p as i64);
                let c = rng.gen_range(0..p as i64);
                let inst = OpiInstance::quadratic(p, a, b, c).unwrap();
                let out = ppc_check(&inst, inst.tuned_rate()).unwrap();
                assert_eq!(out.mode, inst.tuned_mode(), "p={p} a={a} b={b}");
                assert!(
                    (out.top_mass - 1.0).abs() < 1e-12,
                    "p={p} a={a} b={b} mass={}",
                    out.top_mass
                );
            }
        }
    }

    #[test]
    fn mistuned_integer_rates_are_exactly_flat() {
        // residual quadratic coefficient nonzero: Gauss-sum magnitudes give
        // every mode exactly 1/p
        let inst = OpiInstance::quadratic(13, 5, 3, 1).unwrap();
        let out = ppc_check(&inst, 2).unwrap();
        let expect = 1.0 / 13.0;
        for s in 0..13usize {
            assert!(
                (out.spectrum.probability(s) - expect).abs() < 1e-12,
                "mode {s} deviates from flat"
            );
        }
        assert!((out.top_mass - expect).abs() < 1e-12);
    }

    #[test]
    fn identity_kernel_spectrum_is_exactly_flat() {
        let inst = OpiInstance::quadratic(31, 7, 11, 2).unwrap();
        let g = opi_shaped_state(&inst).unwrap();
        let alpha = fourier(&g).unwrap();
        for s in 0..31usize {
            assert!((alpha.probability(s) - 1.0 / 31.0).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_tail_closed_form() {
        for (p, len) in [(31u32, 13u32), (31, 2), (31, 31), (101, 40)] {
            let inst = OpiInstance::truncated(p, len, 3, 5, 2).unwrap();
            let tail = truncated_tail(&inst).unwrap();
            let expect = 1.0 - len as f64 / p as f64;
            assert!(
                (tail - expect).abs() < 1e-12,
                "p={p} len={len}: tail {tail} vs {expect}"
            );
            if len >= 2 {
                let out = ppc_check(&inst, inst.tuned_rate()).unwrap();
                assert_eq!(out.mode, inst.tuned_mode());
            }
        }
        let full = OpiInstance::quadratic(31, 3, 5, 2).unwrap();
        assert!(truncated_tail(&full).is_err());
    }

    #[test]
    fn tail_fit_constant_is_one() {
        let c = fit_tail_constant(31, 3, 5, 2, &[5, 9, 13, 21, 31]).unwrap();
        assert!((c - 1.0).abs() < 1e-10, "fit constant {c}");
    }

    #[test]
    fn theta_scan_peaks_at_the_tuned_rate() {
        let inst = OpiInstance::quadratic(31, 6, 9, 3).unwrap();
        let grid: Vec<f64> = (0..=124).map(|i| i as f64 * 0.25).collect();
        let scan = theta_scan(&inst, &grid, &NoiseModel::noiseless(), 1, 0.5).unwrap();
        assert_eq!(scan.theta_star, 6.0);
        assert!((scan.peak_sigma - 1.0).abs() < 1e-9);
        assert!(scan.contiguous_peak);
        assert!(scan.peak_width > 0.0 && scan.peak_width < 2.0);
    }

    #[test]
    fn theta_scan_is_periodic_in_p() {
        let inst = OpiInstance::quadratic(13, 4, 2, 7).unwrap();
        let nm = NoiseModel::noiseless();
        let base: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let shifted: Vec<f64> = base.iter().map(|t| t + 13.0).collect();
        let a = theta_scan(&inst, &base, &nm, 1, 0.5).unwrap();
        let b = theta_scan(&inst, &shifted, &nm, 1, 0.5).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert!(
                (ra.sigma_k - rb.sigma_k).abs() < 1e-8,
                "period break at {}: {} vs {}",
                ra.theta,
                ra.sigma_k,
                rb.sigma_k
            );
        }
    }

    #[test]
    fn scan_respects_noise_weighting() {
        let inst = OpiInstance::quadratic(31, 6, 9, 3).unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| 4.0 + i as f64 * 0.1).collect();
        let nm = NoiseModel::depolarizing(0.2).unwrap();
        let scan = theta_scan(&inst, &grid, &nm, 1, 0.5).unwrap();
        // tuned mode is 9 (digit weight 1 at p=31), so the weighted peak is
        // (1 - 0.2) * 1.0
        assert!((scan.peak_sigma - 0.8).abs() < 1e-9);
        let unweighted = scan
            .rows
            .iter()
            .map(|r| r.sigma_unweighted)
            .fold(0.0f64, f64::max);
        assert!((unweighted - 1.0).abs() < 1e-9);
    }
}
