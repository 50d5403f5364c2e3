//! Noise-weighted head-mass reports, analytic floor bounds, and the
//! monotonicity audit linking head mass to decoder response.
//!
//! The central quantity is the noise-weighted head mass
//! `sigma_K = sum_{s in head} eta_K(s) |alpha_s|^2` of a measured spectrum.
//! [`pipeline_report`] assembles the full accounting for one shaped state,
//! kernel, and noise model: head mass before and after noise weighting,
//! mixing leakage, head-tail coherence, and the resulting effective floor
//! `max(0, sigma_K - delta_w - mu^2 ||g||^2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{interfere, KernelSpec};
use crate::ldpc::{bla_shift, de_converges, LdpcEnsemble};
use crate::noise::{
    apply_channel, attenuation_for_head, effective_head_bound, head_tail_coherence,
    AttenuationProfile, NoiseModel,
};
use crate::spectral::{head_set, kahan_sum, HeadSet, Spectrum};

/// Head-mass accounting for one measured spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeadMassReport {
    pub d: usize,
    pub head: HeadSet,
    /// Noise-weighted head mass.
    pub sigma_k: f64,
    /// Plain head mass, no noise weighting.
    pub sigma_unweighted: f64,
    pub delta_w: f64,
    pub mu: f64,
    /// Smallest survival factor across the head.
    pub eta_min: f64,
    pub g_norm_sq: f64,
    /// `max(0, sigma_k - delta_w - mu^2 * g_norm_sq)`.
    pub effective_head: f64,
}

/// Head-mass accounting of a spectrum against a precomputed profile.
pub fn head_mass(alpha: &Spectrum, profile: &AttenuationProfile, d: usize) -> Result<HeadMassReport> {
    if profile.eta_k.len() != alpha.len() {
        return Err(Error::DomainMismatch(format!(
            "profile covers {} modes, spectrum has {}",
            profile.eta_k.len(),
            alpha.len()
        )));
    }
    let head = head_set(alpha, d)?;
    let sigma_unweighted = head.mass(alpha);
    let sigma_k = kahan_sum(
        head.indices()
            .iter()
            .map(|&s| profile.eta_k[s] * alpha.probability(s)),
    );
    let eta_min = head
        .indices()
        .iter()
        .map(|&s| profile.eta_k[s])
        .fold(f64::INFINITY, f64::min);
    let g_norm_sq = kahan_sum((0..alpha.len()).map(|s| alpha.probability(s)));
    let effective_head = effective_head_bound(sigma_k, profile.delta_w, profile.mu, g_norm_sq);
    Ok(HeadMassReport {
        d,
        head,
        sigma_k,
        sigma_unweighted,
        delta_w: profile.delta_w,
        mu: profile.mu,
        eta_min,
        g_norm_sq,
        effective_head,
    })
}

/// Full pipeline accounting: interfere the shaped state through the kernel,
/// locate the head, and measure leakage and coherence for that exact head.
pub fn pipeline_report(
    g: &Spectrum,
    kernel: &KernelSpec,
    nm: &NoiseModel,
    d: usize,
) -> Result<HeadMassReport> {
    let alpha = interfere(kernel, g)?;
    let head = head_set(&alpha, d)?;
    let domain = alpha.domain();
    let mut profile = attenuation_for_head(nm, domain, kernel, &head)?;
    // leakage of the actual spectrum, not of the uniform reference
    profile.delta_w = apply_channel(nm, &alpha)?.leakage;
    let mut report = head_mass(&alpha, &profile, d)?;
    report.head = head;
    Ok(report)
}

/// Ceiling on the head mass of an isotropy-limited spectrum:
/// `delta * d * eta_max / n`.
pub fn isotropy_ceiling(delta: f64, d: usize, eta_max: f64, n: usize) -> f64 {
    delta * d as f64 * eta_max / n as f64
}

/// Isotropy constant of a spectrum: `n * max_s |alpha_s|^2`.
pub fn empirical_isotropy(alpha: &Spectrum) -> f64 {
    let peak = (0..alpha.len())
        .map(|s| alpha.probability(s))
        .fold(0.0f64, f64::max);
    alpha.len() as f64 * peak
}

/// Head-mass floor for an optimized phase instance decoded within relative
/// error `eps_rp`: `max(0, (1 - eps_rp) * eta_min - delta_w)`.
pub fn opi_bound(eps_rp: f64, eta_min: f64, delta_w: f64) -> f64 {
    ((1.0 - eps_rp) * eta_min - delta_w).max(0.0)
}

/// Head-mass floor transferred through an LDPC shaping advantage:
/// `sigma_identity + eta_min * delta_sigma_loc - delta_w`.
pub fn ldpc_bound(sigma_identity: f64, eta_min: f64, delta_sigma_loc: f64, delta_w: f64) -> f64 {
    sigma_identity + eta_min * delta_sigma_loc - delta_w
}

/// Decoder response as a function of delivered head-mass level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ResponseCurve {
    /// Step response: one at or above the threshold, zero below.
    Threshold { t: f64 },
    /// Density-evolution response: the head-mass level shifts the operating
    /// erasure rate to `eps_operating * (1 - kappa * level)`; the response is
    /// one when the shifted recursion drains.
    DensityEvolution {
        ensemble: LdpcEnsemble,
        kappa: f64,
        eps_operating: f64,
    },
}

impl ResponseCurve {
    pub fn evaluate(&self, level: f64) -> f64 {
        match self {
            ResponseCurve::Threshold { t } => {
                if level >= *t {
                    1.0
                } else {
                    0.0
                }
            }
            ResponseCurve::DensityEvolution { ensemble, kappa, eps_operating } => {
                let eps_eff = match bla_shift(*eps_operating, *kappa, level) {
                    Ok(e) => e,
                    // shift factor at or above one: the channel is fully
                    // quiet, the decoder trivially succeeds
                    Err(_) => return 1.0,
                };
                if eps_eff <= 0.0 {
                    1.0
                } else if de_converges(*ensemble, eps_eff) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// One audited configuration: delivered head-mass level and decoder response.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditEntry {
    pub label: String,
    pub sigma_k: f64,
    /// Head-mass level fed to the response curve.
    pub level: f64,
    pub response: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    /// Pairs where a strictly larger level produced a strictly smaller
    /// response.
    pub violations: usize,
    pub pairs_checked: usize,
    /// Kendall rank correlation between level and response; ties count zero.
    pub kendall_tau: f64,
    pub weakly_monotone: bool,
}

/// Comparison slack below which two floats count as tied.
const AUDIT_TIE: f64 = 1e-12;

/// Check that larger delivered head mass never reduces decoder response.
pub fn monotonicity_audit(entries: &[AuditEntry]) -> AuditReport {
    let n = entries.len();
    let mut violations = 0usize;
    let mut concordant_sum = 0i64;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            pairs += 1;
            let dl = entries[i].level - entries[j].level;
            let dr = entries[i].response - entries[j].response;
            let sl = if dl > AUDIT_TIE {
                1
            } else if dl < -AUDIT_TIE {
                -1
            } else {
                0
            };
            let sr = if dr > AUDIT_TIE {
                1
            } else if dr < -AUDIT_TIE {
                -1
            } else {
                0
            };
            if sl * sr == -1 {
                violations += 1;
            }
            concordant_sum += (sl * sr) as i64;
        }
    }
    let kendall_tau = if pairs == 0 { 0.0 } else { concordant_sum as f64 / pairs as f64 };
    AuditReport {
        violations,
        pairs_checked: pairs,
        kendall_tau,
        weakly_monotone: violations == 0,
    }
}

/// Run a family of kernels through the pipeline and audit monotonicity of
/// decoder response in delivered head mass. With `include_coherence` the
/// level is the full effective floor; otherwise the coherence penalty is
/// omitted and the level is `max(0, sigma_k - delta_w)`.
pub fn audit_kernel_family(
    kernels: &[(String, KernelSpec)],
    g: &Spectrum,
    nm: &NoiseModel,
    d: usize,
    response: &ResponseCurve,
    include_coherence: bool,
) -> Result<(Vec<AuditEntry>, AuditReport)> {
    let mut entries = Vec::with_capacity(kernels.len());
    for (label, kernel) in kernels {
        let report = pipeline_report(g, kernel, nm, d)?;
        let level = if include_coherence {
            report.effective_head
        } else {
            (report.sigma_k - report.delta_w).max(0.0)
        };
        entries.push(AuditEntry {
            label: label.clone(),
            sigma_k: report.sigma_k,
            level,
            response: response.evaluate(level),
        });
    }
    let report = monotonicity_audit(&entries);
    Ok((entries, report))
}

/// Convenience: coherence of the head the spectrum itself selects.
pub fn coherence_of_selected_head(
    g: &Spectrum,
    kernel: &KernelSpec,
    d: usize,
) -> Result<f64> {
    let alpha = interfere(kernel, g)?;
    let head = head_set(&alpha, d)?;
    head_tail_coherence(alpha.domain(), kernel, &head)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::Tau;
    use crate::spectral::IndexDomain;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spectrum(domain: IndexDomain, seed: u64) -> Spectrum {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps: Vec<Complex64> = (0..domain.size())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Spectrum::normalized(domain, amps).unwrap()
    }

    #[test]
    fn report_matches_hand_computation() {
        let domain = IndexDomain::boolean(2).unwrap();
        // probabilities 0.4, 0.3, 0.2, 0.1 at indices 0..4
        let amps = vec![
            Complex64::new(0.4f64.sqrt(), 0.0),
            Complex64::new(0.3f64.sqrt(), 0.0),
            Complex64::new(0.2f64.sqrt(), 0.0),
            Complex64::new(0.1f64.sqrt(), 0.0),
        ];
        let alpha = Spectrum::normalized(domain, amps).unwrap();
        let profile = AttenuationProfile {
            eta_k: vec![1.0, 0.9, 0.9, 0.81],
            delta_w: 0.05,
            mu: 0.0,
        };
        let report = head_mass(&alpha, &profile, 2).unwrap();
        assert_eq!(report.head.indices(), &[0, 1]);
        assert!((report.sigma_unweighted - 0.7).abs() < 1e-12);
        assert!((report.sigma_k - (0.4 + 0.9 * 0.3)).abs() < 1e-12);
        assert!((report.eta_min - 0.9).abs() < 1e-15);
        assert!((report.effective_head - (0.67 - 0.05)).abs() < 1e-12);
    }

    #[test]
    fn report_rejects_mismatched_profile() {
        let domain = IndexDomain::boolean(2).unwrap();
        let alpha = random_spectrum(domain, 1);
        let profile = AttenuationProfile { eta_k: vec![1.0; 7], delta_w: 0.0, mu: 0.0 };
        assert!(head_mass(&alpha, &profile, 1).is_err());
    }

    #[test]
    fn pipeline_report_noiseless_identity() {
        let domain = IndexDomain::boolean(3).unwrap();
        let g = random_spectrum(domain, 3);
        let report =
            pipeline_report(&g, &KernelSpec::Identity, &NoiseModel::noiseless(), 8).unwrap();
        // full head, no noise: everything is unity and the penalty is mu = 0
        assert!((report.sigma_k - 1.0).abs() < 1e-10);
        assert_eq!(report.delta_w, 0.0);
        assert_eq!(report.mu, 0.0);
        assert!((report.effective_head - 1.0).abs() < 1e-10);
    }

    #[test]
    fn effective_floor_is_conservative_for_sampled_pipelines() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..10u64 {
            let domain = IndexDomain::boolean(5).unwrap();
            let g = random_spectrum(domain, 40 + trial);
            let kernel = KernelSpec::chirp(
                [rng.gen_range(0..4), rng.gen_range(0..4), rng.gen_range(0..4)],
                rng.gen_range(-1.0..1.0),
            );
            let nm = NoiseModel::new(
                rng.gen_range(0.0..0.3),
                rng.gen_range(0..3usize),
                Tau::Constant(1.0),
                trial,
            )
            .unwrap();
            let d = rng.gen_range(1..=6usize);
            let report = pipeline_report(&g, &kernel, &nm, d).unwrap();
            let alpha = interfere(&kernel, &g).unwrap();
            let out = apply_channel(&nm, &alpha).unwrap();
            let measured: f64 = report.head.indices().iter().map(|&s| out.probs[s]).sum();
            assert!(
                measured >= report.effective_head - 1e-9,
                "trial {trial}: measured {measured} below floor {}",
                report.effective_head
            );
        }
    }

    #[test]
    fn isotropy_examples() {
        assert!((isotropy_ceiling(2.0, 4, 1.0, 64) - 0.125).abs() < 1e-15);
        assert!((isotropy_ceiling(1.0, 8, 0.5, 32) - 0.125).abs() < 1e-15);
        let domain = IndexDomain::boolean(4).unwrap();
        let uniform = Spectrum::normalized(
            domain,
            vec![Complex64::new(0.25, 0.0); 16],
        )
        .unwrap();
        assert!((empirical_isotropy(&uniform) - 1.0).abs() < 1e-12);
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        amps[3] = Complex64::new(1.0, 0.0);
        let delta = Spectrum::normalized(domain, amps).unwrap();
        assert!((empirical_isotropy(&delta) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn isotropy_ceiling_bounds_uniform_spectra_head_mass() {
        // for a delta-isotropic spectrum, head mass <= delta * d * eta_max / n
        let domain = IndexDomain::boolean(4).unwrap();
        let alpha = random_spectrum(domain, 9);
        let delta = empirical_isotropy(&alpha);
        for d in [1usize, 3, 7, 16] {
            let head = head_set(&alpha, d).unwrap();
            let mass = head.mass(&alpha);
            assert!(mass <= isotropy_ceiling(delta, d, 1.0, 16) + 1e-12);
        }
    }

    #[test]
    fn bound_arithmetic() {
        assert!((opi_bound(0.05, 0.9, 0.01) - (0.95 * 0.9 - 0.01)).abs() < 1e-15);
        assert_eq!(opi_bound(1.0, 0.9, 0.5), 0.0);
        assert!((ldpc_bound(0.5, 0.9, 0.04, 0.01) - 0.526).abs() < 1e-12);
    }

    #[test]
    fn threshold_response_steps() {
        let curve = ResponseCurve::Threshold { t: 0.3 };
        assert_eq!(curve.evaluate(0.29), 0.0);
        assert_eq!(curve.evaluate(0.3), 1.0);
        assert_eq!(curve.evaluate(0.9), 1.0);
    }

    #[test]
    fn density_evolution_response_switches_with_level() {
        let curve = ResponseCurve::DensityEvolution {
            ensemble: LdpcEnsemble::new(3, 6).unwrap(),
            kappa: 0.5,
            eps_operating: 0.44,
        };
        // 0.44 is above the 0.4294 threshold; a large enough level pulls the
        // effective rate below it
        assert_eq!(curve.evaluate(0.0), 0.0);
        assert_eq!(curve.evaluate(0.1), 1.0);
        assert_eq!(curve.evaluate(3.0), 1.0);
    }

    #[test]
    fn audit_flags_inversions_and_scores_correlation() {
        let mk = |level: f64, response: f64| AuditEntry {
            label: String::new(),
            sigma_k: level,
            level,
            response,
        };
        let clean = vec![mk(0.1, 0.0), mk(0.2, 0.0), mk(0.3, 1.0), mk(0.4, 1.0)];
        let report = monotonicity_audit(&clean);
        assert_eq!(report.violations, 0);
        assert!(report.weakly_monotone);
        assert!(report.kendall_tau > 0.0);

        let broken = vec![mk(0.1, 1.0), mk(0.4, 0.0)];
        let report = monotonicity_audit(&broken);
        assert_eq!(report.violations, 1);
        assert!(!report.weakly_monotone);
        assert!(report.kendall_tau < 0.0);

        assert_eq!(monotonicity_audit(&[]).violations, 0);
    }

    #[test]
    fn kernel_family_audit_is_monotone_for_chirp_sweep() {
        // A sweep of chirp rates produces varying head mass; the response
        // must order consistently with it.
        let domain = IndexDomain::p_adic(11, 1).unwrap();
        let mut amps = Vec::with_capacity(11);
        for x in 0..11i64 {
            let q = (3 * x * x + x) % 11;
            amps.push(Complex64::from_polar(
                1.0,
                std::f64::consts::TAU * q as f64 / 11.0,
            ));
        }
        let g = Spectrum::normalized(domain, amps).unwrap();
        let kernels: Vec<(String, KernelSpec)> = (0..6)
            .map(|k| {
                (
                    format!("rate-{k}"),
                    KernelSpec::chirp([0, 0, 1], -(k as f64) * 0.75),
                )
            })
            .collect();
        let nm = NoiseModel::depolarizing(0.05).unwrap();
        let curve = ResponseCurve::Threshold { t: 0.5 };
        let (entries, report) =
            audit_kernel_family(&kernels, &g, &nm, 2, &curve, false).unwrap();
        assert_eq!(entries.len(), 6);
        assert_eq!(report.violations, 0, "threshold response cannot invert");
        assert!(report.weakly_monotone);
    }
}
