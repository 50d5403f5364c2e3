//! Circuit resource model: two-qubit depth and T-count per pipeline stage,
//! frontier tables (head-mass gain versus relative depth), and depth
//! scaling over an index-size grid.
//!
//! The model instantiates asymptotic stage costs with reported unit
//! constants: shaping `c1*ell*n`, kernel `c2*n^2` (global chirp) or
//! `c2*n*b` (block-local width `b`), transform `c3*n` (truncated) or
//! `c3*n^2` (full), and an optional coherent decoder `c4*N*r`. T-counts
//! multiply rotation-based stages (kernel, transform, decoder) by
//! `t_rate * log2(1/eps_synth)`; shaping is reversible arithmetic and
//! carries no synthesis-accuracy factor. These are shape models for
//! comparing kernel families, not hardware estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::noise::NoiseModel;
use crate::opi::{opi_shaped_state, OpiInstance};
use crate::spectral::{head_set, kahan_sum};
use crate::variational::block_kernel_search;

/// Kernel families distinguished by the cost model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    None,
    GlobalChirp,
    BlockLocal { b: usize },
}

/// Coherent decoder stage: reversible syndrome decoding over `length`
/// symbols at designed degree `degree`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoherentDecoder {
    pub length: usize,
    pub degree: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CostModel {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub t_rate: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { c1: 1.0, c2: 1.0, c3: 1.0, c4: 1.0, t_rate: 4.0 }
    }
}

pub const DEFAULT_EPS_SYNTH: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct StageCost {
    pub depth: f64,
    pub t_count: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub two_qubit_depth: f64,
    pub t_count: f64,
    pub shaping: StageCost,
    pub kernel: StageCost,
    pub fourier: StageCost,
    pub decoder: StageCost,
}

impl CostModel {
    /// Per-stage depth and T-count for one pipeline iteration.
    pub fn estimate(
        &self,
        n: usize,
        ell: usize,
        kernel: KernelKind,
        truncated_qft: bool,
        coherent_decoder: Option<CoherentDecoder>,
        eps_synth: f64,
    ) -> Result<ResourceEstimate> {
        if n == 0 || ell == 0 {
            return Err(Error::Argument("n and ell must be at least 1".into()));
        }
        if !(eps_synth > 0.0 && eps_synth < 1.0) {
            return Err(Error::Argument(format!(
                "synthesis accuracy {eps_synth} outside (0, 1)"
            )));
        }
        if let KernelKind::BlockLocal { b } = kernel {
            if b == 0 || b > n {
                return Err(Error::Argument(format!("block width {b} outside 1..={n}")));
            }
        }
        let nf = n as f64;
        let log_factor = (1.0 / eps_synth).log2();
        let rotation_stage = |depth: f64| StageCost {
            depth,
            t_count: self.t_rate * depth * log_factor,
        };
        let shaping_depth = self.c1 * ell as f64 * nf;
        let shaping = StageCost {
            depth: shaping_depth,
            t_count: self.t_rate * shaping_depth,
        };
        let kernel = rotation_stage(match kernel {
            KernelKind::None => 0.0,
            KernelKind::GlobalChirp => self.c2 * nf * nf,
            KernelKind::BlockLocal { b } => self.c2 * nf * b as f64,
        });
        let fourier = rotation_stage(if truncated_qft {
            self.c3 * nf
        } else {
            self.c3 * nf * nf
        });
        let decoder = match coherent_decoder {
            Some(dec) => {
                if dec.length == 0 || dec.degree == 0 {
                    return Err(Error::Argument(
                        "decoder length and degree must be at least 1".into(),
                    ));
                }
                rotation_stage(self.c4 * dec.length as f64 * dec.degree as f64)
            }
            None => StageCost::default(),
        };
        Ok(ResourceEstimate {
            two_qubit_depth: shaping.depth + kernel.depth + fourier.depth + decoder.depth,
            t_count: shaping.t_count + kernel.t_count + fourier.t_count + decoder.t_count,
            shaping,
            kernel,
            fourier,
            decoder,
        })
    }
}

/// One labeled kernel entering a frontier comparison.
#[derive(Debug, Clone)]
pub struct FrontierKernel {
    pub label: String,
    pub kernel: KernelSpec,
    pub kind: KernelKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontierRow {
    pub label: String,
    /// Depth divided by the identity-kernel depth.
    pub relative_depth: f64,
    /// Head mass minus the identity-kernel head mass.
    pub gain: f64,
    pub sigma_k: f64,
    pub depth: f64,
    pub t_count: f64,
}

/// Head-mass gain versus relative depth for a family of kernels on one
/// instance. The list must contain the identity-kernel baseline; depths are
/// modeled at index size `n_model`.
pub fn frontier_table(
    model: &CostModel,
    inst: &OpiInstance,
    kernels: &[FrontierKernel],
    nm: &NoiseModel,
    d_star: usize,
    n_model: usize,
    ell: usize,
    eps_synth: f64,
) -> Result<Vec<FrontierRow>> {
    let baseline_pos = kernels
        .iter()
        .position(|k| k.kind == KernelKind::None)
        .ok_or_else(|| Error::Argument("frontier needs the identity-kernel baseline".into()))?;
    let g = opi_shaped_state(inst)?;
    let sigma_of = |k: &FrontierKernel| -> Result<f64> {
        let alpha = crate::kernels::interfere(&k.kernel, &g)?;
        let head = head_set(&alpha, d_star)?;
        Ok(kahan_sum(
            head.indices()
                .iter()
                .map(|&s| nm.eta_k(alpha.domain(), s) * alpha.probability(s)),
        ))
    };
    let sigma_baseline = sigma_of(&kernels[baseline_pos])?;
    let depth_baseline = model
        .estimate(n_model, ell, KernelKind::None, true, None, eps_synth)?
        .two_qubit_depth;
    kernels
        .iter()
        .map(|k| {
            let sigma_k = sigma_of(k)?;
            let est = model.estimate(n_model, ell, k.kind, true, None, eps_synth)?;
            Ok(FrontierRow {
                label: k.label.clone(),
                relative_depth: est.two_qubit_depth / depth_baseline,
                gain: sigma_k - sigma_baseline,
                sigma_k,
                depth: est.two_qubit_depth,
                t_count: est.t_count,
            })
        })
        .collect()
}

pub const REFERENCE_P: u32 = 31;
pub const REFERENCE_D: usize = 1;
pub const REFERENCE_N_MODEL: usize = 64;
pub const REFERENCE_ELL: usize = 2;
pub const REFERENCE_BLOCK_WIDTH: usize = 3;
pub const REFERENCE_SEARCH_SEED: u64 = 17;

/// Fixed reference frontier: the quadratic instance over GF(31) with the
/// identity baseline, an integer-detuned global chirp (flat spectrum, gain
/// near zero), a width-limited kernel found by coordinate ascent, and the
/// tuned global chirp.
pub fn reference_frontier(model: &CostModel) -> Result<Vec<FrontierRow>> {
    let (a, b, c) = (6, 9, 3);
    let inst = OpiInstance::quadratic(REFERENCE_P, a, b, c)?;
    let g = opi_shaped_state(&inst)?;
    let nm = NoiseModel::noiseless();
    let search = block_kernel_search(&g, &nm, REFERENCE_D, 1, 2, 3, REFERENCE_SEARCH_SEED)?;
    let kernels = vec![
        FrontierKernel {
            label: "baseline".into(),
            kernel: KernelSpec::Identity,
            kind: KernelKind::None,
        },
        FrontierKernel {
            label: "mistuned-global".into(),
            kernel: KernelSpec::chirp([0, 0, 1], -((a + 1) as f64)),
            kind: KernelKind::GlobalChirp,
        },
        FrontierKernel {
            label: "block-local".into(),
            kernel: search.kernel()?,
            kind: KernelKind::BlockLocal { b: REFERENCE_BLOCK_WIDTH },
        },
        FrontierKernel {
            label: "tuned-global".into(),
            kernel: KernelSpec::chirp([0, 0, 1], -(a as f64)),
            kind: KernelKind::GlobalChirp,
        },
    ];
    frontier_table(
        model,
        &inst,
        &kernels,
        &nm,
        REFERENCE_D,
        REFERENCE_N_MODEL,
        REFERENCE_ELL,
        DEFAULT_EPS_SYNTH,
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    /// One depth per requested kernel kind, in input order.
    pub depths: Vec<f64>,
}

/// Model depth over an index-size grid, one column per kernel kind.
pub fn scaling_table(
    model: &CostModel,
    ns: &[usize],
    kinds: &[KernelKind],
    ell: usize,
    truncated_qft: bool,
) -> Result<Vec<ScalingRow>> {
    if ns.is_empty() || kinds.is_empty() {
        return Err(Error::Argument("scaling grid and kernel list must be nonempty".into()));
    }
    ns.iter()
        .map(|&n| {
            let depths = kinds
                .iter()
                .map(|&k| {
                    model
                        .estimate(n, ell, k, truncated_qft, None, DEFAULT_EPS_SYNTH)
                        .map(|e| e.two_qubit_depth)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(ScalingRow { n, depths })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`, restricted to the top
/// decade of `x` (points with `x >= max_x / 10`).
pub fn fit_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::Argument("log-log fit needs positive coordinates".into()));
    }
    let max_x = points.iter().map(|&(x, _)| x).fold(0.0f64, f64::max);
    let top: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, _)| x >= max_x / 10.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if top.len() < 2 {
        return Err(Error::Argument("log-log fit needs at least two points in the top decade".into()));
    }
    let n = top.len() as f64;
    let sx = kahan_sum(top.iter().map(|&(x, _)| x));
    let sy = kahan_sum(top.iter().map(|&(_, y)| y));
    let sxx = kahan_sum(top.iter().map(|&(x, _)| x * x));
    let sxy = kahan_sum(top.iter().map(|&(x, y)| x * y));
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(Error::Argument("log-log fit needs distinct x values".into()));
    }
    Ok((n * sxy - sx * sy) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::synthesize_chirp;

    fn grid() -> Vec<usize> {
        (4..=14).map(|k| 1usize << k).collect()
    }

    #[test]
    fn none_kernel_contributes_no_depth() {
        let m = CostModel::default();
        let est = m.estimate(64, 2, KernelKind::None, true, None, 1e-10).unwrap();
        assert_eq!(est.kernel.depth, 0.0);
        assert_eq!(est.two_qubit_depth, 128.0 + 64.0);
    }

    #[test]
    fn global_to_block_kernel_ratio_is_n_over_b() {
        let m = CostModel::default();
        let g = m.estimate(64, 1, KernelKind::GlobalChirp, true, None, 1e-10).unwrap();
        let b = m
            .estimate(64, 1, KernelKind::BlockLocal { b: 4 }, true, None, 1e-10)
            .unwrap();
        assert_eq!(g.kernel.depth / b.kernel.depth, 16.0);
    }

    #[test]
    fn totals_equal_breakdown_sums() {
        let m = CostModel { c1: 0.7, c2: 1.3, c3: 2.0, c4: 0.5, t_rate: 3.0 };
        let dec = Some(CoherentDecoder { length: 128, degree: 3 });
        for (n, ell, kind, trunc) in [
            (16usize, 1usize, KernelKind::GlobalChirp, true),
            (64, 4, KernelKind::BlockLocal { b: 8 }, false),
            (7, 2, KernelKind::None, true),
        ] {
            let est = m.estimate(n, ell, kind, trunc, dec, 1e-8).unwrap();
            let depth_sum =
                est.shaping.depth + est.kernel.depth + est.fourier.depth + est.decoder.depth;
            let t_sum = est.shaping.t_count
                + est.kernel.t_count
                + est.fourier.t_count
                + est.decoder.t_count;
            assert!((est.two_qubit_depth - depth_sum).abs() < 1e-9 * depth_sum.max(1.0));
            assert!((est.t_count - t_sum).abs() < 1e-9 * t_sum.max(1.0));
            assert!(est.two_qubit_depth >= 0.0 && est.t_count >= 0.0);
        }
    }

    #[test]
    fn synthesis_accuracy_scales_rotation_stages_only() {
        let m = CostModel::default();
        let tight = m.estimate(32, 2, KernelKind::GlobalChirp, true, None, 1e-10).unwrap();
        let loose = m.estimate(32, 2, KernelKind::GlobalChirp, true, None, 1e-5).unwrap();
        assert_eq!(tight.shaping.t_count, loose.shaping.t_count);
        let ratio = tight.kernel.t_count / loose.kernel.t_count;
        assert!((ratio - 2.0).abs() < 1e-12, "log factor ratio {ratio}");
        assert!((tight.fourier.t_count / loose.fourier.t_count - 2.0).abs() < 1e-12);
    }

    #[test]
    fn decoder_term_is_c4_length_degree() {
        let m = CostModel::default();
        let est = m
            .estimate(
                16,
                1,
                KernelKind::None,
                true,
                Some(CoherentDecoder { length: 100, degree: 3 }),
                1e-10,
            )
            .unwrap();
        assert_eq!(est.decoder.depth, 300.0);
        let bad = m.estimate(
            16,
            1,
            KernelKind::None,
            true,
            Some(CoherentDecoder { length: 0, degree: 3 }),
            1e-10,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn estimate_rejects_bad_arguments() {
        let m = CostModel::default();
        assert!(m.estimate(0, 1, KernelKind::None, true, None, 1e-10).is_err());
        assert!(m.estimate(8, 0, KernelKind::None, true, None, 1e-10).is_err());
        assert!(m.estimate(8, 1, KernelKind::None, true, None, 1.5).is_err());
        assert!(m.estimate(8, 1, KernelKind::BlockLocal { b: 0 }, true, None, 1e-10).is_err());
        assert!(m.estimate(8, 1, KernelKind::BlockLocal { b: 9 }, true, None, 1e-10).is_err());
    }

    #[test]
    fn exact_chirp_counts_track_the_quadratic_model_term() {
        // rotations = n + n(n-1)/2 = n^2/2 + n/2, so count / n^2 - 1/2 = 1/(2n)
        for n in [16usize, 64, 256, 1024] {
            let syn = synthesize_chirp(0.3, n).unwrap();
            let count =
                (syn.single_qubit_rotations + syn.two_qubit_controlled_rotations) as f64;
            let model_term = (n * n) as f64;
            assert!(
                (count / model_term - 0.5).abs() <= 0.5 / n as f64 + 1e-12,
                "n={n} deviates from the constant"
            );
        }
    }

    #[test]
    fn reference_frontier_orders_gain_and_depth() {
        let rows = reference_frontier(&CostModel::default()).unwrap();
        assert_eq!(rows.len(), 4);
        let get = |label: &str| rows.iter().find(|r| r.label == label).unwrap();
        let base = get("baseline");
        let mistuned = get("mistuned-global");
        let block = get("block-local");
        let tuned = get("tuned-global");
        assert_eq!(base.relative_depth, 1.0);
        assert_eq!(base.gain, 0.0);
        assert!((base.sigma_k - 1.0 / 31.0).abs() < 1e-12);
        assert!(mistuned.gain.abs() < 1e-9, "mistuned gain {}", mistuned.gain);
        assert_eq!(mistuned.relative_depth, tuned.relative_depth);
        assert!((tuned.sigma_k - 1.0).abs() < 1e-9);
        assert!(base.gain < block.gain && block.gain < tuned.gain);
        assert!(base.relative_depth < block.relative_depth);
        assert!(block.relative_depth < tuned.relative_depth);
        // deterministic across calls
        let again = reference_frontier(&CostModel::default()).unwrap();
        for (x, y) in rows.iter().zip(&again) {
            assert_eq!(x.sigma_k, y.sigma_k);
            assert_eq!(x.gain, y.gain);
        }
    }

    #[test]
    fn frontier_requires_a_baseline() {
        let inst = OpiInstance::quadratic(31, 6, 9, 3).unwrap();
        let kernels = vec![FrontierKernel {
            label: "tuned".into(),
            kernel: KernelSpec::chirp([0, 0, 1], -6.0),
            kind: KernelKind::GlobalChirp,
        }];
        let out = frontier_table(
            &CostModel::default(),
            &inst,
            &kernels,
            &NoiseModel::noiseless(),
            1,
            64,
            2,
            1e-10,
        );
        assert!(out.is_err());
    }

    #[test]
    fn fitted_slopes_separate_global_from_block_local() {
        let m = CostModel::default();
        let ns = grid();
        let kinds = [
            KernelKind::None,
            KernelKind::GlobalChirp,
            KernelKind::BlockLocal { b: 4 },
            KernelKind::BlockLocal { b: 8 },
        ];
        let rows = scaling_table(&m, &ns, &kinds, 4, true).unwrap();
        for (col, want) in [(0usize, 1.0f64), (1, 2.0), (2, 1.0), (3, 1.0)] {
            let pts: Vec<(f64, f64)> =
                rows.iter().map(|r| (r.n as f64, r.depths[col])).collect();
            let slope = fit_log_slope(&pts).unwrap();
            assert!(
                (slope - want).abs() < 0.1,
                "column {col}: slope {slope}, wanted {want}"
            );
        }
        // block-local overhead over the baseline is the same constant at every n
        let ratios: Vec<f64> = rows.iter().map(|r| r.depths[2] / r.depths[0]).collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &r| (l.min(r), h.max(r)));
        assert!(hi - lo < 1e-12 * hi);
    }

    #[test]
    fn log_slope_fit_recovers_pure_power_laws() {
        let square: Vec<(f64, f64)> =
            (1..=12).map(|k| (2f64.powi(k), 4f64.powi(k))).collect();
        assert!((fit_log_slope(&square).unwrap() - 2.0).abs() < 1e-12);
        let pts: Vec<(f64, f64)> = (1..=12)
            .map(|k| {
                let x = 2f64.powi(k);
                (x, 3.0 * x.powf(1.7))
            })
            .collect();
        assert!((fit_log_slope(&pts).unwrap() - 1.7).abs() < 1e-9);
        assert!(fit_log_slope(&[(1.0, 2.0)]).is_err());
        assert!(fit_log_slope(&[(0.0, 2.0), (1.0, 3.0)]).is_err());
    }
}
