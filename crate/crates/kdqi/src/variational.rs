//! Variational tuning of interference kernels.
//!
//! # Overview
//!
//! The two-parameter ansatz wraps a polynomial phase instance: `theta1` is a
//! chirp rate applied against the quadratic phase (the tuned instance sits
//! at `theta1 = a`, the quadratic coefficient), and `theta2` drives one
//! layer of real Givens rotations on disjoint adjacent index pairs (identity
//! at `theta2 = 0`). The objective is the noise-weighted head mass of the
//! resulting spectrum.
//!
//! Gradients are estimated by central finite differences with the head set
//! frozen at the stencil center. With a frozen head the objective is a
//! quadratic form with a bounded generator, so every finite-difference
//! estimate obeys `|grad| <= 2 ||G||` exactly; [`gradient_bound_check`]
//! samples this invariant. [`optimize`] runs projected gradient ascent with
//! a decaying step, optionally with binomial shot noise on every objective
//! evaluation. [`block_kernel_search`] instead optimizes a width-limited
//! kernel family (banded real rotations on digit blocks) by coordinate
//! ascent, reporting the gain over the identity kernel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::split_seed;
use crate::kernels::{interfere, KernelSpec};
use crate::noise::NoiseModel;
use crate::opi::{opi_shaped_state, OpiInstance};
use crate::spectral::{fourier, head_set, kahan_sum, HeadSet, Spectrum};

/// Two-parameter kernel ansatz around a polynomial phase instance.
#[derive(Debug, Clone)]
pub struct VariationalAnsatz {
    pub instance: OpiInstance,
    /// Head size of the objective.
    pub d: usize,
    pub nm: NoiseModel,
    shaped: Spectrum,
}

impl VariationalAnsatz {
    pub fn new(instance: OpiInstance, d: usize, nm: NoiseModel) -> Result<Self> {
        if d == 0 || d > instance.p as usize {
            return Err(Error::Argument(format!(
                "head size {d} outside 1..={}",
                instance.p
            )));
        }
        let shaped = opi_shaped_state(&instance)?;
        Ok(VariationalAnsatz { instance, d, nm, shaped })
    }

    /// Operator norms of the two parameter generators: the chirp phase ramp
    /// `2 pi (p-1)/p` and the Givens layer generator `1`.
    pub fn generator_norms(&self) -> (f64, f64) {
        let p = self.instance.p as f64;
        (std::f64::consts::TAU * (p - 1.0) / p, 1.0)
    }

    /// Measured spectrum at the given parameters.
    pub fn spectrum_at(&self, theta1: f64, theta2: f64) -> Result<Spectrum> {
        let chirped = crate::kernels::apply_kernel(
            &KernelSpec::chirp([0, 0, 1], -theta1),
            &self.shaped,
        )?;
        let mixed = givens_layer(&chirped, theta2);
        fourier(&mixed)
    }

    /// Noise-weighted head mass with the head chosen by the spectrum itself.
    pub fn sigma_exact(&self, theta1: f64, theta2: f64) -> Result<f64> {
        let alpha = self.spectrum_at(theta1, theta2)?;
        let head = head_set(&alpha, self.d)?;
        Ok(self.weighted_mass(&alpha, &head))
    }

    /// Noise-weighted mass of a frozen head set.
    pub fn sigma_for_head(&self, theta1: f64, theta2: f64, head: &HeadSet) -> Result<f64> {
        let alpha = self.spectrum_at(theta1, theta2)?;
        Ok(self.weighted_mass(&alpha, head))
    }

    fn weighted_mass(&self, alpha: &Spectrum, head: &HeadSet) -> f64 {
        let domain = alpha.domain();
        kahan_sum(
            head.indices()
                .iter()
                .map(|&s| self.nm.eta_k(domain, s) * alpha.probability(s)),
        )
    }
}

/// One layer of real Givens rotations on disjoint adjacent pairs
/// `(0,1), (2,3), ..`; a trailing unpaired index is left alone.
fn givens_layer(s: &Spectrum, theta: f64) -> Spectrum {
    let (c, sn) = (theta.cos(), theta.sin());
    let mut amps = s.amps().to_vec();
    let mut i = 0;
    while i + 1 < amps.len() {
        let (a, b) = (amps[i], amps[i + 1]);
        amps[i] = a * c - b * sn;
        amps[i + 1] = a * sn + b * c;
        i += 2;
    }
    Spectrum::carrying_norm(s.domain(), amps, s.norm_before())
}

/// Binomial shot estimate of a success probability.
pub fn shot_estimate(sigma: f64, shots: u64, seed: u64) -> f64 {
    if shots == 0 {
        return sigma;
    }
    let p = sigma.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = Binomial::new(shots, p).expect("clamped probability").sample(&mut rng);
    draw as f64 / shots as f64
}

/// One grid point of a parameter-landscape scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandscapePoint {
    pub theta1: f64,
    pub theta2: f64,
    pub sigma_exact: f64,
    /// Binomial estimate of `sigma_exact`, or the exact value when shots
    /// are disabled.
    pub sigma_shot: f64,
    /// Fixed-head central differences.
    pub grad1_fd: f64,
    pub grad2_fd: f64,
}

/// Scan the objective over a parameter grid. Deterministic for a fixed seed,
/// independent of thread count.
pub fn landscape_scan(
    ansatz: &VariationalAnsatz,
    grid1: &[f64],
    grid2: &[f64],
    shots: Option<u64>,
    fd_step: f64,
    seed: u64,
) -> Result<Vec<LandscapePoint>> {
    if grid1.is_empty() || grid2.is_empty() {
        return Err(Error::Argument("landscape grids must be nonempty".into()));
    }
    if fd_step <= 0.0 {
        return Err(Error::Argument("finite-difference step must be positive".into()));
    }
    let points: Vec<(usize, f64, f64)> = grid1
        .iter()
        .enumerate()
        .flat_map(|(i, &t1)| {
            grid2
                .iter()
                .enumerate()
                .map(move |(j, &t2)| (i * grid2.len() + j, t1, t2))
        })
        .collect();
    points
        .par_iter()
        .map(|&(idx, t1, t2)| {
            let alpha = ansatz.spectrum_at(t1, t2)?;
            let head = head_set(&alpha, ansatz.d)?;
            let sigma_exact = ansatz.weighted_mass(&alpha, &head);
            let sigma_shot = match shots {
                Some(n) => shot_estimate(sigma_exact, n, split_seed(seed, "landscape", idx as u64)),
                None => sigma_exact,
            };
            let g1 = (ansatz.sigma_for_head(t1 + fd_step, t2, &head)?
                - ansatz.sigma_for_head(t1 - fd_step, t2, &head)?)
                / (2.0 * fd_step);
            let g2 = (ansatz.sigma_for_head(t1, t2 + fd_step, &head)?
                - ansatz.sigma_for_head(t1, t2 - fd_step, &head)?)
                / (2.0 * fd_step);
            Ok(LandscapePoint {
                theta1: t1,
                theta2: t2,
                sigma_exact,
                sigma_shot,
                grad1_fd: g1,
                grad2_fd: g2,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GradientSample {
    pub theta1: f64,
    pub theta2: f64,
    pub grad1: f64,
    pub grad2: f64,
    pub bound1: f64,
    pub bound2: f64,
}

impl GradientSample {
    pub fn within_bound(&self) -> bool {
        self.grad1.abs() <= self.bound1 + 1e-9 && self.grad2.abs() <= self.bound2 + 1e-9
    }
}

/// Sample fixed-head finite-difference gradients at random parameter points
/// and pair them with the generator bounds `2 ||G||`.
pub fn gradient_bound_check(
    ansatz: &VariationalAnsatz,
    samples: usize,
    window1: (f64, f64),
    window2: (f64, f64),
    fd_step: f64,
    seed: u64,
) -> Result<Vec<GradientSample>> {
    if samples == 0 {
        return Err(Error::Argument("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n1, n2) = ansatz.generator_norms();
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let t1 = rng.gen_range(window1.0..=window1.1);
        let t2 = rng.gen_range(window2.0..=window2.1);
        let alpha = ansatz.spectrum_at(t1, t2)?;
        let head = head_set(&alpha, ansatz.d)?;
        let g1 = (ansatz.sigma_for_head(t1 + fd_step, t2, &head)?
            - ansatz.sigma_for_head(t1 - fd_step, t2, &head)?)
            / (2.0 * fd_step);
        let g2 = (ansatz.sigma_for_head(t1, t2 + fd_step, &head)?
            - ansatz.sigma_for_head(t1, t2 - fd_step, &head)?)
            / (2.0 * fd_step);
        out.push(GradientSample {
            theta1: t1,
            theta2: t2,
            grad1: g1,
            grad2: g2,
            bound1: 2.0 * n1,
            bound2: 2.0 * n2,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub max_iters: usize,
    /// Objective level that counts as converged.
    pub target: f64,
    pub fd_step: f64,
    /// Base learning rate; the step at iteration `t` is `lr0 / sqrt(t)`.
    pub lr0: f64,
    pub window1: (f64, f64),
    pub window2: (f64, f64),
    /// Shot budget per objective evaluation; exact when absent.
    pub shots: Option<u64>,
    pub seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            max_iters: 40,
            target: 0.9,
            fd_step: 0.02,
            lr0: 0.3,
            window1: (-1.0, 1.0),
            window2: (-1.3, 1.3),
            shots: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimizeStep {
    pub iter: usize,
    pub theta1: f64,
    pub theta2: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizeTrace {
    pub steps: Vec<OptimizeStep>,
    pub best_theta: (f64, f64),
    pub best_sigma: f64,
    /// First iteration whose exact objective reached the target.
    pub converged_iter: Option<usize>,
}

/// Projected gradient ascent with decaying steps and best-so-far tracking.
pub fn optimize(
    ansatz: &VariationalAnsatz,
    start: (f64, f64),
    opts: &OptimizeOptions,
) -> Result<OptimizeTrace> {
    if opts.max_iters == 0 || opts.fd_step <= 0.0 || opts.lr0 <= 0.0 {
        return Err(Error::Argument("bad optimizer options".into()));
    }
    let clamp = |t: f64, w: (f64, f64)| t.clamp(w.0, w.1);
    let mut t1 = clamp(start.0, opts.window1);
    let mut t2 = clamp(start.1, opts.window2);
    let mut steps = Vec::with_capacity(opts.max_iters + 1);
    let mut best_theta = (t1, t2);
    let mut best_sigma = ansatz.sigma_exact(t1, t2)?;
    let mut converged_iter = if best_sigma >= opts.target { Some(0) } else { None };
    steps.push(OptimizeStep { iter: 0, theta1: t1, theta2: t2, sigma: best_sigma });
    let mut eval_counter = 0u64;
    let mut measure = |sigma: f64| -> f64 {
        match opts.shots {
            Some(n) => {
                eval_counter += 1;
                shot_estimate(sigma, n, split_seed(opts.seed, "optimize", eval_counter))
            }
            None => sigma,
        }
    };
    for iter in 1..=opts.max_iters {
        if converged_iter.is_some() {
            break;
        }
        let alpha = ansatz.spectrum_at(t1, t2)?;
        let head = head_set(&alpha, ansatz.d)?;
        let h = opts.fd_step;
        let g1 = (measure(ansatz.sigma_for_head(t1 + h, t2, &head)?)
            - measure(ansatz.sigma_for_head(t1 - h, t2, &head)?))
            / (2.0 * h);
        let g2 = (measure(ansatz.sigma_for_head(t1, t2 + h, &head)?)
            - measure(ansatz.sigma_for_head(t1, t2 - h, &head)?))
            / (2.0 * h);
        let lr = opts.lr0 / (iter as f64).sqrt();
        t1 = clamp(t1 + lr * g1, opts.window1);
        t2 = clamp(t2 + lr * g2, opts.window2);
        let sigma = ansatz.sigma_exact(t1, t2)?;
        steps.push(OptimizeStep { iter, theta1: t1, theta2: t2, sigma });
        if sigma > best_sigma {
            best_sigma = sigma;
            best_theta = (t1, t2);
        }
        if sigma >= opts.target {
            converged_iter = Some(iter);
        }
    }
    Ok(OptimizeTrace { steps, best_theta, best_sigma, converged_iter })
}

/// Outcome of a width-limited kernel search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockSearchResult {
    pub sigma_identity: f64,
    pub sigma_best: f64,
    /// `sigma_best - sigma_identity`; never negative because the identity
    /// kernel is always a candidate.
    pub gain: f64,
    pub best_params: Vec<f64>,
    pub evaluations: usize,
    /// Digit width of each block.
    pub width: usize,
    /// Dimension of one block, `base^width`.
    pub dim: usize,
}

impl BlockSearchResult {
    /// Rebuild the best kernel found by the search.
    pub fn kernel(&self) -> Result<KernelSpec> {
        let per_block = self.dim - 1;
        let blocks = self.best_params.len() / per_block;
        let mats: Vec<Vec<Complex64>> = (0..blocks)
            .map(|b| banded_block(self.dim, &self.best_params[b * per_block..(b + 1) * per_block]))
            .collect();
        KernelSpec::block_local(self.width, mats)
    }
}

/// Banded real rotations on one digit block: Givens angles between adjacent
/// levels, applied in ascending level order.
fn banded_block(dim: usize, angles: &[f64]) -> Vec<Complex64> {
    let mut u = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        u[i * dim + i] = Complex64::new(1.0, 0.0);
    }
    for (lvl, &theta) in angles.iter().enumerate() {
        let (c, s) = (theta.cos(), theta.sin());
        // rotate rows lvl and lvl+1 of the accumulated matrix
        for col in 0..dim {
            let a = u[lvl * dim + col];
            let b = u[(lvl + 1) * dim + col];
            u[lvl * dim + col] = a * c - b * s;
            u[(lvl + 1) * dim + col] = a * s + b * c;
        }
    }
    u
}

/// Coordinate-ascent search over width-limited banded rotation kernels.
/// Starts from the identity and the best of a few random restarts, so the
/// reported gain is nonnegative.
pub fn block_kernel_search(
    g: &Spectrum,
    nm: &NoiseModel,
    d: usize,
    width: usize,
    restarts: usize,
    sweeps: usize,
    seed: u64,
) -> Result<BlockSearchResult> {
    let domain = g.domain();
    let digits = domain.digits();
    if width == 0 || digits % width != 0 {
        return Err(Error::Argument(format!(
            "block width {width} cannot tile {digits} digits"
        )));
    }
    let dim = domain.base().pow(width as u32);
    let blocks = digits / width;
    let per_block = dim - 1;
    let nparams = blocks * per_block;
    let mut evaluations = 0usize;
    let mut eval = |params: &[f64]| -> Result<f64> {
        evaluations += 1;
        let mats: Vec<Vec<Complex64>> = (0..blocks)
            .map(|b| banded_block(dim, &params[b * per_block..(b + 1) * per_block]))
            .collect();
        let kernel = KernelSpec::block_local(width, mats)?;
        let alpha = interfere(&kernel, g)?;
        let head = head_set(&alpha, d)?;
        Ok(kahan_sum(
            head.indices()
                .iter()
                .map(|&s| nm.eta_k(domain, s) * alpha.probability(s)),
        ))
    };

    let identity = vec![0.0f64; nparams];
    let sigma_identity = eval(&identity)?;
    let mut best_params = identity;
    let mut best_sigma = sigma_identity;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        let candidate: Vec<f64> = (0..nparams).map(|_| rng.gen_range(-0.8..0.8)).collect();
        let sigma = eval(&candidate)?;
        if sigma > best_sigma {
            best_sigma = sigma;
            best_params = candidate;
        }
    }
    let mut step = 0.4f64;
    for _ in 0..sweeps {
        for i in 0..nparams {
            for dir in [-1.0, 1.0] {
                let mut candidate = best_params.clone();
                candidate[i] += dir * step;
                let sigma = eval(&candidate)?;
                if sigma > best_sigma {
                    best_sigma = sigma;
                    best_params = candidate;
                }
            }
        }
        step *= 0.5;
    }
    Ok(BlockSearchResult {
        sigma_identity,
        sigma_best: best_sigma,
        gain: best_sigma - sigma_identity,
        best_params,
        evaluations,
        width,
        dim,
    })
}
