//! Subcommand argument records and handlers. Each handler resolves its
//! parameters through the shared flag > config > default rule and returns a
//! [`Table`](crate::output::Table) ready for rendering.

mod costcmd;
mod ldpccmd;
mod opicmd;
mod selftest;

pub use costcmd::{cost_frontier, cost_scaling, CostFrontierArgs, CostScalingArgs};
pub use ldpccmd::{bp_fer, de_map, de_threshold, BpFerArgs, DeMapArgs, DeThresholdArgs};
pub use opicmd::{
    audit_monotone, headmass, landscape, opi_scan, AuditArgs, HeadmassArgs, LandscapeArgs,
    OpiScanArgs,
};
pub use selftest::selftest;

use kdqi::io::split_seed;
use kdqi::noise::{NoiseModel, Tau};

use crate::config::Resolver;
use crate::CliError;

/// Resolve the common noise-model parameters. The per-run mixing seed
/// defaults to a split of the master seed.
pub(crate) fn resolve_noise(
    resolver: &mut Resolver,
    eta: Option<f64>,
    width: Option<usize>,
    tau: Option<f64>,
    mix_seed: Option<u64>,
    master_seed: u64,
    default_eta: f64,
    default_width: usize,
) -> Result<NoiseModel, CliError> {
    let eta = resolver.get("eta", eta, default_eta)?;
    let width = resolver.get("width", width, default_width)?;
    let tau = resolver.get("tau", tau, 1.0)?;
    let mix_seed = resolver.get("mix-seed", mix_seed, split_seed(master_seed, "mix", 0))?;
    Ok(NoiseModel::new(eta, width, Tau::Constant(tau), mix_seed)?)
}
