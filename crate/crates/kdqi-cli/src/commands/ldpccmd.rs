//! Code-ensemble subcommands: recursion maps, thresholds, and finite-length
//! frame-error scans.

use clap::Args;

use kdqi::io::split_seed;
use kdqi::ldpc::{
    bla_shift, build_code, de_map as recursion_map, de_map_deriv as recursion_map_deriv,
    de_threshold as threshold_of, fer_scan, Channel, LdpcEnsemble,
};

use crate::config::{linspace, parse_list, Resolver};
use crate::output::{fmt_f64, Table};
use crate::CliError;

#[derive(Args)]
pub struct DeMapArgs {
    #[arg(long)]
    dv: Option<u32>,
    #[arg(long)]
    dc: Option<u32>,
    /// Erasure rate of the unshifted map
    #[arg(long)]
    eps: Option<f64>,
    /// Grid points on [0, 1]
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Comma-separated shaping-advantage levels for the shifted-map family
    #[arg(long)]
    dsl_list: Option<String>,
}

pub fn de_map(args: &DeMapArgs, r: &mut Resolver) -> Result<Table, CliError> {
    let dv = r.get("dv", args.dv, 3)?;
    let dc = r.get("dc", args.dc, 6)?;
    let eps = r.get("eps", args.eps, 0.4)?;
    let points = r.get("points", args.points, 101)?;
    let kappa = r.get("kappa", args.kappa, 1.0)?;
    let dsl_raw = r.get("dsl-list", args.dsl_list.clone(), "0.02,0.04,0.06".to_string())?;
    let dsl: Vec<f64> = parse_list(&dsl_raw, "dsl-list")?;
    let ens = LdpcEnsemble::new(dv, dc)?;
    let mut shifted = Vec::with_capacity(dsl.len());
    for &delta in &dsl {
        shifted.push(bla_shift(eps, kappa, delta)?);
    }
    let mut columns: Vec<String> = vec!["x".into(), "phi".into(), "dphi".into()];
    for delta in &dsl {
        columns.push(format!("phi_shift_{delta}"));
    }
    let col_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let mut table = Table::new(&col_refs);
    table.add_summary("eps", fmt_f64(eps));
    table.add_summary("kappa", fmt_f64(kappa));
    for x in linspace(0.0, 1.0, points)? {
        let mut row = vec![
            fmt_f64(x),
            fmt_f64(recursion_map(ens, eps, x)),
            fmt_f64(recursion_map_deriv(ens, eps, x)),
        ];
        for &eps_eff in &shifted {
            row.push(fmt_f64(recursion_map(ens, eps_eff, x)));
        }
        table.push_row(row);
    }
    Ok(table)
}

#[derive(Args)]
pub struct DeThresholdArgs {
    #[arg(long)]
    dv: Option<u32>,
    #[arg(long)]
    dc: Option<u32>,
    /// Bisection tolerance on the threshold
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated dv:dc pairs; overrides --dv/--dc
    #[arg(long)]
    ensembles: Option<String>,
}

pub fn de_threshold(args: &DeThresholdArgs, r: &mut Resolver) -> Result<Table, CliError> {
    let dv = r.get("dv", args.dv, 3)?;
    let dc = r.get("dc", args.dc, 6)?;
    let tol = r.get("tol", args.tol, 1e-6)?;
    let ensembles_raw = r.get("ensembles", args.ensembles.clone(), format!("{dv}:{dc}"))?;
    let mut pairs = Vec::new();
    for chunk in ensembles_raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (dv_raw, dc_raw) = chunk.split_once(':').ok_or_else(|| {
            CliError::Usage(format!("ensembles entry {chunk:?} is not dv:dc"))
        })?;
        let dv: u32 = dv_raw
            .parse()
            .map_err(|_| CliError::Usage(format!("bad dv in {chunk:?}")))?;
        let dc: u32 = dc_raw
            .parse()
            .map_err(|_| CliError::Usage(format!("bad dc in {chunk:?}")))?;
        pairs.push((dv, dc));
    }
    let mut table = Table::new(&["dv", "dc", "rate", "eps_star", "x_star"]);
    table.add_summary("tol", fmt_f64(tol));
    for (dv, dc) in pairs {
        let ens = LdpcEnsemble::new(dv, dc)?;
        let found = threshold_of(ens, tol)?;
        table.push_row(vec![
            dv.to_string(),
            dc.to_string(),
            fmt_f64(ens.design_rate()),
            fmt_f64(found.eps_star),
            fmt_f64(found.x_star),
        ]);
    }
    Ok(table)
}

#[derive(Args)]
pub struct BpFerArgs {
    /// Block length
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dv: Option<u32>,
    #[arg(long)]
    dc: Option<u32>,
    /// Channel family: bec, bsc, or awgn
    #[arg(long)]
    channel: Option<String>,
    /// Comma-separated channel parameters (erasure/crossover rate, or Eb/N0 dB)
    #[arg(long)]
    params: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
}

pub fn bp_fer(args: &BpFerArgs, r: &mut Resolver, seed: u64) -> Result<Table, CliError> {
    let n = r.get("n", args.n, 1024)?;
    let dv = r.get("dv", args.dv, 3)?;
    let dc = r.get("dc", args.dc, 6)?;
    let channel = r.get("channel", args.channel.clone(), "bec".to_string())?;
    let default_params = match channel.as_str() {
        "bec" => "0.3,0.35,0.4,0.425,0.45,0.475",
        "bsc" => "0.04,0.05,0.06,0.07,0.08,0.09",
        "awgn" => "0.5,0.8,1,1.2,1.5,2",
        other => return Err(CliError::Usage(format!("unknown channel {other:?}"))),
    };
    let params_raw = r.get("params", args.params.clone(), default_params.to_string())?;
    let params: Vec<f64> = parse_list(&params_raw, "params")?;
    let trials = r.get("trials", args.trials, 200)?;
    let max_iters = r.get("max-iters", args.max_iters, 50)?;
    let ens = LdpcEnsemble::new(dv, dc)?;
    let code = build_code(ens, n, split_seed(seed, "code", 0))?;
    let channels: Vec<Channel> = params
        .iter()
        .map(|&v| match channel.as_str() {
            "bec" => Channel::Bec { eps: v },
            "bsc" => Channel::Bsc { eps: v },
            _ => Channel::Awgn { ebn0_db: v },
        })
        .collect();
    let scan = fer_scan(&code, &channels, trials, max_iters, seed)?;
    let mut table =
        Table::new(&["param", "trials", "errors", "fer", "wilson_lo", "wilson_hi"]);
    table.add_summary("channel", &scan.channel_kind);
    table.add_summary("n", n);
    table.add_summary("rate", fmt_f64(code.rate()));
    table.add_summary(
        "midpoint",
        scan.midpoint.map(fmt_f64).unwrap_or_else(|| "none".to_string()),
    );
    for row in &scan.rows {
        table.push_row(vec![
            fmt_f64(row.param),
            row.trials.to_string(),
            row.errors.to_string(),
            fmt_f64(row.fer),
            fmt_f64(row.wilson_lo),
            fmt_f64(row.wilson_hi),
        ]);
    }
    Ok(table)
}
