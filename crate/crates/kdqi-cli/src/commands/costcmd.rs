//! Resource-model subcommands: the reference frontier and depth scaling.

use clap::Args;

use kdqi::cost::{
    fit_log_slope, reference_frontier, scaling_table, CostModel, KernelKind,
};

use crate::config::{parse_list, Resolver};
use crate::output::{fmt_f64, Table};
use crate::CliError;

fn resolve_model(
    r: &mut Resolver,
    c1: Option<f64>,
    c2: Option<f64>,
    c3: Option<f64>,
    c4: Option<f64>,
    t_rate: Option<f64>,
) -> Result<CostModel, CliError> {
    Ok(CostModel {
        c1: r.get("c1", c1, 1.0)?,
        c2: r.get("c2", c2, 1.0)?,
        c3: r.get("c3", c3, 1.0)?,
        c4: r.get("c4", c4, 1.0)?,
        t_rate: r.get("t-rate", t_rate, 4.0)?,
    })
}

#[derive(Args)]
pub struct CostFrontierArgs {
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    c3: Option<f64>,
    #[arg(long)]
    c4: Option<f64>,
    #[arg(long)]
    t_rate: Option<f64>,
}

pub fn cost_frontier(args: &CostFrontierArgs, r: &mut Resolver) -> Result<Table, CliError> {
    let model = resolve_model(r, args.c1, args.c2, args.c3, args.c4, args.t_rate)?;
    let rows = reference_frontier(&model)?;
    let mut table =
        Table::new(&["label", "relative_depth", "gain", "sigma_k", "depth", "t_count"]);
    for row in &rows {
        table.push_row(vec![
            row.label.clone(),
            fmt_f64(row.relative_depth),
            fmt_f64(row.gain),
            fmt_f64(row.sigma_k),
            fmt_f64(row.depth),
            fmt_f64(row.t_count),
        ]);
    }
    Ok(table)
}

#[derive(Args)]
pub struct CostScalingArgs {
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    c3: Option<f64>,
    #[arg(long)]
    c4: Option<f64>,
    #[arg(long)]
    t_rate: Option<f64>,
    /// Shaping polynomial degree
    #[arg(long)]
    ell: Option<usize>,
    /// Grid spans powers of two from 2^log-n-min to 2^log-n-max
    #[arg(long)]
    log_n_min: Option<u32>,
    #[arg(long)]
    log_n_max: Option<u32>,
    /// Comma-separated block widths
    #[arg(long)]
    b_list: Option<String>,
    /// Model the transform with a truncated stage (linear depth)
    #[arg(long)]
    truncated: Option<bool>,
}

pub fn cost_scaling(args: &CostScalingArgs, r: &mut Resolver) -> Result<Table, CliError> {
    let model = resolve_model(r, args.c1, args.c2, args.c3, args.c4, args.t_rate)?;
    let ell = r.get("ell", args.ell, 4)?;
    let log_n_min = r.get("log-n-min", args.log_n_min, 4)?;
    let log_n_max = r.get("log-n-max", args.log_n_max, 14)?;
    let b_raw = r.get("b-list", args.b_list.clone(), "4,8".to_string())?;
    let truncated = r.get("truncated", args.truncated, true)?;
    if log_n_min >= log_n_max {
        return Err(CliError::Usage("log-n-min must be below log-n-max".into()));
    }
    let bs: Vec<usize> = parse_list(&b_raw, "b-list")?;
    let ns: Vec<usize> = (log_n_min..=log_n_max).map(|k| 1usize << k).collect();
    let mut kinds = vec![KernelKind::None, KernelKind::GlobalChirp];
    let mut columns: Vec<String> =
        vec!["n".into(), "depth_none".into(), "depth_global".into()];
    for &b in &bs {
        kinds.push(KernelKind::BlockLocal { b });
        columns.push(format!("depth_block_{b}"));
    }
    let rows = scaling_table(&model, &ns, &kinds, ell, truncated)?;
    let col_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let mut table = Table::new(&col_refs);
    for (col, name) in columns.iter().enumerate().skip(1) {
        let pts: Vec<(f64, f64)> =
            rows.iter().map(|row| (row.n as f64, row.depths[col - 1])).collect();
        let slope = fit_log_slope(&pts)?;
        table.add_summary(&format!("slope_{}", name.trim_start_matches("depth_")), fmt_f64(slope));
    }
    for row in &rows {
        let mut cells = vec![row.n.to_string()];
        cells.extend(row.depths.iter().map(|&d| fmt_f64(d)));
        table.push_row(cells);
    }
    Ok(table)
}
