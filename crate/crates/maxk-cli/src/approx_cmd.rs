use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use maxk_core::gnn::{approx_demo, ApproxConfig, ApproxNonlinearity, ApproxTarget};

use crate::config::{emit, FileConfig, Metadata};

#[derive(Args)]
pub struct ApproxArgs {
    /// Hidden widths to sweep, comma separated.
    #[arg(long, default_value = "4,16,64,256")]
    r_values: String,

    #[arg(long)]
    epochs: Option<u32>,

    #[arg(long)]
    lr: Option<f64>,

    #[arg(long)]
    momentum: Option<f64>,

    #[arg(long)]
    seed: Option<u64>,

    /// Sample count on the [-1, 1] grid.
    #[arg(long)]
    grid: Option<usize>,

    /// maxk or relu
    #[arg(long)]
    nonlinearity: Option<String>,

    /// square or zero
    #[arg(long)]
    target: Option<String>,

    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: ApproxArgs, file: &FileConfig, threads: usize) -> Result<()> {
    let defaults = ApproxConfig::default();
    let hidden_units: Vec<usize> = args
        .r_values
        .split(',')
        .map(|t| t.trim().parse::<usize>().context("parsing --r-values"))
        .collect::<Result<Vec<_>>>()?;
    let nl_str: String = file.resolve("nonlinearity", args.nonlinearity, "maxk".to_string())?;
    let nonlinearity = ApproxNonlinearity::parse(&nl_str)
        .ok_or_else(|| anyhow::anyhow!("unknown nonlinearity '{nl_str}'"))?;
    let target_str: String = file.resolve("target", args.target, "square".to_string())?;
    let target = ApproxTarget::parse(&target_str)
        .ok_or_else(|| anyhow::anyhow!("unknown target '{target_str}'"))?;

    let cfg = ApproxConfig {
        hidden_units,
        epochs: file.resolve("epochs", args.epochs, defaults.epochs)?,
        lr: file.resolve("lr", args.lr, defaults.lr)?,
        momentum: file.resolve("momentum", args.momentum, defaults.momentum)?,
        seed: file.resolve("seed", args.seed, defaults.seed)?,
        grid_points: file.resolve("grid", args.grid, defaults.grid_points)?,
        nonlinearity,
        target,
    };
    let rows = approx_demo(&cfg)?;

    let mut meta = Metadata::new("approx");
    meta.push("target", target.name());
    meta.push("nonlinearity", nonlinearity.name());
    meta.push("epochs", cfg.epochs);
    meta.push("lr", cfg.lr);
    meta.push("momentum", cfg.momentum);
    meta.push("grid", cfg.grid_points);
    meta.push("threads", threads);
    meta.push("seed", cfg.seed);
    meta.push_timestamp();

    let mut csv = meta.render();
    csv.push_str("hidden_units,k,final_mse\n");
    for row in rows {
        csv.push_str(&format!(
            "{},{},{:e}\n",
            row.hidden_units, row.k, row.final_mse
        ));
    }
    emit(args.out.as_deref(), &csv)
}
