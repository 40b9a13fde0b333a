use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use maxk_core::{build_plan, plan_stats, CsrGraph};

use crate::config::{FileConfig, Metadata};

#[derive(Args)]
pub struct PartitionArgs {
    /// Input graph (.mtx Matrix Market, otherwise binary edge list).
    #[arg(long)]
    graph: PathBuf,

    #[arg(long)]
    dim_k: Option<usize>,

    /// Max workload units (edges) per edge group.
    #[arg(long)]
    w: Option<usize>,

    /// Output plan file (EGPL).
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: PartitionArgs, file: &FileConfig, threads: usize) -> Result<()> {
    let dim_k = file.resolve("dim_k", args.dim_k, 16)?;
    let w = file.resolve("w", args.w, 32)?;
    if dim_k == 0 || w == 0 {
        anyhow::bail!("dim_k and w must be at least 1");
    }

    let graph = CsrGraph::load_auto(&args.graph)
        .with_context(|| format!("loading graph {}", args.graph.display()))?;
    let plan = build_plan(&graph, dim_k, w);
    plan.save(&args.out)
        .with_context(|| format!("writing plan {}", args.out.display()))?;

    let stats = plan_stats(&plan);
    let mut meta = Metadata::new("partition");
    meta.push("graph", args.graph.display());
    meta.push("nodes", graph.num_nodes());
    meta.push("nnz", graph.num_edges());
    meta.push("dim_k", dim_k);
    meta.push("w", w);
    meta.push("threads", threads);
    meta.push("out", args.out.display());
    meta.push_timestamp();
    print!("{}", meta.render());
    println!(
        "groups={} max_group={} min_group={} warps_used={} imbalance={:.4}",
        stats.group_count,
        stats.max_group_size,
        stats.min_group_size,
        stats.warps_used,
        stats.imbalance_ratio
    );
    Ok(())
}
