use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use maxk_core::{
    render_table, traffic_spgemm_forward, traffic_spmm_baseline, traffic_sspmm_backward,
    CsrGraph, IndexWidth, TrafficParams, TrafficReport,
};

use crate::config::{emit, FileConfig, Metadata};

#[derive(Args)]
pub struct TrafficArgs {
    /// Take N and nnz from a graph file...
    #[arg(long)]
    graph: Option<PathBuf>,

    /// ...or pass them directly (pure arithmetic, nothing is loaded).
    #[arg(long)]
    n: Option<u64>,

    #[arg(long)]
    nnz: Option<u64>,

    #[arg(long)]
    dim_origin: Option<u64>,

    #[arg(long)]
    dim_k: Option<u64>,

    /// Bytes per sp_index entry (1, 2, 4), or the smallest width that fits
    /// dim_origin when omitted.
    #[arg(long)]
    index_bytes: Option<u64>,

    #[arg(long)]
    w: Option<u64>,

    /// table, csv, or json
    #[arg(long, default_value = "table")]
    format: String,

    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn reports_to_csv(meta: &Metadata, reports: &[TrafficReport]) -> String {
    let mut out = meta.render();
    out.push_str("kernel,read_bytes,write_bytes,atomic_ops,reduction_vs_spmm_pct\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.kernel.name(),
            r.read_bytes,
            r.write_bytes,
            r.atomic_ops,
            r.reduction_vs_spmm_pct
        ));
    }
    out
}

pub fn run(args: TrafficArgs, file: &FileConfig, threads: usize) -> Result<()> {
    let (num_nodes, nnz) = match (&args.graph, args.n, args.nnz) {
        (Some(path), None, None) => {
            let g = CsrGraph::load_auto(path)
                .with_context(|| format!("loading graph {}", path.display()))?;
            (g.num_nodes() as u64, g.num_edges() as u64)
        }
        (None, n, e) => {
            let n = file
                .resolve_opt("n", n)?
                .ok_or_else(|| anyhow::anyhow!("need --graph or both --n and --nnz"))?;
            let e = file
                .resolve_opt("nnz", e)?
                .ok_or_else(|| anyhow::anyhow!("need --graph or both --n and --nnz"))?;
            (n, e)
        }
        _ => bail!("--graph conflicts with --n/--nnz"),
    };
    let dim_origin = file.resolve("dim_origin", args.dim_origin, 256)?;
    let dim_k = file.resolve("dim_k", args.dim_k, 16)?;
    let index_bytes = match file.resolve_opt("index_bytes", args.index_bytes)? {
        Some(b) => b,
        None => IndexWidth::auto_for(dim_origin as usize).bytes() as u64,
    };
    let w = file.resolve("w", args.w, 32)?;

    let params = TrafficParams {
        num_nodes,
        nnz,
        dim_origin,
        dim_k,
        index_bytes,
        w,
    };
    let reports = vec![
        traffic_spmm_baseline(params)?,
        traffic_spgemm_forward(params)?,
        traffic_sspmm_backward(params)?,
    ];

    let mut meta = Metadata::new("traffic");
    meta.push("n", num_nodes);
    meta.push("nnz", nnz);
    meta.push("dim_origin", dim_origin);
    meta.push("dim_k", dim_k);
    meta.push("index_bytes", index_bytes);
    meta.push("w", w);
    meta.push("threads", threads);
    meta.push_timestamp();

    let rendered = match args.format.as_str() {
        "table" => format!("{}{}", meta.render(), render_table(&reports)),
        "csv" => reports_to_csv(&meta, &reports),
        "json" => {
            let mut text = serde_json::to_string_pretty(&reports)?;
            text.push('\n');
            text
        }
        other => bail!("unknown format '{other}' (expected table, csv, or json)"),
    };
    emit(args.out.as_deref(), &rendered)
}
