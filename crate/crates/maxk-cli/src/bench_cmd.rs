use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use maxk_core::{
    build_plan, dense_spmm, dense_spmm_counted, maxk_forward, spgemm_forward_counted,
    sspmm_backward_counted, traffic_spgemm_forward, traffic_spmm_baseline,
    traffic_sspmm_backward, CsrGraph, DenseMatrix, ExecMode, IndexWidth, TrafficCounter,
    TrafficParams,
};

use crate::config::{emit, FileConfig, Metadata};

/// CPU analog of the kernel sweep; timings are CPU-only and are labeled as
/// not comparable to device latencies. Counted traffic is the
/// cross-checkable quantity.
#[derive(Args)]
pub struct BenchArgs {
    /// Input graph (.mtx Matrix Market, otherwise binary edge list).
    #[arg(long)]
    graph: PathBuf,

    #[arg(long)]
    dim_origin: Option<usize>,

    /// Single k; overrides the sweep.
    #[arg(long)]
    dim_k: Option<usize>,

    /// Comma-separated k values (values above dim_origin are skipped).
    #[arg(long, default_value = "2,4,8,16,32,64,96,128,192")]
    k_sweep: String,

    /// sp_index width in bytes (1, 2, 4) or "auto".
    #[arg(long, default_value = "auto")]
    index_bytes: String,

    #[arg(long)]
    w: Option<usize>,

    /// det or par
    #[arg(long)]
    mode: Option<String>,

    #[arg(long)]
    seed: Option<u64>,

    /// Timed repetitions per kernel.
    #[arg(long)]
    repeat: Option<u32>,

    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct BenchRow {
    kernel: &'static str,
    dim_k: usize,
    mean_ms: f64,
    min_ms: f64,
    counter: TrafficCounter,
    analytical_read_bytes: u64,
    reduction_read_pct: f64,
    speedup_vs_dense: f64,
    sanity_max_abs_err: f64,
}

fn time_runs<F: FnMut() -> Result<()>>(repeat: u32, mut f: F) -> Result<(f64, f64)> {
    let mut total = 0.0f64;
    let mut min = f64::INFINITY;
    for _ in 0..repeat {
        let t0 = Instant::now();
        f()?;
        let ms = t0.elapsed().as_secs_f64() * 1e3;
        total += ms;
        min = min.min(ms);
    }
    Ok((total / repeat as f64, min))
}

pub fn run(args: BenchArgs, file: &FileConfig, threads: usize) -> Result<()> {
    let dim_origin = file.resolve("dim_origin", args.dim_origin, 256)?;
    let w = file.resolve("w", args.w, 32)?;
    let seed = file.resolve("seed", args.seed, 0)?;
    let repeat = file.resolve("repeat", args.repeat, 3)?.max(1);
    let mode_str: String = file.resolve("mode", args.mode, "det".to_string())?;
    let mode = ExecMode::parse(&mode_str)
        .ok_or_else(|| anyhow::anyhow!("unknown mode '{mode_str}' (expected det or par)"))?;
    let width = match args.index_bytes.as_str() {
        "auto" => IndexWidth::auto_for(dim_origin),
        other => {
            let b: u8 = other.parse().context("parsing --index-bytes")?;
            IndexWidth::from_bytes(b)
                .ok_or_else(|| anyhow::anyhow!("index bytes must be 1, 2, or 4"))?
        }
    };

    let graph = CsrGraph::load_auto(&args.graph)
        .with_context(|| format!("loading graph {}", args.graph.display()))?;
    let n = graph.num_nodes();

    // memory guard: dense input + output + oracle copies
    let approx_bytes = 4usize
        .checked_mul(n)
        .and_then(|b| b.checked_mul(dim_origin))
        .and_then(|b| b.checked_mul(4))
        .ok_or_else(|| anyhow::anyhow!("size overflow"))?;
    const MEMORY_CAP_BYTES: usize = 4 << 30;
    if approx_bytes > MEMORY_CAP_BYTES {
        bail!(
            "refusing to allocate ~{approx_bytes} bytes for {n} nodes x {dim_origin} dims (cap {MEMORY_CAP_BYTES})"
        );
    }

    let ks: Vec<usize> = match args.dim_k {
        Some(k) => vec![k],
        None => args
            .k_sweep
            .split(',')
            .map(|t| t.trim().parse::<usize>().context("parsing --k-sweep"))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|&k| k >= 1 && k <= dim_origin)
            .collect(),
    };
    if ks.is_empty() {
        bail!("no k values <= dim_origin {dim_origin} to run");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DenseMatrix::from_fn(n, dim_origin, |_, _| rng.random_range(-1.0f32..1.0));
    let d = DenseMatrix::from_fn(n, dim_origin, |_, _| rng.random_range(-1.0f32..1.0));

    // dense baseline timed once; it does not depend on k
    let (dense_mean, dense_min) = time_runs(repeat, || {
        dense_spmm(&graph, &x).map(|_| ()).map_err(Into::into)
    })?;
    let (_, dense_counter) = dense_spmm_counted(&graph, &x)?;

    let mut rows = Vec::new();
    let base_params = |k: usize| TrafficParams {
        num_nodes: n as u64,
        nnz: graph.num_edges() as u64,
        dim_origin: dim_origin as u64,
        dim_k: k as u64,
        index_bytes: width.bytes() as u64,
        w: w as u64,
    };
    rows.push(BenchRow {
        kernel: "dense_spmm",
        dim_k: dim_origin,
        mean_ms: dense_mean,
        min_ms: dense_min,
        counter: dense_counter,
        analytical_read_bytes: traffic_spmm_baseline(base_params(dim_origin))?.read_bytes,
        reduction_read_pct: 0.0,
        speedup_vs_dense: 1.0,
        sanity_max_abs_err: 0.0,
    });

    for &k in &ks {
        let (xs, _) = maxk_forward(&x, k, Some(width))?;
        let plan = build_plan(&graph, k, w);
        let params = base_params(k);

        let (fwd_out, fwd_counter) = spgemm_forward_counted(&graph, &xs, &plan, mode)?;
        let (fwd_mean, fwd_min) = time_runs(repeat, || {
            spgemm_forward_counted(&graph, &xs, &plan, mode)
                .map(|_| ())
                .map_err(Into::into)
        })?;
        let oracle = dense_spmm(&graph, &xs.densify())?;
        let sanity = fwd_out.max_abs_diff(&oracle);
        let fwd_model = traffic_spgemm_forward(params)?;
        rows.push(BenchRow {
            kernel: "spgemm",
            dim_k: k,
            mean_ms: fwd_mean,
            min_ms: fwd_min,
            counter: fwd_counter,
            analytical_read_bytes: fwd_model.read_bytes,
            reduction_read_pct: fwd_model.reduction_vs_spmm_pct,
            speedup_vs_dense: dense_mean / fwd_mean,
            sanity_max_abs_err: sanity,
        });

        let (_, bwd_counter) = sspmm_backward_counted(&graph, &d, &xs, &plan, mode)?;
        let (bwd_mean, bwd_min) = time_runs(repeat, || {
            sspmm_backward_counted(&graph, &d, &xs, &plan, mode)
                .map(|_| ())
                .map_err(Into::into)
        })?;
        let bwd_model = traffic_sspmm_backward(params)?;
        rows.push(BenchRow {
            kernel: "sspmm",
            dim_k: k,
            mean_ms: bwd_mean,
            min_ms: bwd_min,
            counter: bwd_counter,
            analytical_read_bytes: bwd_model.read_bytes,
            reduction_read_pct: bwd_model.reduction_vs_spmm_pct,
            speedup_vs_dense: dense_mean / bwd_mean,
            sanity_max_abs_err: 0.0,
        });
    }

    let mut meta = Metadata::new("bench");
    meta.push("graph", args.graph.display());
    meta.push("nodes", n);
    meta.push("nnz", graph.num_edges());
    meta.push("dim_origin", dim_origin);
    meta.push("index_bytes", width.bytes());
    meta.push("w", w);
    meta.push("mode", mode.name());
    meta.push("threads", threads);
    meta.push("seed", seed);
    meta.push("repeat", repeat);
    meta.push("note", "CPU timings; not comparable to device latencies");
    meta.push_timestamp();

    let mut csv = meta.render();
    csv.push_str(
        "kernel,dim_k,mean_ms,min_ms,read_bytes,write_bytes,atomic_ops,analytical_read_bytes,reduction_read_pct,speedup_vs_dense,sanity_max_abs_err\n",
    );
    for r in rows {
        csv.push_str(&format!(
            "{},{},{:.4},{:.4},{},{},{},{},{:.4},{:.3},{:.2e}\n",
            r.kernel,
            r.dim_k,
            r.mean_ms,
            r.min_ms,
            r.counter.read_bytes,
            r.counter.write_bytes,
            r.counter.atomic_ops,
            r.analytical_read_bytes,
            r.reduction_read_pct,
            r.speedup_vs_dense,
            r.sanity_max_abs_err
        ));
    }
    emit(args.out.as_deref(), &csv)
}
