use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use maxk_core::gnn::{
    data, generate_sbm, train_full_batch, GnnModel, Labels, LossKind, Nonlinearity, SbmConfig,
    TrainConfig,
};
use maxk_core::{CsrGraph, DenseMatrix, ExecMode, NormalizationKind};

use crate::config::{emit, FileConfig, Metadata};

#[derive(Args)]
pub struct TrainArgs {
    /// Input graph (.mtx Matrix Market, otherwise binary edge list).
    #[arg(long, conflicts_with = "sbm")]
    graph: Option<PathBuf>,

    /// Features file (.csv or FEAT binary).
    #[arg(long)]
    features: Option<PathBuf>,

    /// Labels file (.csv or LABL binary).
    #[arg(long)]
    labels: Option<PathBuf>,

    /// Train on a synthetic stochastic-block-model dataset instead.
    #[arg(long)]
    sbm: bool,

    #[arg(long)]
    sbm_nodes: Option<usize>,

    #[arg(long)]
    sbm_blocks: Option<usize>,

    #[arg(long)]
    sbm_intra: Option<f64>,

    #[arg(long)]
    sbm_inter: Option<f64>,

    /// Hidden layer widths, comma separated.
    #[arg(long, default_value = "64")]
    hidden: String,

    /// Retained entries per row for maxk hidden layers.
    #[arg(long)]
    k: Option<usize>,

    /// maxk, relu, or identity
    #[arg(long)]
    nonlinearity: Option<String>,

    /// none, mean, or symmetric
    #[arg(long)]
    aggregator: Option<String>,

    #[arg(long)]
    epochs: Option<u32>,

    #[arg(long)]
    lr: Option<f64>,

    #[arg(long)]
    momentum: Option<f64>,

    /// ce or bce
    #[arg(long)]
    loss: Option<String>,

    #[arg(long)]
    seed: Option<u64>,

    /// det or par
    #[arg(long)]
    mode: Option<String>,

    #[arg(long)]
    w: Option<usize>,

    /// Fraction of nodes in the training mask when none is implied by the
    /// dataset (synthetic runs carry their own split).
    #[arg(long)]
    train_frac: Option<f64>,

    /// Omit the timestamp line and the timing column so identical runs
    /// produce byte-identical files.
    #[arg(long)]
    canonical_log: bool,

    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: TrainArgs, file: &FileConfig, threads: usize) -> Result<()> {
    let epochs = file.resolve("epochs", args.epochs, 200)?;
    let lr = file.resolve("lr", args.lr, 0.1)?;
    let momentum = file.resolve("momentum", args.momentum, 0.9)?;
    let seed = file.resolve("seed", args.seed, 0)?;
    let group_width = file.resolve("w", args.w, 32)?;
    let mode_str: String = file.resolve("mode", args.mode, "det".to_string())?;
    let mode = ExecMode::parse(&mode_str)
        .ok_or_else(|| anyhow::anyhow!("unknown mode '{mode_str}'"))?;
    let loss_str: String = file.resolve("loss", args.loss, "ce".to_string())?;
    let loss = LossKind::parse(&loss_str)
        .ok_or_else(|| anyhow::anyhow!("unknown loss '{loss_str}' (expected ce or bce)"))?;
    let nl_str: String = file.resolve("nonlinearity", args.nonlinearity, "maxk".to_string())?;
    let agg_str: String = file.resolve("aggregator", args.aggregator, "symmetric".to_string())?;
    let aggregator = NormalizationKind::parse(&agg_str)
        .ok_or_else(|| anyhow::anyhow!("unknown aggregator '{agg_str}'"))?;
    let train_frac = file.resolve("train_frac", args.train_frac, 0.8)?;

    let hidden: Vec<usize> = args
        .hidden
        .split(',')
        .map(|t| t.trim().parse::<usize>().context("parsing --hidden"))
        .collect::<Result<Vec<_>>>()?;
    if hidden.is_empty() {
        bail!("need at least one hidden width");
    }

    // dataset
    let (graph, features, labels, train_mask, val_mask, source) = if args.sbm {
        let cfg = SbmConfig {
            num_nodes: file.resolve("sbm_nodes", args.sbm_nodes, 1000)?,
            num_blocks: file.resolve("sbm_blocks", args.sbm_blocks, 4)?,
            intra_p: file.resolve("sbm_intra", args.sbm_intra, 0.05)?,
            inter_p: file.resolve("sbm_inter", args.sbm_inter, 0.005)?,
            train_frac,
            seed,
            ..SbmConfig::default()
        };
        let d = generate_sbm(&cfg);
        (
            d.graph,
            d.features,
            d.labels,
            d.train_mask,
            Some(d.val_mask),
            format!(
                "sbm(nodes={},blocks={},intra={},inter={})",
                cfg.num_nodes, cfg.num_blocks, cfg.intra_p, cfg.inter_p
            ),
        )
    } else {
        let graph_path = args
            .graph
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("need --graph (or --sbm)"))?;
        let features_path = args
            .features
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("need --features with --graph"))?;
        let labels_path = args
            .labels
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("need --labels with --graph"))?;
        let graph = CsrGraph::load_auto(graph_path)
            .with_context(|| format!("loading graph {}", graph_path.display()))?;
        let features = load_features(features_path)?;
        let labels = load_labels(labels_path)?;
        // seeded split over all nodes
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let n = graph.num_nodes();
        let mut train_mask = vec![false; n];
        let mut val_mask = vec![false; n];
        for v in 0..n {
            if rng.random::<f64>() < train_frac {
                train_mask[v] = true;
            } else {
                val_mask[v] = true;
            }
        }
        (
            graph,
            features,
            labels,
            train_mask,
            Some(val_mask),
            graph_path.display().to_string(),
        )
    };

    let num_outputs = labels.num_outputs();
    let mut dims = vec![features.cols()];
    dims.extend_from_slice(&hidden);
    dims.push(num_outputs);

    let nonlinearity = match nl_str.as_str() {
        "maxk" => {
            let smallest_hidden = *hidden.iter().min().unwrap();
            let k = file.resolve("k", args.k, smallest_hidden.div_ceil(8))?;
            if k == 0 || k > smallest_hidden {
                bail!("k {k} must satisfy 1 <= k <= smallest hidden width {smallest_hidden}");
            }
            Nonlinearity::MaxK { k }
        }
        "relu" => Nonlinearity::Relu,
        "identity" => Nonlinearity::Identity,
        other => bail!("unknown nonlinearity '{other}'"),
    };

    let mut model = GnnModel::<f32>::new_stack(&dims, nonlinearity, aggregator, seed);
    let config = TrainConfig {
        epochs,
        lr,
        momentum,
        seed,
        loss,
        mode,
        group_width,
    };
    let log = train_full_batch(
        &mut model,
        &graph,
        &features,
        &labels,
        &train_mask,
        val_mask.as_deref(),
        &config,
    )?;

    let mut meta = Metadata::new("train");
    meta.push("dataset", source);
    meta.push("nodes", graph.num_nodes());
    meta.push("nnz", graph.num_edges());
    meta.push("dims", format!("{dims:?}"));
    meta.push("nonlinearity", nonlinearity.name());
    meta.push("aggregator", agg_str);
    meta.push("loss", loss_str);
    meta.push("epochs", epochs);
    meta.push("lr", lr);
    meta.push("momentum", momentum);
    meta.push("mode", mode.name());
    meta.push("threads", threads);
    meta.push("w", group_width);
    meta.push("train_frac", train_frac);
    meta.push("seed", seed);
    let body = if args.canonical_log {
        format!("{}{}", meta.render(), log.canonical_csv())
    } else {
        meta.push_timestamp();
        log.to_csv(meta.pairs())
    };
    emit(args.out.as_deref(), &body)
}

fn load_features(path: &std::path::Path) -> Result<DenseMatrix<f32>> {
    let loaded = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => data::load_features_csv(path),
        _ => data::load_features_binary(path),
    };
    loaded.with_context(|| format!("loading features {}", path.display()))
}

fn load_labels(path: &std::path::Path) -> Result<Labels> {
    let loaded = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => data::load_labels_csv(path),
        _ => data::load_labels_binary(path),
    };
    loaded.with_context(|| format!("loading labels {}", path.display()))
}
