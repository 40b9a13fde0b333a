//! Seeded stochastic-block-model graphs with block-informative features,
//! the synthetic dataset for desk-scale training runs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dense::DenseMatrix;
use crate::graph::CsrGraph;

use super::model::Labels;

#[derive(Debug, Clone)]
pub struct SbmConfig {
    pub num_nodes: usize,
    pub num_blocks: usize,
    /// Edge probability inside a block.
    pub intra_p: f64,
    /// Edge probability across blocks.
    pub inter_p: f64,
    pub feature_dim: usize,
    /// Magnitude of the one-hot block signal mixed into the features.
    pub feature_signal: f32,
    /// Standard deviation of the Gaussian feature noise.
    pub feature_noise: f32,
    pub train_frac: f64,
    pub self_loops: bool,
    pub seed: u64,
}

impl Default for SbmConfig {
    fn default() -> Self {
        SbmConfig {
            num_nodes: 1000,
            num_blocks: 4,
            intra_p: 0.05,
            inter_p: 0.005,
            feature_dim: 16,
            feature_signal: 1.0,
            feature_noise: 1.0,
            train_frac: 0.8,
            self_loops: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SbmDataset {
    pub graph: CsrGraph,
    pub features: DenseMatrix<f32>,
    pub labels: Labels,
    pub train_mask: Vec<bool>,
    pub val_mask: Vec<bool>,
    pub num_classes: usize,
}

/// Undirected SBM graph plus features `signal * onehot(block) + noise`.
pub fn generate_sbm(cfg: &SbmConfig) -> SbmDataset {
    assert!(cfg.num_blocks >= 1 && cfg.num_nodes >= cfg.num_blocks);
    assert!(cfg.feature_dim >= cfg.num_blocks, "features must fit the block one-hot");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.num_nodes;
    let block_of = |v: usize| v * cfg.num_blocks / n;

    let mut edges: Vec<(u32, u32, f32)> = Vec::new();
    for i in 0..n {
        if cfg.self_loops {
            edges.push((i as u32, i as u32, 1.0));
        }
        for j in (i + 1)..n {
            let p = if block_of(i) == block_of(j) {
                cfg.intra_p
            } else {
                cfg.inter_p
            };
            if rng.random::<f64>() < p {
                edges.push((i as u32, j as u32, 1.0));
                edges.push((j as u32, i as u32, 1.0));
            }
        }
    }
    let graph = CsrGraph::from_edges(n, edges).expect("generated edges are in range");

    let normal = StandardNormal;
    let features = DenseMatrix::from_fn(n, cfg.feature_dim, |r, c| {
        let noise: f64 = normal.sample(&mut rng);
        let signal = if c == block_of(r) {
            cfg.feature_signal
        } else {
            0.0
        };
        signal + cfg.feature_noise * noise as f32
    });

    let labels: Vec<u32> = (0..n).map(|v| block_of(v) as u32).collect();
    let mut train_mask = vec![false; n];
    let mut val_mask = vec![false; n];
    for v in 0..n {
        if rng.random::<f64>() < cfg.train_frac {
            train_mask[v] = true;
        } else {
            val_mask[v] = true;
        }
    }

    SbmDataset {
        graph,
        features,
        labels: Labels::Classes(labels),
        train_mask,
        val_mask,
        num_classes: cfg.num_blocks,
    }
}
