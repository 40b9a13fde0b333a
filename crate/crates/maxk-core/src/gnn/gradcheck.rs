//! Central-difference gradient verification for a full GNN layer.
//!
//! Runs the layer in f64 so the 1e-4 step is well above arithmetic noise.
//! Inputs are drawn continuously; the report carries the smallest gap
//! between post-linear values per row so callers can confirm the check
//! stayed away from top-k tie boundaries.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::dense::DenseMatrix;
use crate::error::Result;
use crate::graph::{CsrGraph, NormalizationKind};
use crate::kernels::ExecMode;
use crate::partition::build_plan;

use super::layer::{MaxkGnnLayer, Nonlinearity};
use super::linear::LinearLayer;

#[derive(Debug, Clone)]
pub struct GradCheckConfig {
    pub nodes: usize,
    pub f_in: usize,
    pub f_out: usize,
    pub k: usize,
    pub edge_density: f64,
    pub seed: u64,
    pub step: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            nodes: 12,
            f_in: 5,
            f_out: 8,
            k: 3,
            edge_density: 0.3,
            seed: 0,
            step: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    pub max_rel_error_weight: f64,
    pub max_rel_error_bias: f64,
    pub max_rel_error_input: f64,
    /// Smallest distance between two post-linear values within any row; the
    /// finite-difference step must sit far below half of this.
    pub min_post_linear_gap: f64,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.max_rel_error_weight
            .max(self.max_rel_error_bias)
            .max(self.max_rel_error_input)
    }
}

fn rel_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(1e-8);
    (analytic - numeric).abs() / denom
}

fn min_row_gap(y: &DenseMatrix<f64>) -> f64 {
    let mut min_gap = f64::INFINITY;
    for r in 0..y.rows() {
        let mut vals: Vec<f64> = y.row(r).to_vec();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in vals.windows(2) {
            min_gap = min_gap.min(w[1] - w[0]);
        }
    }
    min_gap
}

/// Builds a seeded random layer instance and compares analytic gradients of
/// `L = 0.5 * ||layer(x) - target||^2` against central differences over
/// every weight, bias, and input entry.
pub fn check_layer_gradients(cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.nodes;

    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for j in 0..n as u32 {
            if rng.random::<f64>() < cfg.edge_density {
                edges.push((i, j, rng.random_range(-1.0f32..1.0)));
            }
        }
    }
    let graph = CsrGraph::from_edges(n, edges).expect("edges in range");
    let plan = build_plan(&graph, cfg.k, 4);

    let x = DenseMatrix::from_fn(n, cfg.f_in, |_, _| rng.random_range(-1.0..1.0));
    let target = DenseMatrix::from_fn(n, cfg.f_out, |_, _| rng.random_range(-1.0..1.0));
    let linear = LinearLayer::<f64>::new_seeded(cfg.f_in, cfg.f_out, &mut rng);

    let make_layer = |lin: LinearLayer<f64>| {
        MaxkGnnLayer::new(lin, Nonlinearity::MaxK { k: cfg.k }, NormalizationKind::None)
    };

    let loss_of = |lin: LinearLayer<f64>, input: &DenseMatrix<f64>| -> Result<f64> {
        let mut layer = make_layer(lin);
        let out = layer.forward(&graph, Some(&plan), input, ExecMode::Deterministic)?;
        let mut diff = out;
        diff.scaled_add(-1.0, &target);
        Ok(0.5 * diff.dot(&diff))
    };

    // analytic gradients
    let mut layer = make_layer(linear.clone());
    let out = layer.forward(&graph, Some(&plan), &x, ExecMode::Deterministic)?;
    let min_post_linear_gap = min_row_gap(&layer.post_linear(&x));
    let mut d_out = out;
    d_out.scaled_add(-1.0, &target);
    let d_x = layer.backward(&graph, Some(&plan), &d_out, ExecMode::Deterministic)?;

    let step = cfg.step;
    let mut max_w = 0.0f64;
    for r in 0..cfg.f_in {
        for c in 0..cfg.f_out {
            let base = linear.weight().get(r, c);
            let mut plus = linear.clone();
            plus.weight_mut().set(r, c, base + step);
            let mut minus = linear.clone();
            minus.weight_mut().set(r, c, base - step);
            let numeric = (loss_of(plus, &x)? - loss_of(minus, &x)?) / (2.0 * step);
            max_w = max_w.max(rel_error(layer.linear().grad_weight().get(r, c), numeric));
        }
    }

    let mut max_b = 0.0f64;
    for c in 0..cfg.f_out {
        let mut plus = linear.clone();
        plus.bias_mut()[c] += step;
        let mut minus = linear.clone();
        minus.bias_mut()[c] -= step;
        let numeric = (loss_of(plus, &x)? - loss_of(minus, &x)?) / (2.0 * step);
        max_b = max_b.max(rel_error(layer.linear().grad_bias()[c], numeric));
    }

    let mut max_x = 0.0f64;
    for r in 0..n {
        for c in 0..cfg.f_in {
            let mut plus = x.clone();
            plus.set(r, c, plus.get(r, c) + step);
            let mut minus = x.clone();
            minus.set(r, c, minus.get(r, c) - step);
            let numeric =
                (loss_of(linear.clone(), &plus)? - loss_of(linear.clone(), &minus)?) / (2.0 * step);
            max_x = max_x.max(rel_error(d_x.get(r, c), numeric));
        }
    }

    Ok(GradCheckReport {
        max_rel_error_weight: max_w,
        max_rel_error_bias: max_b,
        max_rel_error_input: max_x,
        min_post_linear_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_layer_gradients_match_finite_differences() {
        let cfg = GradCheckConfig {
            nodes: 6,
            f_in: 3,
            f_out: 5,
            k: 2,
            ..GradCheckConfig::default()
        };
        let report = check_layer_gradients(&cfg).unwrap();
        assert!(report.min_post_linear_gap > 10.0 * cfg.step);
        assert!(
            report.max_rel_error() <= 1e-3,
            "max rel error {}",
            report.max_rel_error()
        );
    }
}
