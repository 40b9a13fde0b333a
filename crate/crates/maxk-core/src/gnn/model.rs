//! Layer stacks and the full-batch training loop.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dense::{DenseMatrix, Scalar};
use crate::error::{Error, Result};
use crate::graph::{CsrGraph, NormalizationKind};
use crate::kernels::ExecMode;
use crate::partition::{build_plan, EdgeGroupPlan, DEFAULT_GROUP_WIDTH};

use super::layer::{MaxkGnnLayer, Nonlinearity};
use super::linear::LinearLayer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// Softmax cross-entropy for single-label classification.
    SoftmaxCrossEntropy,
    /// Sigmoid binary cross-entropy for multi-label targets.
    Bce,
}

impl LossKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ce" | "softmax-ce" | "cross-entropy" => Some(LossKind::SoftmaxCrossEntropy),
            "bce" => Some(LossKind::Bce),
            _ => None,
        }
    }
}

/// Ground-truth labels: class ids for single-label training, a 0/1 matrix
/// for multi-label.
#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    Classes(Vec<u32>),
    MultiHot {
        rows: usize,
        cols: usize,
        data: Vec<u8>,
    },
}

impl Labels {
    pub fn rows(&self) -> usize {
        match self {
            Labels::Classes(v) => v.len(),
            Labels::MultiHot { rows, .. } => *rows,
        }
    }

    pub fn num_outputs(&self) -> usize {
        match self {
            Labels::Classes(v) => v.iter().copied().max().map_or(1, |m| m as usize + 1),
            Labels::MultiHot { cols, .. } => *cols,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: u32,
    pub lr: f64,
    pub momentum: f64,
    pub seed: u64,
    pub loss: LossKind,
    pub mode: ExecMode,
    /// Max workload units per edge group for the kernel plans.
    pub group_width: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            lr: 0.05,
            momentum: 0.9,
            seed: 0,
            loss: LossKind::SoftmaxCrossEntropy,
            mode: ExecMode::Deterministic,
            group_width: DEFAULT_GROUP_WIDTH as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRow {
    pub epoch: u32,
    pub loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
    pub epoch_seconds: f64,
}

/// Per-epoch training log. `epoch 0` is the evaluation of the initial
/// parameters; row `e` reflects the model after `e` updates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub rows: Vec<EpochRow>,
}

impl TrainingLog {
    pub const CSV_HEADER: &'static str = "epoch,loss,train_acc,val_acc,epoch_seconds";

    /// Full CSV with `#`-prefixed metadata lines.
    pub fn to_csv(&self, metadata: &[(String, String)]) -> String {
        let mut out = String::new();
        for (key, value) in metadata {
            out.push_str(&format!("# {key}={value}\n"));
        }
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{:.3}\n",
                r.epoch, r.loss, r.train_acc, r.val_acc, r.epoch_seconds
            ));
        }
        out
    }

    /// Deterministic columns only: timing is wall clock and is excluded so
    /// identical runs compare byte-identical.
    pub fn canonical_csv(&self) -> String {
        let mut out = String::from("epoch,loss,train_acc,val_acc\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6}\n",
                r.epoch, r.loss, r.train_acc, r.val_acc
            ));
        }
        out
    }

    pub fn final_train_acc(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.train_acc)
    }

    pub fn final_loss(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.loss)
    }
}

/// Stack of GNN layers trained as a unit.
#[derive(Debug, Clone)]
pub struct GnnModel<T> {
    layers: Vec<MaxkGnnLayer<T>>,
}

impl<T: Scalar> GnnModel<T> {
    pub fn from_layers(layers: Vec<MaxkGnnLayer<T>>) -> Self {
        GnnModel { layers }
    }

    /// Builds a stack with `dims = [f_in, hidden..., f_out]`. Hidden layers
    /// get `hidden_nonlinearity`; the output layer aggregates without one.
    pub fn new_stack(
        dims: &[usize],
        hidden_nonlinearity: Nonlinearity,
        aggregator: NormalizationKind,
        seed: u64,
    ) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::new();
        for i in 0..dims.len() - 1 {
            let linear = LinearLayer::new_seeded(dims[i], dims[i + 1], &mut rng);
            let nl = if i + 2 == dims.len() {
                Nonlinearity::Identity
            } else {
                hidden_nonlinearity
            };
            layers.push(MaxkGnnLayer::new(linear, nl, aggregator));
        }
        GnnModel { layers }
    }

    pub fn layers(&self) -> &[MaxkGnnLayer<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [MaxkGnnLayer<T>] {
        &mut self.layers
    }

    pub fn num_outputs(&self) -> usize {
        self.layers.last().map_or(0, |l| l.linear().f_out())
    }

    fn zero_grads(&mut self) {
        for layer in &mut self.layers {
            layer.linear_mut().zero_grad();
        }
    }
}

/// Normalized graphs and kernel plans prepared once per training run.
struct TrainSetup {
    graphs: Vec<CsrGraph>,
    plans: Vec<Option<EdgeGroupPlan>>,
}

fn prepare<T: Scalar>(model: &GnnModel<T>, g: &CsrGraph, group_width: usize) -> TrainSetup {
    let mut graphs = Vec::with_capacity(model.layers.len());
    let mut plans = Vec::with_capacity(model.layers.len());
    for layer in &model.layers {
        graphs.push(g.normalize(layer.aggregator()));
        plans.push(match layer.nonlinearity() {
            Nonlinearity::MaxK { k } => Some(build_plan(g, k, group_width)),
            _ => None,
        });
    }
    TrainSetup { graphs, plans }
}

fn forward_stack<T: Scalar>(
    model: &mut GnnModel<T>,
    setup: &TrainSetup,
    x: &DenseMatrix<T>,
    mode: ExecMode,
) -> Result<DenseMatrix<T>> {
    let mut h = x.clone();
    for (i, layer) in model.layers.iter_mut().enumerate() {
        h = layer.forward(&setup.graphs[i], setup.plans[i].as_ref(), &h, mode)?;
    }
    Ok(h)
}

fn backward_stack<T: Scalar>(
    model: &mut GnnModel<T>,
    setup: &TrainSetup,
    d_out: &DenseMatrix<T>,
    mode: ExecMode,
) -> Result<()> {
    let mut d = d_out.clone();
    for (i, layer) in model.layers.iter_mut().enumerate().rev() {
        d = layer.backward(&setup.graphs[i], setup.plans[i].as_ref(), &d, mode)?;
    }
    Ok(())
}

/// Softmax cross-entropy over masked rows. Returns (mean loss, d_logits).
fn softmax_ce<T: Scalar>(
    logits: &DenseMatrix<T>,
    labels: &[u32],
    mask: &[bool],
) -> (f64, DenseMatrix<T>) {
    let count = mask.iter().filter(|&&m| m).count().max(1);
    let scale = T::from_f64(1.0 / count as f64);
    let mut d = DenseMatrix::zeros(logits.rows(), logits.cols());
    let mut loss = 0.0f64;
    for r in 0..logits.rows() {
        if !mask[r] {
            continue;
        }
        let row = logits.row(r);
        let max = row.iter().cloned().fold(T::neg_infinity(), T::max);
        let exps: Vec<T> = row.iter().map(|&v| (v - max).exp()).collect();
        let denom: T = exps.iter().cloned().sum();
        let label = labels[r] as usize;
        let p_label = exps[label] / denom;
        loss -= p_label.as_f64().max(1e-300).ln();
        let d_row = d.row_mut(r);
        for (c, &e) in exps.iter().enumerate() {
            let p = e / denom;
            let target = if c == label { T::one() } else { T::zero() };
            d_row[c] = (p - target) * scale;
        }
    }
    (loss / count as f64, d)
}

/// Sigmoid binary cross-entropy over masked rows. Returns (mean loss, d_logits).
fn bce<T: Scalar>(
    logits: &DenseMatrix<T>,
    labels: &Labels,
    mask: &[bool],
) -> (f64, DenseMatrix<T>) {
    let (cols, data) = match labels {
        Labels::MultiHot { cols, data, .. } => (*cols, data),
        Labels::Classes(_) => unreachable!("bce requires multi-hot labels"),
    };
    let count = mask.iter().filter(|&&m| m).count().max(1);
    let scale = T::from_f64(1.0 / (count * cols) as f64);
    let mut d = DenseMatrix::zeros(logits.rows(), logits.cols());
    let mut loss = 0.0f64;
    for r in 0..logits.rows() {
        if !mask[r] {
            continue;
        }
        let row = logits.row(r);
        let d_row = d.row_mut(r);
        for c in 0..cols {
            let z = row[c].as_f64();
            let y = data[r * cols + c] as f64;
            // log(1 + exp(-|z|)) form keeps the loss finite for large |z|
            loss += z.max(0.0) - z * y + (-z.abs()).exp().ln_1p();
            let p = 1.0 / (1.0 + (-z).exp());
            d_row[c] = T::from_f64(p - y) * scale;
        }
    }
    (loss / (count * cols) as f64, d)
}

fn accuracy<T: Scalar>(logits: &DenseMatrix<T>, labels: &Labels, mask: &[bool]) -> f64 {
    let mut hits = 0usize;
    let mut total = 0usize;
    match labels {
        Labels::Classes(classes) => {
            for r in 0..logits.rows() {
                if !mask[r] {
                    continue;
                }
                let row = logits.row(r);
                let mut best = 0usize;
                for (c, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = c;
                    }
                }
                total += 1;
                if best == classes[r] as usize {
                    hits += 1;
                }
            }
        }
        Labels::MultiHot { cols, data, .. } => {
            for r in 0..logits.rows() {
                if !mask[r] {
                    continue;
                }
                let row = logits.row(r);
                for c in 0..*cols {
                    total += 1;
                    let predicted = row[c] > T::zero();
                    if predicted == (data[r * *cols + c] != 0) {
                        hits += 1;
                    }
                }
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

fn loss_and_grad<T: Scalar>(
    logits: &DenseMatrix<T>,
    labels: &Labels,
    mask: &[bool],
    kind: LossKind,
) -> Result<(f64, DenseMatrix<T>)> {
    match kind {
        LossKind::SoftmaxCrossEntropy => match labels {
            Labels::Classes(classes) => Ok(softmax_ce(logits, classes, mask)),
            Labels::MultiHot { .. } => Err(Error::Parameter(
                "softmax cross-entropy needs class labels".into(),
            )),
        },
        LossKind::Bce => match labels {
            Labels::MultiHot { .. } => Ok(bce(logits, labels, mask)),
            Labels::Classes(_) => Err(Error::Parameter("bce needs multi-hot labels".into())),
        },
    }
}

/// Full-batch gradient-descent training. Deterministic for a fixed config
/// when `mode` is deterministic; emits one log row per epoch plus the
/// initial evaluation at epoch 0.
pub fn train_full_batch<T: Scalar>(
    model: &mut GnnModel<T>,
    g: &CsrGraph,
    features: &DenseMatrix<T>,
    labels: &Labels,
    train_mask: &[bool],
    val_mask: Option<&[bool]>,
    config: &TrainConfig,
) -> Result<TrainingLog> {
    let n = g.num_nodes();
    if features.rows() != n || labels.rows() != n || train_mask.len() != n {
        return Err(Error::Dimension(format!(
            "features/labels/mask rows must equal {n} nodes"
        )));
    }
    if let Some(vm) = val_mask {
        if vm.len() != n {
            return Err(Error::Dimension("val mask length mismatch".into()));
        }
    }
    if model.num_outputs() < labels.num_outputs() {
        return Err(Error::Dimension(format!(
            "model emits {} outputs, labels need {}",
            model.num_outputs(),
            labels.num_outputs()
        )));
    }

    let setup = prepare(model, g, config.group_width);
    let lr = T::from_f64(config.lr);
    let momentum = T::from_f64(config.momentum);
    let mut velocities: Vec<(DenseMatrix<T>, Vec<T>)> = model
        .layers()
        .iter()
        .map(|l| {
            (
                DenseMatrix::zeros(l.linear().f_in(), l.linear().f_out()),
                vec![T::zero(); l.linear().f_out()],
            )
        })
        .collect();

    let mut log = TrainingLog::default();
    let push_row = |log: &mut TrainingLog,
                    logits: &DenseMatrix<T>,
                    epoch: u32,
                    secs: f64|
     -> Result<f64> {
        let (loss, _) = loss_and_grad(logits, labels, train_mask, config.loss)?;
        if !loss.is_finite() {
            return Err(Error::Divergence(format!(
                "non-finite loss {loss} at epoch {epoch}"
            )));
        }
        log.rows.push(EpochRow {
            epoch,
            loss,
            train_acc: accuracy(logits, labels, train_mask),
            val_acc: val_mask.map_or(f64::NAN, |vm| accuracy(logits, labels, vm)),
            epoch_seconds: secs,
        });
        Ok(loss)
    };

    // Row e holds the metrics of the parameters after e updates. The forward
    // pass that produced row e-1 also primed the layer caches, so each epoch
    // costs one backward, one update, and one fresh forward.
    let mut logits = forward_stack(model, &setup, features, config.mode)?;
    push_row(&mut log, &logits, 0, 0.0)?;
    for epoch in 1..=config.epochs {
        let start = Instant::now();
        model.zero_grads();
        let (loss, d_logits) = loss_and_grad(&logits, labels, train_mask, config.loss)?;
        if !loss.is_finite() {
            return Err(Error::Divergence(format!(
                "non-finite loss {loss} at epoch {epoch}"
            )));
        }
        backward_stack(model, &setup, &d_logits, config.mode)?;
        for (layer, (vw, vb)) in model.layers_mut().iter_mut().zip(velocities.iter_mut()) {
            layer.linear_mut().sgd_step(lr, momentum, vw, vb);
        }
        logits = forward_stack(model, &setup, features, config.mode)?;
        push_row(&mut log, &logits, epoch, start.elapsed().as_secs_f64())?;
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_setup() -> (CsrGraph, DenseMatrix<f32>, Labels, Vec<bool>) {
        let g = CsrGraph::from_edges(
            4,
            vec![
                (0, 0, 1.0),
                (0, 1, 1.0),
                (1, 0, 1.0),
                (1, 1, 1.0),
                (2, 2, 1.0),
                (2, 3, 1.0),
                (3, 2, 1.0),
                (3, 3, 1.0),
            ],
        )
        .unwrap();
        let x = DenseMatrix::from_rows(&[
            vec![1.0f32, 0.0],
            vec![0.9, 0.1],
            vec![0.0, 1.0],
            vec![0.1, 0.9],
        ]);
        let labels = Labels::Classes(vec![0, 0, 1, 1]);
        let mask = vec![true; 4];
        (g, x, labels, mask)
    }

    #[test]
    fn zero_lr_is_a_fixed_point() {
        let (g, x, labels, mask) = tiny_setup();
        let mut model = GnnModel::<f32>::new_stack(
            &[2, 4, 2],
            Nonlinearity::MaxK { k: 2 },
            NormalizationKind::Mean,
            7,
        );
        let snapshot = model.clone();
        let config = TrainConfig {
            epochs: 5,
            lr: 0.0,
            momentum: 0.0,
            ..TrainConfig::default()
        };
        let log = train_full_batch(&mut model, &g, &x, &labels, &mask, None, &config).unwrap();
        let losses: Vec<f64> = log.rows.iter().map(|r| r.loss).collect();
        assert!(losses.windows(2).all(|w| w[0] == w[1]));
        for (a, b) in model.layers().iter().zip(snapshot.layers()) {
            assert_eq!(a.linear().weight(), b.linear().weight());
            assert_eq!(a.linear().bias(), b.linear().bias());
        }
    }

    #[test]
    fn epochs_zero_logs_single_row() {
        let (g, x, labels, mask) = tiny_setup();
        let mut model = GnnModel::<f32>::new_stack(
            &[2, 4, 2],
            Nonlinearity::MaxK { k: 1 },
            NormalizationKind::Mean,
            7,
        );
        let config = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let log = train_full_batch(&mut model, &g, &x, &labels, &mask, None, &config).unwrap();
        assert_eq!(log.rows.len(), 1);
        assert_eq!(log.rows[0].epoch, 0);
    }

    #[test]
    fn training_reduces_loss_on_separable_toy() {
        let (g, x, labels, mask) = tiny_setup();
        let mut model = GnnModel::<f32>::new_stack(
            &[2, 8, 2],
            Nonlinearity::MaxK { k: 2 },
            NormalizationKind::Mean,
            3,
        );
        let config = TrainConfig {
            epochs: 60,
            lr: 0.3,
            momentum: 0.9,
            ..TrainConfig::default()
        };
        let log = train_full_batch(&mut model, &g, &x, &labels, &mask, None, &config).unwrap();
        assert!(log.rows[0].loss > log.final_loss());
        assert!(log.final_train_acc() >= 0.99);
    }

    #[test]
    fn deterministic_reruns_match_byte_for_byte() {
        let (g, x, labels, mask) = tiny_setup();
        let config = TrainConfig {
            epochs: 10,
            lr: 0.1,
            ..TrainConfig::default()
        };
        let run = || {
            let mut model = GnnModel::<f32>::new_stack(
                &[2, 4, 2],
                Nonlinearity::MaxK { k: 2 },
                NormalizationKind::Mean,
                11,
            );
            train_full_batch(&mut model, &g, &x, &labels, &mask, None, &config)
                .unwrap()
                .canonical_csv()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn csv_has_metadata_and_header() {
        let log = TrainingLog {
            rows: vec![EpochRow {
                epoch: 0,
                loss: 1.0,
                train_acc: 0.5,
                val_acc: f64::NAN,
                epoch_seconds: 0.0,
            }],
        };
        let csv = log.to_csv(&[("seed".into(), "7".into())]);
        assert!(csv.starts_with("# seed=7\n"));
        assert!(csv.contains(TrainingLog::CSV_HEADER));
    }
}
