//! Single-hidden-layer function-approximation demo.
//!
//! Trains `g(x) = h(x) W' + b'` with `h(x) = nonlinearity(x W + b)` against a
//! scalar target on a uniform grid, sweeping the hidden width. With the
//! top-k nonlinearity the outputs are piecewise-linear in x and the fit
//! error shrinks as hidden units are added.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cbsr::{maxk_backward, maxk_forward};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

use super::linear::LinearLayer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxNonlinearity {
    MaxK,
    Relu,
}

impl ApproxNonlinearity {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "maxk" => Some(ApproxNonlinearity::MaxK),
            "relu" => Some(ApproxNonlinearity::Relu),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ApproxNonlinearity::MaxK => "maxk",
            ApproxNonlinearity::Relu => "relu",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxTarget {
    /// y = x^2
    Square,
    /// y = 0
    Zero,
}

impl ApproxTarget {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "square" => Some(ApproxTarget::Square),
            "zero" => Some(ApproxTarget::Zero),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ApproxTarget::Square => "square",
            ApproxTarget::Zero => "zero",
        }
    }

    fn eval(self, x: f64) -> f64 {
        match self {
            ApproxTarget::Square => x * x,
            ApproxTarget::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ApproxConfig {
    pub hidden_units: Vec<usize>,
    pub epochs: u32,
    pub lr: f64,
    pub momentum: f64,
    pub seed: u64,
    pub grid_points: usize,
    pub nonlinearity: ApproxNonlinearity,
    pub target: ApproxTarget,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig {
            hidden_units: vec![4, 16, 64, 256],
            epochs: 4000,
            lr: 0.02,
            momentum: 0.9,
            seed: 17,
            grid_points: 129,
            nonlinearity: ApproxNonlinearity::MaxK,
            target: ApproxTarget::Square,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ApproxRow {
    pub hidden_units: usize,
    pub k: usize,
    pub final_mse: f64,
}

/// Scalar-in scalar-out MLP with one hidden nonlinearity.
#[derive(Debug, Clone)]
pub struct MlpApproxModel {
    first: LinearLayer<f64>,
    readout: LinearLayer<f64>,
    hidden_units: usize,
    k: usize,
    nonlinearity: ApproxNonlinearity,
}

impl MlpApproxModel {
    pub fn new(
        input_dim: usize,
        hidden_units: usize,
        output_dim: usize,
        k: usize,
        nonlinearity: ApproxNonlinearity,
        seed: u64,
    ) -> Self {
        assert!(k >= 1 && k <= hidden_units, "need 1 <= k <= hidden units");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        MlpApproxModel {
            first: LinearLayer::new_seeded(input_dim, hidden_units, &mut rng),
            readout: LinearLayer::new_seeded(hidden_units, output_dim, &mut rng),
            hidden_units,
            k,
            nonlinearity,
        }
    }

    pub fn hidden_units(&self) -> usize {
        self.hidden_units
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn predict(&self, xs: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
        let pre = self.first.forward(xs);
        let hidden = match self.nonlinearity {
            ApproxNonlinearity::MaxK => {
                let (cbsr, _) = maxk_forward(&pre, self.k, None)?;
                cbsr.densify()
            }
            ApproxNonlinearity::Relu => pre.map(|v| v.max(0.0)),
        };
        Ok(self.readout.forward(&hidden))
    }

    /// One full-batch gradient step on the mean squared error; returns the
    /// pre-step MSE.
    fn train_step(
        &mut self,
        xs: &DenseMatrix<f64>,
        ys: &DenseMatrix<f64>,
        lr: f64,
        momentum: f64,
        velocities: &mut Velocities,
    ) -> Result<f64> {
        self.first.zero_grad();
        self.readout.zero_grad();

        let pre = self.first.forward(xs);
        let (hidden, pattern) = match self.nonlinearity {
            ApproxNonlinearity::MaxK => {
                let (cbsr, _) = maxk_forward(&pre, self.k, None)?;
                (cbsr.densify(), Some(cbsr))
            }
            ApproxNonlinearity::Relu => (pre.map(|v| v.max(0.0)), None),
        };
        let out = self.readout.forward(&hidden);

        let n = xs.rows() as f64;
        let mut diff = out.clone();
        diff.scaled_add(-1.0, ys);
        let mse = diff.dot(&diff) / n;
        if !mse.is_finite() {
            return Err(Error::Divergence(format!("non-finite mse {mse}")));
        }
        let mut d_out = diff;
        d_out.scale(2.0 / n);

        let d_hidden = self.readout.backward(&hidden, &d_out);
        let d_pre = match self.nonlinearity {
            ApproxNonlinearity::MaxK => {
                let pattern = pattern.expect("pattern exists for maxk");
                maxk_backward(&pattern.gather(&d_hidden)?, &pattern)?
            }
            ApproxNonlinearity::Relu => {
                let mut d = d_hidden;
                for (g, &p) in d.data_mut().iter_mut().zip(pre.data()) {
                    if p <= 0.0 {
                        *g = 0.0;
                    }
                }
                d
            }
        };
        self.first.backward(xs, &d_pre);

        self.first
            .sgd_step(lr, momentum, &mut velocities.w1, &mut velocities.b1);
        self.readout
            .sgd_step(lr, momentum, &mut velocities.w2, &mut velocities.b2);
        Ok(mse)
    }
}

struct Velocities {
    w1: DenseMatrix<f64>,
    b1: Vec<f64>,
    w2: DenseMatrix<f64>,
    b2: Vec<f64>,
}

impl Velocities {
    fn for_model(m: &MlpApproxModel) -> Self {
        Velocities {
            w1: DenseMatrix::zeros(m.first.f_in(), m.first.f_out()),
            b1: vec![0.0; m.first.f_out()],
            w2: DenseMatrix::zeros(m.readout.f_in(), m.readout.f_out()),
            b2: vec![0.0; m.readout.f_out()],
        }
    }
}

pub fn mse(pred: &DenseMatrix<f64>, target: &DenseMatrix<f64>) -> f64 {
    let mut diff = pred.clone();
    diff.scaled_add(-1.0, target);
    diff.dot(&diff) / pred.rows() as f64
}

/// Trains one model per hidden width on the `[-1, 1]` grid and reports the
/// final mean squared error. k follows the ceil(r / 4) rule.
pub fn approx_demo(cfg: &ApproxConfig) -> Result<Vec<ApproxRow>> {
    let xs = DenseMatrix::from_fn(cfg.grid_points, 1, |r, _| {
        -1.0 + 2.0 * r as f64 / (cfg.grid_points - 1).max(1) as f64
    });
    let ys = DenseMatrix::from_fn(cfg.grid_points, 1, |r, _| cfg.target.eval(xs.get(r, 0)));

    let mut rows = Vec::new();
    for &r in &cfg.hidden_units {
        if r < 4 {
            return Err(Error::Parameter(format!("hidden units {r} < 4")));
        }
        let k = match cfg.nonlinearity {
            ApproxNonlinearity::MaxK => r.div_ceil(4),
            ApproxNonlinearity::Relu => r,
        };
        let mut model = MlpApproxModel::new(1, r, 1, k.max(1), cfg.nonlinearity, cfg.seed);
        let mut velocities = Velocities::for_model(&model);
        for _ in 0..cfg.epochs {
            model.train_step(&xs, &ys, cfg.lr, cfg.momentum, &mut velocities)?;
        }
        let final_mse = mse(&model.predict(&xs)?, &ys);
        rows.push(ApproxRow {
            hidden_units: r,
            k: model.k(),
            final_mse,
        });
    }
    Ok(rows)
}
