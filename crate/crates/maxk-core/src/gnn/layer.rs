//! One GNN layer: linear transform, nonlinearity, neighborhood aggregation.
//!
//! The nonlinearity sits between the linear transform and the aggregation.
//! With `MaxK` the activations leave the layer in CBSR form and aggregation
//! runs the sparse forward kernel; the backward pass reuses the selection
//! pattern cached by the forward pass. `Relu` and `Identity` take the dense
//! path and serve as baselines.

use crate::cbsr::{maxk_backward, maxk_forward, CbsrMatrix};
use crate::dense::{DenseMatrix, Scalar};
use crate::error::{Error, Result};
use crate::graph::{CsrGraph, NormalizationKind};
use crate::kernels::{dense_spmm, dense_spmm_transposed, spgemm_forward, sspmm_backward, ExecMode};
use crate::partition::EdgeGroupPlan;

use super::linear::LinearLayer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    MaxK { k: usize },
    Relu,
    Identity,
}

impl Nonlinearity {
    pub fn name(&self) -> String {
        match self {
            Nonlinearity::MaxK { k } => format!("maxk({k})"),
            Nonlinearity::Relu => "relu".into(),
            Nonlinearity::Identity => "identity".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct LayerCache<T> {
    input: DenseMatrix<T>,
    /// Forward CBSR output (selection pattern plus values) for MaxK.
    pattern: Option<CbsrMatrix<T>>,
    /// Positive-activation mask for ReLU.
    relu_mask: Option<Vec<bool>>,
}

#[derive(Debug, Clone)]
pub struct MaxkGnnLayer<T> {
    linear: LinearLayer<T>,
    nonlinearity: Nonlinearity,
    aggregator: NormalizationKind,
    cache: Option<LayerCache<T>>,
}

impl<T: Scalar> MaxkGnnLayer<T> {
    pub fn new(
        linear: LinearLayer<T>,
        nonlinearity: Nonlinearity,
        aggregator: NormalizationKind,
    ) -> Self {
        if let Nonlinearity::MaxK { k } = nonlinearity {
            assert!(k >= 1 && k <= linear.f_out(), "need 1 <= k <= F_out");
        }
        MaxkGnnLayer {
            linear,
            nonlinearity,
            aggregator,
            cache: None,
        }
    }

    pub fn linear(&self) -> &LinearLayer<T> {
        &self.linear
    }

    pub fn linear_mut(&mut self) -> &mut LinearLayer<T> {
        &mut self.linear
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    pub fn aggregator(&self) -> NormalizationKind {
        self.aggregator
    }

    /// Selection pattern cached by the last forward pass, if any.
    pub fn cached_pattern(&self) -> Option<&CbsrMatrix<T>> {
        self.cache.as_ref().and_then(|c| c.pattern.as_ref())
    }

    /// Post-linear activations, before aggregation (used by gradient checks).
    pub fn post_linear(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        self.linear.forward(x)
    }

    /// `aggregate(nonlinearity(x W + b))`. For MaxK the plan must be present.
    pub fn forward(
        &mut self,
        a_norm: &CsrGraph,
        plan: Option<&EdgeGroupPlan>,
        x: &DenseMatrix<T>,
        mode: ExecMode,
    ) -> Result<DenseMatrix<T>> {
        if x.rows() != a_norm.num_nodes() {
            return Err(Error::Dimension(format!(
                "input rows {} != graph nodes {}",
                x.rows(),
                a_norm.num_nodes()
            )));
        }
        let y = self.linear.forward(x);
        let (out, pattern, relu_mask) = match self.nonlinearity {
            Nonlinearity::MaxK { k } => {
                let plan = plan.ok_or_else(|| {
                    Error::State("MaxK layer forward needs an edge-group plan".into())
                })?;
                let (xs, _) = maxk_forward(&y, k, None)?;
                let out = spgemm_forward(a_norm, &xs, plan, mode)?;
                (out, Some(xs), None)
            }
            Nonlinearity::Relu => {
                let mask: Vec<bool> = y.data().iter().map(|&v| v > T::zero()).collect();
                let act = y.map(|v| if v > T::zero() { v } else { T::zero() });
                (dense_spmm(a_norm, &act)?, None, Some(mask))
            }
            Nonlinearity::Identity => (dense_spmm(a_norm, &y)?, None, None),
        };
        self.cache = Some(LayerCache {
            input: x.clone(),
            pattern,
            relu_mask,
        });
        Ok(out)
    }

    /// Propagates `dL/dX_out` back through aggregation, nonlinearity and the
    /// linear transform; accumulates parameter gradients and returns
    /// `dL/dX_in`. Must follow a forward pass.
    pub fn backward(
        &mut self,
        a_norm: &CsrGraph,
        plan: Option<&EdgeGroupPlan>,
        d_out: &DenseMatrix<T>,
        mode: ExecMode,
    ) -> Result<DenseMatrix<T>> {
        let cache = self
            .cache
            .as_ref()
            .ok_or_else(|| Error::State("backward called before forward".into()))?;
        let d_y = match self.nonlinearity {
            Nonlinearity::MaxK { .. } => {
                let pattern = cache
                    .pattern
                    .as_ref()
                    .ok_or_else(|| Error::State("missing cached selection pattern".into()))?;
                let plan = plan.ok_or_else(|| {
                    Error::State("MaxK layer backward needs an edge-group plan".into())
                })?;
                let sp_grad = sspmm_backward(a_norm, d_out, pattern, plan, mode)?;
                maxk_backward(&sp_grad, pattern)?
            }
            Nonlinearity::Relu => {
                let mask = cache
                    .relu_mask
                    .as_ref()
                    .ok_or_else(|| Error::State("missing cached relu mask".into()))?;
                let mut d_act = dense_spmm_transposed(a_norm, d_out)?;
                for (v, &m) in d_act.data_mut().iter_mut().zip(mask) {
                    if !m {
                        *v = T::zero();
                    }
                }
                d_act
            }
            Nonlinearity::Identity => dense_spmm_transposed(a_norm, d_out)?,
        };
        let input = cache.input.clone();
        Ok(self.linear.backward(&input, &d_y))
    }
}
