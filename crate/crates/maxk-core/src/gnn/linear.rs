//! Dense linear transform with gradient buffers.

use rand::Rng;

use crate::dense::{DenseMatrix, Scalar};

/// `y = x W + b` with accumulating gradient buffers of matching shapes.
#[derive(Debug, Clone)]
pub struct LinearLayer<T> {
    weight: DenseMatrix<T>, // F_in x F_out
    bias: Vec<T>,           // F_out
    grad_weight: DenseMatrix<T>,
    grad_bias: Vec<T>,
}

impl<T: Scalar> LinearLayer<T> {
    /// Glorot-uniform initialization, bias zero.
    pub fn new_seeded(f_in: usize, f_out: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (f_in + f_out) as f64).sqrt();
        let weight = DenseMatrix::from_fn(f_in, f_out, |_, _| {
            T::from_f64(rng.random_range(-limit..limit))
        });
        Self::from_parts(weight, vec![T::zero(); f_out])
    }

    pub fn from_parts(weight: DenseMatrix<T>, bias: Vec<T>) -> Self {
        assert_eq!(weight.cols(), bias.len(), "bias length != F_out");
        let grad_weight = DenseMatrix::zeros(weight.rows(), weight.cols());
        let grad_bias = vec![T::zero(); bias.len()];
        LinearLayer {
            weight,
            bias,
            grad_weight,
            grad_bias,
        }
    }

    pub fn f_in(&self) -> usize {
        self.weight.rows()
    }

    pub fn f_out(&self) -> usize {
        self.weight.cols()
    }

    pub fn weight(&self) -> &DenseMatrix<T> {
        &self.weight
    }

    pub fn weight_mut(&mut self) -> &mut DenseMatrix<T> {
        &mut self.weight
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    pub fn grad_weight(&self) -> &DenseMatrix<T> {
        &self.grad_weight
    }

    pub fn grad_bias(&self) -> &[T] {
        &self.grad_bias
    }

    pub fn forward(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(x.cols(), self.f_in(), "input width != F_in");
        let mut y = x.matmul(&self.weight);
        for r in 0..y.rows() {
            let row = y.row_mut(r);
            for (v, &b) in row.iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        y
    }

    /// Accumulates dW = x^T dY and db = column sums of dY; returns dX = dY W^T.
    pub fn backward(&mut self, x: &DenseMatrix<T>, d_out: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(d_out.cols(), self.f_out());
        assert_eq!(d_out.rows(), x.rows());
        self.grad_weight.scaled_add(T::one(), &x.transpose_matmul(d_out));
        for r in 0..d_out.rows() {
            for (g, &d) in self.grad_bias.iter_mut().zip(d_out.row(r)) {
                *g += d;
            }
        }
        d_out.matmul(&self.weight.transpose())
    }

    pub fn zero_grad(&mut self) {
        self.grad_weight.data_mut().fill(T::zero());
        self.grad_bias.fill(T::zero());
    }

    /// SGD step with momentum; `vel_*` must match the parameter shapes.
    pub fn sgd_step(
        &mut self,
        lr: T,
        momentum: T,
        vel_weight: &mut DenseMatrix<T>,
        vel_bias: &mut [T],
    ) {
        for (v, &g) in vel_weight
            .data_mut()
            .iter_mut()
            .zip(self.grad_weight.data())
        {
            *v = momentum * *v + g;
        }
        for (w, &v) in self.weight.data_mut().iter_mut().zip(vel_weight.data()) {
            *w -= lr * v;
        }
        for (v, &g) in vel_bias.iter_mut().zip(&self.grad_bias) {
            *v = momentum * *v + g;
        }
        for (b, &v) in self.bias.iter_mut().zip(vel_bias.iter()) {
            *b -= lr * v;
        }
    }
}
