//! Desk-scale full-batch GNN training with top-k sparsified layers,
//! manual reverse-mode gradients, and the function-approximation demo.

pub mod approx;
pub mod data;
pub mod gradcheck;
pub mod layer;
pub mod linear;
pub mod model;
pub mod sbm;

pub use approx::{approx_demo, ApproxConfig, ApproxNonlinearity, ApproxRow, ApproxTarget, MlpApproxModel};
pub use gradcheck::{check_layer_gradients, GradCheckConfig, GradCheckReport};
pub use layer::{MaxkGnnLayer, Nonlinearity};
pub use linear::LinearLayer;
pub use model::{
    train_full_batch, EpochRow, GnnModel, Labels, LossKind, TrainConfig, TrainingLog,
};
pub use sbm::{generate_sbm, SbmConfig, SbmDataset};
