//! Top-k sparsified graph aggregation: the MaxK nonlinearity, the CBSR
//! storage format it produces, row-wise SpGEMM forward and outer-product
//! SSpMM backward kernels over CSR adjacency, edge-group workload
//! partitioning, an analytical global-memory traffic model, and a
//! desk-scale full-batch GNN training harness.

pub mod cbsr;
pub mod dense;
pub mod error;
pub mod gnn;
pub mod graph;
pub mod kernels;
pub mod partition;
pub mod traffic;

pub use cbsr::{
    maxk_backward, maxk_forward, maxk_forward_with, pivot_select_row, CbsrMatrix, IndexWidth,
    PivotStats, PivotSummary, DEFAULT_PIVOT_MAX_ITERATIONS,
};
pub use dense::{DenseMatrix, Scalar};
pub use error::{Error, Result};
pub use graph::{CscTransposeView, CsrGraph, NormalizationKind};
pub use kernels::{
    dense_spmm, dense_spmm_counted, dense_spmm_transposed, spgemm_forward,
    spgemm_forward_counted, sspmm_backward, sspmm_backward_counted, AccumBuffer, ExecMode,
};
pub use partition::{
    build_plan, plan_stats, EdgeGroup, EdgeGroupPlan, PlanStats, WarpAssignment,
    DEFAULT_GROUP_WIDTH, WARP_LANES,
};
pub use traffic::{
    render_table, report_from_counter, spmm_read_bytes, traffic_spgemm_forward,
    traffic_spmm_baseline, traffic_sspmm_backward, KernelKind, TrafficCounter, TrafficParams,
    TrafficReport, CACHE_CAVEAT,
};

/// Crate version, recorded in CLI output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
