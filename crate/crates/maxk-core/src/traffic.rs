//! Closed-form global-memory traffic predictions and the matching
//! instrumentation counters.
//!
//! The model counts the feature-matrix traffic the kernels' access patterns
//! generate: value and index fetches, dense-row prefetches, output writes
//! and atomic accumulations. Adjacency-structure fetches are identical for
//! every kernel being compared and are excluded on both sides. Caches are
//! not modeled, so comparisons with on-device profiler numbers are
//! order-of-magnitude checks only.

use serde::Serialize;

use crate::error::{Error, Result};

/// Bytes of one dense f32 element.
const F32_BYTES: u64 = 4;

/// Which kernel a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Spmm,
    Spgemm,
    Sspmm,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Spmm => "spmm",
            KernelKind::Spgemm => "spgemm",
            KernelKind::Sspmm => "sspmm",
        }
    }
}

/// Shape parameters the formulas run on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrafficParams {
    pub num_nodes: u64,
    pub nnz: u64,
    pub dim_origin: u64,
    pub dim_k: u64,
    /// Bytes per sp_index entry. 1, 2 or 4; 0 is accepted as the degenerate
    /// "no index block" accounting used for baseline comparisons.
    pub index_bytes: u64,
    /// Max workload units per edge group.
    pub w: u64,
}

impl TrafficParams {
    pub fn avg_degree(&self) -> f64 {
        if self.num_nodes == 0 {
            0.0
        } else {
            self.nnz as f64 / self.num_nodes as f64
        }
    }

    fn validate(&self) -> Result<()> {
        if !matches!(self.index_bytes, 0 | 1 | 2 | 4) {
            return Err(Error::Parameter(format!(
                "index_bytes must be 1, 2 or 4 (got {})",
                self.index_bytes
            )));
        }
        if self.w == 0 {
            return Err(Error::Parameter("w must be at least 1".into()));
        }
        if self.dim_origin == 0 || self.dim_k == 0 || self.dim_k > self.dim_origin {
            return Err(Error::Parameter(format!(
                "need 1 <= dim_k ({}) <= dim_origin ({})",
                self.dim_k, self.dim_origin
            )));
        }
        Ok(())
    }
}

/// Instrumentation totals collected while a kernel runs. Counters are kept
/// per task in parallel mode and merged afterwards.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrafficCounter {
    pub read_bytes: u64,
    pub write_bytes: u64,
    pub atomic_ops: u64,
}

impl TrafficCounter {
    pub fn merge(mut self, other: TrafficCounter) -> TrafficCounter {
        self.read_bytes += other.read_bytes;
        self.write_bytes += other.write_bytes;
        self.atomic_ops += other.atomic_ops;
        self
    }
}

/// Predicted (or measured) global-memory traffic for one kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrafficReport {
    pub kernel: KernelKind,
    pub read_bytes: u64,
    pub write_bytes: u64,
    /// Expected atomic accumulations. The analytical value
    /// `N * dim_origin * avgdeg / w` is fractional whenever w does not
    /// divide every row's degree; counted runs always report integers.
    pub atomic_ops: f64,
    /// Read-traffic reduction against the dense row-wise baseline,
    /// `4 * dim_origin * nnz` bytes. Negative when the format loses.
    pub reduction_vs_spmm_pct: f64,
    pub params: TrafficParams,
}

impl TrafficReport {
    pub fn read_gb(&self) -> f64 {
        self.read_bytes as f64 / 1e9
    }

    pub fn write_gb(&self) -> f64 {
        self.write_bytes as f64 / 1e9
    }

    /// True when the sparsified format does not reduce read traffic.
    pub fn no_benefit(&self) -> bool {
        self.reduction_vs_spmm_pct <= 0.0
    }
}

/// Baseline read traffic of the dense row-wise kernel: every edge fetches a
/// full dense feature row.
pub fn spmm_read_bytes(p: &TrafficParams) -> u64 {
    F32_BYTES * p.dim_origin * p.nnz
}

fn reduction_pct(p: &TrafficParams) -> f64 {
    let dense = (F32_BYTES * p.dim_origin) as f64;
    let sparse = ((F32_BYTES + p.index_bytes) * p.dim_k) as f64;
    (dense - sparse) / dense * 100.0
}

/// Atomic accumulations of the grouped write-back stage,
/// `N * dim_origin * (avgdeg / w)`. Exact whenever `w` divides every row
/// degree (each group flushes one dim_origin-long buffer).
fn grouped_atomics(p: &TrafficParams) -> f64 {
    p.num_nodes as f64 * p.dim_origin as f64 * (p.avg_degree() / p.w as f64)
}

/// Dense row-wise baseline: reads `4 * dim_origin * nnz`, writes each output
/// row once. Atomic accounting matches the grouped write-back the sparse
/// forward kernel also uses.
pub fn traffic_spmm_baseline(p: TrafficParams) -> Result<TrafficReport> {
    p.validate()?;
    Ok(TrafficReport {
        kernel: KernelKind::Spmm,
        read_bytes: spmm_read_bytes(&p),
        write_bytes: F32_BYTES * p.num_nodes * p.dim_origin,
        atomic_ops: grouped_atomics(&p),
        reduction_vs_spmm_pct: 0.0,
        params: p,
    })
}

/// Forward kernel: every edge fetches one sparse row, value block plus index
/// block, `(4 + index_bytes) * dim_k * nnz` bytes in total; the output is
/// accumulated through grouped atomics.
pub fn traffic_spgemm_forward(p: TrafficParams) -> Result<TrafficReport> {
    p.validate()?;
    Ok(TrafficReport {
        kernel: KernelKind::Spgemm,
        read_bytes: (F32_BYTES + p.index_bytes) * p.dim_k * p.nnz,
        write_bytes: 0,
        atomic_ops: grouped_atomics(&p),
        reduction_vs_spmm_pct: reduction_pct(&p),
        params: p,
    })
}

/// Backward kernel: one dense prefetch of the whole gradient matrix
/// (`4 * N * dim_origin`), then per edge an index fetch plus a
/// read-modify-write of the sparse output row.
pub fn traffic_sspmm_backward(p: TrafficParams) -> Result<TrafficReport> {
    p.validate()?;
    Ok(TrafficReport {
        kernel: KernelKind::Sspmm,
        read_bytes: F32_BYTES * p.num_nodes * p.dim_origin
            + (F32_BYTES + p.index_bytes) * p.dim_k * p.nnz,
        write_bytes: F32_BYTES * p.dim_k * p.nnz,
        atomic_ops: (p.dim_k * p.nnz) as f64,
        reduction_vs_spmm_pct: reduction_pct(&p),
        params: p,
    })
}

/// Wraps counted totals from an instrumented run into a report.
pub fn report_from_counter(
    kernel: KernelKind,
    counter: &TrafficCounter,
    p: TrafficParams,
) -> TrafficReport {
    let baseline = spmm_read_bytes(&p) as f64;
    let reduction = if baseline == 0.0 {
        0.0
    } else {
        (baseline - counter.read_bytes as f64) / baseline * 100.0
    };
    TrafficReport {
        kernel,
        read_bytes: counter.read_bytes,
        write_bytes: counter.write_bytes,
        atomic_ops: counter.atomic_ops as f64,
        reduction_vs_spmm_pct: reduction,
        params: p,
    }
}

/// Caveat attached to every traffic table; on-device profilers measure
/// post-cache traffic while this model counts raw accesses.
pub const CACHE_CAVEAT: &str =
    "note: model counts pre-cache global-memory traffic; profiler totals include cache effects";

/// Human-readable table over a set of reports, with the cache caveat and a
/// "no benefit" flag on rows whose reduction is not positive.
pub fn render_table(reports: &[TrafficReport]) -> String {
    let mut out = String::new();
    if let Some(first) = reports.first() {
        let p = first.params;
        out.push_str(&format!(
            "params: N={} nnz={} dim_origin={} dim_k={} index_bytes={} w={}\n",
            p.num_nodes, p.nnz, p.dim_origin, p.dim_k, p.index_bytes, p.w
        ));
    }
    out.push_str(&format!(
        "{:<8} {:>18} {:>18} {:>18} {:>12}\n",
        "kernel", "read_bytes", "write_bytes", "atomic_ops", "reduction_%"
    ));
    for r in reports {
        let flag = if r.kernel != KernelKind::Spmm && r.no_benefit() {
            "  [no benefit]"
        } else {
            ""
        };
        out.push_str(&format!(
            "{:<8} {:>18} {:>18} {:>18.1} {:>12.4}{}\n",
            r.kernel.name(),
            r.read_bytes,
            r.write_bytes,
            r.atomic_ops,
            r.reduction_vs_spmm_pct,
            flag
        ));
    }
    out.push_str(CACHE_CAVEAT);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(dim_origin: u64, dim_k: u64, index_bytes: u64) -> TrafficParams {
        TrafficParams {
            num_nodes: 1_000,
            nnz: 10_000,
            dim_origin,
            dim_k,
            index_bytes,
            w: 32,
        }
    }

    #[test]
    fn headline_reduction_two_byte_index() {
        let r = traffic_spgemm_forward(params(256, 16, 2)).unwrap();
        assert!((r.reduction_vs_spmm_pct - 90.625).abs() < 1e-9);
    }

    #[test]
    fn one_byte_index_reduction() {
        let r = traffic_spgemm_forward(params(256, 16, 1)).unwrap();
        let expected = (1024.0 - 80.0) / 1024.0 * 100.0;
        assert!((r.reduction_vs_spmm_pct - expected).abs() < 1e-9);
        assert!((r.reduction_vs_spmm_pct - 92.1875).abs() < 1e-9);
    }

    #[test]
    fn degenerate_full_k_no_index_is_zero_reduction() {
        let r = traffic_spgemm_forward(params(256, 256, 0)).unwrap();
        assert_eq!(r.reduction_vs_spmm_pct, 0.0);
        assert!(r.no_benefit());
    }

    #[test]
    fn invalid_index_bytes_is_parameter_error() {
        assert!(matches!(
            traffic_spgemm_forward(params(256, 16, 3)),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn sspmm_write_reduction_vanishes_at_full_k() {
        let full = traffic_sspmm_backward(params(256, 256, 1)).unwrap();
        let baseline_writes = 4 * 256 * 10_000;
        assert_eq!(full.write_bytes, baseline_writes);
    }

    #[test]
    fn nnz_scaling_is_linear() {
        let base = params(256, 32, 1);
        let doubled = TrafficParams {
            nnz: base.nnz * 2,
            ..base
        };
        let r1 = traffic_sspmm_backward(base).unwrap();
        let r2 = traffic_sspmm_backward(doubled).unwrap();
        let fixed = 4 * base.num_nodes * base.dim_origin;
        assert_eq!(r2.read_bytes - fixed, 2 * (r1.read_bytes - fixed));
        assert_eq!(r2.write_bytes, 2 * r1.write_bytes);
    }

    #[test]
    fn reduction_grows_as_dim_k_shrinks() {
        let mut last = -1.0f64;
        for k in [192, 128, 96, 64, 32, 16, 8, 4, 2] {
            let r = traffic_spgemm_forward(params(256, k, 1)).unwrap();
            assert!(r.reduction_vs_spmm_pct > last);
            last = r.reduction_vs_spmm_pct;
        }
    }

    #[test]
    fn reddit_scale_read_bytes() {
        let p = TrafficParams {
            num_nodes: 232_965,
            nnz: 114_615_891,
            dim_origin: 256,
            dim_k: 32,
            index_bytes: 1,
            w: 32,
        };
        let r = traffic_sspmm_backward(p).unwrap();
        let prefetch_gb = (4 * p.num_nodes * p.dim_origin) as f64 / 1e9;
        let stream_gb = (5 * p.dim_k * p.nnz) as f64 / 1e9;
        assert!((prefetch_gb - 0.2386).abs() < 1e-3);
        assert!((stream_gb - 18.34).abs() < 0.01);
        assert!((r.read_gb() - (prefetch_gb + stream_gb)).abs() < 1e-9);
    }
}
