//! Forward row-wise SpGEMM and backward outer-product SSpMM over
//! CSR x CBSR, plus the dense reference kernel.
//!
//! Both sparse kernels walk the edge groups of an [`EdgeGroupPlan`]. Each
//! group owns an [`AccumBuffer`] standing in for the per-warp shared-memory
//! buffer; the only shared mutable state in parallel mode is the output,
//! accumulated through atomic adds. Deterministic mode serializes groups in
//! plan order, which makes runs bit-reproducible.
//!
//! Instrumented variants count the feature-matrix bytes each access pattern
//! touches; see the `traffic` module for what is and is not counted. The
//! counts do not depend on the execution mode.

use rayon::prelude::*;

use crate::cbsr::CbsrMatrix;
use crate::dense::{DenseMatrix, Scalar};
use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::partition::{EdgeGroup, EdgeGroupPlan};
use crate::traffic::TrafficCounter;

/// Execution strategy for the sparse kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    /// Sequential edge-group order; bit-reproducible.
    Deterministic,
    /// Edge groups run concurrently; output accumulated with atomic adds.
    Parallel,
}

impl ExecMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "det" | "deterministic" => Some(ExecMode::Deterministic),
            "par" | "parallel" => Some(ExecMode::Parallel),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExecMode::Deterministic => "det",
            ExecMode::Parallel => "par",
        }
    }
}

/// One group's scratch accumulator, length `dim_origin`. Models the
/// per-warp shared-memory buffer of the write-back stage.
#[derive(Debug, Clone)]
pub struct AccumBuffer<T> {
    values: Vec<T>,
}

impl<T: Scalar> AccumBuffer<T> {
    pub fn new(dim_origin: usize) -> Self {
        AccumBuffer {
            values: vec![T::zero(); dim_origin],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn reset(&mut self) {
        self.values.fill(T::zero());
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    /// `values[indices[t]] += scale * data[t]` for every retained entry.
    #[inline]
    pub fn scatter_add(&mut self, indices: &[u32], data: &[T], scale: T) {
        for (&c, &v) in indices.iter().zip(data) {
            self.values[c as usize] += scale * v;
        }
    }

    /// Fills the buffer with a dense row (the backward prefetch stage).
    pub fn load_row(&mut self, row: &[T]) {
        self.values.copy_from_slice(row);
    }
}

fn check_spgemm_inputs<T: Scalar>(
    a: &CsrGraph,
    xs: &CbsrMatrix<T>,
    plan: &EdgeGroupPlan,
) -> Result<()> {
    if xs.num_rows() != a.num_nodes() {
        return Err(Error::Dimension(format!(
            "feature rows {} != graph nodes {}",
            xs.num_rows(),
            a.num_nodes()
        )));
    }
    plan.validate_for(a)
}

/// Reference kernel: exact naive CSR x dense product with ascending-column
/// accumulation order. Serves as the oracle and the SpMM traffic baseline.
pub fn dense_spmm<T: Scalar>(a: &CsrGraph, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    Ok(dense_spmm_counted(a, x)?.0)
}

pub fn dense_spmm_counted<T: Scalar>(
    a: &CsrGraph,
    x: &DenseMatrix<T>,
) -> Result<(DenseMatrix<T>, TrafficCounter)> {
    if x.rows() != a.num_nodes() {
        return Err(Error::Dimension(format!(
            "feature rows {} != graph nodes {}",
            x.rows(),
            a.num_nodes()
        )));
    }
    let dim = x.cols();
    let mut out = DenseMatrix::zeros(a.num_nodes(), dim);
    let mut counter = TrafficCounter::default();
    for i in 0..a.num_nodes() {
        let (cols, vals) = a.row(i);
        let out_row = out.row_mut(i);
        for (&j, &e) in cols.iter().zip(vals) {
            let scale = T::from_f32(e);
            let x_row = x.row(j as usize);
            for (o, &v) in out_row.iter_mut().zip(x_row) {
                *o += scale * v;
            }
            counter.read_bytes += 4 * dim as u64;
        }
    }
    // final output store, one row per node
    counter.write_bytes += 4 * (a.num_nodes() * dim) as u64;
    Ok((out, counter))
}

/// `A^T * x` through the transpose-free scatter order: column j of the
/// transpose is row j of `a`. Deterministic; used by the dense baselines.
pub fn dense_spmm_transposed<T: Scalar>(
    a: &CsrGraph,
    x: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>> {
    if x.rows() != a.num_nodes() {
        return Err(Error::Dimension(format!(
            "feature rows {} != graph nodes {}",
            x.rows(),
            a.num_nodes()
        )));
    }
    let dim = x.cols();
    let mut out = DenseMatrix::zeros(a.num_nodes(), dim);
    for i in 0..a.num_nodes() {
        let (cols, vals) = a.row(i);
        let x_row = x.row(i);
        for (&j, &e) in cols.iter().zip(vals) {
            let scale = T::from_f32(e);
            let out_row = out.row_mut(j as usize);
            for (o, &v) in out_row.iter_mut().zip(x_row) {
                *o += scale * v;
            }
        }
    }
    Ok(out)
}

/// Forward aggregation: for every edge group of row i, each edge (i, j)
/// scales sparse row j into the group buffer at the positions named by
/// `sp_index`; the buffer is then accumulated into output row i.
///
/// Equals `dense_spmm(a, xs.densify())` within accumulation tolerance.
pub fn spgemm_forward<T: Scalar>(
    a: &CsrGraph,
    xs: &CbsrMatrix<T>,
    plan: &EdgeGroupPlan,
    mode: ExecMode,
) -> Result<DenseMatrix<T>> {
    Ok(spgemm_forward_counted(a, xs, plan, mode)?.0)
}

pub fn spgemm_forward_counted<T: Scalar>(
    a: &CsrGraph,
    xs: &CbsrMatrix<T>,
    plan: &EdgeGroupPlan,
    mode: ExecMode,
) -> Result<(DenseMatrix<T>, TrafficCounter)> {
    check_spgemm_inputs(a, xs, plan)?;
    let n = a.num_nodes();
    let dim = xs.dim_origin();
    let k = xs.dim_k() as u64;
    let fetch_bytes = (4 + xs.index_width().bytes() as u64) * k;

    match mode {
        ExecMode::Deterministic => {
            let mut out = DenseMatrix::zeros(n, dim);
            let mut counter = TrafficCounter::default();
            let mut buf = AccumBuffer::new(dim);
            for group in plan.groups() {
                buf.reset();
                spgemm_group(a, xs, group, &mut buf, fetch_bytes, &mut counter);
                let out_row = out.row_mut(group.row as usize);
                for (o, &b) in out_row.iter_mut().zip(buf.as_slice()) {
                    *o += b;
                }
                counter.atomic_ops += dim as u64;
            }
            Ok((out, counter))
        }
        ExecMode::Parallel => {
            let out = T::atomic_zeroed(n * dim);
            let counter = plan
                .groups()
                .par_iter()
                .map(|group| {
                    let mut counter = TrafficCounter::default();
                    let mut buf = AccumBuffer::new(dim);
                    spgemm_group(a, xs, group, &mut buf, fetch_bytes, &mut counter);
                    let base = group.row as usize * dim;
                    for (t, &b) in buf.as_slice().iter().enumerate() {
                        T::atomic_add(&out[base + t], b);
                    }
                    counter.atomic_ops += dim as u64;
                    counter
                })
                .reduce(TrafficCounter::default, TrafficCounter::merge);
            let data = T::atomic_into_vec(out);
            Ok((DenseMatrix::from_vec(n, dim, data), counter))
        }
    }
}

#[inline]
fn spgemm_group<T: Scalar>(
    a: &CsrGraph,
    xs: &CbsrMatrix<T>,
    group: &EdgeGroup,
    buf: &mut AccumBuffer<T>,
    fetch_bytes: u64,
    counter: &mut TrafficCounter,
) {
    let start = group.edge_start as usize;
    let end = start + group.edge_count as usize;
    for e in start..end {
        let j = a.col_idx()[e] as usize;
        let scale = T::from_f32(a.edge_val()[e]);
        buf.scatter_add(xs.row_index(j), xs.row_data(j), scale);
        counter.read_bytes += fetch_bytes;
    }
}

fn check_sspmm_inputs<T: Scalar>(
    a: &CsrGraph,
    dxl: &DenseMatrix<T>,
    pattern: &CbsrMatrix<T>,
    plan: &EdgeGroupPlan,
) -> Result<()> {
    if dxl.rows() != a.num_nodes() || pattern.num_rows() != a.num_nodes() {
        return Err(Error::Dimension(format!(
            "gradient rows {} / pattern rows {} != graph nodes {}",
            dxl.rows(),
            pattern.num_rows(),
            a.num_nodes()
        )));
    }
    if pattern.dim_origin() > dxl.cols() {
        return Err(Error::Bounds {
            what: "pattern column",
            index: pattern.dim_origin() - 1,
            bound: dxl.cols(),
        });
    }
    if pattern.dim_origin() != dxl.cols() {
        return Err(Error::Dimension(format!(
            "pattern dim_origin {} != gradient cols {}",
            pattern.dim_origin(),
            dxl.cols()
        )));
    }
    plan.validate_for(a)
}

/// Backward sampled product: computes `gather(A^T * dxl, pattern)` without
/// forming the dense product. Stage 1 prefetches each dense gradient row
/// once; stage 2 walks the same edge groups as the forward pass and
/// accumulates `edge * buf[sp_index[j][t]]` into sparse output row j.
///
/// The CSR storage of `a` is read column-wise as the CSC form of its
/// transpose, so no transposed copy exists.
pub fn sspmm_backward<T: Scalar>(
    a: &CsrGraph,
    dxl: &DenseMatrix<T>,
    pattern: &CbsrMatrix<T>,
    plan: &EdgeGroupPlan,
    mode: ExecMode,
) -> Result<CbsrMatrix<T>> {
    Ok(sspmm_backward_counted(a, dxl, pattern, plan, mode)?.0)
}

pub fn sspmm_backward_counted<T: Scalar>(
    a: &CsrGraph,
    dxl: &DenseMatrix<T>,
    pattern: &CbsrMatrix<T>,
    plan: &EdgeGroupPlan,
    mode: ExecMode,
) -> Result<(CbsrMatrix<T>, TrafficCounter)> {
    check_sspmm_inputs(a, dxl, pattern, plan)?;
    let n = a.num_nodes();
    let dim = pattern.dim_origin();
    let k = pattern.dim_k();
    // per-edge: index fetch + read-modify-write of the sparse output row
    let index_bytes = pattern.index_width().bytes() as u64;
    let prefetch_bytes = 4 * (n * dim) as u64;

    let mut counter;
    let data = match mode {
        ExecMode::Deterministic => {
            counter = TrafficCounter::default();
            let mut data = vec![T::zero(); n * k];
            let mut buf = AccumBuffer::new(dim);
            for group in plan.groups() {
                buf.load_row(dxl.row(group.row as usize));
                sspmm_group(a, pattern, group, &buf, k, index_bytes, &mut data, &mut counter);
            }
            data
        }
        ExecMode::Parallel => {
            let out = T::atomic_zeroed(n * k);
            counter = plan
                .groups()
                .par_iter()
                .map(|group| {
                    let mut counter = TrafficCounter::default();
                    let mut buf = AccumBuffer::new(dim);
                    buf.load_row(dxl.row(group.row as usize));
                    let start = group.edge_start as usize;
                    let end = start + group.edge_count as usize;
                    for e in start..end {
                        let j = a.col_idx()[e] as usize;
                        let scale = T::from_f32(a.edge_val()[e]);
                        let idx = pattern.row_index(j);
                        let base = j * k;
                        for (t, &c) in idx.iter().enumerate() {
                            T::atomic_add(&out[base + t], scale * buf.as_slice()[c as usize]);
                        }
                        counter.read_bytes += (index_bytes + 4) * k as u64;
                        counter.write_bytes += 4 * k as u64;
                        counter.atomic_ops += k as u64;
                    }
                    counter
                })
                .reduce(TrafficCounter::default, TrafficCounter::merge);
            T::atomic_into_vec(out)
        }
    };
    counter.read_bytes += prefetch_bytes;
    let result = pattern.with_data(data)?;
    Ok((result, counter))
}

#[inline]
#[allow(clippy::too_many_arguments)]
fn sspmm_group<T: Scalar>(
    a: &CsrGraph,
    pattern: &CbsrMatrix<T>,
    group: &EdgeGroup,
    buf: &AccumBuffer<T>,
    k: usize,
    index_bytes: u64,
    data: &mut [T],
    counter: &mut TrafficCounter,
) {
    let start = group.edge_start as usize;
    let end = start + group.edge_count as usize;
    for e in start..end {
        let j = a.col_idx()[e] as usize;
        let scale = T::from_f32(a.edge_val()[e]);
        let idx = pattern.row_index(j);
        let base = j * k;
        for (t, &c) in idx.iter().enumerate() {
            data[base + t] += scale * buf.as_slice()[c as usize];
        }
        counter.read_bytes += (index_bytes + 4) * k as u64;
        counter.write_bytes += 4 * k as u64;
        counter.atomic_ops += k as u64;
    }
}
