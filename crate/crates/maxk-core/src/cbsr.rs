//! MaxK nonlinearity and the compressed balanced sparse row format.
//!
//! `maxk_forward` keeps the k largest values of each feature row (by value,
//! not magnitude; ties go to the lowest column index) and stores them as two
//! N-by-k blocks: `sp_data` for values and `sp_index` for column positions.
//! The backward pass reuses the forward selection pattern.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dense::{DenseMatrix, Scalar};
use crate::error::{Error, Result};

pub const CBSR_MAGIC: &[u8; 4] = b"CBSR";
pub const CBSR_VERSION: u32 = 1;

/// Bisection budget before the exact fallback takes over.
pub const DEFAULT_PIVOT_MAX_ITERATIONS: u32 = 10;

/// Storage width of one `sp_index` entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum IndexWidth {
    U8,
    U16,
    U32,
}

impl IndexWidth {
    pub fn bytes(self) -> usize {
        match self {
            IndexWidth::U8 => 1,
            IndexWidth::U16 => 2,
            IndexWidth::U32 => 4,
        }
    }

    pub fn from_bytes(b: u8) -> Option<Self> {
        match b {
            1 => Some(IndexWidth::U8),
            2 => Some(IndexWidth::U16),
            4 => Some(IndexWidth::U32),
            _ => None,
        }
    }

    /// Smallest width that can represent `dim_origin - 1`.
    pub fn auto_for(dim_origin: usize) -> Self {
        if dim_origin <= 1 << 8 {
            IndexWidth::U8
        } else if dim_origin <= 1 << 16 {
            IndexWidth::U16
        } else {
            IndexWidth::U32
        }
    }

    pub fn can_hold(self, dim_origin: usize) -> bool {
        match self {
            IndexWidth::U8 => dim_origin <= 1 << 8,
            IndexWidth::U16 => dim_origin <= 1 << 16,
            IndexWidth::U32 => dim_origin <= 1usize << 32,
        }
    }
}

/// Per-row outcome of the pivot-based k-th value selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PivotStats {
    /// Number of pivot evaluations performed.
    pub iterations: u32,
    /// Bisection hit a pivot with exactly k elements above it.
    pub converged_exactly: bool,
    /// Exact partial selection had to finish the job (ties or slow bisection).
    pub fallback_used: bool,
}

/// Aggregate of [`PivotStats`] over the rows of one `maxk_forward` call.
#[derive(Debug, Clone, Default)]
pub struct PivotSummary {
    pub rows: u64,
    pub converged_rows: u64,
    pub fallback_rows: u64,
    pub total_iterations: u64,
    /// histogram[i] = number of rows that used exactly i iterations
    pub iteration_histogram: Vec<u64>,
}

impl PivotSummary {
    pub fn record(&mut self, stats: &PivotStats) {
        self.rows += 1;
        if stats.converged_exactly {
            self.converged_rows += 1;
        }
        if stats.fallback_used {
            self.fallback_rows += 1;
        }
        self.total_iterations += stats.iterations as u64;
        let i = stats.iterations as usize;
        if self.iteration_histogram.len() <= i {
            self.iteration_histogram.resize(i + 1, 0);
        }
        self.iteration_histogram[i] += 1;
    }

    pub fn max_iterations_observed(&self) -> u32 {
        self.iteration_histogram
            .iter()
            .rposition(|&c| c > 0)
            .unwrap_or(0) as u32
    }

    /// Median iteration count (lower median for even row counts).
    pub fn median_iterations(&self) -> u32 {
        if self.rows == 0 {
            return 0;
        }
        let target = self.rows.div_ceil(2);
        let mut seen = 0;
        for (i, &c) in self.iteration_histogram.iter().enumerate() {
            seen += c;
            if seen >= target {
                return i as u32;
            }
        }
        0
    }
}

/// Sparsified feature matrix: exactly `dim_k` retained entries per row,
/// values in `sp_data` and ascending column positions in `sp_index`,
/// stored as two adjacent blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct CbsrMatrix<T = f32> {
    num_rows: usize,
    dim_origin: usize,
    dim_k: usize,
    index_width: IndexWidth,
    sp_index: Vec<u32>,
    sp_data: Vec<T>,
}

impl<T: Scalar> CbsrMatrix<T> {
    /// Assembles a matrix from raw blocks, checking every invariant.
    pub fn new(
        num_rows: usize,
        dim_origin: usize,
        dim_k: usize,
        index_width: IndexWidth,
        sp_index: Vec<u32>,
        sp_data: Vec<T>,
    ) -> Result<Self> {
        if dim_k == 0 || dim_k > dim_origin {
            return Err(Error::Dimension(format!(
                "dim_k {dim_k} must satisfy 1 <= dim_k <= dim_origin {dim_origin}"
            )));
        }
        if sp_index.len() != num_rows * dim_k || sp_data.len() != num_rows * dim_k {
            return Err(Error::Dimension("block length != num_rows * dim_k".into()));
        }
        if !index_width.can_hold(dim_origin) {
            return Err(Error::Parameter(format!(
                "index width {} bytes cannot address dim_origin {dim_origin}",
                index_width.bytes()
            )));
        }
        let m = CbsrMatrix {
            num_rows,
            dim_origin,
            dim_k,
            index_width,
            sp_index,
            sp_data,
        };
        for r in 0..num_rows {
            let idx = m.row_index(r);
            for w in idx.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Pattern(format!(
                        "sp_index row {r} not strictly increasing"
                    )));
                }
            }
            if let Some(&last) = idx.last() {
                if last as usize >= dim_origin {
                    return Err(Error::Bounds {
                        what: "sp_index entry",
                        index: last as usize,
                        bound: dim_origin,
                    });
                }
            }
        }
        Ok(m)
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn dim_origin(&self) -> usize {
        self.dim_origin
    }

    pub fn dim_k(&self) -> usize {
        self.dim_k
    }

    pub fn index_width(&self) -> IndexWidth {
        self.index_width
    }

    pub fn sp_index(&self) -> &[u32] {
        &self.sp_index
    }

    pub fn sp_data(&self) -> &[T] {
        &self.sp_data
    }

    pub fn sp_data_mut(&mut self) -> &mut [T] {
        &mut self.sp_data
    }

    #[inline]
    pub fn row_index(&self, r: usize) -> &[u32] {
        &self.sp_index[r * self.dim_k..(r + 1) * self.dim_k]
    }

    #[inline]
    pub fn row_data(&self, r: usize) -> &[T] {
        &self.sp_data[r * self.dim_k..(r + 1) * self.dim_k]
    }

    /// Fraction of entries dropped by the sparsification, `1 - k/dim_origin`.
    pub fn feature_sparsity(&self) -> f64 {
        1.0 - self.dim_k as f64 / self.dim_origin as f64
    }

    pub fn same_pattern(&self, other: &CbsrMatrix<T>) -> bool {
        self.num_rows == other.num_rows
            && self.dim_origin == other.dim_origin
            && self.dim_k == other.dim_k
            && self.sp_index == other.sp_index
    }

    /// New matrix sharing this pattern with replacement values.
    pub fn with_data(&self, sp_data: Vec<T>) -> Result<CbsrMatrix<T>> {
        if sp_data.len() != self.sp_data.len() {
            return Err(Error::Dimension("replacement data length mismatch".into()));
        }
        Ok(CbsrMatrix {
            num_rows: self.num_rows,
            dim_origin: self.dim_origin,
            dim_k: self.dim_k,
            index_width: self.index_width,
            sp_index: self.sp_index.clone(),
            sp_data,
        })
    }

    /// Samples `x` at this pattern: result[r][j] = x[r][sp_index[r][j]].
    pub fn gather(&self, x: &DenseMatrix<T>) -> Result<CbsrMatrix<T>> {
        if x.rows() != self.num_rows || x.cols() != self.dim_origin {
            return Err(Error::Dimension(format!(
                "gather input {}x{} != {}x{}",
                x.rows(),
                x.cols(),
                self.num_rows,
                self.dim_origin
            )));
        }
        let mut data = Vec::with_capacity(self.sp_index.len());
        for r in 0..self.num_rows {
            let row = x.row(r);
            for &c in self.row_index(r) {
                data.push(row[c as usize]);
            }
        }
        self.with_data(data)
    }

    /// Scatters the stored values into a dense N-by-dim_origin matrix,
    /// zeros elsewhere.
    pub fn densify(&self) -> DenseMatrix<T> {
        let mut out = DenseMatrix::zeros(self.num_rows, self.dim_origin);
        for r in 0..self.num_rows {
            let dst = out.row_mut(r);
            for (&c, &v) in self.row_index(r).iter().zip(self.row_data(r)) {
                dst[c as usize] = v;
            }
        }
        out
    }

    pub fn convert<U: Scalar>(&self) -> CbsrMatrix<U> {
        CbsrMatrix {
            num_rows: self.num_rows,
            dim_origin: self.dim_origin,
            dim_k: self.dim_k,
            index_width: self.index_width,
            sp_index: self.sp_index.clone(),
            sp_data: self.sp_data.iter().map(|v| U::from_f64(v.as_f64())).collect(),
        }
    }
}

impl CbsrMatrix<f32> {
    /// Binary dump: "CBSR", version, N, dim_origin, dim_k, index width, then
    /// the sp_index block (row-major, entries at the stored width) followed
    /// by the sp_data block (row-major f32). Little-endian throughout.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CBSR_MAGIC)?;
        w.write_all(&CBSR_VERSION.to_le_bytes())?;
        w.write_all(&(self.num_rows as u64).to_le_bytes())?;
        w.write_all(&(self.dim_origin as u32).to_le_bytes())?;
        w.write_all(&(self.dim_k as u32).to_le_bytes())?;
        w.write_all(&[self.index_width.bytes() as u8])?;
        for &idx in &self.sp_index {
            match self.index_width {
                IndexWidth::U8 => w.write_all(&[idx as u8])?,
                IndexWidth::U16 => w.write_all(&(idx as u16).to_le_bytes())?,
                IndexWidth::U32 => w.write_all(&idx.to_le_bytes())?,
            }
        }
        for &v in &self.sp_data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path.as_ref())?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|_| Error::Truncated("CBSR magic".into()))?;
        if &magic != CBSR_MAGIC {
            return Err(Error::format(0, "bad magic, expected CBSR"));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)
            .map_err(|_| Error::Truncated("CBSR version".into()))?;
        let version = u32::from_le_bytes(b4);
        if version != CBSR_VERSION {
            return Err(Error::format(0, format!("unsupported version {version}")));
        }
        r.read_exact(&mut b8)
            .map_err(|_| Error::Truncated("CBSR row count".into()))?;
        let num_rows = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b4)
            .map_err(|_| Error::Truncated("CBSR dim_origin".into()))?;
        let dim_origin = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4)
            .map_err(|_| Error::Truncated("CBSR dim_k".into()))?;
        let dim_k = u32::from_le_bytes(b4) as usize;
        let mut b1 = [0u8; 1];
        r.read_exact(&mut b1)
            .map_err(|_| Error::Truncated("CBSR index width".into()))?;
        let width = IndexWidth::from_bytes(b1[0])
            .ok_or_else(|| Error::format(0, format!("invalid index width {}", b1[0])))?;

        let entries = num_rows * dim_k;
        let mut sp_index = Vec::with_capacity(entries);
        for _ in 0..entries {
            let idx = match width {
                IndexWidth::U8 => {
                    r.read_exact(&mut b1)
                        .map_err(|_| Error::Truncated("sp_index block".into()))?;
                    b1[0] as u32
                }
                IndexWidth::U16 => {
                    let mut b2 = [0u8; 2];
                    r.read_exact(&mut b2)
                        .map_err(|_| Error::Truncated("sp_index block".into()))?;
                    u16::from_le_bytes(b2) as u32
                }
                IndexWidth::U32 => {
                    r.read_exact(&mut b4)
                        .map_err(|_| Error::Truncated("sp_index block".into()))?;
                    u32::from_le_bytes(b4)
                }
            };
            sp_index.push(idx);
        }
        let mut sp_data = Vec::with_capacity(entries);
        for _ in 0..entries {
            r.read_exact(&mut b4)
                .map_err(|_| Error::Truncated("sp_data block".into()))?;
            sp_data.push(f32::from_le_bytes(b4));
        }
        CbsrMatrix::new(num_rows, dim_origin, dim_k, width, sp_index, sp_data)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path.as_ref())?))
    }
}

/// Pivot-based k-th value selection over one row.
///
/// Bisects the value range: pivot = (min + max) / 2, count elements above
/// the pivot, and shrink the half-interval until the count equals `k`. On
/// ties or slow convergence the exact partial selection takes over, so the
/// selected set always matches a full sort.
///
/// Returns the cut threshold: the selected entries are those strictly above
/// it, topped up in ascending index order from the entries equal to it when
/// the strict set is short (only possible after fallback).
pub fn pivot_select_row<T: Scalar>(row: &[T], k: usize, max_iterations: u32) -> (T, PivotStats) {
    assert!(k >= 1 && k <= row.len(), "need 1 <= k <= row length");

    if k == row.len() {
        // Every element is selected; any threshold below the minimum works.
        return (
            T::neg_infinity(),
            PivotStats {
                iterations: 0,
                converged_exactly: true,
                fallback_used: false,
            },
        );
    }

    let mut lo = row[0];
    let mut hi = row[0];
    for &v in &row[1..] {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }

    let half = T::from_f64(0.5);
    let mut iterations = 0u32;
    while iterations < max_iterations {
        let pivot = (lo + hi) * half;
        if pivot <= lo || pivot >= hi {
            break; // interval exhausted (all ties or denormal gap)
        }
        iterations += 1;
        let count = row.iter().filter(|&&v| v > pivot).count();
        if count == k {
            return (
                pivot,
                PivotStats {
                    iterations,
                    converged_exactly: true,
                    fallback_used: false,
                },
            );
        }
        if count > k {
            lo = pivot;
        } else {
            hi = pivot;
        }
    }

    // Exact fallback: the threshold is the k-th largest value.
    let mut order: Vec<u32> = (0..row.len() as u32).collect();
    order.select_nth_unstable_by(k - 1, |&a, &b| {
        row[b as usize]
            .partial_cmp(&row[a as usize])
            .expect("non-finite value in pivot selection")
            .then(a.cmp(&b))
    });
    let kth = row[order[k - 1] as usize];
    (
        kth,
        PivotStats {
            iterations,
            converged_exactly: false,
            fallback_used: true,
        },
    )
}

/// Selected column set for one row, derived from a `pivot_select_row` cut.
/// Always identical to sorting by (value desc, index asc) and taking k.
fn select_row_indices<T: Scalar>(row: &[T], k: usize, threshold: T) -> Vec<u32> {
    let mut selected = Vec::with_capacity(k);
    let mut equal = Vec::new();
    for (i, &v) in row.iter().enumerate() {
        if v > threshold {
            selected.push(i as u32);
        } else if v == threshold {
            equal.push(i as u32);
        }
    }
    debug_assert!(selected.len() <= k);
    let missing = k - selected.len();
    selected.extend_from_slice(&equal[..missing]);
    selected.sort_unstable();
    selected
}

/// Per-row top-k by value; negative values are eligible. The result densifies
/// back to `x` with every non-selected entry zeroed.
pub fn maxk_forward<T: Scalar>(
    x: &DenseMatrix<T>,
    k: usize,
    index_width: Option<IndexWidth>,
) -> Result<(CbsrMatrix<T>, PivotSummary)> {
    maxk_forward_with(x, k, index_width, DEFAULT_PIVOT_MAX_ITERATIONS)
}

/// `maxk_forward` with an explicit bisection budget.
pub fn maxk_forward_with<T: Scalar>(
    x: &DenseMatrix<T>,
    k: usize,
    index_width: Option<IndexWidth>,
    max_iterations: u32,
) -> Result<(CbsrMatrix<T>, PivotSummary)> {
    let dim_origin = x.cols();
    if k == 0 || k > dim_origin {
        return Err(Error::Dimension(format!(
            "k {k} must satisfy 1 <= k <= dim_origin {dim_origin}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::Numeric("maxk_forward input must be finite".into()));
    }
    let width = match index_width {
        Some(w) => {
            if !w.can_hold(dim_origin) {
                return Err(Error::Parameter(format!(
                    "index width {} bytes cannot address dim_origin {dim_origin}",
                    w.bytes()
                )));
            }
            w
        }
        None => IndexWidth::auto_for(dim_origin),
    };

    let mut summary = PivotSummary::default();
    let mut sp_index = Vec::with_capacity(x.rows() * k);
    let mut sp_data = Vec::with_capacity(x.rows() * k);
    for r in 0..x.rows() {
        let row = x.row(r);
        let (threshold, stats) = pivot_select_row(row, k, max_iterations);
        summary.record(&stats);
        let indices = select_row_indices(row, k, threshold);
        for &c in &indices {
            sp_data.push(row[c as usize]);
        }
        sp_index.extend_from_slice(&indices);
    }
    let m = CbsrMatrix::new(x.rows(), dim_origin, k, width, sp_index, sp_data)?;
    Ok((m, summary))
}

/// Scatters upstream gradient values back to dense positions chosen by the
/// forward pass; everything outside the pattern is zero.
pub fn maxk_backward<T: Scalar>(
    upstream: &CbsrMatrix<T>,
    forward_pattern: &CbsrMatrix<T>,
) -> Result<DenseMatrix<T>> {
    if !upstream.same_pattern(forward_pattern) {
        return Err(Error::Pattern(
            "upstream gradient does not share the forward sp_index".into(),
        ));
    }
    Ok(upstream.densify())
}
