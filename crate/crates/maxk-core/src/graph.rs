//! Graph ingestion and the CSR adjacency representation.
//!
//! The transpose used by the backward kernel is never materialized: a CSR
//! matrix reinterpreted column-wise is exactly the CSC storage of its
//! transpose, so [`CsrGraph::transpose_view`] is a zero-copy handle.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dense::{DenseMatrix, Scalar};
use crate::error::{Error, Result};

pub const EDGE_LIST_MAGIC: &[u8; 4] = b"MXKG";
pub const EDGE_LIST_VERSION: u32 = 1;

/// Normalization applied to adjacency values before aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationKind {
    /// Values kept as loaded.
    None,
    /// Mean aggregator: every value in row i becomes 1/degree(i).
    Mean,
    /// Symmetric normalization: value (i, j) becomes 1/sqrt(d_i * d_j).
    Symmetric,
}

impl NormalizationKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(NormalizationKind::None),
            "mean" => Some(NormalizationKind::Mean),
            "symmetric" | "sym" => Some(NormalizationKind::Symmetric),
            _ => None,
        }
    }
}

/// Square sparse adjacency matrix in compressed sparse row form.
///
/// Immutable after construction. Column indices are strictly increasing
/// within each row and duplicate input edges are merged by summing their
/// values, so equal edge sets always produce identical storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrGraph {
    num_nodes: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    edge_val: Vec<f32>,
}

impl CsrGraph {
    /// Builds a graph from (src, dst, weight) triples.
    ///
    /// Edges may arrive in any order; duplicates are merged by summing.
    pub fn from_edges(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (u32, u32, f32)>,
    ) -> Result<Self> {
        let mut triples: Vec<(u32, u32, f32)> = edges.into_iter().collect();
        for &(s, d, _) in &triples {
            if s as usize >= num_nodes {
                return Err(Error::Bounds {
                    what: "source node",
                    index: s as usize,
                    bound: num_nodes,
                });
            }
            if d as usize >= num_nodes {
                return Err(Error::Bounds {
                    what: "destination node",
                    index: d as usize,
                    bound: num_nodes,
                });
            }
        }
        triples.sort_by_key(|&(s, d, _)| (s, d));

        let mut row_ptr = vec![0usize; num_nodes + 1];
        let mut col_idx = Vec::with_capacity(triples.len());
        let mut edge_val: Vec<f32> = Vec::with_capacity(triples.len());
        let mut last: Option<(u32, u32)> = None;
        for (s, d, v) in triples {
            if last == Some((s, d)) {
                *edge_val.last_mut().unwrap() += v;
                continue;
            }
            // row_ptr[s+1] tracks the running end of row s while rows are
            // appended in sorted order.
            col_idx.push(d);
            edge_val.push(v);
            row_ptr[s as usize + 1] = col_idx.len();
            last = Some((s, d));
        }
        // Turn per-row end markers into prefix offsets.
        for i in 1..=num_nodes {
            if row_ptr[i] == 0 {
                row_ptr[i] = row_ptr[i - 1];
            }
        }
        Ok(CsrGraph {
            num_nodes,
            row_ptr,
            col_idx,
            edge_val,
        })
    }

    /// Identity matrix: one self-loop of weight 1 per node.
    pub fn identity(num_nodes: usize) -> Self {
        CsrGraph {
            num_nodes,
            row_ptr: (0..=num_nodes).collect(),
            col_idx: (0..num_nodes as u32).collect(),
            edge_val: vec![1.0; num_nodes],
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.col_idx.len()
    }

    pub fn avg_degree(&self) -> f64 {
        if self.num_nodes == 0 {
            0.0
        } else {
            self.num_edges() as f64 / self.num_nodes as f64
        }
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[u32] {
        &self.col_idx
    }

    pub fn edge_val(&self) -> &[f32] {
        &self.edge_val
    }

    pub fn degree(&self, node: usize) -> usize {
        self.row_ptr[node + 1] - self.row_ptr[node]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_nodes).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[u32], &[f32]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.edge_val[span])
    }

    /// Returns a copy with edge values rewritten for the given aggregator.
    /// Zero-degree rows stay empty.
    pub fn normalize(&self, kind: NormalizationKind) -> CsrGraph {
        let mut out = self.clone();
        match kind {
            NormalizationKind::None => {}
            NormalizationKind::Mean => {
                for i in 0..self.num_nodes {
                    let deg = self.degree(i);
                    if deg == 0 {
                        continue;
                    }
                    let inv = 1.0 / deg as f32;
                    for v in &mut out.edge_val[self.row_ptr[i]..self.row_ptr[i + 1]] {
                        *v = inv;
                    }
                }
            }
            NormalizationKind::Symmetric => {
                for i in 0..self.num_nodes {
                    let d_i = self.degree(i);
                    for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                        let j = self.col_idx[e] as usize;
                        // Degree clamped to 1 so directed inputs stay finite.
                        let d_j = self.degree(j).max(1);
                        out.edge_val[e] = 1.0 / ((d_i * d_j) as f32).sqrt();
                    }
                }
            }
        }
        out
    }

    /// Zero-copy reinterpretation of this CSR matrix as the CSC storage of
    /// its transpose. No arrays are copied or allocated.
    pub fn transpose_view(&self) -> CscTransposeView<'_> {
        CscTransposeView { graph: self }
    }

    pub fn to_dense<T: Scalar>(&self) -> DenseMatrix<T> {
        let mut out = DenseMatrix::zeros(self.num_nodes, self.num_nodes);
        for i in 0..self.num_nodes {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out.set(i, j as usize, T::from_f32(v));
            }
        }
        out
    }

    // ------------------------------------------------------------------
    // Matrix Market coordinate format (ASCII, 1-based).
    // ------------------------------------------------------------------

    pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path.as_ref())?;
        Self::read_matrix_market(BufReader::new(file))
    }

    pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();

        let (line_no, header) = match lines.next() {
            Some((n, l)) => (n + 1, l?),
            None => return Err(Error::format(1, "empty file")),
        };
        let mut tokens = header.split_whitespace();
        if tokens.next() != Some("%%MatrixMarket") {
            return Err(Error::format(line_no, "missing %%MatrixMarket header"));
        }
        if tokens.next() != Some("matrix") {
            return Err(Error::format(line_no, "expected object 'matrix'"));
        }
        if tokens.next() != Some("coordinate") {
            return Err(Error::format(line_no, "expected format 'coordinate'"));
        }
        let field = match tokens.next() {
            Some(f @ ("pattern" | "real" | "integer")) => f.to_string(),
            Some(other) => {
                return Err(Error::format(
                    line_no,
                    format!("unsupported field '{other}' (expected pattern or real)"),
                ))
            }
            None => return Err(Error::format(line_no, "missing field qualifier")),
        };
        let symmetric = match tokens.next() {
            Some("general") => false,
            Some("symmetric") => true,
            Some(other) => {
                return Err(Error::format(
                    line_no,
                    format!("unsupported symmetry '{other}'"),
                ))
            }
            None => return Err(Error::format(line_no, "missing symmetry qualifier")),
        };
        let pattern = field == "pattern";

        // Size line: first non-comment, non-blank line.
        let mut dims: Option<(usize, usize, usize)> = None;
        let mut size_line = 0usize;
        for (n, line) in &mut lines {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('%') {
                continue;
            }
            let mut it = trimmed.split_whitespace();
            let parse =
                |tok: Option<&str>, what: &str, n: usize| -> Result<usize> {
                    tok.ok_or_else(|| Error::format(n + 1, format!("missing {what}")))?
                        .parse::<usize>()
                        .map_err(|_| Error::format(n + 1, format!("cannot parse {what}")))
                };
            let rows = parse(it.next(), "row count", n)?;
            let cols = parse(it.next(), "column count", n)?;
            let nnz = parse(it.next(), "nonzero count", n)?;
            dims = Some((rows, cols, nnz));
            size_line = n + 1;
            break;
        }
        let (rows, cols, declared_nnz) =
            dims.ok_or_else(|| Error::format(line_no + 1, "missing size line"))?;
        if rows != cols {
            return Err(Error::format(
                size_line,
                format!("adjacency matrix must be square, got {rows}x{cols}"),
            ));
        }
        let num_nodes = rows;

        let mut edges: Vec<(u32, u32, f32)> = Vec::with_capacity(declared_nnz);
        let mut seen = 0usize;
        for (n, line) in &mut lines {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('%') {
                continue;
            }
            let line_no = n + 1;
            let mut it = trimmed.split_whitespace();
            let i: usize = it
                .next()
                .ok_or_else(|| Error::format(line_no, "missing row index"))?
                .parse()
                .map_err(|_| Error::format(line_no, "cannot parse row index"))?;
            let j: usize = it
                .next()
                .ok_or_else(|| Error::format(line_no, "missing column index"))?
                .parse()
                .map_err(|_| Error::format(line_no, "cannot parse column index"))?;
            let value: f32 = if pattern {
                1.0
            } else {
                it.next()
                    .ok_or_else(|| Error::format(line_no, "missing value"))?
                    .parse()
                    .map_err(|_| Error::format(line_no, "cannot parse value"))?
            };
            if i == 0 || i > num_nodes {
                return Err(Error::Bounds {
                    what: "row",
                    index: i,
                    bound: num_nodes,
                });
            }
            if j == 0 || j > num_nodes {
                return Err(Error::Bounds {
                    what: "column",
                    index: j,
                    bound: num_nodes,
                });
            }
            let (src, dst) = ((i - 1) as u32, (j - 1) as u32);
            edges.push((src, dst, value));
            if symmetric && src != dst {
                edges.push((dst, src, value));
            }
            seen += 1;
        }
        if seen != declared_nnz {
            return Err(Error::Truncated(format!(
                "expected {declared_nnz} entries, found {seen}"
            )));
        }
        Self::from_edges(num_nodes, edges)
    }

    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.num_nodes, self.num_nodes, self.num_edges())?;
        for i in 0..self.num_nodes {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
            }
        }
        Ok(())
    }

    pub fn save_matrix_market(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::create(path.as_ref())?;
        let mut w = BufWriter::new(file);
        self.write_matrix_market(&mut w)?;
        w.flush()?;
        Ok(())
    }

    // ------------------------------------------------------------------
    // Binary edge list: "MXKG", version u32, N u64, nnz u64, then
    // (src u32, dst u32, weight f32) records. All little-endian.
    // ------------------------------------------------------------------

    pub fn load_edge_list_binary(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path.as_ref())?;
        Self::read_edge_list_binary(BufReader::new(file))
    }

    pub fn read_edge_list_binary<R: Read>(mut reader: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact_or_truncated(&mut reader, &mut magic, "header magic")?;
        if &magic != EDGE_LIST_MAGIC {
            return Err(Error::format(0, "bad magic, expected MXKG"));
        }
        let version = read_u32(&mut reader, "version")?;
        if version != EDGE_LIST_VERSION {
            return Err(Error::format(0, format!("unsupported version {version}")));
        }
        let num_nodes = read_u64(&mut reader, "node count")? as usize;
        let nnz = read_u64(&mut reader, "edge count")? as usize;
        let mut edges = Vec::with_capacity(nnz);
        let mut record = [0u8; 12];
        for e in 0..nnz {
            read_exact_or_truncated(&mut reader, &mut record, "edge record")
                .map_err(|_| Error::Truncated(format!("edge {e} of {nnz} missing")))?;
            let src = u32::from_le_bytes(record[0..4].try_into().unwrap());
            let dst = u32::from_le_bytes(record[4..8].try_into().unwrap());
            let weight = f32::from_le_bytes(record[8..12].try_into().unwrap());
            edges.push((src, dst, weight));
        }
        Self::from_edges(num_nodes, edges)
    }

    pub fn write_edge_list_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(EDGE_LIST_MAGIC)?;
        w.write_all(&EDGE_LIST_VERSION.to_le_bytes())?;
        w.write_all(&(self.num_nodes as u64).to_le_bytes())?;
        w.write_all(&(self.num_edges() as u64).to_le_bytes())?;
        for i in 0..self.num_nodes {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                w.write_all(&(i as u32).to_le_bytes())?;
                w.write_all(&j.to_le_bytes())?;
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn save_edge_list_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::create(path.as_ref())?;
        let mut w = BufWriter::new(file);
        self.write_edge_list_binary(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Loads either supported format, picked by file extension
    /// (`.mtx` -> Matrix Market, anything else -> binary edge list).
    pub fn load_auto(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        match p.extension().and_then(|e| e.to_str()) {
            Some("mtx") => Self::load_matrix_market(p),
            _ => Self::load_edge_list_binary(p),
        }
    }

    /// Checks the structural invariants; used by loaders and tests.
    pub fn validate(&self) -> Result<()> {
        if self.row_ptr.len() != self.num_nodes + 1 || self.row_ptr[0] != 0 {
            return Err(Error::Dimension("row_ptr shape".into()));
        }
        if *self.row_ptr.last().unwrap() != self.col_idx.len()
            || self.col_idx.len() != self.edge_val.len()
        {
            return Err(Error::Dimension("row_ptr end != nnz".into()));
        }
        for i in 0..self.num_nodes {
            if self.row_ptr[i] > self.row_ptr[i + 1] {
                return Err(Error::Dimension("row_ptr not monotone".into()));
            }
            let (cols, vals) = self.row(i);
            for w in cols.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Dimension(format!("row {i} not strictly sorted")));
                }
            }
            for &c in cols {
                if c as usize >= self.num_nodes {
                    return Err(Error::Bounds {
                        what: "column",
                        index: c as usize,
                        bound: self.num_nodes,
                    });
                }
            }
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite edge value in row {i}")));
            }
        }
        Ok(())
    }
}

/// Zero-copy view of a [`CsrGraph`] as the CSC storage of its transpose.
///
/// Column `j` of the transpose is exactly row `j` of the underlying CSR
/// matrix, the entries read as row indices.
#[derive(Debug, Clone, Copy)]
pub struct CscTransposeView<'a> {
    graph: &'a CsrGraph,
}

impl<'a> CscTransposeView<'a> {
    pub fn num_rows(&self) -> usize {
        self.graph.num_nodes
    }

    pub fn num_cols(&self) -> usize {
        self.graph.num_nodes
    }

    /// Row indices and values of column `j` of the transpose.
    pub fn col(&self, j: usize) -> (&'a [u32], &'a [f32]) {
        self.graph.row(j)
    }

    pub fn graph(&self) -> &'a CsrGraph {
        self.graph
    }

    /// Materializes the transpose densely (oracle bridge; allocates).
    pub fn to_dense<T: Scalar>(&self) -> DenseMatrix<T> {
        let n = self.graph.num_nodes;
        let mut out = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                out.set(r as usize, j, T::from_f32(v));
            }
        }
        out
    }
}

fn read_exact_or_truncated<R: Read>(reader: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    reader
        .read_exact(buf)
        .map_err(|_| Error::Truncated(what.to_string()))
}

fn read_u32<R: Read>(reader: &mut R, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact_or_truncated(reader, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(reader: &mut R, what: &str) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact_or_truncated(reader, &mut b, what)?;
    Ok(u64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn triangle_pattern() -> &'static str {
        "%%MatrixMarket matrix coordinate pattern symmetric\n3 3 3\n2 1\n3 1\n3 2\n"
    }

    #[test]
    fn triangle_pattern_loads_with_unit_weights() {
        let g = CsrGraph::read_matrix_market(Cursor::new(triangle_pattern())).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 6);
        assert!(g.edge_val().iter().all(|&v| v == 1.0));
        g.validate().unwrap();
    }

    #[test]
    fn out_of_bounds_index_is_reported() {
        let text = "%%MatrixMarket matrix coordinate pattern general\n4 4 1\n1 5\n";
        let err = CsrGraph::read_matrix_market(Cursor::new(text)).unwrap_err();
        assert!(matches!(err, Error::Bounds { index: 5, bound: 4, .. }));
    }

    #[test]
    fn parse_failure_carries_line_number() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 3.0\n";
        let err = CsrGraph::read_matrix_market(Cursor::new(text)).unwrap_err();
        match err {
            Error::Format { line, .. } => assert_eq!(line, 3),
            other => panic!("expected format error, got {other}"),
        }
    }

    #[test]
    fn duplicate_edges_merge_by_summing() {
        let g = CsrGraph::from_edges(2, vec![(0, 1, 1.0), (0, 1, 2.5)]).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.edge_val(), &[3.5]);
    }

    #[test]
    fn empty_binary_graph() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(EDGE_LIST_MAGIC);
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&0u64.to_le_bytes());
        let g = CsrGraph::read_edge_list_binary(Cursor::new(bytes)).unwrap();
        assert_eq!(g.num_nodes(), 2);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn two_edge_binary_row_ptr() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(EDGE_LIST_MAGIC);
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&2u64.to_le_bytes());
        for (s, d) in [(0u32, 1u32), (1, 0)] {
            bytes.extend_from_slice(&s.to_le_bytes());
            bytes.extend_from_slice(&d.to_le_bytes());
            bytes.extend_from_slice(&1.0f32.to_le_bytes());
        }
        let g = CsrGraph::read_edge_list_binary(Cursor::new(bytes)).unwrap();
        assert_eq!(g.row_ptr(), &[0, 1, 2]);
    }

    #[test]
    fn truncated_binary_is_length_error() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(EDGE_LIST_MAGIC);
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&3u64.to_le_bytes());
        // no records follow
        let err = CsrGraph::read_edge_list_binary(Cursor::new(bytes)).unwrap_err();
        assert!(matches!(err, Error::Truncated(_)));
    }

    #[test]
    fn mean_normalization_rows_sum_to_one() {
        let g = CsrGraph::from_edges(
            3,
            vec![(0, 0, 2.0), (0, 1, 5.0), (0, 2, 9.0), (1, 2, 4.0)],
        )
        .unwrap();
        let n = g.normalize(NormalizationKind::Mean);
        let (_, vals) = n.row(0);
        assert!(vals.iter().all(|&v| v == 1.0 / 3.0));
        let sum: f32 = vals.iter().sum();
        assert!((sum - 1.0).abs() < 1e-6);
        // zero-degree row stays empty
        assert_eq!(n.degree(2), 0);
    }

    #[test]
    fn symmetric_normalization_uses_both_degrees() {
        // Node 0 has degree 2, node 1 has degree 8.
        let mut edges = vec![(0u32, 1u32, 1.0f32), (0, 2, 1.0)];
        for d in 0..8u32 {
            edges.push((1, d + 1, 1.0));
        }
        let g = CsrGraph::from_edges(10, edges).unwrap();
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.degree(1), 8);
        let n = g.normalize(NormalizationKind::Symmetric);
        let (cols, vals) = n.row(0);
        let pos = cols.iter().position(|&c| c == 1).unwrap();
        assert!((vals[pos] - 0.25).abs() < 1e-7);
    }

    #[test]
    fn none_normalization_is_identity() {
        let g = CsrGraph::from_edges(2, vec![(0, 1, 3.5), (1, 0, -2.0)]).unwrap();
        let n = g.normalize(NormalizationKind::None);
        assert_eq!(g, n);
    }

    #[test]
    fn transpose_view_matches_dense_transpose() {
        let g = CsrGraph::from_edges(
            4,
            vec![(0, 1, 2.0), (1, 3, -1.0), (2, 0, 0.5), (3, 3, 4.0)],
        )
        .unwrap();
        let view = g.transpose_view();
        let dense_t: DenseMatrix<f64> = view.to_dense();
        let expected = g.to_dense::<f64>().transpose();
        assert_eq!(dense_t, expected);
    }

    #[test]
    fn transpose_view_of_diagonal_is_identity_storage() {
        let g = CsrGraph::from_edges(3, vec![(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)]).unwrap();
        let view = g.transpose_view();
        for j in 0..3 {
            let (rows, vals) = view.col(j);
            let (cols, orig) = g.row(j);
            assert_eq!(rows, cols);
            assert_eq!(vals, orig);
        }
    }

    #[test]
    fn transpose_column_yields_row_nonzeros() {
        // Row 2 holds edges to 2, 5 and 7; column 2 of the transpose must
        // yield exactly those entries.
        let g = CsrGraph::from_edges(
            8,
            vec![(2, 2, 0.25), (2, 5, 0.5), (2, 7, 0.75), (0, 1, 1.0)],
        )
        .unwrap();
        let (rows, vals) = g.transpose_view().col(2);
        assert_eq!(rows, &[2, 5, 7]);
        assert_eq!(vals, &[0.25, 0.5, 0.75]);
    }
}
