//! Feature and label file formats.
//!
//! Binary features: magic "FEAT", rows u64, cols u64, then row-major f32.
//! Binary labels:   magic "LABL", rows u64, cols u64, then row-major u32
//! (cols == 1 means class ids, larger cols mean 0/1 multi-hot rows).
//! Both also load from plain numeric CSV. Little-endian throughout.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

use super::model::Labels;

pub const FEATURES_MAGIC: &[u8; 4] = b"FEAT";
pub const LABELS_MAGIC: &[u8; 4] = b"LABL";

fn read_header<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<(usize, usize)> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)
        .map_err(|_| Error::Truncated("header magic".into()))?;
    if &m != magic {
        return Err(Error::format(
            0,
            format!("bad magic, expected {}", String::from_utf8_lossy(magic)),
        ));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)
        .map_err(|_| Error::Truncated("row count".into()))?;
    let rows = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)
        .map_err(|_| Error::Truncated("column count".into()))?;
    let cols = u64::from_le_bytes(b8) as usize;
    Ok((rows, cols))
}

pub fn save_features_binary(path: impl AsRef<Path>, m: &DenseMatrix<f32>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    w.write_all(FEATURES_MAGIC)?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for &v in m.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_features_binary(path: impl AsRef<Path>) -> Result<DenseMatrix<f32>> {
    let mut r = BufReader::new(File::open(path.as_ref())?);
    let (rows, cols) = read_header(&mut r, FEATURES_MAGIC)?;
    let mut data = Vec::with_capacity(rows * cols);
    let mut b4 = [0u8; 4];
    for _ in 0..rows * cols {
        r.read_exact(&mut b4)
            .map_err(|_| Error::Truncated("feature data".into()))?;
        data.push(f32::from_le_bytes(b4));
    }
    Ok(DenseMatrix::from_vec(rows, cols, data))
}

pub fn save_labels_binary(path: impl AsRef<Path>, labels: &Labels) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    w.write_all(LABELS_MAGIC)?;
    match labels {
        Labels::Classes(classes) => {
            w.write_all(&(classes.len() as u64).to_le_bytes())?;
            w.write_all(&1u64.to_le_bytes())?;
            for &c in classes {
                w.write_all(&c.to_le_bytes())?;
            }
        }
        Labels::MultiHot { rows, cols, data } => {
            w.write_all(&(*rows as u64).to_le_bytes())?;
            w.write_all(&(*cols as u64).to_le_bytes())?;
            for &v in data {
                w.write_all(&(v as u32).to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_labels_binary(path: impl AsRef<Path>) -> Result<Labels> {
    let mut r = BufReader::new(File::open(path.as_ref())?);
    let (rows, cols) = read_header(&mut r, LABELS_MAGIC)?;
    let mut values = Vec::with_capacity(rows * cols);
    let mut b4 = [0u8; 4];
    for _ in 0..rows * cols {
        r.read_exact(&mut b4)
            .map_err(|_| Error::Truncated("label data".into()))?;
        values.push(u32::from_le_bytes(b4));
    }
    if cols == 1 {
        Ok(Labels::Classes(values))
    } else {
        for &v in &values {
            if v > 1 {
                return Err(Error::format(0, format!("multi-hot entry {v} not 0/1")));
            }
        }
        Ok(Labels::MultiHot {
            rows,
            cols,
            data: values.into_iter().map(|v| v as u8).collect(),
        })
    }
}

pub fn load_features_csv(path: impl AsRef<Path>) -> Result<DenseMatrix<f32>> {
    let reader = BufReader::new(File::open(path.as_ref())?);
    let mut rows: Vec<Vec<f32>> = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row: Vec<f32> = trimmed
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f32>()
                    .map_err(|_| Error::format(n + 1, format!("cannot parse '{tok}'")))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::format(n + 1, "ragged csv row"));
            }
        }
        rows.push(row);
    }
    Ok(DenseMatrix::from_rows(&rows))
}

pub fn load_labels_csv(path: impl AsRef<Path>) -> Result<Labels> {
    let reader = BufReader::new(File::open(path.as_ref())?);
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row: Vec<u32> = trimmed
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::format(n + 1, format!("cannot parse '{tok}'")))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::format(n + 1, "ragged csv row"));
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(1, Vec::len);
    if cols == 1 {
        Ok(Labels::Classes(rows.into_iter().map(|r| r[0]).collect()))
    } else {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for row in rows {
            for v in row {
                if v > 1 {
                    return Err(Error::format(0, format!("multi-hot entry {v} not 0/1")));
                }
                data.push(v as u8);
            }
        }
        Ok(Labels::MultiHot {
            rows: n,
            cols,
            data,
        })
    }
}
