//! Edge-group construction and warp-lane mapping.
//!
//! Every adjacency row is split into contiguous groups of at most `w` edges;
//! groups are then packed onto 32-lane warps. For dim_k <= 16 a warp hosts
//! floor(32 / dim_k) groups and no group straddles two warps; for larger
//! dim_k each warp hosts exactly one group and loops over the lanes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::CsrGraph;

pub const PLAN_MAGIC: &[u8; 4] = b"EGPL";
pub const PLAN_VERSION: u32 = 1;
pub const WARP_LANES: u32 = 32;

/// Default cap on workload units (edges) per group.
pub const DEFAULT_GROUP_WIDTH: u32 = 32;

/// A contiguous run of at most `w` nonzeros of one adjacency row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeGroup {
    pub row: u32,
    /// Offset into the CSR edge arrays.
    pub edge_start: u64,
    pub edge_count: u32,
}

/// Warp id plus the lane span a group occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WarpAssignment {
    pub warp: u32,
    pub lane_start: u32,
    pub lane_count: u32,
}

/// Partition of all adjacency nonzeros into bounded edge groups.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGroupPlan {
    groups: Vec<EdgeGroup>,
    warp_assignments: Vec<WarpAssignment>,
    w: u32,
    dim_k: u32,
    /// Work counter from the build pass (rows visited + groups emitted);
    /// not serialized.
    build_ops: u64,
}

impl EdgeGroupPlan {
    pub fn groups(&self) -> &[EdgeGroup] {
        &self.groups
    }

    pub fn warp_assignments(&self) -> &[WarpAssignment] {
        &self.warp_assignments
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn dim_k(&self) -> u32 {
        self.dim_k
    }

    pub fn build_ops(&self) -> u64 {
        self.build_ops
    }

    pub fn groups_per_warp(&self) -> u32 {
        groups_per_warp(self.dim_k)
    }

    pub fn warps_used(&self) -> u32 {
        self.warp_assignments
            .last()
            .map_or(0, |a| a.warp + 1)
    }

    /// Verifies this plan tiles exactly the nonzeros of `g`.
    pub fn validate_for(&self, g: &CsrGraph) -> Result<()> {
        let nnz = g.num_edges() as u64;
        let total: u64 = self.groups.iter().map(|eg| eg.edge_count as u64).sum();
        if total != nnz {
            return Err(Error::Plan(format!(
                "plan covers {total} edges, graph has {nnz}"
            )));
        }
        let mut spans: Vec<(u64, u64, u32)> = self
            .groups
            .iter()
            .map(|eg| (eg.edge_start, eg.edge_start + eg.edge_count as u64, eg.row))
            .collect();
        spans.sort_unstable();
        let mut cursor = 0u64;
        for (start, end, row) in spans {
            if start != cursor {
                return Err(Error::Plan(format!(
                    "gap or overlap at edge offset {cursor}"
                )));
            }
            if row as usize >= g.num_nodes() {
                return Err(Error::Plan(format!("group row {row} out of range")));
            }
            let row_span = g.row_ptr()[row as usize] as u64..g.row_ptr()[row as usize + 1] as u64;
            if start < row_span.start || end > row_span.end {
                return Err(Error::Plan(format!(
                    "group [{start}, {end}) escapes row {row} slice"
                )));
            }
            cursor = end;
        }
        if cursor != nnz {
            return Err(Error::Plan("plan does not reach final edge".into()));
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // Plan dump: "EGPL", version u32, w u32, dim_k u32, group count u64,
    // then (row u32, edge_start u64, edge_count u32) records. Little-endian.
    // ------------------------------------------------------------------

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(PLAN_MAGIC)?;
        w.write_all(&PLAN_VERSION.to_le_bytes())?;
        w.write_all(&self.w.to_le_bytes())?;
        w.write_all(&self.dim_k.to_le_bytes())?;
        w.write_all(&(self.groups.len() as u64).to_le_bytes())?;
        for eg in &self.groups {
            w.write_all(&eg.row.to_le_bytes())?;
            w.write_all(&eg.edge_start.to_le_bytes())?;
            w.write_all(&eg.edge_count.to_le_bytes())?;
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
            .map_err(|_| Error::Truncated("EGPL magic".into()))?;
        if &magic != PLAN_MAGIC {
            return Err(Error::format(0, "bad magic, expected EGPL"));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)
            .map_err(|_| Error::Truncated("EGPL version".into()))?;
        let version = u32::from_le_bytes(b4);
        if version != PLAN_VERSION {
            return Err(Error::format(0, format!("unsupported version {version}")));
        }
        r.read_exact(&mut b4)
            .map_err(|_| Error::Truncated("EGPL w".into()))?;
        let w = u32::from_le_bytes(b4);
        r.read_exact(&mut b4)
            .map_err(|_| Error::Truncated("EGPL dim_k".into()))?;
        let dim_k = u32::from_le_bytes(b4);
        r.read_exact(&mut b8)
            .map_err(|_| Error::Truncated("EGPL group count".into()))?;
        let count = u64::from_le_bytes(b8) as usize;
        let mut groups = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut b4)
                .map_err(|_| Error::Truncated("EGPL group record".into()))?;
            let row = u32::from_le_bytes(b4);
            r.read_exact(&mut b8)
                .map_err(|_| Error::Truncated("EGPL group record".into()))?;
            let edge_start = u64::from_le_bytes(b8);
            r.read_exact(&mut b4)
                .map_err(|_| Error::Truncated("EGPL group record".into()))?;
            let edge_count = u32::from_le_bytes(b4);
            groups.push(EdgeGroup {
                row,
                edge_start,
                edge_count,
            });
        }
        let warp_assignments = assign_warps(&groups, dim_k);
        Ok(EdgeGroupPlan {
            groups,
            warp_assignments,
            w,
            dim_k,
            build_ops: 0,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path.as_ref())?))
    }
}

fn groups_per_warp(dim_k: u32) -> u32 {
    if dim_k <= 16 {
        WARP_LANES / dim_k
    } else {
        1
    }
}

fn assign_warps(groups: &[EdgeGroup], dim_k: u32) -> Vec<WarpAssignment> {
    let per_warp = groups_per_warp(dim_k);
    groups
        .iter()
        .enumerate()
        .map(|(g, _)| {
            let warp = g as u32 / per_warp;
            let slot = g as u32 % per_warp;
            if dim_k <= 16 {
                WarpAssignment {
                    warp,
                    lane_start: slot * dim_k,
                    lane_count: dim_k,
                }
            } else {
                // One group per warp, lanes looped over the k entries.
                WarpAssignment {
                    warp,
                    lane_start: 0,
                    lane_count: WARP_LANES,
                }
            }
        })
        .collect()
}

/// Single O(N + groups) pass: each row's edges split into ceil(degree / w)
/// groups of at most `w`, packed onto warps greedily in row order.
/// Deterministic for identical inputs.
pub fn build_plan(g: &CsrGraph, dim_k: usize, w: usize) -> EdgeGroupPlan {
    assert!(w >= 1, "w must be at least 1");
    assert!(dim_k >= 1, "dim_k must be at least 1");
    let mut groups = Vec::new();
    let mut ops = 0u64;
    for row in 0..g.num_nodes() {
        ops += 1;
        let start = g.row_ptr()[row];
        let end = g.row_ptr()[row + 1];
        let mut offset = start;
        while offset < end {
            ops += 1;
            let count = (end - offset).min(w);
            groups.push(EdgeGroup {
                row: row as u32,
                edge_start: offset as u64,
                edge_count: count as u32,
            });
            offset += count;
        }
    }
    let warp_assignments = assign_warps(&groups, dim_k as u32);
    EdgeGroupPlan {
        groups,
        warp_assignments,
        w: w as u32,
        dim_k: dim_k as u32,
        build_ops: ops,
    }
}

/// Summary of a plan's shape.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PlanStats {
    pub group_count: u64,
    pub max_group_size: u32,
    pub min_group_size: u32,
    pub warps_used: u32,
    /// max group size / mean group size; 0 for empty plans.
    pub imbalance_ratio: f64,
}

pub fn plan_stats(plan: &EdgeGroupPlan) -> PlanStats {
    let groups = plan.groups();
    if groups.is_empty() {
        return PlanStats {
            group_count: 0,
            max_group_size: 0,
            min_group_size: 0,
            warps_used: 0,
            imbalance_ratio: 0.0,
        };
    }
    let max = groups.iter().map(|g| g.edge_count).max().unwrap();
    let min = groups.iter().map(|g| g.edge_count).min().unwrap();
    let total: u64 = groups.iter().map(|g| g.edge_count as u64).sum();
    let mean = total as f64 / groups.len() as f64;
    PlanStats {
        group_count: groups.len() as u64,
        max_group_size: max,
        min_group_size: min,
        warps_used: plan.warps_used(),
        imbalance_ratio: max as f64 / mean,
    }
}
