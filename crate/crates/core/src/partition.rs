//! Partitions of a finite window and their lattice operations.
//!
//! A partition stores one dense cell id per window point. Cell ids are
//! canonical: cells are numbered in order of their smallest point index, so
//! two partitions are equal exactly when their label arrays are equal.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::HypercubeWindow;
use crate::transform::Transform;
use crate::unionfind::UnionFind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Equal,
    /// The first argument is strictly coarser than the second.
    Coarser,
    /// The first argument is strictly finer than the second.
    Finer,
    Incomparable,
}

impl Relation {
    pub fn flip(self) -> Relation {
        match self {
            Relation::Coarser => Relation::Finer,
            Relation::Finer => Relation::Coarser,
            r => r,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Relation::Equal => "Equal",
            Relation::Coarser => "Coarser",
            Relation::Finer => "Finer",
            Relation::Incomparable => "Incomparable",
        };
        f.write_str(s)
    }
}

pub struct Partition {
    window: HypercubeWindow,
    labels: Vec<u32>,
    cell_count: usize,
    cells: OnceLock<Vec<Vec<usize>>>,
}

impl Clone for Partition {
    fn clone(&self) -> Self {
        Partition {
            window: self.window.clone(),
            labels: self.labels.clone(),
            cell_count: self.cell_count,
            cells: OnceLock::new(),
        }
    }
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.window == other.window && self.labels == other.labels
    }
}

impl Eq for Partition {}

impl std::hash::Hash for Partition {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.window.hash(state);
        self.labels.hash(state);
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Partition")
            .field("window", &self.window.to_string())
            .field("cells", &self.cell_count)
            .field("labels", &self.labels)
            .finish()
    }
}

/// Renumbers arbitrary labels by first occurrence.
fn canonicalize<T: Copy + Into<u64>>(raw: &[T]) -> (Vec<u32>, usize) {
    let mut map = std::collections::HashMap::new();
    let labels = raw
        .iter()
        .map(|&l| {
            let next = map.len() as u32;
            *map.entry(l.into()).or_insert(next)
        })
        .collect();
    (labels, map.len())
}

/// Faster canonicalization when raw labels are already bounded by `bound`.
pub(crate) fn canonicalize_dense(raw: &[u32], bound: usize) -> (Vec<u32>, usize) {
    let mut map = vec![u32::MAX; bound];
    let mut next = 0u32;
    let labels = raw
        .iter()
        .map(|&l| {
            let slot = &mut map[l as usize];
            if *slot == u32::MAX {
                *slot = next;
                next += 1;
            }
            *slot
        })
        .collect();
    (labels, next as usize)
}

impl Partition {
    /// Every point in its own cell.
    pub fn finest(window: &HypercubeWindow) -> Self {
        let labels: Vec<u32> = (0..window.len() as u32).collect();
        Self::from_canonical(window.clone(), labels, window.len())
    }

    /// One cell holding the whole window.
    pub fn coarsest(window: &HypercubeWindow) -> Self {
        Self::from_canonical(window.clone(), vec![0; window.len()], 1)
    }

    pub(crate) fn from_canonical(window: HypercubeWindow, labels: Vec<u32>, cell_count: usize) -> Self {
        debug_assert_eq!(labels.len(), window.len());
        Partition { window, labels, cell_count, cells: OnceLock::new() }
    }

    /// Accepts any labeling (one label per point in row-major order).
    pub fn from_labels<T: Copy + Into<u64>>(window: &HypercubeWindow, raw: &[T]) -> Result<Self> {
        if raw.len() != window.len() {
            return Err(Error::InvalidPartition(format!(
                "expected {} labels, got {}",
                window.len(),
                raw.len()
            )));
        }
        let (labels, count) = canonicalize(raw);
        Ok(Self::from_canonical(window.clone(), labels, count))
    }

    pub(crate) fn from_raw_dense(window: &HypercubeWindow, raw: &[u32], bound: usize) -> Self {
        let (labels, count) = canonicalize_dense(raw, bound);
        Self::from_canonical(window.clone(), labels, count)
    }

    /// Builds a partition from explicit cells of point indices, validating
    /// that they are disjoint, non-empty and cover the window.
    pub fn from_cells(window: &HypercubeWindow, cells: &[Vec<usize>]) -> Result<Self> {
        let mut raw = vec![u32::MAX; window.len()];
        for (c, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::InvalidPartition(format!("cell {c} is empty")));
            }
            for &p in cell {
                if p >= window.len() {
                    return Err(Error::InvalidPartition(format!("point index {p} outside window")));
                }
                if raw[p] != u32::MAX {
                    return Err(Error::InvalidPartition(format!("point index {p} appears in two cells")));
                }
                raw[p] = c as u32;
            }
        }
        if let Some(p) = raw.iter().position(|&l| l == u32::MAX) {
            return Err(Error::InvalidPartition(format!("point index {p} is not covered")));
        }
        Ok(Self::from_raw_dense(window, &raw, cells.len()))
    }

    pub fn window(&self) -> &HypercubeWindow {
        &self.window
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, point_index: usize) -> u32 {
        self.labels[point_index]
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Point indices of every cell, ascending within a cell; cached.
    pub fn cells(&self) -> &[Vec<usize>] {
        self.cells.get_or_init(|| {
            let mut cells = vec![Vec::new(); self.cell_count];
            for (p, &l) in self.labels.iter().enumerate() {
                cells[l as usize].push(p);
            }
            cells
        })
    }

    pub fn cell_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cell_count];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    pub fn same_cell(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }

    fn check_window(&self, other: &Partition) -> Result<()> {
        if self.window != other.window {
            return Err(Error::WindowMismatch);
        }
        Ok(())
    }

    /// Finest common coarsening.
    ///
    /// Iterates the cells of `q` and merges every current cell of `self`
    /// touching each of them; current cells are tracked with a union-find over
    /// `self`'s cell ids. Inputs are left untouched.
    pub fn meet(&self, q: &Partition) -> Result<Partition> {
        self.check_window(q)?;
        let mut uf = UnionFind::new(self.cell_count);
        let mut anchor = vec![u32::MAX; q.cell_count];
        for (&pl, &ql) in self.labels.iter().zip(&q.labels) {
            let a = &mut anchor[ql as usize];
            if *a == u32::MAX {
                *a = pl;
            } else {
                uf.union(*a as usize, pl as usize);
            }
        }
        let raw: Vec<u32> = self.labels.iter().map(|&pl| uf.find(pl as usize) as u32).collect();
        Ok(Self::from_raw_dense(&self.window, &raw, self.cell_count))
    }

    /// Meet that replays the cell-by-cell merge loop and records, for every
    /// visited cell of `q`, which current cells of `self` were merged.
    ///
    /// Cells of `q` are visited in order of first appearance along
    /// `point_order` (a permutation of the window's point indices).
    pub fn meet_traced(&self, q: &Partition, point_order: &[usize]) -> Result<(Partition, Vec<MeetStep>)> {
        self.check_window(q)?;
        if point_order.len() != self.len() {
            return Err(Error::InvalidArgument("point order must cover the window".into()));
        }
        let mut q_order = Vec::with_capacity(q.cell_count);
        let mut seen = vec![false; q.cell_count];
        for &p in point_order {
            let ql = q.labels[p] as usize;
            if !std::mem::replace(&mut seen[ql], true) {
                q_order.push(ql);
            }
        }
        let q_cells = q.cells();
        let mut uf = UnionFind::new(self.cell_count);
        let mut members: Vec<Vec<usize>> = self.cells().to_vec();
        let mut steps = Vec::with_capacity(q_order.len());
        for ql in q_order {
            let q_cell = &q_cells[ql];
            let mut roots: Vec<usize> = q_cell.iter().map(|&p| uf.find(self.labels[p] as usize)).collect();
            roots.sort_unstable();
            roots.dedup();
            let merged: Vec<Vec<usize>> = roots.iter().map(|&r| members[r].clone()).collect();
            for &r in &roots[1..] {
                uf.union(roots[0], r);
            }
            let new_root = uf.find(roots[0]);
            let mut combined: Vec<usize> = roots.iter().flat_map(|&r| std::mem::take(&mut members[r])).collect();
            combined.sort_unstable();
            members[new_root] = combined;
            steps.push(MeetStep { q_cell: q_cell.clone(), merged });
        }
        let raw: Vec<u32> = self.labels.iter().map(|&pl| uf.find(pl as usize) as u32).collect();
        Ok((Self::from_raw_dense(&self.window, &raw, self.cell_count), steps))
    }

    /// Coarsest common refinement.
    pub fn join(&self, q: &Partition) -> Result<Partition> {
        self.check_window(q)?;
        let raw: Vec<u64> = self
            .labels
            .iter()
            .zip(&q.labels)
            .map(|(&a, &b)| (u64::from(a) << 32) | u64::from(b))
            .collect();
        let (labels, count) = canonicalize(&raw);
        Ok(Self::from_canonical(self.window.clone(), labels, count))
    }

    /// Relation of `self` to `q` from one pass over the contingency of
    /// `(self-label, q-label)` pairs.
    pub fn relate(&self, q: &Partition) -> Result<Relation> {
        self.check_window(q)?;
        // q-cell -> unique self-cell, and the reverse; u32::MAX marks unseen
        let mut q_to_p = vec![u32::MAX; q.cell_count];
        let mut p_to_q = vec![u32::MAX; self.cell_count];
        let mut q_inside_p = true;
        let mut p_inside_q = true;
        for (&pl, &ql) in self.labels.iter().zip(&q.labels) {
            if q_inside_p {
                let slot = &mut q_to_p[ql as usize];
                if *slot == u32::MAX {
                    *slot = pl;
                } else if *slot != pl {
                    q_inside_p = false;
                }
            }
            if p_inside_q {
                let slot = &mut p_to_q[pl as usize];
                if *slot == u32::MAX {
                    *slot = ql;
                } else if *slot != ql {
                    p_inside_q = false;
                }
            }
            if !q_inside_p && !p_inside_q {
                break;
            }
        }
        Ok(match (q_inside_p, p_inside_q) {
            (true, true) => Relation::Equal,
            (true, false) => Relation::Coarser,
            (false, true) => Relation::Finer,
            (false, false) => Relation::Incomparable,
        })
    }

    /// `{P ∩ sub | P in self} \ {∅}`.
    pub fn restrict(&self, sub: &HypercubeWindow) -> Result<Partition> {
        let embedding = self.window.embed(sub)?;
        let raw: Vec<u32> = embedding.iter().map(|&i| self.labels[i]).collect();
        Ok(Self::from_raw_dense(sub, &raw, self.cell_count))
    }

    /// Restriction through a precomputed embedding of a sub-window.
    pub(crate) fn restrict_embedded(&self, sub: &HypercubeWindow, embedding: &[usize]) -> Partition {
        let raw: Vec<u32> = embedding.iter().map(|&i| self.labels[i]).collect();
        Self::from_raw_dense(sub, &raw, self.cell_count)
    }

    /// `g · P = {g · cell}`; `g` must permute the window's points.
    pub fn act_on(&self, g: &Transform) -> Result<Partition> {
        let w = &self.window;
        if g.dim() != w.dim() {
            return Err(Error::DimensionMismatch { expected: w.dim(), got: g.dim() });
        }
        let mut raw = vec![u32::MAX; w.len()];
        let mut x = vec![0; w.dim()];
        let mut y = vec![0; w.dim()];
        for i in 0..w.len() {
            w.point_into(i, &mut x);
            g.apply_into(&x, &mut y);
            let j = w.index_of(&y).ok_or(Error::NotStabilizing)?;
            if raw[j] != u32::MAX {
                return Err(Error::NotStabilizing);
            }
            raw[j] = self.labels[i];
        }
        Ok(Self::from_raw_dense(w, &raw, self.cell_count))
    }

    pub fn is_finest(&self) -> bool {
        self.cell_count == self.len()
    }

    pub fn is_coarsest(&self) -> bool {
        self.cell_count == 1
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PartitionRepr { window: self.window.clone(), labels: self.labels.clone() })?)
    }

    /// Parses and validates a partition file; labels may be any non-negative
    /// integers and are re-densified.
    pub fn from_json(text: &str) -> Result<Partition> {
        let repr: PartitionRepr = serde_json::from_str(text)?;
        Partition::from_labels(&repr.window, &repr.labels)
    }
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    window: HypercubeWindow,
    labels: Vec<u32>,
}

/// One outer iteration of the traced meet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeetStep {
    /// Point indices of the reference cell.
    pub q_cell: Vec<usize>,
    /// Current cells (point indices) that intersected it and were merged.
    pub merged: Vec<Vec<usize>>,
}
