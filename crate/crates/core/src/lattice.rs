//! The coarsening order over a family of partitions, Hasse-reduced.
//!
//! Edges point from finer to coarser partitions.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::engine::AbstractionFamily;
use crate::error::{Error, Result};
use crate::partition::{Partition, Relation};
use crate::space::HypercubeWindow;

/// Fixed-size bit set over node ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(n: usize) -> Self {
        BitSet { words: vec![0; n.div_ceil(64)] }
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            let mut rest = bits;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + b)
            })
        })
    }
}

/// One partition offered to [`complete_hierarchy_of`].
#[derive(Clone, Debug)]
pub struct HierarchyItem {
    pub label: String,
    /// Generator subset the partition came from, when it came from one.
    pub mask: Option<u64>,
    /// Expansion factor the partition was computed at.
    pub level: usize,
    pub partition: Partition,
}

#[derive(Clone, Debug, Serialize)]
pub struct DagNode {
    pub id: usize,
    /// Labels of every item that produced this partition.
    pub labels: Vec<String>,
    pub masks: Vec<u64>,
    pub cells: usize,
    #[serde(skip)]
    pub partition: Partition,
}

#[derive(Clone, Debug)]
pub struct AbstractionDag {
    nodes: Vec<DagNode>,
    edges: Vec<(usize, usize)>,
    queries: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HierarchyOptions {
    /// Use subset seeding, cell counts and transitivity to skip queries.
    pub shortcuts: bool,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        HierarchyOptions { shortcuts: true }
    }
}

impl AbstractionDag {
    pub fn nodes(&self) -> &[DagNode] {
        &self.nodes
    }

    /// Hasse edges `(finer, coarser)`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of contingency-table comparisons performed.
    pub fn queries(&self) -> usize {
        self.queries
    }

    /// Node holding the item with this subset mask.
    pub fn node_of_mask(&self, mask: u64) -> Option<usize> {
        self.nodes.iter().position(|n| n.masks.contains(&mask))
    }

    /// `reach[i]` holds every node strictly coarser than `i`.
    pub fn reachability(&self) -> Vec<BitSet> {
        reachability(self.nodes.len(), &self.edges).expect("hasse edges are acyclic")
    }

    /// Relation of node `a` to node `b`, read off the order.
    pub fn relation(&self, a: usize, b: usize) -> Relation {
        if a == b {
            return Relation::Equal;
        }
        let reach = self.reachability();
        if reach[a].contains(b) {
            Relation::Finer
        } else if reach[b].contains(a) {
            Relation::Coarser
        } else {
            Relation::Incomparable
        }
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        s.push_str("// edges point from finer to coarser partitions\n");
        s.push_str("digraph abstractions {\n");
        s.push_str("  node [shape=box];\n");
        for n in &self.nodes {
            let names = n.labels.join(" = ").replace('\\', "\\\\").replace('"', "\\\"");
            let _ = writeln!(s, "  n{} [label=\"{}\\n{} cells\"];", n.id, names, n.cells);
        }
        for (a, b) in &self.edges {
            let _ = writeln!(s, "  n{a} -> n{b};");
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Repr<'a> {
            convention: &'static str,
            nodes: &'a [DagNode],
            edges: &'a [(usize, usize)],
        }
        Ok(serde_json::to_string_pretty(&Repr { convention: "finer->coarser", nodes: &self.nodes, edges: &self.edges })?)
    }
}

/// Reachability over a DAG; errors on a cycle.
fn reachability(n: usize, edges: &[(usize, usize)]) -> Result<Vec<BitSet>> {
    let mut out_edges = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::InvalidArgument(format!("edge ({a},{b}) names a missing node")));
        }
        out_edges[a].push(b);
        indegree[b] += 1;
    }
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    while let Some(v) = stack.pop() {
        order.push(v);
        for &w in &out_edges[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                stack.push(w);
            }
        }
    }
    if order.len() != n {
        return Err(Error::Cycle);
    }
    let mut reach = vec![BitSet::new(n); n];
    for &v in order.iter().rev() {
        let mut r = BitSet::new(n);
        for &w in &out_edges[v] {
            r.insert(w);
            r.union_with(&reach[w]);
        }
        reach[v] = r;
    }
    Ok(reach)
}

/// Drops every edge implied by a longer path; reachability is preserved.
pub fn hasse_reduce(n: usize, edges: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
    let reach = reachability(n, edges)?;
    let mut succ = vec![BitSet::new(n); n];
    for &(a, b) in edges {
        succ[a].insert(b);
    }
    let mut out = Vec::new();
    for (a, s) in succ.iter().enumerate() {
        let mut implied = BitSet::new(n);
        for w in s.iter() {
            implied.union_with(&reach[w]);
        }
        out.extend(s.iter().filter(|&b| !implied.contains(b)).map(|b| (a, b)));
    }
    Ok(out)
}

/// Known facts about "finer than" among nodes, closed under transitivity.
struct Order {
    /// `up[a]`: nodes `a` is known to be strictly finer than.
    up: Vec<BitSet>,
    /// `down[b]`: nodes known to be strictly finer than `b`.
    down: Vec<BitSet>,
    not_finer: Vec<BitSet>,
}

impl Order {
    fn new(n: usize) -> Self {
        Order { up: vec![BitSet::new(n); n], down: vec![BitSet::new(n); n], not_finer: vec![BitSet::new(n); n] }
    }

    fn known(&self, a: usize, b: usize) -> bool {
        self.up[a].contains(b) || self.not_finer[a].contains(b)
    }

    /// Records `a` finer than `b` and everything transitivity implies.
    fn add_finer(&mut self, a: usize, b: usize) {
        if self.up[a].contains(b) {
            return;
        }
        let mut ups = self.up[b].clone();
        ups.insert(b);
        let mut downs = self.down[a].clone();
        downs.insert(a);
        let downs: Vec<usize> = downs.iter().collect();
        let ups_list: Vec<usize> = ups.iter().collect();
        for &d in &downs {
            self.up[d].union_with(&ups);
        }
        let mut down_set = BitSet::new(self.up.len());
        for &d in &downs {
            down_set.insert(d);
        }
        for &u in &ups_list {
            self.down[u].union_with(&down_set);
        }
    }

    /// Records that `a` is not finer than `b`, plus the one-step consequences.
    fn add_not_finer(&mut self, a: usize, b: usize) {
        self.not_finer[a].insert(b);
        // a < c would give a < b through c < b
        for c in self.down[b].iter().collect::<Vec<_>>() {
            self.not_finer[a].insert(c);
        }
        // c < b would give a < b through a < c
        for c in self.up[a].iter().collect::<Vec<_>>() {
            self.not_finer[c].insert(b);
        }
    }
}

/// Relations among distinct partitions, queried as sparingly as the options allow.
fn relate_all(items: &[HierarchyItemRef<'_>], options: HierarchyOptions) -> Result<(Order, usize)> {
    let n = items.len();
    let mut order = Order::new(n);
    let mut queries = 0usize;
    if !options.shortcuts {
        for a in 0..n {
            for b in a + 1..n {
                queries += 1;
                match items[a].partition.relate(items[b].partition)? {
                    Relation::Finer => order.add_finer(a, b),
                    Relation::Coarser => order.add_finer(b, a),
                    _ => {}
                }
            }
        }
        return Ok((order, queries));
    }
    // nested subsets at non-decreasing expansion factors are finer-or-equal
    for a in 0..n {
        for b in 0..n {
            if a == b || items[a].cells <= items[b].cells {
                continue;
            }
            let nested = items[a].sources.iter().any(|&(ma, la)| {
                items[b].sources.iter().any(|&(mb, lb)| ma & !mb == 0 && la <= lb)
            });
            if nested {
                order.add_finer(a, b);
            }
        }
    }
    // nodes are sorted finer first; visit coarse nodes first so their
    // upward closure is complete when a finer node reaches them
    for a in (0..n).rev() {
        for b in (0..n).rev() {
            if items[b].cells >= items[a].cells || order.known(a, b) {
                continue;
            }
            queries += 1;
            match items[a].partition.relate(items[b].partition)? {
                Relation::Finer => order.add_finer(a, b),
                _ => order.add_not_finer(a, b),
            }
        }
    }
    Ok((order, queries))
}

struct HierarchyItemRef<'a> {
    partition: &'a Partition,
    cells: usize,
    sources: Vec<(u64, usize)>,
}

/// Deduplicates, relates and Hasse-reduces arbitrary partitions of one window.
pub fn complete_hierarchy_of(items: &[HierarchyItem], options: HierarchyOptions) -> Result<AbstractionDag> {
    let window: Option<&HypercubeWindow> = items.first().map(|i| i.partition.window());
    if items.iter().any(|i| Some(i.partition.window()) != window) {
        return Err(Error::WindowMismatch);
    }
    let mut index: HashMap<&Partition, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let g = *index.entry(&item.partition).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    // finer first; equal counts keep first-appearance order
    groups.sort_by_key(|g| std::cmp::Reverse(items[g[0]].partition.cell_count()));
    let refs: Vec<HierarchyItemRef<'_>> = groups
        .iter()
        .map(|g| HierarchyItemRef {
            partition: &items[g[0]].partition,
            cells: items[g[0]].partition.cell_count(),
            sources: g.iter().filter_map(|&i| items[i].mask.map(|m| (m, items[i].level))).collect(),
        })
        .collect();
    let (order, queries) = relate_all(&refs, options)?;
    let n = refs.len();
    let mut edges = Vec::new();
    for a in 0..n {
        let mut implied = BitSet::new(n);
        for c in order.up[a].iter() {
            implied.union_with(&order.up[c]);
        }
        edges.extend(order.up[a].iter().filter(|&b| !implied.contains(b)).map(|b| (a, b)));
    }
    let nodes = groups
        .iter()
        .enumerate()
        .map(|(id, g)| DagNode {
            id,
            labels: g.iter().map(|&i| items[i].label.clone()).collect(),
            masks: g.iter().filter_map(|&i| items[i].mask).collect(),
            cells: items[g[0]].partition.cell_count(),
            partition: items[g[0]].partition.clone(),
        })
        .collect();
    Ok(AbstractionDag { nodes, edges, queries })
}

/// Hierarchy over every entry of a family.
pub fn complete_hierarchy(family: &AbstractionFamily) -> Result<AbstractionDag> {
    complete_hierarchy_with(family, HierarchyOptions::default())
}

pub fn complete_hierarchy_with(family: &AbstractionFamily, options: HierarchyOptions) -> Result<AbstractionDag> {
    let items: Vec<HierarchyItem> = family
        .entries()
        .iter()
        .map(|(&mask, e)| HierarchyItem {
            label: family.subset_name(mask),
            mask: Some(mask),
            level: e.k,
            partition: e.partition.clone(),
        })
        .collect();
    complete_hierarchy_of(&items, options)
}

/// Bell number `B_k` from the Bell triangle.
pub fn bell_number(k: usize) -> Result<u64> {
    if k > 20 {
        return Err(Error::InvalidArgument(format!("bell number index {k} exceeds 20")));
    }
    let mut row: Vec<u64> = vec![1];
    for _ in 0..k {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("non-empty row"));
        for &v in &row {
            let last = *next.last().expect("non-empty row");
            next.push(last.checked_add(v).ok_or_else(|| Error::Overflow("bell number".into()))?);
        }
        row = next;
    }
    Ok(row[0])
}

/// Every partition of `{0, .., size-1}`, via restricted growth strings.
pub fn enumerate_all_partitions(size: usize) -> Result<Vec<Partition>> {
    if size == 0 || size > 5 {
        return Err(Error::InvalidArgument(format!("set size {size} outside 1..=5")));
    }
    let window = HypercubeWindow::finite_set(size)?;
    let mut out = Vec::new();
    let mut rgs = vec![0u32; size];
    fn rec(pos: usize, max: u32, rgs: &mut Vec<u32>, window: &HypercubeWindow, out: &mut Vec<Partition>) {
        if pos == rgs.len() {
            out.push(Partition::from_labels(window, rgs).expect("sized labels"));
            return;
        }
        for v in 0..=max + 1 {
            rgs[pos] = v;
            rec(pos + 1, max.max(v), rgs, window, out);
        }
    }
    rec(1, 0, &mut rgs, &window, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_values() {
        let expect = [1u64, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597, 27644437];
        for (k, &b) in expect.iter().enumerate() {
            assert_eq!(bell_number(k).unwrap(), b);
        }
        assert!(bell_number(20).is_ok());
        assert!(bell_number(21).is_err());
    }

    #[test]
    fn enumeration_counts() {
        for size in 1..=5 {
            assert_eq!(enumerate_all_partitions(size).unwrap().len() as u64, bell_number(size).unwrap());
        }
        assert!(enumerate_all_partitions(6).is_err());
    }

    #[test]
    fn hasse_examples() {
        assert_eq!(hasse_reduce(3, &[(0, 1), (1, 2), (0, 2)]).unwrap(), vec![(0, 1), (1, 2)]);
        let diamond = vec![(0, 1), (0, 2), (1, 3), (2, 3)];
        assert_eq!(hasse_reduce(4, &diamond).unwrap(), diamond);
        assert!(matches!(hasse_reduce(2, &[(0, 1), (1, 0)]), Err(Error::Cycle)));
    }

    #[test]
    fn two_node_family() {
        let w = HypercubeWindow::finite_set(3).unwrap();
        let items = vec![
            HierarchyItem { label: "fine".into(), mask: None, level: 0, partition: Partition::finest(&w) },
            HierarchyItem { label: "coarse".into(), mask: None, level: 0, partition: Partition::coarsest(&w) },
            HierarchyItem { label: "again".into(), mask: None, level: 0, partition: Partition::finest(&w) },
        ];
        let dag = complete_hierarchy_of(&items, HierarchyOptions::default()).unwrap();
        assert_eq!(dag.nodes().len(), 2);
        assert_eq!(dag.edges(), &[(0, 1)]);
        assert_eq!(dag.nodes()[0].labels, vec!["fine".to_string(), "again".to_string()]);
        assert!(dag.to_dot().contains("n0 -> n1"));
    }
}
