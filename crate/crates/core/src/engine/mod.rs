//! Orbit tracing, the induction over generator subsets, expand-and-restrict,
//! subset pruning and brute-force oracles.

mod export;
pub use export::{partition_file_name, MANIFEST_FILE};
mod family;
mod schedule;

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::generators::{Generator, GeneratorSet};
use crate::partition::Partition;
use crate::space::HypercubeWindow;
use crate::transform::{Family, TableTransform, Transform};

pub use family::{
    calibrate_expansion, expand_and_restrict, induction_family, AbstractionFamily,
    ExpansionPolicy, FamilyEntry, Provenance,
};
pub use schedule::{pruned_subset_count, pruned_subsets, Schedule, MAX_EXPLICIT_GENERATORS, MAX_UNPRUNED_GENERATORS};

const UNSET: u32 = u32::MAX;

/// Result of one orbit-tracing run with its work counters.
#[derive(Clone, Debug)]
pub struct BaseTrace {
    pub partition: Partition,
    /// Number of times the transform was evaluated.
    pub applications: usize,
    /// Outer-loop visits that found an unlabeled point.
    pub iterations: usize,
}

fn check_dims(s: &Transform, window: &HypercubeWindow) -> Result<()> {
    if s.dim() != window.dim() {
        return Err(Error::DimensionMismatch { expected: window.dim(), got: s.dim() });
    }
    Ok(())
}

/// Partition of `window` into the pieces of `<s>`-orbits that forward
/// tracing can see without leaving the window.
pub fn base_partition(s: &Transform, window: &HypercubeWindow) -> Result<Partition> {
    let order: Vec<usize> = (0..window.len()).collect();
    Ok(base_partition_traced(s, window, &order)?.partition)
}

/// Orbit tracing visiting start points in `order`.
///
/// From an unlabeled `x` the trace follows `y = s(x), s(y), ...` and stops
/// when `y` leaves the window, returns to `x`, or hits a labeled point (whose
/// label the trace adopts). Each point is transformed once and labeled once.
pub fn base_partition_traced(s: &Transform, window: &HypercubeWindow, order: &[usize]) -> Result<BaseTrace> {
    check_dims(s, window)?;
    if order.len() != window.len() {
        return Err(Error::InvalidArgument("point order must cover the window".into()));
    }
    let n = window.len();
    let mut labels = vec![UNSET; n];
    let mut next = 0u32;
    let mut applications = 0usize;
    let mut iterations = 0usize;
    let mut trace: Vec<usize> = Vec::new();
    let mut x = vec![0i64; window.dim()];
    let mut y = vec![0i64; window.dim()];
    for &start in order {
        if labels[start] != UNSET {
            continue;
        }
        iterations += 1;
        trace.clear();
        trace.push(start);
        window.point_into(start, &mut x);
        let label = loop {
            s.apply_into(&x, &mut y);
            applications += 1;
            match window.index_of(&y) {
                None => break None,
                Some(j) if j == start => break None,
                Some(j) if labels[j] != UNSET => break Some(labels[j]),
                Some(j) => {
                    trace.push(j);
                    std::mem::swap(&mut x, &mut y);
                }
            }
        };
        let label = label.unwrap_or_else(|| {
            next += 1;
            next - 1
        });
        for &p in &trace {
            labels[p] = label;
        }
    }
    Ok(BaseTrace { partition: Partition::from_raw_dense(window, &labels, next as usize), applications, iterations })
}

/// Ground-truth orbit partition by breadth-first search.
///
/// Explores generator and inverse steps inside `window` grown by `bound`
/// (tables use the window itself) and restricts the components to `window`.
pub fn orbit_partition_oracle(set: &GeneratorSet, mask: u64, window: &HypercubeWindow, bound: usize) -> Result<Partition> {
    if set.dim() != window.dim() {
        return Err(Error::DimensionMismatch { expected: window.dim(), got: set.dim() });
    }
    let region = match set.family() {
        Family::Table => window.clone(),
        Family::Affine => window.expand(bound)?,
    };
    let mut steps: Vec<Transform> = Vec::new();
    for t in set.select(mask) {
        steps.push(t.clone());
        steps.push(t.invert());
    }
    let mut comp = vec![UNSET; region.len()];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    let mut x = vec![0i64; region.dim()];
    let mut y = vec![0i64; region.dim()];
    for start in 0..region.len() {
        if comp[start] != UNSET {
            continue;
        }
        comp[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            region.point_into(i, &mut x);
            for s in &steps {
                s.apply_into(&x, &mut y);
                if let Some(j) = region.index_of(&y) {
                    if comp[j] == UNSET {
                        comp[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
        next += 1;
    }
    let full = Partition::from_raw_dense(&region, &comp, next as usize);
    full.restrict(window)
}

/// Table transpositions whose induced partition on `{0, .., m-1}` is `target`.
///
/// One transposition per pair of consecutive members of each cell.
pub fn surjectivity_witness(target: &Partition) -> Result<GeneratorSet> {
    let w = target.window();
    if w.dim() != 1 || w.lo()[0] != 0 {
        return Err(Error::InvalidArgument("witness needs a finite set window [0, m-1]".into()));
    }
    let m = w.len();
    let mut gens = Vec::new();
    for cell in target.cells() {
        for pair in cell.windows(2) {
            let t = TableTransform::transposition(m, pair[0], pair[1])?;
            gens.push(Generator::new(Transform::Table(t), format!("f({},{})", pair[0], pair[1])));
        }
    }
    GeneratorSet::table("witness", gens)
}
