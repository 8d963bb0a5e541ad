//! The induction over generator subsets with expand-and-restrict correction.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::schedule::Schedule;
use super::base_partition;
use crate::error::{Error, Result};
use crate::generators::GeneratorSet;
use crate::partition::Partition;
use crate::space::HypercubeWindow;
use crate::transform::{Family, TransformKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionPolicy {
    /// Per-axis growth per expansion step; `None` grows every side by 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<Vec<i64>>,
    /// Number of consecutive agreeing restrictions required to stop.
    pub delta_k: usize,
    /// Largest expansion factor tried.
    pub max_k: usize,
    /// Translation-only sets run on a centered copy of the window; other
    /// sets run on the smallest origin-centered cube containing it.
    #[serde(default = "default_true")]
    pub recenter: bool,
    /// Skip the search and use this expansion factor for every entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_k: Option<usize>,
}

fn default_true() -> bool {
    true
}

impl Default for ExpansionPolicy {
    fn default() -> Self {
        ExpansionPolicy { step: None, delta_k: 1, max_k: 6, recenter: true, fixed_k: None }
    }
}

impl ExpansionPolicy {
    pub fn new(delta_k: usize, max_k: usize) -> Self {
        ExpansionPolicy { delta_k, max_k, ..Default::default() }
    }

    /// No expansion: partitions of the window as seen from inside it.
    pub fn restricted() -> Self {
        ExpansionPolicy { fixed_k: Some(0), ..Default::default() }
    }

    /// Checks the policy for a `dim`-dimensional window; returns the step.
    pub fn validate(&self, dim: usize) -> Result<Vec<i64>> {
        if self.delta_k == 0 {
            return Err(Error::InvalidArgument("delta_k must be at least 1".into()));
        }
        match &self.step {
            None => Ok(vec![1; dim]),
            Some(s) if s.len() != dim => Err(Error::DimensionMismatch { expected: dim, got: s.len() }),
            Some(s) if s.iter().any(|&v| v < 0) => Err(Error::InvalidArgument("step entries must be non-negative".into())),
            Some(s) => Ok(s.clone()),
        }
    }
}

/// How an entry was obtained at the expansion level it was taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Finest,
    Base { generator: usize },
    Meet { left: u64, right: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyEntry {
    pub partition: Partition,
    pub provenance: Provenance,
    /// Expansion factor the entry was taken at.
    pub k: usize,
    /// The search hit `max_k` without consensus.
    pub approximate: bool,
    /// `k` came from the policy rather than a consensus search.
    pub fixed_level: bool,
}

#[derive(Clone, Debug)]
pub struct AbstractionFamily {
    pub(super) generators: GeneratorSet,
    pub(super) window: HypercubeWindow,
    pub(super) policy: ExpansionPolicy,
    pub(super) entries: BTreeMap<u64, FamilyEntry>,
}

impl AbstractionFamily {
    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    pub fn window(&self) -> &HypercubeWindow {
        &self.window
    }

    pub fn policy(&self) -> &ExpansionPolicy {
        &self.policy
    }

    pub fn entries(&self) -> &BTreeMap<u64, FamilyEntry> {
        &self.entries
    }

    pub fn get(&self, mask: u64) -> Option<&FamilyEntry> {
        self.entries.get(&mask)
    }

    pub fn partition(&self, mask: u64) -> Option<&Partition> {
        self.entries.get(&mask).map(|e| &e.partition)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_k_observed(&self) -> usize {
        self.entries.values().map(|e| e.k).max().unwrap_or(0)
    }

    pub fn approximate_count(&self) -> usize {
        self.entries.values().filter(|e| e.approximate).count()
    }

    /// Generator labels of a subset, e.g. `{t(1,1),r(P(1,2))}`.
    pub fn subset_name(&self, mask: u64) -> String {
        format!("{{{}}}", self.generators.subset_labels(mask).join(","))
    }
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

/// Masks needed to build `targets` by removing one generator at a time,
/// grouped by popcount.
fn downward_closure(targets: &[u64]) -> Vec<Vec<u64>> {
    let top = targets.iter().map(|m| m.count_ones() as usize).max().unwrap_or(0);
    let mut layers: Vec<HashSet<u64>> = vec![HashSet::new(); top + 1];
    for &m in targets {
        layers[m.count_ones() as usize].insert(m);
    }
    for p in (2..=top).rev() {
        let below: Vec<u64> = layers[p].iter().flat_map(|&m| bits(m).map(move |i| m & !(1 << i))).collect();
        layers[p - 1].extend(below);
    }
    layers
        .into_iter()
        .map(|l| {
            let mut v: Vec<u64> = l.into_iter().collect();
            v.sort_unstable();
            v
        })
        .collect()
}

/// Cheapest cached pair of proper subsets whose union is `mask`.
fn choose_split(mask: u64, prev: &HashMap<u64, Partition>, singles: &HashMap<u64, Partition>) -> (u64, u64) {
    let cells = |m: u64| -> usize {
        if m.count_ones() == 1 {
            singles[&m].cell_count()
        } else {
            prev[&m].cell_count()
        }
    };
    let ids: Vec<usize> = bits(mask).collect();
    let mut best: Option<(usize, u64, u64)> = None;
    let mut consider = |a: u64, b: u64| {
        let cost = cells(a).saturating_mul(cells(b));
        if best.is_none_or(|(c, _, _)| cost < c) {
            best = Some((cost, a, b));
        }
    };
    for (x, &i) in ids.iter().enumerate() {
        let without_i = mask & !(1 << i);
        consider(without_i, 1 << i);
        for &j in &ids[x + 1..] {
            consider(without_i, mask & !(1 << j));
        }
    }
    let (_, a, b) = best.expect("mask has at least two generators");
    (a, b)
}

/// Computes every mask of the downward closure of `targets` on `computed`
/// and returns the target entries restricted to `y`.
fn compute_level(
    set: &GeneratorSet,
    computed: &HypercubeWindow,
    y: &HypercubeWindow,
    targets: &[u64],
) -> Result<HashMap<u64, (Partition, Provenance)>> {
    let target_set: HashSet<u64> = targets.iter().copied().collect();
    let embedding = if computed == y { None } else { Some(computed.embed(y)?) };
    let restrict = |p: &Partition| match &embedding {
        Some(e) => p.restrict_embedded(y, e),
        None => p.clone(),
    };
    let layers = downward_closure(targets);
    let mut out = HashMap::with_capacity(targets.len());
    if target_set.contains(&0) {
        out.insert(0, (Partition::finest(y), Provenance::Finest));
    }
    if layers.len() < 2 {
        return Ok(out);
    }
    let singles: HashMap<u64, Partition> = layers[1]
        .par_iter()
        .map(|&m| {
            let i = m.trailing_zeros() as usize;
            base_partition(&set.get(i).transform, computed).map(|p| (m, p))
        })
        .collect::<Result<_>>()?;
    for &m in &layers[1] {
        if target_set.contains(&m) {
            let generator = m.trailing_zeros() as usize;
            out.insert(m, (restrict(&singles[&m]), Provenance::Base { generator }));
        }
    }
    let mut prev: HashMap<u64, Partition> = HashMap::new();
    for layer in &layers[2..] {
        let lookup = if prev.is_empty() { &singles } else { &prev };
        let built: Vec<(u64, Partition, u64, u64)> = layer
            .par_iter()
            .map(|&m| {
                let (a, b) = choose_split(m, lookup, &singles);
                let get = |x: u64| if x.count_ones() == 1 { &singles[&x] } else { &lookup[&x] };
                get(a).meet(get(b)).map(|p| (m, p, a, b))
            })
            .collect::<Result<_>>()?;
        let mut next = HashMap::with_capacity(built.len());
        for (m, p, left, right) in built {
            if target_set.contains(&m) {
                out.insert(m, (restrict(&p), Provenance::Meet { left, right }));
            }
            next.insert(m, p);
        }
        prev = next;
    }
    Ok(out)
}

struct Track {
    value: Partition,
    provenance: Provenance,
    start_k: usize,
    run: usize,
}

/// The windows `Y_{+k}` partitions are computed on.
enum Filtration {
    Symmetric(HypercubeWindow),
    /// The origin-centered cube hull of `Y` grown by `k`, restricted to `Y`.
    Hull(HypercubeWindow, HypercubeWindow),
}

impl Filtration {
    fn base(&self) -> &HypercubeWindow {
        match self {
            Filtration::Symmetric(y) | Filtration::Hull(y, _) => y,
        }
    }

    fn level(&self, k: usize, step: &[i64]) -> Result<HypercubeWindow> {
        match self {
            Filtration::Symmetric(y) => y.expand_by(k, step),
            Filtration::Hull(_, hull) => hull.expand_by(k, step),
        }
    }
}

/// Translation-only sets give the same labels on any translate of the
/// window, so they run on a centered copy. Other sets act around the
/// origin, so other windows are computed inside the smallest
/// origin-centered cube that holds them.
fn filtration(set: &GeneratorSet, window: &HypercubeWindow, policy: &ExpansionPolicy) -> Result<Filtration> {
    if !policy.recenter || set.family() != Family::Affine {
        return Ok(Filtration::Symmetric(window.clone()));
    }
    let stationary = set.generators().iter().all(|g| g.kind() == TransformKind::Translation);
    if stationary {
        let shift: Vec<i64> = window.lo().iter().zip(window.hi()).map(|(&l, &h)| (l + h).div_euclid(2)).collect();
        let lo = window.lo().iter().zip(&shift).map(|(l, s)| l - s).collect();
        let hi = window.hi().iter().zip(&shift).map(|(h, s)| h - s).collect();
        return Ok(Filtration::Symmetric(HypercubeWindow::new(lo, hi)?));
    }
    let reach = window.lo().iter().chain(window.hi()).map(|v| v.unsigned_abs()).max().unwrap_or(0);
    let reach = i64::try_from(reach).map_err(|_| Error::Overflow("window hull".into()))?;
    let hull = HypercubeWindow::centered(window.dim(), reach)?;
    if &hull == window {
        Ok(Filtration::Symmetric(window.clone()))
    } else {
        Ok(Filtration::Hull(window.clone(), hull))
    }
}

fn check_inputs(set: &GeneratorSet, window: &HypercubeWindow) -> Result<()> {
    if set.dim() != window.dim() {
        return Err(Error::DimensionMismatch { expected: window.dim(), got: set.dim() });
    }
    if set.family() == Family::Table {
        let size = set.table_size().unwrap_or(window.len());
        if window.dim() != 1 || window.lo()[0] != 0 || window.len() != size {
            return Err(Error::InvalidWindow(format!("table generators act on [0,{}]", size as i64 - 1)));
        }
    }
    Ok(())
}

/// `Pi(S')` for every scheduled subset, each corrected by expand-and-restrict.
///
/// For every expansion factor `k` the unfinished subsets (and the subsets
/// they are built from) are recomputed on the grown window with base cases
/// and meets, and restricted back. An entry is final at the first `k` whose
/// restriction is repeated for the next `delta_k` factors; entries still
/// open after `max_k` keep the last restriction and are flagged approximate.
pub fn induction_family(
    set: &GeneratorSet,
    window: &HypercubeWindow,
    policy: &ExpansionPolicy,
    schedule: &Schedule,
) -> Result<AbstractionFamily> {
    check_inputs(set, window)?;
    let step = policy.validate(window.dim())?;
    let masks = schedule.masks(set)?;
    let filtration = filtration(set, window, policy)?;
    let y = filtration.base().clone();
    let mut entries: BTreeMap<u64, FamilyEntry> = BTreeMap::new();
    let mut finish = |m: u64, value: Partition, provenance, k, approximate, fixed_level| {
        let partition = Partition::from_canonical(window.clone(), value.labels().to_vec(), value.cell_count());
        entries.insert(m, FamilyEntry { partition, provenance, k, approximate, fixed_level });
    };

    let levels: Option<usize> = match (set.family(), policy.fixed_k) {
        (Family::Table, _) => Some(0),
        (_, Some(k)) => Some(k),
        _ => None,
    };
    if let Some(k) = levels {
        let grown = if set.family() == Family::Table { y.clone() } else { filtration.level(k, &step)? };
        let fixed = set.family() == Family::Affine;
        for (m, (p, prov)) in compute_level(set, &grown, &y, &masks)? {
            finish(m, p, prov, k, false, fixed && m != 0);
        }
        return Ok(AbstractionFamily { generators: set.clone(), window: window.clone(), policy: policy.clone(), entries });
    }

    let mut open: Vec<u64> = Vec::with_capacity(masks.len());
    for &m in &masks {
        if m == 0 {
            finish(0, Partition::finest(&y), Provenance::Finest, 0, false, false);
        } else {
            open.push(m);
        }
    }
    let mut tracks: HashMap<u64, Track> = HashMap::new();
    for k in 0..=policy.max_k {
        if open.is_empty() {
            break;
        }
        let grown = filtration.level(k, &step)?;
        let mut level = compute_level(set, &grown, &y, &open)?;
        let mut still_open = Vec::with_capacity(open.len());
        for m in open {
            let (value, provenance) = level.remove(&m).expect("every open mask is computed");
            let track = match tracks.get_mut(&m) {
                Some(t) if t.value == value => {
                    t.run += 1;
                    t
                }
                _ => {
                    tracks.insert(m, Track { value, provenance, start_k: k, run: 0 });
                    tracks.get_mut(&m).expect("just inserted")
                }
            };
            if track.run >= policy.delta_k {
                let t = tracks.remove(&m).expect("tracked");
                finish(m, t.value, t.provenance, t.start_k, false, false);
            } else {
                still_open.push(m);
            }
        }
        open = still_open;
    }
    for m in open {
        let t = tracks.remove(&m).expect("tracked");
        finish(m, t.value, t.provenance, policy.max_k, true, false);
    }
    Ok(AbstractionFamily { generators: set.clone(), window: window.clone(), policy: policy.clone(), entries })
}

/// The corrected partition of a single subset.
pub fn expand_and_restrict(
    set: &GeneratorSet,
    mask: u64,
    window: &HypercubeWindow,
    policy: &ExpansionPolicy,
) -> Result<FamilyEntry> {
    let mut family = induction_family(set, window, policy, &Schedule::Explicit(vec![mask]))?;
    Ok(family.entries.remove(&mask).expect("requested mask"))
}

/// Largest expansion factor the consensus search needs on `small`; used to
/// fix the factor for a run on a larger window.
pub fn calibrate_expansion(
    set: &GeneratorSet,
    small: &HypercubeWindow,
    policy: &ExpansionPolicy,
    schedule: &Schedule,
) -> Result<usize> {
    let search = ExpansionPolicy { fixed_k: None, ..policy.clone() };
    Ok(induction_family(set, small, &search, schedule)?.max_k_observed())
}
