//! Named generator sets, the standard isometry generating set with
//! circulators and synchronizers, and a minimality check.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::transform::{AffineTransform, Family, TableTransform, Transform, TransformKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub transform: Transform,
    pub label: String,
    /// Period `alpha` when the generator is a circulator `s^alpha`.
    pub period: Option<u32>,
}

impl Generator {
    pub fn new(transform: Transform, label: impl Into<String>) -> Self {
        Generator { transform, label: label.into(), period: None }
    }

    pub fn with_period(mut self, period: u32) -> Self {
        self.period = Some(period);
        self
    }

    pub fn kind(&self) -> TransformKind {
        self.transform.kind()
    }
}

/// An ordered, extensionally duplicate-free list of generators of one family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    name: String,
    generators: Vec<Generator>,
    family: Family,
    dim: usize,
    raw_size: usize,
}

impl GeneratorSet {
    /// Builds a set, dropping later generators that are extensionally equal to
    /// an earlier one. `raw_size` keeps the count before deduplication.
    pub fn new(name: impl Into<String>, family: Family, dim: usize, generators: Vec<Generator>) -> Result<Self> {
        let raw_size = generators.len();
        let mut kept: Vec<Generator> = Vec::with_capacity(raw_size);
        for g in generators {
            if g.transform.family() != family {
                return Err(Error::FamilyMismatch);
            }
            if g.transform.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: g.transform.dim() });
            }
            if family == Family::Table {
                if let (Transform::Table(t), Some(Generator { transform: Transform::Table(first), .. })) =
                    (&g.transform, kept.first())
                {
                    if t.size() != first.size() {
                        return Err(Error::DimensionMismatch { expected: first.size(), got: t.size() });
                    }
                }
            }
            if !kept.iter().any(|k| k.transform == g.transform) {
                kept.push(g);
            }
        }
        Ok(GeneratorSet { name: name.into(), generators: kept, family, dim, raw_size })
    }

    /// Affine set inferring the dimension from the first generator.
    pub fn affine(name: impl Into<String>, dim: usize, generators: Vec<Generator>) -> Result<Self> {
        Self::new(name, Family::Affine, dim, generators)
    }

    pub fn table(name: impl Into<String>, generators: Vec<Generator>) -> Result<Self> {
        Self::new(name, Family::Table, 1, generators)
    }

    pub fn empty_affine(dim: usize) -> Self {
        GeneratorSet { name: "empty".into(), generators: Vec::new(), family: Family::Affine, dim, raw_size: 0 }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Count before extensional deduplication.
    pub fn raw_size(&self) -> usize {
        self.raw_size
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn get(&self, i: usize) -> &Generator {
        &self.generators[i]
    }

    /// Domain size shared by table generators, if any.
    pub fn table_size(&self) -> Option<usize> {
        self.generators.iter().find_map(|g| match &g.transform {
            Transform::Table(t) => Some(t.size()),
            _ => None,
        })
    }

    /// Transforms selected by a subset bitmask.
    pub fn select(&self, mask: u64) -> Vec<&Transform> {
        self.generators
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, g)| &g.transform)
            .collect()
    }

    pub fn subset_labels(&self, mask: u64) -> Vec<String> {
        self.generators
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, g)| g.label.clone())
            .collect()
    }

    pub fn full_mask(&self) -> u64 {
        if self.len() >= 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&GeneratorSetRepr::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<GeneratorSetRepr>(text)?.try_into()
    }
}

fn fmt_vec(v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(","))
}

/// The standard generating set
/// `T0 ∪ T0^2 ∪ ... ∪ T0^tau ∪ {t'_1} ∪ R_N0 ∪ {r'_{-I}} ∪ R_P0` of `ISO(Z^n)`
/// with circulators of every period up to `tau`.
///
/// Before deduplication it has `(tau + 2) n + 1` members; at `n = 1` the
/// synchronizers coincide with basis generators and are dropped.
pub fn standard_generators(n: usize, tau: u32) -> Result<GeneratorSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if tau == 0 {
        return Err(Error::InvalidArgument("period bound must be at least 1".into()));
    }
    let mut gens = Vec::with_capacity((tau as usize + 2) * n + 1);
    for alpha in 1..=tau {
        for i in 0..n {
            let mut u = vec![0i64; n];
            u[i] = alpha as i64;
            let label = format!("t{}", fmt_vec(&u));
            gens.push(Generator::new(Transform::translation(u), label).with_period(alpha));
        }
    }
    gens.push(Generator::new(Transform::translation(vec![1; n]), format!("t{}", fmt_vec(&vec![1; n]))));
    for i in 0..n {
        let mut d = vec![1i64; n];
        d[i] = -1;
        let m = IntMatrix::diagonal(&d);
        gens.push(Generator::new(
            Transform::Affine(AffineTransform::linear(m)?),
            format!("r(diag{})", fmt_vec(&d)),
        ));
    }
    gens.push(Generator::new(
        Transform::Affine(AffineTransform::linear(IntMatrix::diagonal(&vec![-1; n]))?),
        "r(-I)".to_string(),
    ));
    for i in 0..n.saturating_sub(1) {
        gens.push(Generator::new(
            Transform::Affine(AffineTransform::linear(IntMatrix::swap(n, i, i + 1))?),
            format!("r(P({},{}))", i + 1, i + 2),
        ));
    }
    GeneratorSet::affine(format!("standard(n={n},tau={tau})"), n, gens)
}

fn closure_contains(gens: &[&Transform], identity: Transform, target: &Transform, budget: usize) -> Result<bool> {
    if *target == identity {
        return Ok(true);
    }
    let mut steps: Vec<Transform> = Vec::with_capacity(gens.len() * 2);
    for g in gens {
        steps.push((*g).clone());
        let inv = g.invert();
        if inv != **g {
            steps.push(inv);
        }
    }
    let mut seen: HashSet<Transform> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(identity.clone());
    queue.push_back(identity);
    while let Some(e) = queue.pop_front() {
        for s in &steps {
            let next = e.compose(s)?;
            if next == *target {
                return Ok(true);
            }
            if seen.insert(next.clone()) {
                if seen.len() > budget {
                    return Err(Error::BudgetExceeded(budget));
                }
                queue.push_back(next);
            }
        }
    }
    Ok(false)
}

/// True iff no generator lies in the group generated by the others.
///
/// Finding a generator inside the partial closure decides the question
/// early; otherwise the closure must complete within `budget` elements.
pub fn is_minimal_generating_set(set: &GeneratorSet, budget: usize) -> Result<bool> {
    let all: Vec<&Transform> = set.generators().iter().map(|g| &g.transform).collect();
    let mut exhausted = None;
    for (i, g) in all.iter().enumerate() {
        let rest: Vec<&Transform> = all.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, t)| *t).collect();
        match closure_contains(&rest, g.identity_like(), g, budget) {
            Ok(true) => return Ok(false),
            Ok(false) => {}
            Err(e @ Error::BudgetExceeded(_)) => exhausted = Some(e),
            Err(e) => return Err(e),
        }
    }
    match exhausted {
        Some(e) => Err(e),
        None => Ok(true),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GeneratorRepr {
    kind: TransformKind,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none", default)]
    matrix: Option<Vec<Vec<i64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    u: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    forward: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    period: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GeneratorSetRepr {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    name: Option<String>,
    n: usize,
    generators: Vec<GeneratorRepr>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    raw_size: Option<usize>,
}

impl From<&GeneratorSet> for GeneratorSetRepr {
    fn from(set: &GeneratorSet) -> Self {
        let generators = set
            .generators
            .iter()
            .map(|g| {
                let mut repr = GeneratorRepr {
                    kind: g.kind(),
                    matrix: None,
                    u: None,
                    forward: None,
                    label: Some(g.label.clone()),
                    period: g.period,
                };
                match &g.transform {
                    Transform::Affine(a) => {
                        if !a.matrix().is_identity() {
                            repr.matrix = Some(a.matrix().rows());
                        }
                        repr.u = Some(a.offset().to_vec());
                    }
                    Transform::Table(t) => repr.forward = Some(t.forward().to_vec()),
                }
                repr
            })
            .collect();
        let raw_size = (set.raw_size != set.generators.len()).then_some(set.raw_size);
        GeneratorSetRepr { name: Some(set.name.clone()), n: set.dim, generators, raw_size }
    }
}

impl TryFrom<GeneratorSetRepr> for GeneratorSet {
    type Error = Error;

    fn try_from(repr: GeneratorSetRepr) -> Result<Self> {
        let n = repr.n;
        let mut family = None;
        let mut gens = Vec::with_capacity(repr.generators.len());
        for (i, g) in repr.generators.into_iter().enumerate() {
            // kind tags are advisory: the data decides what the transform is
            let transform = if g.kind == TransformKind::Table || g.forward.is_some() {
                let forward = g
                    .forward
                    .ok_or_else(|| Error::InvalidArgument(format!("generator {i}: table without forward")))?;
                Transform::Table(TableTransform::new(forward)?)
            } else {
                let u = g.u.unwrap_or_else(|| vec![0; n]);
                let matrix = match g.matrix {
                    Some(rows) => IntMatrix::from_rows(&rows)?,
                    None => IntMatrix::identity(u.len()),
                };
                Transform::Affine(AffineTransform::new(matrix, u)?)
            };
            let fam = transform.family();
            if *family.get_or_insert(fam) != fam {
                return Err(Error::FamilyMismatch);
            }
            let label = g.label.unwrap_or_else(|| format!("g{i}"));
            gens.push(Generator { transform, label, period: g.period });
        }
        let family = family.unwrap_or(Family::Affine);
        let dim = if family == Family::Table { 1 } else { n };
        let mut set = GeneratorSet::new(repr.name.unwrap_or_else(|| "custom".into()), family, dim, gens)?;
        if let Some(raw) = repr.raw_size {
            set.raw_size = raw.max(set.raw_size);
        }
        Ok(set)
    }
}

impl Serialize for GeneratorSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GeneratorSetRepr::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GeneratorSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = GeneratorSetRepr::deserialize(deserializer)?;
        GeneratorSet::try_from(repr).map_err(serde::de::Error::custom)
    }
}
