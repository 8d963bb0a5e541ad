//! Affine subgroups of `Z^n` described by a point group `L`, a translation
//! lattice `V` and a vector system `xi`.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{Generator, GeneratorSet};
use crate::matrix::IntMatrix;
use crate::transform::{AffineTransform, Transform};

/// A finite group of integer matrices, elements kept in sorted order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatrixGroup {
    n: usize,
    elements: Vec<IntMatrix>,
}

impl MatrixGroup {
    /// Validates identity, closure under products and inverses.
    pub fn new(n: usize, elements: Vec<IntMatrix>) -> Result<Self> {
        let mut elements = elements;
        elements.sort();
        elements.dedup();
        if elements.iter().any(|m| m.dim() != n) {
            return Err(Error::InvalidArgument("matrix dimension differs from group dimension".into()));
        }
        let set: HashSet<&IntMatrix> = elements.iter().collect();
        if !set.contains(&IntMatrix::identity(n)) {
            return Err(Error::InvalidArgument("group lacks the identity".into()));
        }
        for a in &elements {
            if !set.contains(&a.inverse()?) {
                return Err(Error::InvalidArgument(format!("inverse of {a:?} missing")));
            }
            for b in &elements {
                if !set.contains(&a.mul(b)) {
                    return Err(Error::InvalidArgument(format!("product {a:?}{b:?} missing")));
                }
            }
        }
        Ok(MatrixGroup { n, elements })
    }

    fn from_sorted_unchecked(n: usize, elements: Vec<IntMatrix>) -> Self {
        MatrixGroup { n, elements }
    }

    pub fn trivial(n: usize) -> Self {
        MatrixGroup { n, elements: vec![IntMatrix::identity(n)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[IntMatrix] {
        &self.elements
    }

    pub fn index_of(&self, a: &IntMatrix) -> Option<usize> {
        self.elements.binary_search(a).ok()
    }

    pub fn contains(&self, a: &IntMatrix) -> bool {
        self.index_of(a).is_some()
    }

    pub fn is_orthogonal(&self) -> bool {
        self.elements.iter().all(IntMatrix::is_orthogonal)
    }

    pub fn is_subgroup_of(&self, other: &MatrixGroup) -> bool {
        self.elements.iter().all(|a| other.contains(a))
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// `O_n(Z)`: all signed permutation matrices `N P`.
pub fn enumerate_on_z(n: usize) -> Result<MatrixGroup> {
    if n == 0 || n > 6 {
        return Err(Error::InvalidArgument(format!("dimension {n} outside 1..=6")));
    }
    let perms: Vec<IntMatrix> = permutations(n).iter().map(|s| IntMatrix::permutation(s)).collect::<Result<_>>()?;
    let mut elements = Vec::with_capacity(perms.len() << n);
    for signs in 0..1u32 << n {
        let d: Vec<i64> = (0..n).map(|i| if signs >> i & 1 == 1 { -1 } else { 1 }).collect();
        let neg = IntMatrix::diagonal(&d);
        elements.extend(perms.iter().map(|p| neg.mul(p)));
    }
    elements.sort();
    Ok(MatrixGroup::from_sorted_unchecked(n, elements))
}

/// Splits a signed permutation matrix into `(N, P)` with `A = N P`.
pub fn factor_signed_permutation(a: &IntMatrix) -> Result<(IntMatrix, IntMatrix)> {
    let n = a.dim();
    let mut signs = vec![0i64; n];
    let mut sigma = vec![usize::MAX; n];
    for i in 0..n {
        for j in 0..n {
            match a.get(i, j) {
                0 => {}
                v @ (1 | -1) if signs[i] == 0 && sigma[j] == usize::MAX => {
                    signs[i] = v;
                    sigma[j] = i;
                }
                _ => return Err(Error::InvalidArgument(format!("{a:?} is not a signed permutation"))),
            }
        }
    }
    if signs.contains(&0) {
        return Err(Error::InvalidArgument(format!("{a:?} is not a signed permutation")));
    }
    Ok((IntMatrix::diagonal(&signs), IntMatrix::permutation(&sigma)?))
}

/// Subgroup bit set over the parent group's element indices.
type Bits = Vec<u64>;

fn bits_contains(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn bits_insert(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

struct Table {
    size: usize,
    identity: usize,
    mul: Vec<u16>,
}

impl Table {
    fn new(g: &MatrixGroup) -> Result<Self> {
        let size = g.order();
        let mut mul = vec![0u16; size * size];
        for (i, a) in g.elements.iter().enumerate() {
            for (j, b) in g.elements.iter().enumerate() {
                let k = g
                    .index_of(&a.mul(b))
                    .ok_or_else(|| Error::InvalidArgument("elements do not form a group".into()))?;
                mul[i * size + j] = k as u16;
            }
        }
        let identity = g.index_of(&IntMatrix::identity(g.n)).expect("validated group");
        Ok(Table { size, identity, mul })
    }

    /// Subgroup generated by `start` plus `extra`; finite, so closing under
    /// products suffices.
    fn close(&self, start: &Bits, extra: &[usize]) -> Bits {
        let mut members: Vec<usize> = (0..self.size).filter(|&i| bits_contains(start, i)).collect();
        let mut bits = start.clone();
        if !bits_contains(&bits, self.identity) {
            bits_insert(&mut bits, self.identity);
            members.push(self.identity);
        }
        let mut gens: Vec<usize> = members.clone();
        gens.extend_from_slice(extra);
        let mut frontier: Vec<usize> = extra.to_vec();
        for &e in extra {
            if !bits_contains(&bits, e) {
                bits_insert(&mut bits, e);
                members.push(e);
            }
        }
        if frontier.is_empty() {
            frontier = members.clone();
        }
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = self.mul[x * self.size + g] as usize;
                if !bits_contains(&bits, y) {
                    bits_insert(&mut bits, y);
                    frontier.push(y);
                }
            }
        }
        bits
    }
}

/// Largest group handed to [`enumerate_subgroups`].
pub const MAX_SUBGROUP_PARENT: usize = 400;

/// All subgroups of `g` by cyclic extension, ordered by size then elements.
pub fn enumerate_subgroups(g: &MatrixGroup) -> Result<Vec<MatrixGroup>> {
    if g.order() > MAX_SUBGROUP_PARENT {
        return Err(Error::InvalidArgument(format!("group order {} exceeds {MAX_SUBGROUP_PARENT}", g.order())));
    }
    let table = Table::new(g)?;
    let words = table.size.div_ceil(64);
    let empty: Bits = vec![0; words];
    let mut seen: HashSet<Bits> = HashSet::new();
    let mut layer: Vec<Bits> = Vec::new();
    for x in 0..table.size {
        let c = table.close(&empty, &[x]);
        if seen.insert(c.clone()) {
            layer.push(c);
        }
    }
    while !layer.is_empty() {
        let found: Vec<Vec<Bits>> = layer
            .par_iter()
            .map(|h| {
                let mut done = h.clone();
                let mut out = Vec::new();
                for x in 0..table.size {
                    if bits_contains(&done, x) {
                        continue;
                    }
                    // every element of the coset H x extends H to the same group
                    for y in 0..table.size {
                        if bits_contains(h, y) {
                            bits_insert(&mut done, table.mul[y * table.size + x] as usize);
                        }
                    }
                    out.push(table.close(h, &[x]));
                }
                out
            })
            .collect();
        let mut next = Vec::new();
        for k in found.into_iter().flatten() {
            if seen.insert(k.clone()) {
                next.push(k);
            }
        }
        layer = next;
    }
    let mut groups: Vec<MatrixGroup> = seen
        .into_iter()
        .map(|b| {
            let elements = (0..table.size).filter(|&i| bits_contains(&b, i)).map(|i| g.elements[i].clone()).collect();
            MatrixGroup::from_sorted_unchecked(g.n, elements)
        })
        .collect();
    groups.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.elements.cmp(&b.elements)));
    Ok(groups)
}

/// A subgroup of `Z^n` stored as an echelon basis in Hermite normal form:
/// positive pivots, entries above each pivot reduced into `[0, pivot)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SublatticeRepr", into = "SublatticeRepr")]
pub struct Sublattice {
    n: usize,
    basis: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct SublatticeRepr {
    n: usize,
    basis: Vec<Vec<i64>>,
}

impl TryFrom<SublatticeRepr> for Sublattice {
    type Error = Error;

    fn try_from(r: SublatticeRepr) -> Result<Self> {
        Sublattice::span(r.n, &r.basis)
    }
}

impl From<Sublattice> for SublatticeRepr {
    fn from(s: Sublattice) -> Self {
        SublatticeRepr { n: s.n, basis: s.basis }
    }
}

fn to_i64(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Overflow("lattice entry".into()))
}

impl Sublattice {
    /// Lattice generated by arbitrary (possibly dependent) vectors.
    pub fn span(n: usize, vectors: &[Vec<i64>]) -> Result<Self> {
        let mut rows: Vec<Vec<i128>> = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
            if v.iter().any(|&x| x != 0) {
                rows.push(v.iter().map(|&x| x as i128).collect());
            }
        }
        let mut r = 0;
        let mut pivots = Vec::new();
        for col in 0..n {
            if r == rows.len() {
                break;
            }
            loop {
                let best = (r..rows.len()).filter(|&i| rows[i][col] != 0).min_by_key(|&i| rows[i][col].abs());
                let Some(best) = best else { break };
                rows.swap(r, best);
                let mut done = true;
                for i in r + 1..rows.len() {
                    if rows[i][col] != 0 {
                        let q = rows[i][col].div_euclid(rows[r][col]);
                        let pivot_row = rows[r].clone();
                        for (x, p) in rows[i].iter_mut().zip(&pivot_row) {
                            *x -= q * p;
                        }
                        if rows[i][col] != 0 {
                            done = false;
                        }
                    }
                }
                if done {
                    break;
                }
            }
            if rows[r][col] == 0 {
                continue;
            }
            if rows[r][col] < 0 {
                rows[r].iter_mut().for_each(|x| *x = -*x);
            }
            pivots.push(col);
            r += 1;
        }
        rows.truncate(r);
        for (k, &col) in pivots.iter().enumerate() {
            let pivot_row = rows[k].clone();
            for row in rows.iter_mut().take(k) {
                let q = row[col].div_euclid(pivot_row[col]);
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= q * p;
                }
            }
        }
        let basis = rows.into_iter().map(|row| row.into_iter().map(to_i64).collect()).collect::<Result<_>>()?;
        Ok(Sublattice { n, basis })
    }

    pub fn full(n: usize) -> Self {
        let basis = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        Sublattice { n, basis }
    }

    /// `(m Z)^n`.
    pub fn scaled(n: usize, m: i64) -> Result<Self> {
        let vecs: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| if i == j { m } else { 0 }).collect()).collect();
        Self::span(n, &vecs)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    fn pivot(row: &[i64]) -> usize {
        row.iter().position(|&x| x != 0).expect("basis rows are non-zero")
    }

    /// Canonical representative of `v + V`.
    pub fn reduce(&self, v: &[i64]) -> Vec<i64> {
        let mut out: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for row in &self.basis {
            let c = Self::pivot(row);
            let q = out[c].div_euclid(row[c] as i128);
            for (x, &b) in out.iter_mut().zip(row) {
                *x -= q * b as i128;
            }
        }
        out.into_iter().map(|x| x as i64).collect()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    pub fn join(&self, other: &Sublattice) -> Result<Sublattice> {
        let mut vecs = self.basis.clone();
        vecs.extend(other.basis.iter().cloned());
        Self::span(self.n, &vecs)
    }

    /// `A V`.
    pub fn image(&self, a: &IntMatrix) -> Result<Sublattice> {
        let vecs: Vec<Vec<i64>> = self.basis.iter().map(|b| a.mul_vec(b)).collect();
        Self::span(self.n, &vecs)
    }
}

/// `A V = V` for every `A` in `L`.
pub fn compatible(l: &MatrixGroup, v: &Sublattice) -> Result<bool> {
    if l.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), got: v.dim() });
    }
    for a in l.elements() {
        if &v.image(a)? != v {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `xi : L -> Z^n / V`, one representative per group element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorSystem {
    group: MatrixGroup,
    modulus: Sublattice,
    values: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: bool,
    pub violation: Option<String>,
}

impl ValidationReport {
    fn fail(msg: String) -> Self {
        ValidationReport { valid: false, violation: Some(msg) }
    }
}

impl VectorSystem {
    /// `values[i]` is the vector for `group.elements()[i]`; stored reduced.
    pub fn new(group: MatrixGroup, modulus: Sublattice, values: Vec<Vec<i64>>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::InvalidArgument(format!("{} vectors for {} elements", values.len(), group.order())));
        }
        if group.dim() != modulus.dim() {
            return Err(Error::DimensionMismatch { expected: group.dim(), got: modulus.dim() });
        }
        let mut reduced = Vec::with_capacity(values.len());
        for v in &values {
            if v.len() != group.dim() {
                return Err(Error::DimensionMismatch { expected: group.dim(), got: v.len() });
            }
            reduced.push(modulus.reduce(v));
        }
        Ok(VectorSystem { group, modulus, values: reduced })
    }

    /// The all-zero system.
    pub fn trivial(group: MatrixGroup, modulus: Sublattice) -> Result<Self> {
        let zeros = vec![vec![0; group.dim()]; group.order()];
        Self::new(group, modulus, zeros)
    }

    pub fn group(&self) -> &MatrixGroup {
        &self.group
    }

    pub fn modulus(&self) -> &Sublattice {
        &self.modulus
    }

    pub fn value(&self, a: &IntMatrix) -> Option<&[i64]> {
        self.group.index_of(a).map(|i| self.values[i].as_slice())
    }

    pub fn values(&self) -> &[Vec<i64>] {
        &self.values
    }

    fn same_class(&self, a: &[i64], b: &[i64]) -> bool {
        let diff: Vec<i64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.modulus.contains(&diff)
    }

    /// Checks compatibility, `xi(I) in V`, the cocycle law on all pairs and
    /// the inverse law, reporting the first failure.
    pub fn validate(&self) -> Result<ValidationReport> {
        let g = &self.group;
        let v = &self.modulus;
        if !compatible(g, v)? {
            return Ok(ValidationReport::fail("compatibility".into()));
        }
        let id = g.index_of(&IntMatrix::identity(g.dim())).expect("group has identity");
        if !v.contains(&self.values[id]) {
            return Ok(ValidationReport::fail("identity law".into()));
        }
        for (i, a) in g.elements().iter().enumerate() {
            for (j, b) in g.elements().iter().enumerate() {
                let k = g.index_of(&a.mul(b)).expect("closed group");
                let rhs: Vec<i64> = self.values[i].iter().zip(a.mul_vec(&self.values[j])).map(|(x, y)| x + y).collect();
                if !self.same_class(&self.values[k], &rhs) {
                    return Ok(ValidationReport::fail(format!("cocycle at ({a:?}, {b:?})")));
                }
            }
        }
        for (i, a) in g.elements().iter().enumerate() {
            let inv = a.inverse()?;
            let k = g.index_of(&inv).expect("closed group");
            let expected: Vec<i64> = inv.mul_vec(&self.values[i]).iter().map(|x| -x).collect();
            if !self.same_class(&self.values[k], &expected) {
                return Ok(ValidationReport::fail(format!("inverse law at {a:?}")));
            }
        }
        Ok(ValidationReport { valid: true, violation: None })
    }
}

/// `(L, V, xi)`, identifying the affine group `{f_{A,u} : A in L, u in xi(A) + V}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineTriple {
    pub xi: VectorSystem,
}

#[derive(Serialize, Deserialize)]
struct TripleRepr {
    #[serde(rename = "L")]
    l: Vec<Vec<Vec<i64>>>,
    #[serde(rename = "V")]
    v: Sublattice,
    xi: BTreeMap<String, Vec<i64>>,
}

impl AffineTriple {
    pub fn new(xi: VectorSystem) -> Self {
        AffineTriple { xi }
    }

    pub fn group(&self) -> &MatrixGroup {
        &self.xi.group
    }

    pub fn lattice(&self) -> &Sublattice {
        &self.xi.modulus
    }

    /// `A in L` and `u - xi(A) in V`.
    pub fn contains(&self, f: &AffineTransform) -> bool {
        if f.dim() != self.group().dim() {
            return false;
        }
        match self.xi.value(f.matrix()) {
            Some(x) => self.xi.same_class(f.offset(), x),
            None => false,
        }
    }

    /// Translations by the lattice basis plus one affine map per non-identity
    /// element of `L`.
    pub fn generator_set(&self) -> Result<GeneratorSet> {
        let n = self.group().dim();
        let mut gens = Vec::new();
        for b in self.lattice().basis() {
            gens.push(Generator::new(Transform::translation(b.clone()), format!("t{b:?}")));
        }
        for (a, u) in self.group().elements().iter().zip(self.xi.values()) {
            if !a.is_identity() {
                let t = AffineTransform::new(a.clone(), u.clone())?;
                gens.push(Generator::new(Transform::Affine(t), format!("r{:?}", a.rows())));
            }
        }
        GeneratorSet::affine("triple", n, gens)
    }

    pub fn to_json(&self) -> Result<String> {
        let repr = TripleRepr {
            l: self.group().elements().iter().map(IntMatrix::rows).collect(),
            v: self.lattice().clone(),
            xi: self.xi.values().iter().enumerate().map(|(i, v)| (i.to_string(), v.clone())).collect(),
        };
        Ok(serde_json::to_string(&repr)?)
    }

    /// Missing `xi` entries default to zero.
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: TripleRepr = serde_json::from_str(text)?;
        let n = repr.v.dim();
        let mats: Vec<IntMatrix> = repr.l.iter().map(|rows| IntMatrix::from_rows(rows)).collect::<Result<_>>()?;
        let mut by_matrix: HashMap<IntMatrix, Vec<i64>> = HashMap::new();
        for (key, v) in &repr.xi {
            let i: usize = key.parse().map_err(|_| Error::InvalidArgument(format!("xi key {key:?} is not an index")))?;
            let m = mats.get(i).ok_or_else(|| Error::InvalidArgument(format!("xi key {i} out of range")))?;
            by_matrix.insert(m.clone(), v.clone());
        }
        let group = MatrixGroup::new(n, mats)?;
        let values = group.elements().iter().map(|m| by_matrix.get(m).cloned().unwrap_or_else(|| vec![0; n])).collect();
        Ok(AffineTriple::new(VectorSystem::new(group, repr.v, values)?))
    }
}

/// `<1>`, `(12 Z)^n` and their join, deduplicated.
pub fn music_lattices(n: usize) -> Result<Vec<Sublattice>> {
    let diag = Sublattice::span(n, &[vec![1; n]])?;
    let octaves = Sublattice::scaled(n, 12)?;
    let both = diag.join(&octaves)?;
    let mut out: Vec<Sublattice> = Vec::new();
    for l in [diag, octaves, both] {
        if !out.contains(&l) {
            out.push(l);
        }
    }
    Ok(out)
}

/// Every compatible `(L, V, xi0)` with `L <= O_n(Z)` and `V` a music lattice.
pub fn enumerate_music_triples(n: usize) -> Result<Vec<AffineTriple>> {
    if n == 0 || n > 4 {
        return Err(Error::InvalidArgument(format!("dimension {n} outside 1..=4")));
    }
    let subgroups = enumerate_subgroups(&enumerate_on_z(n)?)?;
    let lattices = music_lattices(n)?;
    let mut out = Vec::new();
    for l in &subgroups {
        for v in &lattices {
            if compatible(l, v)? {
                out.push(AffineTriple::new(VectorSystem::trivial(l.clone(), v.clone())?));
            }
        }
    }
    Ok(out)
}
