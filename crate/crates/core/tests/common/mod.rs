//! Shared fixtures and brute-force oracles for the integration tests.
//!
//! The oracles here avoid the library's own algorithms: orbits come from
//! label relaxation over a hash map of points, orders from pairwise checks.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::prelude::*;
use rand::rngs::StdRng;
use symab::affine_id::enumerate_on_z;
use symab::*;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random bijection of `Z^n` with matrix and offset entries in `[-2, 2]`.
/// `kind` 0 is a translation, 1 an isometry, 2 a unimodular shear.
pub fn random_transform(rng: &mut StdRng, n: usize, kind: u8) -> Transform {
    let u: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
    match kind {
        0 => {
            let mut u = u;
            if u.iter().all(|&x| x == 0) {
                u[0] = 1;
            }
            Transform::translation(u)
        }
        1 => {
            let g = enumerate_on_z(n).unwrap();
            let a = g.elements()[rng.gen_range(0..g.order())].clone();
            Transform::Affine(AffineTransform::new(a, u).unwrap())
        }
        _ => loop {
            let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-2..=2)).collect()).collect();
            if let Ok(t) = Transform::affine(&rows, u.clone()) {
                break t;
            }
        },
    }
}

/// Random affine case: 1 to 3 generators on a window of side at most 7.
pub fn random_affine_case(rng: &mut StdRng) -> (GeneratorSet, HypercubeWindow) {
    loop {
        let n = rng.gen_range(1..=3);
        let lo: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=0)).collect();
        let hi: Vec<i64> = lo.iter().map(|&l| l + rng.gen_range(0..=6)).collect();
        let w = HypercubeWindow::new(lo, hi).unwrap();
        let count = rng.gen_range(1..=3);
        let gens = (0..count)
            .map(|i| {
                let kind = rng.gen_range(0..3);
                Generator::new(random_transform(rng, n, kind), format!("g{i}"))
            })
            .collect();
        if let Ok(set) = GeneratorSet::affine("random", n, gens) {
            return (set, w);
        }
    }
}

pub fn random_permutation(rng: &mut StdRng, size: usize) -> Transform {
    let mut f: Vec<u32> = (0..size as u32).collect();
    f.shuffle(rng);
    Transform::table(f).unwrap()
}

/// Random table set of `count` permutations of `[0, size - 1]`, biased
/// toward short cycles so families are not all coarsest.
pub fn random_table_set(rng: &mut StdRng, size: usize, count: usize) -> GeneratorSet {
    let gens = (0..count)
        .map(|i| {
            let t = if rng.gen_bool(0.6) {
                let a = rng.gen_range(0..size);
                let b = rng.gen_range(0..size);
                let mut f: Vec<u32> = (0..size as u32).collect();
                f.swap(a, b);
                Transform::table(f).unwrap()
            } else {
                random_permutation(rng, size)
            };
            Generator::new(t, format!("p{i}"))
        })
        .collect();
    GeneratorSet::table("random", gens).unwrap()
}

pub fn random_partition(rng: &mut StdRng, w: &HypercubeWindow, max_cells: u32) -> Partition {
    let raw: Vec<u32> = (0..w.len()).map(|_| rng.gen_range(0..max_cells)).collect();
    Partition::from_labels(w, &raw).unwrap()
}

/// Orbit partition of `window` under `transforms` and their inverses,
/// walking only inside `window` grown by `bound`, by label relaxation.
pub fn relaxation_orbits(transforms: &[&Transform], window: &HypercubeWindow, bound: usize) -> Partition {
    let region = window.expand(bound).unwrap();
    let points: Vec<Vec<i64>> = region.points().map(|p| p.0).collect();
    let index: HashMap<&[i64], usize> = points.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let mut edges = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for t in transforms {
            let y = t.apply(&Point::new(p.clone())).unwrap();
            if let Some(&j) = index.get(y.0.as_slice()) {
                edges.push((i, j));
            }
        }
    }
    let mut label: Vec<usize> = (0..points.len()).collect();
    loop {
        let mut changed = false;
        for &(a, b) in &edges {
            let m = label[a].min(label[b]);
            if label[a] != m || label[b] != m {
                label[a] = m;
                label[b] = m;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let raw: Vec<u64> =
        window.points().map(|p| label[index[p.0.as_slice()]] as u64).collect();
    Partition::from_labels(window, &raw).unwrap()
}

/// Whether every pair together in `fine` is together in `coarse`.
pub fn pairwise_refines(fine: &Partition, coarse: &Partition) -> bool {
    let n = fine.len();
    (0..n).all(|a| (a + 1..n).all(|b| !fine.same_cell(a, b) || coarse.same_cell(a, b)))
}

pub fn pairwise_relation(p: &Partition, q: &Partition) -> Relation {
    match (pairwise_refines(p, q), pairwise_refines(q, p)) {
        (true, true) => Relation::Equal,
        (true, false) => Relation::Finer,
        (false, true) => Relation::Coarser,
        (false, false) => Relation::Incomparable,
    }
}

/// Finest common coarsening by label relaxation over both partitions.
pub fn relaxation_meet(p: &Partition, q: &Partition) -> Partition {
    let n = p.len();
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for a in 0..n {
            for b in a + 1..n {
                if (p.same_cell(a, b) || q.same_cell(a, b)) && label[a] != label[b] {
                    let m = label[a].min(label[b]);
                    label[a] = m;
                    label[b] = m;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let raw: Vec<u64> = label.iter().map(|&l| l as u64).collect();
    Partition::from_labels(p.window(), &raw).unwrap()
}

/// Cover relation of a strict order given as a boolean matrix, by the
/// cubic "no element in between" test.
pub fn cubic_hasse(less: &[Vec<bool>]) -> BTreeSet<(usize, usize)> {
    let n = less.len();
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            if less[a][b] && !(0..n).any(|c| less[a][c] && less[c][b]) {
                out.insert((a, b));
            }
        }
    }
    out
}

/// Group generated by `gens` under matrix multiplication.
pub fn matrix_closure(n: usize, gens: &[&IntMatrix]) -> BTreeSet<IntMatrix> {
    let mut out: BTreeSet<IntMatrix> = BTreeSet::new();
    out.insert(IntMatrix::identity(n));
    let mut frontier: Vec<IntMatrix> = vec![IntMatrix::identity(n)];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = x.mul(g);
            if out.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    out
}
