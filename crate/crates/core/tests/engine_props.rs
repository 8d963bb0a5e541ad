mod common;

use proptest::prelude::*;
use rand::Rng;
use symab::affine_id::enumerate_on_z;
use symab::engine::*;
use symab::*;

use common::*;

fn centered_case(seed: u64) -> (GeneratorSet, HypercubeWindow) {
    let mut g = rng(seed);
    loop {
        let n = g.gen_range(1..=3);
        let w = HypercubeWindow::centered(n, g.gen_range(0..=2)).unwrap();
        let gens: Vec<Generator> = (0..g.gen_range(1..=3))
            .map(|i| {
                let kind = g.gen_range(0..3);
                Generator::new(random_transform(&mut g, n, kind), format!("g{i}"))
            })
            .collect();
        if let Ok(set) = GeneratorSet::affine("c", n, gens) {
            return (set, w);
        }
    }
}

fn table_case(seed: u64) -> (GeneratorSet, HypercubeWindow) {
    let mut g = rng(seed);
    let size = g.gen_range(2..=9);
    let count = g.gen_range(1..=4);
    (random_table_set(&mut g, size, count), HypercubeWindow::finite_set(size).unwrap())
}

fn fixed(k: usize) -> ExpansionPolicy {
    ExpansionPolicy { fixed_k: Some(k), ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tracing_applies_each_point_once(seed in any::<u64>()) {
        let (set, w) = centered_case(seed);
        let s = &set.get(0).transform;
        let order: Vec<usize> = (0..w.len()).collect();
        let trace = base_partition_traced(s, &w, &order).unwrap();
        prop_assert_eq!(trace.applications, w.len());
        prop_assert!(trace.iterations <= w.len());
        let single = GeneratorSet::affine("s", w.dim(), vec![set.get(0).clone()]).unwrap();
        prop_assert_eq!(&trace.partition, &orbit_partition_oracle(&single, 1, &w, 0).unwrap());
        prop_assert_eq!(&trace.partition, &relaxation_orbits(&[s], &w, 0));
    }

    #[test]
    fn fixed_level_equals_region_orbits(seed in any::<u64>(), k in 0usize..=3) {
        let (set, w) = centered_case(seed);
        let family = induction_family(&set, &w, &fixed(k), &Schedule::All).unwrap();
        for (&m, e) in family.entries() {
            prop_assert_eq!(&e.partition, &orbit_partition_oracle(&set, m, &w, k).unwrap(), "mask {}", m);
        }
    }

    #[test]
    fn strong_duality_on_tables(seed in any::<u64>()) {
        let (set, w) = table_case(seed);
        let family = induction_family(&set, &w, &ExpansionPolicy::default(), &Schedule::All).unwrap();
        for (&a, ea) in family.entries() {
            prop_assert_eq!(&ea.partition, &orbit_partition_oracle(&set, a, &w, 0).unwrap());
            for (&b, eb) in family.entries() {
                prop_assert_eq!(&ea.partition.meet(&eb.partition).unwrap(), family.partition(a | b).unwrap());
            }
        }
    }

    #[test]
    fn nested_subsets_reverse_order(seed in any::<u64>(), table in any::<bool>()) {
        let (set, w) = if table { table_case(seed) } else { centered_case(seed) };
        let family = induction_family(&set, &w, &fixed(2), &Schedule::All).unwrap();
        for (&a, ea) in family.entries() {
            for (&b, eb) in family.entries() {
                if a & b == a {
                    let r = eb.partition.relate(&ea.partition).unwrap();
                    prop_assert!(matches!(r, Relation::Coarser | Relation::Equal), "{} vs {}: {}", b, a, r);
                }
            }
        }
    }

    #[test]
    fn entries_do_not_depend_on_the_schedule(seed in any::<u64>(), table in any::<bool>()) {
        let (set, w) = if table { table_case(seed) } else { centered_case(seed) };
        let policy = ExpansionPolicy::new(2, 6);
        let full = induction_family(&set, &w, &policy, &Schedule::All).unwrap();
        for (&m, e) in full.entries() {
            let alone = expand_and_restrict(&set, m, &w, &policy).unwrap();
            prop_assert_eq!(&alone.partition, &e.partition);
            prop_assert_eq!(alone.k, e.k);
            prop_assert_eq!(alone.approximate, e.approximate);
        }
    }

    #[test]
    fn consensus_entries_are_never_coarser_than_orbits(seed in any::<u64>()) {
        let (set, w) = centered_case(seed);
        let family = induction_family(&set, &w, &ExpansionPolicy::new(2, 6), &Schedule::All).unwrap();
        for (&m, e) in family.entries() {
            let truth = orbit_partition_oracle(&set, m, &w, 16).unwrap();
            prop_assert!(pairwise_refines(&e.partition, &truth), "mask {}", m);
        }
    }

    #[test]
    fn conjugation_moves_partitions(seed in any::<u64>(), k in 0usize..=3) {
        let (set, w) = centered_case(seed);
        let n = w.dim();
        let group = enumerate_on_z(n).unwrap();
        let a = group.elements()[(seed as usize) % group.order()].clone();
        let g = Transform::Affine(AffineTransform::new(a, vec![0; n]).unwrap());
        let family = induction_family(&set, &w, &fixed(k), &Schedule::All).unwrap();
        let conj: Vec<Generator> = set
            .generators()
            .iter()
            .map(|h| Generator::new(h.transform.conjugate_by(&g).unwrap(), h.label.clone()))
            .collect();
        let conj = GeneratorSet::affine("conj", n, conj).unwrap();
        if conj.len() == set.len() {
            let moved = induction_family(&conj, &w, &fixed(k), &Schedule::All).unwrap();
            for (&m, e) in family.entries() {
                prop_assert_eq!(&e.partition.act_on(&g).unwrap(), moved.partition(m).unwrap());
            }
        }
    }

    #[test]
    fn witnesses_reach_every_partition(seed in any::<u64>()) {
        let mut g = rng(seed);
        let size = g.gen_range(1..=8);
        let w = HypercubeWindow::finite_set(size).unwrap();
        let target = random_partition(&mut g, &w, 4);
        let set = surjectivity_witness(&target).unwrap();
        if set.is_empty() {
            prop_assert!(target.is_finest());
        } else {
            prop_assert_eq!(orbit_partition_oracle(&set, set.full_mask(), &w, 0).unwrap(), target);
        }
    }
}

#[test]
fn distinct_groups_can_share_a_partition() {
    let w = HypercubeWindow::finite_set(4).unwrap();
    let a = Transform::Table(TableTransform::from_cycles(4, &[&[0, 1, 2, 3]]).unwrap());
    let b = Transform::Table(TableTransform::from_cycles(4, &[&[0, 2, 1, 3]]).unwrap());
    assert_ne!(a, b);
    assert_eq!(base_partition(&a, &w).unwrap(), base_partition(&b, &w).unwrap());
}

#[test]
fn pruned_count_matches_enumeration() {
    for (n, tau) in [(1, 1), (1, 5), (2, 2), (2, 3), (3, 1), (3, 2)] {
        let set = standard_generators(n, tau).unwrap();
        let listed = pruned_subsets(&set).unwrap();
        let mut dedup = listed.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), listed.len());
        if n > 1 {
            assert_eq!(listed.len() as u64, pruned_subset_count(n as u32, tau).unwrap(), "n={n} tau={tau}");
        }
    }
}

#[test]
fn family_directory_round_trip() {
    let (set, w) = centered_case(5);
    let family = induction_family(&set, &w, &ExpansionPolicy::default(), &Schedule::All).unwrap();
    let dir = tempfile::tempdir().unwrap();
    family.write_dir(dir.path()).unwrap();
    let back = AbstractionFamily::read_dir(dir.path()).unwrap();
    assert_eq!(back.len(), family.len());
    for (m, e) in family.entries() {
        let b = back.get(*m).unwrap();
        assert_eq!((&b.partition, b.k, b.approximate), (&e.partition, e.k, e.approximate));
    }
}
