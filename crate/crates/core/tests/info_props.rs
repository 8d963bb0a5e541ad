mod common;

use proptest::prelude::*;
use rand::Rng;
use symab::infolattice::*;
use symab::*;

use common::*;

struct Case {
    w: HypercubeWindow,
    m: Measure,
    p: Partition,
    q: Partition,
}

fn case(seed: u64, positive: bool) -> Case {
    let mut g = rng(seed);
    let w = HypercubeWindow::finite_set(g.gen_range(1..=12)).unwrap();
    let counts: Vec<f64> = (0..w.len())
        .map(|_| if positive { g.gen_range(1..=9) as f64 } else { g.gen_range(0..=4) as f64 })
        .collect();
    let counts = if counts.iter().all(|&c| c == 0.0) { vec![1.0; w.len()] } else { counts };
    let m = Measure::from_counts(&w, &counts).unwrap();
    let p = random_partition(&mut g, &w, 5);
    let q = random_partition(&mut g, &w, 5);
    Case { w, m, p, q }
}

fn marginal(m: &Measure, p: &Partition) -> Vec<f64> {
    let mut out = vec![0.0; p.cell_count()];
    for (i, &w) in m.weights().iter().enumerate() {
        out[p.labels()[i] as usize] += w;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projections_are_distributions(seed in any::<u64>()) {
        let c = case(seed, false);
        let d = project(&c.m, &c.p).unwrap();
        prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(d.clone(), marginal(&c.m, &c.p));
        let h = entropy(&d);
        prop_assert!(h >= 0.0 && h <= (c.p.cell_count() as f64).log2() + 1e-12);
    }

    #[test]
    fn coarsening_loses_information(seed in any::<u64>()) {
        let c = case(seed, false);
        let coarse = c.p.meet(&c.q).unwrap();
        let fine = c.p.join(&c.q).unwrap();
        let h = |p: &Partition| entropy(&project(&c.m, p).unwrap());
        prop_assert!(h(&coarse) <= h(&c.p) + 1e-12);
        prop_assert!(h(&c.p) <= h(&fine) + 1e-12);
        prop_assert!(conditional_entropy(&coarse, &c.p, &c.m).unwrap().abs() < 1e-12);
        prop_assert!(info_leq(&coarse, &c.p, &c.m).unwrap());
        prop_assert!(conditional_entropy(&c.q, &c.p, &c.m).unwrap() >= 0.0);
        // H(Y|X) = H(X v Y) - H(X)
        let chain = h(&fine) - h(&c.p);
        prop_assert!((conditional_entropy(&c.q, &c.p, &c.m).unwrap() - chain.max(0.0)).abs() < 1e-9);
        if info_leq(&c.q, &c.p, &c.m).unwrap() {
            prop_assert!(conditional_entropy(&c.q, &c.p, &c.m).unwrap() < 1e-9);
        }
    }

    #[test]
    fn information_distance_is_a_pseudometric(seed in any::<u64>()) {
        let c = case(seed, false);
        let e = |p: &Partition| InfoElement::new(p.clone(), &c.m).unwrap();
        let r = c.p.meet(&c.q).unwrap();
        let (a, b, d) = (e(&c.p), e(&c.q), e(&r));
        let dist = |x: &InfoElement, y: &InfoElement| information_distance(x, y, &c.m).unwrap();
        prop_assert!(dist(&a, &a).abs() < 1e-12);
        prop_assert!((dist(&a, &b) - dist(&b, &a)).abs() < 1e-12);
        prop_assert!(dist(&a, &b) <= dist(&a, &d) + dist(&d, &b) + 1e-9);
    }

    #[test]
    fn divergence_is_non_negative(seed in any::<u64>()) {
        let c = case(seed, false);
        let u = Measure::uniform(&c.w);
        prop_assert!(kl_divergence(c.m.weights(), u.weights()) >= 0.0);
        prop_assert!(kl_divergence(c.m.weights(), c.m.weights()).abs() < 1e-12);
        let pm = project(&c.m, &c.p).unwrap();
        let pu = project(&u, &c.p).unwrap();
        // projection never increases divergence
        prop_assert!(kl_divergence(&pm, &pu) <= kl_divergence(c.m.weights(), u.weights()) + 1e-12);
    }

    #[test]
    fn fitted_student_matches_every_rule(seed in any::<u64>()) {
        let c = case(seed, true);
        let rules = vec![Rule::from_measure(&c.p, &c.m).unwrap(), Rule::from_measure(&c.q, &c.m).unwrap()];
        let s = student_update(&rules, &c.w).unwrap();
        for r in &rules {
            for (a, b) in marginal(&s, &r.partition).iter().zip(&r.target) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
        prop_assert!(s.entropy() >= c.m.entropy() - 1e-9);
        let one = student_update(&rules[..1], &c.w).unwrap();
        prop_assert!(one.entropy() >= s.entropy() - 1e-9);
    }

    #[test]
    fn teacher_picks_the_widest_gap(seed in any::<u64>()) {
        let c = case(seed, true);
        let student = Measure::uniform(&c.w);
        let family = vec![c.p.clone(), c.q.clone()];
        let pick = teacher_pick(&c.m, &student, &family).unwrap();
        let gaps: Vec<f64> = family
            .iter()
            .map(|p| kl_divergence(&project(&c.m, p).unwrap(), &project(&student, p).unwrap()))
            .collect();
        let best = gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((gaps[pick.index] - best).abs() < 1e-12);
    }
}
