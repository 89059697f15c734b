use super::*;
use crate::engine::{
    expected_welfare_for_order, run_online, run_welfare, ArrivalOrder, Mode, TraceOptions,
};
use crate::game::{agents, SymmetricFhg};
use crate::rational::ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn r(n: i64) -> Rational {
    Rational::from(n)
}

fn ids(v: &[u32]) -> Vec<AgentId> {
    v.iter().map(|&a| AgentId(a)).collect()
}

fn run(g: &SymmetricFhg, order: &[u32], p: &dyn OnlinePolicy, mode: Mode) -> crate::game::Partition {
    let o = ArrivalOrder::new(ids(order), g.n()).unwrap();
    run_online(g, &o, p, mode, 0, TraceOptions::full()).unwrap().0
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> SymmetricFhg {
    SymmetricFhg::from_fn(n, |_, _| ratio(rng.gen_range(-8..=8), rng.gen_range(1..=3)))
}

#[test]
fn greedy_examples() {
    let pair = SymmetricFhg::from_weights(2, [(0, 1, r(5))]).unwrap();
    assert_eq!(run(&pair, &[0, 1], &Greedy, Mode::Strict).encoding(), vec![vec![0, 1]]);
    let path = SymmetricFhg::from_weights(3, [(0, 1, r(1)), (1, 2, r(10))]).unwrap();
    let p = run(&path, &[0, 1, 2], &Greedy, Mode::Strict);
    assert_eq!(p.encoding(), vec![vec![0, 1], vec![2]]);
    let neg = SymmetricFhg::from_fn(4, |_, _| r(-1));
    assert_eq!(run(&neg, &[3, 1, 0, 2], &Greedy, Mode::Strict).max_coalition_size(), 1);
}

#[test]
fn greedy_is_maximal() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let n = rng.gen_range(2..=8);
        let g = random_instance(&mut rng, n);
        let mut order = agents(n);
        order.shuffle(&mut rng);
        let o = ArrivalOrder::new(order, n).unwrap();
        let (p, _) = run_online(&g, &o, &Greedy, Mode::Strict, 0, TraceOptions::default()).unwrap();
        let singles: Vec<_> = p.coalitions().iter().filter(|c| c.len() == 1).map(|c| c.min()).collect();
        for (x, &a) in singles.iter().enumerate() {
            for &b in &singles[x + 1..] {
                assert!(!g.w(a.index(), b.index()).is_positive());
            }
        }
        assert!(p.is_matching());
    }
}

#[test]
fn threshold_examples() {
    let weak = SymmetricFhg::from_weights(3, [(0, 1, r(1)), (1, 2, r(2))]).unwrap();
    assert_eq!(run(&weak, &[0, 1, 2], &DissolveThreshold, Mode::Dissolution).encoding(), vec![vec![0, 1], vec![2]]);
    let strong = SymmetricFhg::from_weights(3, [(0, 1, r(1)), (1, 2, r(3))]).unwrap();
    let o = ArrivalOrder::identity(3);
    let (p, events) = run_online(&strong, &o, &DissolveThreshold, Mode::Dissolution, 0, TraceOptions::full()).unwrap();
    assert_eq!(p.encoding(), vec![vec![0], vec![1, 2]]);
    assert_eq!(events[2].welfare, r(3));
    assert_eq!(events[2].decision.dissolved, Some(ids(&[0, 1])));
    // strict mode never dissolves
    assert_eq!(run(&strong, &[0, 1, 2], &DissolveThreshold, Mode::Strict).encoding(), vec![vec![0, 1], vec![2]]);
    let neg = SymmetricFhg::from_weights(3, [(0, 1, r(1)), (0, 2, r(-1)), (1, 2, r(-4))]).unwrap();
    assert_eq!(run(&neg, &[0, 1, 2], &DissolveThreshold, Mode::Dissolution).encoding(), vec![vec![0, 1], vec![2]]);
}

#[test]
fn threshold_comparison_is_exact() {
    // (1+√2)·1 ≈ 2.41421356
    assert!(!exceeds_threshold(&ratio(241421356, 100000000), &r(1)));
    assert!(exceeds_threshold(&ratio(241421357, 100000000), &r(1)));
    assert!(!exceeds_threshold(&r(2), &r(1)));
    assert!(exceeds_threshold(&r(3), &r(1)));
    assert!(exceeds_threshold(&r(1), &r(0)));
    assert!(exceeds_threshold(&r(1), &r(-5)));
}

#[test]
fn threshold_never_lowers_its_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let n = rng.gen_range(2..=9);
        let g = random_instance(&mut rng, n);
        let mut order = agents(n);
        order.shuffle(&mut rng);
        let o = ArrivalOrder::new(order, n).unwrap();
        let (p, events) = run_online(&g, &o, &DissolveThreshold, Mode::Dissolution, 0, TraceOptions::full()).unwrap();
        assert!(p.is_matching());
        for w in events.windows(2) {
            assert!(w[1].welfare >= w[0].welfare);
        }
    }
}

/// star with center 0 and leaves 1..=4 at weights 2, 4, 8, 16
fn star4() -> SymmetricFhg {
    SymmetricFhg::from_fn(5, |i, j| if i == 0 { r(1 << j) } else { r(-64) })
}

#[test]
fn efgt_examples() {
    let tiny = SymmetricFhg::from_weights(3, [(0, 1, r(2)), (1, 2, r(2))]).unwrap();
    for order in [[0, 1, 2], [2, 1, 0]] {
        assert_eq!(run(&tiny, &order, &Efgt::new(3), Mode::Strict).max_coalition_size(), 1);
    }
    let g = star4();
    // the revealed maximum weight matching at d4's arrival pairs a with d4
    let (pairs, _) = max_weight_matching_on(&g, &ids(&[0, 1, 2, 3, 4]), 20).unwrap();
    assert!(pairs.contains(&(AgentId(0), AgentId(4))));
    // but d3 (arrival 4 > k) has already taken a, so d4 stays single
    assert_eq!(run(&g, &[0, 1, 2, 3, 4], &Efgt::new(3), Mode::Strict).encoding(), vec![vec![0, 3], vec![1], vec![2], vec![4]]);
    assert_eq!(run(&g, &[0, 1, 2, 3, 4], &Efgt::new(4), Mode::Strict).encoding(), vec![vec![0, 4], vec![1], vec![2], vec![3]]);
    assert_eq!(run(&g, &[1, 2, 3, 0, 4], &Efgt::new(3), Mode::Strict).encoding(), vec![vec![0, 3], vec![1], vec![2], vec![4]]);
}

#[test]
fn efgt_is_passive_during_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let n = rng.gen_range(1..=8);
        let g = random_instance(&mut rng, n);
        let mut order = agents(n);
        order.shuffle(&mut rng);
        let o = ArrivalOrder::new(order, n).unwrap();
        let (_, events) = run_online(&g, &o, &Efgt::new(3), Mode::Strict, 0, TraceOptions::full()).unwrap();
        for e in events.iter().take(3) {
            assert_eq!(e.decision.join, None);
        }
        for e in &events {
            if let Some(u) = e.decision.join {
                // the pair is an edge of that step's maximum weight matching
                let revealed: Vec<_> = events[..e.t].iter().map(|x| x.agent).collect();
                let (pairs, _) = max_weight_matching_on(&g, &revealed, 20).unwrap();
                assert!(pairs.contains(&(u, e.agent)) || pairs.contains(&(e.agent, u)));
            }
        }
    }
}

#[test]
fn lift_is_transparent_for_matchings() {
    let g = SymmetricFhg::from_weights(3, [(0, 1, r(1)), (1, 2, r(3))]).unwrap();
    let lifted = Lift::new(Box::new(DissolveThreshold));
    assert_eq!(lifted.id(), "lift:dissolve-threshold");
    let o = ArrivalOrder::identity(3);
    let a = run_online(&g, &o, &DissolveThreshold, Mode::Dissolution, 0, TraceOptions::full()).unwrap();
    let b = run_online(&g, &o, &lifted, Mode::Dissolution, 0, TraceOptions::full()).unwrap();
    assert_eq!(a, b);
    let pair = SymmetricFhg::from_weights(2, [(0, 1, r(5))]).unwrap();
    assert_eq!(run(&pair, &[1, 0], &Lift::new(Box::new(Greedy)), Mode::Strict).encoding(), vec![vec![0, 1]]);
}

#[test]
fn lift_rejects_coalitions() {
    let g = SymmetricFhg::from_weights(3, [(0, 1, r(1)), (1, 2, r(3))]).unwrap();
    let lifted = Lift::new(Box::new(Attach));
    let err = run_welfare(&g, &agents(3), &lifted, Mode::Strict, 0).unwrap_err();
    assert!(matches!(err, FhgError::NotMatchingValued(_)));
}

#[test]
fn restrict_filters_triples_and_copies_pairs() {
    let g = SymmetricFhg::from_weights(3, [(0, 1, r(1)), (1, 2, r(3)), (0, 2, r(-10))]).unwrap();
    // attach forms {0,1,2}; the wrapper keeps {0,1} and leaves 2 alone
    assert_eq!(run(&g, &[0, 1, 2], &Attach, Mode::Strict).encoding(), vec![vec![0, 1, 2]]);
    let wrapped = Restrict::new(Box::new(Attach));
    assert_eq!(wrapped.id(), "restrict:attach");
    assert_eq!(run(&g, &[0, 1, 2], &wrapped, Mode::Strict).encoding(), vec![vec![0, 1], vec![2]]);
    let pair = SymmetricFhg::from_weights(2, [(0, 1, r(5))]).unwrap();
    assert_eq!(run(&pair, &[0, 1], &wrapped, Mode::Strict).encoding(), vec![vec![0, 1]]);
}

#[test]
fn restrict_mirrors_dissolutions() {
    // attach in dissolve mode breaks up the negative triple when 3 arrives
    let g = SymmetricFhg::from_weights(
        4,
        [(0, 1, r(1)), (1, 2, r(3)), (0, 2, r(-10)), (2, 3, r(2)), (0, 3, r(-10)), (1, 3, r(-10))],
    )
    .unwrap();
    let inner = run(&g, &[0, 1, 2, 3], &Attach, Mode::Dissolution);
    assert_eq!(inner.encoding(), vec![vec![0], vec![1], vec![2, 3]]);
    let outer = run(&g, &[0, 1, 2, 3], &Restrict::new(Box::new(Attach)), Mode::Dissolution);
    assert_eq!(outer.encoding(), vec![vec![0], vec![1], vec![2, 3]]);
}

#[test]
fn restrict_emits_matchings_and_dominates_on_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let n = rng.gen_range(2..=6);
        // random forest, heavy negatives elsewhere
        let mut parent = vec![None; n];
        for (v, p) in parent.iter_mut().enumerate().skip(1) {
            if rng.gen_bool(0.8) {
                *p = Some((rng.gen_range(0..v), r(rng.gen_range(1..6))));
            }
        }
        let g = SymmetricFhg::from_fn(n, |i, j| match &parent[j] {
            Some((p, w)) if *p == i => w.clone(),
            _ => r(-100),
        });
        assert!(crate::game::is_tree_domain(&g));
        let wrapped = Restrict::new(Box::new(Attach));
        for mode in [Mode::Strict, Mode::Dissolution] {
            let mut order = agents(n);
            order.shuffle(&mut rng);
            let o = ArrivalOrder::new(order.clone(), n).unwrap();
            let (p, _) = run_online(&g, &o, &wrapped, mode, 0, TraceOptions::full()).unwrap();
            assert!(p.is_matching());
            let inner = expected_welfare_for_order(&g, &Attach, mode, &order).unwrap();
            let outer = expected_welfare_for_order(&g, &wrapped, mode, &order).unwrap();
            assert!(outer >= inner);
        }
    }
}

fn star_online(name: &str) -> StarOnline {
    star_policy_as_online(StarPolicy::from_name(name).unwrap(), ratio(1, 2), 5).unwrap()
}

#[test]
fn star_policy_matches_max_edge() {
    // a = 0, leaves 1 (w 2) and 2 (w 4), negatives -32
    let g = SymmetricFhg::from_fn(3, |i, _| if i == 0 { r(0) } else { r(-32) });
    let g = SymmetricFhg::from_fn(3, |i, j| match (i, j) {
        (0, 1) => r(2),
        (0, 2) => r(4),
        _ => g.w(i, j),
    });
    let one = star_online("one");
    assert_eq!(run(&g, &[0, 1, 2], &one, Mode::Strict).encoding(), vec![vec![0, 1], vec![2]]);
    assert_eq!(run(&g, &[0, 2, 1], &one, Mode::Strict).encoding(), vec![vec![0, 2], vec![1]]);
    assert_eq!(run(&g, &[1, 2, 0], &one, Mode::Strict).encoding(), vec![vec![0, 2], vec![1]]);
    let zero = star_online("zero");
    assert_eq!(run(&g, &[0, 1, 2], &zero, Mode::Strict).max_coalition_size(), 1);
}

#[test]
fn star_policy_rejects_other_shapes() {
    let g = SymmetricFhg::from_weights(2, [(0, 1, r(3))]).unwrap();
    let err = run_welfare(&g, &agents(2), &star_online("one"), Mode::Strict, 0).unwrap_err();
    assert!(matches!(err, FhgError::NotAStarShapedInstance(_)));
    let zero_gap = SymmetricFhg::from_weights(2, []).unwrap();
    assert!(run_welfare(&zero_gap, &agents(2), &star_online("one"), Mode::Strict, 0).is_err());
    assert!(star_policy_as_online(StarPolicy::from_name("one").unwrap(), ratio(3, 4), 5).is_err());
    assert!(StarPolicy::from_name("nonsense").is_err());
    assert!(StarPolicy::from_name("3/2").is_err());
    assert_eq!(StarPolicy::from_name("1/3").unwrap().eval(&[1], 5).unwrap(), ratio(1, 3));
}

#[test]
fn registry_ids() {
    let ctx = RegistryContext { star: Some((ratio(1, 2), 5)), ..Default::default() };
    for id in ["greedy", "dissolve-threshold", "efgt:k=3", "lift:greedy", "restrict:attach", "star:f=half", "lift:restrict:efgt:k=2"] {
        assert_eq!(policy_from_id(id, &ctx).unwrap().id(), id);
    }
    assert!(matches!(policy_from_id("nope", &ctx), Err(FhgError::UnknownAlgorithm(_))));
    assert!(policy_from_id("efgt:k=x", &ctx).is_err());
    assert!(policy_from_id("star:f=one", &RegistryContext::default()).is_err());
}

#[test]
fn decisions_survive_relabelling() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ctx = RegistryContext::default();
    for id in ["greedy", "dissolve-threshold", "efgt:k=2", "restrict:attach", "attach"] {
        let p = policy_from_id(id, &ctx).unwrap();
        for _ in 0..10 {
            let n = rng.gen_range(2..=7);
            let g = random_instance(&mut rng, n);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let h = g.relabel(&perm);
            let mut order = agents(n);
            order.shuffle(&mut rng);
            let order_h: Vec<AgentId> = order.iter().map(|a| AgentId::from(perm[a.index()])).collect();
            for mode in [Mode::Strict, Mode::Dissolution] {
                let wg = run_welfare(&g, &order, p.as_ref(), mode, 0).unwrap();
                let wh = run_welfare(&h, &order_h, p.as_ref(), mode, 0).unwrap();
                assert_eq!(wg, wh, "{id}");
            }
        }
    }
}
