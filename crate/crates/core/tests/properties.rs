use fhg_core::adversaries::{
    gen_random_tree_domain, star_match_probabilities, StarSpec, WeightRange,
};
use fhg_core::algorithms::{Attach, DissolveThreshold, Efgt, Greedy, Lift, Restrict, StarPolicy};
use fhg_core::engine::{
    expected_welfare_exact, expected_welfare_per_order, run_online, ArrivalOrder, Mode, OnlinePolicy, TraceOptions,
};
use fhg_core::game::{enumerate_partitions, is_tree_domain, partition_welfare, AgentId};
use fhg_core::oracles::{max_weight_matching, optimal_partition};
use fhg_core::rational::ratio;
use fhg_core::{Rational, SymmetricFhg};
use proptest::prelude::*;

fn weight() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

fn instance(max_n: usize) -> impl Strategy<Value = SymmetricFhg> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(weight(), n * (n - 1) / 2).prop_map(move |ws| {
            let mut it = ws.into_iter();
            let mut pairs = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    pairs.push((i, j, it.next().unwrap()));
                }
            }
            SymmetricFhg::from_weights(n, pairs).unwrap()
        })
    })
}

fn order(n: usize) -> impl Strategy<Value = Vec<AgentId>> {
    Just((0..n).map(AgentId::from).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matching_is_half_the_optimum(g in instance(6)) {
        let (_, mwm) = max_weight_matching(&g).unwrap();
        let (p, opt) = optimal_partition(&g).unwrap();
        prop_assert!(&mwm * &Rational::from(2) >= opt);
        prop_assert!(mwm <= opt);
        prop_assert_eq!(partition_welfare(&g, &p).unwrap(), opt);
    }

    #[test]
    fn optimum_beats_every_partition(g in instance(5)) {
        let (_, opt) = optimal_partition(&g).unwrap();
        let all: Vec<AgentId> = (0..g.n()).map(AgentId::from).collect();
        for p in enumerate_partitions(&all) {
            prop_assert!(partition_welfare(&g, &p).unwrap() <= opt);
        }
    }

    #[test]
    fn traces_replay((g, o) in instance(7).prop_flat_map(|g| { let n = g.n(); (Just(g), order(n)) })) {
        let policies: Vec<(Box<dyn OnlinePolicy>, Mode)> = vec![
            (Box::new(Greedy), Mode::Strict),
            (Box::new(Efgt::new(2)), Mode::Strict),
            (Box::new(Attach), Mode::Strict),
            (Box::new(Lift::new(Box::new(DissolveThreshold))), Mode::Dissolution),
        ];
        let o = ArrivalOrder::new(o, g.n()).unwrap();
        for (p, mode) in policies {
            let (part, events) = run_online(&g, &o, p.as_ref(), mode, 1, TraceOptions::full()).unwrap();
            let last = events.last().map(|e| e.welfare.clone()).unwrap_or_else(Rational::zero);
            prop_assert_eq!(partition_welfare(&g, &part).unwrap(), last);
        }
    }

    #[test]
    fn threshold_matching_never_loses_weight((g, o) in instance(7).prop_flat_map(|g| { let n = g.n(); (Just(g), order(n)) })) {
        let o = ArrivalOrder::new(o, g.n()).unwrap();
        let (_, events) = run_online(&g, &o, &DissolveThreshold, Mode::Dissolution, 0, TraceOptions::full()).unwrap();
        for w in events.windows(2) {
            prop_assert!(w[1].welfare >= w[0].welfare);
        }
    }

    #[test]
    fn exact_expectation_is_the_order_average(g in instance(5)) {
        let per = expected_welfare_per_order(&g, &Greedy, Mode::Strict, 8).unwrap();
        let sum: Rational = per.values().cloned().sum();
        let avg = sum / Rational::from(per.len());
        prop_assert_eq!(avg, expected_welfare_exact(&g, &Greedy, Mode::Strict).unwrap());
    }

    #[test]
    fn restricting_helps_on_trees(n in 2usize..=6, seed in any::<u64>()) {
        let range = WeightRange::new(Rational::one(), Rational::from(6), 3).unwrap();
        let g = gen_random_tree_domain(n, seed, &range).unwrap();
        prop_assert!(is_tree_domain(&g));
        let base = expected_welfare_per_order(&g, &Attach, Mode::Strict, 8).unwrap();
        let wrapped = expected_welfare_per_order(&g, &Restrict::new(Box::new(Attach)), Mode::Strict, 8).unwrap();
        for (o, w) in &base {
            prop_assert!(&wrapped[o] >= w);
        }
    }

    #[test]
    fn recursion_agrees_for_constant_policies(
        i in prop::collection::btree_set(1u32..=9, 1..=5),
        p in 0i64..=6,
    ) {
        let f = StarPolicy::constant(ratio(p, 6));
        let spec = StarSpec::with_min_x(i.into_iter().collect(), vec![], ratio(1, 3)).unwrap();
        let (h, r) = star_match_probabilities(&f, &spec).unwrap();
        prop_assert!(h >= r);
        prop_assert!(h <= Rational::one() && !r.is_negative());
    }
}
