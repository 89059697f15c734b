//! End-to-end paths through the public API: generate, serialize, measure.

use fhg_core::adversaries::{
    gen_bistar, gen_random, run_dissolution_adversary, AdversaryBudget, AdversaryBundle, AdversaryGraph,
    AdversaryOutcome, StarSpec, WeightRange,
};
use fhg_core::algorithms::{policy_from_id, DissolveThreshold, Greedy, RegistryContext};
use fhg_core::config::Caps;
use fhg_core::engine::{
    competitive_ratio, expected_welfare_mc, read_trace_jsonl, run_online, verify_trace, write_trace_jsonl, Arrival,
    ArrivalOrder, Mode, TraceOptions, WelfareValue,
};
use fhg_core::io::{parse_instance, symmetric_to_json};
use fhg_core::rational::ratio;
use fhg_core::Rational;

#[test]
fn instance_round_trip_and_measure() {
    let range = WeightRange::parse("-10:10:4").unwrap();
    let g = gen_random(6, 11, &range);
    let back = parse_instance(&symmetric_to_json(&g)).unwrap().into_symmetric();
    assert_eq!(back.nonzero_pairs(), g.nonzero_pairs());

    let caps = Caps::default();
    let exact = competitive_ratio(&g, &Greedy, Mode::Strict, &Arrival::RandomExact, &caps, 1, "g").unwrap();
    let worst = competitive_ratio(&g, &Greedy, Mode::Strict, &Arrival::Worst, &caps, 1, "g").unwrap();
    let (WelfareValue::Exact(e), WelfareValue::Exact(w)) = (&exact.welfare, &worst.welfare) else {
        panic!("exact values expected")
    };
    assert!(w <= e);
    let order = worst.worst_order.clone().unwrap();
    let replay = competitive_ratio(&g, &Greedy, Mode::Strict, &Arrival::Order(ArrivalOrder::new(order, 6).unwrap()), &caps, 1, "g")
        .unwrap();
    assert_eq!(replay.welfare, worst.welfare);
}

#[test]
fn mc_is_reproducible() {
    let g = gen_random(6, 3, &WeightRange::parse("-5:5:2").unwrap());
    let a = expected_welfare_mc(&g, &Greedy, Mode::Strict, 500, 42).unwrap();
    let b = expected_welfare_mc(&g, &Greedy, Mode::Strict, 500, 42).unwrap();
    assert_eq!(a, b);
    let c = expected_welfare_mc(&g, &Greedy, Mode::Strict, 500, 43).unwrap();
    assert_ne!(a.mean, c.mean);
}

#[test]
fn trace_files_verify() {
    let spec = StarSpec::with_min_x(vec![1, 3], vec![2], ratio(1, 2)).unwrap();
    let g = gen_bistar(&spec).unwrap();
    let order = ArrivalOrder::parse("2,0,3,1,4", 5).unwrap();
    let (_, events) = run_online(&g, &order, &DissolveThreshold, Mode::Dissolution, 0, TraceOptions::full()).unwrap();
    let mut buf = Vec::new();
    write_trace_jsonl(&mut buf, &events).unwrap();
    let read = read_trace_jsonl(buf.as_slice()).unwrap();
    assert_eq!(read.len(), 5);
    verify_trace(&g, Mode::Dissolution, &read).unwrap();
    // a strict-mode check rejects the dissolution, if one happened
    if read.iter().any(|e| e.decision.dissolved.is_some()) {
        assert!(verify_trace(&g, Mode::Strict, &read).is_err());
    }
}

#[test]
fn adversary_bundle_replays() {
    let budget = AdversaryBudget { max_phases: 2, max_agents_per_phase: 500, max_increments: 200 };
    let ctx = RegistryContext::default();
    let policy = policy_from_id("lift:dissolve-threshold", &ctx).unwrap();
    let run = run_dissolution_adversary(policy.as_ref(), &ratio(1, 4), budget).unwrap();
    assert_eq!(run.outcome, AdversaryOutcome::Completed);
    let text = serde_json::to_string(&run.bundle()).unwrap();
    let bundle: AdversaryBundle = serde_json::from_str(&text).unwrap();
    let g = AdversaryGraph::from_nodes(bundle.instance).unwrap();
    let last = verify_trace(&g, Mode::Dissolution, &bundle.trace).unwrap();
    assert_eq!(last.coalitions().iter().filter(|c| c.len() == 2).count(), 1);
    let welfare: Rational = bundle.final_welfare.clone();
    assert_eq!(welfare, run.final_welfare);
    assert!(bundle.ratio_upper_bound < ratio(1, 4));
}
