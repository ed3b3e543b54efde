//! Property suites over small random networks.
//!
//! Each property takes a seed, builds its instance from a seeded RNG and
//! checks against a payoff oracle written directly from the model.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sngame::dynamics::{build_improvement_graph, profitable_deviations, run_scheduled, weak_acyclicity, Mode, Verdict};
use sngame::equilibria::{best_responses, cycle_has_nash, enumerate_nash, is_nash};
use sngame::game::DEFAULT_STATE_CAP;
use sngame::rational::{q, Rational};
use sngame::{JointStrategy, NodeId, ProductId, SocialNetwork};

pub const CASES: u32 = 200;

pub type Property = fn(u64) -> Result<(), TestCaseError>;

pub const PROPERTIES: [(&str, Property); 9] = [
    ("join-the-crowd monotonicity", join_the_crowd),
    ("locality", locality),
    ("sink-NE equivalence", sink_nash_equivalence),
    ("weakly acyclic implies NE", weakly_acyclic_has_nash),
    ("witness soundness", witness_soundness),
    ("cycle algorithm agrees with brute force", cycle_agrees_with_brute_force),
    ("best responses invariant under threshold shift", threshold_shift),
    ("expand and contract are inverse", expand_contract_inverse),
    ("converged paths end in sinks", converged_paths_end_in_sinks),
];

/// Runs one property over `cases` random seeds.
pub fn check(property: Property, cases: u32) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&any::<u64>(), property).map_err(|e| e.to_string())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn tenths(k: i64) -> Rational {
    q(k, 10)
}

/// Up to `max_nodes` nodes and `max_products` products, random edges with
/// in-weights summing to at most 1, thresholds in tenths.
pub fn random_network(rng: &mut impl Rng, max_nodes: usize, max_products: usize) -> SocialNetwork {
    let n = rng.gen_range(1..=max_nodes);
    let m = rng.gen_range(1..=max_products);
    let nodes: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    let products: Vec<String> = (1..=m).map(|t| format!("t{t}")).collect();
    let mut b = SocialNetwork::builder().nodes(nodes.clone()).products(products.clone());
    for (i, to) in nodes.iter().enumerate() {
        let mut budget = 10;
        for (j, from) in nodes.iter().enumerate() {
            if i != j && rng.gen_bool(0.4) {
                let k = rng.gen_range(0..=budget);
                budget -= k;
                b = b.edge(from.clone(), to.clone(), tenths(k));
            }
        }
        b = random_products(b, rng, to, &products);
    }
    b.build().expect("random network is valid")
}

fn random_products(
    mut b: sngame::network::NetworkBuilder,
    rng: &mut impl Rng,
    node: &str,
    products: &[String],
) -> sngame::network::NetworkBuilder {
    let mut set: Vec<String> = products.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
    if set.is_empty() {
        set.push(products.choose(rng).unwrap().clone());
    }
    b = b.product_set(node, set.clone());
    for t in set {
        b = b.threshold(node, t, tenths(rng.gen_range(1..=10)));
    }
    b
}

/// A simple directed cycle on `2..=max_nodes` nodes declared in shuffled
/// order, so the cycle does not follow declaration order.
pub fn random_cycle(rng: &mut impl Rng, max_nodes: usize, max_products: usize) -> SocialNetwork {
    let n = rng.gen_range(2..=max_nodes);
    let m = rng.gen_range(1..=max_products);
    let ring: Vec<String> = (1..=n).map(|i| format!("c{i}")).collect();
    let products: Vec<String> = (1..=m).map(|t| format!("t{t}")).collect();
    let mut declared = ring.clone();
    declared.shuffle(rng);
    let mut b = SocialNetwork::builder().nodes(declared).products(products.clone());
    for i in 0..n {
        let w = tenths(rng.gen_range(0..=10));
        b = b.edge(ring[i].clone(), ring[(i + 1) % n].clone(), w);
        b = random_products(b, rng, &ring[i], &products);
    }
    b.build().expect("random cycle is valid")
}

pub fn random_strategy(rng: &mut impl Rng, net: &SocialNetwork) -> JointStrategy {
    JointStrategy::new(
        net.node_ids()
            .map(|i| *net.product_set(i).choose(rng).unwrap())
            .collect(),
    )
}

/// Payoff straight from the definition.
pub fn oracle_payoff(net: &SocialNetwork, s: &JointStrategy, i: NodeId) -> Rational {
    let edges = net.in_edges(i);
    if edges.is_empty() {
        return net.source_payoff().clone();
    }
    let mine = s.get(i);
    let matched: Rational = edges.iter().filter(|(j, _)| s.get(*j) == mine).map(|(_, w)| w).sum();
    matched - net.threshold(i, mine).unwrap().clone()
}

pub fn oracle_is_nash(net: &SocialNetwork, s: &JointStrategy) -> bool {
    net.node_ids().all(|i| {
        let now = oracle_payoff(net, s, i);
        net.product_set(i)
            .iter()
            .all(|&t| oracle_payoff(net, &s.with(i, t), i) <= now)
    })
}

/// Every joint strategy, in lexicographic order.
pub fn all_strategies(net: &SocialNetwork) -> Vec<JointStrategy> {
    let mut out = vec![Vec::<ProductId>::new()];
    for i in net.node_ids() {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                net.product_set(i).iter().map(move |&t| {
                    let mut next = prefix.clone();
                    next.push(t);
                    next
                })
            })
            .collect();
    }
    out.into_iter().map(JointStrategy::new).collect()
}

pub fn oracle_nash(net: &SocialNetwork) -> Vec<JointStrategy> {
    all_strategies(net)
        .into_iter()
        .filter(|s| oracle_is_nash(net, s))
        .collect()
}

fn fail(message: String) -> TestCaseError {
    TestCaseError::fail(message)
}

fn join_the_crowd(seed: u64) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let net = random_network(&mut r, 5, 3);
    let s = random_strategy(&mut r, &net);
    for i in net.node_ids().filter(|&i| !net.is_source(i)) {
        let mine = s.get(i);
        for &(j, ref w) in net.in_edges(i) {
            if s.get(j) == mine || !net.offers(j, mine) {
                continue;
            }
            let before = net.payoff(&s, i).unwrap();
            let after = net.payoff(&s.with(j, mine), i).unwrap();
            prop_assert!(after >= before);
            if w.is_positive() {
                prop_assert!(after > before);
            }
        }
    }
    Ok(())
}

fn locality(seed: u64) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let net = random_network(&mut r, 5, 3);
    let s = random_strategy(&mut r, &net);
    for i in net.node_ids() {
        let neighbours = net.neighbours(i);
        let base = net.payoff(&s, i).unwrap();
        prop_assert_eq!(&base, &oracle_payoff(&net, &s, i));
        for j in net.node_ids().filter(|j| *j != i && !neighbours.contains(j)) {
            for &t in net.product_set(j) {
                prop_assert_eq!(net.payoff(&s.with(j, t), i).unwrap(), base.clone());
            }
        }
        if net.is_source(i) {
            prop_assert_eq!(&base, net.source_payoff());
        }
    }
    Ok(())
}

fn sink_nash_equivalence(seed: u64) -> Result<(), TestCaseError> {
    let net = random_network(&mut rng(seed), 5, 3);
    let graph = build_improvement_graph(&net, DEFAULT_STATE_CAP).unwrap();
    let sinks: Vec<JointStrategy> = graph.sinks().iter().map(|&s| graph.strategy(s)).collect();
    let nash = enumerate_nash(&net, None, DEFAULT_STATE_CAP).unwrap();
    prop_assert_eq!(&sinks, &nash);
    prop_assert_eq!(&nash, &oracle_nash(&net));
    Ok(())
}

fn weakly_acyclic_has_nash(seed: u64) -> Result<(), TestCaseError> {
    let net = random_network(&mut rng(seed), 5, 3);
    let graph = build_improvement_graph(&net, DEFAULT_STATE_CAP).unwrap();
    let wa = weak_acyclicity(&graph);
    if wa.weakly_acyclic {
        prop_assert!(!oracle_nash(&net).is_empty());
    }
    Ok(())
}

fn witness_soundness(seed: u64) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let cycle = random_cycle(&mut r, 6, 3);
    let d = cycle_has_nash(&cycle).unwrap();
    prop_assert_eq!(d.has_nash, d.witness.is_some());
    if let Some(w) = &d.witness {
        prop_assert!(is_nash(&cycle, w).unwrap());
        prop_assert!(oracle_is_nash(&cycle, w));
    }

    let net = random_network(&mut r, 5, 3);
    let graph = build_improvement_graph(&net, DEFAULT_STATE_CAP).unwrap();
    let wa = weak_acyclicity(&graph);
    prop_assert_eq!(wa.weakly_acyclic, wa.witness.is_none());
    if let Some(w) = &wa.witness {
        let reach = graph.can_reach_sink();
        prop_assert!(!reach[graph.state_of(w).unwrap() as usize]);
        prop_assert!(wa.cycle.len() >= 3);
        prop_assert_eq!(wa.cycle.first(), wa.cycle.last());
        for pair in wa.cycle.windows(2) {
            let from = graph.state_of(&pair[0]).unwrap();
            let to = graph.state_of(&pair[1]).unwrap();
            if !graph.successor_states(from).any(|x| x == to) {
                return Err(fail(format!("cycle step {:?} -> {:?} is not an edge", pair[0], pair[1])));
            }
        }
    }
    Ok(())
}

fn cycle_agrees_with_brute_force(seed: u64) -> Result<(), TestCaseError> {
    let cycle = random_cycle(&mut rng(seed), 6, 3);
    let d = cycle_has_nash(&cycle).unwrap();
    prop_assert_eq!(d.has_nash, !oracle_nash(&cycle).is_empty());
    Ok(())
}

fn threshold_shift(seed: u64) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let net = random_network(&mut r, 5, 3);
    let s = random_strategy(&mut r, &net);
    let i = NodeId(r.gen_range(0..net.node_count()));
    let thetas = net.thresholds_of(i);
    let lo = thetas.iter().min().unwrap().clone();
    let hi = thetas.iter().max().unwrap().clone();
    // any delta with every shifted threshold still in (0,1]
    let delta = if r.gen_bool(0.5) {
        (Rational::one() - hi) / q(2, 1)
    } else {
        -(lo / q(2, 1))
    };
    let shifted = rebuild(&net, |j, theta| if j == i { theta + delta.clone() } else { theta });
    let before = best_responses(&net, i, &s).unwrap();
    prop_assert!(!before.is_empty());
    prop_assert_eq!(before, best_responses(&shifted, i, &s).unwrap());
    Ok(())
}

/// Copy of `net` with every threshold passed through `f`.
fn rebuild(net: &SocialNetwork, f: impl Fn(NodeId, Rational) -> Rational) -> SocialNetwork {
    let mut b = SocialNetwork::builder()
        .nodes(net.node_names().to_vec())
        .products(net.product_names().to_vec())
        .source_payoff(net.source_payoff().clone());
    for (from, to, w) in net.edges() {
        b = b.edge(net.node_name(from), net.node_name(to), w.clone());
    }
    for i in net.node_ids() {
        let set = net.product_set(i);
        b = b.product_set(net.node_name(i), set.iter().map(|&t| net.product_name(t)));
        for (&t, theta) in set.iter().zip(net.thresholds_of(i)) {
            b = b.threshold(net.node_name(i), net.product_name(t), f(i, theta.clone()));
        }
    }
    b.build().unwrap()
}

fn expand_contract_inverse(seed: u64) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let net = random_network(&mut r, 5, 3);
    let i = NodeId(r.gen_range(0..net.node_count()));
    let all: Vec<ProductId> = (0..net.product_count()).map(ProductId).collect();
    let missing: Vec<ProductId> = all.iter().copied().filter(|&t| !net.offers(i, t)).collect();
    if let Some(&t) = missing.choose(&mut r) {
        let expanded = net.expand(i, net.product_name(t), tenths(r.gen_range(1..=10))).unwrap();
        prop_assert_eq!(&expanded.contract(i, t).unwrap(), &net);
    }
    if net.product_set(i).len() > 1 {
        let t = *net.product_set(i).choose(&mut r).unwrap();
        let theta = net.threshold(i, t).unwrap().clone();
        let contracted = net.contract(i, t).unwrap();
        prop_assert_eq!(&contracted.expand(i, net.product_name(t), theta).unwrap(), &net);
    }
    Ok(())
}

fn converged_paths_end_in_sinks(seed: u64) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let net = random_network(&mut r, 5, 3);
    let s = random_strategy(&mut r, &net);
    let order: Vec<NodeId> = net.node_ids().collect();
    for mode in [Mode::Best, Mode::Better] {
        let trace = run_scheduled(&net, &s, &order, mode, 500).unwrap();
        prop_assert_eq!(&trace, &run_scheduled(&net, &s, &order, mode, 500).unwrap());
        if trace.verdict == Verdict::Converged {
            prop_assert!(profitable_deviations(&net, &trace.last).unwrap().is_empty());
            prop_assert!(oracle_is_nash(&net, &trace.last));
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(Config { cases: CASES, failure_persistence: None, ..Config::default() })]

    #[test]
    fn prop_join_the_crowd(seed in any::<u64>()) { join_the_crowd(seed)?; }

    #[test]
    fn prop_locality(seed in any::<u64>()) { locality(seed)?; }

    #[test]
    fn prop_sink_nash_equivalence(seed in any::<u64>()) { sink_nash_equivalence(seed)?; }

    #[test]
    fn prop_weakly_acyclic_has_nash(seed in any::<u64>()) { weakly_acyclic_has_nash(seed)?; }

    #[test]
    fn prop_witness_soundness(seed in any::<u64>()) { witness_soundness(seed)?; }

    #[test]
    fn prop_cycle_agrees_with_brute_force(seed in any::<u64>()) { cycle_agrees_with_brute_force(seed)?; }

    #[test]
    fn prop_threshold_shift(seed in any::<u64>()) { threshold_shift(seed)?; }

    #[test]
    fn prop_expand_contract_inverse(seed in any::<u64>()) { expand_contract_inverse(seed)?; }

    #[test]
    fn prop_converged_paths_end_in_sinks(seed in any::<u64>()) { converged_paths_end_in_sinks(seed)?; }
}

#[test]
fn best_response_oracle_matches_on_random_states() {
    let mut r = rng(7);
    for _ in 0..200 {
        let net = random_network(&mut r, 5, 3);
        let s = random_strategy(&mut r, &net);
        assert_eq!(is_nash(&net, &s).unwrap(), oracle_is_nash(&net, &s), "{}", net.format_strategy(&s));
    }
}
