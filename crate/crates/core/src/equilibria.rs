//! Nash equilibria: best responses, exhaustive enumeration, and the
//! polynomial decision procedure for networks whose graph is one directed
//! cycle.
//!
//! On a cycle `v1 -> v2 -> ... -> vn -> v1` the payoff of `v(k+1)` depends
//! only on the choice of `vk`, so "which choices of `v(k+1)` are best
//! responses to each choice of `vk`" is a binary relation `R_k` over
//! products. A Nash equilibrium is exactly a closed chain
//! `(a1,a2) in R_1, ..., (an,a1) in R_n`, i.e. a diagonal pair of the
//! composition `R_1 o ... o R_n`.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::AnalysisError;
use crate::game::Game;
use crate::network::{JointStrategy, NodeId, ProductId, SocialNetwork};
use crate::rational::Rational;

/// The argmax set of `node`'s payoff against the other choices in `s`
/// (`s`'s own entry for `node` is ignored), ascending by product.
pub fn best_responses(
    network: &SocialNetwork,
    node: NodeId,
    s: &JointStrategy,
) -> Result<Vec<ProductId>, AnalysisError> {
    network.check_strategy(s)?;
    if node.index() >= network.node_count() {
        return Err(crate::network::NetworkError::UnknownNode(format!("#{}", node.index())).into());
    }
    let options = network.product_set(node);
    let payoffs: Vec<Rational> = options
        .iter()
        .map(|&p| network.payoff_unchecked(s, node, p))
        .collect();
    let best = payoffs.iter().max().expect("product sets are non-empty");
    Ok(options
        .iter()
        .zip(&payoffs)
        .filter(|(_, v)| *v == best)
        .map(|(p, _)| *p)
        .collect())
}

/// True iff every node's choice in `s` is a best response.
pub fn is_nash(network: &SocialNetwork, s: &JointStrategy) -> Result<bool, AnalysisError> {
    network.check_strategy(s)?;
    for i in network.node_ids() {
        if network.product_set(i).len() < 2 {
            continue;
        }
        let current = network.payoff_unchecked(s, i, s.get(i));
        let improvable = network
            .product_set(i)
            .iter()
            .any(|&p| network.payoff_unchecked(s, i, p) > current);
        if improvable {
            return Ok(false);
        }
    }
    Ok(true)
}

const CHUNK: u64 = 4096;

/// All Nash equilibria in lexicographic order (nodes in declaration order,
/// products in declaration order), at most `limit` of them. Fails when the
/// joint-strategy space exceeds `cap`.
pub fn enumerate_nash(
    network: &SocialNetwork,
    limit: Option<usize>,
    cap: u64,
) -> Result<Vec<JointStrategy>, AnalysisError> {
    let game = Game::new(network, cap)?;
    Ok(enumerate_in_game(&game, limit)
        .into_iter()
        .map(|state| game.state_strategy(state))
        .collect())
}

/// Nash equilibria of a compiled game as state numbers, ascending.
pub(crate) fn enumerate_in_game(game: &Game, limit: Option<usize>) -> Vec<u64> {
    let total = game.state_count();
    let chunks = total.div_ceil(CHUNK);
    let found: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut choice = game.decode(start);
            let mut hits = Vec::new();
            for state in start..end {
                if game.is_nash(&choice) {
                    hits.push(state);
                }
                advance(game, &mut choice);
            }
            hits
        })
        .collect();
    let mut all: Vec<u64> = found.into_iter().flatten().collect();
    if let Some(limit) = limit {
        all.truncate(limit);
    }
    all
}

/// Mixed-radix increment; wraps to all zeros after the last state.
pub(crate) fn advance(game: &Game, choice: &mut [usize]) {
    for i in (0..choice.len()).rev() {
        choice[i] += 1;
        if choice[i] < game.radix(i) {
            return;
        }
        choice[i] = 0;
    }
}

/// A binary relation over products.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Relation {
    pairs: BTreeSet<(ProductId, ProductId)>,
}

impl Relation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(products: impl IntoIterator<Item = ProductId>) -> Self {
        products.into_iter().map(|p| (p, p)).collect()
    }

    pub fn insert(&mut self, a: ProductId, b: ProductId) {
        self.pairs.insert((a, b));
    }

    pub fn contains(&self, a: ProductId, b: ProductId) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ProductId, ProductId)> + '_ {
        self.pairs.iter().copied()
    }

    /// `{(a, d) | exists b: (a, b) in self and (b, d) in other}`.
    pub fn compose(&self, other: &Relation) -> Relation {
        let mut steps = 0;
        self.compose_counted(other, &mut steps)
    }

    /// [`Self::compose`] that adds the number of pair checks to `steps`:
    /// every pair of `self` is matched against every pair of `other`, so a
    /// composition costs `|self| * |other| <= |P|^4` checks.
    pub fn compose_counted(&self, other: &Relation, steps: &mut u64) -> Relation {
        let mut out = Relation::new();
        for &(a, b) in &self.pairs {
            for &(c, d) in &other.pairs {
                *steps += 1;
                if b == c {
                    out.pairs.insert((a, d));
                }
            }
        }
        out
    }
}

impl FromIterator<(ProductId, ProductId)> for Relation {
    fn from_iter<I: IntoIterator<Item = (ProductId, ProductId)>>(iter: I) -> Self {
        Relation {
            pairs: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleDecision {
    pub has_nash: bool,
    pub witness: Option<JointStrategy>,
    /// Cycle order the relations were built along, starting at the first
    /// declared node.
    pub order: Vec<NodeId>,
    /// Pair checks spent composing relations plus the final diagonal scan.
    pub composition_steps: u64,
}

/// Nodes in cycle order if the graph is a single directed cycle through all
/// nodes, starting at the first declared node and following edges.
pub fn cycle_order(network: &SocialNetwork) -> Result<Vec<NodeId>, AnalysisError> {
    let n = network.node_count();
    if n < 2 {
        return Err(AnalysisError::NotSimpleCycle(format!("{n} node(s)")));
    }
    let mut successor = vec![None; n];
    for (from, to, _) in network.edges() {
        if successor[from.index()].replace(to).is_some() {
            return Err(AnalysisError::NotSimpleCycle(format!(
                "node {} has more than one outgoing edge",
                network.node_name(from)
            )));
        }
    }
    for i in network.node_ids() {
        if network.in_edges(i).len() != 1 {
            return Err(AnalysisError::NotSimpleCycle(format!(
                "node {} has {} incoming edges",
                network.node_name(i),
                network.in_edges(i).len()
            )));
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut current = NodeId(0);
    loop {
        order.push(current);
        current = successor[current.index()].expect("every node has an in-edge, so n edges exist");
        if current == NodeId(0) {
            break;
        }
        if order.len() == n {
            break;
        }
    }
    if order.len() != n || current != NodeId(0) {
        return Err(AnalysisError::NotSimpleCycle(
            "edges form several disjoint cycles".to_string(),
        ));
    }
    Ok(order)
}

/// Pairs `(t, u)` such that `u` is a best response of `follower` when its
/// only neighbour `leader` plays `t`.
pub fn best_response_relation(network: &SocialNetwork, leader: NodeId, follower: NodeId) -> Relation {
    let weight = network
        .weight(leader, follower)
        .cloned()
        .unwrap_or_else(Rational::zero);
    let options = network.product_set(follower);
    let thresholds = network.thresholds_of(follower);
    let mut relation = Relation::new();
    for &t in network.product_set(leader) {
        let payoffs: Vec<Rational> = options
            .iter()
            .zip(thresholds)
            .map(|(&u, theta)| if u == t { &weight - theta } else { -theta })
            .collect();
        let best = payoffs.iter().max().expect("non-empty product set");
        for (&u, v) in options.iter().zip(&payoffs) {
            if v == best {
                relation.insert(t, u);
            }
        }
    }
    relation
}

/// Decides equilibrium existence on a single-cycle network by folding
/// `((R_1 o R_2) o ...) o R_n` and intersecting with the identity. The
/// witness is recovered by back-chaining through the stored prefix
/// compositions: the least diagonal product for the first node, then the
/// least feasible product for each node going backwards around the cycle.
pub fn cycle_has_nash(network: &SocialNetwork) -> Result<CycleDecision, AnalysisError> {
    let order = cycle_order(network)?;
    let n = order.len();
    let relations: Vec<Relation> = (0..n)
        .map(|k| best_response_relation(network, order[k], order[(k + 1) % n]))
        .collect();

    let mut steps = 0u64;
    let mut prefixes: Vec<Relation> = Vec::with_capacity(n);
    prefixes.push(relations[0].clone());
    for relation in &relations[1..] {
        let next = prefixes.last().unwrap().compose_counted(relation, &mut steps);
        prefixes.push(next);
    }
    let closed = prefixes.last().unwrap();
    let mut first = None;
    for p in (0..network.product_count()).map(ProductId) {
        steps += 1;
        if first.is_none() && closed.contains(p, p) {
            first = Some(p);
        }
    }

    let witness = first.map(|a1| {
        let mut chain = vec![a1; n];
        let mut next = a1;
        for k in (1..n).rev() {
            let pick = network
                .product_set(order[k])
                .iter()
                .copied()
                .find(|&a| prefixes[k - 1].contains(a1, a) && relations[k].contains(a, next))
                .expect("a diagonal pair of the full composition chains back");
            chain[k] = pick;
            next = pick;
        }
        let mut choices = vec![ProductId(0); n];
        for (k, node) in order.iter().enumerate() {
            choices[node.index()] = chain[k];
        }
        JointStrategy::new(choices)
    });
    if let Some(w) = &witness {
        assert!(
            is_nash(network, w)?,
            "reconstructed cycle witness {} is not an equilibrium",
            network.format_strategy(w)
        );
    }
    Ok(CycleDecision {
        has_nash: witness.is_some(),
        witness,
        order,
        composition_steps: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::DEFAULT_STATE_CAP;
    use crate::rational::q;
    use crate::samples;

    fn names(net: &SocialNetwork, ps: &[ProductId]) -> Vec<String> {
        ps.iter().map(|&p| net.product_name(p).to_string()).collect()
    }

    #[test]
    fn best_response_follows_matching_predecessor() {
        let net = samples::no_equilibrium_cycle();
        let s = net.strategy(&[("1", "t2"), ("2", "t2"), ("3", "t1")]).unwrap();
        let br = best_responses(&net, net.node("1").unwrap(), &s).unwrap();
        assert_eq!(names(&net, &br), vec!["t1"]);
    }

    #[test]
    fn singleton_source_best_response() {
        let net = samples::triangle_with_sources();
        let s = net.strategy(&[("1", "t2"), ("2", "t3"), ("3", "t2")]).unwrap();
        let br = best_responses(&net, net.node("s4").unwrap(), &s).unwrap();
        assert_eq!(names(&net, &br), vec!["t4"]);
    }

    #[test]
    fn is_nash_examples() {
        let net = samples::escape_product_cycle();
        let all_t4 = net.strategy(&[("1", "t4"), ("2", "t4"), ("3", "t4")]).unwrap();
        assert!(is_nash(&net, &all_t4).unwrap());
        let cyc = samples::no_equilibrium_cycle();
        let s = cyc.strategy(&[("1", "t1"), ("2", "t2"), ("3", "t1")]).unwrap();
        assert!(!is_nash(&cyc, &s).unwrap());
        let single = SocialNetwork::builder()
            .nodes(["a", "b"])
            .product("t")
            .edge("a", "b", q(1, 2))
            .product_set("a", ["t"])
            .product_set("b", ["t"])
            .uniform_threshold("a", q(1, 2))
            .uniform_threshold("b", q(1, 2))
            .build()
            .unwrap();
        assert!(is_nash(&single, &single.strategy(&[]).unwrap()).unwrap());
    }

    #[test]
    fn no_equilibrium_cycle_has_none() {
        let net = samples::no_equilibrium_cycle();
        assert!(enumerate_nash(&net, None, DEFAULT_STATE_CAP).unwrap().is_empty());
    }

    #[test]
    fn isolated_sources_are_all_equilibria() {
        let net = SocialNetwork::builder()
            .nodes(["a", "b"])
            .products(["x", "y"])
            .product_set("a", ["x"])
            .product_set("b", ["y"])
            .uniform_threshold("a", q(1, 2))
            .uniform_threshold("b", q(1, 2))
            .build()
            .unwrap();
        let ne = enumerate_nash(&net, None, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(ne.len(), 1);
        assert_eq!(net.format_strategy(&ne[0]), "a=x,b=y");
    }

    #[test]
    fn enumeration_respects_limit_and_cap() {
        let net = samples::escape_product_cycle();
        assert_eq!(enumerate_nash(&net, Some(0), DEFAULT_STATE_CAP).unwrap().len(), 0);
        assert!(matches!(
            enumerate_nash(&net, None, 10),
            Err(AnalysisError::StateCapExceeded { .. })
        ));
    }

    #[test]
    fn composition_examples() {
        let (t1, t2, t3) = (ProductId(0), ProductId(1), ProductId(2));
        let a: Relation = [(t1, t2)].into_iter().collect();
        let b: Relation = [(t2, t3)].into_iter().collect();
        assert_eq!(a.compose(&b), [(t1, t3)].into_iter().collect());
        let id = Relation::identity([t1, t2, t3]);
        assert_eq!(a.compose(&id), a);
        let c: Relation = [(t3, t1)].into_iter().collect();
        assert!(a.compose(&c).is_empty());
        let mut steps = 0;
        a.compose_counted(&id, &mut steps);
        assert_eq!(steps, 3);
    }

    #[test]
    fn cycle_decisions() {
        let d = cycle_has_nash(&samples::no_equilibrium_cycle()).unwrap();
        assert!(!d.has_nash);
        assert!(d.witness.is_none());

        let net = samples::escape_product_cycle();
        let d = cycle_has_nash(&net).unwrap();
        assert!(d.has_nash);
        assert_eq!(net.format_strategy(d.witness.as_ref().unwrap()), "1=t4,2=t4,3=t4");
    }

    #[test]
    fn all_singleton_cycle() {
        let mut b = SocialNetwork::builder().product("t");
        let n = 5;
        for i in 0..n {
            b = b
                .node(format!("v{i}"))
                .edge(format!("v{i}"), format!("v{}", (i + 1) % n), q(1, 2))
                .product_set(format!("v{i}"), ["t"])
                .threshold(format!("v{i}"), "t", q(1, 3));
        }
        let net = b.build().unwrap();
        let d = cycle_has_nash(&net).unwrap();
        assert!(d.has_nash);
        assert!(net.format_strategy(d.witness.as_ref().unwrap()).split(',').all(|p| p.ends_with("=t")));
    }

    #[test]
    fn cycle_order_follows_edges_regardless_of_labels() {
        // 1 -> 3 -> 2 -> 1
        let net = SocialNetwork::builder()
            .nodes(["1", "2", "3"])
            .products(["x", "y"])
            .edge("1", "3", q(1, 2))
            .edge("3", "2", q(1, 2))
            .edge("2", "1", q(1, 2))
            .product_set("1", ["x", "y"])
            .product_set("2", ["x", "y"])
            .product_set("3", ["x", "y"])
            .uniform_threshold("1", q(1, 4))
            .uniform_threshold("2", q(1, 4))
            .uniform_threshold("3", q(1, 4))
            .build()
            .unwrap();
        let order: Vec<&str> = cycle_order(&net).unwrap().iter().map(|&i| net.node_name(i)).collect();
        assert_eq!(order, vec!["1", "3", "2"]);
        let d = cycle_has_nash(&net).unwrap();
        assert_eq!(net.format_strategy(d.witness.as_ref().unwrap()), "1=x,2=x,3=x");
    }

    #[test]
    fn non_cycles_rejected() {
        assert!(matches!(
            cycle_has_nash(&samples::triangle_with_sources()),
            Err(AnalysisError::NotSimpleCycle(_))
        ));
        // two disjoint 2-cycles
        let net = SocialNetwork::builder()
            .nodes(["a", "b", "c", "d"])
            .product("t")
            .edge("a", "b", q(1, 2))
            .edge("b", "a", q(1, 2))
            .edge("c", "d", q(1, 2))
            .edge("d", "c", q(1, 2))
            .product_set("a", ["t"])
            .product_set("b", ["t"])
            .product_set("c", ["t"])
            .product_set("d", ["t"])
            .uniform_threshold("a", q(1, 2))
            .uniform_threshold("b", q(1, 2))
            .uniform_threshold("c", q(1, 2))
            .uniform_threshold("d", q(1, 2))
            .build()
            .unwrap();
        assert!(matches!(cycle_order(&net), Err(AnalysisError::NotSimpleCycle(_))));
    }
}
