//! Improvement paths: profitable deviations, scheduled best/better-response
//! runs, the explicit improvement graph and weak acyclicity.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::AnalysisError;
use crate::game::Game;
use crate::network::{JointStrategy, NetworkError, NodeId, ProductId, SocialNetwork};
use crate::rational::Rational;

/// A single-node switch `node: from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Deviation {
    pub node: NodeId,
    pub from: ProductId,
    pub to: ProductId,
}

impl Deviation {
    /// `node:product` text, e.g. `3:t3`.
    pub fn label(&self, network: &SocialNetwork) -> String {
        format!("{}:{}", network.node_name(self.node), network.product_name(self.to))
    }
}

/// All strictly improving single-node moves at `s`, ordered by node then
/// product.
pub fn profitable_deviations(
    network: &SocialNetwork,
    s: &JointStrategy,
) -> Result<Vec<Deviation>, AnalysisError> {
    network.check_strategy(s)?;
    let mut out = Vec::new();
    for i in network.node_ids() {
        let current = network.payoff_unchecked(s, i, s.get(i));
        for &p in network.product_set(i) {
            if p != s.get(i) && network.payoff_unchecked(s, i, p) > current {
                out.push(Deviation {
                    node: i,
                    from: s.get(i),
                    to: p,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Move to the least strictly better product.
    Better,
    /// Move to the least best response.
    Best,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Converged,
    Cycled,
    StepLimit,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Converged => "converged",
            Verdict::Cycled => "cycled",
            Verdict::StepLimit => "step-limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathTrace {
    pub start: JointStrategy,
    pub steps: Vec<Deviation>,
    /// The sink reached; set only when the run converged.
    pub terminal: Option<JointStrategy>,
    /// State after the last step.
    pub last: JointStrategy,
    pub verdict: Verdict,
    /// For cycled runs, the step count at which `last` was first visited.
    pub cycle_start: Option<usize>,
    /// The first step was imposed rather than chosen for profit.
    pub forced_first: bool,
}

fn check_order(network: &SocialNetwork, order: &[NodeId]) -> Result<(), AnalysisError> {
    let n = network.node_count();
    let mut seen = vec![false; n];
    for &i in order {
        if i.index() >= n {
            return Err(AnalysisError::InvalidOrder(format!("unknown node #{}", i.index())));
        }
        if std::mem::replace(&mut seen[i.index()], true) {
            return Err(AnalysisError::InvalidOrder(format!(
                "node {} listed twice",
                network.node_name(i)
            )));
        }
    }
    if let Some(missing) = seen.iter().position(|&b| !b) {
        return Err(AnalysisError::InvalidOrder(format!(
            "node {} missing",
            network.node_name(NodeId(missing))
        )));
    }
    Ok(())
}

/// Parses a comma-separated list of node names into a scheduler order.
pub fn parse_order(network: &SocialNetwork, text: &str) -> Result<Vec<NodeId>, AnalysisError> {
    let order = text
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|name| network.node(name))
        .collect::<Result<Vec<_>, NetworkError>>()?;
    check_order(network, &order)?;
    Ok(order)
}

/// The product `node` switches to under `mode`, or `None` if it already
/// plays a best response.
fn scheduled_move(network: &SocialNetwork, s: &JointStrategy, node: NodeId, mode: Mode) -> Option<ProductId> {
    let options = network.product_set(node);
    if options.len() < 2 {
        return None;
    }
    let current = network.payoff_unchecked(s, node, s.get(node));
    let payoffs: Vec<Rational> = options
        .iter()
        .map(|&p| network.payoff_unchecked(s, node, p))
        .collect();
    let best = payoffs.iter().max().expect("non-empty");
    if *best <= current {
        return None;
    }
    let pick = match mode {
        Mode::Best => payoffs.iter().position(|v| v == best),
        Mode::Better => payoffs.iter().position(|v| *v > current),
    };
    pick.map(|k| options[k])
}

/// Repeatedly lets the first node in `order` that is not playing a best
/// response move, until a sink, a revisited state or `max_steps` moves.
pub fn run_scheduled(
    network: &SocialNetwork,
    start: &JointStrategy,
    order: &[NodeId],
    mode: Mode,
    max_steps: usize,
) -> Result<PathTrace, AnalysisError> {
    network.check_strategy(start)?;
    check_order(network, order)?;
    if max_steps == 0 {
        return Err(AnalysisError::ZeroStepBudget);
    }
    Ok(continue_run(network, start.clone(), start.clone(), Vec::new(), order, mode, max_steps, false))
}

/// Like [`run_scheduled`], but the first step `node -> product` is imposed
/// regardless of profit. `start` may hold, at `node`, a product the network
/// no longer offers; every other entry must be valid. The forced step counts
/// towards `max_steps`.
pub fn run_forced(
    network: &SocialNetwork,
    start: &JointStrategy,
    node: NodeId,
    product: ProductId,
    order: &[NodeId],
    mode: Mode,
    max_steps: usize,
) -> Result<PathTrace, AnalysisError> {
    check_order(network, order)?;
    if max_steps == 0 {
        return Err(AnalysisError::ZeroStepBudget);
    }
    if !network.offers(node, product) {
        return Err(NetworkError::ProductAbsent {
            node: network.node_name(node).to_string(),
            product: network.product_name(product).to_string(),
        }
        .into());
    }
    let first = start.with(node, product);
    network.check_strategy(&first)?;
    let step = Deviation {
        node,
        from: start.get(node),
        to: product,
    };
    Ok(continue_run(network, start.clone(), first, vec![step], order, mode, max_steps, true))
}

#[allow(clippy::too_many_arguments)]
fn continue_run(
    network: &SocialNetwork,
    start: JointStrategy,
    mut current: JointStrategy,
    mut steps: Vec<Deviation>,
    order: &[NodeId],
    mode: Mode,
    max_steps: usize,
    forced_first: bool,
) -> PathTrace {
    let mut seen: HashMap<JointStrategy, usize> = HashMap::new();
    seen.insert(current.clone(), steps.len());
    loop {
        let mover = order
            .iter()
            .find_map(|&i| scheduled_move(network, &current, i, mode).map(|p| (i, p)));
        let Some((node, to)) = mover else {
            return PathTrace {
                start,
                steps,
                terminal: Some(current.clone()),
                last: current,
                verdict: Verdict::Converged,
                cycle_start: None,
                forced_first,
            };
        };
        if steps.len() >= max_steps {
            return PathTrace {
                start,
                steps,
                terminal: None,
                last: current,
                verdict: Verdict::StepLimit,
                cycle_start: None,
                forced_first,
            };
        }
        steps.push(Deviation {
            node,
            from: current.get(node),
            to,
        });
        current.set(node, to);
        if let Some(&first) = seen.get(&current) {
            return PathTrace {
                start,
                steps,
                terminal: None,
                last: current,
                verdict: Verdict::Cycled,
                cycle_start: Some(first),
                forced_first,
            };
        }
        seen.insert(current.clone(), steps.len());
    }
}

/// Applies `steps` to `start`, checking that each is a profitable deviation
/// at the state it is applied to. Returns the final state.
pub fn replay(
    network: &SocialNetwork,
    start: &JointStrategy,
    steps: &[Deviation],
) -> Result<JointStrategy, AnalysisError> {
    network.check_strategy(start)?;
    apply_checked(network, start.clone(), steps, 0)
}

/// Replays a [`PathTrace`], honouring an imposed first step.
pub fn replay_trace(network: &SocialNetwork, trace: &PathTrace) -> Result<JointStrategy, AnalysisError> {
    if trace.forced_first && !trace.steps.is_empty() {
        let first = trace.steps[0];
        if trace.start.get(first.node) != first.from || !network.offers(first.node, first.to) {
            return Err(AnalysisError::NotProfitable {
                index: 0,
                step: first.label(network),
            });
        }
        let next = trace.start.with(first.node, first.to);
        network.check_strategy(&next)?;
        apply_checked(network, next, &trace.steps[1..], 1)
    } else {
        replay(network, &trace.start, &trace.steps)
    }
}

fn apply_checked(
    network: &SocialNetwork,
    mut current: JointStrategy,
    steps: &[Deviation],
    offset: usize,
) -> Result<JointStrategy, AnalysisError> {
    for (k, d) in steps.iter().enumerate() {
        let ok = d.from != d.to
            && current.get(d.node) == d.from
            && network.offers(d.node, d.to)
            && network.payoff_unchecked(&current, d.node, d.to)
                > network.payoff_unchecked(&current, d.node, d.from);
        if !ok {
            return Err(AnalysisError::NotProfitable {
                index: k + offset,
                step: d.label(network),
            });
        }
        current.set(d.node, d.to);
    }
    Ok(current)
}

/// Parses `node:product` steps (comma separated), filling in each `from`
/// by walking forward from `start`.
pub fn parse_steps(
    network: &SocialNetwork,
    start: &JointStrategy,
    text: &str,
) -> Result<Vec<Deviation>, AnalysisError> {
    let mut current = start.clone();
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (node, product) = part.split_once(':').ok_or_else(|| {
            NetworkError::InvalidStrategy(format!("expected node:product, got {part:?}"))
        })?;
        let node = network.node(node.trim())?;
        let to = network.product(product.trim())?;
        out.push(Deviation {
            node,
            from: current.get(node),
            to,
        });
        current.set(node, to);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Edge {
    target: u64,
    node: u32,
    from: u32,
    to: u32,
}

/// Every joint strategy with its profitable deviations, in compressed
/// adjacency form. States are numbered lexicographically.
#[derive(Debug, Clone)]
pub struct ImprovementGraph {
    game: Game,
    offsets: Vec<usize>,
    edges: Vec<Edge>,
    sinks: Vec<u64>,
}

const CHUNK: u64 = 4096;

pub fn build_improvement_graph(network: &SocialNetwork, cap: u64) -> Result<ImprovementGraph, AnalysisError> {
    Ok(ImprovementGraph::from_game(Game::new(network, cap)?))
}

impl ImprovementGraph {
    pub fn from_game(game: Game) -> ImprovementGraph {
        let total = game.state_count();
        let parts: Vec<(Vec<usize>, Vec<Edge>)> = (0..total.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let end = (start + CHUNK).min(total);
                let mut degrees = Vec::with_capacity((end - start) as usize);
                let mut edges = Vec::new();
                let mut choice = game.decode(start);
                let mut moves = Vec::new();
                for state in start..end {
                    game.deviations(&choice, &mut moves);
                    degrees.push(moves.len());
                    edges.extend(moves.iter().map(|&(i, k)| Edge {
                        target: game.successor(state, &choice, i, k),
                        node: i as u32,
                        from: choice[i] as u32,
                        to: k as u32,
                    }));
                    crate::equilibria::advance(&game, &mut choice);
                }
                (degrees, edges)
            })
            .collect();
        let mut offsets = Vec::with_capacity(total as usize + 1);
        offsets.push(0);
        let mut edges = Vec::with_capacity(parts.iter().map(|p| p.1.len()).sum());
        let mut sinks = Vec::new();
        let mut state = 0u64;
        for (degrees, part) in parts {
            for d in degrees {
                if d == 0 {
                    sinks.push(state);
                }
                offsets.push(offsets.last().unwrap() + d);
                state += 1;
            }
            edges.extend(part);
        }
        ImprovementGraph {
            game,
            offsets,
            edges,
            sinks,
        }
    }

    pub fn game(&self) -> &Game {
        &self.game
    }

    pub fn state_count(&self) -> u64 {
        self.game.state_count()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Nash equilibria, ascending.
    pub fn sinks(&self) -> &[u64] {
        &self.sinks
    }

    pub fn is_sink(&self, state: u64) -> bool {
        self.out_degree(state) == 0
    }

    pub fn out_degree(&self, state: u64) -> usize {
        self.offsets[state as usize + 1] - self.offsets[state as usize]
    }

    pub fn strategy(&self, state: u64) -> JointStrategy {
        self.game.state_strategy(state)
    }

    pub fn state_of(&self, s: &JointStrategy) -> Option<u64> {
        self.game.from_strategy(s).map(|c| self.game.encode(&c))
    }

    fn edge_slice(&self, state: u64) -> &[Edge] {
        &self.edges[self.offsets[state as usize]..self.offsets[state as usize + 1]]
    }

    /// Successor states, in deviation order.
    pub fn successor_states(&self, state: u64) -> impl Iterator<Item = u64> + '_ {
        self.edge_slice(state).iter().map(|e| e.target)
    }

    /// `(deviation, successor)` pairs in deviation order.
    pub fn successors(&self, state: u64) -> impl Iterator<Item = (Deviation, u64)> + '_ {
        self.edge_slice(state).iter().map(|e| {
            let node = e.node as usize;
            (
                Deviation {
                    node: NodeId(node),
                    from: self.game.product_of(node, e.from as usize),
                    to: self.game.product_of(node, e.to as usize),
                },
                e.target,
            )
        })
    }

    /// Graphviz DOT text: one vertex per state labelled by its canonical
    /// strategy string, edges labelled `node:product`, sinks doubly circled.
    pub fn to_dot(&self, network: &SocialNetwork) -> String {
        let names: Vec<String> = (0..self.state_count())
            .map(|s| network.format_strategy(&self.strategy(s)))
            .collect();
        let mut out = String::from("digraph improvement {\n");
        for (s, name) in names.iter().enumerate() {
            let shape = if self.is_sink(s as u64) { " [peripheries=2]" } else { "" };
            let _ = writeln!(out, "  \"{name}\"{shape};");
        }
        for (s, name) in names.iter().enumerate() {
            for (d, t) in self.successors(s as u64) {
                let _ = writeln!(
                    out,
                    "  \"{name}\" -> \"{}\" [label=\"{}\"];",
                    names[t as usize],
                    d.label(network)
                );
            }
        }
        out.push_str("}\n");
        out
    }

    /// States from which some sink is reachable, by reverse breadth-first
    /// search from the sinks.
    pub fn can_reach_sink(&self) -> Vec<bool> {
        let n = self.state_count() as usize;
        let mut rev_offsets = vec![0usize; n + 1];
        for e in &self.edges {
            rev_offsets[e.target as usize + 1] += 1;
        }
        for k in 0..n {
            rev_offsets[k + 1] += rev_offsets[k];
        }
        let mut fill = rev_offsets.clone();
        let mut preds = vec![0u64; self.edges.len()];
        for s in 0..n {
            for e in self.edge_slice(s as u64) {
                let slot = &mut fill[e.target as usize];
                preds[*slot] = s as u64;
                *slot += 1;
            }
        }
        let mut good = vec![false; n];
        let mut queue: std::collections::VecDeque<u64> = self.sinks.iter().copied().collect();
        for &s in &self.sinks {
            good[s as usize] = true;
        }
        while let Some(s) = queue.pop_front() {
            for &p in &preds[rev_offsets[s as usize]..rev_offsets[s as usize + 1]] {
                if !good[p as usize] {
                    good[p as usize] = true;
                    queue.push_back(p);
                }
            }
        }
        good
    }

    /// Everything reachable from `starts`, the sinks among it and, if the
    /// reachable part is not acyclic, one cycle.
    pub fn explore(&self, starts: &[u64]) -> Reachability {
        explore_with(starts, |s| self.successor_states(s).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakAcyclicity {
    pub weakly_acyclic: bool,
    pub state_count: u64,
    pub sink_count: usize,
    /// States from which no sink is reachable.
    pub stuck_count: u64,
    /// Least state (lexicographically) from which no sink is reachable.
    pub witness: Option<JointStrategy>,
    /// A cycle reachable from the witness by always taking the first
    /// deviation; the first state is repeated at the end.
    pub cycle: Vec<JointStrategy>,
}

/// Decides weak acyclicity exactly on the full improvement graph.
pub fn is_weakly_acyclic(network: &SocialNetwork, cap: u64) -> Result<WeakAcyclicity, AnalysisError> {
    Ok(weak_acyclicity(&build_improvement_graph(network, cap)?))
}

pub fn weak_acyclicity(graph: &ImprovementGraph) -> WeakAcyclicity {
    let good = graph.can_reach_sink();
    let stuck_count = good.iter().filter(|&&g| !g).count() as u64;
    let witness = good.iter().position(|&g| !g).map(|s| s as u64);
    let cycle = witness
        .map(|w| {
            // Successors of stuck states are stuck and stuck states are not
            // sinks, so the first-edge walk never ends and must repeat.
            let mut index: HashMap<u64, usize> = HashMap::new();
            let mut path = Vec::new();
            let mut s = w;
            while !index.contains_key(&s) {
                index.insert(s, path.len());
                path.push(s);
                s = graph.successor_states(s).next().expect("stuck states have successors");
            }
            let mut cycle: Vec<JointStrategy> =
                path[index[&s]..].iter().map(|&t| graph.strategy(t)).collect();
            cycle.push(graph.strategy(s));
            cycle
        })
        .unwrap_or_default();
    WeakAcyclicity {
        weakly_acyclic: witness.is_none(),
        state_count: graph.state_count(),
        sink_count: graph.sinks().len(),
        stuck_count,
        witness: witness.map(|w| graph.strategy(w)),
        cycle,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reachability {
    /// Reachable states, ascending.
    pub states: Vec<u64>,
    /// Reachable sinks, ascending.
    pub terminals: Vec<u64>,
    /// Some reachable cycle, first state repeated at the end.
    pub cycle: Option<Vec<u64>>,
}

/// Depth-first exploration of the improvement graph of `game` from `starts`,
/// computing deviations on demand.
pub fn explore_game(game: &Game, starts: &[u64]) -> Reachability {
    let mut choice = Vec::new();
    let mut moves = Vec::new();
    explore_with(starts, |s| {
        game.decode_into(s, &mut choice);
        game.deviations(&choice, &mut moves);
        moves.iter().map(|&(i, k)| game.successor(s, &choice, i, k)).collect()
    })
}

fn explore_with(starts: &[u64], mut next: impl FnMut(u64) -> Vec<u64>) -> Reachability {
    const OPEN: u8 = 1;
    const DONE: u8 = 2;
    let mut colour: HashMap<u64, u8> = HashMap::new();
    let mut terminals = Vec::new();
    let mut cycle = None;
    for &root in starts {
        if colour.contains_key(&root) {
            continue;
        }
        let mut stack: Vec<(u64, Vec<u64>, usize)> = Vec::new();
        colour.insert(root, OPEN);
        stack.push((root, next(root), 0));
        while let Some(top) = stack.last_mut() {
            let (state, succ, pos) = (top.0, &top.1, top.2);
            if pos == succ.len() {
                if succ.is_empty() {
                    terminals.push(state);
                }
                colour.insert(state, DONE);
                stack.pop();
                continue;
            }
            let t = succ[pos];
            top.2 += 1;
            match colour.get(&t) {
                None => {
                    colour.insert(t, OPEN);
                    let succ = next(t);
                    stack.push((t, succ, 0));
                }
                Some(&OPEN) if cycle.is_none() => {
                    let from = stack.iter().position(|f| f.0 == t).expect("open states are on the stack");
                    let mut c: Vec<u64> = stack[from..].iter().map(|f| f.0).collect();
                    c.push(t);
                    cycle = Some(c);
                }
                _ => {}
            }
        }
    }
    let mut states: Vec<u64> = colour.into_keys().collect();
    states.sort_unstable();
    terminals.sort_unstable();
    Reachability {
        states,
        terminals,
        cycle,
    }
}
