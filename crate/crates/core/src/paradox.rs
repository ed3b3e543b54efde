//! Paradoxes of adding or removing a single product: vulnerable, fragile,
//! inefficient and unsafe networks.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dynamics::{explore_game, run_forced, run_scheduled, Mode, PathTrace};
use crate::equilibria::{enumerate_nash, is_nash};
use crate::error::AnalysisError;
use crate::game::Game;
use crate::network::{JointStrategy, NetworkError, NodeId, ProductId, SocialNetwork};
use crate::rational::{q, Rational};

/// One product added to or removed from one node's product set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NetworkEdit {
    /// Adds `product` (created if the universe lacks it) with threshold
    /// `theta`.
    Expansion {
        node: NodeId,
        product: String,
        theta: Rational,
    },
    Contraction { node: NodeId, product: ProductId },
}

impl NetworkEdit {
    pub fn node(&self) -> NodeId {
        match self {
            NetworkEdit::Expansion { node, .. } | NetworkEdit::Contraction { node, .. } => *node,
        }
    }

    pub fn apply(&self, network: &SocialNetwork) -> Result<SocialNetwork, NetworkError> {
        match self {
            NetworkEdit::Expansion { node, product, theta } => network.expand(*node, product, theta.clone()),
            NetworkEdit::Contraction { node, product } => network.contract(*node, *product),
        }
    }

    /// Name of the edited product.
    pub fn product_name(&self, network: &SocialNetwork) -> String {
        match self {
            NetworkEdit::Expansion { product, .. } => product.clone(),
            NetworkEdit::Contraction { product, .. } => network.product_name(*product).to_string(),
        }
    }

    pub fn describe(&self, network: &SocialNetwork) -> String {
        let node = network.node_name(self.node());
        match self {
            NetworkEdit::Expansion { product, theta, .. } => {
                format!("add {product} at {node} (theta {theta})")
            }
            NetworkEdit::Contraction { product, .. } => {
                format!("remove {} at {node}", network.product_name(*product))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParadoxKind {
    Vulnerable,
    Fragile,
    Inefficient,
    Unsafe,
}

impl ParadoxKind {
    pub const ALL: [ParadoxKind; 4] = [
        ParadoxKind::Vulnerable,
        ParadoxKind::Fragile,
        ParadoxKind::Inefficient,
        ParadoxKind::Unsafe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParadoxKind::Vulnerable => "vulnerable",
            ParadoxKind::Fragile => "fragile",
            ParadoxKind::Inefficient => "inefficient",
            ParadoxKind::Unsafe => "unsafe",
        }
    }

    /// Expansion kinds add a product; the others remove one.
    pub fn is_expansion(self) -> bool {
        matches!(self, ParadoxKind::Vulnerable | ParadoxKind::Fragile)
    }

    /// Kinds judged from a given base equilibrium.
    pub fn needs_equilibrium(self) -> bool {
        matches!(self, ParadoxKind::Vulnerable | ParadoxKind::Inefficient)
    }
}

impl fmt::Display for ParadoxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParadoxKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParadoxKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown paradox kind {s:?}"))
    }
}

/// A reachable sink of the edited game, judged against the base
/// equilibrium.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalOutcome {
    pub state: JointStrategy,
    pub nash_in_base: bool,
    /// Per node: payoff at the base equilibrium in the base game, payoff at
    /// this terminal in the edited game.
    pub payoffs: Vec<(Rational, Rational)>,
    /// Every node strictly worse off (vulnerable) or strictly better off
    /// (inefficient).
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParadoxVerdict {
    pub kind: ParadoxKind,
    pub holds: bool,
    pub edit: NetworkEdit,
    /// The equilibrium the check started from (path kinds) or some
    /// equilibrium of the base game (existence kinds).
    pub base_equilibrium: Option<JointStrategy>,
    /// Some equilibrium of the edited game (existence kinds).
    pub edited_equilibrium: Option<JointStrategy>,
    /// Reachable sinks of the edited game, ascending (path kinds).
    pub terminals: Vec<TerminalOutcome>,
    /// A reachable improvement cycle, first state repeated (path kinds).
    pub cycle: Option<Vec<JointStrategy>>,
    pub reachable_states: usize,
    /// Paths that always take the first profitable deviation, one per start
    /// state (path kinds).
    pub traces: Vec<PathTrace>,
    /// Why the verdict fails, if it does.
    pub failure: Option<String>,
}

fn nash_in(network: &SocialNetwork, s: &JointStrategy) -> bool {
    network.check_strategy(s).is_ok() && is_nash(network, s).unwrap_or(false)
}

fn require_kind(edit: &NetworkEdit, expansion: bool) -> Result<(), AnalysisError> {
    let is_expansion = matches!(edit, NetworkEdit::Expansion { .. });
    if is_expansion == expansion {
        Ok(())
    } else {
        Err(AnalysisError::InvalidEdit(format!(
            "expected {}",
            if expansion { "an expansion" } else { "a contraction" }
        )))
    }
}

fn require_nash(network: &SocialNetwork, s: &JointStrategy) -> Result<(), AnalysisError> {
    if is_nash(network, s)? {
        Ok(())
    } else {
        Err(AnalysisError::NotNash(network.format_strategy(s)))
    }
}

/// Whether every improvement path in the expanded game leads from the
/// equilibrium `s` to an equilibrium of both games that is strictly worse
/// for every node.
pub fn check_vulnerable(
    network: &SocialNetwork,
    s: &JointStrategy,
    edit: &NetworkEdit,
    cap: u64,
) -> Result<ParadoxVerdict, AnalysisError> {
    require_kind(edit, true)?;
    require_nash(network, s)?;
    let edited = edit.apply(network)?;
    path_verdict(ParadoxKind::Vulnerable, network, &edited, s, edit, vec![s.clone()], cap)
}

/// Whether every improvement path in the contracted game, after the edited
/// node's forced first choice when it played the removed product, leads
/// from the equilibrium `s` to an equilibrium of both games that is strictly
/// better for every node.
pub fn check_inefficient(
    network: &SocialNetwork,
    s: &JointStrategy,
    edit: &NetworkEdit,
    cap: u64,
) -> Result<ParadoxVerdict, AnalysisError> {
    require_kind(edit, false)?;
    require_nash(network, s)?;
    let edited = edit.apply(network)?;
    let node = edit.node();
    let starts = if edited.offers(node, s.get(node)) {
        vec![s.clone()]
    } else {
        edited.product_set(node).iter().map(|&p| s.with(node, p)).collect()
    };
    path_verdict(ParadoxKind::Inefficient, network, &edited, s, edit, starts, cap)
}

fn path_verdict(
    kind: ParadoxKind,
    base: &SocialNetwork,
    edited: &SocialNetwork,
    s: &JointStrategy,
    edit: &NetworkEdit,
    starts: Vec<JointStrategy>,
    cap: u64,
) -> Result<ParadoxVerdict, AnalysisError> {
    let game = Game::new(edited, cap)?;
    let start_states: Vec<u64> = starts
        .iter()
        .map(|t| game.encode(&game.from_strategy(t).expect("start is valid in the edited game")))
        .collect();
    let reach = explore_game(&game, &start_states);
    let before = base.payoffs(s)?;
    let terminals: Vec<TerminalOutcome> = reach
        .terminals
        .iter()
        .map(|&t| {
            let state = game.state_strategy(t);
            let after = edited.payoffs(&state).expect("sink is valid");
            let strict = before.iter().zip(&after).all(|(b, a)| match kind {
                ParadoxKind::Vulnerable => b > a,
                _ => a > b,
            });
            TerminalOutcome {
                nash_in_base: nash_in(base, &state),
                state,
                payoffs: before.iter().cloned().zip(after).collect(),
                strict,
            }
        })
        .collect();
    let cycle = reach
        .cycle
        .as_ref()
        .map(|c| c.iter().map(|&t| game.state_strategy(t)).collect::<Vec<_>>());

    let failure = if let Some(c) = &cycle {
        Some(format!(
            "improvement cycle reachable through {}",
            edited.format_strategy(&c[0])
        ))
    } else if let Some(t) = terminals.iter().find(|t| !t.nash_in_base) {
        Some(format!(
            "terminal {} is not an equilibrium of the original game",
            edited.format_strategy(&t.state)
        ))
    } else {
        terminals.iter().find(|t| !t.strict).map(|t| {
            let side = if kind == ParadoxKind::Vulnerable { "worse" } else { "better" };
            format!(
                "terminal {} is not strictly {side} for every node",
                edited.format_strategy(&t.state)
            )
        })
    };

    let order: Vec<NodeId> = edited.node_ids().collect();
    let budget = reach.states.len() + 1;
    let node = edit.node();
    let traces = starts
        .iter()
        .map(|start| {
            if start == s {
                run_scheduled(edited, s, &order, Mode::Better, budget)
            } else {
                run_forced(edited, s, node, start.get(node), &order, Mode::Better, budget)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ParadoxVerdict {
        kind,
        holds: failure.is_none(),
        edit: edit.clone(),
        base_equilibrium: Some(s.clone()),
        edited_equilibrium: None,
        terminals,
        cycle,
        reachable_states: reach.states.len(),
        traces,
        failure,
    })
}

/// The base game has an equilibrium and the expanded game has none.
pub fn check_fragile(network: &SocialNetwork, edit: &NetworkEdit, cap: u64) -> Result<ParadoxVerdict, AnalysisError> {
    require_kind(edit, true)?;
    existence_verdict(ParadoxKind::Fragile, network, edit, cap)
}

/// The base game has an equilibrium and the contracted game has none.
pub fn check_unsafe(network: &SocialNetwork, edit: &NetworkEdit, cap: u64) -> Result<ParadoxVerdict, AnalysisError> {
    require_kind(edit, false)?;
    existence_verdict(ParadoxKind::Unsafe, network, edit, cap)
}

fn existence_verdict(
    kind: ParadoxKind,
    network: &SocialNetwork,
    edit: &NetworkEdit,
    cap: u64,
) -> Result<ParadoxVerdict, AnalysisError> {
    let edited = edit.apply(network)?;
    let base_ne = enumerate_nash(network, Some(1), cap)?.into_iter().next();
    let edited_ne = enumerate_nash(&edited, Some(1), cap)?.into_iter().next();
    let failure = match (&base_ne, &edited_ne) {
        (None, _) => Some("the original game has no equilibrium".to_string()),
        (_, Some(s)) => Some(format!(
            "the edited game has the equilibrium {}",
            edited.format_strategy(s)
        )),
        _ => None,
    };
    Ok(ParadoxVerdict {
        kind,
        holds: failure.is_none(),
        edit: edit.clone(),
        base_equilibrium: base_ne,
        edited_equilibrium: edited_ne,
        terminals: Vec::new(),
        cycle: None,
        reachable_states: 0,
        traces: Vec::new(),
        failure,
    })
}

/// `{1/10, 2/10, ..., 9/10, 1}`.
pub fn default_theta_grid() -> Vec<Rational> {
    (1..=10).map(|k| q(k, 10)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    /// Holding verdicts in edit order.
    pub found: Vec<ParadoxVerdict>,
    pub edits_examined: usize,
    /// Edits left unexamined because the budget ran out.
    pub edits_skipped: usize,
}

/// Tries every single-product edit of the requested kinds: expansions by
/// every product of the universe a node lacks, at every threshold in
/// `theta_grid`, and contractions of every product of a node with at least
/// two. Path kinds are tried from every equilibrium of the base game. At
/// most `budget` edits are examined.
pub fn search_paradoxes(
    network: &SocialNetwork,
    kinds: &[ParadoxKind],
    theta_grid: &[Rational],
    budget: usize,
    cap: u64,
) -> Result<SearchOutcome, AnalysisError> {
    Game::new(network, cap)?;
    let mut expansions = Vec::new();
    let mut contractions = Vec::new();
    for i in network.node_ids() {
        for p in (0..network.product_count()).map(ProductId) {
            if network.offers(i, p) {
                if network.product_set(i).len() > 1 {
                    contractions.push(NetworkEdit::Contraction { node: i, product: p });
                }
            } else {
                for theta in theta_grid {
                    expansions.push(NetworkEdit::Expansion {
                        node: i,
                        product: network.product_name(p).to_string(),
                        theta: theta.clone(),
                    });
                }
            }
        }
    }
    let mut wanted: Vec<ParadoxKind> = kinds.to_vec();
    wanted.sort();
    wanted.dedup();
    let needs_ne = wanted.iter().any(|k| k.needs_equilibrium());
    let equilibria = if needs_ne {
        enumerate_nash(network, None, cap)?
    } else {
        Vec::new()
    };

    let mut jobs: Vec<(ParadoxKind, NetworkEdit)> = Vec::new();
    for kind in wanted {
        let edits = if kind.is_expansion() { &expansions } else { &contractions };
        jobs.extend(edits.iter().map(|e| (kind, e.clone())));
    }
    let total = jobs.len();
    jobs.truncate(budget);
    let examined = jobs.len();
    let results: Vec<Vec<ParadoxVerdict>> = jobs
        .into_par_iter()
        .map(|(kind, edit)| -> Result<Vec<ParadoxVerdict>, AnalysisError> {
            let verdicts = match kind {
                ParadoxKind::Fragile => vec![check_fragile(network, &edit, cap)?],
                ParadoxKind::Unsafe => vec![check_unsafe(network, &edit, cap)?],
                ParadoxKind::Vulnerable => equilibria
                    .iter()
                    .map(|s| check_vulnerable(network, s, &edit, cap))
                    .collect::<Result<_, _>>()?,
                ParadoxKind::Inefficient => equilibria
                    .iter()
                    .map(|s| check_inefficient(network, s, &edit, cap))
                    .collect::<Result<_, _>>()?,
            };
            Ok(verdicts.into_iter().filter(|v| v.holds).collect())
        })
        .collect::<Result<_, _>>()?;
    Ok(SearchOutcome {
        found: results.into_iter().flatten().collect(),
        edits_examined: examined,
        edits_skipped: total - examined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::DEFAULT_STATE_CAP;
    use crate::samples;

    const CAP: u64 = DEFAULT_STATE_CAP;

    #[test]
    fn fragile_example() {
        let net = samples::fragile_cycle();
        let edit = NetworkEdit::Expansion {
            node: net.node("1").unwrap(),
            product: "t1".into(),
            theta: q(3, 10),
        };
        let v = check_fragile(&net, &edit, CAP).unwrap();
        assert!(v.holds, "{:?}", v.failure);
        assert_eq!(net.format_strategy(v.base_equilibrium.as_ref().unwrap()), "1=t2,2=t2,3=t1");
    }

    #[test]
    fn unsafe_example() {
        let net = samples::unsafe_cycle();
        let edit = NetworkEdit::Contraction {
            node: net.node("1").unwrap(),
            product: net.product("t4").unwrap(),
        };
        let v = check_unsafe(&net, &edit, CAP).unwrap();
        assert!(v.holds);
        assert_eq!(net.format_strategy(v.base_equilibrium.as_ref().unwrap()), "1=t4,2=t3,3=t3");
    }

    #[test]
    fn inefficient_example() {
        let net = samples::inefficient_network(q(3, 10), q(1, 10));
        let s = net.strategy(&[("3", "t1"), ("4", "t1")]).unwrap();
        let edit = NetworkEdit::Contraction {
            node: net.node("3").unwrap(),
            product: net.product("t1").unwrap(),
        };
        let v = check_inefficient(&net, &s, &edit, CAP).unwrap();
        assert!(v.holds, "{:?}", v.failure);
        assert_eq!(v.terminals.len(), 1);
        assert_eq!(net.format_strategy(&v.terminals[0].state), "1=t2,2=t2,3=t2,4=t2");
        for (before, after) in &v.terminals[0].payoffs {
            assert_eq!((before, after), (&q(2, 10), &q(5, 10)));
        }
        assert_eq!(v.traces.len(), 1);
        assert_eq!(v.traces[0].steps.len(), 2);
    }

    #[test]
    fn wrong_edit_kind_and_non_equilibrium_start() {
        let net = samples::inefficient_network(q(3, 10), q(1, 10));
        let s = net.strategy(&[("3", "t1"), ("4", "t1")]).unwrap();
        let contraction = NetworkEdit::Contraction {
            node: net.node("3").unwrap(),
            product: net.product("t1").unwrap(),
        };
        assert!(matches!(
            check_vulnerable(&net, &s, &contraction, CAP),
            Err(AnalysisError::InvalidEdit(_))
        ));
        let not_ne = net.strategy(&[("3", "t1"), ("4", "t2")]).unwrap();
        assert!(matches!(
            check_inefficient(&net, &not_ne, &contraction, CAP),
            Err(AnalysisError::NotNash(_))
        ));
    }

    #[test]
    fn sources_block_strict_domination() {
        let net = samples::triangle_with_sources();
        let ne = enumerate_nash(&net, None, CAP).unwrap();
        let s = &ne[0];
        let edit = NetworkEdit::Expansion {
            node: net.node("2").unwrap(),
            product: "t2".into(),
            theta: q(1, 10),
        };
        let v = check_vulnerable(&net, s, &edit, CAP).unwrap();
        assert!(!v.holds);
    }

    #[test]
    fn irrelevant_expansion_keeps_start_terminal() {
        let net = samples::inefficient_network(q(3, 10), q(1, 10));
        let s = net.strategy(&[("3", "t1"), ("4", "t1")]).unwrap();
        let edit = NetworkEdit::Expansion {
            node: net.node("1").unwrap(),
            product: "t9".into(),
            theta: q(1, 1),
        };
        let v = check_vulnerable(&net, &s, &edit, CAP).unwrap();
        assert!(!v.holds);
        assert_eq!(v.terminals.len(), 1);
        assert_eq!(v.terminals[0].state, s);
        assert!(!v.terminals[0].strict);
    }

    #[test]
    fn search_finds_the_fragile_and_inefficient_edits() {
        let net = samples::fragile_cycle();
        let out = search_paradoxes(&net, &[ParadoxKind::Fragile], &default_theta_grid(), usize::MAX, CAP).unwrap();
        assert!(out.found.iter().any(|v| v.edit
            == NetworkEdit::Expansion {
                node: net.node("1").unwrap(),
                product: "t1".into(),
                theta: q(3, 10)
            }));

        let net = samples::inefficient_network(q(3, 10), q(1, 10));
        let out = search_paradoxes(&net, &[ParadoxKind::Inefficient], &default_theta_grid(), usize::MAX, CAP).unwrap();
        assert!(out.found.iter().any(|v| v.edit
            == NetworkEdit::Contraction {
                node: net.node("3").unwrap(),
                product: net.product("t1").unwrap()
            }));

        let out = search_paradoxes(&net, &ParadoxKind::ALL, &default_theta_grid(), 3, CAP).unwrap();
        assert_eq!(out.edits_examined, 3);
        assert!(out.edits_skipped > 0);
    }

    #[test]
    fn all_singleton_search_is_empty() {
        let net = SocialNetwork::builder()
            .nodes(["a", "b"])
            .product("t")
            .edge("a", "b", q(1, 2))
            .product_set("a", ["t"])
            .product_set("b", ["t"])
            .uniform_threshold("a", q(1, 2))
            .uniform_threshold("b", q(1, 2))
            .build()
            .unwrap();
        let out = search_paradoxes(&net, &ParadoxKind::ALL, &[], usize::MAX, CAP).unwrap();
        assert!(out.found.is_empty());
        assert_eq!(out.edits_examined, 0);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ParadoxKind::ALL {
            assert_eq!(k.as_str().parse::<ParadoxKind>().unwrap(), k);
        }
        assert!("braess".parse::<ParadoxKind>().is_err());
    }
}
