//! Network files and analysis reports.
//!
//! A network file is a JSON object:
//!
//! ```text
//! {
//!   "nodes": ["1", "2"],
//!   "edges": [{"from": "1", "to": "2", "weight": "0.3"}],
//!   "products": ["t1", "t2"],
//!   "product_sets": {"1": ["t1"], "2": ["t1", "t2"]},
//!   "thresholds": [{"node": "1", "product": "t1", "value": "1/10"}, ...],
//!   "c0": "1"
//! }
//! ```
//!
//! Numbers are strings holding an integer, a decimal or a fraction and are
//! converted exactly.

use std::collections::BTreeMap;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::network::{NetworkError, SocialNetwork, Violation};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub from: String,
    pub to: String,
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdEntry {
    pub node: String,
    pub product: String,
    pub value: Rational,
}

/// On-disk shape of a network. Product sets are written in node order.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub edges: Vec<EdgeEntry>,
    pub products: Vec<String>,
    pub product_sets: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub thresholds: Vec<ThresholdEntry>,
    #[serde(default)]
    pub c0: Option<Rational>,
}

impl Serialize for NetworkFile {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        struct Sets<'a>(&'a NetworkFile);
        impl Serialize for Sets<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let sets = &self.0.product_sets;
                let mut map = serializer.serialize_map(Some(sets.len()))?;
                for node in self.0.nodes.iter().filter(|n| sets.contains_key(*n)) {
                    map.serialize_entry(node, &sets[node])?;
                }
                for (node, set) in sets.iter().filter(|(n, _)| !self.0.nodes.contains(n)) {
                    map.serialize_entry(node, set)?;
                }
                map.end()
            }
        }
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("nodes", &self.nodes)?;
        map.serialize_entry("edges", &self.edges)?;
        map.serialize_entry("products", &self.products)?;
        map.serialize_entry("product_sets", &Sets(self))?;
        map.serialize_entry("thresholds", &self.thresholds)?;
        if let Some(c0) = &self.c0 {
            map.serialize_entry("c0", c0)?;
        }
        map.end()
    }
}

impl NetworkFile {
    pub fn from_network(network: &SocialNetwork) -> NetworkFile {
        let name = |i| network.node_name(i).to_string();
        let product = |p| network.product_name(p).to_string();
        NetworkFile {
            nodes: network.node_names().to_vec(),
            edges: network
                .edges()
                .map(|(from, to, w)| EdgeEntry {
                    from: name(from),
                    to: name(to),
                    weight: w.clone(),
                })
                .collect(),
            products: network.product_names().to_vec(),
            product_sets: network
                .node_ids()
                .map(|i| (name(i), network.product_set(i).iter().map(|&p| product(p)).collect()))
                .collect(),
            thresholds: network
                .node_ids()
                .flat_map(|i| {
                    network
                        .product_set(i)
                        .iter()
                        .zip(network.thresholds_of(i))
                        .map(move |(&p, v)| ThresholdEntry {
                            node: name(i),
                            product: product(p),
                            value: v.clone(),
                        })
                })
                .collect(),
            c0: Some(network.source_payoff().clone()),
        }
    }

    /// Builds the network, checking only that every name resolves.
    pub fn to_network_unvalidated(&self) -> Result<SocialNetwork, NetworkError> {
        let mut b = SocialNetwork::builder()
            .nodes(self.nodes.iter().cloned())
            .products(self.products.iter().cloned());
        for e in &self.edges {
            b = b.edge(e.from.clone(), e.to.clone(), e.weight.clone());
        }
        for node in &self.nodes {
            if let Some(set) = self.product_sets.get(node) {
                b = b.product_set(node.clone(), set.iter().cloned());
            }
        }
        for (node, set) in self.product_sets.iter().filter(|(n, _)| !self.nodes.contains(n)) {
            b = b.product_set(node.clone(), set.iter().cloned());
        }
        for t in &self.thresholds {
            b = b.threshold(t.node.clone(), t.product.clone(), t.value.clone());
        }
        if let Some(c0) = &self.c0 {
            b = b.source_payoff(c0.clone());
        }
        b.build_unvalidated()
    }
}

fn parse_file(text: &str) -> Result<NetworkFile, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Parses and validates a network file.
pub fn parse_network(text: &str) -> Result<SocialNetwork, IoError> {
    let network = parse_network_unvalidated(text)?;
    let violations = network.validate();
    if violations.is_empty() {
        Ok(network)
    } else {
        Err(NetworkError::Invalid(violations).into())
    }
}

/// Parses a network file without checking value ranges and weight sums, so
/// that [`SocialNetwork::validate`] can report every violation.
pub fn parse_network_unvalidated(text: &str) -> Result<SocialNetwork, IoError> {
    Ok(parse_file(text)?.to_network_unvalidated()?)
}

/// Pretty JSON text of `network`, newline-terminated.
pub fn serialize_network(network: &SocialNetwork) -> String {
    let mut text = serde_json::to_string_pretty(&NetworkFile::from_network(network))
        .expect("network files always serialize");
    text.push('\n');
    text
}

/// Lower-case hex SHA-256 of `bytes`.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePayoff {
    pub node: String,
    pub payoff: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffChange {
    pub node: String,
    pub before: Rational,
    pub after: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceReport {
    pub start: String,
    /// `node:product` labels.
    pub steps: Vec<String>,
    pub terminal: Option<String>,
    pub last: String,
    pub verdict: String,
    pub cycle_start: Option<usize>,
    pub forced_first: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminalReport {
    pub state: String,
    pub nash_in_base: bool,
    pub strict: bool,
    pub payoffs: Vec<PayoffChange>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub kind: String,
    pub holds: bool,
    pub edit: String,
    pub base_equilibrium: Option<String>,
    pub edited_equilibrium: Option<String>,
    pub terminals: Vec<TerminalReport>,
    pub cycle: Option<Vec<String>>,
    pub reachable_states: usize,
    pub traces: Vec<TraceReport>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub edits_examined: usize,
    pub edits_skipped: usize,
}

/// Output of a completed analysis. `input_digest` is the SHA-256 of the
/// network file as read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Report {
    Validate {
        input_digest: String,
        valid: bool,
        violations: Vec<String>,
    },
    Payoff {
        input_digest: String,
        strategy: String,
        payoffs: Vec<NodePayoff>,
        nash: bool,
    },
    Nash {
        input_digest: String,
        method: String,
        nash_exists: bool,
        /// All equilibria found (brute force, up to the limit) or the
        /// witness (cycle method).
        equilibria: Vec<String>,
        composition_steps: Option<u64>,
    },
    WeaklyAcyclic {
        input_digest: String,
        weakly_acyclic: bool,
        state_count: u64,
        sink_count: usize,
        stuck_count: u64,
        witness: Option<String>,
        cycle: Vec<String>,
    },
    Dynamics {
        input_digest: String,
        mode: String,
        order: Vec<String>,
        trace: TraceReport,
    },
    Paradox {
        input_digest: String,
        verdicts: Vec<VerdictReport>,
        search: Option<SearchSummary>,
    },
    Gen {
        generator: String,
        output: String,
        output_digest: String,
        nodes: usize,
        sources: usize,
        roles: BTreeMap<String, String>,
    },
}

impl Report {
    /// Pretty JSON, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports always serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Report, IoError> {
        serde_json::from_str(text).map_err(|e| IoError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

pub fn trace_report(network: &SocialNetwork, trace: &crate::dynamics::PathTrace) -> TraceReport {
    TraceReport {
        start: network.format_strategy(&trace.start),
        steps: trace.steps.iter().map(|d| d.label(network)).collect(),
        terminal: trace.terminal.as_ref().map(|s| network.format_strategy(s)),
        last: network.format_strategy(&trace.last),
        verdict: trace.verdict.as_str().to_string(),
        cycle_start: trace.cycle_start,
        forced_first: trace.forced_first,
    }
}

pub fn verdict_report(
    base: &SocialNetwork,
    verdict: &crate::paradox::ParadoxVerdict,
) -> Result<VerdictReport, NetworkError> {
    let edited = verdict.edit.apply(base)?;
    let fmt = |s: &crate::network::JointStrategy| edited.format_strategy(s);
    Ok(VerdictReport {
        kind: verdict.kind.as_str().to_string(),
        holds: verdict.holds,
        edit: verdict.edit.describe(base),
        base_equilibrium: verdict.base_equilibrium.as_ref().map(|s| base.format_strategy(s)),
        edited_equilibrium: verdict.edited_equilibrium.as_ref().map(fmt),
        terminals: verdict
            .terminals
            .iter()
            .map(|t| TerminalReport {
                state: fmt(&t.state),
                nash_in_base: t.nash_in_base,
                strict: t.strict,
                payoffs: base
                    .node_ids()
                    .zip(&t.payoffs)
                    .map(|(i, (before, after))| PayoffChange {
                        node: base.node_name(i).to_string(),
                        before: before.clone(),
                        after: after.clone(),
                    })
                    .collect(),
            })
            .collect(),
        cycle: verdict.cycle.as_ref().map(|c| c.iter().map(fmt).collect()),
        reachable_states: verdict.reachable_states,
        traces: verdict.traces.iter().map(|t| trace_report(&edited, t)).collect(),
        failure: verdict.failure.clone(),
    })
}

pub fn violation_strings(violations: &[Violation]) -> Vec<String> {
    violations.iter().map(ToString::to_string).collect()
}
