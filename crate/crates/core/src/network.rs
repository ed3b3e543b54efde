//! Social networks with product sets, thresholds and the associated payoff
//! function.
//!
//! A [`SocialNetwork`] is immutable once built. Nodes and products are
//! addressed by dense indices ([`NodeId`], [`ProductId`]) in declaration
//! order; names are kept alongside for I/O. Product sets are stored sorted by
//! [`ProductId`], so "least product" always means "earliest declared".

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProductId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl ProductId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("unknown product {0:?}")]
    UnknownProduct(String),
    #[error("duplicate node {0:?}")]
    DuplicateNode(String),
    #[error("duplicate product {0:?}")]
    DuplicateProduct(String),
    #[error("duplicate edge {from:?} -> {to:?}")]
    DuplicateEdge { from: String, to: String },
    #[error("node {node:?} lists product {product:?} twice")]
    DuplicateMember { node: String, product: String },
    #[error("missing threshold for node {node:?}, product {product:?}")]
    MissingThreshold { node: String, product: String },
    #[error("threshold given for node {node:?}, product {product:?} outside its product set")]
    StrayThreshold { node: String, product: String },
    #[error("duplicate threshold for node {node:?}, product {product:?}")]
    DuplicateThreshold { node: String, product: String },
    #[error("no product set given for node {0:?}")]
    MissingProductSet(String),
    #[error("invalid joint strategy: {0}")]
    InvalidStrategy(String),
    #[error("product {product:?} is already available to node {node:?}")]
    ProductAlreadyPresent { node: String, product: String },
    #[error("product {product:?} is not available to node {node:?}")]
    ProductAbsent { node: String, product: String },
    #[error("removing {product:?} would leave node {node:?} without products")]
    WouldEmptyProductSet { node: String, product: String },
    #[error("threshold {0} not in (0,1]")]
    ThresholdOutOfRange(Rational),
    #[error("network violates model constraints: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// A broken model constraint. Violations are data, reported by
/// [`SocialNetwork::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    WeightOutOfRange { from: String, to: String, weight: Rational },
    WeightSumExceeded { node: String, sum: Rational },
    ThresholdOutOfRange { node: String, product: String, value: Rational },
    EmptyProductSet { node: String },
    SelfLoop { node: String },
    NonPositiveSourcePayoff { value: Rational },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WeightOutOfRange { from, to, weight } => {
                write!(f, "edge {from} -> {to}: weight {weight} not in [0,1]")
            }
            Violation::WeightSumExceeded { node, sum } => {
                write!(f, "node {node}: weight sum {sum} > 1")
            }
            Violation::ThresholdOutOfRange { node, product, value } => {
                write!(f, "node {node}, product {product}: threshold {value} not in (0,1]")
            }
            Violation::EmptyProductSet { node } => write!(f, "node {node}: empty product set"),
            Violation::SelfLoop { node } => write!(f, "node {node}: self-loop"),
            Violation::NonPositiveSourcePayoff { value } => {
                write!(f, "source payoff c0 = {value} is not positive")
            }
        }
    }
}

/// Total assignment node -> chosen product, indexed by [`NodeId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointStrategy(Vec<ProductId>);

impl JointStrategy {
    pub fn new(choices: Vec<ProductId>) -> Self {
        JointStrategy(choices)
    }

    pub fn get(&self, node: NodeId) -> ProductId {
        self.0[node.0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn choices(&self) -> &[ProductId] {
        &self.0
    }

    /// Copy with `node` switched to `product`.
    pub fn with(&self, node: NodeId, product: ProductId) -> Self {
        let mut next = self.0.clone();
        next[node.0] = product;
        JointStrategy(next)
    }

    pub fn set(&mut self, node: NodeId, product: ProductId) {
        self.0[node.0] = product;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialNetwork {
    nodes: Vec<String>,
    products: Vec<String>,
    node_index: HashMap<String, NodeId>,
    product_index: HashMap<String, ProductId>,
    /// In-edges per target node, sorted by source.
    in_edges: Vec<Vec<(NodeId, Rational)>>,
    /// Sorted product sets, parallel to `thresholds`.
    product_sets: Vec<Vec<ProductId>>,
    thresholds: Vec<Vec<Rational>>,
    source_payoff: Rational,
}

/// Incremental, name-based construction of a [`SocialNetwork`].
#[derive(Debug, Clone, Default)]
pub struct NetworkBuilder {
    nodes: Vec<String>,
    products: Vec<String>,
    edges: Vec<(String, String, Rational)>,
    product_sets: Vec<(String, Vec<String>)>,
    thresholds: Vec<(String, String, Rational)>,
    source_payoff: Option<Rational>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, name: impl Into<String>) -> Self {
        self.nodes.push(name.into());
        self
    }

    pub fn nodes<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.nodes.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn product(mut self, name: impl Into<String>) -> Self {
        self.products.push(name.into());
        self
    }

    pub fn products<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.products.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn edge(mut self, from: impl Into<String>, to: impl Into<String>, weight: Rational) -> Self {
        self.edges.push((from.into(), to.into(), weight));
        self
    }

    pub fn product_set<I, S>(mut self, node: impl Into<String>, products: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.product_sets
            .push((node.into(), products.into_iter().map(Into::into).collect()));
        self
    }

    pub fn threshold(
        mut self,
        node: impl Into<String>,
        product: impl Into<String>,
        value: Rational,
    ) -> Self {
        self.thresholds.push((node.into(), product.into(), value));
        self
    }

    /// Gives every product in `node`'s set the same threshold.
    /// Must be called after the product set is declared.
    pub fn uniform_threshold(mut self, node: impl Into<String>, value: Rational) -> Self {
        let node = node.into();
        let members: Vec<String> = self
            .product_sets
            .iter()
            .rev()
            .find(|(n, _)| *n == node)
            .map(|(_, ps)| ps.clone())
            .unwrap_or_default();
        for product in members {
            self.thresholds.push((node.clone(), product, value.clone()));
        }
        self
    }

    pub fn source_payoff(mut self, c0: Rational) -> Self {
        self.source_payoff = Some(c0);
        self
    }

    /// Builds and validates; model-constraint violations become
    /// [`NetworkError::Invalid`].
    pub fn build(self) -> Result<SocialNetwork, NetworkError> {
        let network = self.build_unvalidated()?;
        let violations = network.validate();
        if violations.is_empty() {
            Ok(network)
        } else {
            Err(NetworkError::Invalid(violations))
        }
    }

    /// Builds with structural checks only (ids resolve, thresholds total over
    /// product sets); value-range constraints are left to
    /// [`SocialNetwork::validate`].
    pub fn build_unvalidated(self) -> Result<SocialNetwork, NetworkError> {
        let mut node_index = HashMap::new();
        for (i, name) in self.nodes.iter().enumerate() {
            if node_index.insert(name.clone(), NodeId(i)).is_some() {
                return Err(NetworkError::DuplicateNode(name.clone()));
            }
        }
        let mut product_index = HashMap::new();
        for (i, name) in self.products.iter().enumerate() {
            if product_index.insert(name.clone(), ProductId(i)).is_some() {
                return Err(NetworkError::DuplicateProduct(name.clone()));
            }
        }
        let node_of = |name: &str| {
            node_index
                .get(name)
                .copied()
                .ok_or_else(|| NetworkError::UnknownNode(name.to_string()))
        };
        let product_of = |name: &str| {
            product_index
                .get(name)
                .copied()
                .ok_or_else(|| NetworkError::UnknownProduct(name.to_string()))
        };

        let n = self.nodes.len();
        let mut in_edges: Vec<Vec<(NodeId, Rational)>> = vec![Vec::new(); n];
        for (from, to, weight) in &self.edges {
            let (f, t) = (node_of(from)?, node_of(to)?);
            if in_edges[t.0].iter().any(|(src, _)| *src == f) {
                return Err(NetworkError::DuplicateEdge {
                    from: from.clone(),
                    to: to.clone(),
                });
            }
            in_edges[t.0].push((f, weight.clone()));
        }
        for list in &mut in_edges {
            list.sort_by_key(|(src, _)| *src);
        }

        let mut sets: Vec<Option<Vec<ProductId>>> = vec![None; n];
        for (node, members) in &self.product_sets {
            let id = node_of(node)?;
            let mut ids = Vec::with_capacity(members.len());
            for m in members {
                let p = product_of(m)?;
                if ids.contains(&p) {
                    return Err(NetworkError::DuplicateMember {
                        node: node.clone(),
                        product: m.clone(),
                    });
                }
                ids.push(p);
            }
            ids.sort();
            sets[id.0] = Some(ids);
        }
        let product_sets: Vec<Vec<ProductId>> = sets
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| NetworkError::MissingProductSet(self.nodes[i].clone())))
            .collect::<Result<_, _>>()?;

        let mut thresholds: Vec<Vec<Option<Rational>>> =
            product_sets.iter().map(|s| vec![None; s.len()]).collect();
        for (node, product, value) in &self.thresholds {
            let id = node_of(node)?;
            let p = product_of(product)?;
            let slot = product_sets[id.0]
                .iter()
                .position(|q| *q == p)
                .ok_or_else(|| NetworkError::StrayThreshold {
                    node: node.clone(),
                    product: product.clone(),
                })?;
            if thresholds[id.0][slot].replace(value.clone()).is_some() {
                return Err(NetworkError::DuplicateThreshold {
                    node: node.clone(),
                    product: product.clone(),
                });
            }
        }
        let thresholds = thresholds
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(k, v)| {
                        v.ok_or_else(|| NetworkError::MissingThreshold {
                            node: self.nodes[i].clone(),
                            product: self.products[product_sets[i][k].0].clone(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;

        Ok(SocialNetwork {
            nodes: self.nodes,
            products: self.products,
            node_index,
            product_index,
            in_edges,
            product_sets,
            thresholds,
            source_payoff: self.source_payoff.unwrap_or_else(Rational::one),
        })
    }
}

impl SocialNetwork {
    pub fn builder() -> NetworkBuilder {
        NetworkBuilder::new()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn product_count(&self) -> usize {
        self.products.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn node_name(&self, node: NodeId) -> &str {
        &self.nodes[node.0]
    }

    pub fn product_name(&self, product: ProductId) -> &str {
        &self.products[product.0]
    }

    pub fn node_names(&self) -> &[String] {
        &self.nodes
    }

    pub fn product_names(&self) -> &[String] {
        &self.products
    }

    pub fn node(&self, name: &str) -> Result<NodeId, NetworkError> {
        self.node_index
            .get(name)
            .copied()
            .ok_or_else(|| NetworkError::UnknownNode(name.to_string()))
    }

    pub fn product(&self, name: &str) -> Result<ProductId, NetworkError> {
        self.product_index
            .get(name)
            .copied()
            .ok_or_else(|| NetworkError::UnknownProduct(name.to_string()))
    }

    pub fn source_payoff(&self) -> &Rational {
        &self.source_payoff
    }

    /// The products available to `node`, ascending.
    pub fn product_set(&self, node: NodeId) -> &[ProductId] {
        &self.product_sets[node.0]
    }

    pub fn offers(&self, node: NodeId, product: ProductId) -> bool {
        self.product_sets[node.0].binary_search(&product).is_ok()
    }

    pub fn threshold(&self, node: NodeId, product: ProductId) -> Option<&Rational> {
        let slot = self.product_sets[node.0].binary_search(&product).ok()?;
        Some(&self.thresholds[node.0][slot])
    }

    /// Thresholds parallel to [`Self::product_set`].
    pub fn thresholds_of(&self, node: NodeId) -> &[Rational] {
        &self.thresholds[node.0]
    }

    /// Incoming edges `(j, w_ji)` of `node`, sorted by `j`.
    pub fn in_edges(&self, node: NodeId) -> &[(NodeId, Rational)] {
        &self.in_edges[node.0]
    }

    pub fn weight(&self, from: NodeId, to: NodeId) -> Option<&Rational> {
        self.in_edges[to.0]
            .iter()
            .find(|(src, _)| *src == from)
            .map(|(_, w)| w)
    }

    /// All edges `(from, to, weight)`, ordered by target then source.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, &Rational)> + '_ {
        self.in_edges.iter().enumerate().flat_map(|(to, list)| {
            list.iter().map(move |(from, w)| (*from, NodeId(to), w))
        })
    }

    /// The nodes with an edge into `node`.
    pub fn neighbours(&self, node: NodeId) -> Vec<NodeId> {
        self.in_edges[node.0].iter().map(|(j, _)| *j).collect()
    }

    pub fn is_source(&self, node: NodeId) -> bool {
        self.in_edges[node.0].is_empty()
    }

    pub fn sources(&self) -> Vec<NodeId> {
        self.node_ids().filter(|&i| self.is_source(i)).collect()
    }

    pub fn out_neighbours(&self, node: NodeId) -> Vec<NodeId> {
        self.edges()
            .filter(|(from, _, _)| *from == node)
            .map(|(_, to, _)| to)
            .collect()
    }

    /// Every broken model constraint, in node order.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        if !self.source_payoff.is_positive() {
            violations.push(Violation::NonPositiveSourcePayoff {
                value: self.source_payoff.clone(),
            });
        }
        for i in self.node_ids() {
            let name = self.node_name(i).to_string();
            if self.product_sets[i.0].is_empty() {
                violations.push(Violation::EmptyProductSet { node: name.clone() });
            }
            for (p, theta) in self.product_sets[i.0].iter().zip(&self.thresholds[i.0]) {
                if !theta.in_unit_open_closed() {
                    violations.push(Violation::ThresholdOutOfRange {
                        node: name.clone(),
                        product: self.product_name(*p).to_string(),
                        value: theta.clone(),
                    });
                }
            }
            for (j, w) in &self.in_edges[i.0] {
                if *j == i {
                    violations.push(Violation::SelfLoop { node: name.clone() });
                }
                if !w.in_unit_closed() {
                    violations.push(Violation::WeightOutOfRange {
                        from: self.node_name(*j).to_string(),
                        to: name.clone(),
                        weight: w.clone(),
                    });
                }
            }
            if !self.in_edges[i.0].is_empty() {
                let sum: Rational = self.in_edges[i.0].iter().map(|(_, w)| w).sum();
                if sum > Rational::one() {
                    violations.push(Violation::WeightSumExceeded { node: name, sum });
                }
            }
        }
        violations
    }

    pub fn check_strategy(&self, s: &JointStrategy) -> Result<(), NetworkError> {
        if s.len() != self.nodes.len() {
            return Err(NetworkError::InvalidStrategy(format!(
                "expected {} choices, got {}",
                self.nodes.len(),
                s.len()
            )));
        }
        for i in self.node_ids() {
            let p = s.get(i);
            if p.0 >= self.products.len() || !self.offers(i, p) {
                return Err(NetworkError::InvalidStrategy(format!(
                    "node {} cannot choose {}",
                    self.node_name(i),
                    self.products.get(p.0).map(String::as_str).unwrap_or("<out of range>")
                )));
            }
        }
        Ok(())
    }

    /// Payoff of `node` under `s`: `c0` for source nodes, otherwise the
    /// accumulated weight of neighbours sharing `node`'s choice minus the
    /// threshold of that choice.
    pub fn payoff(&self, s: &JointStrategy, node: NodeId) -> Result<Rational, NetworkError> {
        if node.0 >= self.nodes.len() {
            return Err(NetworkError::UnknownNode(format!("#{}", node.0)));
        }
        self.check_strategy(s)?;
        Ok(self.payoff_unchecked(s, node, s.get(node)))
    }

    /// Payoff `node` would get by playing `choice` against the rest of `s`.
    pub(crate) fn payoff_unchecked(&self, s: &JointStrategy, node: NodeId, choice: ProductId) -> Rational {
        if self.is_source(node) {
            return self.source_payoff.clone();
        }
        let mut total = Rational::zero();
        for (j, w) in &self.in_edges[node.0] {
            if s.get(*j) == choice {
                total += w;
            }
        }
        let theta = self
            .threshold(node, choice)
            .expect("choice outside the node's product set");
        total - theta
    }

    /// Payoff of `node` if it played `choice` while everyone else keeps `s`.
    pub fn payoff_if(
        &self,
        s: &JointStrategy,
        node: NodeId,
        choice: ProductId,
    ) -> Result<Rational, NetworkError> {
        self.check_strategy(s)?;
        if !self.offers(node, choice) {
            return Err(NetworkError::ProductAbsent {
                node: self.node_name(node).to_string(),
                product: self.product_name(choice).to_string(),
            });
        }
        Ok(self.payoff_unchecked(s, node, choice))
    }

    pub fn payoffs(&self, s: &JointStrategy) -> Result<Vec<Rational>, NetworkError> {
        self.check_strategy(s)?;
        Ok(self
            .node_ids()
            .map(|i| self.payoff_unchecked(s, i, s.get(i)))
            .collect())
    }

    /// Number of joint strategies, `prod_i |P(i)|`.
    pub fn state_space_size(&self) -> num::BigUint {
        self.product_sets
            .iter()
            .fold(num::BigUint::from(1u32), |acc, s| acc * num::BigUint::from(s.len()))
    }

    /// Adds `product` (created in the universe if new) to `node`'s product
    /// set with threshold `theta`.
    pub fn expand(
        &self,
        node: NodeId,
        product: &str,
        theta: Rational,
    ) -> Result<SocialNetwork, NetworkError> {
        self.check_node(node)?;
        if !theta.in_unit_open_closed() {
            return Err(NetworkError::ThresholdOutOfRange(theta));
        }
        let mut next = self.clone();
        let pid = match self.product_index.get(product) {
            Some(&p) => p,
            None => {
                let p = ProductId(next.products.len());
                next.products.push(product.to_string());
                next.product_index.insert(product.to_string(), p);
                p
            }
        };
        match next.product_sets[node.0].binary_search(&pid) {
            Ok(_) => Err(NetworkError::ProductAlreadyPresent {
                node: self.node_name(node).to_string(),
                product: product.to_string(),
            }),
            Err(slot) => {
                next.product_sets[node.0].insert(slot, pid);
                next.thresholds[node.0].insert(slot, theta);
                Ok(next)
            }
        }
    }

    /// Removes `product` from `node`'s product set, dropping its threshold.
    pub fn contract(&self, node: NodeId, product: ProductId) -> Result<SocialNetwork, NetworkError> {
        self.check_node(node)?;
        let name = || self.products.get(product.0).cloned().unwrap_or_default();
        let slot = self.product_sets[node.0]
            .binary_search(&product)
            .map_err(|_| NetworkError::ProductAbsent {
                node: self.node_name(node).to_string(),
                product: name(),
            })?;
        if self.product_sets[node.0].len() == 1 {
            return Err(NetworkError::WouldEmptyProductSet {
                node: self.node_name(node).to_string(),
                product: name(),
            });
        }
        let mut next = self.clone();
        next.product_sets[node.0].remove(slot);
        next.thresholds[node.0].remove(slot);
        Ok(next)
    }

    fn check_node(&self, node: NodeId) -> Result<(), NetworkError> {
        if node.0 < self.nodes.len() {
            Ok(())
        } else {
            Err(NetworkError::UnknownNode(format!("#{}", node.0)))
        }
    }

    /// Canonical `node=product,...` text for `s`, in node order.
    pub fn format_strategy(&self, s: &JointStrategy) -> String {
        self.node_ids()
            .map(|i| format!("{}={}", self.node_name(i), self.product_name(s.get(i))))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses `node=product` pairs separated by commas. Every node must be
    /// assigned exactly once, except that nodes with a singleton product set
    /// may be omitted.
    pub fn parse_strategy(&self, text: &str) -> Result<JointStrategy, NetworkError> {
        let mut choices: Vec<Option<ProductId>> = vec![None; self.nodes.len()];
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (node, product) = part.split_once('=').ok_or_else(|| {
                NetworkError::InvalidStrategy(format!("expected node=product, got {part:?}"))
            })?;
            let i = self.node(node.trim())?;
            let p = self.product(product.trim())?;
            if choices[i.0].replace(p).is_some() {
                return Err(NetworkError::InvalidStrategy(format!(
                    "node {} assigned twice",
                    node.trim()
                )));
            }
        }
        let choices = choices
            .into_iter()
            .enumerate()
            .map(|(i, c)| match c {
                Some(p) => Ok(p),
                None if self.product_sets[i].len() == 1 => Ok(self.product_sets[i][0]),
                None => Err(NetworkError::InvalidStrategy(format!(
                    "node {} has no assigned product",
                    self.nodes[i]
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let s = JointStrategy::new(choices);
        self.check_strategy(&s)?;
        Ok(s)
    }

    /// Strategy from `(node name, product name)` pairs; singleton nodes may
    /// be omitted.
    pub fn strategy(&self, pairs: &[(&str, &str)]) -> Result<JointStrategy, NetworkError> {
        let text = pairs
            .iter()
            .map(|(n, p)| format!("{n}={p}"))
            .collect::<Vec<_>>()
            .join(",");
        self.parse_strategy(&text)
    }

    /// Rebuilds a [`NetworkBuilder`] holding exactly this network.
    pub fn to_builder(&self) -> NetworkBuilder {
        let mut b = NetworkBuilder::new()
            .nodes(self.nodes.iter().cloned())
            .products(self.products.iter().cloned())
            .source_payoff(self.source_payoff.clone());
        for (from, to, w) in self.edges() {
            b = b.edge(self.node_name(from), self.node_name(to), w.clone());
        }
        for i in self.node_ids() {
            b = b.product_set(
                self.node_name(i),
                self.product_sets[i.0].iter().map(|p| self.product_name(*p).to_string()),
            );
            for (p, theta) in self.product_sets[i.0].iter().zip(&self.thresholds[i.0]) {
                b = b.threshold(self.node_name(i), self.product_name(*p), theta.clone());
            }
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::samples;

    #[test]
    fn minimal_network_is_valid() {
        let net = SocialNetwork::builder()
            .node("x")
            .product("t")
            .product_set("x", ["t"])
            .threshold("x", "t", q(1, 2))
            .build()
            .unwrap();
        assert!(net.validate().is_empty());
        assert_eq!(net.sources(), vec![NodeId(0)]);
        assert!(net.neighbours(NodeId(0)).is_empty());
    }

    #[test]
    fn weight_sum_violation() {
        let net = SocialNetwork::builder()
            .nodes(["x", "y", "z"])
            .product("t")
            .edge("x", "z", q(6, 10))
            .edge("y", "z", q(6, 10))
            .product_set("x", ["t"])
            .product_set("y", ["t"])
            .product_set("z", ["t"])
            .uniform_threshold("x", q(1, 2))
            .uniform_threshold("y", q(1, 2))
            .uniform_threshold("z", q(1, 2))
            .build_unvalidated()
            .unwrap();
        let v = net.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].to_string(), "node z: weight sum 6/5 > 1");
        assert!(matches!(
            SocialNetwork::to_builder(&net).build(),
            Err(NetworkError::Invalid(_))
        ));
    }

    #[test]
    fn zero_threshold_violation() {
        let net = SocialNetwork::builder()
            .node("x")
            .product("t")
            .product_set("x", ["t"])
            .threshold("x", "t", q(0, 1))
            .build_unvalidated()
            .unwrap();
        let v = net.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("threshold 0/1 not in (0,1]"));
    }

    #[test]
    fn self_loop_and_empty_set_reported() {
        let net = SocialNetwork::builder()
            .nodes(["x"])
            .product("t")
            .edge("x", "x", q(1, 2))
            .product_set("x", Vec::<String>::new())
            .build_unvalidated()
            .unwrap();
        let v = net.validate();
        assert!(v.contains(&Violation::SelfLoop { node: "x".into() }));
        assert!(v.contains(&Violation::EmptyProductSet { node: "x".into() }));
    }

    #[test]
    fn structural_errors() {
        let missing = SocialNetwork::builder()
            .node("x")
            .product("t")
            .product_set("x", ["t"])
            .build();
        assert!(matches!(missing, Err(NetworkError::MissingThreshold { .. })));
        let unknown = SocialNetwork::builder()
            .node("x")
            .product("t")
            .edge("x", "y", q(1, 2))
            .build();
        assert_eq!(unknown.unwrap_err(), NetworkError::UnknownNode("y".into()));
    }

    #[test]
    fn neighbours_of_triangle_with_sources() {
        let net = samples::triangle_with_sources();
        let one = net.node("1").unwrap();
        let names: Vec<&str> = net.neighbours(one).iter().map(|&j| net.node_name(j)).collect();
        assert_eq!(names, vec!["3", "s4"]);
        let sources: Vec<&str> = net.sources().iter().map(|&j| net.node_name(j)).collect();
        assert_eq!(sources, vec!["s2", "s3", "s4"]);
    }

    #[test]
    fn cycle_has_no_sources() {
        let net = samples::escape_product_cycle();
        assert!(net.sources().is_empty());
    }

    #[test]
    fn payoffs_of_triangle_with_sources() {
        let net = samples::triangle_with_sources();
        let s = net.strategy(&[("1", "t2"), ("2", "t3"), ("3", "t2")]).unwrap();
        let p = |n: &str| net.payoff(&s, net.node(n).unwrap()).unwrap();
        assert_eq!(p("1"), q(2, 10));
        assert_eq!(p("2"), q(1, 10));
        assert_eq!(p("3"), q(1, 10));
        assert_eq!(p("s2"), Rational::one());
        assert_eq!(p("s4"), Rational::one());
    }

    #[test]
    fn unmatched_choice_pays_minus_threshold() {
        let net = samples::triangle_with_sources();
        let s = net.strategy(&[("1", "t1"), ("2", "t3"), ("3", "t2")]).unwrap();
        assert_eq!(net.payoff(&s, net.node("1").unwrap()).unwrap(), q(-3, 10));
    }

    #[test]
    fn payoff_rejects_invalid_strategy() {
        let net = samples::triangle_with_sources();
        let bad = JointStrategy::new(vec![ProductId(0); net.node_count()]);
        assert!(matches!(
            net.payoff(&bad, NodeId(0)),
            Err(NetworkError::InvalidStrategy(_))
        ));
    }

    #[test]
    fn expand_adds_product_and_contract_inverts() {
        let base = samples::no_equilibrium_cycle();
        let one = base.node("1").unwrap();
        let expanded = base.expand(one, "t4", q(1, 20)).unwrap();
        let names: Vec<&str> = expanded
            .product_set(one)
            .iter()
            .map(|&p| expanded.product_name(p))
            .collect();
        assert_eq!(names, vec!["t1", "t2", "t4"]);
        let t4 = expanded.product("t4").unwrap();
        let back = expanded.contract(one, t4).unwrap();
        assert_eq!(back.product_set(one), base.product_set(one));
        assert_eq!(back.thresholds_of(one), base.thresholds_of(one));
    }

    #[test]
    fn expand_fragile_node_gives_no_equilibrium_cycle() {
        let fragile = samples::fragile_cycle();
        let one = fragile.node("1").unwrap();
        let expanded = fragile.expand(one, "t1", q(3, 10)).unwrap();
        let reference = samples::no_equilibrium_cycle();
        for i in reference.node_ids() {
            let names = |net: &SocialNetwork| -> Vec<(String, Rational)> {
                let id = net.node(reference.node_name(i)).unwrap();
                net.product_set(id)
                    .iter()
                    .zip(net.thresholds_of(id))
                    .map(|(p, t)| (net.product_name(*p).to_string(), t.clone()))
                    .collect()
            };
            assert_eq!(names(&expanded), names(&reference));
        }
    }

    #[test]
    fn contract_inefficient_node() {
        let net = samples::inefficient_network(q(3, 10), q(1, 10));
        let three = net.node("3").unwrap();
        let next = net.contract(three, net.product("t1").unwrap()).unwrap();
        assert_eq!(next.product_set(three), &[net.product("t2").unwrap()]);
    }

    #[test]
    fn expand_contract_errors() {
        let net = samples::no_equilibrium_cycle();
        let one = net.node("1").unwrap();
        assert!(matches!(
            net.expand(one, "t1", q(1, 2)),
            Err(NetworkError::ProductAlreadyPresent { .. })
        ));
        assert!(matches!(
            net.expand(one, "t9", q(0, 1)),
            Err(NetworkError::ThresholdOutOfRange(_))
        ));
        assert!(matches!(
            net.contract(one, net.product("t3").unwrap()),
            Err(NetworkError::ProductAbsent { .. })
        ));
        let single = samples::fragile_cycle();
        let one = single.node("1").unwrap();
        assert!(matches!(
            single.contract(one, single.product("t2").unwrap()),
            Err(NetworkError::WouldEmptyProductSet { .. })
        ));
    }

    #[test]
    fn strategy_text_round_trip() {
        let net = samples::triangle_with_sources();
        let s = net.strategy(&[("1", "t2"), ("2", "t3"), ("3", "t2")]).unwrap();
        let text = net.format_strategy(&s);
        assert_eq!(net.parse_strategy(&text).unwrap(), s);
        assert!(net.parse_strategy("1=t2").is_err());
        assert!(net.parse_strategy("1=t3,2=t3,3=t2").is_err());
    }
}
