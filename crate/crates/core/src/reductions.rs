//! PARTITION instances and the networks built from them: equilibrium-free
//! cycles and gadgets, the equilibrium-existence reduction (with and without
//! source nodes) and the weak-acyclicity reduction (with and without source
//! nodes).

use std::collections::BTreeMap;

use num::{BigInt, One};
use thiserror::Error;

use crate::network::{JointStrategy, NetworkBuilder, NetworkError, NodeId, SocialNetwork};
use crate::rational::{q, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("a PARTITION instance needs at least one value")]
    Empty,
    #[error("PARTITION value {0} is not positive")]
    NonPositive(Rational),
    #[error("instance is not normalised: values sum to {0}")]
    NotNormalized(Rational),
    #[error("exhaustive subset check is limited to 20 values, got {0}")]
    TooLarge(usize),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Positive rationals `a_1..a_n`; the question is whether some subset sums
/// to exactly half the total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionInstance {
    values: Vec<Rational>,
}

impl PartitionInstance {
    pub fn new(values: Vec<Rational>) -> Result<Self, ReductionError> {
        if values.is_empty() {
            return Err(ReductionError::Empty);
        }
        if let Some(bad) = values.iter().find(|v| !v.is_positive()) {
            return Err(ReductionError::NonPositive(bad.clone()));
        }
        Ok(PartitionInstance { values })
    }

    /// Parses a comma- or whitespace-separated list of rationals.
    pub fn parse(text: &str) -> Result<Self, ReductionError> {
        let values = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<Rational>()
                    .map_err(|e| ReductionError::InvalidParameters(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(values)
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> Rational {
        self.values.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.sum() == Rational::one()
    }

    /// Divides every value by the total so the values sum to 1.
    pub fn normalize(&self) -> PartitionInstance {
        let total = self.sum();
        PartitionInstance {
            values: self.values.iter().map(|v| v / &total).collect(),
        }
    }

    fn require_normalized(&self) -> Result<(), ReductionError> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(ReductionError::NotNormalized(self.sum()))
        }
    }

    /// Least subset (as a bitmask over indices, ascending mask order) whose
    /// sum is half the total, by trying all `2^n` subsets.
    pub fn solution(&self) -> Result<Option<Vec<usize>>, ReductionError> {
        if self.len() > 20 {
            return Err(ReductionError::TooLarge(self.len()));
        }
        let half = self.sum() / Rational::from_integer(2);
        for mask in 0u32..(1 << self.len()) {
            let sum: Rational = subset(mask, self.len()).map(|i| self.values[i].clone()).sum();
            if sum == half {
                return Ok(Some(subset(mask, self.len()).collect()));
            }
        }
        Ok(None)
    }
}

fn subset(mask: u32, n: usize) -> impl Iterator<Item = usize> {
    (0..n).filter(move |i| mask >> i & 1 == 1)
}

/// `1 / (2 * r_1 * ... * r_n)` where `r_i` is the reduced denominator of
/// `a_i`; every `a_i` and `1/2` is an integer multiple of it.
pub fn compute_tau(p: &PartitionInstance) -> Rational {
    let product = p
        .values()
        .iter()
        .fold(BigInt::one(), |acc, v| acc * v.denom());
    Rational::from_bigints(BigInt::one(), product * 2)
}

/// Checks over all subsets that no subset sum lies strictly within `tau`
/// of `1/2` without equalling it.
pub fn check_gap_property(p: &PartitionInstance, tau: &Rational) -> Result<bool, ReductionError> {
    p.require_normalized()?;
    if p.len() > 20 {
        return Err(ReductionError::TooLarge(p.len()));
    }
    let half = q(1, 2);
    let low = &half - tau;
    let high = &half + tau;
    for mask in 0u32..(1 << p.len()) {
        let sum: Rational = subset(mask, p.len()).map(|i| p.values()[i].clone()).sum();
        if (sum < half && sum > low) || (sum > half && sum < high) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A generated network together with the names the construction uses for
/// its nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionNetwork {
    pub network: SocialNetwork,
    pub roles: BTreeMap<String, NodeId>,
}

impl ReductionNetwork {
    fn from_network(network: SocialNetwork) -> Self {
        let roles = network
            .node_ids()
            .map(|i| (network.node_name(i).to_string(), i))
            .collect();
        ReductionNetwork { network, roles }
    }

    /// Node playing the named role. Panics on an unknown role.
    pub fn role(&self, name: &str) -> NodeId {
        *self
            .roles
            .get(name)
            .unwrap_or_else(|| panic!("no node with role {name:?}"))
    }
}

fn invalid(msg: impl Into<String>) -> ReductionError {
    ReductionError::InvalidParameters(msg.into())
}

/// `n`-node cycle `1 -> 2 -> ... -> n -> 1`, each edge weight `w`; node `i`
/// offers `t_i` (threshold `r1`) and `t_{i+1}` (threshold `r2`, wrapping to
/// `t_1`). A node's own product is a best response exactly when its
/// predecessor plays that product, so equilibria alternate between "own"
/// and "next" around the cycle: none exist for odd `n`, two for even `n`.
pub fn gen_no_ne_cycle(n: usize, r1: &Rational, r2: &Rational, w: &Rational) -> Result<SocialNetwork, ReductionError> {
    if n < 3 {
        return Err(invalid(format!("cycle length {n} < 3")));
    }
    if !(r2.is_positive() && r2 < r1 && r1.in_unit_open_closed()) {
        return Err(invalid("need 0 < r2 < r1 <= 1"));
    }
    if !(*w > r1 - r2 && w.in_unit_closed()) {
        return Err(invalid("need r1 - r2 < w <= 1"));
    }
    let product = |i: usize| format!("t{}", i % n + 1);
    let mut b = SocialNetwork::builder()
        .nodes((1..=n).map(|i| i.to_string()))
        .products((0..n).map(product));
    for i in 0..n {
        let node = (i + 1).to_string();
        b = b
            .edge(node.clone(), ((i + 1) % n + 1).to_string(), w.clone())
            .product_set(node.clone(), [product(i), product(i + 1)])
            .threshold(node.clone(), product(i), r1.clone())
            .threshold(node, product(i + 1), r2.clone());
    }
    Ok(b.build()?)
}

/// Triangle gadget parameters: uniform threshold `theta`, source edge
/// weight `w1`, triangle edge weight `w2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetParams {
    pub theta: Rational,
    pub w1: Rational,
    pub w2: Rational,
}

impl Default for GadgetParams {
    fn default() -> Self {
        GadgetParams {
            theta: q(1, 10),
            w1: q(2, 10),
            w2: q(3, 10),
        }
    }
}

impl GadgetParams {
    fn check(&self) -> Result<(), ReductionError> {
        if !(self.theta.is_positive() && self.theta < self.w1 && self.w1 < self.w2) {
            return Err(invalid("need 0 < theta < w1 < w2"));
        }
        if &self.w1 + &self.w2 > Rational::one() {
            return Err(invalid("need w1 + w2 <= 1"));
        }
        Ok(())
    }
}

/// Which occurrences of `t1` in the gadget become `t1'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GadgetVariant {
    /// No renaming: no Nash equilibrium.
    Plain,
    /// Only the `{t1}` source offers `t1'` instead; the triangle can settle
    /// at `(t2, t3, t3)`.
    SourceRenamed,
    /// `t1` replaced by `t1'` everywhere; isomorphic to [`Self::Plain`].
    FullyRenamed,
}

/// Twin edges `i <-> i'` of weight `weight`; twins that match earn
/// `weight - theta > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwinParams {
    pub weight: Rational,
    pub theta: Rational,
}

impl Default for TwinParams {
    fn default() -> Self {
        TwinParams {
            weight: q(1, 2),
            theta: q(1, 4),
        }
    }
}

impl TwinParams {
    fn check(&self) -> Result<(), ReductionError> {
        if !(self.theta.is_positive() && self.theta < self.weight && self.weight.in_unit_closed()) {
            return Err(invalid("twins need 0 < theta < weight <= 1"));
        }
        Ok(())
    }
}

/// Adds a triangle `p1 -> p2 -> p3 -> p1` (weight `w2`) with singleton
/// sources `psrc_t2` ({t2}) -> `p3` and `psrc_t3` ({t3}) -> `p2` (weight `w1`), and an edge
/// `t1_feed -> p1` (weight `w1`). `t1` names the product the triangle uses
/// in place of `t1`. With `twins`, each singleton source gets a twin.
fn add_triangle(
    mut b: NetworkBuilder,
    prefix: &str,
    t1: &str,
    t1_feed: &str,
    params: &GadgetParams,
    twins: Option<&TwinParams>,
) -> NetworkBuilder {
    let node = |k: &str| format!("{prefix}{k}");
    let (n1, n2, n3) = (node("1"), node("2"), node("3"));
    let (s2, s3) = (node("src_t2"), node("src_t3"));
    b = b
        .nodes([n1.clone(), n2.clone(), n3.clone(), s2.clone(), s3.clone()])
        .edge(t1_feed, n1.clone(), params.w1.clone())
        .edge(n1.clone(), n2.clone(), params.w2.clone())
        .edge(n2.clone(), n3.clone(), params.w2.clone())
        .edge(n3.clone(), n1.clone(), params.w2.clone())
        .edge(s2.clone(), n3.clone(), params.w1.clone())
        .edge(s3.clone(), n2.clone(), params.w1.clone())
        .product_set(n1.clone(), [t1, "t2"])
        .uniform_threshold(n1, params.theta.clone())
        .product_set(n2.clone(), [t1, "t3"])
        .uniform_threshold(n2, params.theta.clone())
        .product_set(n3.clone(), ["t2", "t3"])
        .uniform_threshold(n3, params.theta.clone());
    for (source, product) in [(s2, "t2"), (s3, "t3")] {
        b = add_singleton(b, &source, product, &params.theta, twins);
    }
    b
}

fn add_singleton(
    mut b: NetworkBuilder,
    name: &str,
    product: &str,
    theta: &Rational,
    twins: Option<&TwinParams>,
) -> NetworkBuilder {
    match twins {
        None => b
            .product_set(name, [product])
            .uniform_threshold(name, theta.clone()),
        Some(t) => {
            let twin = format!("{name}'");
            b = b.node(twin.clone());
            for n in [name, twin.as_str()] {
                b = b.product_set(n, [product]).uniform_threshold(n, t.theta.clone());
            }
            b.edge(name, twin.clone(), t.weight.clone())
                .edge(twin, name, t.weight.clone())
        }
    }
}

/// The six-node gadget: triangle `1 -> 2 -> 3 -> 1` (weight `w2`) fed by
/// sources `src_t1` ({t1}) -> 1, `src_t3` ({t3}) -> 2, `src_t2` ({t2}) -> 3
/// (weight `w1`). Node 1 offers {t1,t2}, node 2 {t1,t3}, node 3 {t2,t3}.
pub fn gen_gadget(params: &GadgetParams, variant: GadgetVariant) -> Result<ReductionNetwork, ReductionError> {
    params.check()?;
    let (triangle_t1, source_t1) = match variant {
        GadgetVariant::Plain => ("t1", "t1"),
        GadgetVariant::SourceRenamed => ("t1", "t1'"),
        GadgetVariant::FullyRenamed => ("t1'", "t1'"),
    };
    let mut products = vec![triangle_t1];
    if source_t1 != triangle_t1 {
        products.push(source_t1);
    }
    products.extend(["t2", "t3"]);
    let b = SocialNetwork::builder().products(products).node("src_t1");
    let b = add_singleton(b, "src_t1", source_t1, &params.theta, None);
    let b = add_triangle(b, "", triangle_t1, "src_t1", params, None);
    Ok(ReductionNetwork::from_network(b.build()?))
}

/// Equilibrium-existence reduction. Nodes `1..n` offer {t1,t1'} and feed
/// `a` and `b` with weight `a_i` each; `a` and `b` offer {t1,t1'} at
/// threshold 1/2. Node `a` stands in for the `{t1}` source of gadget copy
/// `u` (nodes `u1..u3`, `usrc_t2`, `usrc_t3`); `b` stands in for the `{t1'}` source
/// of copy `v`, in which `t1` is renamed `t1'`. The game has a Nash
/// equilibrium iff the instance has a solution.
pub fn gen_partition_ne_network(
    p: &PartitionInstance,
    gadget: &GadgetParams,
) -> Result<ReductionNetwork, ReductionError> {
    partition_network(p, gadget, None)
}

/// [`gen_partition_ne_network`] with every node `i` twinned with `i'` and
/// every singleton source twinned, so that no node is a source.
pub fn gen_partition_no_source(
    p: &PartitionInstance,
    gadget: &GadgetParams,
    twins: &TwinParams,
) -> Result<ReductionNetwork, ReductionError> {
    twins.check()?;
    partition_network(p, gadget, Some(twins))
}

fn partition_network(
    p: &PartitionInstance,
    gadget: &GadgetParams,
    twins: Option<&TwinParams>,
) -> Result<ReductionNetwork, ReductionError> {
    p.require_normalized()?;
    gadget.check()?;
    let half = q(1, 2);
    let pair = ["t1", "t1'"];
    let mut b = SocialNetwork::builder().products(["t1", "t1'", "t2", "t3"]);
    b = add_layer(b, p, &pair, twins, &half);
    for hub in ["a", "b"] {
        b = b
            .node(hub)
            .product_set(hub, pair)
            .uniform_threshold(hub, half.clone());
        for i in 1..=p.len() {
            b = b.edge(i.to_string(), hub, p.values()[i - 1].clone());
        }
    }
    b = add_triangle(b, "u", "t1", "a", gadget, twins);
    b = add_triangle(b, "v", "t1'", "b", gadget, twins);
    Ok(ReductionNetwork::from_network(b.build()?))
}

/// Nodes `1..n` over `products` (and twins `i'` when requested) at
/// threshold `theta`, or the twin threshold when twinned.
fn add_layer(
    mut b: NetworkBuilder,
    p: &PartitionInstance,
    products: &[&str; 2],
    twins: Option<&TwinParams>,
    theta: &Rational,
) -> NetworkBuilder {
    for i in 1..=p.len() {
        let name = i.to_string();
        b = b.node(name.clone());
        match twins {
            None => {
                b = b
                    .product_set(name.clone(), *products)
                    .uniform_threshold(name, theta.clone());
            }
            Some(t) => {
                let twin = format!("{i}'");
                b = b.node(twin.clone());
                for n in [&name, &twin] {
                    b = b
                        .product_set(n.clone(), *products)
                        .uniform_threshold(n.clone(), t.theta.clone());
                }
                b = b
                    .edge(name.clone(), twin.clone(), t.weight.clone())
                    .edge(twin, name, t.weight.clone());
            }
        }
    }
    b
}

/// Weak-acyclicity reduction constants: `theta1 < w1 < w2` for the
/// `c, d, e` triangle, and the threshold of the escape products `t4` (at
/// `a`) and `t5` (at `b`), which must lie in `(0, tau)`; `None` means
/// `tau / 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaParams {
    pub theta1: Rational,
    pub w1: Rational,
    pub w2: Rational,
    pub escape_theta: Option<Rational>,
}

impl Default for WaParams {
    fn default() -> Self {
        WaParams {
            theta1: q(1, 10),
            w1: q(2, 10),
            w2: q(3, 10),
            escape_theta: None,
        }
    }
}

/// Nodes `1..n` ({t1,t2}) feed `a` ({t1,t4}) and `b` ({t2,t5}) with weight
/// `a_i`. Then `a -> c`, `b -> d`, `g -> e` at `w1` and the triangle
/// `c -> e -> d -> c` at `w2`, with `c` {t1,t2}, `d` {t2,t3}, `e` {t1,t3},
/// `g` {t3}. The game is weakly acyclic iff the instance has no solution.
pub fn gen_wa_network(p: &PartitionInstance, params: &WaParams) -> Result<ReductionNetwork, ReductionError> {
    wa_network(p, params, None)
}

/// [`gen_wa_network`] with `i <-> i'` twins ({t1,t2}) and `g <-> g'` ({t3}),
/// leaving no source nodes.
pub fn gen_wa_no_source(
    p: &PartitionInstance,
    params: &WaParams,
    twins: &TwinParams,
) -> Result<ReductionNetwork, ReductionError> {
    twins.check()?;
    wa_network(p, params, Some(twins))
}

fn wa_network(
    p: &PartitionInstance,
    params: &WaParams,
    twins: Option<&TwinParams>,
) -> Result<ReductionNetwork, ReductionError> {
    p.require_normalized()?;
    let WaParams { theta1, w1, w2, .. } = params;
    if !(theta1.is_positive() && theta1 < w1 && w1 < w2) {
        return Err(invalid("need 0 < theta1 < w1 < w2"));
    }
    if w1 + w2 > Rational::one() {
        return Err(invalid("need w1 + w2 <= 1"));
    }
    let tau = compute_tau(p);
    let escape = params
        .escape_theta
        .clone()
        .unwrap_or_else(|| &tau / Rational::from_integer(2));
    if !(escape.is_positive() && escape < tau) {
        return Err(invalid(format!("escape threshold {escape} must lie in (0, {tau})")));
    }
    let half = q(1, 2);
    let mut b = SocialNetwork::builder().products(["t1", "t2", "t3", "t4", "t5"]);
    b = add_layer(b, p, &["t1", "t2"], twins, &half);
    b = b
        .nodes(["a", "b", "c", "d", "e", "g"])
        .product_set("a", ["t1", "t4"])
        .threshold("a", "t1", half.clone())
        .threshold("a", "t4", escape.clone())
        .product_set("b", ["t2", "t5"])
        .threshold("b", "t2", half.clone())
        .threshold("b", "t5", escape)
        .product_set("c", ["t1", "t2"])
        .uniform_threshold("c", theta1.clone())
        .product_set("d", ["t2", "t3"])
        .uniform_threshold("d", theta1.clone())
        .product_set("e", ["t1", "t3"])
        .uniform_threshold("e", theta1.clone())
        .edge("a", "c", w1.clone())
        .edge("b", "d", w1.clone())
        .edge("g", "e", w1.clone())
        .edge("c", "e", w2.clone())
        .edge("e", "d", w2.clone())
        .edge("d", "c", w2.clone());
    b = add_singleton(b, "g", "t3", theta1, twins);
    for i in 1..=p.len() {
        b = b
            .edge(i.to_string(), "a", p.values()[i - 1].clone())
            .edge(i.to_string(), "b", p.values()[i - 1].clone());
    }
    Ok(ReductionNetwork::from_network(b.build()?))
}

/// Scheduler order `1, 1', ..., n, n', g, g', a, b, c, e, d` for a network
/// from [`gen_wa_network`] or [`gen_wa_no_source`] (primed nodes only when
/// present).
pub fn wa_schedule(rn: &ReductionNetwork) -> Vec<NodeId> {
    let mut order = Vec::new();
    let mut i = 1;
    while let Some(&node) = rn.roles.get(&i.to_string()) {
        order.push(node);
        if let Some(&twin) = rn.roles.get(&format!("{i}'")) {
            order.push(twin);
        }
        i += 1;
    }
    for name in ["g", "g'", "a", "b", "c", "e", "d"] {
        if let Some(&node) = rn.roles.get(name) {
            order.push(node);
        }
    }
    order
}

/// The start from which no finite improvement path exists when `half` (a
/// solution subset, 0-based indices) splits the instance: nodes in `half`
/// and `a`, `c` play t1; the other nodes and `b`, `d` play t2; `e`, `g`
/// play t3. Twins copy their partner.
pub fn wa_trap_start(rn: &ReductionNetwork, half: &[usize]) -> Result<JointStrategy, ReductionError> {
    let net = &rn.network;
    let t1 = net.product("t1")?;
    let t2 = net.product("t2")?;
    let t3 = net.product("t3")?;
    let mut choices = vec![t1; net.node_count()];
    let mut i = 1;
    while let Some(&node) = rn.roles.get(&i.to_string()) {
        let pick = if half.contains(&(i - 1)) { t1 } else { t2 };
        choices[node.index()] = pick;
        if let Some(&twin) = rn.roles.get(&format!("{i}'")) {
            choices[twin.index()] = pick;
        }
        i += 1;
    }
    for (name, pick) in [("a", t1), ("c", t1), ("b", t2), ("d", t2), ("e", t3), ("g", t3), ("g'", t3)] {
        if let Some(&node) = rn.roles.get(name) {
            choices[node.index()] = pick;
        }
    }
    let s = JointStrategy::new(choices);
    net.check_strategy(&s)?;
    Ok(s)
}
