//! Index-level view of the game induced by a network, for the exhaustive
//! algorithms.
//!
//! All weights and thresholds are multiplied by the least common
//! denominator, which turns payoff comparisons into exact integer
//! comparisons. When the scaled values fit comfortably in `i64` that type is
//! used; otherwise the game falls back to `BigInt`. Joint strategies are
//! vectors of strategy indices (position in each node's sorted product set)
//! and are numbered in mixed radix with node 0 most significant, so state
//! numbers follow the lexicographic order of joint strategies.

use std::ops::AddAssign;

use num::bigint::BigInt;
use num::{Integer, One, Signed, ToPrimitive, Zero};

use crate::error::AnalysisError;
use crate::network::{JointStrategy, NodeId, ProductId, SocialNetwork};

/// Default bound on the number of joint strategies explored exhaustively.
pub const DEFAULT_STATE_CAP: u64 = 1_000_000;

pub(crate) trait Scalar: Clone + Ord + Zero + Send + Sync + for<'a> AddAssign<&'a Self> {}

impl Scalar for i64 {}
impl Scalar for BigInt {}

#[derive(Debug, Clone)]
struct Link<V> {
    from: usize,
    weight: V,
}

#[derive(Debug, Clone)]
pub(crate) struct ScaledGame<V> {
    strategies: Vec<Vec<ProductId>>,
    source: Vec<bool>,
    links: Vec<Vec<Link<V>>>,
    thresholds: Vec<Vec<V>>,
}

impl<V: Scalar> ScaledGame<V> {
    /// Scaled weight of `i`'s neighbours that play the product of strategy
    /// index `k`.
    fn gain(&self, i: usize, k: usize, choice: &[usize]) -> V {
        let product = self.strategies[i][k];
        let mut total = V::zero();
        for link in &self.links[i] {
            if self.strategies[link.from][choice[link.from]] == product {
                total += &link.weight;
            }
        }
        total
    }

    fn better_than(&self, i: usize, k: usize, other: usize, choice: &[usize]) -> bool {
        // gain(k) - theta(k) > gain(other) - theta(other), rearranged to additions only
        let mut lhs = self.gain(i, k, choice);
        lhs += &self.thresholds[i][other];
        let mut rhs = self.gain(i, other, choice);
        rhs += &self.thresholds[i][k];
        lhs > rhs
    }

    fn is_best_response(&self, i: usize, choice: &[usize]) -> bool {
        if self.source[i] {
            return true;
        }
        let current = choice[i];
        (0..self.strategies[i].len()).all(|k| k == current || !self.better_than(i, k, current, choice))
    }

    fn better_responses(&self, i: usize, choice: &[usize], out: &mut Vec<usize>) {
        out.clear();
        if self.source[i] {
            return;
        }
        let current = choice[i];
        out.extend((0..self.strategies[i].len()).filter(|&k| k != current && self.better_than(i, k, current, choice)));
    }

    fn best_responses(&self, i: usize, choice: &[usize], out: &mut Vec<usize>) {
        out.clear();
        let count = self.strategies[i].len();
        if self.source[i] {
            out.extend(0..count);
            return;
        }
        let mut best = 0;
        for k in 1..count {
            if self.better_than(i, k, best, choice) {
                best = k;
            }
        }
        out.extend((0..count).filter(|&k| k == best || !self.better_than(i, best, k, choice)));
    }
}

#[derive(Debug, Clone)]
pub(crate) enum GameRepr {
    Small(ScaledGame<i64>),
    Big(ScaledGame<BigInt>),
}

macro_rules! dispatch {
    ($self:expr, $g:ident => $body:expr) => {
        match &$self.repr {
            GameRepr::Small($g) => $body,
            GameRepr::Big($g) => $body,
        }
    };
}

/// The strategic game of a network in index form.
#[derive(Debug, Clone)]
pub struct Game {
    repr: GameRepr,
    radix: Vec<usize>,
    strides: Vec<u64>,
    state_count: u64,
}

fn lcm_of_denominators(network: &SocialNetwork) -> BigInt {
    let mut lcm = BigInt::one();
    for (_, _, w) in network.edges() {
        lcm = lcm.lcm(w.denom());
    }
    for i in network.node_ids() {
        for theta in network.thresholds_of(i) {
            lcm = lcm.lcm(theta.denom());
        }
    }
    lcm
}

fn scaled(value: &crate::rational::Rational, lcm: &BigInt) -> BigInt {
    value.numer() * (lcm / value.denom())
}

fn build_scaled<V: Scalar>(network: &SocialNetwork, lcm: &BigInt, convert: impl Fn(BigInt) -> V) -> ScaledGame<V> {
    let strategies: Vec<Vec<ProductId>> = network.node_ids().map(|i| network.product_set(i).to_vec()).collect();
    let source = network.node_ids().map(|i| network.is_source(i)).collect();
    let links = network
        .node_ids()
        .map(|i| {
            network
                .in_edges(i)
                .iter()
                .map(|(j, w)| Link {
                    from: j.0,
                    weight: convert(scaled(w, lcm)),
                })
                .collect()
        })
        .collect();
    let thresholds = network
        .node_ids()
        .map(|i| {
            network
                .thresholds_of(i)
                .iter()
                .map(|t| convert(scaled(t, lcm)))
                .collect()
        })
        .collect();
    ScaledGame {
        strategies,
        source,
        links,
        thresholds,
    }
}

impl Game {
    /// Compiles `network`, refusing state spaces larger than `cap`.
    pub fn new(network: &SocialNetwork, cap: u64) -> Result<Game, AnalysisError> {
        let size = network.state_space_size();
        let state_count = match size.to_u64() {
            Some(n) if n <= cap => n,
            _ => {
                return Err(AnalysisError::StateCapExceeded {
                    states: size.to_string(),
                    cap,
                })
            }
        };
        Ok(Self::compile(network, state_count))
    }

    fn compile(network: &SocialNetwork, state_count: u64) -> Game {
        let lcm = lcm_of_denominators(network);
        // Comparisons add one edge-weight sum and one threshold per side.
        let mut worst = BigInt::zero();
        for i in network.node_ids() {
            let mut sum: BigInt = network.in_edges(i).iter().map(|(_, w)| scaled(w, &lcm).abs()).sum();
            sum += network
                .thresholds_of(i)
                .iter()
                .map(|t| scaled(t, &lcm).abs())
                .max()
                .unwrap_or_default();
            worst = worst.max(sum);
        }
        let repr = if worst < BigInt::from(i64::MAX / 4) {
            GameRepr::Small(build_scaled(network, &lcm, |v| v.to_i64().expect("checked range")))
        } else {
            GameRepr::Big(build_scaled(network, &lcm, |v| v))
        };
        let radix: Vec<usize> = network.node_ids().map(|i| network.product_set(i).len()).collect();
        let mut strides = vec![1u64; radix.len()];
        for k in (0..radix.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1].saturating_mul(radix[k + 1] as u64);
        }
        Game {
            repr,
            radix,
            strides,
            state_count,
        }
    }

    pub fn uses_big_integers(&self) -> bool {
        matches!(self.repr, GameRepr::Big(_))
    }

    pub fn node_count(&self) -> usize {
        self.radix.len()
    }

    pub fn state_count(&self) -> u64 {
        self.state_count
    }

    pub fn radix(&self, node: usize) -> usize {
        self.radix[node]
    }

    pub fn encode(&self, choice: &[usize]) -> u64 {
        choice.iter().zip(&self.strides).map(|(&k, &s)| k as u64 * s).sum()
    }

    pub fn decode_into(&self, mut state: u64, choice: &mut Vec<usize>) {
        choice.clear();
        for (&stride, &radix) in self.strides.iter().zip(&self.radix) {
            let k = state / stride;
            debug_assert!((k as usize) < radix);
            choice.push(k as usize);
            state %= stride;
        }
    }

    pub fn decode(&self, state: u64) -> Vec<usize> {
        let mut choice = Vec::with_capacity(self.radix.len());
        self.decode_into(state, &mut choice);
        choice
    }

    /// State number obtained by switching `node` to strategy index `k`.
    pub fn successor(&self, state: u64, choice: &[usize], node: usize, k: usize) -> u64 {
        state - choice[node] as u64 * self.strides[node] + k as u64 * self.strides[node]
    }

    pub fn product_of(&self, node: usize, k: usize) -> ProductId {
        dispatch!(self, g => g.strategies[node][k])
    }

    pub fn slot_of(&self, node: usize, product: ProductId) -> Option<usize> {
        dispatch!(self, g => g.strategies[node].binary_search(&product).ok())
    }

    pub fn to_strategy(&self, choice: &[usize]) -> JointStrategy {
        JointStrategy::new(choice.iter().enumerate().map(|(i, &k)| self.product_of(i, k)).collect())
    }

    pub fn state_strategy(&self, state: u64) -> JointStrategy {
        self.to_strategy(&self.decode(state))
    }

    pub fn from_strategy(&self, s: &JointStrategy) -> Option<Vec<usize>> {
        if s.len() != self.radix.len() {
            return None;
        }
        (0..s.len()).map(|i| self.slot_of(i, s.get(NodeId(i)))).collect()
    }

    pub fn is_best_response(&self, node: usize, choice: &[usize]) -> bool {
        dispatch!(self, g => g.is_best_response(node, choice))
    }

    pub fn is_nash(&self, choice: &[usize]) -> bool {
        (0..self.radix.len()).all(|i| self.radix[i] == 1 || self.is_best_response(i, choice))
    }

    /// Strictly improving strategy indices for `node`, ascending.
    pub fn better_responses(&self, node: usize, choice: &[usize], out: &mut Vec<usize>) {
        dispatch!(self, g => g.better_responses(node, choice, out))
    }

    /// The argmax set for `node`, ascending.
    pub fn best_responses(&self, node: usize, choice: &[usize], out: &mut Vec<usize>) {
        dispatch!(self, g => g.best_responses(node, choice, out))
    }

    /// All profitable single-node moves `(node, strategy index)` at `choice`,
    /// ordered by node then product.
    pub fn deviations(&self, choice: &[usize], out: &mut Vec<(usize, usize)>) {
        out.clear();
        let mut buf = Vec::new();
        for i in 0..self.radix.len() {
            if self.radix[i] < 2 {
                continue;
            }
            self.better_responses(i, choice, &mut buf);
            out.extend(buf.iter().map(|&k| (i, k)));
        }
    }
}
