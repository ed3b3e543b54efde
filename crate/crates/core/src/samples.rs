//! Small reference networks with known equilibrium behaviour.
//!
//! Every triangle here uses nodes `"1"`, `"2"`, `"3"` with edges
//! `1 -> 2 -> 3 -> 1`, so each node's payoff depends on its predecessor.

use crate::network::SocialNetwork;
use crate::rational::{q, Rational};

/// Triangle 1 -> 2 -> 3 -> 1 (weight 1/2) fed by three single-product
/// sources: `s4` ({t4}) -> 1, `s3` ({t3}) -> 2, `s2` ({t2}) -> 3 (weight
/// 2/5 for the latter two, 1/2 for `s4`). All thresholds 3/10.
pub fn triangle_with_sources() -> SocialNetwork {
    let theta = q(3, 10);
    SocialNetwork::builder()
        .nodes(["1", "2", "3", "s2", "s3", "s4"])
        .products(["t1", "t2", "t3", "t4"])
        .edge("s4", "1", q(5, 10))
        .edge("1", "2", q(5, 10))
        .edge("2", "3", q(5, 10))
        .edge("3", "1", q(5, 10))
        .edge("s2", "3", q(4, 10))
        .edge("s3", "2", q(4, 10))
        .product_set("1", ["t1", "t2", "t4"])
        .product_set("2", ["t1", "t3"])
        .product_set("3", ["t2", "t3"])
        .product_set("s2", ["t2"])
        .product_set("s3", ["t3"])
        .product_set("s4", ["t4"])
        .uniform_threshold("1", theta.clone())
        .uniform_threshold("2", theta.clone())
        .uniform_threshold("3", theta.clone())
        .uniform_threshold("s2", theta.clone())
        .uniform_threshold("s3", theta.clone())
        .uniform_threshold("s4", theta)
        .build()
        .expect("reference network is valid")
}

fn cycle_builder(w: &Rational) -> crate::network::NetworkBuilder {
    SocialNetwork::builder()
        .nodes(["1", "2", "3"])
        .edge("1", "2", w.clone())
        .edge("2", "3", w.clone())
        .edge("3", "1", w.clone())
}

/// Three-node cycle where node `i` chooses between `t_i` (threshold 3/10)
/// and `t_{i+1}` (threshold 1/10), every edge weight 3/10. Has no Nash
/// equilibrium.
pub fn no_equilibrium_cycle() -> SocialNetwork {
    let (r1, r2) = (q(3, 10), q(1, 10));
    cycle_builder(&q(3, 10))
        .products(["t1", "t2", "t3"])
        .product_set("1", ["t1", "t2"])
        .product_set("2", ["t2", "t3"])
        .product_set("3", ["t3", "t1"])
        .threshold("1", "t1", r1.clone())
        .threshold("2", "t2", r1.clone())
        .threshold("3", "t3", r1)
        .threshold("1", "t2", r2.clone())
        .threshold("2", "t3", r2.clone())
        .threshold("3", "t1", r2)
        .build()
        .expect("reference network is valid")
}

/// [`no_equilibrium_cycle`] with a shared product `t4` (threshold 7/20)
/// offered to every node: `(t4,t4,t4)` is an equilibrium, yet the game is
/// not weakly acyclic.
pub fn escape_product_cycle() -> SocialNetwork {
    let base = no_equilibrium_cycle();
    let theta4 = q(7, 20);
    let mut net = base;
    for name in ["1", "2", "3"] {
        let node = net.node(name).unwrap();
        net = net.expand(node, "t4", theta4.clone()).unwrap();
    }
    net
}

/// Four-node choice-trap network: adding `t2` to node 2 is meant to drag the
/// equilibrium `(t1,t1,t2,t2)` down to `(t4,t4,t3,t3)`.
pub fn vulnerable_candidate() -> SocialNetwork {
    SocialNetwork::builder()
        .nodes(["1", "2", "3", "4"])
        .products(["t1", "t2", "t3", "t4"])
        .edge("1", "2", q(0, 1))
        .edge("2", "1", q(2, 10))
        .edge("4", "2", q(3, 10))
        .edge("1", "3", q(2, 10))
        .edge("3", "4", q(2, 10))
        .edge("4", "3", q(0, 1))
        .product_set("1", ["t1", "t3", "t4"])
        .product_set("2", ["t1", "t4"])
        .product_set("3", ["t2", "t3"])
        .product_set("4", ["t2", "t3"])
        .threshold("1", "t1", q(2, 10))
        .threshold("1", "t3", q(1, 10))
        .threshold("1", "t4", q(3, 10))
        .threshold("2", "t1", q(1, 10))
        .threshold("2", "t4", q(2, 10))
        .threshold("3", "t2", q(1, 10))
        .threshold("3", "t3", q(2, 10))
        .threshold("4", "t2", q(1, 10))
        .threshold("4", "t3", q(2, 10))
        .build()
        .expect("reference network is valid")
}

/// Threshold of `t2` when it is added to node 2 of [`vulnerable_candidate`].
pub fn vulnerable_candidate_theta() -> Rational {
    q(3, 10)
}

/// [`no_equilibrium_cycle`] with `t1` missing from node 1. Has the
/// equilibrium `(t2,t2,t1)`; adding `t1` back (threshold 3/10) destroys all
/// equilibria.
pub fn fragile_cycle() -> SocialNetwork {
    let (r1, r2) = (q(3, 10), q(1, 10));
    cycle_builder(&q(3, 10))
        .products(["t1", "t2", "t3"])
        .product_set("1", ["t2"])
        .product_set("2", ["t2", "t3"])
        .product_set("3", ["t3", "t1"])
        .threshold("2", "t2", r1.clone())
        .threshold("3", "t3", r1)
        .threshold("1", "t2", r2.clone())
        .threshold("2", "t3", r2.clone())
        .threshold("3", "t1", r2)
        .build()
        .expect("reference network is valid")
}

/// Four nodes, every edge weight `w`, every threshold `theta`:
/// 1 and 2 only offer `t2`, 3 and 4 offer `{t1, t2}`. In-neighbours:
/// 1 <- {2,3}, 2 <- {1,3}, 3 <- {2,4}, 4 <- {2,3}.
pub fn inefficient_network(w: Rational, theta: Rational) -> SocialNetwork {
    SocialNetwork::builder()
        .nodes(["1", "2", "3", "4"])
        .products(["t1", "t2"])
        .edge("2", "1", w.clone())
        .edge("3", "1", w.clone())
        .edge("1", "2", w.clone())
        .edge("3", "2", w.clone())
        .edge("2", "3", w.clone())
        .edge("4", "3", w.clone())
        .edge("2", "4", w.clone())
        .edge("3", "4", w)
        .product_set("1", ["t2"])
        .product_set("2", ["t2"])
        .product_set("3", ["t1", "t2"])
        .product_set("4", ["t1", "t2"])
        .uniform_threshold("1", theta.clone())
        .uniform_threshold("2", theta.clone())
        .uniform_threshold("3", theta.clone())
        .uniform_threshold("4", theta)
        .build()
        .expect("reference network is valid")
}

/// [`no_equilibrium_cycle`] with `t4` (threshold 1/20) added to node 1.
/// `(t4,t3,t3)` is an equilibrium; removing `t4` again leaves no
/// equilibrium at all.
pub fn unsafe_cycle() -> SocialNetwork {
    let base = no_equilibrium_cycle();
    let one = base.node("1").unwrap();
    base.expand(one, "t4", q(1, 20)).unwrap()
}
