//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use gluing::composition::{oslash_with, Composed, Orientation, Origin};
use gluing::embedding::make_noncontracting;
use gluing::metric_graph::copy_scale;
use gluing::{apsp, Metric64, MetricGraph, Points64, Rational, RationalStGraph, STGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Connected s-t graph on 2 to `max_n` vertices with `s = 0`, `t = 1` and
/// lengths `p/q`, `1 <= p <= 5`, `1 <= q <= 3`.
pub fn random_st_graph(rng: &mut ChaCha8Rng, max_n: usize) -> RationalStGraph {
    let n = rng.random_range(2..=max_n);
    let len = |rng: &mut ChaCha8Rng| Rational::new(rng.random_range(1..=5), rng.random_range(1..=3));
    let mut edges = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        seen.insert((u, v));
        edges.push((u, v, len(rng)));
    }
    for _ in 0..rng.random_range(0..=2) {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        let key = (u.min(v), u.max(v));
        if u != v && seen.insert(key) {
            edges.push((key.0, key.1, len(rng)));
        }
    }
    STGraph::new(MetricGraph::new(n, edges).unwrap(), 0, 1).unwrap()
}

/// Finds the edge `(e_a, e_b)` of `a ⊘ b` lying on the copy of `b`-edge `e_b` inside `a`-edge `e_a`.
fn split_edge(ab: &Composed<Rational>, b: &RationalStGraph, e: usize) -> (usize, usize) {
    let ed = &ab.graph.edges()[e];
    for (ea, map) in ab.copies.iter().enumerate() {
        for (eb, be) in b.edges().iter().enumerate() {
            let (x, y) = (map[be.u], map[be.v]);
            if (x, y) == (ed.u, ed.v) || (y, x) == (ed.u, ed.v) {
                return (ea, eb);
            }
        }
    }
    panic!("edge {e} of the product has no source");
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Outer(usize),
    Mid(usize, usize),
    Inner(usize, usize, usize),
}

/// Checks `(a ⊘ b) ⊘ c` and `a ⊘ (b ⊘ c)` for exact isometry under the
/// correspondence given by vertex provenance.
pub fn associative(a: &RationalStGraph, b: &RationalStGraph, c: &RationalStGraph) -> bool {
    let ab = oslash_with(a, b, Orientation::LowToHigh).unwrap();
    let left = oslash_with(&ab.graph, c, Orientation::LowToHigh).unwrap();
    let bc = oslash_with(b, c, Orientation::LowToHigh).unwrap();
    let right = oslash_with(a, &bc.graph, Orientation::LowToHigh).unwrap();
    if left.graph.vertex_count() != right.graph.vertex_count()
        || left.graph.edge_count() != right.graph.edge_count()
        || (left.graph.s, left.graph.t) != (right.graph.s, right.graph.t)
    {
        return false;
    }
    let left_keys: Vec<Key> = left
        .origin
        .iter()
        .map(|o| match *o {
            Origin::Outer(x) => match ab.origin[x] {
                Origin::Outer(v) => Key::Outer(v),
                Origin::Inner { edge, g_vertex } => Key::Mid(edge, g_vertex),
            },
            Origin::Inner { edge, g_vertex } => {
                let (ea, eb) = split_edge(&ab, b, edge);
                Key::Inner(ea, eb, g_vertex)
            }
        })
        .collect();
    let mut right_index = std::collections::BTreeMap::new();
    for (i, o) in right.origin.iter().enumerate() {
        let key = match *o {
            Origin::Outer(v) => Key::Outer(v),
            Origin::Inner { edge, g_vertex } => match bc.origin[g_vertex] {
                Origin::Outer(bv) => Key::Mid(edge, bv),
                Origin::Inner { edge: eb, g_vertex: cv } => Key::Inner(edge, eb, cv),
            },
        };
        right_index.insert(key, i);
    }
    let Some(image) = left_keys.iter().map(|k| right_index.get(k).copied()).collect::<Option<Vec<_>>>() else {
        return false;
    };
    let dl = apsp(&left.graph.base).unwrap();
    let dr = apsp(&right.graph.base).unwrap();
    copy_scale(&dr, &image, &dl) == Some(Rational::from_integer(1))
}

/// Gaussian configuration rescaled to be non-contracting for `d` in `l_p`.
pub fn random_noncontracting(d: &Metric64, dim: usize, p: f64, seed: u64) -> Points64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..d.len())
        .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    make_noncontracting(&Points64::new(pts, p).unwrap(), d).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
