//! The ⊘-product of s-t graphs and its recursive powers.
//!
//! `H ⊘ G` replaces every edge `e = (u, v)` of `H` by a copy of `G` scaled by
//! `len_H(e) / d_G(s, t)`, identifying `s(G)` with `u` and `t(G)` with `v`.
//! Edges of `H` are oriented from the lower to the higher vertex id (or the
//! reverse, see [`Orientation`]).
//!
//! Vertex ids of the product: `V(H)` keeps its ids, then for each edge of `H`
//! (in canonical edge order) the interior vertices of `G` follow in increasing
//! `G`-id order.

use crate::error::{Error, Result};
use crate::metric_graph::{distances_from, MetricGraph, STGraph};
use crate::scalar::Length;

/// Which endpoint of an `H`-edge receives `s(G)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Orientation {
    /// `s(G)` at the lower vertex id.
    #[default]
    LowToHigh,
    /// `s(G)` at the higher vertex id.
    HighToLow,
}

/// Where a vertex of `H ⊘ G` came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    /// Vertex of `H`.
    Outer(usize),
    /// Interior vertex `g_vertex` of the copy of `G` on edge `edge` of `H`.
    Inner { edge: usize, g_vertex: usize },
}

/// `H ⊘ G` together with vertex provenance.
#[derive(Clone, Debug)]
pub struct Composed<T> {
    pub graph: STGraph<T>,
    pub origin: Vec<Origin>,
    /// For every edge of `H`, the image of each vertex of `G` (`s(G)` and `t(G)`
    /// map to the endpoints of the edge).
    pub copies: Vec<Vec<usize>>,
}

pub fn oslash<T: Length>(h: &STGraph<T>, g: &STGraph<T>) -> Result<STGraph<T>> {
    Ok(oslash_with(h, g, Orientation::LowToHigh)?.graph)
}

pub fn oslash_with<T: Length>(h: &STGraph<T>, g: &STGraph<T>, orientation: Orientation) -> Result<Composed<T>> {
    if g.s == g.t {
        return Err(Error::DegenerateSubstitution("s(G) = t(G)".into()));
    }
    let g_len = distances_from(&g.base, g.s)
        .map_err(|e| Error::DegenerateSubstitution(format!("G is not connected: {e}")))?[g.t]
        .clone();
    if g_len.is_zero() {
        return Err(Error::DegenerateSubstitution("d_G(s, t) = 0".into()));
    }
    if !h.base.is_connected() {
        return Err(Error::DegenerateSubstitution("H is not connected".into()));
    }

    let nh = h.vertex_count();
    let ng = g.vertex_count();
    let interior: Vec<usize> = (0..ng).filter(|&v| v != g.s && v != g.t).collect();
    let n = nh + h.edge_count() * interior.len();

    let mut origin: Vec<Origin> = (0..nh).map(Origin::Outer).collect();
    origin.reserve(n - nh);
    let mut copies = Vec::with_capacity(h.edge_count());
    let mut edges = Vec::with_capacity(h.edge_count() * g.edge_count());

    for (ei, e) in h.edges().iter().enumerate() {
        let (tail, head) = match orientation {
            Orientation::LowToHigh => (e.u, e.v),
            Orientation::HighToLow => (e.v, e.u),
        };
        let mut map = vec![usize::MAX; ng];
        map[g.s] = tail;
        map[g.t] = head;
        for &w in &interior {
            map[w] = origin.len();
            origin.push(Origin::Inner { edge: ei, g_vertex: w });
        }
        let factor = e.len.clone() / g_len.clone();
        for ge in g.edges() {
            edges.push((map[ge.u], map[ge.v], factor.clone() * ge.len.clone()));
        }
        copies.push(map);
    }
    debug_assert_eq!(origin.len(), n);

    let graph = STGraph::new(MetricGraph::new(n, edges)?, h.s, h.t)?;
    Ok(Composed { graph, origin, copies })
}

/// `G^⊘0` is the unit edge and `G^⊘k = G^⊘(k-1) ⊘ G`.
pub fn power<T: Length>(g: &STGraph<T>, k: usize) -> Result<STGraph<T>> {
    let mut acc = STGraph::unit_edge();
    for _ in 0..k {
        acc = oslash(&acc, g)?;
    }
    Ok(acc)
}

/// Like [`power`], but also returns the provenance of the last composition step
/// (the top-level copy structure `G^⊘(k-1) ⊘ G` viewed as `H ⊘ G`).
pub fn power_with_provenance<T: Length>(g: &STGraph<T>, k: usize) -> Result<(STGraph<T>, Option<Composed<T>>)> {
    if k == 0 {
        return Ok((STGraph::unit_edge(), None));
    }
    let prev = power(g, k - 1)?;
    let composed = oslash_with(&prev, g, Orientation::LowToHigh)?;
    Ok((composed.graph.clone(), Some(composed)))
}

/// `(|V|, |E|)` of `G^⊘k` from the recurrence
/// `V_k = V_{k-1} + E_{k-1} (|V(G)| - 2)`, `E_k = E_{k-1} |E(G)|`.
pub fn power_size(vertices: usize, edges: usize, k: usize) -> Option<(usize, usize)> {
    let (mut v, mut e) = (2usize, 1usize);
    for _ in 0..k {
        v = v.checked_add(e.checked_mul(vertices.checked_sub(2)?)?)?;
        e = e.checked_mul(edges)?;
    }
    Some((v, e))
}
