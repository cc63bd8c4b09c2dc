//! The stretched graph `G⃗` (D+1 layered copies of a base graph) and its
//! Laakso-tailed version `G̃`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_graph::{apsp, MetricGraph, STGraph};
use crate::scalar::Length;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeClass {
    /// Edge `(u^(i), v^(i))` inside a layer.
    Vertical,
    /// Every other edge.
    Horizontal,
}

impl EdgeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeClass::Vertical => "vertical",
            EdgeClass::Horizontal => "horizontal",
        }
    }
}

/// A stretched (optionally tailed) s-t graph with its layer structure.
///
/// Layer 0 holds the s-side endpoints, layers `1..=D+1` the copies of the
/// base, and layer `D+2` the t-side endpoints.
#[derive(Clone, Debug)]
pub struct LayeredGraph<T> {
    pub st: STGraph<T>,
    /// `m = |V(base)|`.
    pub base_size: usize,
    /// `D = diam(base)`.
    pub diameter: usize,
    /// Base graph edges `(u, v)` with `u < v`.
    pub base_edges: Vec<(usize, usize)>,
    pub layer_of: Vec<usize>,
    /// Parallel to `st.edges()`.
    pub edge_class: Vec<EdgeClass>,
    pub base_vertex_of: Vec<Option<usize>>,
    /// `s(G⃗)`; differs from `st.s` once tails are attached.
    pub inner_s: usize,
    /// `t(G⃗)`.
    pub inner_t: usize,
    /// Offset of `v^(1)` for `v = 0`.
    first_layer_offset: usize,
}

impl<T: Length> LayeredGraph<T> {
    pub fn layer_count(&self) -> usize {
        self.diameter + 1
    }

    pub fn has_tails(&self) -> bool {
        self.inner_s != self.st.s
    }

    /// Id of `v^(i)` for `1 <= i <= D+1`.
    pub fn vertex(&self, layer: usize, v: usize) -> usize {
        debug_assert!((1..=self.layer_count()).contains(&layer) && v < self.base_size);
        self.first_layer_offset + (layer - 1) * self.base_size + v
    }

    /// Vertical edges of layer `i` as vertex pairs of the layered graph.
    pub fn layer_vertical_edges(&self, layer: usize) -> Result<Vec<(usize, usize)>> {
        if !(1..=self.layer_count()).contains(&layer) {
            return Err(Error::IndexOutOfRange { index: layer, lo: 1, hi: self.layer_count() });
        }
        Ok(self
            .base_edges
            .iter()
            .map(|&(u, v)| (self.vertex(layer, u), self.vertex(layer, v)))
            .collect())
    }

    pub fn edges_of_class(&self, class: EdgeClass) -> Vec<usize> {
        self.edge_class
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == class)
            .map(|(i, _)| i)
            .collect()
    }

    /// The reflection `v^(i) -> v^(D+2-i)`, `s <-> t`, `s' <-> t'`.
    pub fn reflection(&self) -> Vec<usize> {
        let n = self.st.vertex_count();
        let mut perm: Vec<usize> = (0..n).collect();
        perm[self.st.s] = self.st.t;
        perm[self.st.t] = self.st.s;
        perm[self.inner_s] = self.inner_t;
        perm[self.inner_t] = self.inner_s;
        let layers = self.layer_count();
        for i in 1..=layers {
            for v in 0..self.base_size {
                perm[self.vertex(i, v)] = self.vertex(layers + 1 - i, v);
            }
        }
        perm
    }
}

/// Builds `G⃗` from a connected unit-length base graph.
pub fn stretch<T: Length>(base: &MetricGraph<T>) -> Result<LayeredGraph<T>> {
    base.require_unit_lengths()?;
    let base_dist = apsp(base)?;
    let m = base.vertex_count();
    let diameter = base_dist
        .diameter()
        .to_usize()
        .ok_or_else(|| Error::InvalidArgument("non-integral diameter".into()))?;
    if diameter == 0 {
        return Err(Error::InvalidArgument("base graph needs at least two vertices".into()));
    }
    let layers = diameter + 1;
    let n = m * layers + 2;
    let s = 0;
    let t = n - 1;
    let at = |i: usize, v: usize| 1 + (i - 1) * m + v;
    let big_d = T::from_count(diameter);
    let base_edges: Vec<(usize, usize)> = base.edges().iter().map(|e| (e.u, e.v)).collect();

    let mut edges = Vec::new();
    for v in 0..m {
        edges.push((s, at(1, v), big_d.clone()));
        edges.push((at(layers, v), t, big_d.clone()));
    }
    for &(u, v) in &base_edges {
        for i in 1..layers {
            edges.push((at(i, u), at(i + 1, v), T::one()));
            edges.push((at(i, v), at(i + 1, u), T::one()));
        }
        for j in 1..=layers {
            edges.push((at(j, u), at(j, v), T::one()));
        }
    }
    for v in 0..m {
        for i in 1..layers {
            edges.push((at(i, v), at(i + 1, v), T::one()));
        }
    }
    let graph = MetricGraph::new(n, edges)?;

    let mut layer_of = vec![0; n];
    let mut base_vertex_of = vec![None; n];
    layer_of[t] = layers + 1;
    for i in 1..=layers {
        for v in 0..m {
            layer_of[at(i, v)] = i;
            base_vertex_of[at(i, v)] = Some(v);
        }
    }
    let edge_class = graph
        .edges()
        .iter()
        .map(|e| {
            let same_layer = layer_of[e.u] == layer_of[e.v] && (1..=layers).contains(&layer_of[e.u]);
            let differ = base_vertex_of[e.u] != base_vertex_of[e.v];
            if same_layer && differ {
                EdgeClass::Vertical
            } else {
                EdgeClass::Horizontal
            }
        })
        .collect();

    let lg = LayeredGraph {
        st: STGraph::new(graph, s, t)?,
        base_size: m,
        diameter,
        base_edges,
        layer_of,
        edge_class,
        base_vertex_of,
        inner_s: s,
        inner_t: t,
        first_layer_offset: 1,
    };
    check_layer_isometry(&lg, &base_dist)?;
    Ok(lg)
}

fn check_layer_isometry<T: Length>(
    lg: &LayeredGraph<T>,
    base_dist: &crate::metric_graph::DistanceMatrix<T>,
) -> Result<()> {
    let d = apsp(&lg.st.base)?;
    for i in 1..=lg.layer_count() {
        for u in 0..lg.base_size {
            for v in (u + 1)..lg.base_size {
                if d.get(lg.vertex(i, u), lg.vertex(i, v)) != base_dist.get(u, v) {
                    return Err(Error::InvariantViolation(format!(
                        "layer {i} is not isometric to the base graph at ({u}, {v})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Attaches the two tails of length `3D`: `G̃` from `G⃗`.
pub fn add_tails<T: Length>(stretched: &LayeredGraph<T>) -> Result<LayeredGraph<T>> {
    if stretched.has_tails() {
        return Err(Error::InvalidArgument("graph already has tails".into()));
    }
    let old = &stretched.st;
    let n_old = old.vertex_count();
    let n = n_old + 2;
    let shift = |v: usize| v + 1;
    let tail = T::from_count(3 * stretched.diameter);
    let s = 0;
    let t = n - 1;
    let inner_s = shift(old.s);
    let inner_t = shift(old.t);

    let mut edges: Vec<(usize, usize, T)> = old
        .edges()
        .iter()
        .map(|e| (shift(e.u), shift(e.v), e.len.clone()))
        .collect();
    edges.push((s, inner_s, tail.clone()));
    edges.push((inner_t, t, tail));
    let graph = MetricGraph::new(n, edges)?;

    let mut layer_of = vec![0; n];
    let mut base_vertex_of = vec![None; n];
    for v in 0..n_old {
        layer_of[shift(v)] = stretched.layer_of[v];
        base_vertex_of[shift(v)] = stretched.base_vertex_of[v];
    }
    layer_of[t] = stretched.layer_count() + 1;
    let edge_class = graph
        .edges()
        .iter()
        .map(|e| {
            let same_layer = layer_of[e.u] == layer_of[e.v] && (1..=stretched.layer_count()).contains(&layer_of[e.u]);
            if same_layer && base_vertex_of[e.u] != base_vertex_of[e.v] {
                EdgeClass::Vertical
            } else {
                EdgeClass::Horizontal
            }
        })
        .collect();

    Ok(LayeredGraph {
        st: STGraph::new(graph, s, t)?,
        base_size: stretched.base_size,
        diameter: stretched.diameter,
        base_edges: stretched.base_edges.clone(),
        layer_of,
        edge_class,
        base_vertex_of,
        inner_s,
        inner_t,
        first_layer_offset: stretched.first_layer_offset + 1,
    })
}

/// `G̃` directly from the base graph.
pub fn laakso_tailed<T: Length>(base: &MetricGraph<T>) -> Result<LayeredGraph<T>> {
    add_tails(&stretch(base)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_graph::{is_copy, st_length};
    use crate::Rational;

    fn k2() -> MetricGraph<Rational> {
        MetricGraph::unweighted(2, [(0, 1)]).unwrap()
    }

    fn c4() -> MetricGraph<Rational> {
        MetricGraph::unweighted(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }

    #[test]
    fn k2_counts() {
        let g = stretch(&k2()).unwrap();
        assert_eq!(g.st.vertex_count(), 6);
        assert_eq!(g.st.edge_count(), 10);
        assert_eq!(g.edges_of_class(EdgeClass::Vertical).len(), 2);
        let t = add_tails(&g).unwrap();
        assert_eq!(t.st.vertex_count(), 8);
        assert_eq!(t.st.edge_count(), 12);
    }

    #[test]
    fn lengths() {
        for base in [k2(), c4()] {
            let g = stretch(&base).unwrap();
            let d = Rational::from_integer(g.diameter as i128);
            assert_eq!(st_length(&g.st).unwrap(), d * 3);
            let t = add_tails(&g).unwrap();
            assert_eq!(st_length(&t.st).unwrap(), d * 9);
            let ds = crate::metric_graph::distances_from(&t.st.base, t.st.s).unwrap();
            for r in 0..t.base_size {
                assert_eq!(ds[t.vertex(1, r)], d * 4);
            }
        }
    }

    #[test]
    fn vertical_edges_per_layer() {
        let g = laakso_tailed(&c4()).unwrap();
        let mut all = Vec::new();
        for i in 1..=g.layer_count() {
            let es = g.layer_vertical_edges(i).unwrap();
            assert_eq!(es.len(), 4);
            all.extend(es);
        }
        let mut vertical: Vec<(usize, usize)> = g
            .edges_of_class(EdgeClass::Vertical)
            .into_iter()
            .map(|i| (g.st.edges()[i].u, g.st.edges()[i].v))
            .collect();
        all.sort();
        vertical.sort();
        assert_eq!(all, vertical);
        assert!(g.layer_vertical_edges(0).is_err());
        assert!(g.layer_vertical_edges(4).is_err());
        assert_eq!(laakso_tailed(&k2()).unwrap().layer_vertical_edges(2).unwrap().len(), 1);
    }

    #[test]
    fn layers_are_copies_of_base() {
        let base = c4();
        let bd = apsp(&base).unwrap();
        let g = laakso_tailed(&base).unwrap();
        let d = apsp(&g.st.base).unwrap();
        for i in 1..=g.layer_count() {
            let layer: Vec<usize> = (0..4).map(|v| g.vertex(i, v)).collect();
            let m = is_copy(&d, &layer, &bd).unwrap().unwrap();
            assert_eq!(m.scale, Rational::from_integer(1));
        }
    }

    #[test]
    fn reflection_is_automorphism() {
        for base in [k2(), c4()] {
            let g = laakso_tailed(&base).unwrap();
            let perm = g.reflection();
            assert_eq!(g.st.base.relabel(&perm).unwrap(), g.st.base);
        }
    }

    #[test]
    fn rejects_weighted_base() {
        let b = MetricGraph::new(2, [(0, 1, Rational::from_integer(2))]).unwrap();
        assert!(matches!(stretch(&b), Err(Error::NonUnitLength { .. })));
    }
}
