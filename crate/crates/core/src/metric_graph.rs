//! Finite metric graphs, s-t graphs and their shortest-path metrics.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{Length, Real};

/// An undirected edge with `u < v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge<T> {
    pub u: usize,
    pub v: usize,
    pub len: T,
}

/// Undirected graph with positive edge lengths.
///
/// Edges are stored in canonical form (`u < v`, sorted by `(u, v)`); parallel
/// edges are collapsed to the shortest one.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph<T> {
    n: usize,
    edges: Vec<Edge<T>>,
}

impl<T: Length> MetricGraph<T> {
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        if n == 0 {
            return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
        }
        let mut canon: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for (u, v, len) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if len <= T::zero() {
                return Err(Error::NonPositiveLength { u, v });
            }
            let key = (u.min(v), u.max(v));
            match canon.get_mut(&key) {
                Some(existing) if len < *existing => *existing = len,
                Some(_) => {}
                None => {
                    canon.insert(key, len);
                }
            }
        }
        let edges = canon
            .into_iter()
            .map(|((u, v), len)| Edge { u, v, len })
            .collect();
        Ok(Self { n, edges })
    }

    /// Unit-length graph.
    pub fn unweighted<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::new(n, edges.into_iter().map(|(u, v)| (u, v, T::one())))
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    /// Index of the edge `{u, v}` in [`Self::edges`].
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search_by(|e| (e.u, e.v).cmp(&key)).ok()
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, T)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push((e.v, e.len.clone()));
            adj[e.v].push((e.u, e.len.clone()));
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    /// Common degree, or the first vertex that breaks regularity.
    pub fn regular_degree(&self) -> Result<usize> {
        let deg = self.degrees();
        let d = deg[0];
        match deg.iter().position(|&x| x != d) {
            None => Ok(d),
            Some(vertex) => Err(Error::NotRegular { vertex, degree: deg[vertex], expected: d }),
        }
    }

    pub fn require_unit_lengths(&self) -> Result<()> {
        match self.edges.iter().find(|e| !e.len.is_one()) {
            Some(e) => Err(Error::NonUnitLength { u: e.u, v: e.v }),
            None => Ok(()),
        }
    }

    /// First vertex unreachable from vertex 0, if any.
    pub fn unreachable_vertex(&self) -> Option<usize> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for (v, _) in &adj[u] {
                if !seen[*v] {
                    seen[*v] = true;
                    stack.push(*v);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub fn is_connected(&self) -> bool {
        self.unreachable_vertex().is_none()
    }

    /// Relabels vertices: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, found: perm.len() });
        }
        Self::new(
            self.n,
            self.edges.iter().map(|e| (perm[e.u], perm[e.v], e.len.clone())),
        )
    }

    pub fn map_lengths<U: Length>(&self, f: impl Fn(&T) -> U) -> Result<MetricGraph<U>> {
        MetricGraph::new(self.n, self.edges.iter().map(|e| (e.u, e.v, f(&e.len))))
    }

    pub fn scaled(&self, c: &T) -> Result<Self> {
        self.map_lengths(|l| l.clone() * c.clone())
    }
}

/// A metric graph with two distinguished, distinct vertices `s` and `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct STGraph<T> {
    pub base: MetricGraph<T>,
    pub s: usize,
    pub t: usize,
}

impl<T: Length> STGraph<T> {
    pub fn new(base: MetricGraph<T>, s: usize, t: usize) -> Result<Self> {
        let n = base.vertex_count();
        for w in [s, t] {
            if w >= n {
                return Err(Error::VertexOutOfRange { vertex: w, n });
            }
        }
        if s == t {
            return Err(Error::DegenerateEndpoints(s));
        }
        Ok(Self { base, s, t })
    }

    /// Single edge `s = 0`, `t = 1` of the given length.
    pub fn edge(len: T) -> Result<Self> {
        Self::new(MetricGraph::new(2, [(0, 1, len)])?, 0, 1)
    }

    pub fn unit_edge() -> Self {
        Self::edge(T::one()).expect("unit edge is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.base.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.base.edge_count()
    }

    pub fn edges(&self) -> &[Edge<T>] {
        self.base.edges()
    }

    /// Same graph with `s` and `t` exchanged.
    pub fn reversed(&self) -> Self {
        Self { base: self.base.clone(), s: self.t, t: self.s }
    }
}

/// Dense symmetric matrix of pairwise distances.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> DistanceMatrix<T> {
    /// Builds from row-major entries; no metric validation is done here.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::SizeMismatch { expected: n, found: row.len() });
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> DistanceMatrix<U> {
        DistanceMatrix { n: self.n, data: self.data.iter().map(f).collect() }
    }

    /// Sub-metric on `subset`, in the given order.
    pub fn restrict(&self, subset: &[usize]) -> Self {
        let data = subset
            .iter()
            .flat_map(|&i| subset.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        Self { n: subset.len(), data }
    }
}

impl<T: Length> DistanceMatrix<T> {
    /// Floating point view.
    pub fn to_real<F: Real>(&self) -> DistanceMatrix<F> {
        self.map(F::from_len)
    }

    pub fn scaled(&self, c: &T) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    /// Checks zero diagonal, symmetry, positivity off the diagonal and the
    /// triangle inequality (exactly for exact types, `1e-12` relative otherwise).
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let slack = |x: &T| -> f64 {
            if T::EXACT {
                0.0
            } else {
                1e-12 * x.to_f64_lossy().abs()
            }
        };
        for i in 0..n {
            if !self.get(i, i).is_zero() {
                return Err(Error::NotMetric(format!("d({i},{i}) = {} != 0", self.get(i, i))));
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                if self.get(i, j) != self.get(j, i) {
                    return Err(Error::NotMetric(format!("d({i},{j}) != d({j},{i})")));
                }
                if *self.get(i, j) <= T::zero() {
                    return Err(Error::NotMetric(format!("d({i},{j}) is not positive")));
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    let via = self.get(i, k).clone() + self.get(k, j).clone();
                    let direct = self.get(i, j);
                    let excess = direct.to_f64_lossy() - via.to_f64_lossy();
                    let violated = if T::EXACT { *direct > via } else { excess > slack(direct) };
                    if violated {
                        return Err(Error::NotMetric(format!(
                            "triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest entry.
    pub fn diameter(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, x| if *x > acc { x.clone() } else { acc })
    }
}

struct HeapItem<T> {
    dist: T,
    vertex: usize,
}

impl<T: PartialOrd> PartialEq for HeapItem<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: PartialOrd> Eq for HeapItem<T> {}

impl<T: PartialOrd> PartialOrd for HeapItem<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: PartialOrd> Ord for HeapItem<T> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

fn dijkstra<T: Length>(adj: &[Vec<(usize, T)>], source: usize) -> Vec<Option<T>> {
    let mut dist: Vec<Option<T>> = vec![None; adj.len()];
    let mut done = vec![false; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = Some(T::zero());
    heap.push(HeapItem { dist: T::zero(), vertex: source });
    while let Some(HeapItem { dist: d, vertex: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for (v, len) in &adj[u] {
            if done[*v] {
                continue;
            }
            let cand = d.clone() + len.clone();
            let better = match &dist[*v] {
                None => true,
                Some(cur) => cand < *cur,
            };
            if better {
                dist[*v] = Some(cand.clone());
                heap.push(HeapItem { dist: cand, vertex: *v });
            }
        }
    }
    dist
}

/// All-pairs shortest-path metric (one Dijkstra per source, run in parallel).
pub fn apsp<T: Length>(g: &MetricGraph<T>) -> Result<DistanceMatrix<T>> {
    let n = g.vertex_count();
    let adj = g.adjacency();
    let rows: Vec<Vec<Option<T>>> = (0..n).into_par_iter().map(|s| dijkstra(&adj, s)).collect();
    let mut data = Vec::with_capacity(n * n);
    for (u, row) in rows.into_iter().enumerate() {
        for (v, d) in row.into_iter().enumerate() {
            match d {
                Some(d) => data.push(d),
                None => return Err(Error::Disconnected { u, v }),
            }
        }
    }
    Ok(DistanceMatrix { n, data })
}

/// Single-source distances from `source`.
pub fn distances_from<T: Length>(g: &MetricGraph<T>, source: usize) -> Result<Vec<T>> {
    let n = g.vertex_count();
    if source >= n {
        return Err(Error::VertexOutOfRange { vertex: source, n });
    }
    dijkstra(&g.adjacency(), source)
        .into_iter()
        .enumerate()
        .map(|(v, d)| d.ok_or(Error::Disconnected { u: source, v }))
        .collect()
}

/// `len(G) = d(s, t)`.
pub fn st_length<T: Length>(g: &STGraph<T>) -> Result<T> {
    let ds = distances_from(&g.base, g.s)?;
    Ok(ds[g.t].clone())
}

/// `tri(G) = max_v d(s, v) + d(v, t)`.
pub fn tri<T: Length>(g: &STGraph<T>) -> Result<T> {
    let ds = distances_from(&g.base, g.s)?;
    let dt = distances_from(&g.base, g.t)?;
    Ok(ds
        .into_iter()
        .zip(dt)
        .map(|(a, b)| a + b)
        .fold(T::zero(), |acc, x| if x > acc { x } else { acc }))
}

/// A distortion-1 bijection `V(G) -> subset` found by [`is_copy`].
#[derive(Clone, Debug, PartialEq)]
pub struct CopyMatch<T> {
    /// `d_H(f(u), f(v)) = scale * d_G(u, v)`.
    pub scale: T,
    /// `bijection[u]` is the image of `g`-vertex `u` in `h`.
    pub bijection: Vec<usize>,
}

/// Exhaustive bijection search is limited to graphs this small.
pub const COPY_SEARCH_LIMIT: usize = 10;

/// Tests whether `subset` of `h` is a copy of `g`.
///
/// The identity correspondence (`g`-vertex `i` maps to `subset[i]`) is tried
/// first; if it fails and `g` has at most [`COPY_SEARCH_LIMIT`] vertices, all
/// bijections are searched with pruning.
pub fn is_copy<T: Length>(
    h: &DistanceMatrix<T>,
    subset: &[usize],
    g: &DistanceMatrix<T>,
) -> Result<Option<CopyMatch<T>>> {
    if subset.len() != g.len() {
        return Err(Error::SizeMismatch { expected: g.len(), found: subset.len() });
    }
    if let Some(&bad) = subset.iter().find(|&&x| x >= h.len()) {
        return Err(Error::VertexOutOfRange { vertex: bad, n: h.len() });
    }
    if let Some(scale) = copy_scale(h, subset, g) {
        return Ok(Some(CopyMatch { scale, bijection: subset.to_vec() }));
    }
    if g.len() > COPY_SEARCH_LIMIT {
        return Ok(None);
    }
    let mut state = Search { h, g, subset, image: Vec::new(), used: vec![false; subset.len()], scale: None };
    Ok(state.run())
}

/// Checks a given correspondence (`g`-vertex `i` maps to `image[i]`).
pub fn copy_scale<T: Length>(h: &DistanceMatrix<T>, image: &[usize], g: &DistanceMatrix<T>) -> Option<T> {
    let n = g.len();
    let mut scale: Option<T> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let dh = h.get(image[i], image[j]);
            let dg = g.get(i, j);
            if dg.is_zero() || dh.is_zero() {
                if dg.is_zero() && dh.is_zero() {
                    continue;
                }
                return None;
            }
            let ratio = dh.clone() / dg.clone();
            match &scale {
                None => scale = Some(ratio),
                Some(c) if c.same(&ratio) => {}
                Some(_) => return None,
            }
        }
    }
    Some(scale.unwrap_or_else(T::one))
}

struct Search<'a, T> {
    h: &'a DistanceMatrix<T>,
    g: &'a DistanceMatrix<T>,
    subset: &'a [usize],
    image: Vec<usize>,
    used: Vec<bool>,
    scale: Option<T>,
}

impl<T: Length> Search<'_, T> {
    fn run(&mut self) -> Option<CopyMatch<T>> {
        let i = self.image.len();
        if i == self.g.len() {
            return Some(CopyMatch {
                scale: self.scale.clone().unwrap_or_else(T::one),
                bijection: self.image.clone(),
            });
        }
        for slot in 0..self.subset.len() {
            if self.used[slot] {
                continue;
            }
            let cand = self.subset[slot];
            let saved = self.scale.clone();
            if self.consistent(i, cand) {
                self.used[slot] = true;
                self.image.push(cand);
                if let Some(found) = self.run() {
                    return Some(found);
                }
                self.image.pop();
                self.used[slot] = false;
            }
            self.scale = saved;
        }
        None
    }

    fn consistent(&mut self, i: usize, cand: usize) -> bool {
        for (j, &img) in self.image.iter().enumerate() {
            let dg = self.g.get(i, j);
            let dh = self.h.get(cand, img);
            if dg.is_zero() || dh.is_zero() {
                return false;
            }
            let ratio = dh.clone() / dg.clone();
            match &self.scale {
                None => self.scale = Some(ratio),
                Some(c) if c.same(&ratio) => {}
                Some(_) => return false,
            }
        }
        true
    }
}
