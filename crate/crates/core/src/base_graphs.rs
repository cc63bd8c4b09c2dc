//! Small vertex-transitive base graphs with a transitive group action, and the
//! second Laplacian eigenvalue.
//!
//! Actions are transitive subgroups (rotations, translations) rather than full
//! automorphism groups, which keeps `|Γ| = m`.

use std::collections::HashSet;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layered::LayeredGraph;
use crate::linalg::SymmetricEigen;
use crate::metric_graph::MetricGraph;
use crate::scalar::{Length, Real};

/// A finite group of vertex permutations; `perms[g][v]` is the image of `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupAction {
    pub perms: Vec<Vec<usize>>,
}

impl GroupAction {
    pub fn new(perms: Vec<Vec<usize>>) -> Result<Self> {
        let Some(first) = perms.first() else {
            return Err(Error::InvalidArgument("group action needs at least one permutation".into()));
        };
        let n = first.len();
        for p in &perms {
            if p.len() != n {
                return Err(Error::SizeMismatch { expected: n, found: p.len() });
            }
            let mut seen = vec![false; n];
            for &x in p {
                if x >= n || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidArgument("not a permutation".into()));
                }
            }
        }
        Ok(Self { perms })
    }

    pub fn trivial(n: usize) -> Self {
        Self { perms: vec![(0..n).collect()] }
    }

    pub fn order(&self) -> usize {
        self.perms.len()
    }

    pub fn degree(&self) -> usize {
        self.perms[0].len()
    }

    pub fn contains_identity(&self) -> bool {
        self.perms.iter().any(|p| p.iter().enumerate().all(|(i, &x)| i == x))
    }

    pub fn is_closed(&self) -> bool {
        let set: HashSet<&[usize]> = self.perms.iter().map(|p| p.as_slice()).collect();
        let mut buf = vec![0; self.degree()];
        for a in &self.perms {
            for b in &self.perms {
                for (i, slot) in buf.iter_mut().enumerate() {
                    *slot = a[b[i]];
                }
                if !set.contains(buf.as_slice()) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_transitive(&self) -> bool {
        let n = self.degree();
        let mut reached = vec![false; n];
        for p in &self.perms {
            reached[p[0]] = true;
        }
        reached.into_iter().all(|r| r)
    }
}

/// Outcome of [`check_action`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ActionReport {
    pub automorphisms: bool,
    pub identity: bool,
    pub closed: bool,
    pub transitive: bool,
}

impl ActionReport {
    pub fn is_valid(&self) -> bool {
        self.automorphisms && self.identity && self.closed
    }
}

/// Checks every property of `a` acting on `g`.
pub fn check_action<T: Length>(a: &GroupAction, g: &MetricGraph<T>) -> Result<ActionReport> {
    if a.degree() != g.vertex_count() {
        return Err(Error::SizeMismatch { expected: g.vertex_count(), found: a.degree() });
    }
    let automorphisms = a.perms.iter().all(|p| is_automorphism(p, g));
    Ok(ActionReport {
        automorphisms,
        identity: a.contains_identity(),
        closed: a.is_closed(),
        transitive: a.is_transitive(),
    })
}

/// True iff every permutation is an automorphism and the action is a
/// transitive group.
pub fn action_check<T: Length>(a: &GroupAction, g: &MetricGraph<T>) -> Result<bool> {
    let r = check_action(a, g)?;
    Ok(r.is_valid() && r.transitive)
}

pub fn is_automorphism<T: Length>(perm: &[usize], g: &MetricGraph<T>) -> bool {
    g.edges().iter().all(|e| match g.edge_index(perm[e.u], perm[e.v]) {
        Some(idx) => g.edges()[idx].len == e.len,
        None => false,
    })
}

/// Circulant graph on `Z_m` with connection set `±gens`, with the rotations.
pub fn cayley_cycle<T: Length>(m: usize, gens: &[usize]) -> Result<(MetricGraph<T>, GroupAction)> {
    if m < 3 {
        return Err(Error::InvalidArgument(format!("cayley_cycle needs m >= 3, got {m}")));
    }
    if gens.is_empty() {
        return Err(Error::InvalidArgument("generator set is empty".into()));
    }
    let mut conn = HashSet::new();
    for &g in gens {
        let g = g % m;
        if g == 0 {
            return Err(Error::InvalidArgument("0 is not a valid generator".into()));
        }
        conn.insert(g);
        conn.insert(m - g);
    }
    let gcd = gens.iter().fold(m, |acc, &g| acc.gcd(&(g % m)));
    if gcd > 1 {
        return Err(Error::InvalidArgument(format!(
            "generators {gens:?} do not generate Z_{m} (gcd {gcd}); the graph is disconnected"
        )));
    }
    let mut edges = Vec::new();
    for i in 0..m {
        for &s in &conn {
            edges.push((i, (i + s) % m));
        }
    }
    let graph = MetricGraph::unweighted(m, edges)?;
    let perms = (0..m).map(|k| (0..m).map(|x| (x + k) % m).collect()).collect();
    Ok((graph, GroupAction { perms }))
}

pub fn cycle<T: Length>(m: usize) -> Result<(MetricGraph<T>, GroupAction)> {
    cayley_cycle(m, &[1])
}

/// `K_m` as the circulant with every chord.
pub fn complete<T: Length>(m: usize) -> Result<(MetricGraph<T>, GroupAction)> {
    if m == 2 {
        return k2();
    }
    let gens: Vec<usize> = (1..=m / 2).collect();
    cayley_cycle(m, &gens)
}

/// The single edge `K_2` with the swap.
pub fn k2<T: Length>() -> Result<(MetricGraph<T>, GroupAction)> {
    Ok((MetricGraph::unweighted(2, [(0, 1)])?, GroupAction { perms: vec![vec![0, 1], vec![1, 0]] }))
}

/// Hypercube `Q_r` with the translation action `x -> x xor a`.
pub fn hypercube<T: Length>(r: usize) -> Result<(MetricGraph<T>, GroupAction)> {
    if !(1..=10).contains(&r) {
        return Err(Error::InvalidArgument(format!("hypercube dimension must be in 1..=10, got {r}")));
    }
    let n = 1usize << r;
    let edges = (0..n).flat_map(|x| (0..r).map(move |b| (x, x ^ (1 << b)))).filter(|(x, y)| x < y);
    let graph = MetricGraph::unweighted(n, edges)?;
    let perms = (0..n).map(|a| (0..n).map(|x| x ^ a).collect()).collect();
    Ok((graph, GroupAction { perms }))
}

/// Second-smallest Laplacian eigenvalue of a regular unit-length graph.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport<F> {
    pub mu2: F,
    pub degree: usize,
    /// `||L x - mu2 x|| / ||x||` for the returned eigenvector.
    pub residual: F,
    /// Unit eigenvector for `mu2`.
    pub eigenvector: Vec<F>,
    /// Full Laplacian spectrum, ascending.
    pub spectrum: Vec<F>,
}

pub fn laplacian<F: Real, T: Length>(g: &MetricGraph<T>) -> Vec<F> {
    let n = g.vertex_count();
    let mut l = vec![F::zero(); n * n];
    for e in g.edges() {
        l[e.u * n + e.v] -= F::one();
        l[e.v * n + e.u] -= F::one();
        l[e.u * n + e.u] += F::one();
        l[e.v * n + e.v] += F::one();
    }
    l
}

pub fn mu2<F: Real, T: Length>(g: &MetricGraph<T>) -> Result<SpectralReport<F>> {
    let degree = g.regular_degree()?;
    g.require_unit_lengths()?;
    let n = g.vertex_count();
    if n < 2 {
        return Err(Error::InvalidArgument("mu2 needs at least two vertices".into()));
    }
    let l = laplacian::<F, T>(g);
    let eig = SymmetricEigen::new(&l, n);
    let x = eig.vector(1).to_vec();
    let mut value = eig.values[1];
    let lx: Vec<F> = (0..n).map(|i| (0..n).map(|k| l[i * n + k] * x[k]).sum()).collect();
    let norm = x.iter().map(|&a| a * a).sum::<F>().sqrt();
    let residual = lx
        .iter()
        .zip(&x)
        .map(|(&a, &b)| (a - value * b) * (a - value * b))
        .sum::<F>()
        .sqrt()
        / norm;
    let snap = F::epsilon() * F::lit(64.0 * n as f64) * F::lit(degree.max(1) as f64);
    if value.abs() <= snap {
        value = F::zero();
    }
    Ok(SpectralReport { mu2: value, degree, residual, eigenvector: x, spectrum: eig.values })
}

/// Lifts base permutations to `G̃`: endpoints fixed, `v^(i) -> π(v)^(i)`.
pub fn lift_action<T: Length>(a: &GroupAction, layered: &LayeredGraph<T>) -> Result<GroupAction> {
    if a.degree() != layered.base_size {
        return Err(Error::SizeMismatch { expected: layered.base_size, found: a.degree() });
    }
    let n = layered.st.vertex_count();
    let perms = a
        .perms
        .iter()
        .map(|p| {
            let mut lifted: Vec<usize> = (0..n).collect();
            for i in 1..=layered.layer_count() {
                for v in 0..layered.base_size {
                    lifted[layered.vertex(i, v)] = layered.vertex(i, p[v]);
                }
            }
            lifted
        })
        .collect();
    Ok(GroupAction { perms })
}
