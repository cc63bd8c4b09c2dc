//! Symmetrization of maps on `G̃` over a vertex-transitive action and the
//! stretch-increase witness.

use serde::Serialize;

use super::{lp_dist, lp_pow, PointConfig};
use crate::base_graphs::{lift_action, GroupAction};
use crate::error::{Error, Result};
use crate::layered::{EdgeClass, LayeredGraph};
use crate::metric_graph::{apsp, DistanceMatrix};
use crate::scalar::{Length, Real};

const FACT_TOL: f64 = 1e-9;

/// Accepts an action on the base graph or one already lifted to `G̃`.
fn lifted<T: Length>(a: &GroupAction, v: &LayeredGraph<T>) -> Result<GroupAction> {
    let n = v.st.vertex_count();
    if a.degree() == n {
        Ok(a.clone())
    } else if a.degree() == v.base_size {
        lift_action(a, v)
    } else {
        Err(Error::SizeMismatch { expected: n, found: a.degree() })
    }
}

/// `x -> |A|^(-1/p) (f(pi x))_{pi in A}`.
pub fn symmetrize<F: Real>(f: &PointConfig<F>, a: &GroupAction, p: F) -> Result<PointConfig<F>> {
    if a.degree() != f.len() {
        return Err(Error::SizeMismatch { expected: f.len(), found: a.degree() });
    }
    let w = F::lit(a.order() as f64).powf(-p.recip());
    let points = (0..f.len())
        .map(|x| {
            a.perms
                .iter()
                .flat_map(|perm| f.point(perm[x]).iter().map(move |&c| c * w))
                .collect()
        })
        .collect();
    PointConfig::new(points, p)
}

#[derive(Clone, Debug, Serialize)]
pub struct FactCheck<F> {
    pub name: &'static str,
    pub holds: bool,
    /// Relative error of the worst offender.
    pub worst: F,
    pub offender: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactsReport<F> {
    pub f1: FactCheck<F>,
    pub f2: FactCheck<F>,
    pub f3: FactCheck<F>,
    /// Only checked for `p = 2`.
    pub f4: Option<FactCheck<F>>,
}

impl<F: Real> FactsReport<F> {
    pub fn all_hold(&self) -> bool {
        self.f1.holds && self.f2.holds && self.f3.holds && self.f4.as_ref().is_none_or(|c| c.holds)
    }

    pub fn failures(&self) -> Vec<&FactCheck<F>> {
        [Some(&self.f1), Some(&self.f2), Some(&self.f3), self.f4.as_ref()]
            .into_iter()
            .flatten()
            .filter(|c| !c.holds)
            .collect()
    }
}

struct Spread<F> {
    worst: F,
    offender: String,
}

impl<F: Real> Spread<F> {
    fn new() -> Self {
        Self { worst: F::zero(), offender: String::new() }
    }

    /// Records the relative spread of a family of values that should coincide.
    fn uniform(&mut self, values: &[F], label: impl Fn() -> String) {
        let hi = values.iter().copied().fold(F::zero(), F::max);
        let lo = values.iter().copied().fold(F::infinity(), F::min);
        if hi > F::zero() {
            let rel = (hi - lo) / hi;
            if rel > self.worst {
                self.worst = rel;
                self.offender = label();
            }
        }
    }

    fn finish(self, name: &'static str) -> FactCheck<F> {
        FactCheck { name, holds: self.worst <= F::lit(FACT_TOL), worst: self.worst, offender: self.offender }
    }
}

/// Checks facts F1 to F4 for `fbar`, the symmetrization of `f`.
///
/// F2 is checked for every fixed endpoint against every layer, F3 for every
/// pair of consecutive layers and F4 (at `p = 2`) for every pair in a layer.
pub fn check_facts<F: Real, T: Length>(
    f: &PointConfig<F>,
    fbar: &PointConfig<F>,
    v: &LayeredGraph<T>,
    p: F,
) -> Result<FactsReport<F>> {
    let n = v.st.vertex_count();
    if f.len() != n || fbar.len() != n {
        return Err(Error::SizeMismatch { expected: n, found: if f.len() != n { f.len() } else { fbar.len() } });
    }
    let (s, t) = (v.st.s, v.st.t);
    let m = v.base_size;
    let layers = v.layer_count();
    let norm = |g: &PointConfig<F>, x: usize, y: usize| lp_dist(g.point(x), g.point(y), p);

    let before = norm(f, s, t);
    let after = norm(fbar, s, t);
    let rel = (after - before).abs() / before.max(after).max(F::min_positive_value());
    let f1 = FactCheck {
        name: "F1",
        holds: rel <= F::lit(FACT_TOL),
        worst: rel,
        offender: format!("|f(s)-f(t)| = {before}, |fbar(s)-fbar(t)| = {after}"),
    };

    let mut endpoints = vec![s, t];
    if v.has_tails() {
        endpoints.extend([v.inner_s, v.inner_t]);
    }
    let mut f2 = Spread::new();
    for &e in &endpoints {
        for i in 1..=layers {
            let vals: Vec<F> = (0..m).map(|u| norm(fbar, e, v.vertex(i, u))).collect();
            f2.uniform(&vals, || format!("endpoint {e} against layer {i}"));
        }
    }

    let mut f3 = Spread::new();
    for i in 1..layers {
        let vals: Vec<F> = (0..m).map(|u| norm(fbar, v.vertex(i, u), v.vertex(i + 1, u))).collect();
        f3.uniform(&vals, || format!("layers {i} and {}", i + 1));
    }

    let f4 = (p == F::lit(2.0)).then(|| {
        let z: Vec<F> = fbar.point(s).iter().zip(fbar.point(t)).map(|(&a, &b)| a - b).collect();
        let zn = z.iter().map(|&c| c * c).sum::<F>().sqrt();
        let mut worst = F::zero();
        let mut offender = String::new();
        for i in 1..=layers {
            for a in 0..m {
                for b in (a + 1)..m {
                    let (x, y) = (v.vertex(i, a), v.vertex(i, b));
                    let w: Vec<F> = fbar.point(x).iter().zip(fbar.point(y)).map(|(&c, &d)| c - d).collect();
                    let wn = w.iter().map(|&c| c * c).sum::<F>().sqrt();
                    let denom = zn * wn;
                    if denom > F::zero() {
                        let inner: F = z.iter().zip(&w).map(|(&c, &d)| c * d).sum();
                        let rel = inner.abs() / denom;
                        if rel > worst {
                            worst = rel;
                            offender = format!("vertices {x} and {y} in layer {i}");
                        }
                    }
                }
            }
        }
        FactCheck { name: "F4", holds: worst <= F::lit(FACT_TOL), worst, offender }
    });

    Ok(FactsReport { f1, f2: f2.finish("F2"), f3: f3.finish("F3"), f4 })
}

/// Smallest over layers of the longest vertical-edge image in that layer.
pub fn beta_of<F: Real, T: Length>(fbar: &PointConfig<F>, v: &LayeredGraph<T>, p: F) -> Result<F> {
    let n = v.st.vertex_count();
    if fbar.len() != n {
        return Err(Error::SizeMismatch { expected: n, found: fbar.len() });
    }
    let mut beta = F::infinity();
    for i in 1..=v.layer_count() {
        let top = v
            .layer_vertical_edges(i)?
            .into_iter()
            .map(|(x, y)| lp_dist(fbar.point(x), fbar.point(y), p))
            .fold(F::zero(), F::max);
        beta = beta.min(top);
    }
    Ok(if beta.is_finite() { beta } else { F::zero() })
}

/// Projections `rho_0, ..., rho_{D+1}` of the chain `s, r^(1), ..., r^(D+1), t`
/// onto the unit `s`-`t` direction (Euclidean).
pub fn rho_profile<F: Real, T: Length>(fbar: &PointConfig<F>, v: &LayeredGraph<T>, r: usize) -> Result<Vec<F>> {
    if r >= v.base_size {
        return Err(Error::IndexOutOfRange { index: r, lo: 0, hi: v.base_size - 1 });
    }
    let (s, t) = (v.st.s, v.st.t);
    let z: Vec<F> = fbar.point(s).iter().zip(fbar.point(t)).map(|(&a, &b)| a - b).collect();
    let zn = z.iter().map(|&c| c * c).sum::<F>().sqrt();
    let mut chain = vec![s];
    chain.extend((1..=v.layer_count()).map(|i| v.vertex(i, r)));
    chain.push(t);
    Ok(chain
        .windows(2)
        .map(|w| {
            let inner: F = fbar.point(w[0]).iter().zip(fbar.point(w[1])).zip(&z).map(|((&a, &b), &c)| (a - b) * c).sum();
            inner.abs() / zn
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct StretchWitness<F> {
    /// The horizontal edge of largest normalized stretch of `fbar`.
    pub edge: (usize, usize),
    /// `||fbar(x) - fbar(y)||_p^q / d(x, y)^q`.
    pub lhs: F,
    /// `(||f(s) - f(t)||_p / d(s, t))^q`.
    pub gamma_q: F,
    pub beta: F,
    pub margin: F,
    /// `max(p, 2)`.
    pub q: F,
    pub p: F,
    /// `margin / beta^q`.
    pub empirical_k: Option<F>,
    /// `beta^q / 36`; only asserted for `p = 2`.
    pub required: Option<F>,
}

impl<F: Real> StretchWitness<F> {
    /// For `p = 2`, whether `margin >= beta^2 / 36 - slack`.
    pub fn satisfies_bound(&self, slack: F) -> Option<bool> {
        self.required.map(|r| self.margin >= r - slack)
    }
}

pub fn stretch_witness<F: Real, T: Length>(
    f: &PointConfig<F>,
    v: &LayeredGraph<T>,
    a: &GroupAction,
    p: F,
) -> Result<StretchWitness<F>> {
    let d = apsp(&v.st.base)?.to_real::<F>();
    stretch_witness_with(f, v, a, p, &d)
}

/// As [`stretch_witness`] with the metric of `G̃` precomputed.
pub fn stretch_witness_with<F: Real, T: Length>(
    f: &PointConfig<F>,
    v: &LayeredGraph<T>,
    a: &GroupAction,
    p: F,
    d: &DistanceMatrix<F>,
) -> Result<StretchWitness<F>> {
    let n = v.st.vertex_count();
    if f.len() != n || d.len() != n {
        return Err(Error::SizeMismatch { expected: n, found: if f.len() != n { f.len() } else { d.len() } });
    }
    let floor = F::one() - F::lit(1e-9);
    for x in 0..n {
        for y in (x + 1)..n {
            let img = lp_dist(f.point(x), f.point(y), p);
            if img == F::zero() {
                return Err(Error::DuplicatePoints { u: x, v: y });
            }
            let ratio = img / *d.get(x, y);
            if ratio < floor {
                return Err(Error::Contracting { u: x, v: y, ratio: ratio.as_f64() });
            }
        }
    }
    let a = lifted(a, v)?;
    let fbar = symmetrize(f, &a, p)?;
    let two = F::lit(2.0);
    let q = p.max(two);
    let (s, t) = (v.st.s, v.st.t);
    let gamma_q = (lp_dist(f.point(s), f.point(t), p) / *d.get(s, t)).powf(q);
    let beta = beta_of(&fbar, v, p)?;

    let mut best: Option<((usize, usize), F)> = None;
    for idx in v.edges_of_class(EdgeClass::Horizontal) {
        let e = &v.st.edges()[idx];
        let (x, y) = (e.u, e.v);
        let stretch = if q == p {
            lp_pow(fbar.point(x), fbar.point(y), p) / d.get(x, y).powf(p)
        } else {
            (lp_dist(fbar.point(x), fbar.point(y), p) / *d.get(x, y)).powf(q)
        };
        if best.is_none_or(|(_, b)| stretch > b) {
            best = Some(((x, y), stretch));
        }
    }
    let (edge, lhs) = best.ok_or_else(|| Error::InvariantViolation("graph has no horizontal edge".into()))?;
    let margin = lhs - gamma_q;
    let bq = beta.powf(q);
    Ok(StretchWitness {
        edge,
        lhs,
        gamma_q,
        beta,
        margin,
        q,
        p,
        empirical_k: (bq > F::zero()).then(|| margin / bq),
        required: (p == two).then(|| bq / F::lit(36.0)),
    })
}
