//! Covering numbers and doubling constants of finite metrics.
//!
//! Balls are open: `B(x, r) = { y : d(x, y) < r }`. The covering number of
//! `B(x, r)` is the least number of balls `B(y, r/2)`, with centres anywhere in
//! the space, whose union contains it. Covering numbers are piecewise constant
//! in `r`, changing only when `r` crosses some `d(x, ·)` or `2 d(y, ·)`, so the
//! doubling constant is a maximum over finitely many critical radii.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::metric_graph::DistanceMatrix;
use crate::scalar::Real;

/// Relative perturbation applied to each critical radius.
pub const RADIUS_EPS: f64 = 1e-9;

/// Default ball size up to which covers are solved exactly.
pub const DEFAULT_EXACT_LIMIT: usize = 30;

/// Hard cap for the exact solver (bitmask width).
pub const MAX_EXACT_LIMIT: usize = 128;

/// Sorted critical radii `{d(u,v), 2 d(u,v)}`, each scaled by `1 + RADIUS_EPS`.
pub fn critical_radii<F: Real>(d: &DistanceMatrix<F>) -> Vec<F> {
    let n = d.len();
    let mut vals: Vec<F> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in (i + 1)..n {
            let x = *d.get(i, j);
            vals.push(x);
            vals.push(x + x);
        }
    }
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let tol = F::lit(1e-12);
    vals.dedup_by(|a, b| (*a - *b).abs() <= tol * b.abs());
    let bump = F::one() + F::lit(RADIUS_EPS);
    vals.into_iter().map(|r| r * bump).collect()
}

/// Bounds on one covering number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoverBounds {
    pub lo: usize,
    pub hi: usize,
    /// Ball size.
    pub ball: usize,
}

impl CoverBounds {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

struct Bits {
    words: Vec<u64>,
}

impl Bits {
    fn new(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)] }
    }
    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }
    fn count_and(&self, other: &Bits) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }
    fn clear_from(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }
    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
    fn is_subset_of(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

/// Set system for one ball: candidate half-balls restricted to the ball, with
/// duplicates and dominated sets removed.
fn cover_sets<F: Real>(d: &DistanceMatrix<F>, x: usize, r: F) -> (Vec<usize>, Vec<Bits>) {
    let n = d.len();
    let ball: Vec<usize> = (0..n).filter(|&y| *d.get(x, y) < r).collect();
    let half = r * F::lit(0.5);
    let mut sets: Vec<Bits> = (0..n)
        .map(|y| {
            let mut b = Bits::new(ball.len());
            for (k, &z) in ball.iter().enumerate() {
                if *d.get(y, z) < half {
                    b.set(k);
                }
            }
            b
        })
        .filter(|b| !b.is_empty())
        .collect();
    sets.sort_by_key(|b| std::cmp::Reverse(b.words.iter().map(|w| w.count_ones()).sum::<u32>()));
    let mut kept: Vec<Bits> = Vec::new();
    for s in sets {
        if !kept.iter().any(|k| s.is_subset_of(k)) {
            kept.push(s);
        }
    }
    (ball, kept)
}

fn greedy_cover(universe: usize, sets: &[Bits]) -> usize {
    let mut uncovered = Bits::new(universe);
    for i in 0..universe {
        uncovered.set(i);
    }
    let mut count = 0;
    while !uncovered.is_empty() {
        let best = sets
            .iter()
            .max_by_key(|s| s.count_and(&uncovered))
            .expect("every point covers itself");
        uncovered.clear_from(best);
        count += 1;
    }
    count
}

/// Elements no two of which share a set each need their own set.
fn packing_bound(universe: usize, sets: &[Bits]) -> usize {
    let mut blocked = Bits::new(universe);
    let mut freq: Vec<(usize, usize)> = (0..universe)
        .map(|e| (sets.iter().filter(|s| s.get(e)).count(), e))
        .collect();
    freq.sort();
    let mut count = 0;
    for (_, e) in freq {
        if blocked.get(e) {
            continue;
        }
        count += 1;
        for s in sets.iter().filter(|s| s.get(e)) {
            for (b, w) in blocked.words.iter_mut().zip(&s.words) {
                *b |= w;
            }
        }
    }
    count
}

fn harmonic(k: usize) -> f64 {
    (1..=k).map(|i| 1.0 / i as f64).sum()
}

struct Exact {
    sets: Vec<u128>,
    /// Sets containing each element.
    containing: Vec<Vec<usize>>,
    /// Union of all sets containing each element.
    reach: Vec<u128>,
    best: usize,
    seen: HashMap<u128, usize>,
}

impl Exact {
    fn lower_bound(&self, uncovered: u128) -> usize {
        let mut blocked = 0u128;
        let mut count = 0;
        let mut rest = uncovered;
        while rest != 0 {
            let e = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if blocked >> e & 1 == 0 {
                count += 1;
                blocked |= self.reach[e];
            }
        }
        let largest = self.sets.iter().map(|s| (s & uncovered).count_ones()).max().unwrap_or(1).max(1);
        count.max((uncovered.count_ones() as usize).div_ceil(largest as usize))
    }

    fn search(&mut self, uncovered: u128, used: usize) {
        if uncovered == 0 {
            self.best = self.best.min(used);
            return;
        }
        if used + self.lower_bound(uncovered) >= self.best {
            return;
        }
        match self.seen.get(&uncovered) {
            Some(&prev) if prev <= used => return,
            _ => {
                self.seen.insert(uncovered, used);
            }
        }
        let mut rest = uncovered;
        let mut pivot = rest.trailing_zeros() as usize;
        let mut fewest = usize::MAX;
        while rest != 0 {
            let e = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.containing[e].len() < fewest {
                fewest = self.containing[e].len();
                pivot = e;
            }
        }
        let mut options = self.containing[pivot].clone();
        options.sort_by_key(|&s| std::cmp::Reverse((self.sets[s] & uncovered).count_ones()));
        for s in options {
            self.search(uncovered & !self.sets[s], used + 1);
        }
    }
}

fn exact_cover(universe: usize, sets: &[Bits], upper: usize) -> usize {
    let masks: Vec<u128> = sets
        .iter()
        .map(|b| b.words.iter().enumerate().fold(0u128, |acc, (i, &w)| acc | (w as u128) << (64 * i)))
        .collect();
    let mut containing = vec![Vec::new(); universe];
    let mut reach = vec![0u128; universe];
    for (si, &m) in masks.iter().enumerate() {
        for (e, (c, r)) in containing.iter_mut().zip(reach.iter_mut()).enumerate() {
            if m >> e & 1 == 1 {
                c.push(si);
                *r |= m;
            }
        }
    }
    let full = if universe == 128 { u128::MAX } else { (1u128 << universe) - 1 };
    let mut solver = Exact { sets: masks, containing, reach, best: upper, seen: HashMap::new() };
    solver.search(full, 0);
    solver.best
}

/// Covering number of `B(x, r)` by balls of radius `r/2`.
///
/// Exact (branch-and-bound) when the ball has at most `exact_limit` points;
/// otherwise the greedy cover gives the upper bound and the lower bound is
/// the larger of a packing bound and `greedy / H(largest set)`.
pub fn covering_number<F: Real>(d: &DistanceMatrix<F>, x: usize, r: F, exact_limit: usize) -> CoverBounds {
    let (ball, sets) = cover_sets(d, x, r);
    let m = ball.len();
    if m <= 1 {
        return CoverBounds { lo: m, hi: m, ball: m };
    }
    let hi = greedy_cover(m, &sets);
    let packing = packing_bound(m, &sets);
    if packing == hi {
        return CoverBounds { lo: hi, hi, ball: m };
    }
    if m <= exact_limit.min(MAX_EXACT_LIMIT) {
        let exact = exact_cover(m, &sets, hi);
        return CoverBounds { lo: exact, hi: exact, ball: m };
    }
    let largest = sets.iter().map(|s| s.words.iter().map(|w| w.count_ones() as usize).sum::<usize>()).max().unwrap_or(1);
    let ratio_bound = (hi as f64 / harmonic(largest)).ceil() as usize;
    CoverBounds { lo: packing.max(ratio_bound).max(1), hi, ball: m }
}

/// One evaluated `(center, radius)` cell.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CoverRow<F> {
    pub center: usize,
    pub radius: F,
    pub lo: usize,
    pub hi: usize,
    pub ball: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DoublingReport<F> {
    pub lambda_lo: usize,
    pub lambda_hi: usize,
    /// `(center, radius)` achieving `lambda_lo`.
    pub witness: (usize, F),
    pub per_radius: Option<Vec<CoverRow<F>>>,
}

impl<F> DoublingReport<F> {
    pub fn is_exact(&self) -> bool {
        self.lambda_lo == self.lambda_hi
    }
}

/// Covering bounds for every centre and every critical radius.
pub fn covering_table<F: Real>(d: &DistanceMatrix<F>, exact_limit: usize) -> Vec<CoverRow<F>> {
    let radii = critical_radii(d);
    (0..d.len())
        .into_par_iter()
        .flat_map_iter(|x| {
            radii.iter().map(move |&r| {
                let b = covering_number(d, x, r, exact_limit);
                CoverRow { center: x, radius: r, lo: b.lo, hi: b.hi, ball: b.ball }
            })
        })
        .collect()
}

pub fn report_from_table<F: Real>(rows: Vec<CoverRow<F>>, keep_rows: bool) -> DoublingReport<F> {
    let mut lambda_lo = 1;
    let mut lambda_hi = 1;
    let mut witness = (0, F::zero());
    for row in &rows {
        if row.lo > lambda_lo {
            lambda_lo = row.lo;
            witness = (row.center, row.radius);
        }
        lambda_hi = lambda_hi.max(row.hi);
    }
    DoublingReport { lambda_lo, lambda_hi, witness, per_radius: keep_rows.then_some(rows) }
}

pub fn doubling_constant<F: Real>(d: &DistanceMatrix<F>, exact_limit: usize) -> DoublingReport<F> {
    if d.len() <= 1 {
        return DoublingReport { lambda_lo: 1, lambda_hi: 1, witness: (0, F::zero()), per_radius: None };
    }
    report_from_table(covering_table(d, exact_limit), false)
}

/// Hypothesis regime of a covering lemma.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `r > tri / 3`: at most `|V(G̃)|` half-balls.
    LargeRadius,
    /// `s ∈ B(x, r)`: at most `|E(G̃)| |V(G̃)|` half-balls.
    ContainsS,
    /// `t ∈ B(x, r)` (mirror image of the previous case).
    ContainsT,
    /// Any ball: at most `2 |V(G̃)| |E(G̃)|^2` half-balls.
    Any,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegimeCheck {
    pub regime: Regime,
    pub bound: usize,
    pub checked: usize,
    /// Largest certified upper bound on a covering number in the regime.
    pub max_cover: usize,
    /// `max_cover / bound`.
    pub max_ratio: f64,
}

impl RegimeCheck {
    pub fn holds(&self) -> bool {
        self.max_cover <= self.bound
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoveringLemmaReport {
    pub tailed_vertices: usize,
    pub tailed_edges: usize,
    pub regimes: Vec<RegimeCheck>,
    /// `2 |V(G̃)|^5`, the looser bound of the doubling claim.
    pub loose_bound: f64,
}

impl CoveringLemmaReport {
    pub fn all_hold(&self) -> bool {
        self.regimes.iter().all(RegimeCheck::holds)
    }
}

/// Checks the covering bounds for `G̃^⊘k` on a precomputed table.
///
/// `tri` is `tri(G̃^⊘k)` and `s`, `t` its endpoints; `tailed_vertices` /
/// `tailed_edges` are `|V(G̃)|`, `|E(G̃)|`.
pub fn verify_covering_lemmas<F: Real>(
    d: &DistanceMatrix<F>,
    rows: &[CoverRow<F>],
    tri: F,
    s: usize,
    t: usize,
    tailed_vertices: usize,
    tailed_edges: usize,
) -> CoveringLemmaReport {
    let v = tailed_vertices;
    let e = tailed_edges;
    let third = tri / F::lit(3.0);
    let regimes = [
        (Regime::LargeRadius, v),
        (Regime::ContainsS, e * v),
        (Regime::ContainsT, e * v),
        (Regime::Any, 2 * v * e * e),
    ];
    let regimes = regimes
        .into_iter()
        .map(|(regime, bound)| {
            let applies = |row: &CoverRow<F>| match regime {
                Regime::LargeRadius => row.radius > third,
                Regime::ContainsS => *d.get(row.center, s) < row.radius,
                Regime::ContainsT => *d.get(row.center, t) < row.radius,
                Regime::Any => true,
            };
            let (checked, max_cover) = rows
                .iter()
                .filter(|r| applies(r))
                .fold((0, 0), |(c, m), r| (c + 1, m.max(r.hi)));
            RegimeCheck { regime, bound, checked, max_cover, max_ratio: max_cover as f64 / bound as f64 }
        })
        .collect();
    CoveringLemmaReport {
        tailed_vertices: v,
        tailed_edges: e,
        regimes,
        loose_bound: 2.0 * (v as f64).powi(5),
    }
}
