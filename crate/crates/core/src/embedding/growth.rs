//! Distortion growth along the powers `G̃^⊘k`.

use serde::Serialize;

use super::{
    check_facts, distortion, optimize_embedding_with, stretch_witness_with, symmetrize, c2_bracket_with,
    FactsReport, OptimizeOptions, PointConfig, SdpOptions, StretchWitness,
};
use crate::base_graphs::{lift_action, mu2, GroupAction};
use crate::composition::{power, power_size};
use crate::doubling::doubling_constant;
use crate::error::Result;
use crate::layered::laakso_tailed;
use crate::metric_graph::{apsp, MetricGraph};
use crate::Rational;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A vertex-transitive base graph with a transitive group of automorphisms.
#[derive(Clone, Debug)]
pub struct BaseGraph {
    pub name: String,
    pub graph: MetricGraph<Rational>,
    pub action: GroupAction,
}

#[derive(Clone, Debug)]
pub struct GrowthOptions {
    pub k_max: usize,
    pub seed: u64,
    /// Exponents for heuristic upper bounds on `c_p`.
    pub p_values: Vec<f64>,
    pub sdp: SdpOptions,
    pub exact_limit: usize,
    /// Largest `n` for which the doubling constant is computed.
    pub doubling_max_n: usize,
    /// Largest `n` for which `optimize_embedding` is run.
    pub optimize_max_n: usize,
    pub optimize_iters: usize,
    pub optimize_dim: usize,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        Self {
            k_max: 2,
            seed: 0,
            p_values: vec![2.0],
            sdp: SdpOptions::default(),
            exact_limit: crate::doubling::DEFAULT_EXACT_LIMIT,
            doubling_max_n: 200,
            optimize_max_n: 200,
            optimize_iters: 1500,
            optimize_dim: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub seed: u64,
    pub version: &'static str,
    pub base: String,
    pub k: usize,
    pub n: usize,
    pub mu2: f64,
    pub degree: usize,
    pub lambda_lo: Option<usize>,
    pub lambda_hi: Option<usize>,
    pub c2_lo: f64,
    pub c2_hi: f64,
    pub c2_lo_certified: f64,
    pub sdp_iterations: usize,
    /// `(p, distortion)` of the best embedding found into `l_p`.
    pub cp_upper: Vec<(f64, Option<f64>)>,
    /// `sqrt(mu2 k / d) log_d m`, undefined for `d < 2`.
    pub predicted: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthTable {
    pub base: String,
    pub seed: u64,
    pub version: &'static str,
    pub k_max_requested: usize,
    /// Largest `k` actually run after truncation for size.
    pub k_max_run: usize,
    pub rows: Vec<GrowthRow>,
    /// Stretch witness for an optimized embedding of `G̃` at `p = 2`.
    pub witness: Option<StretchWitness<f64>>,
    pub facts: Option<FactsReport<f64>>,
    /// Violated invariants; empty on success.
    pub failures: Vec<String>,
}

fn fmt_opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn fmt_f(x: f64) -> String {
    format!("{x:.9}")
}

impl GrowthTable {
    pub fn csv_header(&self) -> String {
        let mut cols = vec![
            "seed", "version", "base", "k", "n", "mu2", "degree", "lambda_lo", "lambda_hi", "c2_lo", "c2_hi",
            "c2_lo_certified", "c2_lo_status",
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        if let Some(row) = self.rows.first() {
            cols.extend(row.cp_upper.iter().map(|(p, _)| format!("cp_p{p}_UB")));
        }
        cols.push("predicted".into());
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for r in &self.rows {
            let mut cells = vec![
                r.seed.to_string(),
                r.version.to_string(),
                r.base.clone(),
                r.k.to_string(),
                r.n.to_string(),
                fmt_f(r.mu2),
                r.degree.to_string(),
                fmt_opt(r.lambda_lo),
                fmt_opt(r.lambda_hi),
                fmt_f(r.c2_lo),
                fmt_f(r.c2_hi),
                fmt_f(r.c2_lo_certified),
                if r.c2_lo <= r.c2_lo_certified { "certified" } else { "stall-detected" }.to_string(),
            ];
            cells.extend(r.cp_upper.iter().map(|(_, v)| fmt_opt(v.map(fmt_f))));
            cells.push(fmt_opt(r.predicted.map(fmt_f)));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn growth_experiment(base: &BaseGraph, opts: &GrowthOptions) -> Result<GrowthTable> {
    let tailed = laakso_tailed(&base.graph)?;
    let spectral = mu2::<f64, _>(&base.graph)?;
    let degree = spectral.degree;
    let m = base.graph.vertex_count();
    let mut failures = Vec::new();

    let (tv, te) = (tailed.st.vertex_count(), tailed.st.edge_count());
    let mut k_max_run = 0;
    for k in 0..=opts.k_max {
        match power_size(tv, te, k) {
            Some((n, _)) if n <= opts.sdp.max_n => k_max_run = k,
            _ => {
                log::warn!(
                    "{}: |V| at k = {k} exceeds the SDP limit {}; truncating k_max from {} to {k_max_run}",
                    base.name,
                    opts.sdp.max_n,
                    opts.k_max
                );
                break;
            }
        }
    }

    let mut rows = Vec::new();
    for k in 0..=k_max_run {
        let g = power(&tailed.st, k)?;
        let n = g.vertex_count();
        let d = apsp(&g.base)?.to_real::<f64>();
        let bracket = c2_bracket_with(&d, &opts.sdp)?;
        let realized = PointConfig::new(bracket.points(), 2.0).and_then(|f| distortion(&f, &d));
        match realized {
            Ok(r) if r.distortion <= bracket.hi * (1.0 + 1e-6) => {}
            Ok(r) => failures.push(format!("k={k}: Gram realization has distortion {} > hi {}", r.distortion, bracket.hi)),
            Err(e) => failures.push(format!("k={k}: Gram realization failed: {e}")),
        }
        let doubling = (n <= opts.doubling_max_n).then(|| doubling_constant(&d, opts.exact_limit));
        let mut cp_upper = Vec::new();
        for &p in &opts.p_values {
            if n > opts.optimize_max_n || n < 2 {
                cp_upper.push((p, None));
                continue;
            }
            let o = OptimizeOptions {
                dim: opts.optimize_dim.min(n - 1).max(1),
                iters: opts.optimize_iters,
                seed: opts.seed,
                ..OptimizeOptions::default()
            };
            let f = optimize_embedding_with(&d, p, &o)?;
            let dist = distortion(&f, &d)?.distortion;
            if p == 2.0 {
                if dist < bracket.lo_certified - 1e-6 {
                    failures.push(format!(
                        "k={k}: optimized l_2 distortion {dist} is below the certified lower bound {}",
                        bracket.lo_certified
                    ));
                } else if dist < bracket.lo - 1e-6 {
                    log::warn!("k={k}: optimized l_2 distortion {dist} is below the heuristic lower end {}", bracket.lo);
                }
            }
            cp_upper.push((p, Some(dist)));
        }
        let predicted = (degree >= 2)
            .then(|| (spectral.mu2 * k as f64 / degree as f64).sqrt() * (m as f64).ln() / (degree as f64).ln());
        log::info!("{} k={k} n={n}: c2 in [{}, {}]", base.name, bracket.lo, bracket.hi);
        rows.push(GrowthRow {
            seed: opts.seed,
            version: VERSION,
            base: base.name.clone(),
            k,
            n,
            mu2: spectral.mu2,
            degree,
            lambda_lo: doubling.as_ref().map(|r| r.lambda_lo),
            lambda_hi: doubling.as_ref().map(|r| r.lambda_hi),
            c2_lo: bracket.lo,
            c2_hi: bracket.hi,
            c2_lo_certified: bracket.lo_certified,
            sdp_iterations: bracket.iterations,
            cp_upper,
            predicted,
        });
    }

    // symmetrization facts and the stretch witness on an optimized map of G̃
    let d = apsp(&tailed.st.base)?.to_real::<f64>();
    let o = OptimizeOptions {
        dim: opts.optimize_dim.min(tv - 1).max(1),
        iters: opts.optimize_iters,
        seed: opts.seed,
        ..OptimizeOptions::default()
    };
    let f = optimize_embedding_with(&d, 2.0, &o)?;
    let lifted = lift_action(&base.action, &tailed)?;
    let fbar = symmetrize(&f, &lifted, 2.0)?;
    let facts = check_facts(&f, &fbar, &tailed, 2.0)?;
    for c in facts.failures() {
        failures.push(format!("fact {} fails: relative error {} at {}", c.name, c.worst, c.offender));
    }
    let sym = distortion(&fbar, &d)?;
    if sym.contraction > 1.0 + 1e-9 {
        failures.push(format!("symmetrized map contracts by {}", sym.contraction));
    }
    let witness = stretch_witness_with(&f, &tailed, &lifted, 2.0, &d)?;
    if witness.satisfies_bound(1e-9) == Some(false) {
        failures.push(format!(
            "stretch witness margin {} below beta^2/36 = {}",
            witness.margin,
            witness.required.unwrap_or(f64::NAN)
        ));
    }

    Ok(GrowthTable {
        base: base.name.clone(),
        seed: opts.seed,
        version: VERSION,
        k_max_requested: opts.k_max,
        k_max_run,
        rows,
        witness: Some(witness),
        facts: Some(facts),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_graphs::k2;

    #[test]
    fn k2_first_levels() {
        let (graph, action) = k2::<Rational>().unwrap();
        let base = BaseGraph { name: "k2".into(), graph, action };
        let opts = GrowthOptions { k_max: 1, optimize_iters: 300, ..GrowthOptions::default() };
        let t = growth_experiment(&base, &opts).unwrap();
        assert!(t.failures.is_empty(), "{:?}", t.failures);
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0].n, 2);
        assert!((t.rows[0].c2_hi - 1.0).abs() < 1e-12);
        assert_eq!(t.rows[1].n, 8);
        assert!(t.rows[1].c2_hi > 1.1);
        assert_eq!(t.rows[1].predicted, None);
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("0,"));
    }

    #[test]
    fn truncates_when_too_large() {
        let (graph, action) = k2::<Rational>().unwrap();
        let base = BaseGraph { name: "k2".into(), graph, action };
        let mut opts = GrowthOptions { k_max: 3, optimize_iters: 100, ..GrowthOptions::default() };
        opts.sdp.max_n = 10;
        let t = growth_experiment(&base, &opts).unwrap();
        assert_eq!(t.k_max_run, 1);
        assert_eq!(t.rows.len(), 2);
    }
}
