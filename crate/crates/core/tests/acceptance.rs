//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use gluing::base_graphs::{cayley_cycle, complete, cycle, hypercube, k2, lift_action, mu2};
use gluing::composition::{power, power_with_provenance};
use gluing::doubling::{covering_table, report_from_table, verify_covering_lemmas};
use gluing::embedding::{
    c2_bracket, check_facts, distortion, fourpoint, growth_experiment, optimize_embedding_with, poincare_ratio,
    stretch_witness_with, symmetrize, GrowthOptions, OptimizeOptions, SdpBracket,
};
use gluing::layered::laakso_tailed;
use gluing::metric_graph::{distances_from, st_length, tri};
use gluing::{apsp, DistanceMatrix, Length, Metric64, Points64, Rational, RationalGraph};
use rand::Rng;

type Verdict = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion(id: usize, name: &str, budget: Duration, body: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|e| {
        Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    let elapsed = start.elapsed();
    let (pass, detail) = match result {
        Ok(d) if elapsed <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over the time budget")),
        Err(e) => (false, e),
    };
    println!(
        "{} {:>2} {name} [{:.2}s / {}s]: {detail}",
        if pass { "PASS" } else { "FAIL" },
        id,
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    pass
}

fn tailed_of(base: &RationalGraph) -> gluing::RationalLayered {
    laakso_tailed(base).unwrap()
}

fn construction() -> Verdict {
    for (name, base) in [("K2", k2::<Rational>().unwrap().0), ("C4", cycle::<Rational>(4).unwrap().0)] {
        let v = tailed_of(&base);
        let diam = Rational::from_integer(v.diameter as i128);
        let len = st_length(&v.st).unwrap();
        check(len == diam * 9, || format!("{name}: st_length {len} != 9D"))?;
        let from_s = distances_from(&v.st.base, v.st.s).unwrap();
        for r in 0..v.base_size {
            let got = from_s[v.vertex(1, r)];
            check(got == diam * 4, || format!("{name}: d(s, r^(1)) = {got} for r = {r}"))?;
        }
        let one = Rational::from_integer(1);
        let bound = one + one / (diam * 9 - one);
        for k in 0..=2 {
            let g = power(&v.st, k).unwrap();
            let (t, l) = (tri(&g).unwrap(), st_length(&g).unwrap());
            check(t <= l * bound, || format!("{name} k = {k}: tri {t} > {}", l * bound))?;
        }
    }
    Ok("K2 and C4 exact; tri within 1 + 1/(9D-1) for k <= 2".into())
}

fn associativity() -> Verdict {
    let mut rng = common::rng(2024);
    for trial in 0..200 {
        let a = common::random_st_graph(&mut rng, 6);
        let b = common::random_st_graph(&mut rng, 6);
        let c = common::random_st_graph(&mut rng, 6);
        check(common::associative(&a, &b, &c), || format!("triple {trial} not isometric"))?;
    }
    Ok("200 random triples isometric exactly".into())
}

fn doubling() -> Verdict {
    let v = tailed_of(&k2::<Rational>().unwrap().0);
    let (nv, ne) = (v.st.vertex_count(), v.st.edge_count());
    let claim = 2 * nv * ne * ne;
    let mut lambdas = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 1..=2 {
        let g = power(&v.st, k).unwrap();
        let d = apsp(&g.base).unwrap().to_real::<f64>();
        let rows = covering_table(&d, 30);
        let rep = report_from_table(rows.clone(), false);
        check(rep.is_exact(), || format!("k = {k}: lambda only bracketed [{}, {}]", rep.lambda_lo, rep.lambda_hi))?;
        check(rep.lambda_hi <= claim, || format!("k = {k}: lambda {} > {claim}", rep.lambda_hi))?;
        let lemmas = verify_covering_lemmas(&d, &rows, tri(&g).unwrap().to_f64_lossy(), g.s, g.t, nv, ne);
        for r in &lemmas.regimes {
            check(r.checked > 0 && r.max_ratio <= 1.0, || format!("k = {k}: regime {:?} ratio {}", r.regime, r.max_ratio))?;
            worst = worst.max(r.max_ratio);
        }
        lambdas.push(rep.lambda_hi);
    }
    let (l1, l2) = (lambdas[0], lambdas[1]);
    check(l2 <= 2 * l1 && l1 <= 2 * l2, || format!("lambda jumps from {l1} to {l2}"))?;
    Ok(format!("lambda(k=1) = {l1}, lambda(k=2) = {l2} <= {claim}; worst covering ratio {worst:.4}"))
}

fn spectral() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut cmp = |name: String, g: &RationalGraph, want: f64| -> Result<(), String> {
        let got = mu2::<f64, _>(g).unwrap().mu2;
        worst = worst.max((got - want).abs());
        check((got - want).abs() <= 1e-9, || format!("{name}: mu2 = {got}, expected {want}"))
    };
    for m in 2..=64 {
        cmp(format!("K_{m}"), &complete::<Rational>(m).unwrap().0, m as f64)?;
    }
    for m in 3..=64 {
        let want = 2.0 - 2.0 * (2.0 * std::f64::consts::PI / m as f64).cos();
        cmp(format!("C_{m}"), &cycle::<Rational>(m).unwrap().0, want)?;
    }
    for r in 1..=6 {
        cmp(format!("Q_{r}"), &hypercube::<Rational>(r).unwrap().0, 2.0)?;
    }
    Ok(format!("K_m, C_m (m <= 64), Q_r (r <= 6); max error {worst:.2e}"))
}

fn poincare() -> Verdict {
    let mut detail = Vec::new();
    for (name, g) in [("C8", cycle::<Rational>(8).unwrap().0), ("Q3", hypercube::<Rational>(3).unwrap().0)] {
        let rep = mu2::<f64, _>(&g).unwrap();
        let bound = rep.degree as f64 / rep.mu2;
        let f = Points64::new(rep.eigenvector.iter().map(|&x| vec![x]).collect(), 2.0).unwrap();
        let tight = poincare_ratio(&g, &f, 2.0).unwrap();
        check((tight - bound).abs() <= 1e-8 * bound, || format!("{name}: eigenvector ratio {tight} vs {bound}"))?;
        let mut rng = common::rng(5);
        let mut max_rel: f64 = 0.0;
        for _ in 0..100 {
            let dim = rng.random_range(1..=4);
            let pts = (0..g.vertex_count()).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let r = poincare_ratio(&g, &Points64::new(pts, 2.0).unwrap(), 2.0).unwrap();
            check(r <= bound * (1.0 + 1e-8), || format!("{name}: random ratio {r} > {bound}"))?;
            max_rel = max_rel.max(r / bound);
        }
        detail.push(format!("{name}: d/mu2 = {bound:.6}, random max {max_rel:.4} of bound"));
    }
    Ok(detail.join("; "))
}

fn four_point() -> Verdict {
    let mut rng = common::rng(6);
    let ps = [1.2, 1.5, 2.0, 3.0, 7.0];
    let dims = [1usize, 2, 8];
    let mut count = 0;
    let mut worst = f64::INFINITY;
    while count < 100_000 {
        for &p in &ps {
            for &dim in &dims {
                let mut pt = || (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
                let (u, v, w, x) = (pt(), pt(), pt(), pt());
                let s = fourpoint(&u, &v, &w, &x, p).unwrap();
                let rel = s.min_slack() / s.scale.max(f64::MIN_POSITIVE);
                check(s.min_slack() >= -1e-9 * s.scale, || format!("p = {p}, dim = {dim}: slack {rel:e}"))?;
                worst = worst.min(rel);
                count += 1;
            }
        }
    }
    let s = fourpoint(&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], 2.0).unwrap();
    let eq: f64 = f64::abs(s.slack_1p2.unwrap()).max(f64::abs(s.slack_pg2.unwrap()));
    check(eq <= 1e-9 * s.scale, || format!("parallelogram slack {eq}"))?;
    Ok(format!("{count} quadruples, smallest relative slack {worst:.3e}; parallelogram equality {eq:.1e}"))
}

struct C4Setup {
    v: gluing::RationalLayered,
    lifted: gluing::GroupAction,
    d: Metric64,
}

fn c4_setup() -> C4Setup {
    let (base, action) = cayley_cycle::<Rational>(4, &[1]).unwrap();
    let v = tailed_of(&base);
    let lifted = lift_action(&action, &v).unwrap();
    let d = apsp(&v.st.base).unwrap().to_real::<f64>();
    C4Setup { v, lifted, d }
}

fn symmetrization() -> Verdict {
    let c = c4_setup();
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let f = common::random_noncontracting(&c.d, 4, 2.0, trial);
        let fbar = symmetrize(&f, &c.lifted, 2.0).unwrap();
        let facts = check_facts(&f, &fbar, &c.v, 2.0).unwrap();
        check(facts.all_hold(), || format!("trial {trial}: {:?}", facts.failures()))?;
        check(facts.f4.is_some(), || "F4 not evaluated at p = 2".into())?;
        for fact in [Some(&facts.f1), Some(&facts.f2), Some(&facts.f3), facts.f4.as_ref()].into_iter().flatten() {
            worst = worst.max(fact.worst);
        }
        let contraction = distortion(&fbar, &c.d).unwrap().contraction;
        check(contraction <= 1.0 + 1e-9, || format!("trial {trial}: symmetrized map contracts by {contraction}"))?;
    }
    Ok(format!("50 configurations, F1-F4 worst deviation {worst:.2e}"))
}

fn stretch_increase() -> Verdict {
    let c = c4_setup();
    let mut min_excess = f64::INFINITY;
    let mut k_range = [(f64::INFINITY, 0.0f64); 2];
    for trial in 0..50 {
        for (pi, &p) in [2.0, 1.5, 3.0].iter().enumerate() {
            let f = common::random_noncontracting(&c.d, 4, p, trial);
            let w = stretch_witness_with(&f, &c.v, &c.lifted, p, &c.d).unwrap();
            check(w.margin > 0.0, || format!("trial {trial}, p = {p}: margin {}", w.margin))?;
            if p == 2.0 {
                let required = w.beta * w.beta / 36.0;
                check(w.margin >= required - 1e-9, || {
                    format!("trial {trial}: margin {} < beta^2/36 = {required}", w.margin)
                })?;
                min_excess = min_excess.min(w.margin - required);
            } else if let Some(k) = w.empirical_k {
                let r = &mut k_range[pi - 1];
                *r = (r.0.min(k), r.1.max(k));
            }
        }
    }
    Ok(format!(
        "p = 2 margin exceeds beta^2/36 by >= {min_excess:.3e}; empirical K(1.5) in [{:.3e}, {:.3e}], K(3) in [{:.3e}, {:.3e}]",
        k_range[0].0, k_range[0].1, k_range[1].0, k_range[1].1
    ))
}

fn gram_ok(b: &SdpBracket<f64>, d: &Metric64) -> Result<f64, String> {
    let f = Points64::new(b.points(), 2.0).map_err(|e| e.to_string())?;
    let realized = distortion(&f, d).map_err(|e| e.to_string())?.distortion;
    check(realized <= b.hi * (1.0 + 1e-6), || format!("Gram realizes {realized} > hi {}", b.hi))?;
    Ok(realized)
}

fn c2_oracles() -> Verdict {
    let tol = 1e-3;
    let path = DistanceMatrix::from_rows((0..7).map(|i| (0..7).map(|j| (i as f64 - j as f64).abs()).collect()).collect())
        .unwrap();
    let b = c2_bracket(&path, tol).unwrap();
    check(b.lo <= 1.0 && 1.0 <= b.hi, || format!("path bracket [{}, {}]", b.lo, b.hi))?;
    gram_ok(&b, &path)?;

    let cyc = |i: usize, j: usize| ((i + 4 - j) % 4).min((j + 4 - i) % 4) as f64;
    let c4 = DistanceMatrix::from_rows((0..4).map(|i| (0..4).map(|j| cyc(i, j)).collect()).collect()).unwrap();
    let b = c2_bracket(&c4, tol).unwrap();
    let r2 = 2f64.sqrt();
    check(b.lo <= r2 && r2 <= b.hi, || format!("C4 bracket [{}, {}]", b.lo, b.hi))?;
    gram_ok(&b, &c4)?;

    let star = DistanceMatrix::from_rows(vec![
        vec![0.0, 1.0, 1.0, 1.0],
        vec![1.0, 0.0, 2.0, 2.0],
        vec![1.0, 2.0, 0.0, 2.0],
        vec![1.0, 2.0, 2.0, 0.0],
    ])
    .unwrap();
    let b = c2_bracket(&star, tol).unwrap();
    gram_ok(&b, &star)?;
    let opts = OptimizeOptions { dim: 4, iters: 3000, restarts: 50, seed: 9, ..OptimizeOptions::default() };
    let f = optimize_embedding_with(&star, 2.0, &opts).unwrap();
    let oracle = distortion(&f, &star).unwrap().distortion;
    check(b.lo <= oracle && oracle <= b.hi * (1.0 + tol), || {
        format!("K13 bracket [{}, {}] misses optimizer value {oracle}", b.lo, b.hi)
    })?;
    Ok(format!("path [{:.6}, ...], C4 contains sqrt 2, K13 [{:.6}, {:.6}] contains {oracle:.6}", 1.0, b.lo, b.hi))
}

/// Certified bracket for `G~^k` of `base`, with its Gram realization checked.
fn level_bracket(base: &RationalGraph, k: usize) -> Result<SdpBracket<f64>, String> {
    let v = tailed_of(base);
    let g = power(&v.st, k).map_err(|e| e.to_string())?;
    let d = apsp(&g.base).map_err(|e| e.to_string())?.to_real::<f64>();
    let b = c2_bracket(&d, 1e-3).map_err(|e| e.to_string())?;
    gram_ok(&b, &d)?;
    Ok(b)
}

/// Certified lower bound on `c2(G~^2)` for a base too large for a direct solve:
/// the best bound over sub-metrics made of the outer copy of `G~` plus the
/// interior of one substituted copy (restriction cannot increase `c2`).
fn second_level_lower_bound(base: &RationalGraph) -> Result<(f64, f64, usize), String> {
    let v = tailed_of(base);
    let (g, comp) = power_with_provenance(&v.st, 2).map_err(|e| e.to_string())?;
    let comp = comp.ok_or("missing provenance")?;
    let d = apsp(&g.base).map_err(|e| e.to_string())?.to_real::<f64>();
    let outer = v.st.vertex_count();
    // one representative edge per edge class and layer position
    let mut seen = std::collections::BTreeSet::new();
    let mut best = (0.0, f64::INFINITY, 0);
    for (e, copy) in comp.copies.iter().enumerate() {
        let edge = &v.st.edges()[e];
        let key = (v.edge_class[e], v.layer_of[edge.u].min(v.layer_of[edge.v]), v.layer_of[edge.u].max(v.layer_of[edge.v]));
        if !seen.insert(key) {
            continue;
        }
        let mut sub: Vec<usize> = (0..outer).collect();
        sub.extend(copy.iter().copied().filter(|&x| x >= outer));
        let ds = d.restrict(&sub);
        let b = c2_bracket(&ds, 1e-3).map_err(|e| e.to_string())?;
        if b.lo_certified > best.0 {
            best = (b.lo_certified, b.hi, e);
        }
    }
    Ok(best)
}

fn growth() -> Verdict {
    let k2g = k2::<Rational>().unwrap().0;
    let mut k2_rows = Vec::new();
    for k in 0..=2 {
        let b = level_bracket(&k2g, k)?;
        k2_rows.push((b.lo_certified.min(b.lo), b.hi));
    }
    let c1 = k2_rows[1].1;
    let min_step = c1 * c1 - 1.0 - 0.1;
    for k in 1..=2 {
        let (prev, cur) = (k2_rows[k - 1], k2_rows[k]);
        check(cur.0 > prev.1, || format!("K2: bracket at k = {k} [{}, {}] does not exceed k = {} hi {}", cur.0, cur.1, k - 1, prev.1))?;
        let step = cur.0 * cur.0 - prev.1 * prev.1;
        check(step >= min_step, || format!("K2: squared growth {step} at k = {k} below {min_step}"))?;
    }

    let c8 = cayley_cycle::<Rational>(8, &[1, 2]).unwrap().0;
    let first = level_bracket(&c8, 1)?;
    let (lb2, ub2, edge) = second_level_lower_bound(&c8)?;
    let need = 1.75 * first.hi * first.hi;
    let summary = format!(
        "K2 brackets {}; C8-chord c2(1) in [{:.6}, {:.6}], c2(2) >= {lb2:.6} (sub-metric via edge {edge}, its hi {ub2:.6}), need c2(2)^2 >= {need:.4}",
        k2_rows.iter().map(|(l, h)| format!("[{l:.6}, {h:.6}]")).collect::<Vec<_>>().join(" "),
        first.lo,
        first.hi
    );
    check(lb2 * lb2 >= need, || format!("{summary}: certified c2(2)^2 >= {:.4} only", lb2 * lb2))?;
    Ok(summary)
}

fn reproducibility() -> Verdict {
    let base = gluing::embedding::BaseGraph {
        name: "k2".into(),
        graph: k2::<Rational>().unwrap().0,
        action: k2::<Rational>().unwrap().1,
    };
    let opts = GrowthOptions { k_max: 1, seed: 17, p_values: vec![1.5, 2.0, 3.0], ..GrowthOptions::default() };
    let a = growth_experiment(&base, &opts).unwrap().to_csv();
    let b = growth_experiment(&base, &opts).unwrap().to_csv();
    check(a == b, || "CSV differs between runs".into())?;
    let c2 = cycle::<Rational>(4).unwrap();
    let c4 = gluing::embedding::BaseGraph { name: "c4".into(), graph: c2.0, action: c2.1 };
    let opts = GrowthOptions { k_max: 1, seed: 3, ..GrowthOptions::default() };
    let x = growth_experiment(&c4, &opts).unwrap().to_csv();
    let y = growth_experiment(&c4, &opts).unwrap().to_csv();
    check(x == y, || "C4 CSV differs between runs".into())?;
    Ok(format!("byte-identical CSV on rerun ({} and {} bytes)", a.len(), x.len()))
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "construction exactness", secs(1), construction),
        criterion(2, "associativity", secs(30), associativity),
        criterion(3, "doubling at desk scale", secs(600), doubling),
        criterion(4, "spectral closed forms", secs(5), spectral),
        criterion(5, "Poincare inequality", secs(10), poincare),
        criterion(6, "four-point inequalities", secs(30), four_point),
        criterion(7, "symmetrization facts", secs(30), symmetrization),
        criterion(8, "stretch increase", secs(120), stretch_increase),
        criterion(9, "c2 oracle agreement", secs(60), c2_oracles),
        criterion(10, "distortion growth", secs(7200), growth),
        criterion(11, "reproducibility", secs(60), reproducibility),
    ];
    let failed = results.iter().filter(|&&ok| !ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
