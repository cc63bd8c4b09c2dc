use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use gluing::base_graphs::{lift_action, mu2};
use gluing::composition::{power, power_size};
use gluing::doubling::{covering_table, report_from_table, verify_covering_lemmas};
use gluing::embedding::{
    c2_bracket_with, check_facts, distortion, growth_experiment, optimize_embedding_with, poincare_ratio,
    stretch_witness_with, symmetrize, GrowthOptions, OptimizeOptions, SdpOptions,
};
use gluing::format::{read_graph, read_points, write_action, write_graph, write_layers, write_points};
use gluing::layered::{add_tails, laakso_tailed, stretch};
use gluing::metric_graph::tri;
use gluing::{apsp, Length, Metric64, Points64, RationalStGraph, STGraph};
use serde::Serialize;

use crate::spec::ExperimentSpec;
use crate::Failure;

/// Largest graph `build` will materialize.
const MAX_BUILD_VERTICES: usize = 2_000_000;
const FACT_SLACK: f64 = 1e-9;

type Outcome = Result<(), Failure>;

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    s.into()
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::usage(format!("cannot create {}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::usage(format!("cannot open {}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<RationalStGraph, Failure> {
    read_graph(open(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_points(path: &Path) -> Result<Points64, Failure> {
    read_points(open(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn save_points(f: &Points64, path: &Path) -> Outcome {
    let mut w = create(path)?;
    write_points(f, &mut w)?;
    w.flush()?;
    Ok(())
}

fn check_size(tailed: &RationalStGraph, k: usize, limit: usize) -> Outcome {
    match power_size(tailed.vertex_count(), tailed.edge_count(), k) {
        Some((n, _)) if n <= limit => Ok(()),
        Some((n, _)) => Err(Failure::resource(format!("G~^{k} has {n} vertices, above the limit {limit}"))),
        None => Err(Failure::resource(format!("G~^{k} is too large to count"))),
    }
}

/// The graph named on the command line, or `G~^k` of the spec's base.
fn target_graph(graph: Option<&Path>, spec: &ExperimentSpec) -> Result<RationalStGraph, Failure> {
    match graph {
        Some(path) => load_graph(path),
        None => {
            let tailed = laakso_tailed(&spec.base_graph()?.graph)?;
            check_size(&tailed.st, spec.k, MAX_BUILD_VERTICES)?;
            Ok(power(&tailed.st, spec.k)?)
        }
    }
}

fn metric(g: &RationalStGraph) -> Result<Metric64, Failure> {
    Ok(apsp(&g.base)?.to_real::<f64>())
}

fn emit(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

pub fn build(spec: &ExperimentSpec) -> Outcome {
    let mut files: Vec<(String, RationalStGraph)> = Vec::new();
    let mut extra: Vec<(String, Box<dyn Fn(&mut BufWriter<File>) -> gluing::Result<()>>)> = Vec::new();
    let top = match spec.base {
        None if spec.k == 0 => STGraph::unit_edge(),
        None => return Err(Failure::usage("--base is required when --k > 0")),
        Some(_) => {
            let base = spec.base_graph()?;
            let n = base.graph.vertex_count();
            let base_st = STGraph::new(base.graph.clone(), 0, n.saturating_sub(1))?;
            let stretched = stretch(&base.graph)?;
            let tailed = add_tails(&stretched)?;
            check_size(&tailed.st, spec.k, MAX_BUILD_VERTICES)?;
            let top = power(&tailed.st, spec.k)?;
            let lifted = lift_action(&base.action, &tailed)?;
            files.push(("base".into(), base_st));
            files.push(("stretched".into(), stretched.st.clone()));
            files.push(("tailed".into(), tailed.st.clone()));
            let action = base.action.clone();
            extra.push(("base.action".into(), Box::new(move |w| write_action(&action, w))));
            extra.push(("stretched.layers".into(), Box::new(move |w| write_layers(&stretched, w))));
            let t = tailed.clone();
            extra.push(("tailed.layers".into(), Box::new(move |w| write_layers(&t, w))));
            extra.push(("tailed.action".into(), Box::new(move |w| write_action(&lifted, w))));
            top
        }
    };
    files.push((format!("k{}", spec.k), top));

    let mut report = String::from("graph,vertices,edges\n");
    for (name, g) in &files {
        report.push_str(&format!("{name},{},{}\n", g.vertex_count(), g.edge_count()));
    }
    if let Some(prefix) = &spec.out {
        for (name, g) in &files {
            let mut w = create(&suffixed(prefix, &format!(".{name}.graph")))?;
            write_graph(g, &mut w)?;
            w.flush()?;
        }
        for (name, write) in &extra {
            let mut w = create(&suffixed(prefix, &format!(".{name}")))?;
            write(&mut w)?;
            w.flush()?;
        }
    }
    print!("{report}");
    Ok(())
}

pub fn spectral(graph: &Path, spec: &ExperimentSpec) -> Outcome {
    let g = load_graph(graph)?;
    let rep = mu2::<f64, _>(&g.base)?;
    let text = format!(
        "n,degree,mu2,residual\n{},{},{:.12},{:e}\n",
        g.vertex_count(),
        rep.degree,
        rep.mu2,
        rep.residual
    );
    emit(&text, spec.out.as_deref())?;
    if !(rep.residual <= 1e-8) {
        return Err(Failure::invariant(format!("eigenvector residual {:e} exceeds 1e-8", rep.residual)));
    }
    Ok(())
}

pub fn doubling(graph: &Path, tailed: Option<&Path>, spec: &ExperimentSpec) -> Outcome {
    let g = load_graph(graph)?;
    let d = metric(&g)?;
    let rows = covering_table(&d, spec.exact_limit);
    let rep = report_from_table(rows.clone(), false);
    let mut text = format!(
        "n,lambda_lo,lambda_hi,exact,witness_center,witness_radius\n{},{},{},{},{},{:.9}\n",
        d.len(),
        rep.lambda_lo,
        rep.lambda_hi,
        rep.is_exact(),
        rep.witness.0,
        rep.witness.1
    );
    let mut failures = Vec::new();
    if let Some(path) = tailed {
        let base = load_graph(path)?;
        let (v, e) = (base.vertex_count(), base.edge_count());
        let lemmas = verify_covering_lemmas(&d, &rows, tri(&g)?.to_f64_lossy(), g.s, g.t, v, e);
        text.push_str("\nregime,bound,checked,max_cover,max_ratio,holds\n");
        for r in &lemmas.regimes {
            text.push_str(&format!(
                "{:?},{},{},{},{:.6},{}\n",
                r.regime,
                r.bound,
                r.checked,
                r.max_cover,
                r.max_ratio,
                r.holds()
            ));
            if !r.holds() {
                failures.push(format!("{:?} covering bound {} exceeded by {}", r.regime, r.bound, r.max_cover));
            }
        }
        let claim = 2 * v * e * e;
        if rep.lambda_hi > claim {
            failures.push(format!("doubling constant {} exceeds 2|V||E|^2 = {claim}", rep.lambda_hi));
        }
    }
    emit(&text, spec.out.as_deref())?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::invariant(failures.join("; ")))
    }
}

pub fn poincare(graph: &Path, points: Option<&Path>, spec: &ExperimentSpec) -> Outcome {
    let g = load_graph(graph)?;
    let path = points.ok_or_else(|| Failure::usage("poincare needs --points"))?;
    let f = load_points(path)?;
    let ratio = poincare_ratio(&g.base, &f, f.p)?;
    let bound = if f.p == 2.0 {
        let rep = mu2::<f64, _>(&g.base)?;
        Some(rep.degree as f64 / rep.mu2)
    } else {
        None
    };
    let text = format!(
        "n,p,ratio,bound\n{},{},{:.12},{}\n",
        f.len(),
        f.p,
        ratio,
        bound.map_or_else(|| "NA".into(), |b| format!("{b:.12}"))
    );
    emit(&text, spec.out.as_deref())?;
    match bound {
        Some(b) if ratio > b * (1.0 + 1e-8) => {
            Err(Failure::invariant(format!("Poincare ratio {ratio} exceeds degree/mu2 = {b}")))
        }
        _ => Ok(()),
    }
}

pub fn c2(graph: Option<&Path>, spec: &ExperimentSpec) -> Outcome {
    let g = target_graph(graph, spec)?;
    let d = metric(&g)?;
    let opts = SdpOptions { tol: spec.tol, ..SdpOptions::default() };
    let b = c2_bracket_with(&d, &opts)?;
    let f = Points64::new(b.points(), 2.0)?;
    let realized = distortion(&f, &d)?.distortion;
    println!("n,lo,hi,lo_certified,lo_status,method,iterations,realized");
    println!(
        "{},{:.9},{:.9},{:.9},{},{},{},{:.9}",
        b.n,
        b.lo,
        b.hi,
        b.lo_certified,
        if b.lo_is_certified() { "certified" } else { "stall-detected" },
        b.method,
        b.iterations,
        realized
    );
    if let Some(out) = &spec.out {
        save_points(&f, out)?;
    }
    if realized > b.hi * (1.0 + 1e-6) {
        return Err(Failure::invariant(format!("realized distortion {realized} exceeds hi = {}", b.hi)));
    }
    Ok(())
}

pub fn optimize(graph: Option<&Path>, dim: usize, iters: usize, restarts: usize, spec: &ExperimentSpec) -> Outcome {
    let g = target_graph(graph, spec)?;
    let d = metric(&g)?;
    let opts = OptimizeOptions { dim, iters, restarts, seed: spec.seed, ..OptimizeOptions::default() };
    println!("n,p,dim,distortion,expansion,contraction");
    for &p in &spec.p {
        let f = optimize_embedding_with(&d, p, &opts)?;
        let rep = distortion(&f, &d)?;
        println!("{},{},{},{:.9},{:.9},{:.9}", d.len(), p, f.dim(), rep.distortion, rep.expansion, rep.contraction);
        if let Some(out) = &spec.out {
            let path = if spec.p.len() == 1 { out.clone() } else { suffixed(out, &format!(".p{p}")) };
            save_points(&f, &path)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct WitnessEntry {
    p: f64,
    facts: gluing::embedding::FactsReport<f64>,
    symmetrized_contraction: f64,
    witness: gluing::StretchWitness<f64>,
    bound_holds: Option<bool>,
}

pub fn witness(points: Option<&Path>, dim: usize, iters: usize, spec: &ExperimentSpec) -> Outcome {
    let base = spec.base_graph()?;
    let tailed = laakso_tailed(&base.graph)?;
    let lifted = lift_action(&base.action, &tailed)?;
    let d = metric(&tailed.st)?;
    let given = points.map(load_points).transpose()?;
    let ps: Vec<f64> = match &given {
        Some(f) => vec![f.p],
        None => spec.p.clone(),
    };
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for p in ps {
        let f = match &given {
            Some(f) => f.clone(),
            None => {
                let opts = OptimizeOptions { dim, iters, seed: spec.seed, ..OptimizeOptions::default() };
                optimize_embedding_with(&d, p, &opts)?
            }
        };
        let fbar = symmetrize(&f, &lifted, p)?;
        let facts = check_facts(&f, &fbar, &tailed, p)?;
        let sym = distortion(&fbar, &d)?;
        let w = stretch_witness_with(&f, &tailed, &lifted, p, &d)?;
        let bound_holds = w.satisfies_bound(FACT_SLACK);
        for fail in facts.failures() {
            failures.push(format!("p = {p}: {} fails (worst {:e} at {})", fail.name, fail.worst, fail.offender));
        }
        if sym.contraction > 1.0 + FACT_SLACK {
            failures.push(format!("p = {p}: symmetrized map contracts by {}", sym.contraction));
        }
        if bound_holds == Some(false) || !(w.margin > 0.0) {
            failures.push(format!("p = {p}: stretch margin {} below the required bound", w.margin));
        }
        entries.push(WitnessEntry { p, facts, symmetrized_contraction: sym.contraction, witness: w, bound_holds });
    }
    let json = serde_json::to_string_pretty(&entries).map_err(|e| Failure::usage(e.to_string()))?;
    emit(&(json + "\n"), spec.out.as_deref())?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::invariant(failures.join("; ")))
    }
}

pub fn growth(spec: &ExperimentSpec) -> Outcome {
    let base = spec.base_graph()?;
    let opts = GrowthOptions {
        k_max: spec.k,
        seed: spec.seed,
        p_values: spec.p.clone(),
        sdp: SdpOptions { tol: spec.tol, ..SdpOptions::default() },
        exact_limit: spec.exact_limit,
        ..GrowthOptions::default()
    };
    let table = growth_experiment(&base, &opts)?;
    let csv = table.to_csv();
    match &spec.out {
        Some(prefix) => {
            emit(&csv, Some(&suffixed(prefix, ".csv")))?;
            let json = serde_json::to_string_pretty(&table).map_err(|e| Failure::usage(e.to_string()))?;
            emit(&(json + "\n"), Some(&suffixed(prefix, ".json")))?;
        }
        None => print!("{csv}"),
    }
    if table.failures.is_empty() {
        Ok(())
    } else {
        for f in &table.failures {
            eprintln!("failure: {f}");
        }
        Err(Failure::invariant(format!("{} invariant(s) failed", table.failures.len())))
    }
}
