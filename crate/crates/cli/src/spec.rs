use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gluing::base_graphs::{cayley_cycle, complete, hypercube, k2};
use gluing::embedding::BaseGraph;
use gluing::Rational;
use serde::Deserialize;

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    /// A single edge.
    K2,
    /// Cayley graph of Z_m with generators ±g (`--m`, `--gens`).
    Cayley,
    /// The r-dimensional hypercube (`--r`).
    Hypercube,
    /// The complete graph K_m (`--m`).
    Complete,
}

/// Flags shared by every subcommand. Each may also be given in the `--spec` JSON file
/// under the same name (`exact_limit` for `--exact-limit`); flags take precedence.
#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Common {
    /// Base graph family.
    #[arg(long, value_enum)]
    pub base: Option<BaseKind>,
    /// Order of the cyclic group or complete graph.
    #[arg(long)]
    pub m: Option<usize>,
    /// Cayley generators, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub gens: Option<Vec<usize>>,
    /// Hypercube dimension.
    #[arg(long)]
    pub r: Option<usize>,
    /// Composition depth (largest depth for `growth`).
    #[arg(long)]
    pub k: Option<usize>,
    /// Norm exponents, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// Relative bracket width for c2.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed for random starts and sampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file or path prefix.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Largest ball solved by exact set cover.
    #[arg(long)]
    pub exact_limit: Option<usize>,
    /// JSON file with any of the flags above.
    #[arg(long)]
    #[serde(skip)]
    pub spec: Option<PathBuf>,
}

/// Fully resolved experiment description.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub base: Option<BaseKind>,
    pub m: Option<usize>,
    pub gens: Vec<usize>,
    pub r: Option<usize>,
    pub k: usize,
    pub p: Vec<f64>,
    pub tol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub exact_limit: usize,
}

impl Common {
    pub fn resolve(&self) -> Result<ExperimentSpec, Failure> {
        let file = match &self.spec {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::usage(format!("cannot read spec {}: {e}", path.display())))?;
                serde_json::from_str::<Common>(&text)
                    .map_err(|e| Failure::usage(format!("invalid spec {}: {e}", path.display())))?
            }
            None => Common::default(),
        };
        let spec = ExperimentSpec {
            base: self.base.or(file.base),
            m: self.m.or(file.m),
            gens: self.gens.clone().or(file.gens).unwrap_or_else(|| vec![1]),
            r: self.r.or(file.r),
            k: self.k.or(file.k).unwrap_or(1),
            p: self.p.clone().or(file.p).unwrap_or_else(|| vec![2.0]),
            tol: self.tol.or(file.tol).unwrap_or(1e-3),
            seed: self.seed.or(file.seed).unwrap_or(0),
            out: self.out.clone().or(file.out),
            exact_limit: self.exact_limit.or(file.exact_limit).unwrap_or(gluing::doubling::DEFAULT_EXACT_LIMIT),
        };
        if !(spec.tol > 0.0) {
            return Err(Failure::usage(format!("--tol must be positive, got {}", spec.tol)));
        }
        if let Some(p) = spec.p.iter().find(|p| !(**p >= 1.0) || !p.is_finite()) {
            return Err(Failure::usage(format!("--p values must be >= 1, got {p}")));
        }
        Ok(spec)
    }
}

impl ExperimentSpec {
    pub fn base_name(&self) -> String {
        match self.base {
            Some(BaseKind::K2) | None => "k2".into(),
            Some(BaseKind::Cayley) => format!(
                "cayley-{}-{}",
                self.m.unwrap_or(0),
                self.gens.iter().map(|g| g.to_string()).collect::<Vec<_>>().join("_")
            ),
            Some(BaseKind::Hypercube) => format!("hypercube-{}", self.r.unwrap_or(0)),
            Some(BaseKind::Complete) => format!("complete-{}", self.m.unwrap_or(0)),
        }
    }

    pub fn base_graph(&self) -> Result<BaseGraph, Failure> {
        let kind = self.base.ok_or_else(|| Failure::usage("--base is required"))?;
        let need_m = || self.m.ok_or_else(|| Failure::usage("--m is required for this base"));
        let (graph, action) = match kind {
            BaseKind::K2 => k2::<Rational>(),
            BaseKind::Cayley => cayley_cycle::<Rational>(need_m()?, &self.gens),
            BaseKind::Hypercube => hypercube::<Rational>(self.r.ok_or_else(|| Failure::usage("--r is required"))?),
            BaseKind::Complete => complete::<Rational>(need_m()?),
        }
        .map_err(Failure::from)?;
        Ok(BaseGraph { name: self.base_name(), graph, action })
    }
}
