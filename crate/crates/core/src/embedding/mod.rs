//! Embeddings of finite metrics into `L_p`: distortion, the SDP bracket for
//! `c_2`, heuristic optimisation, symmetrisation over a group action, and the
//! inequalities behind the stretch-increase argument.

mod fourpoint;
mod growth;
mod ipm;
mod optimize;
mod poincare;
mod sdp;
mod symmetry;

pub use fourpoint::{fourpoint, FourPointSlack};
pub use growth::{growth_experiment, BaseGraph, GrowthOptions, GrowthRow, GrowthTable};
pub use optimize::{classical_mds, optimize_embedding, optimize_embedding_with, OptimizeOptions};
pub use poincare::poincare_ratio;
pub use sdp::{c2_bracket, c2_bracket_with, c2_probe, llr_lower_bound, SdpBracket, SdpOptions};
pub use symmetry::{
    beta_of, check_facts, rho_profile, stretch_witness, stretch_witness_with, symmetrize, FactCheck, FactsReport,
    StretchWitness,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric_graph::DistanceMatrix;
use crate::scalar::Real;

/// A map from vertices `0..n` to points of `R^dim`, measured in `l_p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointConfig<F> {
    points: Vec<Vec<F>>,
    pub p: F,
}

impl<F: Real> PointConfig<F> {
    pub fn new(points: Vec<Vec<F>>, p: F) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.is_empty() || dim == 0 {
            return Err(Error::InvalidArgument("point configuration needs at least one point of dimension >= 1".into()));
        }
        if let Some(bad) = points.iter().find(|x| x.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        if !(p >= F::one()) || !p.is_finite() {
            return Err(Error::InvalidArgument(format!("norm exponent must be finite and >= 1, got {p}")));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Self { points, p })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<F>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[F] {
        &self.points[i]
    }

    pub fn into_points(self) -> Vec<Vec<F>> {
        self.points
    }

    /// `||f(i) - f(j)||_p`.
    pub fn dist(&self, i: usize, j: usize) -> F {
        lp_dist(&self.points[i], &self.points[j], self.p)
    }

    pub fn scaled(&self, c: F) -> Self {
        Self { points: self.points.iter().map(|x| x.iter().map(|&v| v * c).collect()).collect(), p: self.p }
    }

    pub fn with_p(&self, p: F) -> Result<Self> {
        Self::new(self.points.clone(), p)
    }
}

/// `sum_k |a_k - b_k|^p`.
pub fn lp_pow<F: Real>(a: &[F], b: &[F], p: F) -> F {
    let two = F::lit(2.0);
    if p == two {
        a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
    } else if p == F::one() {
        a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum()
    } else {
        a.iter().zip(b).map(|(&x, &y)| (x - y).abs().powf(p)).sum()
    }
}

/// `||a - b||_p`.
pub fn lp_dist<F: Real>(a: &[F], b: &[F], p: F) -> F {
    let s = lp_pow(a, b, p);
    if p == F::lit(2.0) {
        s.sqrt()
    } else if p == F::one() {
        s
    } else {
        s.powf(p.recip())
    }
}

/// Lipschitz constants of a map and its inverse.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingReport<F> {
    /// `max ||f(x) - f(y)|| / d(x, y)`.
    pub expansion: F,
    /// `max d(x, y) / ||f(x) - f(y)||`.
    pub contraction: F,
    pub distortion: F,
    pub expansion_pair: (usize, usize),
    pub contraction_pair: (usize, usize),
}

pub fn distortion<F: Real>(f: &PointConfig<F>, d: &DistanceMatrix<F>) -> Result<EmbeddingReport<F>> {
    let n = d.len();
    if f.len() != n {
        return Err(Error::SizeMismatch { expected: n, found: f.len() });
    }
    let mut expansion = F::zero();
    let mut contraction = F::zero();
    let mut expansion_pair = (0, 0);
    let mut contraction_pair = (0, 0);
    for i in 0..n {
        for j in (i + 1)..n {
            let image = f.dist(i, j);
            if image == F::zero() {
                return Err(Error::DuplicatePoints { u: i, v: j });
            }
            let ratio = image / *d.get(i, j);
            if ratio > expansion {
                expansion = ratio;
                expansion_pair = (i, j);
            }
            if ratio.recip() > contraction {
                contraction = ratio.recip();
                contraction_pair = (i, j);
            }
        }
    }
    if n < 2 {
        expansion = F::one();
        contraction = F::one();
    }
    Ok(EmbeddingReport { expansion, contraction, distortion: expansion * contraction, expansion_pair, contraction_pair })
}

/// Rescales `f` so that its largest contraction is exactly 1.
pub fn make_noncontracting<F: Real>(f: &PointConfig<F>, d: &DistanceMatrix<F>) -> Result<PointConfig<F>> {
    let rep = distortion(f, d)?;
    Ok(f.scaled(rep.contraction))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle4() -> DistanceMatrix<f64> {
        DistanceMatrix::from_rows(vec![
            vec![0.0, 1.0, 2.0, 1.0],
            vec![1.0, 0.0, 1.0, 2.0],
            vec![2.0, 1.0, 0.0, 1.0],
            vec![1.0, 2.0, 1.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn isometric_path() {
        let d = DistanceMatrix::from_rows(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]).unwrap();
        let f = PointConfig::new(vec![vec![0.0], vec![1.0], vec![2.0]], 2.0f64).unwrap();
        let r = distortion(&f, &d).unwrap();
        assert!((r.distortion - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_corners() {
        let f = PointConfig::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]], 2.0).unwrap();
        let r = distortion(&f, &cycle4()).unwrap();
        assert!((r.distortion - 2f64.sqrt()).abs() < 1e-12);
        let r2 = distortion(&f.scaled(3.7), &cycle4()).unwrap();
        assert!((r2.distortion - r.distortion).abs() < 1e-12);
        // same square is an isometry in l_1
        let l1 = distortion(&f.with_p(1.0).unwrap(), &cycle4()).unwrap();
        assert!((l1.distortion - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let f = PointConfig::new(vec![vec![0.0], vec![0.0], vec![1.0], vec![2.0]], 2.0).unwrap();
        assert!(matches!(distortion(&f, &cycle4()), Err(Error::DuplicatePoints { u: 0, v: 1 })));
        let g = PointConfig::new(vec![vec![0.0], vec![1.0]], 2.0).unwrap();
        assert!(matches!(distortion(&g, &cycle4()), Err(Error::SizeMismatch { .. })));
        assert!(PointConfig::new(vec![vec![0.0], vec![1.0, 2.0]], 2.0).is_err());
        assert!(PointConfig::new(vec![vec![0.0]], 0.5).is_err());
        assert!(PointConfig::new(vec![vec![f64::NAN]], 2.0).is_err());
    }

    #[test]
    fn lp_norms() {
        let a = [0.0f64, 0.0];
        let b = [3.0f64, 4.0];
        assert!((lp_dist(&a, &b, 2.0) - 5.0).abs() < 1e-15);
        assert!((lp_dist(&a, &b, 1.0) - 7.0).abs() < 1e-15);
        let p3: f64 = (27.0f64 + 64.0).powf(1.0 / 3.0);
        assert!((lp_dist(&a, &b, 3.0) - p3).abs() < 1e-12);
    }
}
