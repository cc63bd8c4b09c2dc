use super::{lp_pow, PointConfig};
use crate::error::{Error, Result};
use crate::metric_graph::MetricGraph;
use crate::scalar::{Length, Real};

/// Average of `||f(x) - f(y)||_p^p` over all ordered pairs (diagonal
/// included) divided by its average over edges. `0 / 0` is taken as 0.
pub fn poincare_ratio<F: Real, T: Length>(g: &MetricGraph<T>, f: &PointConfig<F>, p: F) -> Result<F> {
    let n = g.vertex_count();
    if f.len() != n {
        return Err(Error::SizeMismatch { expected: n, found: f.len() });
    }
    g.regular_degree()?;
    if g.edge_count() == 0 {
        return Err(Error::InvalidArgument("graph has no edges".into()));
    }
    let mut pairs = F::zero();
    for x in 0..n {
        for y in (x + 1)..n {
            pairs += lp_pow(f.point(x), f.point(y), p);
        }
    }
    let pairs = pairs * F::lit(2.0) / F::lit((n * n) as f64);
    let edges = g.edges().iter().map(|e| lp_pow(f.point(e.u), f.point(e.v), p)).sum::<F>()
        / F::lit(g.edge_count() as f64);
    if edges == F::zero() {
        return if pairs == F::zero() {
            Ok(F::zero())
        } else {
            Err(Error::InvalidArgument("map collapses every edge but not every pair".into()))
        };
    }
    Ok(pairs / edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_graphs::{cycle, mu2};
    use crate::Rational;

    #[test]
    fn constant_map_is_zero() {
        let (g, _) = cycle::<Rational>(5).unwrap();
        let f = PointConfig::new(vec![vec![1.0, 2.0]; 5], 2.0).unwrap();
        assert_eq!(poincare_ratio(&g, &f, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn eigenvector_is_tight() {
        let (g, _) = cycle::<Rational>(8).unwrap();
        let spec = mu2::<f64, _>(&g).unwrap();
        let f = PointConfig::new(spec.eigenvector.iter().map(|&x| vec![x]).collect(), 2.0).unwrap();
        let r = poincare_ratio(&g, &f, 2.0).unwrap();
        let bound = spec.degree as f64 / spec.mu2;
        assert!((r - bound).abs() <= 1e-8 * bound, "{r} vs {bound}");
    }

    #[test]
    fn rejects_irregular() {
        let g = MetricGraph::<Rational>::unweighted(3, [(0, 1), (1, 2)]).unwrap();
        let f = PointConfig::new(vec![vec![0.0], vec![1.0], vec![2.0]], 2.0).unwrap();
        assert!(matches!(poincare_ratio(&g, &f, 2.0), Err(Error::NotRegular { .. })));
    }
}
