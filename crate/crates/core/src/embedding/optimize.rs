//! Heuristic low-distortion embeddings into `l_p^dim`.
//!
//! Minimizes a log-sum-exp smoothing of `max log ratio - min log ratio` over
//! all pairs with Adam, annealing the temperature, from a classical-scaling
//! start and several random starts. Only upper bounds on `c_p` come out of
//! this.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{distortion, make_noncontracting, PointConfig};
use crate::error::{Error, Result};
use crate::linalg::SymmetricEigen;
use crate::metric_graph::DistanceMatrix;
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct OptimizeOptions {
    pub dim: usize,
    pub iters: usize,
    pub restarts: usize,
    pub seed: u64,
    pub learning_rate: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { dim: 2, iters: 2000, restarts: 4, seed: 0, learning_rate: 0.02 }
    }
}

pub fn optimize_embedding<F: Real>(
    d: &DistanceMatrix<F>,
    p: F,
    dim: usize,
    seed: u64,
    iters: usize,
) -> Result<PointConfig<F>> {
    optimize_embedding_with(d, p, &OptimizeOptions { dim, iters, seed, ..OptimizeOptions::default() })
}

pub fn optimize_embedding_with<F: Real>(d: &DistanceMatrix<F>, p: F, opts: &OptimizeOptions) -> Result<PointConfig<F>> {
    let n = d.len();
    if opts.dim == 0 || opts.restarts == 0 {
        return Err(Error::InvalidArgument("dimension and restart count must be positive".into()));
    }
    if !(p >= F::one()) {
        return Err(Error::InvalidArgument(format!("norm exponent must be >= 1, got {p}")));
    }
    if n < 2 {
        return PointConfig::new(vec![vec![F::zero(); opts.dim]; n.max(1)], p);
    }
    let scale = (0..n).flat_map(|i| d.row(i).iter().copied()).fold(F::zero(), F::max);
    if !(scale > F::zero()) {
        return Err(Error::NotMetric("all distances are zero".into()));
    }
    let unit = d.map(|&x| x / scale);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(F, Vec<Vec<F>>)> = None;
    for restart in 0..opts.restarts {
        let mut x = if restart == 0 {
            classical_mds(&unit, opts.dim)
        } else {
            (0..n)
                .map(|_| {
                    (0..opts.dim)
                        .map(|_| F::lit(StandardNormal.sample(&mut rng)) * F::lit(0.5))
                        .collect()
                })
                .collect()
        };
        // break ties so that no pair starts at distance zero
        for row in x.iter_mut() {
            for c in row.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *c += F::lit(1e-4 * z);
            }
        }
        let (dist, pts) = descend(&unit, p, x, opts);
        log::debug!("optimize restart {restart}: distortion {dist}");
        if best.as_ref().is_none_or(|(b, _)| dist < *b) {
            best = Some((dist, pts));
        }
    }
    let (_, pts) = best.expect("at least one restart");
    let f = PointConfig::new(pts, p)?;
    make_noncontracting(&f, d)
}

/// Coordinates of classical multidimensional scaling, padded to `dim`.
pub fn classical_mds<F: Real>(d: &DistanceMatrix<F>, dim: usize) -> Vec<Vec<F>> {
    let n = d.len();
    let nf = F::lit(n as f64);
    let sq: Vec<F> = (0..n * n).map(|k| d.row(k / n)[k % n] * d.row(k / n)[k % n]).collect();
    let mean: Vec<F> = (0..n).map(|i| sq[i * n..(i + 1) * n].iter().copied().sum::<F>() / nf).collect();
    let total = mean.iter().copied().sum::<F>() / nf;
    let b: Vec<F> = (0..n * n)
        .map(|k| -F::lit(0.5) * (sq[k] - mean[k / n] - mean[k % n] + total))
        .collect();
    let eig = SymmetricEigen::new(&b, n);
    (0..n)
        .map(|i| {
            (0..dim)
                .map(|c| {
                    if c < n {
                        let j = n - 1 - c;
                        eig.values[j].max(F::zero()).sqrt() * eig.vector(j)[i]
                    } else {
                        F::zero()
                    }
                })
                .collect()
        })
        .collect()
}

fn log_ratios<F: Real>(d: &DistanceMatrix<F>, x: &[Vec<F>], p: F) -> Vec<F> {
    let n = d.len();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(super::lp_dist(&x[i], &x[j], p).ln() - d.get(i, j).ln());
        }
    }
    out
}

fn spread<F: Real>(l: &[F]) -> F {
    let hi = l.iter().copied().fold(F::neg_infinity(), F::max);
    let lo = l.iter().copied().fold(F::infinity(), F::min);
    (hi - lo).exp()
}

/// Softmax weights of `sign * l / tau`.
fn softmax<F: Real>(l: &[F], tau: F, sign: F) -> Vec<F> {
    let top = l.iter().map(|&v| sign * v / tau).fold(F::neg_infinity(), F::max);
    let mut w: Vec<F> = l.iter().map(|&v| (sign * v / tau - top).exp()).collect();
    let total: F = w.iter().copied().sum();
    for v in w.iter_mut() {
        *v /= total;
    }
    w
}

fn descend<F: Real>(d: &DistanceMatrix<F>, p: F, mut x: Vec<Vec<F>>, opts: &OptimizeOptions) -> (F, Vec<Vec<F>>) {
    let n = d.len();
    let dim = opts.dim;
    let two = F::lit(2.0);
    let eps_abs = F::lit(1e-9);
    let (b1, b2, adam_eps) = (F::lit(0.9), F::lit(0.999), F::lit(1e-12));
    let mut m = vec![vec![F::zero(); dim]; n];
    let mut v = vec![vec![F::zero(); dim]; n];
    let iters = opts.iters.max(1);
    let (tau0, tau1) = (0.3f64, 1e-4f64);
    let (lr0, lr1) = (opts.learning_rate, opts.learning_rate * 1e-2);

    let mut l = log_ratios(d, &x, p);
    let mut best = (spread(&l), x.clone());
    let mut grad = vec![vec![F::zero(); dim]; n];
    for it in 0..iters {
        let frac = it as f64 / iters as f64;
        let tau = F::lit(tau0 * (tau1 / tau0).powf(frac));
        let lr = F::lit(lr0 * (lr1 / lr0).powf(frac));
        let wp = softmax(&l, tau, F::one());
        let wm = softmax(&l, tau, -F::one());
        for g in grad.iter_mut() {
            g.iter_mut().for_each(|c| *c = F::zero());
        }
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let w = wp[k] - wm[k];
                k += 1;
                if w.abs() < F::lit(1e-14) {
                    continue;
                }
                // d/dx_i log ||x_i - x_j||_p = s^(p-2) delta / ||delta||_p^p
                let mut terms = vec![F::zero(); dim];
                let mut norm_p = F::zero();
                for c in 0..dim {
                    let delta = x[i][c] - x[j][c];
                    let s = if p < two { (delta * delta + eps_abs * eps_abs).sqrt() } else { delta.abs() };
                    let sp = if p == two { s * s } else { s.powf(p) };
                    norm_p += sp;
                    terms[c] = if p == two { delta } else if s > F::zero() { sp / s / s * delta } else { F::zero() };
                }
                if norm_p <= F::zero() {
                    continue;
                }
                let coef = w / norm_p;
                for c in 0..dim {
                    grad[i][c] += coef * terms[c];
                    grad[j][c] -= coef * terms[c];
                }
            }
        }
        let t = (it + 1) as i32;
        let c1 = F::one() - b1.powi(t);
        let c2 = F::one() - b2.powi(t);
        for i in 0..n {
            for c in 0..dim {
                let g = grad[i][c];
                m[i][c] = b1 * m[i][c] + (F::one() - b1) * g;
                v[i][c] = b2 * v[i][c] + (F::one() - b2) * g * g;
                x[i][c] -= lr * (m[i][c] / c1) / ((v[i][c] / c2).sqrt() + adam_eps);
            }
        }
        l = log_ratios(d, &x, p);
        let cur = spread(&l);
        if cur.is_finite() && cur < best.0 {
            best = (cur, x.clone());
        }
    }
    // report the true distortion of the best iterate
    let dist = PointConfig::new(best.1.clone(), p)
        .ok()
        .and_then(|f| distortion(&f, d).ok())
        .map_or(F::infinity(), |r| r.distortion);
    (dist, best.1)
}
