//! Bracketing the least Euclidean distortion `c_2(X)`.
//!
//! Working with the squared-distance matrix `E`, the value `c` is feasible iff
//! the box `{E : E_ii = 0, d_ij^2 <= E_ij <= c^2 d_ij^2}` meets the cone
//! `K = {E symmetric : -J E J is PSD}` of Euclidean distance matrices
//! (`J = I - 11^T / n`). Feasibility is decided by Dykstra's alternating
//! projections and `c` is located by bisection.
//!
//! The upper end of the bracket is always realized: it is the distortion of an
//! explicit Gram matrix. The lower end is the largest `c` for which the
//! projections stalled; `lo_certified` is a rigorous bound read off the dual
//! multipliers of a failed run.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{project_psd, SymmetricEigen};
use crate::metric_graph::DistanceMatrix;
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct SdpOptions {
    /// Stop when `hi / lo <= 1 + tol`.
    pub tol: f64,
    /// A test at `c` succeeds when the realized distortion is at most `c (1 + feasibility_tol)`.
    pub feasibility_tol: f64,
    pub max_iter: usize,
    /// A test fails when the projection gap drops by less than `stall_eps` over this many iterations.
    pub stall_window: usize,
    pub stall_eps: f64,
    pub max_n: usize,
    /// Iterations between realizations of the current iterate.
    pub check_every: usize,
    /// Apply Dykstra's correction terms (otherwise plain alternating projections).
    pub dykstra: bool,
    /// Largest `n` solved by the interior point method before falling back to projections.
    pub ipm_max_n: usize,
    pub ipm_max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            feasibility_tol: 1e-7,
            max_iter: 20_000,
            stall_window: 500,
            stall_eps: 1e-10,
            max_n: 1500,
            check_every: 10,
            dykstra: true,
            ipm_max_n: 100,
            ipm_max_iter: 100,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SdpBracket<F> {
    /// Largest `c` at which feasibility failed (or 1).
    pub lo: F,
    /// Distortion of the embedding encoded by `gram`.
    pub hi: F,
    /// Lower bound certified by a dual solution; `lo_certified <= c_2`.
    pub lo_certified: F,
    /// Row-major `n x n` Gram matrix in the units of the input metric.
    #[serde(skip)]
    pub gram: Vec<F>,
    pub n: usize,
    /// Largest relative violation of `d^2 <= E <= hi^2 d^2` and of `G >= 0` by `gram`.
    pub max_violation: F,
    pub iterations: usize,
    pub feasibility_tests: usize,
    /// `"interior-point"`, `"projections"` or both.
    pub method: String,
}

impl<F: Real> SdpBracket<F> {
    /// Whether `lo` carries a dual certificate rather than a stall heuristic.
    pub fn lo_is_certified(&self) -> bool {
        self.lo <= self.lo_certified
    }
}

impl<F: Real> SdpBracket<F> {
    /// Rows of a point configuration realizing `gram`.
    pub fn points(&self) -> Vec<Vec<F>> {
        crate::linalg::gram_factor(&self.gram, self.n)
    }
}

pub fn c2_bracket<F: Real>(d: &DistanceMatrix<F>, tol: F) -> Result<SdpBracket<F>> {
    c2_bracket_with(d, &SdpOptions { tol: tol.as_f64(), ..SdpOptions::default() })
}

pub fn c2_bracket_with<F: Real>(d: &DistanceMatrix<F>, opts: &SdpOptions) -> Result<SdpBracket<F>> {
    let n = d.len();
    if n > opts.max_n {
        return Err(Error::TooLarge { n, limit: opts.max_n });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    check_metric(d)?;
    let one = F::one();
    if n <= 2 {
        let mut gram = vec![F::zero(); n * n];
        if n == 2 {
            let half = *d.get(0, 1) * F::lit(0.5);
            gram[0] = half * half;
            gram[3] = half * half;
            gram[1] = -half * half;
            gram[2] = -half * half;
        }
        return Ok(SdpBracket {
            lo: one,
            hi: one,
            lo_certified: one,
            gram,
            n,
            max_violation: F::zero(),
            iterations: 0,
            feasibility_tests: 0,
            method: "trivial".into(),
        });
    }

    let scale = (0..n).flat_map(|i| d.row(i).iter().copied()).fold(F::zero(), F::max);
    let sq: Vec<F> = (0..n * n)
        .map(|k| {
            let x = d.row(k / n)[k % n] / scale;
            x * x
        })
        .collect();
    let solver = Solver::new(n, &sq, opts);

    let (mut best_e, mut hi) = solver.initial();
    let mut lo = one;
    let mut lo_certified = one;
    let mut iterations = 0;
    let mut tests = 0;
    let mut methods = Vec::new();
    if n <= opts.ipm_max_n && hi > lo * (one + F::lit(opts.tol)) {
        let sq64: Vec<f64> = sq.iter().map(|x| x.as_f64()).collect();
        let res = super::ipm::solve(
            &sq64,
            n,
            &super::ipm::IpmOptions { max_iter: opts.ipm_max_iter, gap: opts.tol / 100.0 },
        );
        iterations += res.iterations;
        methods.push("interior-point");
        let ipm_hi = F::lit(res.hi);
        if ipm_hi < hi {
            hi = ipm_hi;
            best_e = pinned_to_edm(&res.pinned_gram, n);
        }
        lo_certified = lo_certified.max(F::lit(res.lo_certified)).min(hi);
        lo = lo_certified;
    }
    if hi > lo * (one + F::lit(opts.tol)) {
        methods.push("projections");
    }
    let ratio = one + F::lit(opts.tol);
    let shrink = F::lit(opts.tol / 4.0);
    while hi > lo * ratio {
        let c = (lo * hi).sqrt();
        // aim at a slightly smaller box so success is reached from the interior
        let inner = c / (one + shrink);
        let out = solver.feasibility(inner, c, &best_e);
        iterations += out.iterations;
        tests += 1;
        if let Some((e, dist)) = out.best {
            if dist < hi {
                hi = dist;
                best_e = e;
            }
        }
        if !out.feasible {
            lo = lo.max(inner);
            if let Some(cert) = llr_lower_bound(&out.dual, &sq, n) {
                lo_certified = lo_certified.max(cert);
            }
        }
        log::debug!("c2 bisection: c={c} feasible={} bracket=[{lo}, {hi}] iters={}", out.feasible, out.iterations);
    }
    let lo_certified = lo_certified.min(hi);
    lo = lo.max(lo_certified).min(hi);

    // Gram matrix of the stored realization, in input units
    let mut gram = gram_of_edm(&best_e, n);
    let (dmin, _) = ratio_range(&best_e, &sq, n);
    let unit = scale * scale / dmin;
    for g in gram.iter_mut() {
        *g *= unit;
    }
    let max_violation = violation(&gram, d, hi);
    Ok(SdpBracket {
        lo,
        hi,
        lo_certified,
        gram,
        n,
        max_violation,
        iterations,
        feasibility_tests: tests,
        method: if methods.is_empty() { "classical-scaling".into() } else { methods.join("+") },
    })
}

/// Runs a single feasibility test at `c` from the classical-scaling start.
/// Returns whether it succeeded, the best realized distortion and the iteration count.
pub fn c2_probe<F: Real>(d: &DistanceMatrix<F>, c: F, opts: &SdpOptions) -> Result<(bool, F, usize)> {
    check_metric(d)?;
    let n = d.len();
    let scale = (0..n).flat_map(|i| d.row(i).iter().copied()).fold(F::zero(), F::max);
    let sq: Vec<F> = (0..n * n)
        .map(|k| {
            let x = d.row(k / n)[k % n] / scale;
            x * x
        })
        .collect();
    let solver = Solver::new(n, &sq, opts);
    let (start, _) = solver.initial();
    let out = solver.feasibility(c / (F::one() + F::lit(opts.tol / 4.0)), c, &start);
    Ok((out.feasible, out.best.map_or(F::infinity(), |b| b.1), out.iterations))
}

fn check_metric<F: Real>(d: &DistanceMatrix<F>) -> Result<()> {
    let n = d.len();
    for i in 0..n {
        if *d.get(i, i) != F::zero() {
            return Err(Error::NotMetric(format!("d({i}, {i}) = {} is not zero", d.get(i, i))));
        }
        for j in (i + 1)..n {
            let x = *d.get(i, j);
            if !(x > F::zero()) || !x.is_finite() {
                return Err(Error::NotMetric(format!("d({i}, {j}) = {x} is not positive")));
            }
            if x != *d.get(j, i) {
                return Err(Error::NotMetric(format!("d({i}, {j}) != d({j}, {i})")));
            }
        }
    }
    Ok(())
}

/// Squared distances of the points `0, x_1, ..., x_{n-1}` with Gram matrix `g` of `x_1..`.
fn pinned_to_edm<F: Real>(g: &faer::Mat<f64>, n: usize) -> Vec<F> {
    let mut e = vec![F::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = match (i, j) {
                (0, j) => g[(j - 1, j - 1)],
                (i, 0) => g[(i - 1, i - 1)],
                (i, j) => g[(i - 1, i - 1)] + g[(j - 1, j - 1)] - 2.0 * g[(i - 1, j - 1)],
            };
            e[i * n + j] = F::lit(v.max(0.0));
        }
    }
    e
}

/// Realized squared distances of the Gram matrix `-JYJ/2`.
fn realize<F: Real>(y: &[F], n: usize) -> Vec<F> {
    let half = F::lit(0.5);
    let mut e = vec![F::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                e[i * n + j] = (y[i * n + j] - (y[i * n + i] + y[j * n + j]) * half).max(F::zero());
            }
        }
    }
    e
}

/// `min` and `max` of `E_ij / L_ij` over `i != j`.
fn ratio_range<F: Real>(e: &[F], l: &[F], n: usize) -> (F, F) {
    let mut lo = F::infinity();
    let mut hi = F::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let r = e[i * n + j] / l[i * n + j];
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi)
}

fn edm_distortion<F: Real>(e: &[F], l: &[F], n: usize) -> F {
    let (lo, hi) = ratio_range(e, l, n);
    if lo > F::zero() {
        (hi / lo).sqrt()
    } else {
        F::infinity()
    }
}

/// `G = -J E J / 2`.
fn gram_of_edm<F: Real>(e: &[F], n: usize) -> Vec<F> {
    let nf = F::lit(n as f64);
    let row_mean: Vec<F> = (0..n).map(|i| e[i * n..(i + 1) * n].iter().copied().sum::<F>() / nf).collect();
    let total = row_mean.iter().copied().sum::<F>() / nf;
    let half = F::lit(0.5);
    let mut g = vec![F::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = -half * (e[i * n + j] - row_mean[i] - row_mean[j] + total);
        }
    }
    g
}

fn violation<F: Real>(gram: &[F], d: &DistanceMatrix<F>, hi: F) -> F {
    let n = d.len();
    let mut worst = F::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let e = gram[i * n + i] + gram[j * n + j] - gram[i * n + j] - gram[j * n + i];
            let l = *d.get(i, j) * *d.get(i, j);
            worst = worst.max((l - e) / l).max((e - hi * hi * l) / (hi * hi * l));
        }
    }
    let eig = SymmetricEigen::new(gram, n);
    let top = eig.values.last().copied().unwrap_or_else(F::zero).abs().max(F::min_positive_value());
    worst.max(-eig.min_value() / top)
}

struct Outcome<F> {
    feasible: bool,
    /// Best realization seen and its distortion.
    best: Option<(Vec<F>, F)>,
    /// Dykstra correction on the cone side; an element of the polar cone.
    dual: Vec<F>,
    iterations: usize,
}

struct Solver<'a, F> {
    n: usize,
    sq: &'a [F],
    opts: &'a SdpOptions,
    /// Householder vector mapping `1` to a multiple of the last basis vector, scaled so `H = I - u u^T`.
    u: Vec<F>,
}

impl<'a, F: Real> Solver<'a, F> {
    fn new(n: usize, sq: &'a [F], opts: &'a SdpOptions) -> Self {
        let root = F::lit(n as f64).sqrt();
        let mut v = vec![F::one(); n];
        v[n - 1] = F::one() + root;
        let norm2: F = v.iter().map(|&x| x * x).sum();
        let k = (F::lit(2.0) / norm2).sqrt();
        Self { n, sq, opts, u: v.into_iter().map(|x| x * k).collect() }
    }

    /// Best of classical scaling and the regular simplex.
    fn initial(&self) -> (Vec<F>, F) {
        let n = self.n;
        let e = realize(&self.project_cone(self.sq), n);
        let mds = edm_distortion(&e, self.sq, n);
        let mut simplex = vec![F::one(); n * n];
        for i in 0..n {
            simplex[i * n + i] = F::zero();
        }
        let flat = edm_distortion(&simplex, self.sq, n);
        if mds <= flat {
            (e, mds)
        } else {
            (simplex, flat)
        }
    }

    /// `H X H` for the reflector `H = I - u u^T`.
    fn reflect(&self, x: &mut [F]) {
        let n = self.n;
        let u = &self.u;
        let a: Vec<F> = (0..n).map(|i| x[i * n..(i + 1) * n].iter().zip(u).map(|(&p, &q)| p * q).sum()).collect();
        let alpha: F = a.iter().zip(u).map(|(&p, &q)| p * q).sum();
        for i in 0..n {
            for j in 0..n {
                x[i * n + j] = x[i * n + j] - u[i] * a[j] - a[i] * u[j] + alpha * u[i] * u[j];
            }
        }
    }

    /// Frobenius projection onto `{Z : -J Z J is PSD}`.
    fn project_cone(&self, z: &[F]) -> Vec<F> {
        let n = self.n;
        let m = n - 1;
        let mut x: Vec<F> = z.iter().map(|&v| -v).collect();
        self.reflect(&mut x);
        let mut block = vec![F::zero(); m * m];
        for i in 0..m {
            block[i * m..(i + 1) * m].copy_from_slice(&x[i * n..i * n + m]);
        }
        let block = project_psd(&block, m);
        for i in 0..m {
            x[i * n..i * n + m].copy_from_slice(&block[i * m..(i + 1) * m]);
        }
        self.reflect(&mut x);
        for v in x.iter_mut() {
            *v = -*v;
        }
        x
    }

    fn project_box(&self, z: &[F], upper: F) -> Vec<F> {
        let n = self.n;
        let mut out = vec![F::zero(); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let l = self.sq[i * n + j];
                let v = ((z[i * n + j] + z[j * n + i]) * F::lit(0.5)).max(l).min(upper * l);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }

    /// Projects towards the box at `target`; succeeds once a realization has distortion at most `c`.
    fn feasibility(&self, target: F, c: F, start: &[F]) -> Outcome<F> {
        let n = self.n;
        let opts = self.opts;
        let upper = target * target;
        let accept = c * (F::one() + F::lit(opts.feasibility_tol));
        let mut x = self.project_box(start, upper);
        let mut p = vec![F::zero(); n * n];
        let mut q = vec![F::zero(); n * n];
        let mut acc = vec![F::zero(); n * n];
        let mut gaps: Vec<F> = Vec::new();
        let mut best: Option<(Vec<F>, F)> = None;
        let mut iterations = 0;
        for it in 1..=opts.max_iter {
            iterations = it;
            let z: Vec<F> = x.iter().zip(&p).map(|(&a, &b)| a + b).collect();
            let y = self.project_cone(&z);
            if opts.dykstra {
                for k in 0..n * n {
                    p[k] = z[k] - y[k];
                }
            }
            let w: Vec<F> = y.iter().zip(&q).map(|(&a, &b)| a + b).collect();
            let xn = self.project_box(&w, upper);
            if opts.dykstra {
                for k in 0..n * n {
                    q[k] = w[k] - xn[k];
                }
            } else {
                for k in 0..n * n {
                    acc[k] += z[k] - y[k];
                }
            }
            let mut diff = F::zero();
            let mut size = F::zero();
            for k in 0..n * n {
                diff += (xn[k] - y[k]) * (xn[k] - y[k]);
                size += xn[k] * xn[k];
            }
            let gap = (diff / size).sqrt();
            x = xn;
            gaps.push(gap);

            if it % opts.check_every == 0 || it == 1 {
                let e = realize(&y, n);
                let dist = edm_distortion(&e, self.sq, n);
                if best.as_ref().is_none_or(|(_, b)| dist < *b) {
                    best = Some((e, dist));
                }
                if dist <= accept {
                    let dual = if opts.dykstra { p } else { acc };
                    return Outcome { feasible: true, best, dual, iterations };
                }
            }
            if it > opts.stall_window {
                let before = gaps[it - 1 - opts.stall_window];
                if before - gap < F::lit(opts.stall_eps) {
                    break;
                }
            }
        }
        let dual = if opts.dykstra { p } else { acc };
        Outcome { feasible: false, best, dual, iterations }
    }
}

/// Lower bound on `c_2` from a matrix `Y` in the polar of the EDM cone.
///
/// `P = Y_off - diag(Y_off 1)` is PSD with `P 1 = 0` whenever `Y` is polar to
/// every distance matrix; the smallest eigenvalue is shifted away on `1^T`
/// if numerical error left it negative. For such `P` every embedding
/// satisfies `c^2 >= sum_{P_ij > 0} P_ij d_ij^2 / sum_{P_ij < 0} |P_ij| d_ij^2`.
pub fn llr_lower_bound<F: Real>(y: &[F], sq: &[F], n: usize) -> Option<F> {
    if n < 2 || y.len() != n * n || sq.len() != n * n {
        return None;
    }
    let mut pm = vec![F::zero(); n * n];
    for i in 0..n {
        let mut row = F::zero();
        for j in 0..n {
            if i != j {
                let v = (y[i * n + j] + y[j * n + i]) * F::lit(0.5);
                pm[i * n + j] = v;
                row += v;
            }
        }
        pm[i * n + i] = -row;
    }
    let lmin = SymmetricEigen::new(&pm, n).min_value();
    if lmin < F::zero() {
        // P + |lmin| (I - 11^T/n) keeps P 1 = 0 and is PSD
        let shift = -lmin * (F::one() + F::lit(1e-9));
        let off = shift / F::lit(n as f64);
        for i in 0..n {
            for j in 0..n {
                pm[i * n + j] += if i == j { shift - off } else { -off };
            }
        }
    }
    let mut num = F::zero();
    let mut den = F::zero();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = pm[i * n + j];
            if v > F::zero() {
                num += v * sq[i * n + j];
            } else {
                den -= v * sq[i * n + j];
            }
        }
    }
    (den > F::zero() && num > F::zero()).then(|| (num / den).sqrt())
}
