//! Primal-dual interior point method for
//!
//! ```text
//! minimize  tau  subject to  G PSD,  d_ij^2 <= a_ij(G) <= tau d_ij^2,
//! ```
//!
//! where `G` is the Gram matrix of `x_1 - x_0, ..., x_{n-1} - x_0` and
//! `a_ij(G) = ||x_i - x_j||^2`. Each pair constraint is divided by `d_ij^2`,
//! so it reads `1 <= a_ij / d_ij^2 <= tau`. Nesterov-Todd scaling with a
//! Mehrotra corrector; the normal equations are dense and solved by Cholesky.
//!
//! Every iterate yields an upper bound (the slack `S` is positive definite, so
//! it is the Gram matrix of an embedding) and a certified lower bound (the
//! multipliers feed [`super::llr_lower_bound`]).

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Mat, Side};

use super::sdp::llr_lower_bound;

pub(crate) struct IpmResult {
    /// Gram matrix of `x_i - x_0` for `i = 1..n`, achieving `hi`.
    pub pinned_gram: Mat<f64>,
    pub hi: f64,
    pub lo_certified: f64,
    pub iterations: usize,
}

#[derive(Clone)]
struct ConeVec {
    lp: Vec<f64>,
    psd: Mat<f64>,
}

impl ConeVec {
    fn axpy(&self, alpha: f64, other: &ConeVec) -> ConeVec {
        ConeVec {
            lp: self.lp.iter().zip(&other.lp).map(|(a, b)| a + alpha * b).collect(),
            psd: &self.psd + &other.psd * faer::Scale(alpha),
        }
    }

    fn dot(&self, other: &ConeVec) -> f64 {
        let lp: f64 = self.lp.iter().zip(&other.lp).map(|(a, b)| a * b).sum();
        let k = self.psd.nrows();
        let mut m = 0.0;
        for j in 0..k {
            for i in 0..k {
                m += self.psd[(i, j)] * other.psd[(i, j)];
            }
        }
        lp + m
    }
}

struct Problem {
    /// Size of the pinned Gram matrix, `n - 1`.
    k: usize,
    /// Packed upper-triangle coordinates plus `tau`.
    dim: usize,
    /// Squared target distances, one per pair.
    sq: Vec<f64>,
    /// `a_r / d_r^2` as sparse coefficients over the packed coordinates.
    rows: Vec<Vec<(usize, f64)>>,
    /// `(i, j)` of each pair in the original numbering.
    pairs: Vec<(usize, usize)>,
}

impl Problem {
    fn new(sq_full: &[f64], n: usize) -> Self {
        let k = n - 1;
        let dim = k * (k + 1) / 2 + 1;
        let mut sq = Vec::new();
        let mut rows = Vec::new();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = 1.0 / sq_full[i * n + j];
                sq.push(sq_full[i * n + j]);
                pairs.push((i, j));
                rows.push(if i == 0 {
                    vec![(packed(j - 1, j - 1, k), w)]
                } else {
                    vec![
                        (packed(i - 1, i - 1, k), w),
                        (packed(j - 1, j - 1, k), w),
                        (packed(i - 1, j - 1, k), -2.0 * w),
                    ]
                });
            }
        }
        Self { k, dim, sq, rows, pairs }
    }

    fn m(&self) -> usize {
        self.sq.len()
    }

    fn tau(&self) -> usize {
        self.dim - 1
    }

    fn unpack(&self, x: &[f64]) -> Mat<f64> {
        let k = self.k;
        Mat::from_fn(k, k, |i, j| x[packed(i.min(j), i.max(j), k)])
    }

    fn a(&self, r: usize, x: &[f64]) -> f64 {
        self.rows[r].iter().map(|&(c, v)| v * x[c]).sum()
    }

    /// `G x`: lower rows `-a`, upper rows `a - tau`, cone part `-X`.
    fn apply(&self, x: &[f64]) -> ConeVec {
        let m = self.m();
        let mut lp = vec![0.0; 2 * m];
        let tau = x[self.tau()];
        for r in 0..m {
            let a = self.a(r, x);
            lp[r] = -a;
            lp[m + r] = a - tau;
        }
        ConeVec { lp, psd: -self.unpack(x) }
    }

    fn apply_t(&self, u: &ConeVec) -> Vec<f64> {
        let m = self.m();
        let k = self.k;
        let mut out = vec![0.0; self.dim];
        for r in 0..m {
            let v = u.lp[m + r] - u.lp[r];
            for &(c, coef) in &self.rows[r] {
                out[c] += v * coef;
            }
            out[self.tau()] -= u.lp[m + r];
        }
        for i in 0..k {
            out[packed(i, i, k)] -= u.psd[(i, i)];
            for j in (i + 1)..k {
                out[packed(i, j, k)] -= u.psd[(i, j)] + u.psd[(j, i)];
            }
        }
        out
    }

    fn h(&self) -> ConeVec {
        let m = self.m();
        let mut lp = vec![0.0; 2 * m];
        lp[..m].fill(-1.0);
        ConeVec { lp, psd: Mat::zeros(self.k, self.k) }
    }

    /// Distortion of the embedding with pinned Gram matrix `s`.
    fn realized(&self, s: &Mat<f64>) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for (r, &(i, j)) in self.pairs.iter().enumerate() {
            let a = if i == 0 {
                s[(j - 1, j - 1)]
            } else {
                s[(i - 1, i - 1)] + s[(j - 1, j - 1)] - s[(i - 1, j - 1)] - s[(j - 1, i - 1)]
            };
            let ratio = a / self.sq[r];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        if lo > 0.0 {
            ((hi / lo).sqrt(), lo)
        } else {
            (f64::INFINITY, lo)
        }
    }

    /// Lower bound from the multipliers `z`.
    fn certificate(&self, z: &[f64], n: usize) -> Option<f64> {
        let m = self.m();
        let mut y = vec![0.0; n * n];
        let mut sq = vec![0.0; n * n];
        for (r, &(i, j)) in self.pairs.iter().enumerate() {
            let v = (z[r] - z[m + r]) / self.sq[r];
            y[i * n + j] = v;
            y[j * n + i] = v;
            sq[i * n + j] = self.sq[r];
            sq[j * n + i] = self.sq[r];
        }
        llr_lower_bound(&y, &sq, n)
    }
}

/// Index of `(i, j)`, `i <= j`, in the packed upper triangle of a `k x k` matrix.
fn packed(i: usize, j: usize, k: usize) -> usize {
    debug_assert!(i <= j && j < k);
    i * (2 * k - i + 1) / 2 + (j - i)
}

/// Nesterov-Todd scaling of the semidefinite block: `R^T Z R = R^-1 S R^-T = diag(lambda)`.
struct NtScaling {
    r: Mat<f64>,
    r_inv_t: Mat<f64>,
    lambda: Vec<f64>,
    /// `W^-1 = R^-T R^-1`.
    w_inv: Mat<f64>,
}

impl NtScaling {
    fn new(s: &Mat<f64>, z: &Mat<f64>) -> Option<Self> {
        let ls = s.llt(Side::Lower).ok()?.L().to_owned();
        let lz = z.llt(Side::Lower).ok()?.L().to_owned();
        let prod = lz.transpose() * &ls;
        let svd = prod.svd().ok()?;
        let lambda: Vec<f64> = (0..prod.nrows()).map(|i| svd.S().column_vector()[i]).collect();
        if lambda.iter().any(|&l| !(l > 0.0)) {
            return None;
        }
        let k = lambda.len();
        let inv_sqrt = Mat::from_fn(k, k, |i, j| if i == j { lambda[i].powf(-0.5) } else { 0.0 });
        let r = &ls * svd.V() * &inv_sqrt;
        let r_inv_t = &lz * svd.U() * &inv_sqrt;
        let w_inv = &r_inv_t * r_inv_t.transpose();
        Some(Self { r, r_inv_t, lambda, w_inv })
    }

    fn w_apply(&self, y: &Mat<f64>) -> Mat<f64> {
        // W Y W with W = R R^T
        let w = &self.r * self.r.transpose();
        &w * y * &w
    }

    fn w_inv_apply(&self, y: &Mat<f64>) -> Mat<f64> {
        &self.w_inv * y * &self.w_inv
    }

    /// `R^-1 Y R^-T`.
    fn scale_s(&self, y: &Mat<f64>) -> Mat<f64> {
        self.r_inv_t.transpose() * y * &self.r_inv_t
    }

    /// `R^T Y R`.
    fn scale_z(&self, y: &Mat<f64>) -> Mat<f64> {
        self.r.transpose() * y * &self.r
    }
}

/// Largest `alpha <= 1` with `lambda + alpha * d` PSD (`lambda` diagonal).
fn psd_step(lambda: &[f64], d: &Mat<f64>) -> f64 {
    let k = lambda.len();
    let m = Mat::from_fn(k, k, |i, j| d[(i, j)] / (lambda[i] * lambda[j]).sqrt());
    let sym = Mat::from_fn(k, k, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let Ok(eig) = sym.self_adjoint_eigen(Side::Lower) else { return 0.0 };
    let min = (0..k).map(|i| eig.S().column_vector()[i]).fold(f64::INFINITY, f64::min);
    if min >= -1.0 {
        1.0
    } else {
        -1.0 / min
    }
}

fn lp_step(x: &[f64], d: &[f64]) -> f64 {
    x.iter().zip(d).filter(|(_, &dv)| dv < 0.0).map(|(&xv, &dv)| -xv / dv).fold(1.0, f64::min)
}

pub(crate) struct IpmOptions {
    pub max_iter: usize,
    /// Stop once `hi / lo_certified <= 1 + gap`.
    pub gap: f64,
}

/// `sq` is the row-major matrix of squared distances, normalized so the largest is 1.
pub(crate) fn solve(sq_full: &[f64], n: usize, opts: &IpmOptions) -> IpmResult {
    let prob = Problem::new(sq_full, n);
    let k = prob.k;
    let m = prob.m();
    let dim = prob.dim;
    let nu = (2 * m + k) as f64;
    let h = prob.h();

    let mut x = start(&prob, sq_full, n);
    let gx = prob.apply(&x);
    let mut s = h.axpy(-1.0, &gx);
    let mut z = ConeVec {
        lp: s.lp.iter().map(|v| 1.0 / v).collect(),
        psd: s.psd.llt(Side::Lower).map(|l| l.inverse()).unwrap_or_else(|_| Mat::identity(k, k)),
    };

    let mut best_hi = f64::INFINITY;
    let mut best_gram = s.psd.clone();
    let mut best_lo: f64 = 1.0;
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        let (hi, _) = prob.realized(&s.psd);
        if hi < best_hi {
            best_hi = hi;
            best_gram = s.psd.clone();
        }
        if let Some(lb) = prob.certificate(&z.lp, n) {
            best_lo = best_lo.max(lb);
        }
        log::trace!("ipm {it}: bracket [{best_lo}, {best_hi}] tau={}", x[prob.tau()]);
        if best_hi <= best_lo * (1.0 + opts.gap) {
            break;
        }

        let mu = s.dot(&z) / nu;
        let mut rp = prob.apply(&x).axpy(1.0, &s).axpy(-1.0, &h);
        let mut rd = prob.apply_t(&z);
        rd[prob.tau()] += 1.0;
        // keep residuals exactly zero once reached
        if rp.lp.iter().all(|v| v.abs() < 1e-300) {
            rp.lp.iter_mut().for_each(|v| *v = 0.0);
        }
        if rd.iter().all(|v| v.abs() < 1e-300) {
            rd.iter_mut().for_each(|v| *v = 0.0);
        }

        let Some(nt) = NtScaling::new(&s.psd, &z.psd) else { break };
        let w_lp: Vec<f64> = s.lp.iter().zip(&z.lp).map(|(a, b)| (a / b).sqrt()).collect();
        let lam_lp: Vec<f64> = s.lp.iter().zip(&z.lp).map(|(a, b)| (a * b).sqrt()).collect();

        // normal matrix G^T W^-1 G (lower triangle)
        let mut mat = Mat::<f64>::zeros(dim, dim);
        let wi = &nt.w_inv;
        let coords: Vec<(usize, usize)> = (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
        for (a, &(i, j)) in coords.iter().enumerate() {
            for (b, &(p, q)) in coords.iter().enumerate().take(a + 1) {
                // tr(B_ij W^-1 B_pq W^-1)
                let v = if i == j && p == q {
                    wi[(i, p)] * wi[(p, i)]
                } else if i == j {
                    2.0 * wi[(i, p)] * wi[(q, i)]
                } else if p == q {
                    2.0 * wi[(j, p)] * wi[(p, i)]
                } else {
                    2.0 * (wi[(j, p)] * wi[(q, i)] + wi[(j, q)] * wi[(p, i)])
                };
                mat[(a, b)] = v;
            }
        }
        for r in 0..m {
            let dl = 1.0 / (w_lp[r] * w_lp[r]);
            let du = 1.0 / (w_lp[m + r] * w_lp[m + r]);
            let row = &prob.rows[r];
            for &(c1, v1) in row {
                for &(c2, v2) in row {
                    if c1 >= c2 {
                        mat[(c1, c2)] += (dl + du) * v1 * v2;
                    }
                }
                // tau column: upper row has coefficient -1 on tau
                mat[(prob.tau(), c1)] -= du * v1;
            }
            mat[(prob.tau(), prob.tau())] += du;
        }
        let diag_max = (0..dim).map(|i| mat[(i, i)]).fold(0.0, f64::max);
        let chol = match mat.llt(Side::Lower) {
            Ok(c) => c,
            Err(_) => {
                for i in 0..dim {
                    mat[(i, i)] += 1e-12 * diag_max;
                }
                match mat.llt(Side::Lower) {
                    Ok(c) => c,
                    Err(_) => break,
                }
            }
        };

        let w_inv_cone = |u: &ConeVec| ConeVec {
            lp: u.lp.iter().zip(&w_lp).map(|(a, w)| a / (w * w)).collect(),
            psd: nt.w_inv_apply(&u.psd),
        };
        let w_cone = |u: &ConeVec| ConeVec {
            lp: u.lp.iter().zip(&w_lp).map(|(a, w)| a * w * w).collect(),
            psd: nt.w_apply(&u.psd),
        };
        let solve_dir = |rc: &ConeVec| -> (Vec<f64>, ConeVec, ConeVec) {
            let t = rc.axpy(1.0, &rp);
            let wt = w_inv_cone(&t);
            let gt = prob.apply_t(&wt);
            let rhs = Mat::from_fn(dim, 1, |i, _| -rd[i] - gt[i]);
            let sol = chol.solve(&rhs);
            let dx: Vec<f64> = (0..dim).map(|i| sol[(i, 0)]).collect();
            let dz = w_inv_cone(&prob.apply(&dx).axpy(1.0, &t));
            let ds = rc.axpy(-1.0, &w_cone(&dz));
            (dx, ds, dz)
        };
        let step = |ds: &ConeVec, dz: &ConeVec| -> f64 {
            let a_lp = lp_step(&s.lp, &ds.lp).min(lp_step(&z.lp, &dz.lp));
            let a_s = psd_step(&nt.lambda, &nt.scale_s(&ds.psd));
            let a_z = psd_step(&nt.lambda, &nt.scale_z(&dz.psd));
            a_lp.min(a_s).min(a_z)
        };

        // predictor
        let rc_aff = ConeVec { lp: s.lp.iter().map(|v| -v).collect(), psd: -&s.psd };
        let (_, ds_a, dz_a) = solve_dir(&rc_aff);
        let alpha_a = step(&ds_a, &dz_a);
        let mu_a = s.axpy(alpha_a, &ds_a).dot(&z.axpy(alpha_a, &dz_a)) / nu;
        let sigma = (mu_a / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let mut rc_lp = vec![0.0; 2 * m];
        for r in 0..2 * m {
            let dst = ds_a.lp[r] / w_lp[r];
            let dzt = dz_a.lp[r] * w_lp[r];
            let q = (sigma * mu - lam_lp[r] * lam_lp[r] - dst * dzt) / lam_lp[r];
            rc_lp[r] = w_lp[r] * q;
        }
        let dst = nt.scale_s(&ds_a.psd);
        let dzt = nt.scale_z(&dz_a.psd);
        let prod = &dst * &dzt;
        let lam = &nt.lambda;
        let q = Mat::from_fn(k, k, |i, j| {
            let sym = 0.5 * (prod[(i, j)] + prod[(j, i)]);
            let base = if i == j { sigma * mu - lam[i] * lam[i] } else { 0.0 };
            2.0 * (base - sym) / (lam[i] + lam[j])
        });
        let rc = ConeVec { lp: rc_lp, psd: &nt.r * &q * nt.r.transpose() };
        let (dx, ds, dz) = solve_dir(&rc);
        let alpha = (0.99 * step(&ds, &dz)).min(1.0);
        if !(alpha > 1e-12) {
            break;
        }
        for i in 0..dim {
            x[i] += alpha * dx[i];
        }
        s = s.axpy(alpha, &ds);
        z = z.axpy(alpha, &dz);
        s.psd = symmetric(&s.psd);
        z.psd = symmetric(&z.psd);
    }
    IpmResult { pinned_gram: best_gram, hi: best_hi, lo_certified: best_lo, iterations }
}

/// Classical scaling of the metric plus a small regular simplex, rescaled so
/// every ratio `a_ij / d_ij^2` is at least 2; `tau` is twice the largest ratio.
fn start(prob: &Problem, sq_full: &[f64], n: usize) -> Vec<f64> {
    let k = prob.k;
    let b = Mat::from_fn(n, n, |i, j| {
        let row = |i: usize| (0..n).map(|t| sq_full[i * n + t]).sum::<f64>() / n as f64;
        let all = (0..n).map(row).sum::<f64>() / n as f64;
        -0.5 * (sq_full[i * n + j] - row(i) - row(j) + all)
    });
    let mut x = vec![0.0; prob.dim];
    if let Ok(eig) = b.self_adjoint_eigen(Side::Lower) {
        let vals: Vec<f64> = (0..n).map(|i| eig.S().column_vector()[i].max(0.0)).collect();
        let pts = Mat::from_fn(n, n, |i, c| eig.U()[(i, c)] * vals[c].sqrt());
        for i in 0..k {
            for j in i..k {
                x[packed(i, j, k)] = (0..n)
                    .map(|c| (pts[(i + 1, c)] - pts[(0, c)]) * (pts[(j + 1, c)] - pts[(0, c)]))
                    .sum();
            }
        }
    }
    let min_sq = prob.sq.iter().copied().fold(f64::INFINITY, f64::min);
    for i in 0..k {
        for j in i..k {
            x[packed(i, j, k)] += 0.05 * min_sq * if i == j { 2.0 } else { 1.0 };
        }
    }
    let ratios: Vec<f64> = (0..prob.m()).map(|r| prob.a(r, &x)).collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let c = 2.0 / lo;
    x.iter_mut().for_each(|v| *v *= c);
    x[prob.tau()] = 2.0 * c * hi;
    x
}

fn symmetric(a: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_indices_are_dense() {
        let k = 5;
        let mut seen = Vec::new();
        for i in 0..k {
            for j in i..k {
                seen.push(packed(i, j, k));
            }
        }
        assert_eq!(seen, (0..k * (k + 1) / 2).collect::<Vec<_>>());
    }
}
