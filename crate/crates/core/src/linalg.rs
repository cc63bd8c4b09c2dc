//! Dense symmetric eigendecomposition (Householder tridiagonalization followed
//! by the implicit QL algorithm) and a few helpers on square matrices.
//!
//! Matrices are `n * n` slices; since every matrix here is symmetric the
//! storage order only matters for eigenvectors, which are returned column-wise
//! (`vectors[j * n + i]` is component `i` of eigenvector `j`).

use crate::scalar::Real;

/// Eigenvalues in ascending order with matching unit eigenvectors.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<F> {
    pub n: usize,
    pub values: Vec<F>,
    vectors: Vec<F>,
}

impl<F: Real> SymmetricEigen<F> {
    /// Decomposes the symmetric matrix `a` (only the lower triangle is read).
    pub fn new(a: &[F], n: usize) -> Self {
        assert_eq!(a.len(), n * n, "matrix must be n x n");
        if n == 0 {
            return Self { n, values: Vec::new(), vectors: Vec::new() };
        }
        // column-major working copy of the full symmetric matrix
        let mut v = vec![F::zero(); n * n];
        for j in 0..n {
            for i in j..n {
                let x = a[i * n + j];
                v[j * n + i] = x;
                v[i * n + j] = x;
            }
        }
        let mut d = vec![F::zero(); n];
        let mut e = vec![F::zero(); n];
        tred2(n, &mut v, &mut d, &mut e);
        tql2(n, &mut v, &mut d, &mut e);
        Self { n, values: d, vectors: v }
    }

    pub fn vector(&self, j: usize) -> &[F] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }

    pub fn min_value(&self) -> F {
        self.values.first().copied().unwrap_or_else(F::zero)
    }

    /// `sum_j g(lambda_j) v_j v_j^T` over the selected eigenpairs, row-major.
    pub fn reconstruct(&self, mut weight: impl FnMut(F) -> Option<F>) -> Vec<F> {
        let n = self.n;
        let mut out = vec![F::zero(); n * n];
        for j in 0..n {
            let Some(w) = weight(self.values[j]) else { continue };
            if w == F::zero() {
                continue;
            }
            let vj = self.vector(j);
            for r in 0..n {
                let s = w * vj[r];
                if s == F::zero() {
                    continue;
                }
                let row = &mut out[r * n..(r + 1) * n];
                for (o, &x) in row.iter_mut().zip(vj) {
                    *o += s * x;
                }
            }
        }
        out
    }
}

/// Projection of a symmetric matrix onto the PSD cone (Frobenius norm).
pub fn project_psd<F: Real>(a: &[F], n: usize) -> Vec<F> {
    let eig = SymmetricEigen::new(a, n);
    let negatives = eig.values.iter().filter(|&&x| x < F::zero()).count();
    if negatives == 0 {
        return a.to_vec();
    }
    if negatives * 2 < n {
        // A - sum_{lambda < 0} lambda v v^T is cheaper when few are negative
        let neg = eig.reconstruct(|l| (l < F::zero()).then_some(l));
        let mut out = a.to_vec();
        for (o, x) in out.iter_mut().zip(neg) {
            *o -= x;
        }
        symmetrize_in_place(&mut out, n);
        out
    } else {
        eig.reconstruct(|l| (l > F::zero()).then_some(l))
    }
}

pub fn symmetrize_in_place<F: Real>(a: &mut [F], n: usize) {
    let half = F::lit(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let m = (a[i * n + j] + a[j * n + i]) * half;
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    }
}

/// Point coordinates `X` with `X X^T = G` for a PSD Gram matrix (negative
/// eigenvalues are clamped). Returns `n` rows of dimension `rank`.
pub fn gram_factor<F: Real>(gram: &[F], n: usize) -> Vec<Vec<F>> {
    let eig = SymmetricEigen::new(gram, n);
    let top = eig.values.last().copied().unwrap_or_else(F::zero).max(F::zero());
    let cutoff = top * F::epsilon() * F::lit(n as f64);
    let cols: Vec<usize> = (0..n).filter(|&j| eig.values[j] > cutoff).collect();
    let cols = if cols.is_empty() { vec![n - 1] } else { cols };
    (0..n)
        .map(|i| {
            cols.iter()
                .map(|&j| eig.values[j].max(F::zero()).sqrt() * eig.vector(j)[i])
                .collect()
        })
        .collect()
}

fn tred2<F: Real>(n: usize, v: &mut [F], d: &mut [F], e: &mut [F]) {
    // v(r, c) = v[c * n + r]
    let zero = F::zero();
    for j in 0..n {
        d[j] = v[j * n + (n - 1)];
    }
    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == zero {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[j * n + (i - 1)];
                v[j * n + i] = zero;
                v[i * n + j] = zero;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = zero;
            }
            for j in 0..i {
                f = d[j];
                v[i * n + j] = f;
                g = e[j] + v[j * n + j] * f;
                for k in (j + 1)..i {
                    g += v[j * n + k] * d[k];
                    e[k] += v[j * n + k] * f;
                }
                e[j] = g;
            }
            f = zero;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[j * n + k] -= f * e[k] + g * d[k];
                }
                d[j] = v[j * n + (i - 1)];
                v[j * n + i] = zero;
            }
        }
        d[i] = h;
    }
    for i in 0..(n - 1) {
        v[i * n + (n - 1)] = v[i * n + i];
        v[i * n + i] = F::one();
        let h = d[i + 1];
        if h != zero {
            for k in 0..=i {
                d[k] = v[(i + 1) * n + k] / h;
            }
            for j in 0..=i {
                let mut g = zero;
                for k in 0..=i {
                    g += v[(i + 1) * n + k] * v[j * n + k];
                }
                for k in 0..=i {
                    v[j * n + k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(i + 1) * n + k] = zero;
        }
    }
    for j in 0..n {
        d[j] = v[j * n + (n - 1)];
        v[j * n + (n - 1)] = zero;
    }
    v[(n - 1) * n + (n - 1)] = F::one();
    e[0] = zero;
}

fn tql2<F: Real>(n: usize, v: &mut [F], d: &mut [F], e: &mut [F]) {
    let zero = F::zero();
    let one = F::one();
    let two = F::lit(2.0);
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = zero;
    let mut f = zero;
    let mut tst1 = zero;
    let eps = F::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(one);
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = one;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (left, right) = v.split_at_mut((i + 1) * n);
                    let col_i = &mut left[i * n..(i + 1) * n];
                    let col_i1 = &mut right[..n];
                    for (a, b) in col_i.iter_mut().zip(col_i1.iter_mut()) {
                        let hk = *b;
                        *b = s * *a + c * hk;
                        *a = c * *a - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 || iter > 60 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = zero;
    }
    for i in 0..(n.saturating_sub(1)) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            let (a, b) = v.split_at_mut(k * n);
            a[i * n..(i + 1) * n].swap_with_slice(&mut b[..n]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.random_range(-1.0..1.0);
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        a
    }

    #[test]
    fn residuals_and_orthogonality() {
        for (n, seed) in [(1, 1), (2, 2), (7, 3), (40, 4)] {
            let a = random_symmetric(n, seed);
            let eig = SymmetricEigen::new(&a, n);
            for j in 0..n {
                let vj = eig.vector(j);
                for i in 0..n {
                    let av: f64 = (0..n).map(|k| a[i * n + k] * vj[k]).sum();
                    assert!((av - eig.values[j] * vj[i]).abs() < 1e-10);
                }
                for k in 0..n {
                    let dot: f64 = (0..n).map(|i| vj[i] * eig.vector(k)[i]).sum();
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-10);
                }
            }
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn diagonal_matrix() {
        let a = [3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0];
        let eig = SymmetricEigen::new(&a, 3);
        assert_eq!(eig.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn psd_projection_is_idempotent_and_psd() {
        let n = 12;
        let a = random_symmetric(n, 9);
        let p = project_psd(&a, n);
        let eig = SymmetricEigen::new(&p, n);
        assert!(eig.min_value() > -1e-10);
        let pp = project_psd(&p, n);
        for (x, y) in p.iter().zip(&pp) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn gram_factor_reproduces_gram() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [1.0, 1.0]];
        let n = pts.len();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = pts[i][0] * pts[j][0] + pts[i][1] * pts[j][1];
            }
        }
        let x = gram_factor(&g, n);
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum();
                assert!((dot - g[i * n + j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn single_precision() {
        let a: Vec<f32> = random_symmetric(6, 5).into_iter().map(|x| x as f32).collect();
        let eig = SymmetricEigen::new(&a, 6);
        let trace: f32 = (0..6).map(|i| a[i * 6 + i]).sum();
        let sum: f32 = eig.values.iter().sum();
        assert!((trace - sum).abs() < 1e-4);
    }
}
