//! Thin singular value decomposition by one-sided Jacobi rotations.

use crate::scalar::Real;

/// `X = U diag(sigma) V^T` with singular values in descending order.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    rows: usize,
    cols: usize,
    /// Column-major `rows x cols`; columns with zero singular value are zero.
    u: Vec<T>,
    pub sigma: Vec<T>,
    /// Column-major `cols x cols`.
    v: Vec<T>,
}

impl<T: Real> Svd<T> {
    pub fn u(&self, i: usize, k: usize) -> T {
        self.u[k * self.rows + i]
    }

    pub fn v(&self, j: usize, k: usize) -> T {
        self.v[k * self.cols + j]
    }

    /// Right singular vector `k`.
    pub fn v_column(&self, k: usize) -> &[T] {
        &self.v[k * self.cols..(k + 1) * self.cols]
    }

    /// Singular values above `sigma_max * max(rows, cols) * eps`.
    pub fn rank(&self) -> usize {
        let tol = self.tolerance();
        self.sigma.iter().filter(|&&s| s > tol).count()
    }

    pub fn tolerance(&self) -> T {
        let largest = self.sigma.first().copied().unwrap_or_else(T::zero);
        largest * T::from_count(self.rows.max(self.cols)) * T::epsilon()
    }
}

/// Decomposes the row-major `rows x cols` matrix `x`.
pub fn svd<T: Real>(x: &[T], rows: usize, cols: usize) -> Svd<T> {
    assert_eq!(x.len(), rows * cols, "matrix shape");
    let mut a = vec![T::zero(); rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            a[j * rows + i] = x[i * cols + j];
        }
    }
    let mut v = vec![T::zero(); cols * cols];
    for k in 0..cols {
        v[k * cols + k] = T::one();
    }
    let eps = T::epsilon();
    let two = T::one() + T::one();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for i in 0..rows {
                    let (ap, aq) = (a[p * rows + i], a[q * rows + i]);
                    alpha = alpha + ap * ap;
                    beta = beta + aq * aq;
                    gamma = gamma + ap * aq;
                }
                if gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (two * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, rows, p, q, c, s);
                rotate(&mut v, cols, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<T> = (0..cols)
        .map(|k| a[k * rows..(k + 1) * rows].iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt())
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite singular values"));

    let mut u = vec![T::zero(); rows * cols];
    let mut v_sorted = vec![T::zero(); cols * cols];
    let mut sigma = Vec::with_capacity(cols);
    for (k, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > T::zero() {
            for i in 0..rows {
                u[k * rows + i] = a[src * rows + i] / s;
            }
        }
        v_sorted[k * cols..(k + 1) * cols].copy_from_slice(&v[src * cols..(src + 1) * cols]);
    }
    Svd { rows, cols, u, sigma, v: v_sorted }
}

fn rotate<T: Real>(m: &mut [T], len: usize, p: usize, q: usize, c: T, s: T) {
    for i in 0..len {
        let (mp, mq) = (m[p * len + i], m[q * len + i]);
        m[p * len + i] = c * mp - s * mq;
        m[q * len + i] = s * mp + c * mq;
    }
}
