//! Running mean/covariance of the realized chain, and the Cholesky factor
//! used to shape phase-2 proposals.

use crate::scalar::Scalar;

/// Welford-style accumulator: after `k` updates, `mean` and `scatter` hold
/// the sample mean and the centered sum of squares of those `k` states, so
/// `cov = scatter / (k − 1)` reproduces the brute-force sample covariance.
#[derive(Debug, Clone)]
pub struct ProposalState<T> {
    dim: usize,
    count: usize,
    mean: Vec<T>,
    scatter: Vec<T>, // d×d, row-major
    delta_old: Vec<T>,
}

impl<T: Scalar> ProposalState<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            count: 0,
            mean: vec![T::zero(); dim],
            scatter: vec![T::zero(); dim * dim],
            delta_old: vec![T::zero(); dim],
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn update(&mut self, x: &[T]) {
        assert_eq!(x.len(), self.dim);
        self.count += 1;
        let n = T::cast(self.count as f64);
        for i in 0..self.dim {
            self.delta_old[i] = x[i] - self.mean[i];
            self.mean[i] += self.delta_old[i] / n;
        }
        // scatter += (x − m_old) (x − m_new)ᵀ, exact for the sample covariance
        for i in 0..self.dim {
            let row = i * self.dim;
            let d_new_i = x[i] - self.mean[i];
            for j in 0..self.dim {
                self.scatter[row + j] += self.delta_old[j] * d_new_i;
            }
        }
    }

    /// Sample covariance (ddof = 1), symmetrized against rounding drift;
    /// all zeros until two states have been seen.
    pub fn cov(&self) -> Vec<T> {
        let mut c = vec![T::zero(); self.dim * self.dim];
        if self.count < 2 {
            return c;
        }
        let denom = T::cast((self.count - 1) as f64);
        let two = T::cast(2.0);
        for i in 0..self.dim {
            for j in 0..self.dim {
                c[i * self.dim + j] =
                    (self.scatter[i * self.dim + j] + self.scatter[j * self.dim + i])
                        / (two * denom);
            }
        }
        c
    }
}

/// Lower-triangular Cholesky factor of a symmetric matrix; `None` when a
/// pivot is not strictly positive.
pub fn cholesky<T: Scalar>(m: &[T], dim: usize) -> Option<Vec<T>> {
    assert_eq!(m.len(), dim * dim);
    let mut l = vec![T::zero(); dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = m[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if !(s > T::zero()) || !s.is_finite() {
                    return None;
                }
                l[i * dim + i] = s.sqrt();
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    Some(l)
}
