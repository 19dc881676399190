//! Kernel evaluation and dense Gram-matrix construction.

use alloc::string::ToString;

use crate::data::Dataset;
use crate::error::Error;
use crate::matrix::{dot, SquareMatrix};
use crate::Result;

/// Kernel identity. The Gaussian width `q` enters as `exp(-||x-y||^2 / (2 q^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Linear,
    Rbf { q: f64 },
}

impl KernelSpec {
    /// Gaussian kernel with width `q > 0`.
    pub fn rbf(q: f64) -> Result<Self> {
        if !q.is_finite() || q <= 0.0 {
            return Err(Error::param("q", q.to_string()));
        }
        Ok(KernelSpec::Rbf { q })
    }

    #[inline]
    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(x, y),
            KernelSpec::Rbf { q } => {
                let mut sq = 0.0;
                for (a, b) in x.iter().zip(y) {
                    let d = a - b;
                    sq += d * d;
                }
                libm::exp(-sq / (2.0 * q * q))
            }
        }
    }
}

/// Single kernel evaluation; errors on dimension mismatch.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
            what: "kernel arguments",
        });
    }
    Ok(spec.eval_unchecked(x, y))
}

/// Symmetric matrix of pairwise kernel values over a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    mat: SquareMatrix,
}

impl GramMatrix {
    #[inline]
    pub fn n(&self) -> usize {
        self.mat.n()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat.get(i, j)
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        self.mat.row(i)
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.mat
    }

    /// Wraps an existing symmetric matrix. Intended for tests that build
    /// Gram matrices directly.
    pub fn from_matrix(mat: SquareMatrix) -> Self {
        debug_assert!(mat.asymmetry() <= 1e-12);
        GramMatrix { mat }
    }
}

/// Computes `K_ij = k(x_i, x_j)` over the dataset's rows, filling the upper
/// triangle and mirroring.
pub fn gram(spec: &KernelSpec, data: &Dataset) -> GramMatrix {
    let l = data.len();
    let mut mat = SquareMatrix::zeros(l);
    for i in 0..l {
        for j in i..l {
            let v = if i == j {
                match spec {
                    KernelSpec::Linear => spec.eval_unchecked(data.row(i), data.row(i)),
                    KernelSpec::Rbf { .. } => 1.0,
                }
            } else {
                spec.eval_unchecked(data.row(i), data.row(j))
            };
            mat.set(i, j, v);
            mat.set(j, i, v);
        }
    }
    GramMatrix { mat }
}

/// `Q_ij = y_i y_j K_ij`. Positive semi-definite whenever `K` is; applying
/// the same labels twice returns `K`.
pub fn label_scaled_gram(k: &GramMatrix, y: &[f64]) -> Result<SquareMatrix> {
    let l = k.n();
    if y.len() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: y.len(),
            what: "labels",
        });
    }
    let mut q = SquareMatrix::zeros(l);
    for i in 0..l {
        for j in 0..l {
            q.set(i, j, y[i] * y[j] * k.get(i, j));
        }
    }
    Ok(q)
}
