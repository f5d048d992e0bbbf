//! Squared generalized distances over context vectors.
//!
//! All three kinds reduce to a quadratic form `d' Γ⁻¹ d` on the difference
//! vector: the identity matrix gives the Euclidean case, the inverse
//! population covariance gives the Mahalanobis case, and rescaling the
//! difference element-wise by importance weights gives the weighted
//! Mahalanobis case.

use nalgebra::DMatrix;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

use super::weights::ImportanceWeights;

const SYMMETRY_TOL: f64 = 1e-9;

/// A squared distance metric over context vectors of a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum DistanceMetric {
    Euclidean {
        dim: usize,
    },
    Mahalanobis {
        gamma_inverse: DMatrix<f64>,
    },
    WeightedMahalanobis {
        gamma_inverse: DMatrix<f64>,
        weights: ImportanceWeights,
    },
}

impl DistanceMetric {
    pub fn euclidean(dim: usize) -> Self {
        DistanceMetric::Euclidean { dim }
    }

    /// Mahalanobis metric from an explicit inverse matrix, which must be
    /// square and symmetric within `1e-9`.
    pub fn mahalanobis(gamma_inverse: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&gamma_inverse)?;
        Ok(DistanceMetric::Mahalanobis { gamma_inverse })
    }

    pub fn weighted_mahalanobis(
        gamma_inverse: DMatrix<f64>,
        weights: ImportanceWeights,
    ) -> Result<Self> {
        check_symmetric(&gamma_inverse)?;
        if weights.len() != gamma_inverse.nrows() {
            return Err(Error::DimensionMismatch {
                expected: gamma_inverse.nrows(),
                found: weights.len(),
            });
        }
        Ok(DistanceMetric::WeightedMahalanobis {
            gamma_inverse,
            weights,
        })
    }

    /// Mahalanobis metric whose Γ is the population covariance of the
    /// dataset's context attributes, regularized by `epsilon` before
    /// inversion.
    pub fn mahalanobis_from_data(data: &Dataset, epsilon: f64) -> Result<Self> {
        let sigma = covariance_matrix(data)?;
        Self::mahalanobis(regularized_inverse(&sigma, epsilon)?)
    }

    /// Weighted Mahalanobis metric with the given importance weights and a
    /// covariance estimated from the data as in [`Self::mahalanobis_from_data`].
    pub fn weighted_mahalanobis_from_data(
        data: &Dataset,
        weights: ImportanceWeights,
        epsilon: f64,
    ) -> Result<Self> {
        let sigma = covariance_matrix(data)?;
        Self::weighted_mahalanobis(regularized_inverse(&sigma, epsilon)?, weights)
    }

    pub fn dim(&self) -> usize {
        match self {
            DistanceMetric::Euclidean { dim } => *dim,
            DistanceMetric::Mahalanobis { gamma_inverse } => gamma_inverse.nrows(),
            DistanceMetric::WeightedMahalanobis { gamma_inverse, .. } => gamma_inverse.nrows(),
        }
    }

    /// Squared generalized distance between two context vectors. Symmetric in
    /// its arguments and exactly zero when they are equal.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.len(),
            });
        }
        if b.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: b.len(),
            });
        }
        Ok(self.distance_unchecked(a, b))
    }

    /// Distance without dimension checks; the hot path for all-pairs scans.
    pub(crate) fn distance_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            DistanceMetric::Euclidean { .. } => {
                let mut total = 0.0;
                for (&x, &y) in a.iter().zip(b) {
                    let d = x - y;
                    if d != 0.0 {
                        total += d * d;
                    }
                }
                total
            }
            DistanceMetric::Mahalanobis { gamma_inverse } => {
                quadratic_form(gamma_inverse, a, b, None)
            }
            DistanceMetric::WeightedMahalanobis {
                gamma_inverse,
                weights,
            } => quadratic_form(gamma_inverse, a, b, Some(weights.values())),
        }
    }
}

/// `(w*(a-b))' M (w*(a-b))`, skipping zero coordinates. Sign-symmetric by
/// construction, so swapping `a` and `b` yields the identical float.
fn quadratic_form(m: &DMatrix<f64>, a: &[f64], b: &[f64], w: Option<&[f64]>) -> f64 {
    let n = a.len();
    let diff = |i: usize| -> f64 {
        let d = a[i] - b[i];
        match w {
            Some(w) => w[i] * d,
            None => d,
        }
    };
    let mut total = 0.0;
    for i in 0..n {
        let di = diff(i);
        if di == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..n {
            let dj = diff(j);
            if dj == 0.0 {
                continue;
            }
            row += m[(i, j)] * dj;
        }
        total += di * row;
    }
    total
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidParameter {
                    message: format!("matrix is not symmetric at ({i}, {j})"),
                });
            }
        }
    }
    Ok(())
}

/// Population covariance (divisor n) of the dataset's context attributes
/// encoded as `{0, 1}` reals.
pub fn covariance_matrix(data: &Dataset) -> Result<DMatrix<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let rows = data.context_rows();
    let n = rows.len() as f64;
    let d = data.schema().context_arity();
    let mut means = vec![0.0; d];
    for row in &rows {
        for (m, &v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut cov = DMatrix::zeros(d, d);
    for p in 0..d {
        for q in p..d {
            let mut cross = 0.0;
            for row in &rows {
                cross += row[p] * row[q];
            }
            let value = cross / n - means[p] * means[q];
            cov[(p, q)] = value;
            cov[(q, p)] = value;
        }
    }
    Ok(cov)
}

/// Inverse of `sigma + epsilon * I`, symmetrized. Defined for any symmetric
/// positive-semidefinite `sigma` and `epsilon > 0`, which covers covariance
/// matrices of constant or duplicated binary attributes.
pub fn regularized_inverse(sigma: &DMatrix<f64>, epsilon: f64) -> Result<DMatrix<f64>> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter {
            message: format!("regularization epsilon must be positive, got {epsilon}"),
        });
    }
    check_symmetric(sigma)?;
    let n = sigma.nrows();
    let regularized = sigma + DMatrix::identity(n, n) * epsilon;
    let inverse = match regularized.clone().cholesky() {
        Some(chol) => chol.inverse(),
        None => regularized
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter {
                message: "matrix is singular after regularization".into(),
            })?,
    };
    Ok((&inverse + inverse.transpose()) * 0.5)
}
