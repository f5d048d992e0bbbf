//! k-best neighbor selection and the 2-standard-deviation
//! neighborhood-quality rejection test.

use nalgebra::DMatrix;

use crate::dataset::{context_of, CaseRecord, Dataset};
use crate::error::{Error, Result};

use super::metric::DistanceMetric;

/// Outcome of a neighborhood query.
///
/// `population_mean`/`population_std` are filled by the quality test, which
/// compares the query's average distance to its k-best matches against the
/// distribution of that statistic over all other records.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodResult {
    /// Record indices of the k best matches, sorted by (distance, index).
    pub neighbor_indices: Vec<usize>,
    /// Mean distance from the query to the selected matches.
    pub target_avg_distance: f64,
    pub population_mean: Option<f64>,
    pub population_std: Option<f64>,
    pub accepted: bool,
}

fn by_distance_then_index(a: &(f64, usize), b: &(f64, usize)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Selects the k smallest (distance, index) pairs in place and returns the
/// sorted prefix with its mean distance.
fn select_k(pairs: &mut Vec<(f64, usize)>, k: usize) -> (Vec<usize>, f64) {
    if k < pairs.len() {
        pairs.select_nth_unstable_by(k - 1, by_distance_then_index);
        pairs.truncate(k);
    }
    pairs.sort_unstable_by(by_distance_then_index);
    let sum: f64 = pairs.iter().map(|p| p.0).sum();
    let indices = pairs.iter().map(|p| p.1).collect();
    (indices, sum / k as f64)
}

fn check_inputs(
    contexts: &[Vec<f64>],
    query: &[f64],
    k: usize,
    metric: &DistanceMetric,
) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            message: "k must be at least 1".into(),
        });
    }
    if query.len() != metric.dim() {
        return Err(Error::DimensionMismatch {
            expected: metric.dim(),
            found: query.len(),
        });
    }
    for row in contexts {
        if row.len() != metric.dim() {
            return Err(Error::DimensionMismatch {
                expected: metric.dim(),
                found: row.len(),
            });
        }
    }
    Ok(())
}

/// The k records minimizing distance to `query`, excluding `exclude` (the
/// query's own index when it lives in `contexts`). Ties break by ascending
/// record index.
pub fn k_best_context(
    contexts: &[Vec<f64>],
    query: &[f64],
    exclude: Option<usize>,
    k: usize,
    metric: &DistanceMetric,
) -> Result<NeighborhoodResult> {
    check_inputs(contexts, query, k, metric)?;
    let mut pairs: Vec<(f64, usize)> = contexts
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, row)| (metric.distance_unchecked(query, row), i))
        .collect();
    if pairs.len() < k {
        return Err(Error::NotEnoughRecords {
            needed: k,
            available: pairs.len(),
        });
    }
    let (neighbor_indices, avg) = select_k(&mut pairs, k);
    Ok(NeighborhoodResult {
        neighbor_indices,
        target_avg_distance: avg,
        population_mean: None,
        population_std: None,
        accepted: true,
    })
}

/// The effective quadratic-form matrix of a metric: `I` for Euclidean,
/// `Γ⁻¹` for Mahalanobis, and `diag(w) Γ⁻¹ diag(w)` for the weighted case.
fn effective_matrix(metric: &DistanceMetric) -> DMatrix<f64> {
    match metric {
        DistanceMetric::Euclidean { dim } => DMatrix::identity(*dim, *dim),
        DistanceMetric::Mahalanobis { gamma_inverse } => gamma_inverse.clone(),
        DistanceMetric::WeightedMahalanobis {
            gamma_inverse,
            weights,
        } => {
            let w = weights.values();
            DMatrix::from_fn(w.len(), w.len(), |i, j| gamma_inverse[(i, j)] * w[i] * w[j])
        }
    }
}

/// Average distance to own k-best matches for every candidate row, computed
/// with the expansion `d(x,y) = x'Bx + y'By - 2 x'By` so the all-pairs pass
/// costs O(n^2 d) instead of O(n^2 d^2).
fn population_averages(rows: &[&[f64]], k: usize, matrix: &DMatrix<f64>) -> Vec<f64> {
    let n = rows.len();
    let d = matrix.nrows();
    let mut transformed = vec![0.0; n * d];
    let mut self_products = vec![0.0; n];
    for (p, row) in rows.iter().enumerate() {
        let u = &mut transformed[p * d..(p + 1) * d];
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                acc += matrix[(i, j)] * row[j];
            }
            u[i] = acc;
        }
        self_products[p] = row.iter().zip(u.iter()).map(|(x, y)| x * y).sum();
    }
    let mut averages = Vec::with_capacity(n);
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
    for p in 0..n {
        pairs.clear();
        let row = rows[p];
        for q in 0..n {
            if q == p {
                continue;
            }
            let u = &transformed[q * d..(q + 1) * d];
            let cross: f64 = row.iter().zip(u.iter()).map(|(x, y)| x * y).sum();
            let dist = (self_products[p] + self_products[q] - 2.0 * cross).max(0.0);
            pairs.push((dist, q));
        }
        let mut taken = std::mem::take(&mut pairs);
        let (_, avg) = select_k(&mut taken, k);
        pairs = taken;
        averages.push(avg);
    }
    averages
}

/// Runs the k-best match for the query and the 2-standard-deviation quality
/// test over the whole population.
///
/// Every non-query record's average distance to its own k-best matches is
/// computed; the query's neighborhood is accepted when its average does not
/// exceed the population mean by more than two population standard
/// deviations (one-sided: unusually tight neighborhoods always pass).
pub fn neighborhood_quality_context(
    contexts: &[Vec<f64>],
    query: &[f64],
    exclude: Option<usize>,
    k: usize,
    metric: &DistanceMetric,
) -> Result<NeighborhoodResult> {
    check_inputs(contexts, query, k, metric)?;
    let candidates: Vec<usize> = (0..contexts.len())
        .filter(|&i| Some(i) != exclude)
        .collect();
    // every candidate needs k matches among the other candidates
    if candidates.len() < k + 1 {
        return Err(Error::NotEnoughRecords {
            needed: k + 1,
            available: candidates.len(),
        });
    }

    let mut pairs: Vec<(f64, usize)> = candidates
        .iter()
        .map(|&i| (metric.distance_unchecked(query, &contexts[i]), i))
        .collect();
    let (neighbor_indices, query_avg) = select_k(&mut pairs, k);

    let rows: Vec<&[f64]> = candidates.iter().map(|&i| contexts[i].as_slice()).collect();
    let averages = population_averages(&rows, k, &effective_matrix(metric));
    let n = averages.len() as f64;
    let mean = averages.iter().sum::<f64>() / n;
    let variance = averages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = variance.sqrt();

    Ok(NeighborhoodResult {
        neighbor_indices,
        target_avg_distance: query_avg,
        population_mean: Some(mean),
        population_std: Some(std),
        accepted: query_avg <= mean + 2.0 * std,
    })
}

fn query_context(data: &Dataset, query: &CaseRecord) -> Result<(Vec<f64>, Option<usize>)> {
    if query.values.len() != data.schema().arity() {
        return Err(Error::ArityMismatch {
            expected: data.schema().arity(),
            found: query.values.len(),
        });
    }
    let ctx: Vec<f64> = context_of(query, data.schema())
        .into_iter()
        .map(|v| if v { 1.0 } else { 0.0 })
        .collect();
    let exclude = query
        .case_id
        .as_deref()
        .and_then(|id| data.index_of_case_id(id));
    Ok((ctx, exclude))
}

/// [`k_best_context`] over a dataset's context attributes; a record with the
/// query's own case id is excluded from the candidates.
pub fn k_best_matches(
    data: &Dataset,
    query: &CaseRecord,
    k: usize,
    metric: &DistanceMetric,
) -> Result<NeighborhoodResult> {
    let (ctx, exclude) = query_context(data, query)?;
    k_best_context(&data.context_rows(), &ctx, exclude, k, metric)
}

/// [`neighborhood_quality_context`] over a dataset's context attributes.
pub fn neighborhood_quality(
    data: &Dataset,
    query: &CaseRecord,
    k: usize,
    metric: &DistanceMetric,
) -> Result<NeighborhoodResult> {
    let (ctx, exclude) = query_context(data, query)?;
    neighborhood_quality_context(&data.context_rows(), &ctx, exclude, k, metric)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_dim(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn k_equals_all_returns_every_other_record() {
        let contexts = one_dim(&[0.0, 1.0, 2.0, 3.0]);
        let metric = DistanceMetric::euclidean(1);
        let r = k_best_context(&contexts, &[0.0], Some(0), 3, &metric).unwrap();
        assert_eq!(r.neighbor_indices, vec![1, 2, 3]);
    }

    #[test]
    fn exact_duplicate_ranks_first() {
        let contexts = one_dim(&[5.0, 3.0, 7.0]);
        let metric = DistanceMetric::euclidean(1);
        let r = k_best_context(&contexts, &[3.0], None, 1, &metric).unwrap();
        assert_eq!(r.neighbor_indices, vec![1]);
        assert_eq!(r.target_avg_distance, 0.0);
    }

    #[test]
    fn hand_sorted_one_dimensional_case() {
        // records at 0, 1, 2, 3, 10; query at 0; k = 2
        let contexts = one_dim(&[0.0, 1.0, 2.0, 3.0, 10.0]);
        let metric = DistanceMetric::euclidean(1);
        let r = k_best_context(&contexts, &[0.0], None, 2, &metric).unwrap();
        assert_eq!(r.neighbor_indices, vec![0, 1]);
        assert!((r.target_avg_distance - 0.5).abs() < 1e-15);
    }

    #[test]
    fn too_large_k_is_an_error() {
        let contexts = one_dim(&[0.0, 1.0]);
        let metric = DistanceMetric::euclidean(1);
        assert!(matches!(
            k_best_context(&contexts, &[0.0], Some(0), 2, &metric).unwrap_err(),
            Error::NotEnoughRecords { .. }
        ));
    }

    #[test]
    fn ties_break_by_ascending_index() {
        let contexts = one_dim(&[1.0, 1.0, 1.0, 2.0]);
        let metric = DistanceMetric::euclidean(1);
        let r = k_best_context(&contexts, &[1.0], None, 2, &metric).unwrap();
        assert_eq!(r.neighbor_indices, vec![0, 1]);
    }

    #[test]
    fn identical_population_is_accepted() {
        let contexts = one_dim(&[4.0; 10]);
        let metric = DistanceMetric::euclidean(1);
        let r = neighborhood_quality_context(&contexts, &[4.0], None, 3, &metric).unwrap();
        assert!(r.accepted);
        assert_eq!(r.target_avg_distance, 0.0);
        assert_eq!(r.population_mean, Some(0.0));
        assert_eq!(r.population_std, Some(0.0));
    }

    /// Direct oracle for the quality statistics: per-record averages via the
    /// public distance function, then population mean/std with divisor n.
    fn oracle_stats(contexts: &[Vec<f64>], k: usize, metric: &DistanceMetric) -> (f64, f64) {
        let n = contexts.len();
        let mut averages = Vec::new();
        for p in 0..n {
            let mut dists: Vec<(f64, usize)> = (0..n)
                .filter(|&q| q != p)
                .map(|q| (metric.distance(&contexts[p], &contexts[q]).unwrap(), q))
                .collect();
            dists.sort_by(by_distance_then_index);
            let avg = dists[..k].iter().map(|d| d.0).sum::<f64>() / k as f64;
            averages.push(avg);
        }
        let mean = averages.iter().sum::<f64>() / n as f64;
        let var = averages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n as f64;
        (mean, var.sqrt())
    }

    #[test]
    fn far_query_is_rejected_and_in_cluster_query_accepted() {
        // 20 records clustered on {0, 1}, far query at 50
        let values: Vec<f64> = (0..20).map(|i| f64::from(i % 2)).collect();
        let contexts = one_dim(&values);
        let metric = DistanceMetric::euclidean(1);

        let far = neighborhood_quality_context(&contexts, &[50.0], None, 3, &metric).unwrap();
        assert!(!far.accepted);

        let near = neighborhood_quality_context(&contexts, &[1.0], None, 3, &metric).unwrap();
        assert!(near.accepted);

        let (mean, std) = oracle_stats(&contexts, 3, &metric);
        assert!((far.population_mean.unwrap() - mean).abs() < 1e-9);
        assert!((far.population_std.unwrap() - std).abs() < 1e-9);
        assert!(far.target_avg_distance > mean + 2.0 * std);
        assert!(near.target_avg_distance <= mean + 2.0 * std);
    }

    #[test]
    fn population_pass_matches_oracle_on_scattered_data() {
        let values = [0.0, 0.5, 1.5, 2.0, 3.5, 5.0, 5.5, 8.0];
        let contexts = one_dim(&values);
        let metric = DistanceMetric::euclidean(1);
        let r = neighborhood_quality_context(&contexts, &[2.0], None, 2, &metric).unwrap();
        let (mean, std) = oracle_stats(&contexts, 2, &metric);
        assert!((r.population_mean.unwrap() - mean).abs() < 1e-9);
        assert!((r.population_std.unwrap() - std).abs() < 1e-9);
    }

    #[test]
    fn quality_needs_k_plus_one_candidates() {
        let contexts = one_dim(&[0.0, 1.0, 2.0]);
        let metric = DistanceMetric::euclidean(1);
        assert!(matches!(
            neighborhood_quality_context(&contexts, &[0.0], None, 3, &metric).unwrap_err(),
            Error::NotEnoughRecords { .. }
        ));
    }
}
