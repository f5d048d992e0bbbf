//! Attribute-importance weights from the two-sample Wilcoxon rank-sum
//! statistic.
//!
//! Each context attribute is graded by how strongly it separates the two
//! target groups: the tie-corrected rank-sum z-statistic is computed with
//! midranks, and `|z|` is rescaled so the best attribute gets weight 1.
//! Constant attributes get weight 0.

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Nonnegative per-context-attribute weights. Weights produced by
/// [`rank_sum_weights`] are normalized so the maximum entry is 1 (unless all
/// are 0); arbitrary nonnegative vectors are accepted as metric inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceWeights {
    w: Vec<f64>,
}

impl ImportanceWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        for (i, &v) in w.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter {
                    message: format!("weight {v} at position {i} is not a nonnegative real"),
                });
            }
        }
        Ok(ImportanceWeights { w })
    }

    /// All-ones weights, under which the weighted metric reduces to the
    /// unweighted one.
    pub fn uniform(dim: usize) -> Self {
        ImportanceWeights { w: vec![1.0; dim] }
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Tie-corrected two-sample rank-sum `|z|` for one binary attribute split by
/// the binary target. Returns 0 for constant attributes.
fn rank_sum_abs_z(ones_in_true: u64, ones_in_false: u64, n_true: u64, n_false: u64) -> f64 {
    let n = n_true + n_false;
    let ones = ones_in_true + ones_in_false;
    let zeros = n - ones;
    if ones == 0 || zeros == 0 {
        return 0.0;
    }
    // midranks: zeros share (zeros+1)/2, ones share zeros + (ones+1)/2
    let rank_zero = (zeros as f64 + 1.0) / 2.0;
    let rank_one = zeros as f64 + (ones as f64 + 1.0) / 2.0;
    let zeros_in_true = n_true - ones_in_true;
    let rank_sum = zeros_in_true as f64 * rank_zero + ones_in_true as f64 * rank_one;
    let mean = n_true as f64 * (n as f64 + 1.0) / 2.0;
    let tie = |t: f64| t * t * t - t;
    let tie_term = (tie(zeros as f64) + tie(ones as f64)) / (n as f64 * (n as f64 - 1.0));
    let variance = n_true as f64 * n_false as f64 / 12.0 * ((n as f64 + 1.0) - tie_term);
    if variance <= 0.0 {
        return 0.0;
    }
    (rank_sum - mean).abs() / variance.sqrt()
}

/// Rank-sum importance weights for every context attribute, rescaled so the
/// largest `|z|` maps to 1. Errors if the target is constant.
pub fn rank_sum_weights(data: &Dataset) -> Result<ImportanceWeights> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let schema = data.schema();
    let target = schema.target_index();
    let n_true = data
        .records()
        .iter()
        .filter(|r| r.values[target])
        .count() as u64;
    let n_false = data.len() as u64 - n_true;
    if n_true == 0 || n_false == 0 {
        return Err(Error::ConstantTarget);
    }
    let mut z_scores = Vec::with_capacity(schema.context_arity());
    for attribute in schema.context_indices() {
        let mut ones_in_true = 0u64;
        let mut ones_in_false = 0u64;
        for record in data.records() {
            if record.values[attribute] {
                if record.values[target] {
                    ones_in_true += 1;
                } else {
                    ones_in_false += 1;
                }
            }
        }
        z_scores.push(rank_sum_abs_z(ones_in_true, ones_in_false, n_true, n_false));
    }
    let max = z_scores.iter().cloned().fold(0.0f64, f64::max);
    let w = if max > 0.0 {
        z_scores.iter().map(|z| z / max).collect()
    } else {
        z_scores
    };
    ImportanceWeights::new(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttributeSchema, CaseRecord};

    fn dataset(rows: &[&[bool]]) -> Dataset {
        let arity = rows[0].len();
        let names = (0..arity)
            .map(|i| if i == 0 { "t".into() } else { format!("x{i}") })
            .collect();
        let schema = AttributeSchema::new(names, 0).unwrap();
        let records = rows.iter().map(|r| CaseRecord::new(r.to_vec())).collect();
        Dataset::new(schema, records).unwrap()
    }

    /// Brute-force oracle: midranks by sorting, tie groups from the sorted
    /// values, tie-corrected variance, standardized rank sum.
    fn oracle_abs_z(values: &[f64], in_true_group: &[bool]) -> f64 {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut ranks = vec![0.0; n];
        let mut start = 0;
        while start < n {
            let mut end = start;
            while end < n && values[order[end]] == values[order[start]] {
                end += 1;
            }
            let midrank = (start + 1 + end) as f64 / 2.0;
            for &idx in &order[start..end] {
                ranks[idx] = midrank;
            }
            start = end;
        }
        let n1 = in_true_group.iter().filter(|&&g| g).count() as f64;
        let n2 = n as f64 - n1;
        let rank_sum: f64 = (0..n).filter(|&i| in_true_group[i]).map(|i| ranks[i]).sum();
        let mean = n1 * (n as f64 + 1.0) / 2.0;
        let mut tie_term = 0.0;
        let mut start = 0;
        while start < n {
            let mut end = start;
            while end < n && values[order[end]] == values[order[start]] {
                end += 1;
            }
            let t = (end - start) as f64;
            tie_term += t * t * t - t;
            start = end;
        }
        tie_term /= n as f64 * (n as f64 - 1.0);
        let variance = n1 * n2 / 12.0 * ((n as f64 + 1.0) - tie_term);
        if variance <= 0.0 {
            return 0.0;
        }
        (rank_sum - mean).abs() / variance.sqrt()
    }

    #[test]
    fn attribute_identical_to_target_gets_weight_one() {
        let data = dataset(&[
            &[true, true, false],
            &[true, true, true],
            &[false, false, true],
            &[false, false, false],
        ]);
        let weights = rank_sum_weights(&data).unwrap();
        assert!((weights.values()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_attribute_gets_weight_zero() {
        let data = dataset(&[
            &[true, true, true],
            &[true, false, true],
            &[false, true, true],
            &[false, false, true],
        ]);
        let weights = rank_sum_weights(&data).unwrap();
        assert_eq!(weights.values()[1], 0.0);
    }

    #[test]
    fn constant_target_is_an_error() {
        let data = dataset(&[&[true, true], &[true, false]]);
        assert!(matches!(
            rank_sum_weights(&data).unwrap_err(),
            Error::ConstantTarget
        ));
    }

    #[test]
    fn matches_midrank_oracle_on_crafted_sample() {
        // 8 records with ties in both groups; third attribute is a perfect
        // separator and therefore carries the maximal statistic
        let rows: Vec<Vec<bool>> = vec![
            vec![true, true, true],
            vec![true, true, true],
            vec![true, false, true],
            vec![true, true, true],
            vec![false, false, false],
            vec![false, true, false],
            vec![false, false, false],
            vec![false, false, false],
        ];
        let z = rank_sum_abs_z(3, 1, 4, 4);
        let values: Vec<f64> = rows.iter().map(|r| f64::from(u8::from(r[1]))).collect();
        let groups: Vec<bool> = rows.iter().map(|r| r[0]).collect();
        let expected = oracle_abs_z(&values, &groups);
        assert!(
            (z - expected).abs() < 1e-12,
            "closed form {z} vs oracle {expected}"
        );
        assert!(z > 0.0);

        // the public weights are |z| rescaled by the separator's |z|
        let data = dataset(&rows.iter().map(|r| r.as_slice()).collect::<Vec<_>>());
        let weights = rank_sum_weights(&data).unwrap();
        let separator: Vec<f64> = rows.iter().map(|r| f64::from(u8::from(r[2]))).collect();
        let z_max = oracle_abs_z(&separator, &groups);
        assert!((weights.values()[0] - expected / z_max).abs() < 1e-12);
        assert!((weights.values()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weights_are_invariant_under_record_order() {
        let rows: Vec<Vec<bool>> = vec![
            vec![true, true, false],
            vec![true, false, false],
            vec![false, false, true],
            vec![false, true, true],
            vec![true, true, true],
            vec![false, false, false],
        ];
        let forward = dataset(&rows.iter().map(|r| r.as_slice()).collect::<Vec<_>>());
        let reversed: Vec<Vec<bool>> = rows.iter().rev().cloned().collect();
        let backward = dataset(&reversed.iter().map(|r| r.as_slice()).collect::<Vec<_>>());
        assert_eq!(
            rank_sum_weights(&forward).unwrap(),
            rank_sum_weights(&backward).unwrap()
        );
    }
}
