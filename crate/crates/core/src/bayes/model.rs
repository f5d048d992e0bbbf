//! Dirichlet-multinomial parameter learning and closed-form predictive and
//! marginal-likelihood computation.
//!
//! With parameter independence and conjugate (here uniform-strength Beta)
//! priors, learning reduces to tallying sufficient statistics and every
//! predictive quantity is a ratio of smoothed counts. Products over nodes are
//! accumulated in log space.

use statrs::function::gamma::ln_gamma;

use crate::dataset::{AttributeSchema, CaseRecord, Dataset};
use crate::error::{Error, Result};

use super::structure::NetworkStructure;

/// Posterior sufficient statistics for one node: per parent configuration,
/// observed counts for the node's `false`/`true` states plus the shared
/// pseudo-count placed on every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletTable {
    alpha: f64,
    counts: Vec<[u64; 2]>,
}

impl DirichletTable {
    /// Zero-count table for a node with `parent_count` binary parents.
    pub fn new(parent_count: usize, alpha: f64) -> Result<Self> {
        Self::with_counts(alpha, vec![[0, 0]; 1 << parent_count])
    }

    /// Table with explicit counts; `counts.len()` must be a power of two.
    pub fn with_counts(alpha: f64, counts: Vec<[u64; 2]>) -> Result<Self> {
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(Error::InvalidParameter {
                message: format!("prior strength must be positive, got {alpha}"),
            });
        }
        if !counts.len().is_power_of_two() {
            return Err(Error::InvalidParameter {
                message: "configuration count must be 2^(parent count)".into(),
            });
        }
        Ok(DirichletTable { alpha, counts })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn counts(&self) -> &[[u64; 2]] {
        &self.counts
    }

    pub fn config_count(&self) -> usize {
        self.counts.len()
    }

    /// The Dirichlet (here Beta) posterior predictive
    /// `(N + α) / (N_false + N_true + 2α)` for the given configuration.
    pub fn predictive(&self, config: usize, value: bool) -> f64 {
        let cell = &self.counts[config];
        let total = (cell[0] + cell[1]) as f64;
        (cell[usize::from(value)] as f64 + self.alpha) / (total + 2.0 * self.alpha)
    }

    fn increment(&mut self, config: usize, value: bool) {
        self.counts[config][usize::from(value)] += 1;
    }
}

/// Parent-configuration index for a node: bit `t` is the value of the node's
/// `t`-th parent (parents in sorted order).
pub(crate) fn config_index(values: &[bool], parents: &[usize]) -> usize {
    parents
        .iter()
        .enumerate()
        .map(|(t, &p)| usize::from(values[p]) << t)
        .sum()
}

/// A Bayesian network: structure, per-node posterior tables, and the schema
/// the node indices refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNetModel {
    schema: AttributeSchema,
    structure: NetworkStructure,
    tables: Vec<DirichletTable>,
}

impl BayesNetModel {
    /// Fits posterior counts by tallying `training` under `structure`.
    ///
    /// Every pseudo-count is `prior_strength`; an empty training set yields a
    /// usable prior-only model.
    pub fn fit(
        structure: &NetworkStructure,
        training: &Dataset,
        prior_strength: f64,
    ) -> Result<Self> {
        let schema = training.schema().clone();
        if structure.node_count() != schema.arity() {
            return Err(Error::DimensionMismatch {
                expected: schema.arity(),
                found: structure.node_count(),
            });
        }
        let mut tables: Vec<DirichletTable> = (0..schema.arity())
            .map(|node| DirichletTable::new(structure.parents(node).len(), prior_strength))
            .collect::<Result<_>>()?;
        for record in training.records() {
            for (node, table) in tables.iter_mut().enumerate() {
                let config = config_index(&record.values, structure.parents(node));
                table.increment(config, record.values[node]);
            }
        }
        Ok(BayesNetModel {
            schema,
            structure: structure.clone(),
            tables,
        })
    }

    /// Builds a model directly from sufficient statistics (pseudo-data).
    pub fn from_tables(
        schema: AttributeSchema,
        structure: NetworkStructure,
        tables: Vec<DirichletTable>,
    ) -> Result<Self> {
        if structure.node_count() != schema.arity() || tables.len() != schema.arity() {
            return Err(Error::DimensionMismatch {
                expected: schema.arity(),
                found: structure.node_count(),
            });
        }
        for (node, table) in tables.iter().enumerate() {
            if table.config_count() != 1 << structure.parents(node).len() {
                return Err(Error::InvalidParameter {
                    message: format!("table shape for node {node} does not match its parents"),
                });
            }
        }
        Ok(BayesNetModel {
            schema,
            structure,
            tables,
        })
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn structure(&self) -> &NetworkStructure {
        &self.structure
    }

    pub fn table(&self, node: usize) -> &DirichletTable {
        &self.tables[node]
    }

    /// Log of the parameter-averaged joint predictive of a complete
    /// assignment: the sum over nodes of log local predictives.
    fn log_joint_predictive(&self, values: &[bool]) -> f64 {
        (0..self.schema.arity())
            .map(|node| {
                let config = config_index(values, self.structure.parents(node));
                self.tables[node].predictive(config, values[node]).ln()
            })
            .sum()
    }

    /// Predictive probability of `target_value` given the record's context:
    /// `J(v) / (J(true) + J(false))` where `J` is the joint predictive with
    /// the target clamped. Strictly inside (0, 1).
    pub fn predictive_for(&self, record: &CaseRecord, target_value: bool) -> Result<f64> {
        if record.values.len() != self.schema.arity() {
            return Err(Error::ArityMismatch {
                expected: self.schema.arity(),
                found: record.values.len(),
            });
        }
        let mut values = record.values.clone();
        let target = self.schema.target_index();
        values[target] = false;
        let log_false = self.log_joint_predictive(&values);
        values[target] = true;
        let log_true = self.log_joint_predictive(&values);
        let (chosen, other) = if target_value {
            (log_true, log_false)
        } else {
            (log_false, log_true)
        };
        // p = exp(chosen - logaddexp(chosen, other)), stable for tiny products
        let m = chosen.max(other);
        let log_norm = m + ((chosen - m).exp() + (other - m).exp()).ln();
        Ok((chosen - log_norm).exp())
    }

    /// Predictive probability of the record's actual target value.
    pub fn predictive_probability(&self, record: &CaseRecord) -> Result<f64> {
        if record.values.len() != self.schema.arity() {
            return Err(Error::ArityMismatch {
                expected: self.schema.arity(),
                found: record.values.len(),
            });
        }
        self.predictive_for(record, record.values[self.schema.target_index()])
    }
}

/// Log score contribution of one family from its tallied counts:
/// `Σ_j [lnΓ(2α) − lnΓ(2α + N_j) + Σ_k (lnΓ(α + N_jk) − lnΓ(α))]`.
pub(crate) fn family_log_score(counts: &[[u64; 2]], alpha: f64) -> f64 {
    let mut score = 0.0;
    for cell in counts {
        let n = (cell[0] + cell[1]) as f64;
        if n == 0.0 {
            continue;
        }
        score += ln_gamma(2.0 * alpha) - ln_gamma(2.0 * alpha + n);
        for &k in cell {
            if k > 0 {
                score += ln_gamma(alpha + k as f64) - ln_gamma(alpha);
            }
        }
    }
    score
}

/// Tallies the count table of one family over a dataset.
pub(crate) fn tally_family(data: &Dataset, node: usize, parents: &[usize]) -> Vec<[u64; 2]> {
    let mut counts = vec![[0u64; 2]; 1 << parents.len()];
    for record in data.records() {
        let config = config_index(&record.values, parents);
        counts[config][usize::from(record.values[node])] += 1;
    }
    counts
}

/// Closed-form log marginal likelihood of `data` under `structure` with
/// uniform pseudo-counts `prior_strength`; decomposes over node families.
pub fn log_marginal_likelihood(
    structure: &NetworkStructure,
    data: &Dataset,
    prior_strength: f64,
) -> Result<f64> {
    if prior_strength.is_nan() || prior_strength <= 0.0 {
        return Err(Error::InvalidParameter {
            message: format!("prior strength must be positive, got {prior_strength}"),
        });
    }
    if structure.node_count() != data.schema().arity() {
        return Err(Error::DimensionMismatch {
            expected: data.schema().arity(),
            found: structure.node_count(),
        });
    }
    let mut total = 0.0;
    for node in 0..structure.node_count() {
        let counts = tally_family(data, node, structure.parents(node));
        total += family_log_score(&counts, prior_strength);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::AttributeSchema;

    fn single_node_dataset(values: &[bool]) -> Dataset {
        let schema = AttributeSchema::new(vec!["t".into()], 0).unwrap();
        let records = values.iter().map(|&v| CaseRecord::new(vec![v])).collect();
        Dataset::new(schema, records).unwrap()
    }

    fn two_node_dataset(rows: &[(bool, bool)], target: usize) -> Dataset {
        let schema = AttributeSchema::new(vec!["a".into(), "f".into()], target).unwrap();
        let records = rows
            .iter()
            .map(|&(a, f)| CaseRecord::new(vec![a, f]))
            .collect();
        Dataset::new(schema, records).unwrap()
    }

    #[test]
    fn fit_tallies_single_node() {
        let data = single_node_dataset(&[true, true, false]);
        let model =
            BayesNetModel::fit(&NetworkStructure::empty(1), &data, 1.0).unwrap();
        assert_eq!(model.table(0).counts(), &[[1, 2]]);
        assert_eq!(model.table(0).alpha(), 1.0);
    }

    #[test]
    fn fit_on_empty_training_is_prior_only() {
        let data = single_node_dataset(&[]);
        let model =
            BayesNetModel::fit(&NetworkStructure::empty(1), &data, 1.0).unwrap();
        assert_eq!(model.table(0).counts(), &[[0, 0]]);
        let p = model
            .predictive_probability(&CaseRecord::new(vec![true]))
            .unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fit_chain_matches_hand_count() {
        // a -> f over four records
        let data = two_node_dataset(
            &[(false, false), (false, true), (true, true), (true, true)],
            0,
        );
        let structure = NetworkStructure::new(vec![vec![], vec![0]]).unwrap();
        let model = BayesNetModel::fit(&structure, &data, 1.0).unwrap();
        assert_eq!(model.table(0).counts(), &[[2, 2]]);
        // config 0: a=false -> one false, one true; config 1: a=true -> two true
        assert_eq!(model.table(1).counts(), &[[1, 1], [0, 2]]);
    }

    #[test]
    fn predictive_matches_hand_value_for_naive_bayes() {
        // training: (a=1,f=1) x3, (a=0,f=0) x3; query (a=1,f=1)
        let data = two_node_dataset(
            &[
                (true, true),
                (true, true),
                (true, true),
                (false, false),
                (false, false),
                (false, false),
            ],
            0,
        );
        let structure = NetworkStructure::new(vec![vec![], vec![0]]).unwrap();
        let model = BayesNetModel::fit(&structure, &data, 1.0).unwrap();
        let p = model
            .predictive_probability(&CaseRecord::new(vec![true, true]))
            .unwrap();
        // (0.5 * 0.8) / (0.5 * 0.8 + 0.5 * 0.2)
        assert!((p - 0.8).abs() < 1e-12);
    }

    #[test]
    fn predictive_is_dirichlet_mean_for_single_node() {
        let data = single_node_dataset(&[false, true, true, true]);
        let model =
            BayesNetModel::fit(&NetworkStructure::empty(1), &data, 1.0).unwrap();
        assert_eq!(model.table(0).counts(), &[[1, 3]]);
        let p = model
            .predictive_probability(&CaseRecord::new(vec![true]))
            .unwrap();
        assert!((p - 4.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn predictive_rejects_arity_mismatch() {
        let data = single_node_dataset(&[true]);
        let model =
            BayesNetModel::fit(&NetworkStructure::empty(1), &data, 1.0).unwrap();
        assert!(matches!(
            model
                .predictive_probability(&CaseRecord::new(vec![true, false]))
                .unwrap_err(),
            Error::ArityMismatch { .. }
        ));
    }

    #[test]
    fn marginal_likelihood_single_node() {
        let data = single_node_dataset(&[true, true, false]);
        let score = log_marginal_likelihood(&NetworkStructure::empty(1), &data, 1.0).unwrap();
        assert!((score - (1.0f64 / 12.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn marginal_likelihood_empty_data_is_zero() {
        let data = single_node_dataset(&[]);
        let score = log_marginal_likelihood(&NetworkStructure::empty(1), &data, 1.0).unwrap();
        assert_eq!(score, 0.0);
    }

    #[test]
    fn marginal_likelihood_decomposes_over_disconnected_nodes() {
        let rows = [(true, false), (true, true), (false, true), (true, true)];
        let data = two_node_dataset(&rows, 0);
        let joint = log_marginal_likelihood(&NetworkStructure::empty(2), &data, 1.0).unwrap();
        let a = single_node_dataset(&[true, true, false, true]);
        let f = single_node_dataset(&[false, true, true, true]);
        let sa = log_marginal_likelihood(&NetworkStructure::empty(1), &a, 1.0).unwrap();
        let sf = log_marginal_likelihood(&NetworkStructure::empty(1), &f, 1.0).unwrap();
        assert!((joint - (sa + sf)).abs() < 1e-12);
    }
}
