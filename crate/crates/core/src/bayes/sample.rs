//! Forward sampling and seeded random-model generation for synthetic data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{AttributeSchema, CaseRecord, Dataset};
use crate::error::Result;

use super::model::{BayesNetModel, DirichletTable};
use super::structure::NetworkStructure;

impl BayesNetModel {
    /// Forward-samples `n` records in topological order using posterior-mean
    /// parameters. Deterministic for a given seed; records get sequential
    /// case ids `s00000`, `s00001`, ...
    pub fn sample(&self, n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = self.structure().topological_order();
        let arity = self.schema().arity();
        let mut records = Vec::with_capacity(n);
        for i in 0..n {
            let mut values = vec![false; arity];
            for &node in &order {
                let config = super::model::config_index(&values, self.structure().parents(node));
                let p_true = self.table(node).predictive(config, true);
                values[node] = rng.random_bool(p_true);
            }
            records.push(CaseRecord::with_id(values, format!("s{i:05}")));
        }
        Dataset::new(self.schema().clone(), records).expect("sampled records conform to schema")
    }
}

/// Encodes a target probability as pseudo-counts whose posterior mean
/// approximates it.
fn theta_table(parent_count: usize, thetas: &[f64]) -> DirichletTable {
    const TOTAL: u64 = 100_000;
    let counts = thetas
        .iter()
        .map(|&theta| {
            let n_true = ((theta * (TOTAL + 2) as f64) - 1.0)
                .round()
                .clamp(0.0, TOTAL as f64) as u64;
            [TOTAL - n_true, n_true]
        })
        .collect();
    debug_assert_eq!(thetas.len(), 1 << parent_count);
    DirichletTable::with_counts(1.0, counts).expect("valid synthetic table")
}

/// Generates a seeded random network over `schema` with in-degree at most
/// `max_parents` and mostly polarized conditional probabilities, so sampled
/// data carries strong dependencies. The target attribute is placed last in
/// topological order with a full complement of parents, which makes its
/// value well predicted by the context.
pub fn random_model(
    schema: &AttributeSchema,
    max_parents: usize,
    seed: u64,
) -> Result<BayesNetModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = schema.arity();
    let target = schema.target_index();

    let mut order: Vec<usize> = (0..n).filter(|&i| i != target).collect();
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    order.push(target);

    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (pos, &node) in order.iter().enumerate() {
        let bound = max_parents.min(pos);
        let k = if node == target {
            bound
        } else {
            rng.random_range(0..=bound)
        };
        let mut predecessors: Vec<usize> = order[..pos].to_vec();
        for i in (1..predecessors.len()).rev() {
            let j = rng.random_range(0..=i);
            predecessors.swap(i, j);
        }
        parents[node] = predecessors[..k].to_vec();
        parents[node].sort_unstable();
    }
    let structure = NetworkStructure::new(parents)?;

    let tables = (0..n)
        .map(|node| {
            let parent_count = structure.parents(node).len();
            let thetas: Vec<f64> = (0..1usize << parent_count)
                .map(|_| {
                    if node == target {
                        if rng.random_bool(0.5) {
                            rng.random_range(0.03..0.08)
                        } else {
                            rng.random_range(0.92..0.97)
                        }
                    } else if parent_count == 0 {
                        rng.random_range(0.2..0.8)
                    } else if rng.random_bool(0.8) {
                        if rng.random_bool(0.5) {
                            rng.random_range(0.02..0.15)
                        } else {
                            rng.random_range(0.85..0.98)
                        }
                    } else {
                        rng.random_range(0.2..0.8)
                    }
                })
                .collect();
            theta_table(parent_count, &thetas)
        })
        .collect();

    BayesNetModel::from_tables(schema.clone(), structure, tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::port_schema;

    fn bernoulli_model(mean_num: u64, mean_den: u64) -> BayesNetModel {
        // posterior mean (n_true + 1) / (n + 2)
        let n = mean_den - 2;
        let n_true = mean_num - 1;
        let schema = AttributeSchema::new(vec!["t".into()], 0).unwrap();
        let table = DirichletTable::with_counts(1.0, vec![[n - n_true, n_true]]).unwrap();
        BayesNetModel::from_tables(schema, NetworkStructure::empty(1), vec![table]).unwrap()
    }

    #[test]
    fn sample_zero_is_empty() {
        let model = bernoulli_model(7, 10);
        assert!(model.sample(0, 1).is_empty());
    }

    #[test]
    fn sample_is_deterministic() {
        let schema = port_schema();
        let model = random_model(&schema, 3, 11).unwrap();
        assert_eq!(model.sample(50, 7), model.sample(50, 7));
        assert_ne!(model.sample(50, 7), model.sample(50, 8));
    }

    #[test]
    fn sample_frequency_concentrates_on_posterior_mean() {
        let model = bernoulli_model(7, 10); // mean 0.7
        let data = model.sample(10_000, 42);
        let ones = data
            .records()
            .iter()
            .filter(|r| r.values[0])
            .count() as f64;
        let freq = ones / 10_000.0;
        let bound = 3.0 * (0.7f64 * 0.3 / 10_000.0).sqrt();
        assert!(
            (freq - 0.7).abs() < bound,
            "frequency {freq} outside 3-sigma bound {bound}"
        );
    }

    #[test]
    fn random_model_is_bounded_and_seeded() {
        let schema = port_schema();
        let a = random_model(&schema, 3, 5).unwrap();
        let b = random_model(&schema, 3, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.structure().max_in_degree() <= 3);
        // target is last in topological order with a full parent set
        assert_eq!(
            a.structure().parents(schema.target_index()).len(),
            3
        );
    }
}
