//! Synthetic anomaly injection for end-to-end evaluation runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bayes::BayesNetModel;
use crate::dataset::{Dataset, GoldLabel};
use crate::error::{Error, Result};

/// Confidence a record's current target value must have under the generating
/// model before it qualifies for flipping.
const CONFIDENCE_FLOOR: f64 = 0.9;

/// Flips the target of `ceil(fraction * n)` records whose current target
/// value the model predicts with probability above 0.9, labels them
/// anomalous and everything else normal. Deterministic for a given seed.
///
/// Flipped records are conditional anomalies by construction: the new target
/// value has predictive probability below 0.1 under the model.
pub fn inject_anomalies(
    data: &Dataset,
    model: &BayesNetModel,
    fraction: f64,
    seed: u64,
) -> Result<Dataset> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter {
            message: format!("fraction must lie strictly inside (0, 1), got {fraction}"),
        });
    }
    let needed = (fraction * data.len() as f64).ceil() as usize;
    let mut qualifying = Vec::new();
    for (index, record) in data.records().iter().enumerate() {
        if model.predictive_probability(record)? > CONFIDENCE_FLOOR {
            qualifying.push(index);
        }
    }
    if qualifying.len() < needed {
        return Err(Error::InsufficientHighConfidence {
            needed,
            available: qualifying.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = rand::seq::index::sample(&mut rng, qualifying.len(), needed);
    let mut flip = vec![false; data.len()];
    for pos in chosen {
        flip[qualifying[pos]] = true;
    }

    let target = data.schema().target_index();
    let records = data
        .records()
        .iter()
        .enumerate()
        .map(|(index, record)| {
            let mut out = record.clone();
            if flip[index] {
                out.values[target] = !out.values[target];
                out.gold_label = Some(GoldLabel::Anomalous);
            } else {
                out.gold_label = Some(GoldLabel::Normal);
            }
            out
        })
        .collect();
    Dataset::new(data.schema().clone(), records)
}
