//! Per-case conditional anomaly detection.

use std::fmt;

use crate::bayes::{naive_bayes_structure, BayesNetModel, NetworkStructure};
use crate::dataset::{CaseRecord, Dataset};
use crate::error::{Error, Result};
use crate::similarity::{
    neighborhood_quality, rank_sum_weights, DistanceMetric, NeighborhoodResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    NaiveBayes,
    LearnedBbn,
}

/// How the reference subpopulation is selected before fitting the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Population {
    All,
    MahalanobisK,
    WeightedMahalanobisK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseStatus {
    Anomalous,
    Normal,
    Indeterminate,
}

impl fmt::Display for CaseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseStatus::Anomalous => write!(f, "anomalous"),
            CaseStatus::Normal => write!(f, "normal"),
            CaseStatus::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

/// Detection settings. Defaults mirror the running configuration of the
/// evaluated system: 40 best matches, 5% detection threshold, unit prior
/// strength.
#[derive(Debug, Clone)]
pub struct DetectionConfig {
    pub model_kind: ModelKind,
    pub population: Population,
    pub k: usize,
    pub threshold: f64,
    pub prior_strength: f64,
    pub epsilon: f64,
    /// In-degree bound used when a structure has to be learned.
    pub max_parents: usize,
    /// Structure for [`ModelKind::LearnedBbn`], learned once upstream and
    /// held fixed while parameters are refit per reference population.
    pub fixed_structure: Option<NetworkStructure>,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            model_kind: ModelKind::NaiveBayes,
            population: Population::All,
            k: 40,
            threshold: 0.05,
            prior_strength: 1.0,
            epsilon: 1e-6,
            max_parents: 4,
            fixed_structure: None,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidParameter {
                message: format!("threshold must lie in [0, 1], got {}", self.threshold),
            });
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter {
                message: "k must be at least 1".into(),
            });
        }
        if self.prior_strength.is_nan() || self.prior_strength <= 0.0 {
            return Err(Error::InvalidParameter {
                message: format!(
                    "prior strength must be positive, got {}",
                    self.prior_strength
                ),
            });
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter {
                message: format!("epsilon must be positive, got {}", self.epsilon),
            });
        }
        Ok(())
    }
}

/// Verdict for one case.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionOutcome {
    pub case_id: Option<String>,
    /// Predictive probability of the case's actual target value; `None` when
    /// the neighborhood was rejected and no model was fit.
    pub predictive_prob: Option<f64>,
    pub status: CaseStatus,
    pub neighborhood: Option<NeighborhoodResult>,
}

/// Builds the configured metric from the repository (covariance and, for the
/// weighted kind, rank-sum importance weights).
fn build_metric(
    repository: &Dataset,
    population: Population,
    epsilon: f64,
) -> Result<DistanceMetric> {
    match population {
        Population::All => unreachable!("no metric is needed for the unrestricted population"),
        Population::MahalanobisK => DistanceMetric::mahalanobis_from_data(repository, epsilon),
        Population::WeightedMahalanobisK => {
            let weights = rank_sum_weights(repository)?;
            DistanceMetric::weighted_mahalanobis_from_data(repository, weights, epsilon)
        }
    }
}

/// Scores one case against a repository of past cases.
///
/// The repository must not contain the query (folds exclude it upstream).
/// The reference population is selected per the config; when a similarity
/// population is configured, the neighborhood-quality test runs first and a
/// rejected neighborhood yields an indeterminate verdict with no model fit.
/// Otherwise the model is fit on the reference cases and the case is
/// anomalous exactly when the predictive probability of its actual target
/// value falls strictly below the threshold.
pub fn detect_case(
    repository: &Dataset,
    query: &CaseRecord,
    config: &DetectionConfig,
) -> Result<DetectionOutcome> {
    config.validate()?;
    if query.values.len() != repository.schema().arity() {
        return Err(Error::ArityMismatch {
            expected: repository.schema().arity(),
            found: query.values.len(),
        });
    }

    let (reference, neighborhood) = match config.population {
        Population::All => (repository.clone(), None),
        _ => {
            let metric = build_metric(repository, config.population, config.epsilon)?;
            let quality = neighborhood_quality(repository, query, config.k, &metric)?;
            if !quality.accepted {
                return Ok(DetectionOutcome {
                    case_id: query.case_id.clone(),
                    predictive_prob: None,
                    status: CaseStatus::Indeterminate,
                    neighborhood: Some(quality),
                });
            }
            let reference = repository.subset(&quality.neighbor_indices);
            (reference, Some(quality))
        }
    };

    let structure = match config.model_kind {
        ModelKind::NaiveBayes => naive_bayes_structure(repository.schema()),
        ModelKind::LearnedBbn => config
            .fixed_structure
            .clone()
            .ok_or(Error::MissingStructure)?,
    };
    let model = BayesNetModel::fit(&structure, &reference, config.prior_strength)?;
    let probability = model.predictive_probability(query)?;
    let status = if probability < config.threshold {
        CaseStatus::Anomalous
    } else {
        CaseStatus::Normal
    };
    Ok(DetectionOutcome {
        case_id: query.case_id.clone(),
        predictive_prob: Some(probability),
        status,
        neighborhood,
    })
}
