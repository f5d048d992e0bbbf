//! Leave-one-out evaluation harness with ROC/PR curves and areas.

use std::collections::HashSet;

use crate::bayes::learn_structure;
use crate::dataset::{Dataset, GoldLabel};
use crate::error::{Error, Result};

use super::detect::{detect_case, CaseStatus, DetectionConfig, ModelKind};
use super::metrics::{
    operating_table, pr_auc, pr_auc_step, pr_curve, roc_auc, roc_curve, OperatingPoint, PrPoint,
    RocPoint,
};

/// One evaluated case.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCase {
    pub case_id: String,
    pub predictive_prob: Option<f64>,
    pub gold: GoldLabel,
    pub status: CaseStatus,
}

/// Full evaluation output.
///
/// Curves and the primary areas are built from determinate cases only;
/// indeterminate (rejected-neighborhood) cases are counted separately. The
/// `*_worst_case` areas additionally charge every indeterminate case against
/// the detector: an indeterminate anomaly scores as never flagged and an
/// indeterminate normal as always flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub scored_cases: Vec<ScoredCase>,
    pub roc_points: Vec<RocPoint>,
    pub pr_points: Vec<PrPoint>,
    pub operating_table: Vec<OperatingPoint>,
    pub auc_roc: Option<f64>,
    pub auc_pr: Option<f64>,
    /// Conservative step-function PR area, reported alongside the trapezoid.
    pub auc_pr_step: Option<f64>,
    pub auc_roc_worst_case: Option<f64>,
    pub auc_pr_worst_case: Option<f64>,
    pub indeterminate_count: usize,
    pub warnings: Vec<String>,
}

/// Scores every eval case against the repository minus that case and builds
/// threshold-sweep curves from the results.
///
/// Every eval case must carry a gold label and must be present in the
/// repository under its case id. For the learned-BBN model kind with no
/// fixed structure supplied, the structure is learned once on the repository
/// minus all eval cases and then held fixed while parameters are refit per
/// fold.
pub fn leave_one_out(
    eval_cases: &Dataset,
    repository: &Dataset,
    config: &DetectionConfig,
) -> Result<EvalReport> {
    config.validate()?;
    if eval_cases.schema() != repository.schema() {
        return Err(Error::InvalidParameter {
            message: "eval cases and repository have different schemas".into(),
        });
    }
    let mut ids = Vec::with_capacity(eval_cases.len());
    for record in eval_cases.records() {
        let id = record.case_id.as_deref().ok_or(Error::MissingCaseId)?;
        if record.gold_label.is_none() {
            return Err(Error::UnlabeledEvalCase {
                case_id: id.to_string(),
            });
        }
        if repository.index_of_case_id(id).is_none() {
            return Err(Error::EvalCaseNotInRepository {
                case_id: id.to_string(),
            });
        }
        ids.push(id.to_string());
    }

    let mut config = config.clone();
    if config.model_kind == ModelKind::LearnedBbn && config.fixed_structure.is_none() {
        let eval_ids: HashSet<&str> = ids.iter().map(String::as_str).collect();
        let training = repository.without_case_ids(&eval_ids);
        if training.is_empty() {
            return Err(Error::EmptyDataset);
        }
        config.fixed_structure = Some(learn_structure(
            &training,
            config.max_parents,
            config.prior_strength,
        )?);
    }

    let mut scored_cases = Vec::with_capacity(eval_cases.len());
    for (record, id) in eval_cases.records().iter().zip(&ids) {
        let fold_repository = repository.without_case_id(id);
        let outcome = detect_case(&fold_repository, record, &config)?;
        scored_cases.push(ScoredCase {
            case_id: id.clone(),
            predictive_prob: outcome.predictive_prob,
            gold: record.gold_label.expect("checked above"),
            status: outcome.status,
        });
    }

    let determinate: Vec<(f64, GoldLabel)> = scored_cases
        .iter()
        .filter_map(|c| c.predictive_prob.map(|p| (p, c.gold)))
        .collect();
    let indeterminate_count = scored_cases.len() - determinate.len();

    let mut warnings = Vec::new();
    if determinate.is_empty() {
        warnings.push("all eval cases are indeterminate; curves are empty".to_string());
    }
    let has_pos = determinate.iter().any(|(_, g)| *g == GoldLabel::Anomalous);
    let has_neg = determinate.iter().any(|(_, g)| *g == GoldLabel::Normal);
    if !determinate.is_empty() && !(has_pos && has_neg) {
        warnings.push(
            "determinate cases cover a single gold class; ROC statistics are undefined"
                .to_string(),
        );
    }

    let both_classes = has_pos && has_neg;
    let roc_points = if both_classes {
        roc_curve(&determinate)?
    } else {
        Vec::new()
    };
    let operating = if both_classes {
        operating_table(&determinate)?
    } else {
        Vec::new()
    };
    let pr_points = if has_pos { pr_curve(&determinate)? } else { Vec::new() };

    // worst case: indeterminate anomalies are missed, indeterminate normals
    // are flagged at every positive threshold
    let mut worst = determinate.clone();
    for case in &scored_cases {
        if case.predictive_prob.is_none() {
            let score = match case.gold {
                GoldLabel::Anomalous => 1.0,
                GoldLabel::Normal => 0.0,
            };
            worst.push((score, case.gold));
        }
    }
    let worst_pos = worst.iter().any(|(_, g)| *g == GoldLabel::Anomalous);
    let worst_neg = worst.iter().any(|(_, g)| *g == GoldLabel::Normal);

    Ok(EvalReport {
        auc_roc: both_classes.then(|| roc_auc(&determinate)).transpose()?,
        auc_pr: has_pos.then(|| pr_auc(&determinate)).transpose()?,
        auc_pr_step: has_pos.then(|| pr_auc_step(&determinate)).transpose()?,
        auc_roc_worst_case: (worst_pos && worst_neg).then(|| roc_auc(&worst)).transpose()?,
        auc_pr_worst_case: worst_pos.then(|| pr_auc(&worst)).transpose()?,
        scored_cases,
        roc_points,
        pr_points,
        operating_table: operating,
        indeterminate_count,
        warnings,
    })
}
