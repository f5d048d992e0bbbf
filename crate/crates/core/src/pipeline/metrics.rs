//! Threshold-sweep evaluation metrics over (predictive probability, gold
//! label) scores.
//!
//! Anomaly score orientation: the raw predictive probability is the score and
//! smaller means more anomalous; a case is flagged at threshold `t` when its
//! probability is strictly below `t`. Curves sweep every distinct observed
//! probability plus the sentinels 0 and 1, so there are no binning artifacts.
//!
//! The ROC area is accumulated over integer counts with one final division,
//! which makes it exactly the Mann-Whitney statistic
//! `P(p_anom < p_norm) + P(tie)/2` down to the last bit.

use crate::dataset::GoldLabel;
use crate::error::{Error, Result};

/// One point of the ROC curve: flagged = probability strictly below
/// `threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// One point of the precision-recall curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

/// Per-threshold confusion statistics; `precision` is `None` when nothing is
/// flagged at that threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub threshold: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: Option<f64>,
}

/// Distinct score values in ascending order with per-value anomalous/normal
/// counts.
fn buckets(scores: &[(f64, GoldLabel)]) -> Vec<(f64, u64, u64)> {
    let mut sorted: Vec<(f64, GoldLabel)> = scores.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, u64, u64)> = Vec::new();
    for (value, label) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == value => match label {
                GoldLabel::Anomalous => last.1 += 1,
                GoldLabel::Normal => last.2 += 1,
            },
            _ => match label {
                GoldLabel::Anomalous => out.push((value, 1, 0)),
                GoldLabel::Normal => out.push((value, 0, 1)),
            },
        }
    }
    out
}

fn class_counts(scores: &[(f64, GoldLabel)]) -> (u64, u64) {
    let pos = scores
        .iter()
        .filter(|(_, l)| *l == GoldLabel::Anomalous)
        .count() as u64;
    (pos, scores.len() as u64 - pos)
}

/// Trapezoidal area under the ROC curve of a threshold sweep; equals the
/// Mann-Whitney statistic `P(p_anom < p_norm) + P(tie)/2` exactly.
pub fn roc_auc(scores: &[(f64, GoldLabel)]) -> Result<f64> {
    let (pos, neg) = class_counts(scores);
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClassScores);
    }
    let mut tp: u64 = 0;
    let mut doubled_area: u128 = 0;
    for (_, anom, norm) in buckets(scores) {
        // trapezoid over this bucket: dFP * (TP_before + TP_after)
        doubled_area += norm as u128 * (2 * tp + anom) as u128;
        tp += anom;
    }
    Ok(doubled_area as f64 / (2 * pos * neg) as f64)
}

/// Achievable (recall, precision) operating points in threshold order.
fn pr_points(scores: &[(f64, GoldLabel)]) -> Result<Vec<(f64, f64)>> {
    let (pos, _) = class_counts(scores);
    if pos == 0 {
        return Err(Error::NoPositiveLabels);
    }
    let mut tp: u64 = 0;
    let mut flagged: u64 = 0;
    let mut points = Vec::new();
    for (_, anom, norm) in buckets(scores) {
        tp += anom;
        flagged += anom + norm;
        points.push((tp as f64 / pos as f64, tp as f64 / flagged as f64));
    }
    Ok(points)
}

/// Area under the precision-recall curve by trapezoid over recall between
/// consecutive achievable operating points, anchored at recall 0 with the
/// precision of the most-anomalous point.
pub fn pr_auc(scores: &[(f64, GoldLabel)]) -> Result<f64> {
    let points = pr_points(scores)?;
    let (mut prev_recall, mut prev_precision) = (0.0, points[0].1);
    let mut area = 0.0;
    for (recall, precision) in points {
        area += (recall - prev_recall) * (precision + prev_precision) / 2.0;
        prev_recall = recall;
        prev_precision = precision;
    }
    Ok(area)
}

/// Conservative step-function variant of [`pr_auc`]: each recall interval is
/// weighted by the precision at its right (achieved) endpoint.
pub fn pr_auc_step(scores: &[(f64, GoldLabel)]) -> Result<f64> {
    let points = pr_points(scores)?;
    let mut prev_recall = 0.0;
    let mut area = 0.0;
    for (recall, precision) in points {
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(area)
}

/// ROC curve points over the threshold grid `{0} ∪ distinct scores ∪ {1}`,
/// beginning at (0,0) and ending at (1,1). Scores are assumed to lie inside
/// (0,1), which predictive probabilities always do.
pub fn roc_curve(scores: &[(f64, GoldLabel)]) -> Result<Vec<RocPoint>> {
    let (pos, neg) = class_counts(scores);
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClassScores);
    }
    let mut points = vec![RocPoint {
        threshold: 0.0,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let mut tp: u64 = 0;
    let mut fp: u64 = 0;
    for (value, anom, norm) in buckets(scores) {
        if value > 0.0 {
            points.push(RocPoint {
                threshold: value,
                fpr: fp as f64 / neg as f64,
                tpr: tp as f64 / pos as f64,
            });
        }
        tp += anom;
        fp += norm;
    }
    points.push(RocPoint {
        threshold: 1.0,
        fpr: 1.0,
        tpr: 1.0,
    });
    Ok(points)
}

/// Precision-recall curve points: the recall-0 anchor followed by every
/// achievable operating point of the sweep, in threshold order.
pub fn pr_curve(scores: &[(f64, GoldLabel)]) -> Result<Vec<PrPoint>> {
    let b = buckets(scores);
    let points = pr_points(scores)?;
    let mut out = vec![PrPoint {
        threshold: 0.0,
        recall: 0.0,
        precision: points[0].1,
    }];
    for (j, &(recall, precision)) in points.iter().enumerate() {
        // the set flagged through bucket j is achieved at the next distinct
        // value, or at the sentinel 1 past the last bucket
        let threshold = if j + 1 < b.len() { b[j + 1].0 } else { 1.0 };
        out.push(PrPoint {
            threshold,
            recall,
            precision,
        });
    }
    Ok(out)
}

/// Sensitivity/specificity/precision at every grid threshold.
pub fn operating_table(scores: &[(f64, GoldLabel)]) -> Result<Vec<OperatingPoint>> {
    let (pos, neg) = class_counts(scores);
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClassScores);
    }
    let mut out = vec![OperatingPoint {
        threshold: 0.0,
        sensitivity: 0.0,
        specificity: 1.0,
        precision: None,
    }];
    let mut tp: u64 = 0;
    let mut fp: u64 = 0;
    let push = |threshold: f64, tp: u64, fp: u64, out: &mut Vec<OperatingPoint>| {
        out.push(OperatingPoint {
            threshold,
            sensitivity: tp as f64 / pos as f64,
            specificity: 1.0 - fp as f64 / neg as f64,
            precision: (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64),
        });
    };
    for (value, anom, norm) in buckets(scores) {
        if value > 0.0 {
            push(value, tp, fp, &mut out);
        }
        tp += anom;
        fp += norm;
    }
    push(1.0, tp, fp, &mut out);
    Ok(out)
}

/// Positive predictive value recomputed at an assumed population anomaly
/// prior: `sens·π / (sens·π + fpr·(1−π))`.
pub fn prevalence_adjusted_precision(
    sensitivity: f64,
    false_positive_rate: f64,
    population_prior: f64,
) -> Result<f64> {
    for (name, v) in [
        ("sensitivity", sensitivity),
        ("false_positive_rate", false_positive_rate),
        ("population_prior", population_prior),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter {
                message: format!("{name} must lie in [0, 1], got {v}"),
            });
        }
    }
    let hits = sensitivity * population_prior;
    let denominator = hits + false_positive_rate * (1.0 - population_prior);
    if denominator == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(hits / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use GoldLabel::{Anomalous, Normal};

    fn scores(anoms: &[f64], norms: &[f64]) -> Vec<(f64, GoldLabel)> {
        anoms
            .iter()
            .map(|&p| (p, Anomalous))
            .chain(norms.iter().map(|&p| (p, Normal)))
            .collect()
    }

    #[test]
    fn roc_auc_perfect_and_inverted_separation() {
        assert_eq!(roc_auc(&scores(&[0.1, 0.2], &[0.3, 0.4])).unwrap(), 1.0);
        assert_eq!(roc_auc(&scores(&[0.3, 0.4], &[0.1, 0.2])).unwrap(), 0.0);
    }

    #[test]
    fn roc_auc_enumerated_pairs() {
        // pairs: (0.1,0.2) win, (0.1,0.4) win, (0.3,0.2) loss, (0.3,0.4) win
        assert_eq!(roc_auc(&scores(&[0.1, 0.3], &[0.2, 0.4])).unwrap(), 0.75);
    }

    #[test]
    fn roc_auc_all_tied_is_half() {
        assert_eq!(roc_auc(&scores(&[0.5, 0.5], &[0.5, 0.5])).unwrap(), 0.5);
    }

    #[test]
    fn roc_auc_rejects_single_class() {
        assert!(matches!(
            roc_auc(&scores(&[0.1], &[])).unwrap_err(),
            Error::SingleClassScores
        ));
    }

    #[test]
    fn pr_auc_perfect_separation_is_one() {
        assert!((pr_auc(&scores(&[0.1, 0.2], &[0.3, 0.4])).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pr_auc_all_tied_is_prevalence() {
        assert!((pr_auc(&scores(&[0.5, 0.5], &[0.5, 0.5])).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pr_auc_brute_force_value() {
        // threshold sweep over {0, .1, .2, .3, .4, 1}: achievable points
        // (R,P) = (.5,1), (.5,.5), (1,2/3), (1,.5); anchored at (0,1);
        // trapezoid area = 1/2 + 7/24 = 19/24
        let s = scores(&[0.1, 0.3], &[0.2, 0.4]);
        assert!((pr_auc(&s).unwrap() - 19.0 / 24.0).abs() < 1e-12);
        // step variant weights each interval by its right-endpoint precision
        assert!((pr_auc_step(&s).unwrap() - (0.5 + 0.5 * (2.0 / 3.0))).abs() < 1e-12);
    }

    #[test]
    fn pr_auc_rejects_no_positives() {
        assert!(matches!(
            pr_auc(&scores(&[], &[0.1])).unwrap_err(),
            Error::NoPositiveLabels
        ));
    }

    #[test]
    fn roc_curve_spans_origin_to_one() {
        let pts = roc_curve(&scores(&[0.1, 0.3], &[0.2, 0.4])).unwrap();
        assert_eq!((pts[0].fpr, pts[0].tpr), (0.0, 0.0));
        let last = pts.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        for pair in pts.windows(2) {
            assert!(pair[0].threshold < pair[1].threshold);
            assert!(pair[0].fpr <= pair[1].fpr);
            assert!(pair[0].tpr <= pair[1].tpr);
        }
    }

    #[test]
    fn roc_curve_trapezoid_matches_auc() {
        let s = scores(&[0.1, 0.3, 0.35, 0.2], &[0.2, 0.4, 0.35]);
        let pts = roc_curve(&s).unwrap();
        let area: f64 = pts
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
            .sum();
        assert!((area - roc_auc(&s).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn operating_table_tracks_confusion_counts() {
        let pts = operating_table(&scores(&[0.1], &[0.2, 0.4])).unwrap();
        // thresholds 0, .1, .2, .4, 1
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0].precision, None);
        // at t=0.2 only the anomaly is flagged
        assert_eq!(pts[2].sensitivity, 1.0);
        assert_eq!(pts[2].specificity, 1.0);
        assert_eq!(pts[2].precision, Some(1.0));
        // at t=1 everything is flagged
        assert_eq!(pts[4].sensitivity, 1.0);
        assert_eq!(pts[4].specificity, 0.0);
        assert!((pts[4].precision.unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn monotone_transform_leaves_areas_unchanged() {
        let s = scores(&[0.11, 0.32, 0.5], &[0.2, 0.4, 0.45, 0.7]);
        let mapped: Vec<(f64, GoldLabel)> =
            s.iter().map(|&(p, l)| (0.2 + 0.5 * p * p, l)).collect();
        assert_eq!(roc_auc(&s).unwrap(), roc_auc(&mapped).unwrap());
        assert!((pr_auc(&s).unwrap() - pr_auc(&mapped).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn prevalence_adjustment_examples() {
        // recovers the sample precision at the sample prevalence
        // counts: TP=3 FN=1 FP=2 TN=4 -> sens=.75, fpr=1/3, pi=.4
        let p = prevalence_adjusted_precision(0.75, 1.0 / 3.0, 0.4).unwrap();
        assert!((p - 0.6).abs() < 1e-12);

        assert_eq!(prevalence_adjusted_precision(0.5, 0.1, 0.0).unwrap(), 0.0);

        let p = prevalence_adjusted_precision(0.5, 0.1, 0.1).unwrap();
        assert!((p - 5.0 / 14.0).abs() < 1e-12);

        assert!(matches!(
            prevalence_adjusted_precision(0.0, 0.0, 0.5).unwrap_err(),
            Error::ZeroDenominator
        ));
        assert!(prevalence_adjusted_precision(1.5, 0.0, 0.5).is_err());
    }
}
