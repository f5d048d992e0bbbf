//! Plain-CSV export of evaluation reports, suitable for replotting the
//! curves with any external tool. Identical reports serialize to
//! byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;

use super::eval::EvalReport;

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes `roc.csv`, `pr.csv`, `scores.csv`, `operating.csv`, and
/// `summary.csv` into `dir`, which must exist.
pub fn write_report_csvs(report: &EvalReport, dir: &Path) -> Result<()> {
    let mut roc = BufWriter::new(File::create(dir.join("roc.csv"))?);
    writeln!(roc, "threshold,fpr,tpr")?;
    for p in &report.roc_points {
        writeln!(roc, "{},{},{}", p.threshold, p.fpr, p.tpr)?;
    }
    roc.flush()?;

    let mut pr = BufWriter::new(File::create(dir.join("pr.csv"))?);
    writeln!(pr, "threshold,recall,precision")?;
    for p in &report.pr_points {
        writeln!(pr, "{},{},{}", p.threshold, p.recall, p.precision)?;
    }
    pr.flush()?;

    let mut scores = BufWriter::new(File::create(dir.join("scores.csv"))?);
    writeln!(scores, "case_id,prob,gold,status")?;
    for c in &report.scored_cases {
        writeln!(
            scores,
            "{},{},{},{}",
            c.case_id,
            fmt_opt(c.predictive_prob),
            c.gold,
            c.status
        )?;
    }
    scores.flush()?;

    let mut operating = BufWriter::new(File::create(dir.join("operating.csv"))?);
    writeln!(operating, "threshold,sensitivity,specificity,precision")?;
    for p in &report.operating_table {
        writeln!(
            operating,
            "{},{},{},{}",
            p.threshold,
            p.sensitivity,
            p.specificity,
            fmt_opt(p.precision)
        )?;
    }
    operating.flush()?;

    let mut summary = BufWriter::new(File::create(dir.join("summary.csv"))?);
    writeln!(
        summary,
        "auc_roc,auc_pr,auc_pr_step,auc_roc_worst_case,auc_pr_worst_case,cases_scored,indeterminate"
    )?;
    writeln!(
        summary,
        "{},{},{},{},{},{},{}",
        fmt_opt(report.auc_roc),
        fmt_opt(report.auc_pr),
        fmt_opt(report.auc_pr_step),
        fmt_opt(report.auc_roc_worst_case),
        fmt_opt(report.auc_pr_worst_case),
        report.scored_cases.len(),
        report.indeterminate_count
    )?;
    summary.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::GoldLabel;
    use crate::pipeline::detect::CaseStatus;
    use crate::pipeline::eval::ScoredCase;
    use crate::pipeline::metrics::{OperatingPoint, PrPoint, RocPoint};

    fn tiny_report() -> EvalReport {
        EvalReport {
            scored_cases: vec![
                ScoredCase {
                    case_id: "a".into(),
                    predictive_prob: Some(0.25),
                    gold: GoldLabel::Anomalous,
                    status: CaseStatus::Anomalous,
                },
                ScoredCase {
                    case_id: "b".into(),
                    predictive_prob: None,
                    gold: GoldLabel::Normal,
                    status: CaseStatus::Indeterminate,
                },
            ],
            roc_points: vec![RocPoint {
                threshold: 0.0,
                fpr: 0.0,
                tpr: 0.0,
            }],
            pr_points: vec![PrPoint {
                threshold: 0.0,
                recall: 0.0,
                precision: 1.0,
            }],
            operating_table: vec![OperatingPoint {
                threshold: 0.0,
                sensitivity: 0.0,
                specificity: 1.0,
                precision: None,
            }],
            auc_roc: Some(0.75),
            auc_pr: Some(0.5),
            auc_pr_step: Some(0.5),
            auc_roc_worst_case: Some(0.7),
            auc_pr_worst_case: Some(0.45),
            indeterminate_count: 1,
            warnings: vec![],
        }
    }

    #[test]
    fn writes_all_five_files_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let report = tiny_report();
        write_report_csvs(&report, dir.path()).unwrap();
        let names = ["roc.csv", "pr.csv", "scores.csv", "operating.csv", "summary.csv"];
        let first: Vec<Vec<u8>> = names
            .iter()
            .map(|n| std::fs::read(dir.path().join(n)).unwrap())
            .collect();
        write_report_csvs(&report, dir.path()).unwrap();
        for (name, bytes) in names.iter().zip(&first) {
            assert_eq!(&std::fs::read(dir.path().join(name)).unwrap(), bytes);
        }
        let scores = String::from_utf8(first[2].clone()).unwrap();
        assert!(scores.contains("a,0.25,anomalous,anomalous"));
        assert!(scores.contains("b,,normal,indeterminate"));
        let summary = String::from_utf8(first[4].clone()).unwrap();
        assert!(summary.lines().nth(1).unwrap().starts_with("0.75,0.5,"));
    }
}
