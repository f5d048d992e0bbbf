//! End-to-end conditional anomaly detection and the leave-one-out evaluation
//! harness.

mod detect;
mod eval;
mod inject;
mod metrics;
mod report;

pub use detect::{detect_case, CaseStatus, DetectionConfig, DetectionOutcome, ModelKind, Population};
pub use eval::{leave_one_out, EvalReport, ScoredCase};
pub use inject::inject_anomalies;
pub use metrics::{
    operating_table, pr_auc, pr_auc_step, pr_curve, prevalence_adjusted_precision, roc_auc,
    roc_curve, OperatingPoint, PrPoint, RocPoint,
};
pub use report::write_report_csvs;
