//! CSV and plain-text renderings of library results.

use std::fmt::Write;

use lfpclass::classify::{FeatureShrinkage, GridResult, PipelineConfig};
use lfpclass::experiments::{AdaptivityRow, BenchmarkReport, ConsistencyRow, PhaseAblation, RiskCurve};
use lfpclass::io::fmt_f64;

pub fn coefficients_csv(coeffs: &[f64]) -> String {
    let mut out = String::from("index,value\n");
    for (i, v) in coeffs.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, fmt_f64(*v));
    }
    out
}

pub fn signal_csv(samples: &[f64]) -> String {
    let mut out = String::from("sample_index,value\n");
    for (i, v) in samples.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", fmt_f64(*v));
    }
    out
}

/// Per-class rows followed by an `all` row.
pub fn benchmark_csv(report: &BenchmarkReport) -> String {
    let mut out = String::from("class,trials,correct,accuracy\n");
    let mut total = 0;
    let mut correct = 0;
    for (k, row) in report.confusion.iter().enumerate() {
        let n: usize = row.iter().sum();
        total += n;
        correct += row[k];
        let _ = writeln!(out, "{},{n},{},{}", k + 1, row[k], fmt_f64(report.per_class_accuracy[k]));
    }
    let _ = writeln!(out, "all,{total},{correct},{}", fmt_f64(report.overall_accuracy));
    out
}

pub fn confusion_csv(confusion: &[Vec<usize>]) -> String {
    let mut out = String::from("true_label");
    for k in 1..=confusion.len() {
        let _ = write!(out, ",pred_{k}");
    }
    out.push('\n');
    for (k, row) in confusion.iter().enumerate() {
        let _ = write!(out, "{}", k + 1);
        for c in row {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    out
}

pub fn describe_config(config: &PipelineConfig) -> String {
    let shrinkage = match &config.shrinkage {
        FeatureShrinkage::Profile(p) => format!(
            "weights [{}]",
            p.weights().iter().map(|w| format!("{w:.4}")).collect::<Vec<_>>().join(", ")
        ),
        FeatureShrinkage::Bjs { pass_through } => format!("blockwise James-Stein, L = {pass_through}"),
    };
    format!(
        "pipeline {}; N = {}; {shrinkage}; P = {}; ridge {:?}; priors {:?}; magnitude-only {}",
        config.pipeline_name(),
        config.samples,
        config.pca_dim,
        config.ridge,
        config.priors,
        config.magnitude_only
    )
}

pub fn benchmark_summary(report: &BenchmarkReport, scheme: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", describe_config(&report.config));
    let _ = writeln!(out, "scheme {scheme}; seed {}", report.seed);
    let _ = writeln!(
        out,
        "accuracy {:.3} (std error {:.3})",
        report.overall_accuracy, report.accuracy_std_error
    );
    let _ = writeln!(out, "worst-case error P_e {:.3}", report.worst_case_error);
    for (k, a) in report.per_class_accuracy.iter().enumerate() {
        let _ = writeln!(out, "  class {}: {a:.3}", k + 1);
    }
    for note in &report.notes {
        let _ = writeln!(out, "note: {note}");
    }
    out
}

pub fn grid_csv(result: &GridResult) -> String {
    let mut out = String::from("harmonics,pattern,pca_dim,accuracy,worst_case_error,best\n");
    for (i, row) in result.rows.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.harmonics,
            row.pattern.describe(),
            row.pca_dim,
            fmt_f64(row.accuracy),
            fmt_f64(row.worst_case_error),
            u8::from(i == result.best_index)
        );
    }
    out
}

pub fn rates_csv(curve: &RiskCurve) -> String {
    let mut out = String::from("epsilon,mse,std_error,trials\n");
    for p in &curve.points {
        let _ = writeln!(out, "{},{},{},{}", fmt_f64(p.abscissa), fmt_f64(p.mse), fmt_f64(p.std_error), p.trials);
    }
    out
}

pub fn rates_summary(curve: &RiskCurve) -> String {
    match curve.log_log_slope() {
        Some(s) => format!("log-log slope of worst-case risk against epsilon: {s:.4}\n"),
        None => "log-log slope needs at least two noise levels\n".to_string(),
    }
}

pub fn adaptivity_csv(rows: &[AdaptivityRow], epsilon: f64) -> String {
    let mut out =
        String::from("alpha,radius,epsilon,bjs_risk,bjs_std_error,pinsker_risk,pinsker_std_error,ratio\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(r.spec.alpha()),
            fmt_f64(r.spec.radius()),
            fmt_f64(epsilon),
            fmt_f64(r.bjs_risk),
            fmt_f64(r.bjs_std_error),
            fmt_f64(r.pinsker_risk),
            fmt_f64(r.pinsker_std_error),
            fmt_f64(r.ratio)
        );
    }
    out
}

pub fn consistency_csv(rows: &[ConsistencyRow]) -> String {
    let mut out = String::from("samples,worst_class_error,std_error,sup_mse,mse_std_error,bound\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.samples,
            fmt_f64(r.worst_class_error),
            fmt_f64(r.error_std_error),
            fmt_f64(r.sup_mse),
            fmt_f64(r.mse_std_error),
            fmt_f64(r.bound)
        );
    }
    out
}

pub fn phase_csv(ablation: &PhaseAblation) -> String {
    let mut out = String::from("features,accuracy,std_error,worst_case_error\n");
    for (name, r) in [("full", &ablation.full), ("magnitude", &ablation.magnitude)] {
        let _ = writeln!(
            out,
            "{name},{},{},{}",
            fmt_f64(r.overall_accuracy),
            fmt_f64(r.accuracy_std_error),
            fmt_f64(r.worst_case_error)
        );
    }
    out
}

pub fn phase_summary(ablation: &PhaseAblation) -> String {
    format!(
        "full accuracy {:.3}, magnitude-only accuracy {:.3}\npaired difference {:.3} (std error {:.3})\n",
        ablation.full.overall_accuracy,
        ablation.magnitude.overall_accuracy,
        ablation.difference,
        ablation.paired_std_error
    )
}
