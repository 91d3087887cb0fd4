//! Flat CSV renderings of evaluation and analysis results.

use crossrec_core::eval::{CellOutcome, EvalReport, Stat};
use crossrec_core::topics::Analysis;

fn stat_fields(s: Option<Stat>) -> [String; 2] {
    match s {
        Some(s) => [s.mean.to_string(), s.std.to_string()],
        None => [String::new(), String::new()],
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> anyhow::Result<String> {
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?)
}

/// One row per experiment, method, group and list length. A failed cell
/// gets a single row carrying its error.
pub fn eval_csv(report: &EvalReport) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "experiment",
        "granularity",
        "train_intervals",
        "test_intervals",
        "status",
        "method",
        "group",
        "n",
        "applicable",
        "users_scored",
        "precision_mean",
        "precision_std",
        "recall_mean",
        "recall_std",
        "f1_mean",
        "f1_std",
        "diversity_mean",
        "diversity_std",
        "novelty_mean",
        "novelty_std",
        "error",
    ])?;
    for cell in &report.cells {
        let head = [
            cell.cell.name.clone(),
            cell.cell.granularity.to_string(),
            cell.cell.train_intervals.to_string(),
            cell.cell.test_intervals.to_string(),
        ];
        match &cell.outcome {
            CellOutcome::Failed { error } => {
                let mut rec: Vec<String> = head.to_vec();
                rec.push("failed".into());
                rec.extend(std::iter::repeat_n(String::new(), 15));
                rec.push(error.clone());
                w.write_record(&rec)?;
            }
            CellOutcome::Ok { rows, .. } => {
                for r in rows {
                    let mut rec: Vec<String> = head.to_vec();
                    rec.extend([
                        "ok".into(),
                        r.method.to_string(),
                        r.group.to_string(),
                        r.n.to_string(),
                        r.applicable.to_string(),
                        r.users_scored.to_string(),
                    ]);
                    for s in [r.precision, r.recall, r.f1, r.diversity, r.novelty] {
                        rec.extend(stat_fields(s));
                    }
                    rec.push(String::new());
                    w.write_record(&rec)?;
                }
            }
        }
    }
    finish(w)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-user overlap and consecutive intersection.
pub fn users_csv(users: &[String], analysis: &Analysis) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["user", "overlap", "consecutive_intersection"])?;
    for (i, u) in users.iter().enumerate() {
        w.write_record([u.clone(), opt(analysis.overlap[i]), opt(analysis.consecutive_intersection[i])])?;
    }
    finish(w)
}

/// Mean intersection of each pair of adjacent intervals.
pub fn series_csv(analysis: &Analysis) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["from_interval", "to_interval", "mean_intersection"])?;
    for (i, v) in analysis.intersection_series.iter().enumerate() {
        w.write_record([(i + 1).to_string(), (i + 2).to_string(), opt(*v)])?;
    }
    finish(w)
}

pub fn bias_csv(analysis: &Analysis) -> anyhow::Result<String> {
    let b = &analysis.bias;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["topic", "source_share", "target_share", "ratio"])?;
    for k in 0..b.ratio.len() {
        w.write_record([
            k.to_string(),
            b.source_share[k].to_string(),
            b.target_share[k].to_string(),
            b.ratio[k].to_string(),
        ])?;
    }
    finish(w)
}
