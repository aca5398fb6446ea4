use std::io::Write;

use super::CvReport;
use crate::error::Result;

pub const REPORT_HEADER: [&str; 5] = ["config", "fold", "precision", "recall", "f1"];

/// One row per fold per report, in input order.
pub fn write_report_csv<W: Write>(reports: &[CvReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER).map_err(csv_err)?;
    for r in reports {
        for f in &r.folds {
            w.write_record([
                r.descriptor.clone(),
                f.fold.to_string(),
                f.metrics.precision.to_string(),
                f.metrics.recall.to_string(),
                f.metrics.f1.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| crate::Error::io("<report>", e))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Data(format!("writing report: {e}"))
}

/// Aligned text table with `mean ± std` cells, one row per report.
pub fn render_table(reports: &[CvReport]) -> String {
    let cell = |m: &super::MetricSummary| format!("{:.3} ± {:.3}", m.mean, m.std);
    let rows: Vec<[String; 4]> = reports
        .iter()
        .map(|r| [r.descriptor.clone(), cell(&r.precision), cell(&r.recall), cell(&r.f1)])
        .collect();
    let head = [String::new(), "Precision".into(), "Recall".into(), "F1".into()];
    let mut width = [0usize; 4];
    for row in rows.iter().chain(std::iter::once(&head)) {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |row: &[String; 4]| {
        let pad = |s: &str, w: usize| " ".repeat(w - s.chars().count());
        format!(
            "{}{} | {}{} | {}{} | {}{}\n",
            pad(&row[0], width[0]),
            row[0],
            row[1],
            pad(&row[1], width[1]),
            row[2],
            pad(&row[2], width[2]),
            row[3],
            pad(&row[3], width[3]),
        )
        .trim_end()
        .to_string()
            + "\n"
    };
    let mut out = line(&head);
    out.push_str(&"-".repeat(width.iter().sum::<usize>() + 9));
    out.push('\n');
    for r in &rows {
        out.push_str(&line(r));
    }
    out
}
