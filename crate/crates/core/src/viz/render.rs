use std::fmt::Write as _;
use std::io::Write;

use super::{Embedding2D, HistogramData};
use crate::error::{Error, Result};

fn csv_err(e: csv::Error) -> Error {
    Error::Data(format!("writing CSV: {e}"))
}

/// Header `id,x,y,label`; the label column is empty when unknown.
pub fn write_embedding_csv<W: Write, S: AsRef<str>>(
    ids: &[S],
    emb: &Embedding2D,
    labels: Option<&[u8]>,
    out: W,
) -> Result<()> {
    if ids.len() != emb.points.len() {
        return Err(Error::DimensionMismatch {
            expected: emb.points.len(),
            actual: ids.len(),
        });
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "x", "y", "label"]).map_err(csv_err)?;
    for (i, (id, p)) in ids.iter().zip(&emb.points).enumerate() {
        let label = labels.map_or(String::new(), |l| l[i].to_string());
        w.write_record([id.as_ref(), &p[0].to_string(), &p[1].to_string(), &label])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<embedding>", e))
}

/// Header `bin_lo,bin_hi,count` plus `count_pos,count_neg` when split.
pub fn write_histogram_csv<W: Write>(h: &HistogramData, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let split = h.counts_pos.as_ref().zip(h.counts_neg.as_ref());
    let mut header = vec!["bin_lo", "bin_hi", "count"];
    if split.is_some() {
        header.extend(["count_pos", "count_neg"]);
    }
    w.write_record(&header).map_err(csv_err)?;
    for (b, c) in h.counts.iter().enumerate() {
        let mut rec = vec![h.edges[b].to_string(), h.edges[b + 1].to_string(), c.to_string()];
        if let Some((pos, neg)) = split {
            rec.push(pos[b].to_string());
            rec.push(neg[b].to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<histogram>", e))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 40.0;
const CLASS_COLORS: [&str; 2] = ["#d95f02", "#1b9e77"];

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Scatter plot of the embedding, coloured by label (grey when unknown).
pub fn scatter_svg(emb: &Embedding2D, labels: Option<&[u8]>, title: &str) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &emb.points {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let sx = (WIDTH - 2.0 * MARGIN) / (x1 - x0).max(1e-12);
    let sy = (HEIGHT - 2.0 * MARGIN) / (y1 - y0).max(1e-12);
    let mut s = svg_open(title);
    for (i, p) in emb.points.iter().enumerate() {
        let color = labels.map_or("#888888", |l| CLASS_COLORS[usize::from(l[i] == 1)]);
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\" fill-opacity=\"0.7\"/>",
            MARGIN + (p[0] - x0) * sx,
            HEIGHT - MARGIN - (p[1] - y0) * sy
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Bar chart; stacked by class when the histogram is split.
pub fn histogram_svg(h: &HistogramData, title: &str) -> String {
    let n = h.counts.len();
    let max = h.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let bw = (WIDTH - 2.0 * MARGIN) / n as f64;
    let scale = (HEIGHT - 2.0 * MARGIN) / max;
    let mut s = svg_open(title);
    let bar = |s: &mut String, b: usize, base: usize, count: usize, color: &str| {
        if count == 0 {
            return;
        }
        let top = HEIGHT - MARGIN - (base + count) as f64 * scale;
        let _ = writeln!(
            s,
            "<rect x=\"{:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{color}\"/>",
            MARGIN + b as f64 * bw,
            (bw - 1.0).max(0.5),
            count as f64 * scale
        );
    };
    for b in 0..n {
        match (&h.counts_neg, &h.counts_pos) {
            (Some(neg), Some(pos)) => {
                bar(&mut s, b, 0, neg[b], CLASS_COLORS[0]);
                bar(&mut s, b, neg[b], pos[b], CLASS_COLORS[1]);
            }
            _ => bar(&mut s, b, 0, h.counts[b], "#7570b3"),
        }
    }
    for (x, label) in [(MARGIN, "0"), (WIDTH / 2.0, "0.5"), (WIDTH - MARGIN, "1")] {
        let _ = writeln!(
            s,
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{label}</text>",
            HEIGHT - MARGIN + 15.0
        );
    }
    s.push_str("</svg>\n");
    s
}
