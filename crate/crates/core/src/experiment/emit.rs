use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ConfigError, RecordVerdict, ReportRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Plotdata,
}

impl OutputFormat {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            "plotdata" => Some(Self::Plotdata),
            _ => None,
        }
    }
}

/// Series drawn as SVG in `plotdata` output.
pub const HEADLINE_SERIES: &[&str] = &["lower_bound", "tail_bound", "tail_sup", "sublevel_measure", "lower_density"];

const CSV_HEADER: [&str; 9] = [
    "suite",
    "trial",
    "verdict",
    "label",
    "runtime_ms",
    "parameters",
    "measured",
    "fitted",
    "series",
];

fn verdict_name(v: RecordVerdict) -> &'static str {
    match v {
        RecordVerdict::Pass => "pass",
        RecordVerdict::Fail => "fail",
        RecordVerdict::Inconclusive => "inconclusive",
    }
}

/// One row per record; the map-valued columns hold compact JSON.
pub fn render_csv(records: &[ReportRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.suite.name().to_string(),
            r.trial.to_string(),
            verdict_name(r.verdict).to_string(),
            r.label.clone(),
            r.runtime_ms.map(|t| t.to_string()).unwrap_or_default(),
            json(&r.parameters),
            json(&r.measured),
            json(&r.fitted),
            json(&r.series),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("finite values serialise")
}

pub fn render_json(records: &[ReportRecord]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("finite values serialise");
    s.push('\n');
    s
}

/// `plotdata.tsv` with every series point, plus one SVG per headline
/// series present in the records.
pub fn render_plotdata(records: &[ReportRecord]) -> Vec<(String, String)> {
    let mut tsv = String::from("suite\ttrial\tseries\tx\ty\n");
    for r in records {
        for (name, pts) in &r.series {
            for [x, y] in pts {
                let _ = writeln!(tsv, "{}\t{}\t{}\t{}\t{}", r.suite, r.trial, name, x, y);
            }
        }
    }
    let mut files = vec![("plotdata.tsv".to_string(), tsv)];
    for &name in HEADLINE_SERIES {
        let lines: Vec<(String, &[[f64; 2]])> = records
            .iter()
            .filter_map(|r| {
                r.series
                    .get(name)
                    .filter(|p| !p.is_empty())
                    .map(|p| (format!("{}#{}", r.suite, r.trial), p.as_slice()))
            })
            .take(MAX_LINES)
            .collect();
        if !lines.is_empty() {
            files.push((format!("{name}.svg"), svg_plot(name, &lines)));
        }
    }
    files
}

const MAX_LINES: usize = 24;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn svg_plot(title: &str, lines: &[(String, &[[f64; 2]])]) -> String {
    let (w, h, m) = (640.0, 400.0, 60.0);
    let all = lines.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for [x, y] in all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if x1 - x0 <= 0.0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 <= 0.0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, w / 2.0);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{} H{}" fill="none" stroke="black"/>"#,
        h - m,
        w - m
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            px(xv),
            h - m + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            m - 6.0,
            py(yv) + 4.0,
            tick(yv)
        );
    }
    for (i, (label, pts)) in lines.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let d: Vec<String> = pts.iter().map(|[x, y]| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            d.join(" ")
        );
        if i < 8 {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" fill="{colour}" text-anchor="end">{label}</text>"#,
                w - m,
                m + 14.0 * i as f64
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Writes the report into `dir` and returns the paths written.
pub fn emit(records: &[ReportRecord], format: OutputFormat, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let files = match format {
        OutputFormat::Csv => vec![("report.csv".to_string(), render_csv(records))],
        OutputFormat::Json => vec![("report.json".to_string(), render_json(records))],
        OutputFormat::Plotdata => render_plotdata(records),
    };
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

/// Reads a report written with the `json` format.
pub fn read_json(path: &Path) -> Result<Vec<ReportRecord>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Suite;

    fn sample() -> Vec<ReportRecord> {
        let mut r = ReportRecord::new(Suite::Cascade, 0);
        r.param("b", 1.0);
        r.measure("x", 0.1 + 0.2);
        r.fit("c", 1.0 / 3.0);
        r.add_series("lower_bound", [(1.0, -2.5), (2.0, -7.25)]);
        r.set_verdict(true, "all_properties_hold");
        vec![r]
    }

    #[test]
    fn empty_csv_has_header() {
        assert_eq!(render_csv(&[]).lines().count(), 1);
        assert!(render_csv(&[]).starts_with("suite,trial,verdict"));
    }

    #[test]
    fn csv_cells_hold_json() {
        let text = render_csv(&sample());
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let row = rd.records().next().unwrap().unwrap();
        let measured: std::collections::BTreeMap<String, f64> = serde_json::from_str(&row[6]).unwrap();
        assert_eq!(measured["x"], 0.1 + 0.2);
        assert_eq!(&row[2], "pass");
    }

    #[test]
    fn json_round_trips_exactly() {
        let recs = sample();
        let back: Vec<ReportRecord> = serde_json::from_str(&render_json(&recs)).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn plotdata_draws_headline_series() {
        let files = render_plotdata(&sample());
        assert_eq!(files[0].0, "plotdata.tsv");
        assert_eq!(files[0].1.lines().count(), 3);
        assert!(files.iter().any(|(n, body)| n == "lower_bound.svg" && body.contains("<polyline")));
    }
}
