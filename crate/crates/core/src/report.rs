//! Reporting: run manifests, CSV score tables, cross-run comparison
//! tables, and self-contained SVG bar charts.
//!
//! Everything here is plain-text output meant for diffing and archiving:
//! CSV column orders are fixed, floats are printed with two decimals, the
//! manifest timestamps are UTC, and the SVG is generated directly — no
//! plotting library, no runtime dependencies in the output.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{BreakdownRow, ConfusionMatrix, LabelledBreakdownRow, Metrics};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("failed to {action} {path}: {message}")]
    Io {
        action: &'static str,
        path: String,
        message: String,
    },
    #[error("{path} line {line}: {message}")]
    Malformed {
        path: String,
        line: usize,
        message: String,
    },
}

fn io_err<'p>(action: &'static str, path: &'p Path) -> impl Fn(std::io::Error) -> ReportError + 'p {
    move |e| ReportError::Io {
        action,
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Gregorian date for a day count since 1970-01-01 (valid for the whole
/// u64-seconds range we produce).
fn civil_from_days(days: i64) -> (i64, u32, u32) {
    let z = days + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let day_of_era = (z - era * 146_097) as u64;
    let year_of_era =
        (day_of_era - day_of_era / 1460 + day_of_era / 36_524 - day_of_era / 146_096) / 365;
    let year = year_of_era as i64 + era * 400;
    let day_of_year = day_of_era - (365 * year_of_era + year_of_era / 4 - year_of_era / 100);
    let mp = (5 * day_of_year + 2) / 153;
    let day = (day_of_year - (153 * mp + 2) / 5 + 1) as u32;
    let month = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if month <= 2 { year + 1 } else { year }, month, day)
}

/// Format a unix timestamp as `YYYY-MM-DDThh:mm:ssZ`.
pub fn format_utc(unix: u64) -> String {
    let days = (unix / 86_400) as i64;
    let seconds_of_day = unix % 86_400;
    let (year, month, day) = civil_from_days(days);
    let hour = seconds_of_day / 3600;
    let minute = seconds_of_day % 3600 / 60;
    let second = seconds_of_day % 60;
    format!("{year:04}-{month:02}-{day:02}T{hour:02}:{minute:02}:{second:02}Z")
}

/// Provenance sidecar written into every run directory.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub created_at_unix: u64,
    pub created_at_utc: String,
    pub tool_version: String,
    pub dataset_schema_version: u32,
    pub dataset_path: String,
    pub model_config_path: String,
    pub provider: String,
    pub instances: usize,
}

impl RunManifest {
    pub fn new(
        dataset_path: &Path,
        model_config_path: &Path,
        provider: &str,
        instances: usize,
    ) -> Self {
        let created_at_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            created_at_unix,
            created_at_utc: format_utc(created_at_unix),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            dataset_schema_version: crate::puzzle::SCHEMA_VERSION,
            dataset_path: dataset_path.display().to_string(),
            model_config_path: model_config_path.display().to_string(),
            provider: provider.to_string(),
            instances,
        }
    }
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), ReportError> {
    let json = serde_json::to_string_pretty(manifest).expect("manifests serialize without fail");
    fs::write(path, json + "\n").map_err(io_err("write", path))
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, ReportError> {
    let text = fs::read_to_string(path).map_err(io_err("read", path))?;
    serde_json::from_str(&text).map_err(|e| ReportError::Malformed {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Column order of `metrics.csv`, and row order of the combined table.
pub const METRICS_COLUMNS: [&str; 12] = [
    "accuracy",
    "f1",
    "mcc",
    "recall",
    "precision",
    "parsed",
    "unparsed",
    "failed",
    "true_pos",
    "false_pos",
    "true_neg",
    "false_neg",
];

/// A scored run as its `metrics.csv` represents it.
#[derive(Copy, Clone, PartialEq, Debug)]
pub struct MetricsSummary {
    pub metrics: Metrics,
    pub matrix: ConfusionMatrix,
}

impl MetricsSummary {
    fn column_values(&self) -> [String; 12] {
        [
            format!("{:.2}", self.metrics.accuracy),
            format!("{:.2}", self.metrics.f1),
            format!("{:.2}", self.metrics.mcc),
            format!("{:.2}", self.metrics.recall),
            format!("{:.2}", self.metrics.precision),
            self.matrix.parsed.to_string(),
            self.matrix.unparsed.to_string(),
            self.matrix.failed.to_string(),
            self.matrix.true_pos.to_string(),
            self.matrix.false_pos.to_string(),
            self.matrix.true_neg.to_string(),
            self.matrix.false_neg.to_string(),
        ]
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, ReportError> {
    let file = fs::File::create(path).map_err(io_err("create", path))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_flush(mut writer: csv::Writer<fs::File>, path: &Path) -> Result<(), ReportError> {
    writer.flush().map_err(|e| io_err("write", path)(e))
}

/// Write a run's score table: one header line, one data line.
pub fn write_metrics_csv(path: &Path, summary: &MetricsSummary) -> Result<(), ReportError> {
    let mut writer = csv_writer(path)?;
    writer
        .write_record(METRICS_COLUMNS)
        .and_then(|_| writer.write_record(summary.column_values()))
        .map_err(|e| ReportError::Malformed {
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
    csv_flush(writer, path)
}

fn parse_cell<T: std::str::FromStr>(
    cell: &str,
    column: &str,
    path: &Path,
    line: usize,
) -> Result<T, ReportError> {
    cell.parse().map_err(|_| ReportError::Malformed {
        path: path.display().to_string(),
        line,
        message: format!("cannot parse {column} value {cell:?}"),
    })
}

/// Read back a `metrics.csv`, rejecting any deviation from the written
/// shape.
pub fn read_metrics_csv(path: &Path) -> Result<MetricsSummary, ReportError> {
    let text = fs::read_to_string(path).map_err(io_err("read", path))?;
    let malformed = |line: usize, message: String| ReportError::Malformed {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for (index, row) in reader.records().enumerate() {
        rows.push(row.map_err(|e| malformed(index + 1, e.to_string()))?);
    }
    if rows.len() != 2 {
        return Err(malformed(
            rows.len(),
            format!(
                "expected a header line and one data line, found {} lines",
                rows.len()
            ),
        ));
    }
    let header: Vec<&str> = rows[0].iter().collect();
    if header != METRICS_COLUMNS {
        return Err(malformed(1, format!("unexpected header {header:?}")));
    }
    let data = &rows[1];
    if data.len() != METRICS_COLUMNS.len() {
        return Err(malformed(
            2,
            format!(
                "expected {} fields, found {}",
                METRICS_COLUMNS.len(),
                data.len()
            ),
        ));
    }
    let float = |i: usize| parse_cell::<f64>(&data[i], METRICS_COLUMNS[i], path, 2);
    let count = |i: usize| parse_cell::<usize>(&data[i], METRICS_COLUMNS[i], path, 2);
    Ok(MetricsSummary {
        metrics: Metrics {
            accuracy: float(0)?,
            f1: float(1)?,
            mcc: float(2)?,
            recall: float(3)?,
            precision: float(4)?,
        },
        matrix: ConfusionMatrix {
            parsed: count(5)?,
            unparsed: count(6)?,
            failed: count(7)?,
            true_pos: count(8)?,
            false_pos: count(9)?,
            true_neg: count(10)?,
            false_neg: count(11)?,
        },
    })
}

/// Write a breakdown table with the fixed header `key,parsed,percent_correct`.
pub fn write_breakdown_csv(path: &Path, rows: &[BreakdownRow]) -> Result<(), ReportError> {
    let mut writer = csv_writer(path)?;
    let io = |e: csv::Error| ReportError::Malformed {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    };
    writer
        .write_record(["key", "parsed", "percent_correct"])
        .map_err(io)?;
    for row in rows {
        writer
            .write_record([
                row.key.clone(),
                row.parsed.to_string(),
                format!("{:.2}", row.percent_correct),
            ])
            .map_err(io)?;
    }
    csv_flush(writer, path)
}

/// Read back a breakdown table written by [`write_breakdown_csv`].
pub fn read_breakdown_csv(path: &Path) -> Result<Vec<BreakdownRow>, ReportError> {
    let text = fs::read_to_string(path).map_err(io_err("read", path))?;
    let malformed = |line: usize, message: String| ReportError::Malformed {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(index + 1, e.to_string()))?;
        let fields: Vec<&str> = record.iter().collect();
        if index == 0 {
            if fields != ["key", "parsed", "percent_correct"] {
                return Err(malformed(1, format!("unexpected header {fields:?}")));
            }
            continue;
        }
        if fields.len() != 3 {
            return Err(malformed(
                index + 1,
                format!("expected 3 fields, found {}", fields.len()),
            ));
        }
        rows.push(BreakdownRow {
            key: fields[0].to_string(),
            parsed: parse_cell(fields[1], "parsed", path, index + 1)?,
            percent_correct: parse_cell(fields[2], "percent_correct", path, index + 1)?,
        });
    }
    if rows.is_empty() && text.trim().is_empty() {
        return Err(malformed(1, "empty breakdown file".into()));
    }
    Ok(rows)
}

/// Write a label-split breakdown with the fixed header
/// `key,label,parsed,percent_correct`.
pub fn write_labelled_breakdown_csv(
    path: &Path,
    rows: &[LabelledBreakdownRow],
) -> Result<(), ReportError> {
    let mut writer = csv_writer(path)?;
    let io = |e: csv::Error| ReportError::Malformed {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    };
    writer
        .write_record(["key", "label", "parsed", "percent_correct"])
        .map_err(io)?;
    for row in rows {
        writer
            .write_record([
                row.key.clone(),
                row.label.clone(),
                row.parsed.to_string(),
                format!("{:.2}", row.percent_correct),
            ])
            .map_err(io)?;
    }
    csv_flush(writer, path)
}

/// Read back a label-split breakdown written by
/// [`write_labelled_breakdown_csv`].
pub fn read_labelled_breakdown_csv(path: &Path) -> Result<Vec<LabelledBreakdownRow>, ReportError> {
    let text = fs::read_to_string(path).map_err(io_err("read", path))?;
    let malformed = |line: usize, message: String| ReportError::Malformed {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(index + 1, e.to_string()))?;
        let fields: Vec<&str> = record.iter().collect();
        if index == 0 {
            if fields != ["key", "label", "parsed", "percent_correct"] {
                return Err(malformed(1, format!("unexpected header {fields:?}")));
            }
            continue;
        }
        if fields.len() != 4 {
            return Err(malformed(
                index + 1,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        rows.push(LabelledBreakdownRow {
            key: fields[0].to_string(),
            label: fields[1].to_string(),
            parsed: parse_cell(fields[2], "parsed", path, index + 1)?,
            percent_correct: parse_cell(fields[3], "percent_correct", path, index + 1)?,
        });
    }
    if rows.is_empty() && text.trim().is_empty() {
        return Err(malformed(1, "empty breakdown file".into()));
    }
    Ok(rows)
}

/// Write the cross-run table: one row per metric, one column per run.
pub fn write_combined_metrics_csv(
    path: &Path,
    runs: &[(String, MetricsSummary)],
) -> Result<(), ReportError> {
    let mut writer = csv_writer(path)?;
    let io = |e: csv::Error| ReportError::Malformed {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    };
    let mut header = vec!["metric".to_string()];
    header.extend(runs.iter().map(|(name, _)| name.clone()));
    writer.write_record(&header).map_err(io)?;
    let columns: Vec<[String; 12]> = runs.iter().map(|(_, s)| s.column_values()).collect();
    for (row_index, metric) in METRICS_COLUMNS.iter().enumerate() {
        let mut row = vec![metric.to_string()];
        row.extend(columns.iter().map(|c| c[row_index].clone()));
        writer.write_record(&row).map_err(io)?;
    }
    csv_flush(writer, path)
}

/// One bar series in a chart: a value per category (use NAN for a missing
/// category — it renders as no bar).
#[derive(Clone, PartialEq, Debug)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

/// A grouped bar chart rendered to a standalone SVG string.
#[derive(Clone, PartialEq, Debug)]
pub struct BarChart {
    pub title: String,
    pub y_label: String,
    pub categories: Vec<String>,
    pub series: Vec<Series>,
}

const PALETTE: [&str; 6] = [
    "#4472c4", "#ed7d31", "#7f7f7f", "#ffc000", "#5b9bd5", "#70ad47",
];

fn xml_escape(text: &str) -> String {
    let mut escaped = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => escaped.push_str("&amp;"),
            '<' => escaped.push_str("&lt;"),
            '>' => escaped.push_str("&gt;"),
            '"' => escaped.push_str("&quot;"),
            other => escaped.push(other),
        }
    }
    escaped
}

impl BarChart {
    /// Render the chart. The y axis spans 0..100, extended to -100 when any
    /// value is negative (scores here are percentages or percent-scaled
    /// correlations); values outside the span are clamped.
    pub fn render_svg(&self) -> String {
        let width = 760.0;
        let height = 420.0;
        let (left, right, top, bottom) = (64.0, 24.0, 56.0, 64.0);
        let plot_w = width - left - right;
        let plot_h = height - top - bottom;
        let negative = self
            .series
            .iter()
            .flat_map(|s| &s.values)
            .any(|v| v.is_finite() && *v < 0.0);
        let (lo, hi) = if negative {
            (-100.0, 100.0)
        } else {
            (0.0, 100.0)
        };
        let y_of = |value: f64| {
            let v = value.clamp(lo, hi);
            top + plot_h - (v - lo) / (hi - lo) * plot_h
        };

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
             viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">\n"
        ));
        svg.push_str(&format!(
            "  <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
            left + plot_w / 2.0,
            xml_escape(&self.title)
        ));
        svg.push_str(&format!(
            "  <text x=\"16\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\" \
             transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
            top + plot_h / 2.0,
            top + plot_h / 2.0,
            xml_escape(&self.y_label)
        ));

        // horizontal gridlines every 20 units
        let mut grid = lo;
        while grid <= hi + 1e-9 {
            let y = y_of(grid);
            svg.push_str(&format!(
                "  <line x1=\"{left}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
                 stroke=\"#dddddd\"/>\n",
                left + plot_w
            ));
            svg.push_str(&format!(
                "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{grid:.0}</text>\n",
                left - 6.0,
                y + 4.0
            ));
            grid += 20.0;
        }
        // axes (and the zero line when it is interior)
        svg.push_str(&format!(
            "  <line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{:.1}\" stroke=\"#333333\"/>\n",
            top + plot_h
        ));
        svg.push_str(&format!(
            "  <line x1=\"{left}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#333333\"/>\n",
            y_of(lo.max(0.0)),
            left + plot_w,
            y_of(lo.max(0.0))
        ));

        let groups = self.categories.len().max(1) as f64;
        let group_w = plot_w / groups;
        let bar_slots = self.series.len().max(1) as f64;
        let bar_w = group_w * 0.8 / bar_slots;
        for (series_index, series) in self.series.iter().enumerate() {
            let color = PALETTE[series_index % PALETTE.len()];
            for (cat_index, &value) in series.values.iter().enumerate() {
                if cat_index >= self.categories.len() || !value.is_finite() {
                    continue;
                }
                let x =
                    left + cat_index as f64 * group_w + group_w * 0.1 + series_index as f64 * bar_w;
                let y_val = y_of(value);
                let y_base = y_of(0.0_f64.max(lo));
                let (y, h) = if y_val <= y_base {
                    (y_val, y_base - y_val)
                } else {
                    (y_base, y_val - y_base)
                };
                svg.push_str(&format!(
                    "  <rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{bar_w:.1}\" height=\"{h:.1}\" \
                     fill=\"{color}\"><title>{}: {value:.2}</title></rect>\n",
                    xml_escape(&series.name)
                ));
            }
        }
        for (cat_index, category) in self.categories.iter().enumerate() {
            let x = left + (cat_index as f64 + 0.5) * group_w;
            svg.push_str(&format!(
                "  <text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                top + plot_h + 18.0,
                xml_escape(category)
            ));
        }
        // legend, one swatch per series, top-right
        for (series_index, series) in self.series.iter().enumerate() {
            let color = PALETTE[series_index % PALETTE.len()];
            let y = top - 22.0 + series_index as f64 * 16.0;
            svg.push_str(&format!(
                "  <rect x=\"{:.1}\" y=\"{y:.1}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n",
                left + plot_w - 150.0
            ));
            svg.push_str(&format!(
                "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\">{}</text>\n",
                left + plot_w - 134.0,
                y + 10.0,
                xml_escape(&series.name)
            ));
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Breakdown tables that [`render_reports`] looks for in each run directory,
/// in chart order.
const CHARTED_KEYS: [&str; 3] = ["n_args", "num_paths", "label"];

/// Build the cross-run report into `out_dir`: the combined metrics table, a
/// score comparison chart, and one percent-correct chart per run per
/// breakdown table found in the run directory (`breakdown_<key>.csv`, plus a
/// yes/no-split chart when `breakdown_n_args_by_label.csv` is present).
/// Returns the files written.
pub fn render_reports(
    runs: &[(String, PathBuf)],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(out_dir).map_err(io_err("create", out_dir))?;
    let mut summaries = Vec::with_capacity(runs.len());
    for (name, dir) in runs {
        summaries.push((name.clone(), read_metrics_csv(&dir.join("metrics.csv"))?));
    }
    let mut written = Vec::new();

    let combined = out_dir.join("combined_metrics.csv");
    write_combined_metrics_csv(&combined, &summaries)?;
    written.push(combined);

    let score_chart = BarChart {
        title: "Score comparison".into(),
        y_label: "score".into(),
        categories: ["accuracy", "f1", "mcc", "recall", "precision"]
            .into_iter()
            .map(String::from)
            .collect(),
        series: summaries
            .iter()
            .map(|(name, s)| Series {
                name: name.clone(),
                values: vec![
                    s.metrics.accuracy,
                    s.metrics.f1,
                    s.metrics.mcc,
                    s.metrics.recall,
                    s.metrics.precision,
                ],
            })
            .collect(),
    };
    let scores_path = out_dir.join("scores.svg");
    fs::write(&scores_path, score_chart.render_svg()).map_err(io_err("write", &scores_path))?;
    written.push(scores_path);

    for (name, dir) in runs {
        for key in CHARTED_KEYS {
            let source = dir.join(format!("breakdown_{key}.csv"));
            if !source.exists() {
                continue;
            }
            let rows = read_breakdown_csv(&source)?;
            let chart = BarChart {
                title: format!("{name}: percent correct by {key}"),
                y_label: "percent correct".into(),
                categories: rows.iter().map(|r| r.key.clone()).collect(),
                series: vec![Series {
                    name: name.clone(),
                    values: rows.iter().map(|r| r.percent_correct).collect(),
                }],
            };
            let path = out_dir.join(format!("{name}_{key}.svg"));
            fs::write(&path, chart.render_svg()).map_err(io_err("write", &path))?;
            written.push(path);
        }
        let split_source = dir.join("breakdown_n_args_by_label.csv");
        if split_source.exists() {
            let rows = read_labelled_breakdown_csv(&split_source)?;
            // distinct keys in file order (the writer already sorted them)
            let mut categories: Vec<String> = Vec::new();
            for row in &rows {
                if !categories.contains(&row.key) {
                    categories.push(row.key.clone());
                }
            }
            let series = ["yes", "no"]
                .into_iter()
                .map(|label| Series {
                    name: label.to_string(),
                    values: categories
                        .iter()
                        .map(|category| {
                            rows.iter()
                                .find(|r| &r.key == category && r.label == label)
                                .map_or(f64::NAN, |r| r.percent_correct)
                        })
                        .collect(),
                })
                .collect();
            let chart = BarChart {
                title: format!("{name}: percent correct by n_args, split by label"),
                y_label: "percent correct".into(),
                categories,
                series,
            };
            let path = out_dir.join(format!("{name}_n_args_by_label.svg"));
            fs::write(&path, chart.render_svg()).map_err(io_err("write", &path))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn utc_formatting_matches_known_timestamps() {
        assert_eq!(format_utc(0), "1970-01-01T00:00:00Z");
        assert_eq!(format_utc(86_399), "1970-01-01T23:59:59Z");
        assert_eq!(format_utc(946_684_800), "2000-01-01T00:00:00Z");
        assert_eq!(format_utc(951_782_400), "2000-02-29T00:00:00Z");
        assert_eq!(format_utc(1_609_459_200), "2021-01-01T00:00:00Z");
        assert_eq!(format_utc(1_609_459_261), "2021-01-01T00:01:01Z");
    }

    fn sample_summary() -> MetricsSummary {
        MetricsSummary {
            metrics: Metrics {
                accuracy: 52.0,
                f1: 1300.0 / 19.0,
                mcc: 0.0,
                recall: 100.0,
                precision: 52.0,
            },
            matrix: ConfusionMatrix {
                true_pos: 13,
                false_pos: 12,
                true_neg: 0,
                false_neg: 0,
                parsed: 25,
                unparsed: 0,
                failed: 0,
            },
        }
    }

    #[test]
    fn metrics_csv_round_trips_with_the_fixed_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        let summary = sample_summary();
        write_metrics_csv(&path, &summary).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "accuracy,f1,mcc,recall,precision,parsed,unparsed,failed,true_pos,false_pos,true_neg,false_neg"
        );
        assert_eq!(
            lines.next().unwrap(),
            "52.00,68.42,0.00,100.00,52.00,25,0,0,13,12,0,0"
        );
        assert_eq!(lines.next(), None);
        let back = read_metrics_csv(&path).unwrap();
        assert_eq!(back.matrix, summary.matrix);
        assert!(
            (back.metrics.f1 - 68.42).abs() < 1e-9,
            "read back the rounded value"
        );
    }

    #[test]
    fn metrics_reader_rejects_reshaped_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        fs::write(&path, "accuracy,f1\n1.0,2.0\n").unwrap();
        assert!(matches!(
            read_metrics_csv(&path).unwrap_err(),
            ReportError::Malformed { line: 1, .. }
        ));
        fs::write(
            &path,
            "accuracy,f1,mcc,recall,precision,parsed,unparsed,failed,true_pos,false_pos,true_neg,false_neg\n\
             52.00,68.42,0.00,100.00,52.00,25,0,zero,13,12,0,0\n",
        )
        .unwrap();
        assert!(matches!(
            read_metrics_csv(&path).unwrap_err(),
            ReportError::Malformed { line: 2, .. }
        ));
        let missing = dir.path().join("absent.csv");
        assert!(matches!(
            read_metrics_csv(&missing).unwrap_err(),
            ReportError::Io { .. }
        ));
    }

    #[test]
    fn breakdown_csv_is_written_byte_for_byte() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("breakdown.csv");
        let rows = vec![
            BreakdownRow {
                key: "1".into(),
                parsed: 10,
                percent_correct: 100.0,
            },
            BreakdownRow {
                key: "2".into(),
                parsed: 10,
                percent_correct: 0.0,
            },
            BreakdownRow {
                key: "10".into(),
                parsed: 9,
                percent_correct: 100.0 * 2.0 / 3.0,
            },
        ];
        write_breakdown_csv(&path, &rows).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "key,parsed,percent_correct\n1,10,100.00\n2,10,0.00\n10,9,66.67\n"
        );
        let back = read_breakdown_csv(&path).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[2].key, "10");
        assert!((back[2].percent_correct - 66.67).abs() < 1e-9);
    }

    #[test]
    fn labelled_breakdown_csv_has_the_four_column_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("split.csv");
        let rows = vec![LabelledBreakdownRow {
            key: "3".into(),
            label: "no".into(),
            parsed: 4,
            percent_correct: 25.0,
        }];
        write_labelled_breakdown_csv(&path, &rows).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "key,label,parsed,percent_correct\n3,no,4,25.00\n"
        );
        assert_eq!(read_labelled_breakdown_csv(&path).unwrap(), rows);

        fs::write(&path, "key,parsed,percent_correct\n3,4,25.00\n").unwrap();
        assert!(matches!(
            read_labelled_breakdown_csv(&path).unwrap_err(),
            ReportError::Malformed { line: 1, .. }
        ));
    }

    #[test]
    fn combined_table_puts_runs_in_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("combined_metrics.csv");
        let summary = sample_summary();
        write_combined_metrics_csv(
            &path,
            &[("baseline".into(), summary), ("model".into(), summary)],
        )
        .unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "metric,baseline,model");
        assert_eq!(lines[1], "accuracy,52.00,52.00");
        assert_eq!(lines.len(), 1 + METRICS_COLUMNS.len());
        assert_eq!(lines[12], "false_neg,0,0");
    }

    #[test]
    fn bar_chart_renders_flat_svg() {
        let chart = BarChart {
            title: "Scores & more".into(),
            y_label: "percent".into(),
            categories: vec!["a".into(), "b".into(), "c".into()],
            series: vec![
                Series {
                    name: "first".into(),
                    values: vec![10.0, 50.0, 100.0],
                },
                Series {
                    name: "second".into(),
                    values: vec![0.0, f64::NAN, 75.0],
                },
            ],
        };
        let svg = chart.render_svg();
        assert!(svg.starts_with("<svg "));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("Scores &amp; more"), "titles are escaped");
        assert!(svg.contains("first") && svg.contains("second"));
        // 5 value bars (one NAN skipped) + 2 legend swatches + background
        assert_eq!(svg.matches("<rect ").count(), 8);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn negative_values_extend_the_axis_and_point_down() {
        let chart = BarChart {
            title: "correlation".into(),
            y_label: "mcc".into(),
            categories: vec!["m".into()],
            series: vec![Series {
                name: "run".into(),
                values: vec![-50.0],
            }],
        };
        let svg = chart.render_svg();
        assert!(svg.contains(">-100<"), "axis shows the negative span");
        assert!(svg.contains("-50.00"));
    }

    #[test]
    fn manifest_round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let manifest = RunManifest::new(
            Path::new("data/dataset.jsonl"),
            Path::new("configs/oracle.toml"),
            "oracle",
            1300,
        );
        assert_eq!(manifest.dataset_schema_version, 1);
        assert_eq!(manifest.tool_version, env!("CARGO_PKG_VERSION"));
        assert_eq!(
            manifest.created_at_utc,
            format_utc(manifest.created_at_unix)
        );
        write_manifest(&path, &manifest).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), manifest);
    }

    #[test]
    fn render_reports_produces_table_and_charts() {
        let dir = tempfile::tempdir().unwrap();
        let run_a = dir.path().join("run_a");
        let run_b = dir.path().join("run_b");
        fs::create_dir_all(&run_a).unwrap();
        fs::create_dir_all(&run_b).unwrap();
        write_metrics_csv(&run_a.join("metrics.csv"), &sample_summary()).unwrap();
        write_metrics_csv(&run_b.join("metrics.csv"), &sample_summary()).unwrap();
        write_breakdown_csv(
            &run_a.join("breakdown_n_args.csv"),
            &[BreakdownRow {
                key: "2".into(),
                parsed: 5,
                percent_correct: 40.0,
            }],
        )
        .unwrap();
        write_breakdown_csv(
            &run_b.join("breakdown_n_args.csv"),
            &[BreakdownRow {
                key: "10".into(),
                parsed: 5,
                percent_correct: 80.0,
            }],
        )
        .unwrap();
        write_labelled_breakdown_csv(
            &run_b.join("breakdown_n_args_by_label.csv"),
            &[
                LabelledBreakdownRow {
                    key: "10".into(),
                    label: "no".into(),
                    parsed: 3,
                    percent_correct: 100.0,
                },
                LabelledBreakdownRow {
                    key: "10".into(),
                    label: "yes".into(),
                    parsed: 2,
                    percent_correct: 50.0,
                },
            ],
        )
        .unwrap();
        let out = dir.path().join("report");
        let written = render_reports(
            &[("a".into(), run_a.clone()), ("b".into(), run_b.clone())],
            &out,
        )
        .unwrap();
        // combined table + scores + one n_args chart per run + b's split chart
        assert_eq!(written.len(), 5);
        assert!(out.join("combined_metrics.csv").exists());
        assert!(out.join("scores.svg").exists());
        let chart_a = fs::read_to_string(out.join("a_n_args.svg")).unwrap();
        assert!(chart_a.contains(">2<") && chart_a.contains("40.00"));
        let chart_b = fs::read_to_string(out.join("b_n_args.svg")).unwrap();
        assert!(chart_b.contains(">10<") && chart_b.contains("80.00"));
        let split = fs::read_to_string(out.join("b_n_args_by_label.svg")).unwrap();
        assert!(split.contains("yes") && split.contains("no"));
        assert!(split.contains("50.00") && split.contains("100.00"));
    }

    #[test]
    fn render_reports_surfaces_malformed_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let run = dir.path().join("run");
        fs::create_dir_all(&run).unwrap();
        fs::write(run.join("metrics.csv"), "not,a,metrics\nfile,at,all\n").unwrap();
        assert!(matches!(
            render_reports(&[("x".into(), run)], &dir.path().join("out")).unwrap_err(),
            ReportError::Malformed { .. }
        ));
    }
}
