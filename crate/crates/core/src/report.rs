//! CSV metrics rows and SVG charts.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::augment::EaParams;
use crate::error::{QseaError, Result};
use crate::metrics::RunMetrics;

pub const CSV_HEADER: &str = "run_id,seed,axis,value,epoch,loss_total,loss_f1,loss_f2,acc,wall_s";

/// One line of the metrics CSV. Empty cells read back as `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub run_id: usize,
    pub seed: u64,
    pub axis: String,
    pub value: String,
    pub epoch: Option<usize>,
    pub loss_total: Option<f64>,
    pub loss_f1: Option<f64>,
    pub loss_f2: Option<f64>,
    pub acc: Option<f64>,
    pub wall_s: f64,
}

impl CsvRow {
    /// Summary row: last epoch's losses and the run's accuracy.
    pub fn summary(run_id: usize, axis: &str, value: &str, m: &RunMetrics) -> Self {
        let last = m.losses.last();
        Self {
            run_id,
            seed: m.seed,
            axis: axis.to_string(),
            value: value.to_string(),
            epoch: last.map(|l| l.epoch),
            loss_total: last.map(|l| l.total),
            loss_f1: last.map(|l| l.f1),
            loss_f2: last.map(|l| l.f2),
            acc: m.accuracy,
            wall_s: m.wall_s,
        }
    }

    /// One row per epoch; accuracy goes on the last one.
    pub fn per_epoch(run_id: usize, axis: &str, value: &str, m: &RunMetrics) -> Vec<Self> {
        let n = m.losses.len();
        if n == 0 {
            return vec![Self::summary(run_id, axis, value, m)];
        }
        m.losses
            .iter()
            .enumerate()
            .map(|(i, l)| Self {
                run_id,
                seed: m.seed,
                axis: axis.to_string(),
                value: value.to_string(),
                epoch: Some(l.epoch),
                loss_total: Some(l.total),
                loss_f1: Some(l.f1),
                loss_f2: Some(l.f2),
                acc: if i + 1 == n { m.accuracy } else { None },
                wall_s: m.wall_s,
            })
            .collect()
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(QseaError::Format(format!("unexpected CSV header {:?}", header.join(","))));
    }
    r.deserialize().map(|row| row.map_err(QseaError::from)).collect()
}

/// `key = value` text holding trained angles.
pub fn params_to_text(p: &EaParams) -> String {
    let theta: Vec<String> = p.theta().iter().map(|t| format!("{t:?}")).collect();
    format!("n_data = {}\nlayers = {}\ntheta = {}\n", p.n_data(), p.layers(), theta.join(","))
}

pub fn params_from_text(text: &str) -> Result<EaParams> {
    let (mut n_data, mut layers, mut theta) = (None, None, None);
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| QseaError::Format(format!("expected key = value, got {line:?}")))?;
        let bad = |what: &str| QseaError::Format(format!("bad {what} in {line:?}"));
        match k.trim() {
            "n_data" => n_data = Some(v.trim().parse::<usize>().map_err(|_| bad("n_data"))?),
            "layers" => layers = Some(v.trim().parse::<usize>().map_err(|_| bad("layers"))?),
            "theta" => {
                theta = Some(
                    v.split(',')
                        .filter(|t| !t.trim().is_empty())
                        .map(|t| t.trim().parse::<f64>().map_err(|_| bad("angle")))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            other => return Err(QseaError::Format(format!("unknown key {other:?}"))),
        }
    }
    let missing = |k: &str| QseaError::Format(format!("missing {k}"));
    EaParams::new(
        n_data.ok_or_else(|| missing("n_data"))?,
        layers.ok_or_else(|| missing("layers"))?,
        theta.ok_or_else(|| missing("theta"))?,
    )
}

/// A named series of `(x, y)` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

type Cell = (String, f64, usize);

/// Mean accuracy per `value` for each axis, in first-seen order.
pub fn accuracy_series(rows: &[CsvRow]) -> Vec<Series> {
    // axis -> (value, accuracy sum, count)
    let mut out: Vec<(String, Vec<Cell>)> = Vec::new();
    for r in rows {
        let Some(acc) = r.acc else { continue };
        let pos = match out.iter().position(|(a, _)| *a == r.axis) {
            Some(p) => p,
            None => {
                out.push((r.axis.clone(), Vec::new()));
                out.len() - 1
            }
        };
        let cells = &mut out[pos].1;
        match cells.iter_mut().find(|(v, _, _)| *v == r.value) {
            Some(c) => {
                c.1 += acc;
                c.2 += 1;
            }
            None => cells.push((r.value.clone(), acc, 1)),
        }
    }
    out.into_iter()
        .map(|(axis, cells)| Series {
            name: axis,
            points: cells
                .into_iter()
                .enumerate()
                .map(|(i, (v, sum, n))| (v.parse().unwrap_or(i as f64), sum / n as f64))
                .collect(),
        })
        .collect()
}

/// Mean total loss per epoch, one series per run.
pub fn loss_series(rows: &[CsvRow]) -> Vec<Series> {
    let mut out: Vec<(usize, Series)> = Vec::new();
    for r in rows {
        let (Some(e), Some(l)) = (r.epoch, r.loss_total) else { continue };
        match out.iter_mut().find(|(id, _)| *id == r.run_id) {
            Some((_, s)) => s.points.push((e as f64, l)),
            None => out.push((r.run_id, Series { name: format!("run {}", r.run_id), points: vec![(e as f64, l)] })),
        }
    }
    out.into_iter().map(|(_, s)| s).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Line,
    Bar,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders series onto shared axes as a standalone SVG document.
pub fn render_svg(title: &str, y_label: &str, series: &[Series], kind: ChartKind) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts.filter(|(x, y)| x.is_finite() && y.is_finite()) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if kind == ChartKind::Bar {
        y0 = y0.min(0.0);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#, W / 2.0, esc(title));
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{b}" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    for i in 0..=4 {
        let y = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end" font-size="11">{:.3}</text>"#,
            PAD - 6.0,
            sy(y) + 4.0,
            y
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle" font-size="12">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(y_label)
    );

    let n_series = series.len().max(1) as f64;
    for (k, ser) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        match kind {
            ChartKind::Line => {
                let path: Vec<String> =
                    ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, path.join(" "));
            }
            ChartKind::Bar => {
                let n_pts = ser.points.len().max(1) as f64;
                let slot = (W - 2.0 * PAD) / n_pts;
                let bw = slot * 0.8 / n_series;
                for (i, &(x, y)) in ser.points.iter().enumerate() {
                    let left = PAD + slot * i as f64 + slot * 0.1 + bw * k as f64;
                    let top = sy(y.max(y0));
                    let _ = writeln!(
                        s,
                        r#"<rect x="{left:.2}" y="{top:.2}" width="{bw:.2}" height="{:.2}" fill="{color}"/>"#,
                        sy(y0) - top
                    );
                    let _ = writeln!(
                        s,
                        r#"<text x="{:.2}" y="{}" text-anchor="middle" font-size="11">{x}</text>"#,
                        left + bw / 2.0,
                        H - PAD + 16.0
                    );
                }
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
            W - PAD - 120.0,
            PAD + 16.0 * k as f64,
            esc(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::EpochLosses;

    fn metrics() -> RunMetrics {
        RunMetrics {
            seed: 3,
            losses: vec![
                EpochLosses { epoch: 0, total: -1.5, f1: 3.0, f2: 0.1 },
                EpochLosses { epoch: 1, total: -2.25, f1: 4.5, f2: 0.0 },
            ],
            accuracy: Some(0.9),
            wall_s: 0.125,
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut rows = CsvRow::per_epoch(0, "none", "", &metrics());
        rows.push(CsvRow::summary(1, "classes", "4", &RunMetrics { accuracy: None, ..metrics() }));
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
        assert_eq!(rows[0].acc, None);
        assert_eq!(rows[1].acc, Some(0.9));
    }

    #[test]
    fn params_round_trip() {
        let p = EaParams::new(1, 1, vec![0.1, 0.2, 0.3, 0.4, 1.0 / 3.0]).unwrap();
        assert_eq!(params_from_text(&params_to_text(&p)).unwrap(), p);
        assert!(params_from_text("n_data = 1\nlayers = 1\ntheta = 0.1").is_err());
        assert!(matches!(params_from_text("layers = 1"), Err(QseaError::Format(_))));
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(matches!(read_csv("a,b\n1,2\n".as_bytes()), Err(QseaError::Format(_))));
    }

    #[test]
    fn series_and_svg() {
        let rows = vec![
            CsvRow::summary(0, "samples", "10", &metrics()),
            CsvRow::summary(1, "samples", "10", &RunMetrics { accuracy: Some(0.7), ..metrics() }),
            CsvRow::summary(2, "samples", "30", &metrics()),
        ];
        let s = accuracy_series(&rows);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].points.len(), 2);
        assert!((s[0].points[0].1 - 0.8).abs() < 1e-12);
        for kind in [ChartKind::Line, ChartKind::Bar] {
            let svg = render_svg("t<1>", "acc", &s, kind);
            assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
            assert!(svg.contains("t&lt;1&gt;"));
        }
        assert_eq!(loss_series(&CsvRow::per_epoch(0, "none", "", &metrics()))[0].points.len(), 2);
    }
}
