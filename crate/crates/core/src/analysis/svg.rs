//! Static SVG plots. Output depends only on the input, so identical data
//! gives identical bytes.

use std::fmt::Write as _;

use super::{ExpressiveRangeTable, SummaryRow};
use crate::objective::ObjectiveKind;

const FONT: &str = "font-family=\"sans-serif\" font-size=\"11\"";

fn open(out: &mut String, width: u32, height: u32) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>"
    );
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, s: &str) {
    let _ = writeln!(
        out,
        "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" {FONT}>{}</text>",
        escape(s)
    );
}

fn line(out: &mut String, x1: f64, y1: f64, x2: f64, y2: f64) {
    let _ = writeln!(
        out,
        "<line x1=\"{x1:.1}\" y1=\"{y1:.1}\" x2=\"{x2:.1}\" y2=\"{y2:.1}\" stroke=\"black\"/>"
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Heatmap shade for a cell: `ln(1 + count) / ln(1 + max)`, in `[0, 1]`.
pub fn cell_intensity(count: u64, max: u64) -> f64 {
    if max == 0 {
        return 0.0;
    }
    (count as f64).ln_1p() / (max as f64).ln_1p()
}

/// Bar chart of solution percentage, one panel per objective.
pub fn render_summary_svg(rows: &[SummaryRow]) -> String {
    let panels: Vec<(ObjectiveKind, Vec<&SummaryRow>)> = ObjectiveKind::ALL
        .iter()
        .map(|&k| (k, rows.iter().filter(|r| r.key.objective == k).collect()))
        .filter(|(_, rs): &(_, Vec<_>)| !rs.is_empty())
        .collect();
    let bar = 18.0;
    let panel_h = 240.0;
    let left = 50.0;
    let widest = panels.iter().map(|(_, rs)| rs.len()).max().unwrap_or(0);
    let width = (left + 20.0 + bar * 1.5 * widest.max(8) as f64).ceil() as u32;
    let height = (panel_h * panels.len().max(1) as f64 + 20.0) as u32;
    let mut out = String::new();
    open(&mut out, width, height);
    if panels.is_empty() {
        draw_axes(
            &mut out,
            left,
            20.0,
            width as f64 - left - 20.0,
            panel_h - 100.0,
        );
        text(
            &mut out,
            width as f64 / 2.0,
            panel_h / 2.0,
            "middle",
            "no data",
        );
        out.push_str("</svg>\n");
        return out;
    }
    for (p, (kind, rs)) in panels.iter().enumerate() {
        let top = 30.0 + panel_h * p as f64;
        let plot_h = panel_h - 110.0;
        let plot_w = bar * 1.5 * rs.len() as f64;
        text(
            &mut out,
            left,
            top - 10.0,
            "start",
            &format!("solution % ({})", kind.as_str()),
        );
        draw_axes(&mut out, left, top, plot_w, plot_h);
        for tick in [0, 50, 100] {
            let y = top + plot_h * (1.0 - tick as f64 / 100.0);
            text(&mut out, left - 4.0, y + 4.0, "end", &tick.to_string());
        }
        for (i, r) in rs.iter().enumerate() {
            let x = left + bar * 0.25 + bar * 1.5 * i as f64;
            let h = plot_h * r.solution_pct / 100.0;
            let _ = writeln!(
                out,
                "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"{bar:.1}\" height=\"{h:.1}\" fill=\"steelblue\"/>",
                top + plot_h - h
            );
            let lx = x + bar / 2.0;
            let ly = top + plot_h + 8.0;
            let _ = writeln!(
                out,
                "<text x=\"{lx:.1}\" y=\"{ly:.1}\" transform=\"rotate(60 {lx:.1} {ly:.1})\" {FONT}>{}</text>",
                escape(&r.key.label())
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn draw_axes(out: &mut String, left: f64, top: f64, w: f64, h: f64) {
    line(out, left, top, left, top + h);
    line(out, left, top + h, left + w, top + h);
}

/// Small-multiple heatmaps, one per configuration, shaded by
/// [`cell_intensity`] against the largest cell in the table.
pub fn render_expressive_svg(table: &ExpressiveRangeTable) -> String {
    let cell = 8.0;
    let per_row = 4usize;
    let pw = cell * table.x.bins as f64;
    let ph = cell * table.y.bins as f64;
    let (gap_x, gap_y) = (60.0, 60.0);
    let n = table.histograms.len();
    let rows = n.div_ceil(per_row).max(1);
    let cols = n.clamp(1, per_row);
    let width = (gap_x + cols as f64 * (pw + gap_x)).ceil() as u32;
    let height = (40.0 + rows as f64 * (ph + gap_y)).ceil() as u32;
    let mut out = String::new();
    open(&mut out, width, height);
    text(
        &mut out,
        gap_x,
        16.0,
        "start",
        &format!(
            "{} driven: x = {}, y = {}{}",
            table.driving.as_str(),
            table.x.metric.as_str(),
            table.y.metric.as_str(),
            if table.solved_only {
                " (solved maps)"
            } else {
                " (all maps)"
            }
        ),
    );
    if n == 0 {
        draw_axes(&mut out, gap_x, 40.0, pw, ph);
        text(
            &mut out,
            gap_x + pw / 2.0,
            40.0 + ph / 2.0,
            "middle",
            "no data",
        );
        out.push_str("</svg>\n");
        return out;
    }
    let max = table
        .histograms
        .values()
        .map(|h| h.max())
        .max()
        .unwrap_or(0);
    for (i, (key, h)) in table.histograms.iter().enumerate() {
        let left = gap_x + (i % per_row) as f64 * (pw + gap_x);
        let top = 40.0 + (i / per_row) as f64 * (ph + gap_y);
        for x in 0..h.x_bins {
            for y in 0..h.y_bins {
                let c = h.get(x, y);
                if c == 0 {
                    continue;
                }
                let shade = (255.0 * (1.0 - cell_intensity(c, max))).round() as u8;
                let _ = writeln!(
                    out,
                    "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{cell:.1}\" height=\"{cell:.1}\" fill=\"rgb({shade},{shade},255)\"/>",
                    left + x as f64 * cell,
                    top + ph - (y + 1) as f64 * cell
                );
            }
        }
        draw_axes(&mut out, left, top, pw, ph);
        text(
            &mut out,
            left + pw / 2.0,
            top + ph + 14.0,
            "middle",
            &format!("{} (n={})", key.label(), h.samples),
        );
    }
    out.push_str("</svg>\n");
    out
}
