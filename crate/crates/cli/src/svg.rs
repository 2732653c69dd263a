//! FDP boxplots: one panel per setting, one box per procedure, a cross at the
//! empirical FDR and a dashed line at the nominal level.

use std::collections::BTreeMap;
use std::fmt::Write;

use fahs::sim::{AggregateSummary, CellSummary};

const PANEL_H: f64 = 240.0;
const BOX_W: f64 = 56.0;
const MARGIN_L: f64 = 48.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_B: f64 = 40.0;
const PER_ROW: usize = 3;

fn y_max(cells: &[&CellSummary<f64>]) -> f64 {
    let top = cells
        .iter()
        .flat_map(|c| [c.boxplot.max, c.fdr, c.gamma])
        .fold(0.0f64, f64::max);
    ((top * 1.1 * 10.0).ceil() / 10.0).clamp(0.1, 1.0)
}

pub fn boxplots(summary: &AggregateSummary<f64>) -> String {
    let mut panels: BTreeMap<usize, Vec<&CellSummary<f64>>> = BTreeMap::new();
    for c in &summary.cells {
        panels.entry(c.setting_id).or_default().push(c);
    }
    let widest = panels.values().map(Vec::len).max().unwrap_or(1);
    let panel_w = MARGIN_L + BOX_W * widest as f64 + 16.0;
    let rows = panels.len().div_ceil(PER_ROW).max(1);
    let cols = panels.len().clamp(1, PER_ROW);
    let total_h = PANEL_H + MARGIN_T + MARGIN_B;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" font-family="sans-serif" font-size="11">"#,
        panel_w * cols as f64,
        total_h * rows as f64
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, cells) in panels.values().enumerate() {
        let ox = panel_w * (k % PER_ROW) as f64;
        let oy = total_h * (k / PER_ROW) as f64;
        panel(&mut s, cells, ox, oy);
    }
    s.push_str("</svg>\n");
    s
}

fn panel(s: &mut String, cells: &[&CellSummary<f64>], ox: f64, oy: f64) {
    let top = y_max(cells);
    let y0 = oy + MARGIN_T;
    let py = |v: f64| y0 + PANEL_H * (1.0 - v.clamp(0.0, top) / top);
    let x0 = ox + MARGIN_L;
    let width = BOX_W * cells.len() as f64;
    let first = cells[0];
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">s={} γ={} ρ={} m={}</text>"#,
        x0 + width / 2.0,
        oy + 16.0,
        first.s,
        first.gamma,
        first.rho,
        first.m
    );
    let _ = writeln!(
        s,
        r#"<rect x="{x0:.1}" y="{y0:.1}" width="{width:.1}" height="{PANEL_H:.1}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let v = top * i as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
            x0 - 4.0,
            x0 - 6.0,
            y + 4.0
        );
    }
    let gy = py(first.gamma);
    let _ = writeln!(
        s,
        r#"<line x1="{x0:.1}" y1="{gy:.1}" x2="{:.1}" y2="{gy:.1}" stroke="red" stroke-dasharray="5,4"/>"#,
        x0 + width
    );
    for (i, c) in cells.iter().enumerate() {
        let cx = x0 + BOX_W * (i as f64 + 0.5);
        let half = BOX_W * 0.3;
        let b = &c.boxplot;
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#,
            py(b.lower_whisker),
            py(b.upper_whisker)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="lightsteelblue" stroke="black"/>"#,
            cx - half,
            py(b.q3),
            2.0 * half,
            (py(b.q1) - py(b.q3)).max(0.5)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            py(b.median),
            cx + half,
            py(b.median)
        );
        for &o in &b.outliers {
            let _ = writeln!(s, r#"<circle cx="{cx:.1}" cy="{:.1}" r="2" fill="none" stroke="black"/>"#, py(o));
        }
        let (fx, fy, d) = (cx, py(c.fdr), 4.0);
        let _ = writeln!(
            s,
            r#"<path d="M{:.1},{:.1}L{:.1},{:.1}M{:.1},{:.1}L{:.1},{:.1}" stroke="darkred" stroke-width="2"/>"#,
            fx - d,
            fy - d,
            fx + d,
            fy + d,
            fx - d,
            fy + d,
            fx + d,
            fy - d
        );
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            y0 + PANEL_H + 16.0,
            c.procedure.name()
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fahs::sim::BoxplotStats;
    use fahs::Procedure;

    fn cell(setting_id: usize, procedure: Procedure, fdr: f64) -> CellSummary<f64> {
        CellSummary {
            setting_id,
            procedure,
            s: 0.1,
            gamma: 0.1,
            rho: 0.0,
            m: 200,
            replications: 10,
            errors: 0,
            fdr,
            fdp_se: 0.01,
            boxplot: BoxplotStats {
                min: 0.0,
                q1: 0.05,
                median: 0.08,
                q3: 0.12,
                max: 0.4,
                lower_whisker: 0.0,
                upper_whisker: 0.2,
                outliers: vec![0.4],
            },
            mean_power: 0.5,
            mean_xi: None,
        }
    }

    #[test]
    fn draws_every_cell_and_reference_line() {
        let summary = AggregateSummary {
            cells: vec![cell(0, Procedure::Bh, 0.09), cell(0, Procedure::Mfahs, 0.05), cell(1, Procedure::Bh, 0.1)],
        };
        let svg = boxplots(&summary);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
        assert_eq!(svg.matches("fill=\"lightsteelblue\"").count(), 3);
        assert_eq!(svg.matches("<circle").count(), 3);
    }

    #[test]
    fn empty_summary_is_valid_svg() {
        let svg = boxplots(&AggregateSummary::default());
        assert!(svg.contains("</svg>"));
    }
}
