//! Minimal self-contained SVG charts.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 140.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 72.0;
const PALETTE: [&str; 6] = ["#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"];

pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
    pub dashed: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn y_axis(out: &mut String, y_max: f64, ticks: usize, label: &str) {
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    for i in 0..=ticks {
        let v = y_max * i as f64 / ticks as f64;
        let y = HEIGHT - MARGIN_BOTTOM - plot_h * i as f64 / ticks as f64;
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN_LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#e0e0e0"/>"##,
            WIDTH - MARGIN_RIGHT
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            y + 4.0,
            trim(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(label)
    );
}

fn legend(out: &mut String, series: &[Series]) {
    for (i, s) in series.iter().enumerate() {
        let x = WIDTH - MARGIN_RIGHT + 12.0;
        let y = MARGIN_TOP + 16.0 * i as f64;
        let dash = if s.dashed { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="3"{dash}/>"#,
            x + 18.0,
            PALETTE[i % PALETTE.len()]
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            x + 24.0,
            y + 4.0,
            escape(&s.name)
        );
    }
}

fn trim(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn nice_max(values: impl Iterator<Item = f64>) -> f64 {
    let m = values.filter(|v| v.is_finite()).fold(0.0, f64::max);
    if m <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(m.log10().floor());
    for f in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if f * mag >= m {
            return f * mag;
        }
    }
    10.0 * mag
}

/// Grouped bar chart: one group per category, one bar per series.
pub fn bar_chart(title: &str, y_label: &str, categories: &[String], series: &[Series]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let y_max = nice_max(series.iter().flat_map(|s| s.values.iter().copied()));
    y_axis(&mut out, y_max, 5, y_label);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let group_w = plot_w / categories.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    for (ci, cat) in categories.iter().enumerate() {
        let gx = MARGIN_LEFT + group_w * ci as f64 + group_w * 0.1;
        for (si, s) in series.iter().enumerate() {
            let Some(&v) = s.values.get(ci) else { continue };
            if !v.is_finite() {
                continue;
            }
            let h = plot_h * v.max(0.0) / y_max;
            let _ = writeln!(
                out,
                r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
                gx + bar_w * si as f64,
                HEIGHT - MARGIN_BOTTOM - h,
                bar_w,
                h,
                PALETTE[si % PALETTE.len()]
            );
        }
        // One line per space-separated word, centered under the group.
        let cx = gx + group_w * 0.4;
        for (li, word) in cat.split(' ').enumerate() {
            let _ = writeln!(
                out,
                r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                HEIGHT - MARGIN_BOTTOM + 14.0 + 13.0 * li as f64,
                escape(word)
            );
        }
    }
    legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}

/// Line chart over x = 1..=n.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, y_max: f64, series: &[Series]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    y_axis(&mut out, y_max, 5, y_label);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let n = series.iter().map(|s| s.values.len()).max().unwrap_or(1).max(2);
    let x_at = |i: usize| MARGIN_LEFT + plot_w * i as f64 / (n - 1) as f64;
    let y_at = |v: f64| HEIGHT - MARGIN_BOTTOM - plot_h * v.clamp(0.0, y_max) / y_max;
    for i in 0..n {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x_at(i),
            HEIGHT - MARGIN_BOTTOM + 14.0,
            i + 1
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - MARGIN_BOTTOM + 36.0,
        escape(x_label)
    );
    for (si, s) in series.iter().enumerate() {
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.1},{:.1}", x_at(i), y_at(v)))
            .collect();
        let dash = if s.dashed { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"{dash}/>"#,
            points.join(" "),
            PALETTE[si % PALETTE.len()]
        );
    }
    legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(name: &str, values: Vec<f64>) -> Series {
        Series {
            name: name.into(),
            values,
            dashed: false,
        }
    }

    #[test]
    fn bar_chart_has_one_rect_per_value() {
        let svg = bar_chart(
            "t",
            "y",
            &["a".into(), "b<c".into()],
            &[series("obs", vec![1.0, 2.0]), series("sim", vec![1.5, f64::NAN])],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        // Background plus three finite bars.
        assert_eq!(svg.matches("<rect").count(), 4);
        assert!(svg.contains("b&lt;c"));
    }

    #[test]
    fn line_chart_draws_each_series() {
        let svg = line_chart("t", "x", "y", 100.0, &[series("a", vec![80.0; 18]), series("b", vec![40.0; 18])]);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn nice_max_rounds_up() {
        assert_eq!(nice_max([1.9, 0.5].into_iter()), 2.0);
        assert_eq!(nice_max([0.0].into_iter()), 1.0);
        assert_eq!(nice_max([83.0].into_iter()), 100.0);
    }
}
