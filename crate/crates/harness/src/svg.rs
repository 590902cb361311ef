//! Grouped bar charts as standalone SVG.

use std::fmt::Write;

pub const MAX_GROUPS: usize = 4;
pub const MAX_BARS: usize = 6;

const PLOT_HEIGHT: f64 = 240.0;
const BAR_WIDTH: f64 = 28.0;
const GROUP_GAP: f64 = 36.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 50.0;
const PALETTE: [&str; MAX_BARS] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2"];

#[derive(Debug, Clone, PartialEq)]
pub struct BarGroup {
    pub label: String,
    /// (series label, value); series are matched across groups by label.
    pub bars: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChartError {
    #[error("chart has {0} groups; at most {MAX_GROUPS} are legible")]
    TooManyGroups(usize),
    #[error("group `{0}` has {1} bars; at most {MAX_BARS} are legible")]
    TooManyBars(String, usize),
    #[error("value {value} for `{group}`/`{bar}` is negative or not finite")]
    BadValue { group: String, bar: String, value: f64 },
    #[error("chart has no bars")]
    Empty,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders groups of bars. Bar heights are `value * scale` with one scale
/// for the whole chart, so heights are proportional to values.
pub fn bar_chart(title: &str, metric: &str, groups: &[BarGroup]) -> Result<String, ChartError> {
    if groups.len() > MAX_GROUPS {
        return Err(ChartError::TooManyGroups(groups.len()));
    }
    let mut series: Vec<&str> = Vec::new();
    for g in groups {
        if g.bars.len() > MAX_BARS {
            return Err(ChartError::TooManyBars(g.label.clone(), g.bars.len()));
        }
        for (label, value) in &g.bars {
            if !value.is_finite() || *value < 0.0 {
                return Err(ChartError::BadValue {
                    group: g.label.clone(),
                    bar: label.clone(),
                    value: *value,
                });
            }
            if !series.contains(&label.as_str()) {
                series.push(label);
            }
        }
    }
    if series.is_empty() {
        return Err(ChartError::Empty);
    }
    if series.len() > MAX_BARS {
        return Err(ChartError::TooManyBars("legend".into(), series.len()));
    }
    let max = groups
        .iter()
        .flat_map(|g| g.bars.iter().map(|b| b.1))
        .fold(0.0f64, f64::max);
    // Unit-interval metrics keep a full-height axis of 1.
    let axis_max = if max <= 1.0 { 1.0 } else { max };
    let scale = PLOT_HEIGHT / axis_max;
    let group_width = series.len() as f64 * BAR_WIDTH;
    let width = LEFT + groups.len() as f64 * (group_width + GROUP_GAP) + 20.0 + 120.0;
    let height = TOP + PLOT_HEIGHT + 60.0;
    let base = TOP + PLOT_HEIGHT;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, esc(title));
    let _ = writeln!(s, r#"<text x="{LEFT}" y="24" font-size="14">{}</text>"#, esc(title));
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{base}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{LEFT}" y1="{base}" x2="{:.1}" y2="{base}" stroke="black"/>"#,
        width - 130.0
    );
    for tick in 0..=4 {
        let v = axis_max * f64::from(tick) / 4.0;
        let y = base - v * scale;
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text class="axis-label" x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">{}</text>"#,
        TOP + PLOT_HEIGHT / 2.0,
        TOP + PLOT_HEIGHT / 2.0,
        esc(metric)
    );
    for (gi, g) in groups.iter().enumerate() {
        let gx = LEFT + GROUP_GAP / 2.0 + gi as f64 * (group_width + GROUP_GAP);
        for (label, value) in &g.bars {
            let si = series.iter().position(|x| x == label).expect("series registered");
            let x = gx + si as f64 * BAR_WIDTH;
            let h = value * scale;
            let _ = writeln!(
                s,
                r#"<rect class="bar" data-group="{}" data-series="{}" data-value="{value}" x="{x:.4}" y="{:.4}" width="{:.4}" height="{h:.4}" fill="{}"/>"#,
                esc(&g.label),
                esc(label),
                base - h,
                BAR_WIDTH - 4.0,
                PALETTE[si]
            );
            let _ = writeln!(
                s,
                r#"<text class="value" x="{:.4}" y="{:.4}" text-anchor="middle">{value:.2}</text>"#,
                x + (BAR_WIDTH - 4.0) / 2.0,
                base - h - 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text class="group" x="{:.4}" y="{:.1}" text-anchor="middle">{}</text>"#,
            gx + group_width / 2.0,
            base + 18.0,
            esc(&g.label)
        );
    }
    let lx = width - 120.0;
    for (si, label) in series.iter().enumerate() {
        let y = TOP + 16.0 * si as f64;
        let _ = writeln!(
            s,
            r#"<circle class="legend" cx="{:.1}" cy="{y:.1}" r="5" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx,
            PALETTE[si],
            lx + 10.0,
            y + 4.0,
            esc(label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(values: &[f64]) -> Vec<BarGroup> {
        vec![BarGroup {
            label: "m".into(),
            bars: values.iter().enumerate().map(|(i, v)| (format!("s{i}"), *v)).collect(),
        }]
    }

    #[test]
    fn rejects_out_of_bounds_input() {
        assert!(matches!(bar_chart("t", "m", &one(&[-0.1])), Err(ChartError::BadValue { .. })));
        assert!(matches!(bar_chart("t", "m", &one(&[f64::NAN])), Err(ChartError::BadValue { .. })));
        assert!(matches!(bar_chart("t", "m", &one(&[0.1; 7])), Err(ChartError::TooManyBars(..))));
        let five: Vec<BarGroup> = (0..5).map(|i| BarGroup { label: i.to_string(), bars: vec![("a".into(), 0.5)] }).collect();
        assert!(matches!(bar_chart("t", "m", &five), Err(ChartError::TooManyGroups(5))));
        assert!(matches!(bar_chart("t", "m", &[]), Err(ChartError::Empty)));
    }

    #[test]
    fn escapes_labels() {
        let svg = bar_chart("a<b", "x&y", &one(&[0.5])).unwrap();
        assert!(svg.contains("a&lt;b") && svg.contains("x&amp;y"));
    }
}
