//! Hand-rolled SVG horizontal bar chart for correlation reports.
//! SVG keeps chart goldens text-diffable.

use politelex::stats::CorrelationReport;

const BAR_HEIGHT: f64 = 18.0;
const BAR_GAP: f64 = 6.0;
const LABEL_WIDTH: f64 = 170.0;
const HALF_SPAN: f64 = 260.0;
const MARGIN: f64 = 20.0;

/// Renders only the significant categories, sorted by r descending.
/// Positive bars extend right of the axis, negative bars left.
pub fn correlation_bar_chart(report: &CorrelationReport) -> String {
    let mut bars: Vec<(&str, f64)> = report
        .entries
        .iter()
        .filter(|e| e.significant)
        .map(|e| (e.category.as_str(), e.r))
        .collect();
    bars.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());

    let max_abs = bars
        .iter()
        .map(|(_, r)| r.abs())
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let width = LABEL_WIDTH + 2.0 * HALF_SPAN + 2.0 * MARGIN;
    let height = MARGIN * 2.0 + bars.len() as f64 * (BAR_HEIGHT + BAR_GAP);
    let axis_x = LABEL_WIDTH + HALF_SPAN + MARGIN;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    svg.push_str(&format!(
        "  <title>Significant Pearson correlations (alpha={}, m={})</title>\n",
        report.alpha, report.m
    ));
    svg.push_str(&format!(
        "  <line x1=\"{axis_x:.1}\" y1=\"{MARGIN:.1}\" x2=\"{axis_x:.1}\" \
         y2=\"{:.1}\" stroke=\"#333\" stroke-width=\"1\"/>\n",
        height - MARGIN
    ));
    for (i, (name, r)) in bars.iter().enumerate() {
        let y = MARGIN + i as f64 * (BAR_HEIGHT + BAR_GAP);
        let len = r.abs() / max_abs * HALF_SPAN;
        let (x, fill) = if *r >= 0.0 {
            (axis_x, "#2b7a3f")
        } else {
            (axis_x - len, "#a23b3b")
        };
        svg.push_str(&format!(
            "  <rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{len:.1}\" height=\"{BAR_HEIGHT:.1}\" \
             fill=\"{fill}\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" font-family=\"sans-serif\" \
             text-anchor=\"end\">{name}</text>\n",
            LABEL_WIDTH + MARGIN - 6.0,
            y + BAR_HEIGHT - 5.0
        ));
        let value_x = if *r >= 0.0 {
            axis_x + len + 4.0
        } else {
            axis_x - len - 40.0
        };
        svg.push_str(&format!(
            "  <text x=\"{value_x:.1}\" y=\"{:.1}\" font-size=\"11\" \
             font-family=\"sans-serif\">{r:.3}</text>\n",
            y + BAR_HEIGHT - 5.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
