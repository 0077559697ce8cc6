//! Minimal SVG line chart of log log E_t against log λ.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;

/// `points` are (ln λ, ln log E); the second series is the line of slope `theory` through the
/// fitted value at the top of the grid.
pub fn excitation_chart(points: &[(f64, f64)], slope: f64, intercept: f64, theory: f64) -> String {
    let finite: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
    let x_last = finite.last().map_or(1.0, |p| p.0);
    let anchor = intercept + slope * x_last;
    let theory_line: Vec<(f64, f64)> = finite.iter().map(|p| (p.0, anchor + theory * (p.0 - x_last))).collect();
    let all = finite.iter().chain(&theory_line);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p.0);
        x1 = x1.max(p.0);
        y0 = y0.min(p.1);
        y1 = y1.max(p.1);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let path = |pts: &[(f64, f64)]| pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect::<Vec<_>>().join(" ");
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{PAD},{PAD} L{PAD},{b} L{r},{b}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">ln λ  [{x0:.2}, {x1:.2}]</text>"#, W / 2.0, H - 16.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-size="13" transform="rotate(-90 16 {})" text-anchor="middle">ln log E  [{y0:.2}, {y1:.2}]</text>"#,
        H / 2.0,
        H / 2.0
    );
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, path(&finite));
    for p in &finite {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(p.0), sy(p.1));
    }
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="firebrick" stroke-dasharray="6 4"/>"#, path(&theory_line));
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="13">fitted slope {slope:.4}   theory {theory:.4} (dashed)</text>"#,
        PAD + 8.0,
        PAD - 12.0
    );
    s.push_str("</svg>\n");
    s
}
