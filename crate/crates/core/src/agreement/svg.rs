use std::fmt::Write as _;

const SIZE: f64 = 360.0;
const MARGIN: f64 = 40.0;

/// Minimal static scatter plot of (reference, candidate) points with a dotted red `y = x` line.
pub fn render_scatter_svg(points: &[(f64, f64)], title: &str) -> String {
    let (mut lo, mut hi) = points
        .iter()
        .flat_map(|&(x, y)| [x, y])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let w = SIZE + 2.0 * MARGIN;
    let px = |v: f64| MARGIN + (v - lo) / (hi - lo) * SIZE;
    let py = |v: f64| MARGIN + SIZE - (v - lo) / (hi - lo) * SIZE;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{w}" viewBox="0 0 {w} {w}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="red" stroke-dasharray="2,4"/>"#,
        px(lo),
        py(lo),
        px(hi),
        py(hi)
    );
    for &(x, y) in points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
            px(x),
            py(y)
        );
    }
    let esc = title.replace('&', "&amp;").replace('<', "&lt;");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{esc}</text>"#,
        w / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="11">reference ({lo:.2} .. {hi:.2})</text>"#,
        w / 2.0,
        w - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="12" y="{}" font-size="11" transform="rotate(-90 12 {})" text-anchor="middle">candidate</text>"#,
        w / 2.0,
        w / 2.0
    );
    s.push_str("</svg>\n");
    s
}
