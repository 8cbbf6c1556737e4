//! Minimal SVG charts for reports.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 320.0;
const PAD: f64 = 40.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn header(title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#,
        W / 2.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD / 2.0
    )
    .unwrap();
    s
}

/// Bars for per-component shares plus a cumulative line.
pub fn decay(shares: &[f64], cumulative: &[f64]) -> String {
    let mut s = header("Explained variance");
    let n = shares.len().max(1) as f64;
    let pw = W - 1.5 * PAD;
    let ph = H - 2.0 * PAD;
    let bw = pw / n;
    let mut line = String::new();
    for (i, (sh, cu)) in shares.iter().zip(cumulative).enumerate() {
        let x = PAD + i as f64 * bw;
        let h = sh * ph;
        writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            x + 0.1 * bw,
            H - PAD - h,
            0.8 * bw,
            h,
            COLORS[0]
        )
        .unwrap();
        let cmd = if i == 0 { 'M' } else { 'L' };
        write!(line, "{cmd}{:.2} {:.2} ", x + 0.5 * bw, H - PAD - cu * ph).unwrap();
    }
    writeln!(
        s,
        r#"<path d="{}" fill="none" stroke="{}"/>"#,
        line.trim_end(),
        COLORS[1]
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}

/// Scatter of two latent coordinates colored by group.
pub fn scatter(x: &[f64], y: &[f64], groups: &[usize]) -> String {
    let mut s = header("Latent variables");
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, lo + 1.0)
        }
    };
    let (x0, x1) = range(x);
    let (y0, y1) = range(y);
    let pw = W - 1.5 * PAD;
    let ph = H - 2.0 * PAD;
    for ((a, b), g) in x.iter().zip(y).zip(groups) {
        writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{}" fill-opacity="0.7"/>"#,
            PAD + (a - x0) / (x1 - x0) * pw,
            H - PAD - (b - y0) / (y1 - y0) * ph,
            COLORS[g % COLORS.len()]
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed() {
        let d = decay(&[0.6, 0.3, 0.1], &[0.6, 0.9, 1.0]);
        assert!(d.starts_with("<svg") && d.trim_end().ends_with("</svg>"));
        assert_eq!(d.matches("<rect").count(), 4);
        let s = scatter(&[0.0, 1.0, 1.0], &[2.0, 2.0, 2.0], &[0, 1, 9]);
        assert_eq!(s.matches("<circle").count(), 3);
        assert!(!s.contains("NaN"));
    }
}
