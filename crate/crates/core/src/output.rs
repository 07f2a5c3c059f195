//! CSV and SVG writers for sampled functions.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::partition::Ambient;
use crate::point::ExtendedPoint;

/// `%.12g`-style formatting: 12 significant digits, trailing zeros removed,
/// `inf`/`-inf` for the end markers.
pub fn format_g(v: f64) -> String {
    format_sig(v, 12)
}

fn format_sig(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn format_point(x: ExtendedPoint) -> String {
    format_g(x.to_f64())
}

/// Writes `header` and one row per sample: the point, then the values.
pub fn write_csv<W: Write>(mut w: W, header: &[&str], rows: &[(ExtendedPoint, Vec<f64>)]) -> io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for (x, vals) in rows {
        let mut line = format_point(*x);
        for v in vals {
            line.push(',');
            line.push_str(&format_g(*v));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// `x,f` samples.
pub fn write_samples<W: Write>(w: W, samples: &[(ExtendedPoint, f64)]) -> io::Result<()> {
    let rows: Vec<_> = samples.iter().map(|&(x, v)| (x, vec![v])).collect();
    write_csv(w, &["x", "f"], &rows)
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

/// A single polyline of `samples` in an 800×480 viewbox. Unbounded domains
/// are drawn against the compactified coordinate `x/(1+|x|)`.
pub fn svg_plot(samples: &[(ExtendedPoint, f64)], ambient: Ambient, title: &str) -> String {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(x, v)| (ambient.compactify(x), v))
        .filter(|(c, v)| c.is_finite() && v.is_finite())
        .collect();
    let (x0, x1) = ambient.chart_range();
    let (mut y0, mut y1) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if !(y0 < y1) {
        y0 = y0.min(0.0) - 1.0;
        y1 = y1.max(0.0) + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |c: f64| MARGIN + (c - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    let axis_y = sy(0.0f64.clamp(y0, y1));
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{axis_y:.2}" x2="{}" y2="{axis_y:.2}" stroke="black"/>"#,
        WIDTH - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{}" stroke="black"/>"#,
        HEIGHT - MARGIN
    );
    let xlabel = match ambient {
        Ambient::Compact { .. } => "x",
        _ => "x/(1+|x|)",
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{xlabel}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    for (c, label) in [(x0, format_g(x0)), (x1, format_g(x1))] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" font-size="12" text-anchor="middle">{label}</text>"#,
            sx(c),
            HEIGHT - MARGIN + 16.0
        );
    }
    for v in [y0 + pad, y1 - pad] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            sy(v) + 4.0,
            format_sig(v, 4)
        );
    }
    let poly: Vec<String> = pts.iter().map(|&(c, v)| format!("{:.2},{:.2}", sx(c), sy(v))).collect();
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1" points="{}"/>"#,
        poly.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_g(0.65), "0.65");
        assert_eq!(format_g(-0.05), "-0.05");
        assert_eq!(format_g(41.0 / 30.0), "1.36666666667");
        assert_eq!(format_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_g(1e-7), "1e-07");
        assert_eq!(format_g(1234567890123.0), "1.23456789012e+12");
        assert_eq!(format_g(100.0), "100");
        assert_eq!(format_g(0.0), "0");
        assert_eq!(format_g(f64::INFINITY), "inf");
        assert_eq!(format_g(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_samples(&mut buf, &[(ExtendedPoint::Finite(0.25), 0.65), (ExtendedPoint::PosInf, 0.0)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,f\n0.25,0.65\ninf,0\n");
    }

    #[test]
    fn svg_has_one_polyline() {
        let s = svg_plot(
            &[(ExtendedPoint::Finite(0.0), 0.0), (ExtendedPoint::Finite(1.0), 1.0)],
            Ambient::HalfLine,
            "t",
        );
        assert_eq!(s.matches("<polyline").count(), 1);
        assert!(s.contains(r#"viewBox="0 0 800 480""#));
    }
}
