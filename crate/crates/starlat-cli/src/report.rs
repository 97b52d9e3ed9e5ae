//! Artifact serialization: the envelope CSV/JSON dataset, the envelope
//! SVG figure, and shared numeric formatting. Everything here is
//! deterministic so repeated runs with the same seed produce
//! byte-identical files.

use anyhow::{bail, Context, Result};
use starlat_core::envelope::EnvelopePoint;

/// Full-precision float formatting (17 significant digits): enough for
/// an exact text round trip of any f64.
pub fn sig(v: f64) -> String {
    format!("{v:.16e}")
}

pub const ENVELOPE_CSV_HEADER: &str = "label,h1,h2,theta_deg,t,nu,ncte,evaluations,feasible,seed";

pub fn envelope_csv(points: &[EnvelopePoint]) -> String {
    let mut out = String::from(ENVELOPE_CSV_HEADER);
    out.push('\n');
    for p in points {
        debug_assert!(!p.label.contains(','), "labels are comma-free");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            p.label,
            sig(p.h1),
            sig(p.h2),
            sig(p.theta_deg),
            sig(p.t),
            sig(p.nu),
            sig(p.ncte),
            p.evaluations,
            p.feasible,
            p.seed,
        ));
    }
    out
}

pub fn parse_envelope_csv(text: &str) -> Result<Vec<EnvelopePoint>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == ENVELOPE_CSV_HEADER => {}
        other => bail!("bad envelope CSV header: {other:?}"),
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            bail!("envelope CSV row {}: expected 10 fields, got {}", i + 2, fields.len());
        }
        let num = |j: usize| -> Result<f64> {
            fields[j]
                .parse()
                .with_context(|| format!("row {}, field {}", i + 2, j + 1))
        };
        points.push(EnvelopePoint {
            label: fields[0].to_string(),
            h1: num(1)?,
            h2: num(2)?,
            theta_deg: num(3)?,
            t: num(4)?,
            nu: num(5)?,
            ncte: num(6)?,
            evaluations: fields[7].parse().context("evaluations")?,
            feasible: fields[8].parse().context("feasible")?,
            seed: fields[9].parse().context("seed")?,
        });
    }
    Ok(points)
}

pub fn envelope_json(points: &[EnvelopePoint]) -> Result<String> {
    serde_json::to_string_pretty(points).context("serializing envelope dataset")
}

pub fn parse_envelope_json(text: &str) -> Result<Vec<EnvelopePoint>> {
    serde_json::from_str(text).context("parsing envelope dataset")
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 50.0;

/// Scatter of the feasible envelope points in the (nu, NCTE) plane with
/// the frontier polyline (points joined in order of increasing nu) and
/// the two zero reference lines.
pub fn envelope_svg(points: &[EnvelopePoint]) -> String {
    let feasible: Vec<&EnvelopePoint> = points
        .iter()
        .filter(|p| p.feasible && p.nu.is_finite() && p.ncte.is_finite())
        .collect();

    // data window: pad 8% and always include the zero lines
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in &feasible {
        x0 = x0.min(p.nu);
        x1 = x1.max(p.nu);
        y0 = y0.min(p.ncte);
        y1 = y1.max(p.ncte);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let (px, py) = (0.08 * (x1 - x0), 0.08 * (y1 - y0));
    let (x0, x1, y0, y1) = (x0 - px, x1 + px, y0 - py, y1 + py);
    let sx = |v: f64| MARGIN_L + (v - x0) / (x1 - x0) * (SVG_W - MARGIN_L - MARGIN_R);
    let sy = |v: f64| SVG_H - MARGIN_B - (v - y0) / (y1 - y0) * (SVG_H - MARGIN_T - MARGIN_B);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" \
         viewBox=\"0 0 {SVG_W} {SVG_H}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{}\" height=\"{}\" \
         fill=\"none\" stroke=\"black\"/>\n",
        SVG_W - MARGIN_L - MARGIN_R,
        SVG_H - MARGIN_T - MARGIN_B
    ));

    // axis ticks and labels
    for k in 0..=4 {
        let vx = x0 + (x1 - x0) * k as f64 / 4.0;
        let vy = y0 + (y1 - y0) * k as f64 / 4.0;
        s.push_str(&format!(
            "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{0:.2}\" y2=\"{2:.2}\" stroke=\"black\"/>\n\
             <text x=\"{0:.2}\" y=\"{3:.2}\" font-size=\"11\" text-anchor=\"middle\">{4:.3}</text>\n",
            sx(vx),
            SVG_H - MARGIN_B,
            SVG_H - MARGIN_B + 5.0,
            SVG_H - MARGIN_B + 18.0,
            vx
        ));
        s.push_str(&format!(
            "<line x1=\"{1:.2}\" y1=\"{0:.2}\" x2=\"{2:.2}\" y2=\"{0:.2}\" stroke=\"black\"/>\n\
             <text x=\"{3:.2}\" y=\"{4:.2}\" font-size=\"11\" text-anchor=\"end\">{5:.3}</text>\n",
            sy(vy),
            MARGIN_L - 5.0,
            MARGIN_L,
            MARGIN_L - 8.0,
            sy(vy) + 4.0,
            vy
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">\
         Poisson's ratio</text>\n",
        (MARGIN_L + SVG_W - MARGIN_R) / 2.0,
        SVG_H - 10.0
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {0:.2})\">NCTE</text>\n",
        (MARGIN_T + SVG_H - MARGIN_B) / 2.0
    ));

    // zero reference lines
    s.push_str(&format!(
        "<line x1=\"{0:.2}\" y1=\"{1}\" x2=\"{0:.2}\" y2=\"{2}\" stroke=\"gray\" \
         stroke-dasharray=\"4 3\"/>\n",
        sx(0.0),
        MARGIN_T,
        SVG_H - MARGIN_B
    ));
    s.push_str(&format!(
        "<line x1=\"{1}\" y1=\"{0:.2}\" x2=\"{2}\" y2=\"{0:.2}\" stroke=\"gray\" \
         stroke-dasharray=\"4 3\"/>\n",
        sy(0.0),
        MARGIN_L,
        SVG_W - MARGIN_R
    ));

    if feasible.is_empty() {
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">\
             no feasible designs</text>\n",
            SVG_W / 2.0,
            SVG_H / 2.0
        ));
    } else {
        if feasible.len() >= 2 {
            let mut sorted = feasible.clone();
            sorted.sort_by(|a, b| a.nu.total_cmp(&b.nu).then(a.ncte.total_cmp(&b.ncte)));
            let path: Vec<String> = sorted
                .iter()
                .map(|p| format!("{:.2},{:.2}", sx(p.nu), sy(p.ncte)))
                .collect();
            s.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
                path.join(" ")
            ));
        }
        for p in &feasible {
            s.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#d62728\">\
                 <title>{}</title></circle>\n",
                sx(p.nu),
                sy(p.ncte),
                xml_escape(&p.label)
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(label: &str, nu: f64, ncte: f64, feasible: bool) -> EnvelopePoint {
        EnvelopePoint {
            label: label.to_string(),
            h1: 47.7,
            h2: 5.0,
            theta_deg: 39.56,
            t: 4.74,
            nu,
            ncte,
            evaluations: 1234,
            feasible,
            seed: 7,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let pts = vec![
            point("PR MAX", 0.01234567890123, 0.1111111111111, true),
            point("PR MIN (NCTE >= -0.3)", -0.164, -1.0 / 3.0, false),
        ];
        let text = envelope_csv(&pts);
        assert!(text.starts_with(ENVELOPE_CSV_HEADER));
        assert_eq!(text.lines().count(), 3);
        assert_eq!(parse_envelope_csv(&text).unwrap(), pts);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let pts = vec![point("NCTE MIN", -0.05, -5.871234567890123, true)];
        let back = parse_envelope_json(&envelope_json(&pts).unwrap()).unwrap();
        assert_eq!(back, pts);
    }

    #[test]
    fn csv_rejects_wrong_header() {
        assert!(parse_envelope_csv("a,b,c\n1,2,3\n").is_err());
    }

    #[test]
    fn sig_preserves_twelve_digits() {
        let v = -0.123456789012345;
        let s = sig(v);
        let back: f64 = s.parse().unwrap();
        assert_eq!(back, v);
        // mantissa carries at least 12 significant digits
        let digits: usize = s
            .trim_start_matches('-')
            .split('e')
            .next()
            .unwrap()
            .chars()
            .filter(|c| c.is_ascii_digit())
            .count();
        assert!(digits >= 12, "{s}");
    }

    #[test]
    fn svg_marks_feasible_points_only() {
        let pts = vec![
            point("A", -0.1, 0.2, true),
            point("B", 0.05, -0.3, true),
            point("C", 0.0, 0.0, false),
        ];
        let svg = envelope_svg(&pts);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("</svg>"));
    }

    #[test]
    fn svg_without_feasible_points_annotates() {
        let svg = envelope_svg(&[point("A", 0.1, 0.1, false)]);
        assert_eq!(svg.matches("<circle").count(), 0);
        assert!(svg.contains("no feasible designs"));
    }

    #[test]
    fn svg_single_point_has_no_polyline() {
        let svg = envelope_svg(&[point("A", -0.1, 0.2, true)]);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains("<polyline"));
    }
}
