//! SVG drawing instructions: each stroke numbered in drawing order at its
//! start point, with an arrowhead on its final segment showing direction.

use std::fmt::Write as _;

use crate::classifier::CANVAS_SIZE;
use crate::optimize::Proposal;
use crate::sketch::Sketch;

/// Label distance from the stroke start, perpendicular to the first segment.
pub const LABEL_OFFSET: f64 = 6.0;
/// Arrowhead length (and base width) in canvas units.
pub const ARROW_SIZE: f64 = 4.0;

const PANEL_GAP: f64 = 10.0;
const CAPTION_HEIGHT: f64 = 48.0;

/// Fixed-precision number formatting keeps the output byte-stable.
fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Unit direction of the first non-degenerate step in `pts`, scanning
/// forward or backward; `(1, 0)` for a fully degenerate polyline.
fn direction(pts: &[(f64, f64)], from_end: bool) -> (f64, f64) {
    let steps: Box<dyn Iterator<Item = (&(f64, f64), &(f64, f64))>> = if from_end {
        Box::new(pts.iter().rev().skip(1).zip(pts.iter().rev()))
    } else {
        Box::new(pts.iter().zip(pts.iter().skip(1)))
    };
    for (a, b) in steps {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let n = dx.hypot(dy);
        if n > 0.0 {
            return (dx / n, dy / n);
        }
    }
    (1.0, 0.0)
}

/// Arrowhead triangle with its tip on the stroke's last point.
pub fn arrowhead(stroke: &[(f64, f64)]) -> [(f64, f64); 3] {
    let tip = *stroke.last().expect("strokes have points");
    let (ux, uy) = direction(stroke, true);
    let base = (tip.0 - ARROW_SIZE * ux, tip.1 - ARROW_SIZE * uy);
    let half = ARROW_SIZE / 2.0;
    [
        tip,
        (base.0 - half * uy, base.1 + half * ux),
        (base.0 + half * uy, base.1 - half * ux),
    ]
}

/// Label anchor: the start point moved perpendicular to the first segment.
pub fn label_position(stroke: &[(f64, f64)]) -> (f64, f64) {
    let start = stroke[0];
    let (ux, uy) = direction(stroke, false);
    (start.0 - LABEL_OFFSET * uy, start.1 + LABEL_OFFSET * ux)
}

fn strokes_group(out: &mut String, s: &Sketch) {
    for (k, line) in s.polylines().iter().enumerate() {
        let d: Vec<String> = line
            .iter()
            .enumerate()
            .map(|(i, p)| format!("{}{} {}", if i == 0 { 'M' } else { 'L' }, num(p.0), num(p.1)))
            .collect();
        let arrow: Vec<String> = arrowhead(line).iter().map(|p| format!("{},{}", num(p.0), num(p.1))).collect();
        let (lx, ly) = label_position(line);
        let (sx, sy) = line[0];
        writeln!(out, r#"<g class="stroke" data-order="{}">"#, k + 1).unwrap();
        writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="black" stroke-width="2" stroke-linecap="round" stroke-linejoin="round"/>"#,
            d.join(" ")
        )
        .unwrap();
        writeln!(out, r#"<circle class="start" cx="{}" cy="{}" r="2.5" fill="green"/>"#, num(sx), num(sy)).unwrap();
        writeln!(out, r#"<polygon class="arrow" points="{}" fill="red"/>"#, arrow.join(" ")).unwrap();
        writeln!(
            out,
            r#"<text class="label" x="{}" y="{}" font-size="10" font-family="sans-serif" text-anchor="middle" dominant-baseline="middle" fill="blue">{}</text>"#,
            num(lx),
            num(ly),
            k + 1
        )
        .unwrap();
        out.push_str("</g>\n");
    }
}

/// Numbered, arrowed rendering on a 255 x 255 canvas.
pub fn render_instructions(s: &Sketch) -> String {
    let size = num(CANVAS_SIZE);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {size} {size}\" width=\"{size}\" height=\"{size}\">\n"
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    strokes_group(&mut out, s);
    out.push_str("</svg>\n");
    out
}

/// Original (left) and proposal (right) at the same scale, with the metric
/// changes in a caption underneath.
pub fn render_comparison(original: &Sketch, proposal: &Proposal) -> String {
    let c = CANVAS_SIZE;
    let width = 2.0 * c + PANEL_GAP;
    let height = c + CAPTION_HEIGHT;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" width=\"{w}\" height=\"{h}\">\n",
        w = num(width),
        h = num(height)
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (k, (title, s)) in [("Original", original), ("Proposal", &proposal.optimized)].into_iter().enumerate() {
        let x = k as f64 * (c + PANEL_GAP);
        writeln!(
            out,
            r#"<g class="panel" data-title="{title}" transform="translate({} 0)">"#,
            num(x)
        )
        .unwrap();
        writeln!(
            out,
            r##"<rect width="{s}" height="{s}" fill="none" stroke="#bbb"/>"##,
            s = num(c)
        )
        .unwrap();
        strokes_group(&mut out, s);
        out.push_str("</g>\n");
    }
    let m = &proposal.metrics;
    let lines = [
        format!(
            "{}: L_E {} → {}, L_D {}, L_P {}",
            escape(&proposal.method),
            num(m.effort_before),
            num(m.effort_after),
            num(m.length_diff),
            num(m.point_diff)
        ),
        format!(
            "confidence {} → {}, correct {} → {}{}",
            num(m.confidence_before),
            num(m.confidence_after),
            m.correct_before,
            m.correct_after,
            if m.unchanged { " (unchanged)" } else { "" }
        ),
    ];
    out.push_str("<g class=\"caption\" font-size=\"12\" font-family=\"sans-serif\">\n");
    for (i, text) in lines.iter().enumerate() {
        writeln!(out, r#"<text x="4" y="{}">{text}</text>"#, num(c + 18.0 + 16.0 * i as f64)).unwrap();
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::fixtures::square;
    use crate::sketch::reverse_stroke;

    #[test]
    fn square_counts() {
        let svg = render_instructions(&square());
        assert_eq!(svg.matches("<path").count(), 2);
        assert_eq!(svg.matches(r#"class="arrow""#).count(), 2);
        assert!(svg.contains(">1</text>") && svg.contains(">2</text>"));
        assert!(svg.contains(r#"viewBox="0 0 255 255""#));
    }

    #[test]
    fn golden_square() {
        let expected = r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 255 255" width="255" height="255">
<rect width="100%" height="100%" fill="white"/>
<g class="stroke" data-order="1">
<path d="M0 0 L0 10 L10 10" fill="none" stroke="black" stroke-width="2" stroke-linecap="round" stroke-linejoin="round"/>
<circle class="start" cx="0" cy="0" r="2.5" fill="green"/>
<polygon class="arrow" points="10,10 6,12 6,8" fill="red"/>
<text class="label" x="-6" y="0" font-size="10" font-family="sans-serif" text-anchor="middle" dominant-baseline="middle" fill="blue">1</text>
</g>
<g class="stroke" data-order="2">
<path d="M10 0 L0 0" fill="none" stroke="black" stroke-width="2" stroke-linecap="round" stroke-linejoin="round"/>
<circle class="start" cx="10" cy="0" r="2.5" fill="green"/>
<polygon class="arrow" points="0,0 4,-2 4,2" fill="red"/>
<text class="label" x="10" y="-6" font-size="10" font-family="sans-serif" text-anchor="middle" dominant-baseline="middle" fill="blue">2</text>
</g>
</svg>
"#;
        assert_eq!(render_instructions(&square()), expected);
    }

    #[test]
    fn reversed_stroke_moves_arrow() {
        let sq = square();
        let before = arrowhead(&sq.polylines()[1]);
        let after = arrowhead(&reverse_stroke(&sq, 1).unwrap().polylines()[1]);
        assert_eq!(before[0], (0.0, 0.0));
        assert_eq!(after[0], (10.0, 0.0));
    }

    #[test]
    fn empty_sketch_is_blank_canvas() {
        let svg = render_instructions(&Sketch::empty());
        assert!(!svg.contains("<path"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn number_format() {
        assert_eq!(num(10.0), "10");
        assert_eq!(num(-0.001), "0");
        assert_eq!(num(1.005), "1");
        assert_eq!(num(2.5), "2.5");
    }
}
