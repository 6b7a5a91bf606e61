//! SVG 1.1 drawings of planar frameworks.

use std::fmt::Write as _;

use rigidity_core::{Error, Framework, MemberKind, StressField, VelocityField};

const CANVAS: f64 = 480.0;
const MARGIN: f64 = 40.0;
/// Longest arrow as a fraction of the larger bounding-box side.
const ARROW_FRACTION: f64 = 0.1;

pub enum Overlay {
    None,
    Flex(VelocityField),
    Stress(StressField),
}

struct View {
    min: [f64; 2],
    scale: f64,
    height: f64,
    extent: f64,
}

impl View {
    fn new(f: &Framework) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for v in 0..f.vertex_count() {
            let p = f.point(v);
            for k in 0..2 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        if f.vertex_count() == 0 {
            min = [0.0; 2];
            max = [1.0; 2];
        }
        let extent = (max[0] - min[0]).max(max[1] - min[1]);
        let extent = if extent > 0.0 { extent } else { 1.0 };
        let scale = CANVAS / extent;
        View {
            min,
            scale,
            height: (max[1] - min[1]) * scale,
            extent,
        }
    }

    /// World to canvas, y pointing down.
    fn map(&self, p: &[f64]) -> (f64, f64) {
        (
            MARGIN + (p[0] - self.min[0]) * self.scale,
            MARGIN + self.height - (p[1] - self.min[1]) * self.scale,
        )
    }
}

pub fn format_value(x: f64) -> String {
    if (x - x.round()).abs() < 1e-9 {
        return format!("{}", x.round() as i64);
    }
    let s = format!("{x:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn render(f: &Framework, overlay: &Overlay) -> Result<String, Error> {
    if f.dimension() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: f.dimension(),
        });
    }
    match overlay {
        Overlay::Flex(u) => u.check_len(f)?,
        Overlay::Stress(w) => w.check_len(f)?,
        Overlay::None => {}
    }
    let view = View::new(f);
    let width = CANVAS + 2.0 * MARGIN;
    let height = view.height + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#,
        w = width,
        h = height
    );
    s.push_str(concat!(
        "  <defs>\n",
        r#"    <marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto">"#,
        "\n",
        r##"      <path d="M 0 0 L 10 5 L 0 10 z" fill="#c0392b"/>"##,
        "\n    </marker>\n  </defs>\n",
    ));
    let _ = writeln!(s, r#"  <rect width="100%" height="100%" fill="white"/>"#);

    s.push_str("  <g id=\"members\">\n");
    for m in f.members() {
        let (x1, y1) = view.map(&f.point(m.i));
        let (x2, y2) = view.map(&f.point(m.j));
        let line = |attrs: &str| format!(r#"    <line class="{}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {attrs}/>"#, m.kind);
        match m.kind {
            MemberKind::Bar => {
                let _ = writeln!(s, "{}", line(r##"stroke="#222222" stroke-width="2""##));
            }
            MemberKind::Cable => {
                let _ = writeln!(s, "{}", line(r##"stroke="#1f4e9c" stroke-width="2" stroke-dasharray="8 5""##));
            }
            MemberKind::Strut => {
                let _ = writeln!(s, "{}", line(r##"stroke="#7a1f1f" stroke-width="6""##));
                let _ = writeln!(s, "{}", line(r##"stroke="white" stroke-width="2""##));
            }
        }
    }
    s.push_str("  </g>\n  <g id=\"joints\">\n");
    for v in 0..f.vertex_count() {
        let (x, y) = view.map(&f.point(v));
        let _ = writeln!(s, r##"    <circle cx="{x:.2}" cy="{y:.2}" r="4" fill="#222222"/>"##);
    }
    s.push_str("  </g>\n");

    match overlay {
        Overlay::None => {}
        Overlay::Flex(u) => {
            let longest = (0..u.vertex_count())
                .map(|v| u.at(v).iter().map(|x| x * x).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            s.push_str("  <g id=\"flex\">\n");
            if longest > 0.0 {
                let k = ARROW_FRACTION * view.extent / longest;
                for v in 0..u.vertex_count() {
                    let d = u.at(v);
                    if d.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-9 * longest {
                        continue;
                    }
                    let p = f.point(v);
                    let (x1, y1) = view.map(&p);
                    let (x2, y2) = view.map(&[p[0] + k * d[0], p[1] + k * d[1]]);
                    let _ = writeln!(
                        s,
                        r##"    <line class="velocity" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="#c0392b" stroke-width="1.5" marker-end="url(#arrow)"/>"##
                    );
                }
            }
            s.push_str("  </g>\n");
        }
        Overlay::Stress(w) => {
            s.push_str("  <g id=\"stress\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">\n");
            for (m, &x) in f.members().iter().zip(&w.values) {
                let (x1, y1) = view.map(&f.point(m.i));
                let (x2, y2) = view.map(&f.point(m.j));
                let _ = writeln!(
                    s,
                    r##"    <text class="stress" x="{:.2}" y="{:.2}" fill="#006400">{}</text>"##,
                    (x1 + x2) / 2.0,
                    (y1 + y2) / 2.0 - 4.0,
                    format_value(x)
                );
            }
            s.push_str("  </g>\n");
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}
