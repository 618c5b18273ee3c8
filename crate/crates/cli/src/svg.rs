//! Deterministic SVG eigenvalue-flow diagrams.
//!
//! Eigenvalue traces against the path parameter, the (per-step, adaptive)
//! window boundaries, the zero line, and direction-colored crossing marks.
//! Identical input bytes produce identical output bytes.

use diracflow::sfl::SflResult;
use std::fmt::Write as _;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 40.0;

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

/// Render a spectral-flow record. `title` lands in the header line.
pub fn render_flow(result: &SflResult<f64>, title: &str) -> String {
    let mut y_max = result
        .steps
        .iter()
        .map(|s| s.window)
        .fold(1.0f64, f64::max)
        * 1.1;
    if !y_max.is_finite() || y_max <= 0.0 {
        y_max = 1.0;
    }
    let x_of = |t: f64| MARGIN_L + t * (WIDTH - MARGIN_L - MARGIN_R);
    let y_of = |v: f64| {
        let usable = HEIGHT - MARGIN_T - MARGIN_B;
        MARGIN_T + (1.0 - (v + y_max) / (2.0 * y_max)) * usable
    };

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    svg.push('\n');
    let _ = write!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    svg.push('\n');
    let _ = write!(
        svg,
        r#"<text x="{}" y="24" font-family="monospace" font-size="16">{} (flow = {})</text>"#,
        MARGIN_L,
        xml_escape(title),
        result.flow
    );
    svg.push('\n');

    // axes and zero line
    let _ = write!(
        svg,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="1"/>"#,
        fmt(x_of(0.0)),
        fmt(y_of(-y_max)),
        fmt(x_of(0.0)),
        fmt(y_of(y_max))
    );
    svg.push('\n');
    let _ = write!(
        svg,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#888" stroke-dasharray="4 3" stroke-width="1"/>"##,
        fmt(x_of(0.0)),
        fmt(y_of(0.0)),
        fmt(x_of(1.0)),
        fmt(y_of(0.0))
    );
    svg.push('\n');
    for label in [-y_max, 0.0, y_max] {
        let _ = write!(
            svg,
            r#"<text x="4" y="{}" font-family="monospace" font-size="11">{}</text>"#,
            fmt(y_of(label) + 4.0),
            fmt(label)
        );
        svg.push('\n');
    }

    // per-step window boundaries
    for pair in result.steps.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        for sign in [-1.0, 1.0] {
            let _ = write!(
                svg,
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#bbb" stroke-width="1"/>"##,
                fmt(x_of(a.t)),
                fmt(y_of(sign * a.window)),
                fmt(x_of(b.t)),
                fmt(y_of(sign * a.window))
            );
            svg.push('\n');
        }
    }

    // eigenvalue traces: connect sorted values between consecutive samples
    // while the windowed population is unchanged
    for pair in result.steps.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.eigenvalues.len() != b.eigenvalues.len() {
            continue;
        }
        for (va, vb) in a.eigenvalues.iter().zip(b.eigenvalues.iter()) {
            let _ = write!(
                svg,
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#1f4e96" stroke-width="1.4"/>"##,
                fmt(x_of(a.t)),
                fmt(y_of(*va)),
                fmt(x_of(b.t)),
                fmt(y_of(*vb))
            );
            svg.push('\n');
        }
    }

    // crossing marks, direction-colored
    for c in &result.crossings {
        let tm = 0.5 * (c.t_lo + c.t_hi);
        let color = if c.direction > 0 { "#177245" } else { "#b22222" };
        let _ = write!(
            svg,
            r#"<circle cx="{}" cy="{}" r="5" fill="{}" fill-opacity="0.85"/>"#,
            fmt(x_of(tm)),
            fmt(y_of(0.0)),
            color
        );
        svg.push('\n');
    }

    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use diracflow::eigh::SpectralWindow;
    use diracflow::sfl::{circle_oracle, spectral_flow, SflControls};

    #[test]
    fn deterministic_bytes_and_crossing_marks() {
        let path = circle_oracle::<f64>(1, 12).unwrap();
        let r = spectral_flow(
            &path,
            &SpectralWindow::with_default_guard(2.5).unwrap(),
            &SflControls::default(),
        )
        .unwrap();
        let a = render_flow(&r, "circle oracle w=1");
        let b = render_flow(&r, "circle oracle w=1");
        assert_eq!(a, b);
        // exactly one upward crossing
        assert_eq!(a.matches("#177245").count(), 1);
        assert_eq!(a.matches("#b22222").count(), 0);
        assert!(a.contains("flow = 1"));
    }

    #[test]
    fn constant_path_has_no_marks() {
        let path = circle_oracle::<f64>(0, 8).unwrap();
        let r = spectral_flow(
            &path,
            &SpectralWindow::with_default_guard(2.5).unwrap(),
            &SflControls::default(),
        )
        .unwrap();
        let svg = render_flow(&r, "constant");
        assert_eq!(svg.matches("circle cx").count(), 0);
    }
}
