//! Staircase plot as a standalone SVG document.

use std::fmt::Write;

use chiral_gap_core::shift::Staircase;
use chiral_gap_core::zeta::AffineMap;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;
const MODEL_COLOR: &str = "#1f77b4";
const ZERO_COLOR: &str = "#d62728";

struct Frame {
    window: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, lambda: f64) -> f64 {
        MARGIN + (lambda + self.window) / (2.0 * self.window) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, value: f64) -> f64 {
        HEIGHT / 2.0 - value / self.y_max * (HEIGHT / 2.0 - MARGIN)
    }
}

/// Axis-aligned step path of an odd staircase on `[−T, T]`.
fn step_path(staircase: &Staircase, frame: &Frame) -> String {
    let window = frame.window;
    let mut breaks: Vec<f64> = staircase
        .jumps()
        .iter()
        .map(|j| j.0)
        .filter(|&x| x < window)
        .flat_map(|x| [-x, x])
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut edges = Vec::with_capacity(breaks.len() + 2);
    edges.push(-window);
    edges.extend(breaks);
    edges.push(window);

    let mut d = String::new();
    for (i, w) in edges.windows(2).enumerate() {
        let level = staircase.eval(0.5 * (w[0] + w[1])) as f64;
        let y = frame.y(level);
        if i == 0 {
            write!(d, "M{:.3} {:.3}", frame.x(w[0]), y).unwrap();
        } else {
            write!(d, " V{y:.3}").unwrap();
        }
        write!(d, " H{:.3}", frame.x(w[1])).unwrap();
    }
    d
}

/// Mapped model staircase (jumps at `|aλ_k + b|`) against the zero
/// staircase (unit jumps at `γ_k`).
pub fn render_svg(model: &Staircase, zeros: &[f64], map: &AffineMap, window: f64) -> String {
    let mapped = Staircase::from_jumps(model.jumps().iter().map(|&(x, w)| (map.apply(x), w)));
    let zero_staircase = Staircase::from_jumps(zeros.iter().map(|&g| (g, 1)));
    let peak = mapped.eval(window).max(zero_staircase.eval(window)).max(1) as f64;
    let frame = Frame {
        window,
        y_max: peak,
    };

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let (x0, y0) = (frame.x(0.0), frame.y(0.0));
    writeln!(
        s,
        r##"<g stroke="#999" stroke-width="1"><line x1="{:.3}" y1="{y0:.3}" x2="{:.3}" y2="{y0:.3}"/><line x1="{x0:.3}" y1="{:.3}" x2="{x0:.3}" y2="{:.3}"/></g>"##,
        frame.x(-window),
        frame.x(window),
        frame.y(peak),
        frame.y(-peak),
    )
    .unwrap();
    for (lambda, anchor) in [(-window, "start"), (0.0, "middle"), (window, "end")] {
        writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="{anchor}">{lambda}</text>"#,
            frame.x(lambda),
            y0 + 16.0,
        )
        .unwrap();
    }
    for value in [peak, -peak] {
        writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{value}</text>"#,
            x0 - 4.0,
            frame.y(value) + 4.0,
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<path id="zero-staircase" d="{}" fill="none" stroke="{ZERO_COLOR}" stroke-width="1.5"/>"#,
        step_path(&zero_staircase, &frame)
    )
    .unwrap();
    writeln!(
        s,
        r#"<path id="model-staircase" d="{}" fill="none" stroke="{MODEL_COLOR}" stroke-width="1.5" stroke-dasharray="5 3"/>"#,
        step_path(&mapped, &frame)
    )
    .unwrap();
    let legend_x = MARGIN + 10.0;
    writeln!(
        s,
        r#"<g><line x1="{legend_x}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{MODEL_COLOR}" stroke-width="1.5" stroke-dasharray="5 3"/><text x="{:.3}" y="{:.3}">model staircase, a = {:.6}, b = {:.6}</text></g>"#,
        MARGIN,
        legend_x + 30.0,
        MARGIN,
        legend_x + 36.0,
        MARGIN + 4.0,
        map.a,
        map.b,
    )
    .unwrap();
    writeln!(
        s,
        r#"<g><line x1="{legend_x}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{ZERO_COLOR}" stroke-width="1.5"/><text x="{:.3}" y="{:.3}">zero staircase</text></g>"#,
        MARGIN + 18.0,
        legend_x + 30.0,
        MARGIN + 18.0,
        legend_x + 36.0,
        MARGIN + 22.0,
    )
    .unwrap();
    writeln!(s, "</svg>").unwrap();
    s
}
