//! Minimal SVG renderer for scalar fields on a rectangular grid.
//!
//! No plotting dependency: the artifact is a grayscale cell raster with
//! marching-squares contour lines on top and the axis extents written in
//! the corners.  Coordinates are formatted with a fixed number of decimals
//! so identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 40.0;

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// Render `values[i][j]` = field at (xs[i], ys[j]) and write the SVG.
pub fn write_field_svg(
    path: &Path,
    xs: &[f64],
    ys: &[f64],
    values: &[Vec<f64>],
    title: &str,
) -> io::Result<()> {
    assert!(xs.len() >= 2 && ys.len() >= 2);
    assert_eq!(values.len(), xs.len());

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for row in values {
        for &v in row {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !(hi > lo) {
        hi = lo + 1.0;
    }

    let plot_w = W - 2.0 * MARGIN;
    let plot_h = H - 2.0 * MARGIN;
    let x_of = |x: f64| MARGIN + (x - xs[0]) / (xs[xs.len() - 1] - xs[0]) * plot_w;
    // SVG y grows downward; flip so ys grows upward on the page.
    let y_of = |y: f64| H - MARGIN - (y - ys[0]) / (ys[ys.len() - 1] - ys[0]) * plot_h;

    let mut body = String::new();
    let _ = writeln!(
        body,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(body, r#"<rect width="{W}" height="{H}" fill="white"/>"#);

    // cell raster: one rect per grid cell, shaded by the mean of its corners
    for i in 0..xs.len() - 1 {
        for j in 0..ys.len() - 1 {
            let mean =
                0.25 * (values[i][j] + values[i + 1][j] + values[i][j + 1] + values[i + 1][j + 1]);
            let t = (mean - lo) / (hi - lo);
            // light-to-dark ramp, clipped
            let shade = (235.0 - 195.0 * t.clamp(0.0, 1.0)).round() as u8;
            let x0 = x_of(xs[i]);
            let y1 = y_of(ys[j + 1]);
            let w = x_of(xs[i + 1]) - x0;
            let h = y_of(ys[j]) - y1;
            let _ = writeln!(
                body,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="rgb({shade},{shade},{shade})"/>"#,
                px(x0),
                px(y1),
                px(w),
                px(h)
            );
        }
    }

    // marching-squares contours at nine interior levels
    for k in 1..=9 {
        let level = lo + (hi - lo) * k as f64 / 10.0;
        for i in 0..xs.len() - 1 {
            for j in 0..ys.len() - 1 {
                segments(
                    &mut body,
                    level,
                    [xs[i], xs[i + 1]],
                    [ys[j], ys[j + 1]],
                    [
                        values[i][j],
                        values[i + 1][j],
                        values[i + 1][j + 1],
                        values[i][j + 1],
                    ],
                    &x_of,
                    &y_of,
                );
            }
        }
    }

    // frame and extent labels
    let _ = writeln!(
        body,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        px(MARGIN),
        px(MARGIN),
        px(plot_w),
        px(plot_h)
    );
    let label = |x: f64, y: f64, anchor: &str, text: String| {
        format!(r#"<text x="{}" y="{}" font-size="12" text-anchor="{anchor}">{text}</text>"#, px(x), px(y))
    };
    let _ = writeln!(body, "{}", label(MARGIN, H - MARGIN + 16.0, "start", format!("{}", xs[0])));
    let _ = writeln!(
        body,
        "{}",
        label(W - MARGIN, H - MARGIN + 16.0, "end", format!("{}", xs[xs.len() - 1]))
    );
    let _ = writeln!(body, "{}", label(MARGIN - 4.0, H - MARGIN, "end", format!("{}", ys[0])));
    let _ = writeln!(
        body,
        "{}",
        label(MARGIN - 4.0, MARGIN + 6.0, "end", format!("{}", ys[ys.len() - 1]))
    );
    let _ = writeln!(body, "{}", label(W / 2.0, MARGIN - 10.0, "middle", title.to_string()));
    let _ = writeln!(body, "</svg>");

    let mut f = File::create(path)?;
    f.write_all(body.as_bytes())
}

/// Linear-interpolation marching squares for one cell.  Corner order:
/// (x0,y0), (x1,y0), (x1,y1), (x0,y1).
fn segments(
    body: &mut String,
    level: f64,
    x: [f64; 2],
    y: [f64; 2],
    v: [f64; 4],
    x_of: &dyn Fn(f64) -> f64,
    y_of: &dyn Fn(f64) -> f64,
) {
    let corners = [(x[0], y[0]), (x[1], y[0]), (x[1], y[1]), (x[0], y[1])];
    let mut crossings: Vec<(f64, f64)> = Vec::new();
    for e in 0..4 {
        let (a, b) = (e, (e + 1) % 4);
        let (va, vb) = (v[a], v[b]);
        if (va < level) != (vb < level) {
            let t = (level - va) / (vb - va);
            let (xa, ya) = corners[a];
            let (xb, yb) = corners[b];
            crossings.push((xa + t * (xb - xa), ya + t * (yb - ya)));
        }
    }
    // 0, 2 or 4 crossings; pair them in order (the ambiguous saddle case
    // just picks one of the two valid pairings, fine for a survey plot)
    let mut it = crossings.chunks_exact(2);
    for pair in &mut it {
        let _ = writeln!(
            body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="rgb(180,40,40)" stroke-width="0.8"/>"#,
            px(x_of(pair[0].0)),
            px(y_of(pair[0].1)),
            px(x_of(pair[1].0)),
            px(y_of(pair[1].1))
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_deterministic_and_well_formed() {
        let xs: Vec<f64> = (0..5).map(|k| k as f64).collect();
        let ys: Vec<f64> = (0..4).map(|k| k as f64 - 1.5).collect();
        let values: Vec<Vec<f64>> =
            xs.iter().map(|x| ys.iter().map(|y| (x - 2.0) * y).collect()).collect();
        let dir = std::env::temp_dir();
        let p1 = dir.join("motion_svg_test_1.svg");
        let p2 = dir.join("motion_svg_test_2.svg");
        write_field_svg(&p1, &xs, &ys, &values, "t").unwrap();
        write_field_svg(&p2, &xs, &ys, &values, "t").unwrap();
        let a = std::fs::read(&p1).unwrap();
        let b = std::fs::read(&p2).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.trim_end().ends_with("</svg>"));
        assert!(text.contains("<line"));
        std::fs::remove_file(p1).ok();
        std::fs::remove_file(p2).ok();
    }
}
