//! Marching squares: extract the iso-line of a 2D scalar field as line
//! segments, with linear interpolation along cell edges.

use crate::geometry::IntervalBox;

/// A segment of an iso-line, in problem coordinates.
pub type Segment = [(f64, f64); 2];

/// Trace `f(x, y) = level` over `omega` on a `resolution`² sample grid.
///
/// Each crossing cell contributes one or two segments; the two ambiguous
/// saddle cases are disambiguated by the cell-center value.
pub fn marching_squares<F: Fn(f64, f64) -> f64>(
    f: F,
    omega: &IntervalBox,
    resolution: usize,
    level: f64,
) -> Vec<Segment> {
    assert!(omega.dim() == 2, "marching squares needs a 2D box");
    assert!(resolution >= 2);
    let (x0, x1) = (omega.interval(0).lo, omega.interval(0).hi);
    let (y0, y1) = (omega.interval(1).lo, omega.interval(1).hi);
    let n = resolution;
    let dx = (x1 - x0) / (n - 1) as f64;
    let dy = (y1 - y0) / (n - 1) as f64;

    // Sample the field row by row; keep two rows in memory.
    let xs: Vec<f64> = (0..n).map(|i| x0 + i as f64 * dx).collect();
    let mut prev: Vec<f64> = xs.iter().map(|&x| f(x, y0) - level).collect();
    let mut segments = Vec::new();

    for j in 1..n {
        let y_lo = y0 + (j - 1) as f64 * dy;
        let y_hi = y0 + j as f64 * dy;
        let cur: Vec<f64> = xs.iter().map(|&x| f(x, y_hi) - level).collect();
        for i in 1..n {
            let x_lo = xs[i - 1];
            let x_hi = xs[i];
            // Corner values, counterclockwise from bottom-left.
            let bl = prev[i - 1];
            let br = prev[i];
            let tr = cur[i];
            let tl = cur[i - 1];
            let case = (u8::from(bl >= 0.0))
                | (u8::from(br >= 0.0) << 1)
                | (u8::from(tr >= 0.0) << 2)
                | (u8::from(tl >= 0.0) << 3);
            if case == 0 || case == 15 {
                continue;
            }
            let lerp = |a: f64, b: f64| if (b - a).abs() < 1e-300 { 0.5 } else { -a / (b - a) };
            let bottom = (x_lo + lerp(bl, br) * dx, y_lo);
            let top = (x_lo + lerp(tl, tr) * dx, y_hi);
            let left = (x_lo, y_lo + lerp(bl, tl) * dy);
            let right = (x_hi, y_lo + lerp(br, tr) * dy);
            match case {
                1 | 14 => segments.push([left, bottom]),
                2 | 13 => segments.push([bottom, right]),
                3 | 12 => segments.push([left, right]),
                4 | 11 => segments.push([right, top]),
                6 | 9 => segments.push([bottom, top]),
                7 | 8 => segments.push([left, top]),
                5 | 10 => {
                    let center = f(0.5 * (x_lo + x_hi), 0.5 * (y_lo + y_hi)) - level;
                    // A positive center joins the two positive corners
                    // across the diagonal.
                    let isolated = center < 0.0;
                    if isolated == (case == 5) {
                        segments.push([left, bottom]);
                        segments.push([right, top]);
                    } else {
                        segments.push([bottom, right]);
                        segments.push([left, top]);
                    }
                }
                _ => unreachable!(),
            }
        }
        prev = cur;
    }
    segments
}
