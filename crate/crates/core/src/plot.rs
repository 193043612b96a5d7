//! Minimal SVG plots for 2D problems: sample scatters, predicted region
//! against the true boundary, subpaving box maps, and predator–prey
//! trajectories. No plotting dependency; the files are plain SVG.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{IntervalBox, Subpaving};
use crate::models::{LvTrajectory, ProblemSpec};
use crate::oasis::{LabeledSample, SampleOrigin};
use crate::svm::SvmModel;

const CANVAS: f64 = 720.0;
const MARGIN: f64 = 40.0;

struct Frame {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
}

impl Frame {
    fn new(omega: &IntervalBox) -> Result<Self> {
        if omega.dim() != 2 {
            return Err(Error::Config(format!(
                "plotting needs a 2D domain, got {}D",
                omega.dim()
            )));
        }
        let (ix, iy) = (omega.interval(0), omega.interval(1));
        Ok(Self {
            x0: ix.lo,
            y0: iy.lo,
            sx: (CANVAS - 2.0 * MARGIN) / ix.width(),
            sy: (CANVAS - 2.0 * MARGIN) / iy.width(),
        })
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) * self.sx
    }

    /// SVG y grows downward; flip so the plot reads mathematically.
    fn py(&self, y: f64) -> f64 {
        CANVAS - MARGIN - (y - self.y0) * self.sy
    }
}

fn svg_open(body: &mut String) {
    let _ = writeln!(
        body,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CANVAS}\" height=\"{CANVAS}\" viewBox=\"0 0 {CANVAS} {CANVAS}\">"
    );
    let _ = writeln!(
        body,
        "<rect width=\"{CANVAS}\" height=\"{CANVAS}\" fill=\"white\"/>"
    );
}

fn svg_frame(body: &mut String) {
    let inner = CANVAS - 2.0 * MARGIN;
    let _ = writeln!(
        body,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{inner}\" height=\"{inner}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>"
    );
}

fn finish<W: std::io::Write>(mut w: W, mut body: String) -> Result<()> {
    body.push_str("</svg>\n");
    w.write_all(body.as_bytes())?;
    Ok(())
}

/// Scatter of labeled samples; fill encodes the label, shape the origin
/// (circles for random draws, squares for boundary queries, diamonds for
/// fallbacks).
pub fn plot_samples_svg<W: std::io::Write>(
    samples: &[LabeledSample],
    omega: &IntervalBox,
    w: W,
) -> Result<()> {
    let f = Frame::new(omega)?;
    let mut body = String::new();
    svg_open(&mut body);
    for s in samples {
        let (x, y) = (f.px(s.point[0]), f.py(s.point[1]));
        let fill = if s.label > 0 { "#d62728" } else { "#1f77b4" };
        match s.origin {
            SampleOrigin::Random => {
                let _ = writeln!(
                    body,
                    "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{fill}\" fill-opacity=\"0.8\"/>"
                );
            }
            SampleOrigin::Active => {
                let _ = writeln!(
                    body,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"6\" height=\"6\" fill=\"{fill}\"/>",
                    x - 3.0,
                    y - 3.0
                );
            }
            SampleOrigin::FallbackRandom => {
                let _ = writeln!(
                    body,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"6\" height=\"6\" transform=\"rotate(45 {x:.2} {y:.2})\" fill=\"{fill}\"/>",
                    x - 3.0,
                    y - 3.0
                );
            }
        }
    }
    svg_frame(&mut body);
    finish(w, body)
}

/// Oracle margin field: positive inside P, zero exactly on ∂P.
fn margin_field(spec: &ProblemSpec, x: f64, y: f64) -> f64 {
    let out = spec.eval_forward(&[x, y]).expect("2D forward eval");
    out.iter()
        .zip(spec.target.intervals())
        .map(|(&v, t)| (v - t.lo).min(t.hi - v))
        .fold(f64::INFINITY, f64::min)
}

/// Shade the model's predicted positive region and overlay the true
/// boundary of P (marching squares on the oracle margin field) plus the
/// model's own decision boundary.
pub fn plot_region_svg<W: std::io::Write>(
    model: &SvmModel,
    spec: &ProblemSpec,
    resolution: usize,
    w: W,
) -> Result<()> {
    let omega = &spec.state_space;
    let f = Frame::new(omega)?;
    let mut body = String::new();
    svg_open(&mut body);

    // Predicted region as shaded grid cells.
    let n = resolution.max(2);
    let (ix, iy) = (omega.interval(0), omega.interval(1));
    let dx = ix.width() / (n - 1) as f64;
    let dy = iy.width() / (n - 1) as f64;
    for i in 0..n {
        let x = ix.lo + i as f64 * dx;
        for j in 0..n {
            let y = iy.lo + j as f64 * dy;
            if model.predict(&[x, y])? > 0 {
                let (cw, ch) = (dx * f.sx, dy * f.sy);
                let _ = writeln!(
                    body,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#ffbbbb\"/>",
                    f.px(x) - cw / 2.0,
                    f.py(y) - ch / 2.0,
                    cw,
                    ch
                );
            }
        }
    }

    let mut draw = |segs: &[[(f64, f64); 2]], stroke: &str, dash: &str| {
        for s in segs {
            let _ = writeln!(
                body,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{stroke}\" stroke-width=\"1.5\"{dash}/>",
                f.px(s[0].0),
                f.py(s[0].1),
                f.px(s[1].0),
                f.py(s[1].1)
            );
        }
    };
    let true_boundary = crate::contour::marching_squares(
        |x, y| margin_field(spec, x, y),
        omega,
        resolution.max(201),
        0.0,
    );
    draw(&true_boundary, "black", "");
    let decision = crate::contour::marching_squares(
        |x, y| model.decision_value(&[x, y]).expect("2D decision value"),
        omega,
        resolution.max(201),
        0.0,
    );
    draw(&decision, "#d62728", " stroke-dasharray=\"6 4\"");

    svg_frame(&mut body);
    finish(w, body)
}

/// Three-color box map of a subpaving: red inner, yellow uncertain,
/// light blue outer.
pub fn plot_subpaving_svg<W: std::io::Write>(sp: &Subpaving, w: W) -> Result<()> {
    let f = Frame::new(&sp.root)?;
    let mut body = String::new();
    svg_open(&mut body);
    let mut draw = |boxes: &[IntervalBox], fill: &str| {
        for b in boxes {
            let (bx, by) = (b.interval(0), b.interval(1));
            let _ = writeln!(
                body,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\" stroke=\"#666\" stroke-width=\"0.2\"/>",
                f.px(bx.lo),
                f.py(by.hi),
                bx.width() * f.sx,
                by.width() * f.sy
            );
        }
    };
    draw(&sp.outer, "#cce5ff");
    draw(&sp.uncertain, "#ffe680");
    draw(&sp.inner, "#ff8080");
    svg_frame(&mut body);
    finish(w, body)
}

/// Prey and predator populations against time.
pub fn plot_lv_trajectory_svg<W: std::io::Write>(traj: &LvTrajectory, w: W) -> Result<()> {
    if traj.times.is_empty() {
        return Err(Error::Config("empty trajectory".into()));
    }
    let t_max = *traj.times.last().expect("nonempty");
    let pop_max = traj
        .prey
        .iter()
        .chain(&traj.predator)
        .fold(0.0f64, |a, &b| a.max(b));
    let fx = (CANVAS - 2.0 * MARGIN) / t_max;
    let fy = (CANVAS - 2.0 * MARGIN) / pop_max;
    let to_path = |values: &[f64]| {
        let mut d = String::new();
        for (i, (&t, &v)) in traj.times.iter().zip(values).enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(
                d,
                "{cmd}{:.2} {:.2} ",
                MARGIN + t * fx,
                CANVAS - MARGIN - v * fy
            );
        }
        d
    };
    let mut body = String::new();
    svg_open(&mut body);
    let _ = writeln!(
        body,
        "<path d=\"{}\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\"/>",
        to_path(&traj.prey)
    );
    let _ = writeln!(
        body,
        "<path d=\"{}\" fill=\"none\" stroke=\"#9467bd\" stroke-width=\"1.5\"/>",
        to_path(&traj.predator)
    );
    svg_frame(&mut body);
    finish(w, body)
}
