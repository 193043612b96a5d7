//! Nearest-point projection onto the decision manifold ψ(x) = 0:
//! minimize ‖x − x₀‖₂ subject to ψ(x) = 0 inside the state-space box.
//!
//! Each iteration solves the KKT system of the local quadratic model
//! (identity Hessian for the distance objective plus the linearized
//! constraint), globalized by an ℓ₁ merit function with Armijo
//! backtracking. With a single equality constraint the step is a
//! closed-form linear solve.

use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::IntervalBox;
use crate::svm::SvmModel;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ProjectionOptions {
    /// Required |ψ(x*)| at convergence.
    pub residual_tol: f64,
    pub max_iter: usize,
    /// Angle tolerance (radians) for first-order stationarity of
    /// (x* − x₀) against ∇ψ(x*).
    pub angle_tol: f64,
    /// Random restarts after a stalled line search.
    pub max_restarts: usize,
    /// Seed for the restart perturbations; fixed options give
    /// bitwise-identical results.
    pub restart_seed: u64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-6,
            max_iter: 100,
            angle_tol: 1e-3,
            max_restarts: 3,
            restart_seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProjectionResult {
    pub point: Vec<f64>,
    pub distance: f64,
    /// |ψ| at the returned point.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn on_boundary(omega: &IntervalBox, x: &[f64]) -> bool {
    omega.intervals().iter().zip(x).any(|(iv, &v)| {
        let tol = 1e-12 * (1.0 + iv.width());
        (v - iv.lo).abs() <= tol || (iv.hi - v).abs() <= tol
    })
}

/// Project `x0` onto the zero set of the model's decision function.
///
/// A non-converged run is not an error: the caller receives the best
/// iterate with `converged = false` and decides the fallback. A gradient
/// below 1e-12 in norm is an error (the step direction is undefined).
pub fn nearest_point_on_manifold(
    model: &SvmModel,
    x0: &[f64],
    omega: &IntervalBox,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    if x0.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: x0.len(),
        });
    }
    let dim = x0.len();
    let perturb_scale = 1e-3 * omega.diameter();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.restart_seed);

    let mut best: Option<ProjectionResult> = None;
    let mut total_iters = 0usize;

    for attempt in 0..=opts.max_restarts {
        let mut x: Vec<f64> = if attempt == 0 {
            omega.clamp(x0)
        } else {
            let jitter: Vec<f64> = (0..dim)
                .map(|_| rng.gen_range(-1.0..1.0) * perturb_scale)
                .collect();
            omega.clamp(&x0.iter().zip(&jitter).map(|(a, b)| a + b).collect::<Vec<_>>())
        };

        let mut mu: f64 = 1.0;
        let mut stalls = 0usize;
        let mut psi = model.decision_value(&x)?;

        for _ in 0..opts.max_iter {
            total_iters += 1;
            let grad = model.decision_gradient(&x)?;
            let gn = norm(&grad);
            if gn < 1e-12 {
                return Err(Error::DegenerateGradient { norm: gn });
            }

            let r: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
            let rn = norm(&r);

            // Converged?
            if psi.abs() <= opts.residual_tol {
                let stationary = if rn < 1e-10 {
                    true
                } else {
                    let cos = (dot(&r, &grad) / (rn * gn)).abs();
                    cos >= opts.angle_tol.cos()
                };
                if stationary || on_boundary(omega, &x) {
                    let res = ProjectionResult {
                        distance: rn,
                        residual: psi.abs(),
                        point: x,
                        iterations: total_iters,
                        converged: true,
                    };
                    return Ok(res);
                }
            }

            // Least-squares multiplier estimate and the identity-Hessian
            // KKT step d = −r − λ∇ψ (λ so that ψ + ∇ψᵀd = 0 holds).
            let lambda = (psi - dot(&grad, &r)) / (gn * gn);
            let d: Vec<f64> = r
                .iter()
                .zip(&grad)
                .map(|(ri, gi)| -ri - lambda * gi)
                .collect();

            mu = mu.max(2.0 * lambda.abs() + 1.0);
            let merit = |p: &[f64], psi_p: f64| {
                0.5 * p.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + mu * psi_p.abs()
            };
            let m0 = merit(&x, psi);
            let descent = dot(&r, &d) - mu * psi.abs();

            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let cand = omega.clamp(&x.iter().zip(&d).map(|(a, b)| a + t * b).collect::<Vec<_>>());
                let psi_c = model.decision_value(&cand)?;
                if merit(&cand, psi_c) <= m0 + 1e-4 * t * descent.min(0.0) {
                    if cand == x {
                        break; // clamped into place; no progress possible
                    }
                    x = cand;
                    psi = psi_c;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if accepted {
                stalls = 0;
            } else {
                stalls += 1;
                if stalls >= 10 {
                    break;
                }
            }
        }

        let r: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
        let candidate = ProjectionResult {
            distance: norm(&r),
            residual: psi.abs(),
            point: x,
            iterations: total_iters,
            converged: false,
        };
        let better = match &best {
            None => true,
            Some(b) => candidate.residual < b.residual,
        };
        if better {
            best = Some(candidate);
        }
    }

    Ok(best.expect("at least one attempt ran"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::marching_squares;
    use approx::assert_relative_eq;
    use rand_chacha::ChaCha8Rng;

    /// Zero set = unit circle: single SV at the origin, b = −e^{−1/2}.
    fn unit_circle_model() -> SvmModel {
        SvmModel {
            support_points: vec![vec![0.0, 0.0]],
            support_labels: vec![1],
            coefficients: vec![1.0],
            bias: -(-0.5f64).exp(),
            gamma: 1.0,
            box_bound: 1e6,
        }
    }

    #[test]
    fn radial_projection_onto_unit_circle() {
        let model = unit_circle_model();
        let omega = IntervalBox::cube(-3.0, 3.0, 2);
        let r = nearest_point_on_manifold(&model, &[2.0, 0.0], &omega, &ProjectionOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.residual <= 1e-6);
        assert_relative_eq!(r.point[0], 1.0, epsilon = 1e-4);
        assert!(r.point[1].abs() < 1e-4);
        assert_relative_eq!(r.distance, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn feasible_start_stays_put() {
        let model = unit_circle_model();
        let omega = IntervalBox::cube(-3.0, 3.0, 2);
        let r = nearest_point_on_manifold(&model, &[1.0, 0.0], &omega, &ProjectionOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.distance < 1e-6);
    }

    #[test]
    fn center_has_degenerate_gradient() {
        // By symmetry ∇ψ vanishes exactly at the centre of the circle
        // model; the step direction is undefined there and the operator
        // must say so rather than return an arbitrary point.
        let model = unit_circle_model();
        let omega = IntervalBox::cube(-3.0, 3.0, 2);
        let r = nearest_point_on_manifold(&model, &[0.0, 0.0], &omega, &ProjectionOptions::default());
        assert!(matches!(r, Err(Error::DegenerateGradient { .. })));
    }

    #[test]
    fn projection_is_deterministic() {
        let model = unit_circle_model();
        let omega = IntervalBox::cube(-3.0, 3.0, 2);
        let opts = ProjectionOptions::default();
        let a = nearest_point_on_manifold(&model, &[1.7, -0.9], &omega, &opts).unwrap();
        let b = nearest_point_on_manifold(&model, &[1.7, -0.9], &omega, &opts).unwrap();
        assert_eq!(a.point, b.point);
        assert_eq!(a.distance.to_bits(), b.distance.to_bits());
        assert_eq!(a.iterations, b.iterations);
    }

    /// Brute-force oracle: sample the zero set by marching squares, then
    /// refine each vertex by bisection along the gradient direction.
    fn oracle_boundary_vertices(model: &SvmModel, omega: &IntervalBox, res: usize) -> Vec<[f64; 2]> {
        let segs = marching_squares(
            |x, y| model.decision_value(&[x, y]).unwrap(),
            omega,
            res,
            0.0,
        );
        let h = omega.width() / (res - 1) as f64;
        let mut verts = Vec::new();
        for s in &segs {
            for &(px, py) in s {
                let mut p = vec![px, py];
                // One bisection pass along ∇ψ tightens the vertex.
                let g = model.decision_gradient(&p).unwrap();
                let gn = norm(&g);
                if gn > 1e-12 {
                    let dir = [g[0] / gn, g[1] / gn];
                    let f = |t: f64| {
                        model
                            .decision_value(&[p[0] + t * dir[0], p[1] + t * dir[1]])
                            .unwrap()
                    };
                    let (mut lo, mut hi) = (-h, h);
                    if f(lo) * f(hi) < 0.0 {
                        for _ in 0..50 {
                            let mid = 0.5 * (lo + hi);
                            if f(lo) * f(mid) <= 0.0 {
                                hi = mid;
                            } else {
                                lo = mid;
                            }
                        }
                        let t = 0.5 * (lo + hi);
                        p = vec![p[0] + t * dir[0], p[1] + t * dir[1]];
                    }
                }
                verts.push([p[0], p[1]]);
            }
        }
        verts
    }

    /// The solver is local: it must land on the zero set at a point no
    /// worse than any nearby manifold point, but it may legitimately
    /// settle on a branch farther from x₀ than the global optimum.
    #[test]
    fn converged_point_is_on_manifold_and_locally_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let omega = IntervalBox::cube(-3.0, 3.0, 2);
        let res = 2001;
        let cell = omega.width() / (res - 1) as f64;
        let mut checked = 0;
        while checked < 10 {
            let n = rng.gen_range(2..6);
            let model = SvmModel {
                support_points: (0..n)
                    .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
                    .collect(),
                support_labels: (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect(),
                coefficients: (0..n).map(|_| rng.gen_range(0.5..2.0)).collect(),
                bias: rng.gen_range(-0.3..0.3),
                gamma: rng.gen_range(0.6..1.5),
                box_bound: 1e6,
            };
            let x0 = vec![rng.gen_range(-2.5..2.5), rng.gen_range(-2.5..2.5)];
            let verts = oracle_boundary_vertices(&model, &omega, res);
            if verts.is_empty() {
                continue;
            }
            let r = match nearest_point_on_manifold(&model, &x0, &omega, &ProjectionOptions::default()) {
                Ok(r) if r.converged => r,
                _ => continue,
            };
            let d = |a: &[f64], b: &[f64]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            // The returned point lies on the sampled zero set...
            let to_manifold = verts.iter().map(|v| d(v, &r.point)).fold(f64::INFINITY, f64::min);
            assert!(
                to_manifold <= 2.0 * cell,
                "returned point is {to_manifold} away from the traced boundary"
            );
            // ...and no traced boundary point in its neighborhood is
            // meaningfully closer to x0.
            let tol = 1e-3 * omega.diameter();
            for v in verts.iter().filter(|v| d(*v, &r.point) < 0.15) {
                assert!(
                    d(v, &x0) >= r.distance - tol,
                    "nearby manifold point {v:?} beats the projection: {} < {}",
                    d(v, &x0),
                    r.distance
                );
            }
            checked += 1;
        }
    }
}
