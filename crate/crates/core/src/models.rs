//! Forward models, their natural inclusion functions, the membership
//! oracle, and the Lotka-Volterra dynamics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::IntervalBox;

/// Lotka-Volterra rate constants, all strictly positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LvParams {
    /// Prey birth rate.
    pub p1: f64,
    /// Predation dip rate.
    pub p2: f64,
    /// Predator death rate.
    pub p3: f64,
    /// Predator growth rate.
    pub p4: f64,
}

/// The forward functions the toolkit knows how to evaluate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ForwardModel {
    /// x² + y²
    Circle,
    /// x² + y² + xy
    DoughnutForm,
    /// Σ xᵢ² over k coordinates.
    SphereKd { k: usize },
    /// Minimum prey population of the Lotka-Volterra system over [0, T],
    /// with (p₂, p₄) as the inputs and the remaining parameters fixed.
    LotkaVolterraMinPrey {
        p1: f64,
        p3: f64,
        u0: f64,
        v0: f64,
        horizon: f64,
        dt: f64,
    },
}

impl ForwardModel {
    pub fn input_dim(&self) -> usize {
        match self {
            ForwardModel::Circle | ForwardModel::DoughnutForm => 2,
            ForwardModel::SphereKd { k } => *k,
            ForwardModel::LotkaVolterraMinPrey { .. } => 2,
        }
    }

    pub fn output_dim(&self) -> usize {
        1
    }

    pub fn name(&self) -> &'static str {
        match self {
            ForwardModel::Circle => "circle-form",
            ForwardModel::DoughnutForm => "doughnut-form",
            ForwardModel::SphereKd { .. } => "sphere",
            ForwardModel::LotkaVolterraMinPrey { .. } => "lotka-volterra-min-prey",
        }
    }
}

/// A set inversion problem: recover the pre-image of `target` under
/// `forward`, restricted to the box `state_space`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub forward: ForwardModel,
    /// The target set U, a box in output space.
    pub target: IntervalBox,
    /// The state space Ω.
    pub state_space: IntervalBox,
}

impl ProblemSpec {
    pub fn new(forward: ForwardModel, target: IntervalBox, state_space: IntervalBox) -> Result<Self> {
        if state_space.dim() != forward.input_dim() {
            return Err(Error::Config(format!(
                "state space has dimension {} but the model expects {}",
                state_space.dim(),
                forward.input_dim()
            )));
        }
        if target.dim() != forward.output_dim() {
            return Err(Error::Config(format!(
                "target has dimension {} but the model outputs {}",
                target.dim(),
                forward.output_dim()
            )));
        }
        if state_space.intervals().iter().any(|iv| iv.width() <= 0.0) {
            return Err(Error::Config(
                "state space must have positive width in every dimension".into(),
            ));
        }
        Ok(Self {
            forward,
            target,
            state_space,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.forward.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.forward.output_dim()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Evaluate F(x).
    pub fn eval_forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        match &self.forward {
            ForwardModel::Circle => Ok(vec![x[0] * x[0] + x[1] * x[1]]),
            ForwardModel::DoughnutForm => Ok(vec![x[0] * x[0] + x[1] * x[1] + x[0] * x[1]]),
            ForwardModel::SphereKd { .. } => Ok(vec![x.iter().map(|v| v * v).sum()]),
            ForwardModel::LotkaVolterraMinPrey {
                p1,
                p3,
                u0,
                v0,
                horizon,
                dt,
            } => {
                let params = LvParams {
                    p1: *p1,
                    p2: x[0],
                    p3: *p3,
                    p4: x[1],
                };
                let traj = integrate_lv(&params, *u0, *v0, *horizon, *dt)?;
                Ok(vec![traj.min_prey])
            }
        }
    }

    /// Natural inclusion function [F]: a box containing F(b), built by
    /// composing interval operations along the model's expression.
    /// Only the algebraic models support this.
    pub fn eval_inclusion(&self, b: &IntervalBox) -> Result<IntervalBox> {
        if b.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: b.dim(),
            });
        }
        match &self.forward {
            ForwardModel::Circle => {
                let out = b.interval(0).sq().add(b.interval(1).sq());
                Ok(IntervalBox::new(vec![out]))
            }
            ForwardModel::DoughnutForm => {
                let out = b
                    .interval(0)
                    .sq()
                    .add(b.interval(1).sq())
                    .add(b.interval(0).mul(b.interval(1)));
                Ok(IntervalBox::new(vec![out]))
            }
            ForwardModel::SphereKd { .. } => {
                let mut out = b.interval(0).sq();
                for i in 1..b.dim() {
                    out = out.add(b.interval(i).sq());
                }
                Ok(IntervalBox::new(vec![out]))
            }
            ForwardModel::LotkaVolterraMinPrey { .. } => Err(Error::UnsupportedModel {
                model: self.forward.name().into(),
            }),
        }
    }

    /// The membership oracle φ: +1 iff F(x) lies in the closed target box.
    pub fn membership(&self, x: &[f64]) -> Result<i8> {
        let out = self.eval_forward(x)?;
        let inside = out
            .iter()
            .zip(self.target.intervals())
            .all(|(&v, iv)| iv.contains(v));
        Ok(if inside { 1 } else { -1 })
    }
}

/// A fixed-step trajectory of the Lotka-Volterra system.
#[derive(Clone, Debug)]
pub struct LvTrajectory {
    pub times: Vec<f64>,
    pub prey: Vec<f64>,
    pub predator: Vec<f64>,
    /// Minimum of `prey` over the integration grid.
    pub min_prey: f64,
}

/// Classical RK4 on du/dt = u(p₁ − p₂v), dv/dt = −v(p₃ − p₄u), on a
/// uniform grid of step `dt` covering [0, T].
pub fn integrate_lv(params: &LvParams, u0: f64, v0: f64, t_end: f64, dt: f64) -> Result<LvTrajectory> {
    if !(dt > 0.0) || t_end < dt {
        return Err(Error::Config(format!(
            "integration needs dt > 0 and T >= dt (got dt={dt}, T={t_end})"
        )));
    }
    let steps = (t_end / dt).round() as usize;
    let f = |u: f64, v: f64| -> (f64, f64) {
        (u * (params.p1 - params.p2 * v), -v * (params.p3 - params.p4 * u))
    };
    let mut times = Vec::with_capacity(steps + 1);
    let mut prey = Vec::with_capacity(steps + 1);
    let mut pred = Vec::with_capacity(steps + 1);
    let (mut u, mut v) = (u0, v0);
    let mut min_prey = u0;
    times.push(0.0);
    prey.push(u);
    pred.push(v);
    for i in 0..steps {
        let (k1u, k1v) = f(u, v);
        let (k2u, k2v) = f(u + 0.5 * dt * k1u, v + 0.5 * dt * k1v);
        let (k3u, k3v) = f(u + 0.5 * dt * k2u, v + 0.5 * dt * k2v);
        let (k4u, k4v) = f(u + dt * k3u, v + dt * k3v);
        u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        let t = (i + 1) as f64 * dt;
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::IntegrationBlowup { time: t });
        }
        times.push(t);
        prey.push(u);
        pred.push(v);
        if u < min_prey {
            min_prey = u;
        }
    }
    Ok(LvTrajectory {
        times,
        prey,
        predator: pred,
        min_prey,
    })
}

/// Minimum prey value only, without materializing the trajectory.
pub fn lv_min_prey(params: &LvParams, u0: f64, v0: f64, t_end: f64, dt: f64) -> Result<f64> {
    if !(dt > 0.0) || t_end < dt {
        return Err(Error::Config(format!(
            "integration needs dt > 0 and T >= dt (got dt={dt}, T={t_end})"
        )));
    }
    let steps = (t_end / dt).round() as usize;
    let (p1, p2, p3, p4) = (params.p1, params.p2, params.p3, params.p4);
    let (mut u, mut v) = (u0, v0);
    let mut min_prey = u0;
    for i in 0..steps {
        let k1u = u * (p1 - p2 * v);
        let k1v = -v * (p3 - p4 * u);
        let (u2, v2) = (u + 0.5 * dt * k1u, v + 0.5 * dt * k1v);
        let k2u = u2 * (p1 - p2 * v2);
        let k2v = -v2 * (p3 - p4 * u2);
        let (u3, v3) = (u + 0.5 * dt * k2u, v + 0.5 * dt * k2v);
        let k3u = u3 * (p1 - p2 * v3);
        let k3v = -v3 * (p3 - p4 * u3);
        let (u4, v4) = (u + dt * k3u, v + dt * k3v);
        let k4u = u4 * (p1 - p2 * v4);
        let k4v = -v4 * (p3 - p4 * u4);
        u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::IntegrationBlowup {
                time: (i + 1) as f64 * dt,
            });
        }
        if u < min_prey {
            min_prey = u;
        }
    }
    Ok(min_prey)
}

/// Default integration step for the Lotka-Volterra oracle.
pub const LV_DEFAULT_DT: f64 = 1e-2;
/// Default integration horizon.
pub const LV_DEFAULT_HORIZON: f64 = 20.0;
/// Upper bound standing in for +∞ in the min-prey target box; far above
/// any attainable prey population on the built-in state space.
pub const LV_TARGET_UPPER: f64 = 1e6;

/// The built-in problems, addressable by name.
pub const BUILTIN_PROBLEMS: [&str; 10] = [
    "circle",
    "ring",
    "doughnut",
    "sphere-3d",
    "sphere-4d",
    "sphere-5d",
    "sphere-6d",
    "sphere-7d",
    "sphere-8d",
    "lotka-volterra",
];

/// Look up one of the built-in problems.
pub fn builtin_problem(name: &str) -> Result<ProblemSpec> {
    let target = |lo: f64, hi: f64| IntervalBox::from_bounds(&[(lo, hi)]);
    match name {
        "circle" => ProblemSpec::new(ForwardModel::Circle, target(0.0, 2.0), IntervalBox::cube(-3.0, 3.0, 2)),
        "ring" => ProblemSpec::new(ForwardModel::Circle, target(1.0, 2.0), IntervalBox::cube(-3.0, 3.0, 2)),
        "doughnut" => ProblemSpec::new(
            ForwardModel::DoughnutForm,
            target(1.0, 2.0),
            IntervalBox::cube(-3.0, 3.0, 2),
        ),
        "sphere-3d" => ProblemSpec::new(
            ForwardModel::SphereKd { k: 3 },
            target(0.0, 0.5),
            IntervalBox::cube(-1.5, 1.5, 3),
        ),
        "sphere-4d" => ProblemSpec::new(
            ForwardModel::SphereKd { k: 4 },
            target(0.0, 0.25),
            IntervalBox::cube(-1.0, 1.0, 4),
        ),
        "sphere-5d" | "sphere-6d" | "sphere-7d" | "sphere-8d" => {
            let k = name[7..8].parse::<usize>().expect("digit in name");
            ProblemSpec::new(
                ForwardModel::SphereKd { k },
                target(0.0, 0.25),
                IntervalBox::cube(-0.75, 0.75, k),
            )
        }
        "lotka-volterra" => ProblemSpec::new(
            ForwardModel::LotkaVolterraMinPrey {
                p1: 1.0,
                p3: 1.0,
                u0: 50.0,
                v0: 50.0,
                horizon: LV_DEFAULT_HORIZON,
                dt: LV_DEFAULT_DT,
            },
            target(10.0, LV_TARGET_UPPER),
            IntervalBox::from_bounds(&[(0.01, 0.1), (0.01, 0.1)]),
        ),
        other => Err(Error::Config(format!(
            "unknown problem `{other}`; built-ins are {BUILTIN_PROBLEMS:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Interval;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fig5_params() -> LvParams {
        LvParams {
            p1: 1.0,
            p2: 0.02,
            p3: 1.5,
            p4: 0.02,
        }
    }

    #[test]
    fn eval_forward_examples() {
        let circle = builtin_problem("circle").unwrap();
        assert_eq!(circle.eval_forward(&[0.0, 0.0]).unwrap(), vec![0.0]);

        let doughnut = builtin_problem("doughnut").unwrap();
        assert_eq!(doughnut.eval_forward(&[1.0, 1.0]).unwrap(), vec![3.0]);

        assert!(matches!(
            circle.eval_forward(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lv_equilibrium_start_is_constant() {
        // (u*, v*) = (p3/p4, p1/p2) = (75, 50) for the fig-5 rates.
        let p = fig5_params();
        let traj = integrate_lv(&p, 75.0, 50.0, 20.0, 1e-2).unwrap();
        assert_relative_eq!(traj.min_prey, 75.0, max_relative = 1e-12);
        for &u in &traj.prey {
            assert_relative_eq!(u, 75.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn lv_oscillates_from_off_equilibrium_start() {
        // Start above the predator equilibrium v* = p1/p2 = 50 so the
        // prey dips first, then overshoots u* = p3/p4 = 75.
        let p = fig5_params();
        let traj = integrate_lv(&p, 50.0, 60.0, 20.0, 1e-2).unwrap();
        let max_prey = traj.prey.iter().cloned().fold(f64::MIN, f64::max);
        assert!(traj.min_prey < 50.0);
        assert!(max_prey > 75.0, "prey should overshoot the equilibrium");
        // Prey returns near its start within the horizon (periodic orbit).
        let last_quarter = &traj.prey[traj.prey.len() * 3 / 4..];
        assert!(last_quarter.iter().any(|&u| (u - 50.0).abs() < 10.0));
    }

    #[test]
    fn lv_zero_predation_decouples_prey() {
        let p = LvParams {
            p1: 1.0,
            p2: 0.0,
            p3: 1.5,
            p4: 0.02,
        };
        let traj = integrate_lv(&p, 50.0, 50.0, 5.0, 1e-3).unwrap();
        assert_eq!(traj.min_prey, 50.0);
        let end = *traj.prey.last().unwrap();
        assert_relative_eq!(end, 50.0 * (5.0f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn lv_min_prey_matches_trajectory() {
        let p = fig5_params();
        let traj = integrate_lv(&p, 50.0, 50.0, 20.0, 1e-2).unwrap();
        let m = lv_min_prey(&p, 50.0, 50.0, 20.0, 1e-2).unwrap();
        assert_eq!(traj.min_prey, m);
    }

    #[test]
    fn inclusion_examples() {
        let circle = builtin_problem("circle").unwrap();
        let b = IntervalBox::from_bounds(&[(1.0, 2.0), (0.0, 1.0)]);
        let out = circle.eval_inclusion(&b).unwrap();
        assert_eq!(out.interval(0), Interval::new(1.0, 5.0));

        let b = IntervalBox::from_bounds(&[(1.0, 1.0), (1.0, 1.0)]);
        let out = circle.eval_inclusion(&b).unwrap();
        assert_eq!(out.interval(0), Interval::new(2.0, 2.0));

        let sphere = builtin_problem("sphere-3d").unwrap();
        let b = IntervalBox::from_bounds(&[(0.0, 0.1); 3]);
        let out = sphere.eval_inclusion(&b).unwrap();
        assert_relative_eq!(out.interval(0).lo, 0.0);
        assert_relative_eq!(out.interval(0).hi, 0.03, max_relative = 1e-12);

        let lv = builtin_problem("lotka-volterra").unwrap();
        let b = IntervalBox::from_bounds(&[(0.01, 0.1), (0.01, 0.1)]);
        assert!(matches!(
            lv.eval_inclusion(&b),
            Err(Error::UnsupportedModel { .. })
        ));
    }

    #[test]
    fn membership_examples() {
        let circle = builtin_problem("circle").unwrap();
        assert_eq!(circle.membership(&[0.0, 0.0]).unwrap(), 1);

        let ring = builtin_problem("ring").unwrap();
        assert_eq!(ring.membership(&[0.0, 0.0]).unwrap(), -1);

        // F₂(1,0) = 1 sits on the boundary of the closed target [1,2].
        let doughnut = builtin_problem("doughnut").unwrap();
        assert_eq!(doughnut.membership(&[1.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn builtin_names_resolve() {
        for name in BUILTIN_PROBLEMS {
            builtin_problem(name).unwrap();
        }
        assert!(builtin_problem("nope").is_err());
    }

    #[test]
    fn problem_spec_json_roundtrip() {
        let spec = builtin_problem("lotka-volterra").unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let back: ProblemSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }

    proptest! {
        #[test]
        fn forward_value_lies_in_inclusion(
            which in 0usize..3,
            corner in proptest::collection::vec(-2.0f64..2.0, 3),
            widths in proptest::collection::vec(0.0f64..1.5, 3),
            ts in proptest::collection::vec(0.0f64..=1.0, 3),
        ) {
            let name = ["circle", "doughnut", "sphere-3d"][which];
            let spec = builtin_problem(name).unwrap();
            let d = spec.input_dim();
            let b = IntervalBox::new(
                (0..d).map(|i| Interval::new(corner[i], corner[i] + widths[i])).collect());
            let x: Vec<f64> = (0..d).map(|i| corner[i] + ts[i] * widths[i]).collect();
            let out = spec.eval_forward(&x).unwrap();
            let incl = spec.eval_inclusion(&b).unwrap();
            let tol = 1e-9 * (1.0 + incl.interval(0).hi.abs());
            prop_assert!(incl.interval(0).lo - tol <= out[0]);
            prop_assert!(out[0] <= incl.interval(0).hi + tol);
        }
    }
}
