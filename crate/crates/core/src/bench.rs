//! Benchmark harness: ground-truth grids, accuracy and timing
//! measurement, and suite reports.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{IntervalBox, Subpaving};
use crate::models::{lv_min_prey, ForwardModel, LvParams, ProblemSpec};
use crate::oasis::{run_oasis, OasisConfig, OasisRun};
use crate::sivia::{sivia_invert, subpaving_classify, SubpavingIndex, DEFAULT_BOX_BUDGET};
use crate::svm::SvmModel;

/// Cap on the total number of grid points.
pub const DEFAULT_GRID_POINT_BUDGET: u128 = 100_000_000;

/// An evenly spaced test grid over a box, both endpoints included in
/// every dimension. Points are indexed lexicographically (last dimension
/// fastest) and generated on demand; big grids are never materialized.
#[derive(Clone, Debug)]
pub struct Grid {
    omega: IntervalBox,
    resolution: usize,
}

impl Grid {
    pub fn new(omega: &IntervalBox, resolution: usize, budget: u128) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Config(format!("grid resolution must be >= 2, got {resolution}")));
        }
        let total = (resolution as u128).pow(omega.dim() as u32);
        if total > budget {
            return Err(Error::GridBudgetExceeded {
                requested: total,
                budget,
            });
        }
        Ok(Self {
            omega: omega.clone(),
            resolution,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn omega(&self) -> &IntervalBox {
        &self.omega
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of grid line `i` along dimension `d`.
    pub fn coord(&self, d: usize, i: usize) -> f64 {
        let iv = self.omega.interval(d);
        iv.lo + iv.width() * i as f64 / (self.resolution - 1) as f64
    }

    pub fn point(&self, mut index: usize) -> Vec<f64> {
        let dim = self.dim();
        let mut out = vec![0.0; dim];
        for d in (0..dim).rev() {
            out[d] = self.coord(d, index % self.resolution);
            index /= self.resolution;
        }
        out
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// The full Cartesian test grid for a state space.
pub fn grid_testset(omega: &IntervalBox, resolution: usize) -> Result<Grid> {
    Grid::new(omega, resolution, DEFAULT_GRID_POINT_BUDGET)
}

fn forward_scalar(model: &ForwardModel, p: &[f64]) -> Result<f64> {
    Ok(match model {
        ForwardModel::Circle => p[0] * p[0] + p[1] * p[1],
        ForwardModel::DoughnutForm => p[0] * p[0] + p[1] * p[1] + p[0] * p[1],
        ForwardModel::SphereKd { .. } => p.iter().map(|v| v * v).sum(),
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
                p2: p[0],
                p3: *p3,
                p4: p[1],
            };
            lv_min_prey(&params, *u0, *v0, *horizon, *dt)?
        }
    })
}

/// Oracle labels for every grid point, in grid index order.
pub fn oracle_labels(spec: &ProblemSpec, grid: &Grid) -> Result<Vec<i8>> {
    let dim = grid.dim();
    let res = grid.resolution();
    let target = spec.target.interval(0);
    let mut labels = Vec::with_capacity(grid.len());
    let mut idx = vec![0usize; dim];
    let mut point: Vec<f64> = (0..dim).map(|d| grid.coord(d, 0)).collect();
    loop {
        let v = forward_scalar(&spec.forward, &point)?;
        labels.push(if target.contains(v) { 1 } else { -1 });
        // Odometer, last dimension fastest.
        let mut d = dim;
        loop {
            if d == 0 {
                return Ok(labels);
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < res {
                point[d] = grid.coord(d, idx[d]);
                break;
            }
            idx[d] = 0;
            point[d] = grid.coord(d, 0);
        }
    }
}

/// Predicted labels of an SVM over a full grid.
///
/// The GRBF kernel factors across dimensions on a Cartesian grid, so the
/// per-dimension kernel factors are tabulated once and combined by
/// running prefix products; each grid point then costs one fused
/// multiply-add per support vector instead of a distance and an exp.
/// Agrees with `SvmModel::predict` up to floating-point associativity.
pub fn svm_grid_predictions(model: &SvmModel, grid: &Grid) -> Result<Vec<i8>> {
    if model.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: grid.dim(),
        });
    }
    let dim = grid.dim();
    let res = grid.resolution();
    let n_sv = model.n_support();
    let inv = 1.0 / (2.0 * model.gamma * model.gamma);

    // tables[d][i * n_sv + k] = exp(−(grid_d(i) − sv_k[d])² / 2γ²)
    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for d in 0..dim {
        let mut t = vec![0.0; res * n_sv];
        for i in 0..res {
            let x = grid.coord(d, i);
            for (k, sv) in model.support_points.iter().enumerate() {
                let diff = x - sv[d];
                t[i * n_sv + k] = (-diff * diff * inv).exp();
            }
        }
        tables.push(t);
    }

    let base: Vec<f64> = model
        .coefficients
        .iter()
        .zip(&model.support_labels)
        .map(|(&b, &y)| b * y as f64)
        .collect();

    let mut out = Vec::with_capacity(grid.len());
    let mut weights = base;
    let mut stack: Vec<Vec<f64>> = Vec::new();
    let mut idx = vec![0usize; dim.saturating_sub(1)];

    loop {
        // Multiply down to the last dimension.
        while stack.len() < dim - 1 {
            let d = stack.len();
            let i = idx[d];
            let row = &tables[d][i * n_sv..(i + 1) * n_sv];
            let next: Vec<f64> = weights.iter().zip(row).map(|(w, t)| w * t).collect();
            stack.push(std::mem::replace(&mut weights, next));
        }
        // Sweep the fastest dimension.
        let last = &tables[dim - 1];
        for i in 0..res {
            let row = &last[i * n_sv..(i + 1) * n_sv];
            let mut psi = model.bias;
            for (w, t) in weights.iter().zip(row) {
                psi += w * t;
            }
            out.push(if psi >= 0.0 { 1 } else { -1 });
        }
        // Advance the outer indices.
        let mut d = dim - 1;
        loop {
            if d == 0 {
                return Ok(out);
            }
            d -= 1;
            weights = stack.pop().expect("stack tracks depth");
            idx[d] += 1;
            if idx[d] < res {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// A classifier under evaluation.
pub enum Classifier<'a> {
    Svm(&'a SvmModel),
    /// Linear scan over the subpaving boxes.
    PavingScan(&'a Subpaving),
    /// Bucket-indexed lookup over the same subpaving.
    PavingIndex(&'a SubpavingIndex<'a>),
}

impl Classifier<'_> {
    fn classify_point(&self, x: &[f64]) -> Result<i8> {
        match self {
            Classifier::Svm(m) => m.predict(x),
            Classifier::PavingScan(sp) => subpaving_classify(sp, x),
            Classifier::PavingIndex(ix) => ix.classify(x),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    /// Mean per-point prediction time in milliseconds, measured over at
    /// least 10⁴ single-point calls after warmup.
    pub mean_prediction_ms: f64,
    pub n_points: usize,
}

/// Fraction of grid points where the classifier matches the oracle
/// labels, plus a per-point timing measurement.
///
/// The accuracy pass batches where it can (tabulated grid evaluation for
/// the SVM, bucket index for subpavings); timing always exercises the
/// plain single-point call path of the classifier as given.
pub fn evaluate_accuracy(classifier: &Classifier, labels: &[i8], grid: &Grid) -> Result<Evaluation> {
    let n = grid.len();
    assert_eq!(labels.len(), n, "oracle labels must cover the grid");

    let correct = match classifier {
        Classifier::Svm(m) => {
            let preds = svm_grid_predictions(m, grid)?;
            preds.iter().zip(labels).filter(|(p, l)| p == l).count()
        }
        Classifier::PavingScan(sp) => {
            // The index is an exact lookup accelerator for the same
            // subpaving; the linear path stays for timing and tests.
            let ix = SubpavingIndex::build(sp);
            let mut correct = 0usize;
            for (i, &l) in labels.iter().enumerate() {
                if ix.classify(&grid.point(i))? == l {
                    correct += 1;
                }
            }
            correct
        }
        Classifier::PavingIndex(ix) => {
            let mut correct = 0usize;
            for (i, &l) in labels.iter().enumerate() {
                if ix.classify(&grid.point(i))? == l {
                    correct += 1;
                }
            }
            correct
        }
    };

    let mean_prediction_ms = measure_prediction_ms(classifier, grid)?;
    Ok(Evaluation {
        accuracy: correct as f64 / n as f64,
        mean_prediction_ms,
        n_points: n,
    })
}

const MIN_TIMED_CALLS: usize = 10_000;

fn measure_prediction_ms(classifier: &Classifier, grid: &Grid) -> Result<f64> {
    let n = grid.len();
    let stride = (n / (2 * MIN_TIMED_CALLS)).max(1);
    let mut points: Vec<Vec<f64>> = (0..n).step_by(stride).map(|i| grid.point(i)).collect();
    while points.len() < MIN_TIMED_CALLS {
        let m = points.len();
        for i in 0..m.min(MIN_TIMED_CALLS - points.len()) {
            points.push(points[i].clone());
        }
    }
    for p in points.iter().take(100) {
        std::hint::black_box(classifier.classify_point(p)?);
    }
    let start = Instant::now();
    for p in &points {
        std::hint::black_box(classifier.classify_point(p)?);
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(elapsed * 1e3 / points.len() as f64)
}

/// Per-problem experiment defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemDefaults {
    pub resolution: usize,
    pub n_init: usize,
    pub n_total: usize,
    /// `None` when the model has no inclusion function.
    pub sivia_epsilon: Option<f64>,
}

pub fn problem_defaults(name: &str) -> Result<ProblemDefaults> {
    let d = match name {
        "circle" | "ring" | "doughnut" => ProblemDefaults {
            resolution: 601,
            n_init: 100,
            n_total: 500,
            sivia_epsilon: Some(0.05),
        },
        "sphere-3d" => ProblemDefaults {
            resolution: 151,
            n_init: 100,
            n_total: 500,
            sivia_epsilon: Some(0.1),
        },
        "sphere-4d" => ProblemDefaults {
            resolution: 41,
            n_init: 100,
            n_total: 500,
            sivia_epsilon: Some(0.1),
        },
        "sphere-5d" | "sphere-6d" | "sphere-7d" | "sphere-8d" => {
            let resolution = match name {
                "sphere-5d" => 31,
                "sphere-6d" => 18,
                "sphere-7d" => 12,
                _ => 9,
            };
            ProblemDefaults {
                resolution,
                n_init: 100,
                n_total: 500,
                // 1% of the state-space width.
                sivia_epsilon: Some(0.015),
            }
        }
        "lotka-volterra" => ProblemDefaults {
            resolution: 301,
            n_init: 400,
            n_total: 800,
            sivia_epsilon: None,
        },
        other => {
            return Err(Error::Config(format!("no benchmark defaults for `{other}`")));
        }
    };
    Ok(d)
}

/// One row of a benchmark report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchRow {
    pub problem: String,
    pub method: String,
    pub seed: Option<u64>,
    pub status: String,
    pub accuracy: Option<f64>,
    pub train_seconds: Option<f64>,
    pub mean_prediction_ms: Option<f64>,
    pub resolution: usize,
    /// Sample count for the active method, box count for the baseline.
    pub size: Option<usize>,
    /// γ for the active method, ε for the baseline.
    pub parameter: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "problem",
            "method",
            "seed",
            "status",
            "accuracy",
            "train_seconds",
            "mean_prediction_ms",
            "resolution",
            "size",
            "parameter",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            wtr.write_record(&[
                r.problem.clone(),
                r.method.clone(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
                r.status.clone(),
                opt(r.accuracy),
                opt(r.train_seconds),
                opt(r.mean_prediction_ms),
                r.resolution.to_string(),
                r.size.map(|s| s.to_string()).unwrap_or_default(),
                opt(r.parameter),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Suite configuration: which problems, which seeds, which methods.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub problems: Vec<String>,
    pub seeds: Vec<u64>,
    pub run_oasis: bool,
    pub run_sivia: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            problems: vec!["circle".into(), "ring".into(), "doughnut".into()],
            seeds: vec![1, 2, 3, 4, 5],
            run_oasis: true,
            run_sivia: true,
        }
    }
}

/// A timed active run together with its grid evaluation.
pub struct OasisBenchOutcome {
    pub run: OasisRun,
    pub evaluation: Evaluation,
    pub train_seconds: f64,
}

/// Run the active method on one problem and score it on the standard
/// grid. Training time includes calibration, per the harness contract.
pub fn bench_oasis(spec: &ProblemSpec, config: &OasisConfig, resolution: usize, labels: &[i8]) -> Result<OasisBenchOutcome> {
    let grid = grid_testset(&spec.state_space, resolution)?;
    let started = Instant::now();
    let run = run_oasis(spec, config)?;
    let train_seconds = started.elapsed().as_secs_f64();
    let evaluation = evaluate_accuracy(&Classifier::Svm(&run.final_model), labels, &grid)?;
    Ok(OasisBenchOutcome {
        run,
        evaluation,
        train_seconds,
    })
}

/// Run the configured suite; individual problem failures become report
/// rows instead of aborting the suite.
pub fn run_benchmark(suite: &SuiteConfig) -> Result<BenchReport> {
    let mut report = BenchReport::default();
    for name in &suite.problems {
        let spec = crate::models::builtin_problem(name)?;
        let defaults = problem_defaults(name)?;
        let grid = grid_testset(&spec.state_space, defaults.resolution)?;
        let labels = oracle_labels(&spec, &grid)?;

        if suite.run_oasis {
            let mut accs = Vec::new();
            for &seed in &suite.seeds {
                let config = OasisConfig::new(defaults.n_init, defaults.n_total, seed);
                match bench_oasis(&spec, &config, defaults.resolution, &labels) {
                    Ok(out) => {
                        accs.push(out.evaluation.accuracy);
                        report.rows.push(BenchRow {
                            problem: name.clone(),
                            method: "oasis".into(),
                            seed: Some(seed),
                            status: "ok".into(),
                            accuracy: Some(out.evaluation.accuracy),
                            train_seconds: Some(out.train_seconds),
                            mean_prediction_ms: Some(out.evaluation.mean_prediction_ms),
                            resolution: defaults.resolution,
                            size: Some(out.run.samples.len()),
                            parameter: Some(out.run.final_gamma),
                        });
                    }
                    Err(e) => report.rows.push(BenchRow {
                        problem: name.clone(),
                        method: "oasis".into(),
                        seed: Some(seed),
                        status: format!("error: {e}"),
                        accuracy: None,
                        train_seconds: None,
                        mean_prediction_ms: None,
                        resolution: defaults.resolution,
                        size: None,
                        parameter: None,
                    }),
                }
            }
            if accs.len() > 1 {
                let mean = accs.iter().sum::<f64>() / accs.len() as f64;
                let var = accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (accs.len() - 1) as f64;
                report.rows.push(BenchRow {
                    problem: name.clone(),
                    method: "oasis-mean".into(),
                    seed: None,
                    status: format!("stddev {:.5}", var.sqrt()),
                    accuracy: Some(mean),
                    train_seconds: None,
                    mean_prediction_ms: None,
                    resolution: defaults.resolution,
                    size: None,
                    parameter: None,
                });
            }
        }

        if suite.run_sivia {
            match defaults.sivia_epsilon {
                None => report.rows.push(BenchRow {
                    problem: name.clone(),
                    method: "sivia".into(),
                    seed: None,
                    status: "unsupported (no inclusion function)".into(),
                    accuracy: None,
                    train_seconds: None,
                    mean_prediction_ms: None,
                    resolution: defaults.resolution,
                    size: None,
                    parameter: None,
                }),
                Some(eps) => {
                    let started = Instant::now();
                    match sivia_invert(&spec, eps, DEFAULT_BOX_BUDGET) {
                        Ok(sp) => {
                            let train_seconds = started.elapsed().as_secs_f64();
                            let eval = evaluate_accuracy(&Classifier::PavingScan(&sp), &labels, &grid)?;
                            report.rows.push(BenchRow {
                                problem: name.clone(),
                                method: "sivia".into(),
                                seed: None,
                                status: "ok".into(),
                                accuracy: Some(eval.accuracy),
                                train_seconds: Some(train_seconds),
                                mean_prediction_ms: Some(eval.mean_prediction_ms),
                                resolution: defaults.resolution,
                                size: Some(sp.total_boxes()),
                                parameter: Some(eps),
                            });
                            let ix = SubpavingIndex::build(&sp);
                            let eval_ix = evaluate_accuracy(&Classifier::PavingIndex(&ix), &labels, &grid)?;
                            report.rows.push(BenchRow {
                                problem: name.clone(),
                                method: "sivia-indexed".into(),
                                seed: None,
                                status: "ok".into(),
                                accuracy: Some(eval_ix.accuracy),
                                train_seconds: Some(train_seconds),
                                mean_prediction_ms: Some(eval_ix.mean_prediction_ms),
                                resolution: defaults.resolution,
                                size: Some(sp.total_boxes()),
                                parameter: Some(eps),
                            });
                        }
                        Err(Error::BoxBudgetExceeded { budget, depth }) => report.rows.push(BenchRow {
                            problem: name.clone(),
                            method: "sivia".into(),
                            seed: None,
                            status: format!("resource error: budget {budget} exceeded at depth {depth}"),
                            accuracy: None,
                            train_seconds: Some(started.elapsed().as_secs_f64()),
                            mean_prediction_ms: None,
                            resolution: defaults.resolution,
                            size: None,
                            parameter: Some(eps),
                        }),
                        Err(e) => report.rows.push(BenchRow {
                            problem: name.clone(),
                            method: "sivia".into(),
                            seed: None,
                            status: format!("error: {e}"),
                            accuracy: None,
                            train_seconds: None,
                            mean_prediction_ms: None,
                            resolution: defaults.resolution,
                            size: None,
                            parameter: Some(eps),
                        }),
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin_problem;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_examples() {
        let omega = IntervalBox::cube(-3.0, 3.0, 2);
        let g = grid_testset(&omega, 601).unwrap();
        assert_eq!(g.len(), 601 * 601);
        assert_relative_eq!(g.coord(0, 1) - g.coord(0, 0), 0.01, max_relative = 1e-10);
        assert_eq!(g.point(0), vec![-3.0, -3.0]);
        assert_eq!(g.point(g.len() - 1), vec![3.0, 3.0]);

        let line = grid_testset(&IntervalBox::from_bounds(&[(0.0, 1.0)]), 2).unwrap();
        let pts: Vec<Vec<f64>> = line.points().collect();
        assert_eq!(pts, vec![vec![0.0], vec![1.0]]);

        let omega8 = IntervalBox::cube(-0.75, 0.75, 8);
        let g8 = grid_testset(&omega8, 9).unwrap();
        assert_eq!(g8.len(), 9usize.pow(8));

        assert!(matches!(
            grid_testset(&omega8, 41),
            Err(Error::GridBudgetExceeded { .. })
        ));
    }

    #[test]
    fn oracle_labels_match_membership() {
        for name in ["circle", "doughnut", "sphere-3d"] {
            let spec = builtin_problem(name).unwrap();
            let grid = grid_testset(&spec.state_space, 7).unwrap();
            let labels = oracle_labels(&spec, &grid).unwrap();
            for (i, p) in grid.points().enumerate() {
                assert_eq!(labels[i], spec.membership(&p).unwrap(), "{name} point {p:?}");
            }
        }
    }

    #[test]
    fn grid_predictions_match_pointwise_predict() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let model = SvmModel {
            support_points: (0..7)
                .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
                .collect(),
            support_labels: vec![1, -1, 1, -1, 1, -1, 1],
            coefficients: (0..7).map(|_| rng.gen_range(0.1..2.0)).collect(),
            bias: -0.2,
            gamma: 0.8,
            box_bound: 1e6,
        };
        let grid = grid_testset(&IntervalBox::cube(-2.0, 2.0, 3), 11).unwrap();
        let fast = svm_grid_predictions(&model, &grid).unwrap();
        for (i, p) in grid.points().enumerate() {
            assert_eq!(fast[i], model.predict(&p).unwrap(), "at {p:?}");
        }
    }

    #[test]
    fn perfect_classifier_scores_one() {
        let spec = builtin_problem("circle").unwrap();
        let grid = grid_testset(&spec.state_space, 61).unwrap();
        let labels = oracle_labels(&spec, &grid).unwrap();
        let sp = crate::sivia::sivia_invert(&spec, 0.05, DEFAULT_BOX_BUDGET).unwrap();
        let ix = SubpavingIndex::build(&sp);
        let eval = evaluate_accuracy(&Classifier::PavingIndex(&ix), &labels, &grid).unwrap();
        assert!(eval.accuracy > 0.97);
        assert!(eval.mean_prediction_ms > 0.0);
    }

    #[test]
    fn constant_negative_classifier_matches_area_fraction() {
        // A model with zero coefficients and negative bias predicts −1
        // everywhere; its accuracy is the fraction of the grid outside
        // the disk of radius √2.
        let spec = builtin_problem("circle").unwrap();
        let grid = grid_testset(&spec.state_space, 601).unwrap();
        let labels = oracle_labels(&spec, &grid).unwrap();
        let constant = SvmModel {
            support_points: vec![vec![0.0, 0.0]],
            support_labels: vec![1],
            coefficients: vec![0.0],
            bias: -1.0,
            gamma: 1.0,
            box_bound: 1e6,
        };
        let eval = evaluate_accuracy(&Classifier::Svm(&constant), &labels, &grid).unwrap();
        let outside = 1.0 - 2.0 * std::f64::consts::PI / 36.0;
        assert!((eval.accuracy - outside).abs() < 0.003, "accuracy {}", eval.accuracy);
    }

    #[test]
    fn empty_suite_is_empty_report() {
        let suite = SuiteConfig {
            problems: vec![],
            seeds: vec![1],
            run_oasis: true,
            run_sivia: true,
        };
        let report = run_benchmark(&suite).unwrap();
        assert!(report.rows.is_empty());
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn report_csv_shape() {
        let report = BenchReport {
            rows: vec![BenchRow {
                problem: "circle".into(),
                method: "oasis".into(),
                seed: Some(1),
                status: "ok".into(),
                accuracy: Some(0.99),
                train_seconds: Some(1.5),
                mean_prediction_ms: Some(0.001),
                resolution: 601,
                size: Some(500),
                parameter: Some(0.8),
            }],
        };
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("circle,oasis,1,ok,0.99"));
    }
}
