//! Active sampling loop: random initialization, per-iteration width
//! calibration and retraining, projection-based query synthesis, and
//! labeling through the membership oracle.

use std::time::Instant;

use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ProblemSpec;
use crate::project::{nearest_point_on_manifold, ProjectionOptions};
use crate::svm::{calibrate_gamma, GammaSchedule, GramCache, ScanDirection, SvmModel, TrainOptions};

/// Where a sample came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleOrigin {
    Random,
    Active,
    FallbackRandom,
}

impl SampleOrigin {
    pub fn as_str(&self) -> &'static str {
        match self {
            SampleOrigin::Random => "random",
            SampleOrigin::Active => "active",
            SampleOrigin::FallbackRandom => "fallback-random",
        }
    }
}

/// A state-space point with its oracle label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabeledSample {
    pub point: Vec<f64>,
    pub label: i8,
    pub origin: SampleOrigin,
    /// 0 for initialization samples, else the active iteration that
    /// produced the sample.
    pub iteration: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OasisConfig {
    /// Random points drawn before the active loop.
    pub n_init: usize,
    /// Total sample budget N.
    pub n_total: usize,
    pub rng_seed: u64,
    /// Width schedule; `None` uses the default derived from Ω.
    pub schedule: Option<GammaSchedule>,
    pub train: TrainOptions,
    pub projection: ProjectionOptions,
    /// Projected points closer than this to an existing sample fall back
    /// to the random draw.
    pub duplicate_tol: f64,
}

impl OasisConfig {
    pub fn new(n_init: usize, n_total: usize, rng_seed: u64) -> Self {
        Self {
            n_init,
            n_total,
            rng_seed,
            schedule: None,
            train: TrainOptions::default(),
            projection: ProjectionOptions::default(),
            duplicate_tol: 1e-10,
        }
    }
}

/// One line of the per-iteration log.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub gamma: f64,
    pub direction: ScanDirection,
    /// |ψ| at the accepted sample; NaN when the projection never ran to
    /// a usable point.
    pub residual: f64,
    pub fallback: bool,
    /// Dual solves spent on calibration this iteration.
    pub trains: usize,
    pub millis: f64,
}

/// Output of a full active run.
#[derive(Clone, Debug)]
pub struct OasisRun {
    pub samples: Vec<LabeledSample>,
    pub final_model: SvmModel,
    pub final_gamma: f64,
    pub log: Vec<IterationLog>,
}

impl OasisRun {
    /// Samples CSV: one row per point with label, origin, and iteration.
    pub fn write_samples_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let dim = self.samples.first().map_or(0, |s| s.point.len());
        let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
        header.extend(["label".into(), "origin".into(), "iteration".into()]);
        wtr.write_record(&header)?;
        for s in &self.samples {
            let mut rec: Vec<String> = s.point.iter().map(|v| v.to_string()).collect();
            rec.push(s.label.to_string());
            rec.push(s.origin.as_str().into());
            rec.push(s.iteration.to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_log_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["iteration", "gamma", "direction", "residual", "fallback", "trains", "millis"])?;
        for l in &self.log {
            wtr.write_record(&[
                l.iteration.to_string(),
                l.gamma.to_string(),
                format!("{:?}", l.direction),
                l.residual.to_string(),
                l.fallback.to_string(),
                l.trains.to_string(),
                format!("{:.3}", l.millis),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn draw_uniform(omega: &crate::geometry::IntervalBox, rng: &mut ChaCha8Rng) -> Vec<f64> {
    omega
        .intervals()
        .iter()
        .map(|iv| iv.lo + rng.gen::<f64>() * iv.width())
        .collect()
}

/// Draw `n_init` uniform points with oracle labels; whole batches are
/// appended until both labels are present, up to 100 × n_init draws.
pub fn sample_initial(spec: &ProblemSpec, n_init: usize, rng: &mut ChaCha8Rng) -> Result<Vec<LabeledSample>> {
    if n_init == 0 {
        return Err(Error::Config("n_init must be at least 1".into()));
    }
    let mut samples: Vec<LabeledSample> = Vec::with_capacity(n_init);
    let budget = 100 * n_init;
    while samples.len() < budget {
        for _ in 0..n_init {
            let point = draw_uniform(&spec.state_space, rng);
            let label = spec.membership(&point)?;
            samples.push(LabeledSample {
                point,
                label,
                origin: SampleOrigin::Random,
                iteration: 0,
            });
        }
        let has_pos = samples.iter().any(|s| s.label == 1);
        let has_neg = samples.iter().any(|s| s.label == -1);
        if has_pos && has_neg {
            return Ok(samples);
        }
    }
    Err(Error::InitialSamplingFailed { draws: samples.len() })
}

/// Run the full active loop and return the sample sequence, the final
/// separating model, and the per-iteration log.
///
/// If initialization had to oversample to see both labels, the sample
/// count may exceed `n_total` and the active loop is shortened (or
/// skipped) accordingly.
pub fn run_oasis(spec: &ProblemSpec, config: &OasisConfig) -> Result<OasisRun> {
    if config.n_init < 1 || config.n_init >= config.n_total {
        return Err(Error::Config(format!(
            "need 1 <= n_init < n_total (got {} and {})",
            config.n_init, config.n_total
        )));
    }
    let schedule = config
        .schedule
        .unwrap_or_else(|| GammaSchedule::default_for(&spec.state_space));
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let mut samples = sample_initial(spec, config.n_init, &mut rng)?;
    let mut points: Vec<Vec<f64>> = samples.iter().map(|s| s.point.clone()).collect();
    let mut labels: Vec<i8> = samples.iter().map(|s| s.label).collect();

    let mut gram = GramCache::new();
    let mut incumbent: Option<f64> = None;
    let mut warm: Option<Vec<f64>> = None;
    let mut log = Vec::new();
    let mut iteration = 0usize;

    while samples.len() < config.n_total {
        iteration += 1;
        let started = Instant::now();
        let cal = calibrate_gamma(
            &points,
            &labels,
            &schedule,
            &config.train,
            incumbent,
            warm.as_deref(),
            Some(&mut gram),
        )?;

        let x0 = draw_uniform(&spec.state_space, &mut rng);
        let projection = match nearest_point_on_manifold(&cal.model, &x0, &spec.state_space, &config.projection) {
            Ok(p) => Some(p),
            Err(Error::DegenerateGradient { .. }) => None,
            Err(e) => return Err(e),
        };

        // Non-converged projections fall back to the random draw x0
        // itself; the fallbacks double as the loop's exploration.
        let (point, origin, residual) = match projection {
            Some(p) if p.converged => {
                let duplicate = points.iter().any(|q| {
                    q.iter()
                        .zip(&p.point)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                        < config.duplicate_tol
                });
                if duplicate {
                    (x0.clone(), SampleOrigin::FallbackRandom, p.residual)
                } else {
                    (p.point.clone(), SampleOrigin::Active, p.residual)
                }
            }
            Some(p) => (x0.clone(), SampleOrigin::FallbackRandom, p.residual),
            None => (x0.clone(), SampleOrigin::FallbackRandom, f64::NAN),
        };

        let label = spec.membership(&point)?;
        samples.push(LabeledSample {
            point: point.clone(),
            label,
            origin,
            iteration,
        });
        points.push(point);
        labels.push(label);

        let mut alphas = cal.alphas.clone();
        alphas.push(0.0);
        warm = Some(alphas);
        incumbent = Some(cal.gamma);

        log.push(IterationLog {
            iteration,
            gamma: cal.gamma,
            direction: cal.direction,
            residual,
            fallback: origin != SampleOrigin::Active,
            trains: cal.trains,
            millis: started.elapsed().as_secs_f64() * 1e3,
        });
    }

    // Final fit must separate the complete sequence.
    let cal = calibrate_gamma(
        &points,
        &labels,
        &schedule,
        &config.train,
        incumbent,
        warm.as_deref(),
        Some(&mut gram),
    )?;
    debug_assert_eq!(cal.model.training_errors(&points, &labels)?, 0);

    Ok(OasisRun {
        samples,
        final_model: cal.model,
        final_gamma: cal.gamma,
        log,
    })
}
