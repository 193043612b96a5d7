//! GRBF-kernel SVM: dual training via pairwise coordinate ascent,
//! decision function, analytic gradient, and kernel-width calibration
//! to separability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::IntervalBox;

/// Gaussian radial basis function exp(−‖x−y‖² / (2γ²)).
pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Config(format!("kernel width must be positive, got {gamma}")));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(rbf_unchecked(x, y, gamma))
}

#[inline]
fn rbf_unchecked(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    let mut d2 = 0.0;
    for (a, b) in x.iter().zip(y) {
        let d = a - b;
        d2 += d * d;
    }
    (-d2 / (2.0 * gamma * gamma)).exp()
}

/// A trained decision manifold ψ(x) = b + Σ βₖ yₖ K(xₖ, x).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_points: Vec<Vec<f64>>,
    pub support_labels: Vec<i8>,
    /// Dual coefficients βₖ, all in [0, box_bound].
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub box_bound: f64,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.support_points.first().map_or(0, |p| p.len())
    }

    pub fn n_support(&self) -> usize {
        self.support_points.len()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// ψ(x) = b + Σ βₖ yₖ K(xₖ, x).
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let mut v = self.bias;
        for ((p, &y), &beta) in self
            .support_points
            .iter()
            .zip(&self.support_labels)
            .zip(&self.coefficients)
        {
            v += beta * y as f64 * rbf_unchecked(p, x, self.gamma);
        }
        Ok(v)
    }

    /// +1 if ψ(x) ≥ 0 else −1 (ties go to +1, matching the closed target
    /// set convention).
    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        Ok(if self.decision_value(x)? >= 0.0 { 1 } else { -1 })
    }

    /// ∇ψ(x) = Σ βₖ yₖ K(xₖ, x) (xₖ − x) / γ².
    pub fn decision_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let g2 = self.gamma * self.gamma;
        let mut grad = vec![0.0; x.len()];
        for ((p, &y), &beta) in self
            .support_points
            .iter()
            .zip(&self.support_labels)
            .zip(&self.coefficients)
        {
            let k = rbf_unchecked(p, x, self.gamma);
            let w = beta * y as f64 * k / g2;
            for (gi, (&pi, &xi)) in grad.iter_mut().zip(p.iter().zip(x)) {
                *gi += w * (pi - xi);
            }
        }
        Ok(grad)
    }

    /// Number of training points misclassified by sign(ψ).
    pub fn training_errors(&self, points: &[Vec<f64>], labels: &[i8]) -> Result<usize> {
        let mut errs = 0;
        for (p, &y) in points.iter().zip(labels) {
            if self.predict(p)? != y {
                errs += 1;
            }
        }
        Ok(errs)
    }

    pub fn save_json<W: std::io::Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn load_json<R: std::io::Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}

/// Solver settings for the dual problem.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrainOptions {
    /// Stop when the maximal KKT violating pair gap falls below this.
    pub kkt_tol: f64,
    pub max_iter: usize,
    /// The box bound L of the dual; the default is effectively hard margin.
    pub box_bound: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            kkt_tol: 1e-6,
            // Late-stage active-learning sets contain opposite-label
            // pairs ~1e-3 apart; the dual is then ill-conditioned and
            // legitimately needs ~1e6 pair updates to reach the KKT
            // tolerance. A tight cap misreports such widths as
            // unseparable and collapses the calibration.
            max_iter: 5_000_000,
            box_bound: 1e6,
        }
    }
}

/// Full kernel matrices are materialized up to this many samples and
/// computed on the fly above it.
pub const KERNEL_CACHE_LIMIT: usize = 4096;

/// A materialized kernel matrix that can grow with the sample sequence,
/// so per-iteration retraining only pays for the new row.
#[derive(Clone, Debug, Default)]
pub struct GramCache {
    gamma: f64,
    n: usize,
    data: Vec<f64>, // row-major n×n
}

impl GramCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn matches(&self, n: usize, gamma: f64) -> bool {
        self.n == n && self.gamma == gamma && n > 0
    }

    /// Make the cache valid for `points` at width `gamma`. Appending
    /// points at the same width extends the matrix in place.
    pub fn update(&mut self, points: &[Vec<f64>], gamma: f64) {
        let n = points.len();
        if n > KERNEL_CACHE_LIMIT {
            self.n = 0;
            self.data.clear();
            return;
        }
        let old_n = if self.gamma == gamma { self.n.min(n) } else { 0 };
        let old_stride = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            if i < old_n {
                data[i * n..i * n + old_n].copy_from_slice(&self.data[i * old_stride..i * old_stride + old_n]);
            }
            for j in 0..n {
                if i < old_n && j < old_n {
                    continue;
                }
                data[i * n + j] = rbf_unchecked(&points[i], &points[j], gamma);
            }
        }
        self.gamma = gamma;
        self.n = n;
        self.data = data;
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

enum Kernels<'a> {
    Cached(&'a GramCache),
    Local(GramCache),
    OnTheFly { gamma: f64 },
}

impl Kernels<'_> {
    fn row_into<'b>(&'b self, points: &[Vec<f64>], i: usize, scratch: &'b mut Vec<f64>) -> &'b [f64] {
        match self {
            Kernels::Cached(g) => g.row(i),
            Kernels::Local(g) => g.row(i),
            Kernels::OnTheFly { gamma } => {
                scratch.clear();
                scratch.extend(points.iter().map(|p| rbf_unchecked(&points[i], p, *gamma)));
                scratch
            }
        }
    }
}

/// How often (in pair updates) the solver attempts a direct solve of
/// the dual restricted to the current free set.
const REFINE_EVERY: usize = 2000;

/// In-place Gaussian elimination with partial pivoting; the solution
/// replaces `b`. Returns false for a (numerically) singular system.
fn solve_dense(a: &mut [f64], b: &mut [f64], m: usize) -> bool {
    for col in 0..m {
        let mut piv = col;
        for row in col + 1..m {
            if a[row * m + col].abs() > a[piv * m + col].abs() {
                piv = row;
            }
        }
        if a[piv * m + col].abs() < 1e-14 {
            return false;
        }
        if piv != col {
            for j in 0..m {
                a.swap(col * m + j, piv * m + j);
            }
            b.swap(col, piv);
        }
        for row in col + 1..m {
            let f = a[row * m + col] / a[col * m + col];
            if f == 0.0 {
                continue;
            }
            for j in col..m {
                a[row * m + j] -= f * a[col * m + j];
            }
            b[row] -= f * b[col];
        }
    }
    for row in (0..m).rev() {
        let mut s = b[row];
        for j in row + 1..m {
            s -= a[row * m + j] * b[j];
        }
        b[row] = s / a[row * m + row];
    }
    true
}

/// Solve the dual exactly on the free set {k : 0 < α_k < L} with the
/// bound variables held fixed, clipping members that leave the box and
/// re-solving. Applies the result to `alpha` and returns true on a
/// clean solve; on any numerical trouble leaves `alpha` untouched.
///
/// At a free-set optimum every free vector satisfies
/// y_i (Σ_j α_j y_j K_ij + b) = 1, a symmetric linear system in
/// z_j = α_j y_j and b together with the constraint Σ z_j = 0.
fn refine_free_set(
    kernels: &Kernels,
    points: &[Vec<f64>],
    y: &[f64],
    c: f64,
    cur_gap: f64,
    alpha: &mut [f64],
    scratch: &mut Vec<f64>,
) -> bool {
    let n = points.len();
    let mut cand = alpha.to_vec();
    let mut fset: Vec<usize> = (0..n).filter(|&k| cand[k] > 0.0 && cand[k] < c).collect();
    let mut in_f = vec![false; n];
    for _ in 0..20 {
        let m = fset.len();
        if m < 2 {
            return false;
        }
        in_f.iter_mut().for_each(|v| *v = false);
        for &f in &fset {
            in_f[f] = true;
        }
        let mm = m + 1;
        let mut a = vec![0.0; mm * mm];
        let mut rhs = vec![0.0; mm];
        for (p, &fp) in fset.iter().enumerate() {
            let row = kernels.row_into(points, fp, scratch);
            for (q, &fq) in fset.iter().enumerate() {
                a[p * mm + q] = row[fq];
            }
            a[p * mm + m] = 1.0;
            a[m * mm + p] = 1.0;
            let mut fixed = 0.0;
            for j in 0..n {
                if !in_f[j] && cand[j] > 0.0 {
                    fixed += cand[j] * y[j] * row[j];
                }
            }
            rhs[p] = y[fp] - fixed;
        }
        rhs[m] = -(0..n).filter(|&j| !in_f[j]).map(|j| cand[j] * y[j]).sum::<f64>();
        // One round of iterative refinement keeps the achievable KKT
        // gap below tolerance even when coefficients reach the 1e6
        // box bound (the raw solve loses ~6 digits to that scale).
        let a0 = a.clone();
        let rhs0 = rhs.clone();
        if !solve_dense(&mut a, &mut rhs, mm) {
            return false;
        }
        let mut resid = vec![0.0; mm];
        for p in 0..mm {
            let mut s = rhs0[p];
            for q in 0..mm {
                s -= a0[p * mm + q] * rhs[q];
            }
            resid[p] = s;
        }
        let mut a1 = a0;
        if solve_dense(&mut a1, &mut resid, mm) {
            for p in 0..mm {
                rhs[p] += resid[p];
            }
        }
        let tol = 1e-9 * c;
        let mut clean = true;
        let mut next = Vec::with_capacity(m);
        for (p, &fp) in fset.iter().enumerate() {
            let af = rhs[p] * y[fp];
            if af < -tol || af > c + tol {
                cand[fp] = if af < -tol { 0.0 } else { c };
                clean = false;
            } else {
                next.push(fp);
            }
        }
        if clean {
            for (p, &fp) in fset.iter().enumerate() {
                cand[fp] = (rhs[p] * y[fp]).clamp(0.0, c);
            }
            // A nearly singular free-set Gram (near-duplicate points)
            // can yield huge cancelling coefficients that fit the box
            // but ruin optimality; accept only if the KKT gap improves.
            if kkt_gap(kernels, points, y, c, &cand, scratch) < cur_gap {
                alpha.copy_from_slice(&cand);
                return true;
            }
            return false;
        }
        fset = next;
    }
    false
}

/// KKT gap (max-violating-pair criterion) of a dual point.
fn kkt_gap(
    kernels: &Kernels,
    points: &[Vec<f64>],
    y: &[f64],
    c: f64,
    alpha: &[f64],
    scratch: &mut Vec<f64>,
) -> f64 {
    let n = points.len();
    let mut s = vec![0.0; n];
    for j in 0..n {
        if alpha[j] > 0.0 {
            let row = kernels.row_into(points, j, scratch);
            let w = alpha[j] * y[j];
            for (sp, &k) in s.iter_mut().zip(row) {
                *sp += w * k;
            }
        }
    }
    let mut m_val = f64::NEG_INFINITY;
    let mut mm_val = f64::INFINITY;
    for i in 0..n {
        let g = y[i] * s[i] - 1.0;
        let v = -y[i] * g;
        if (y[i] > 0.0 && alpha[i] < c) || (y[i] < 0.0 && alpha[i] > 0.0) {
            m_val = m_val.max(v);
        }
        if (y[i] > 0.0 && alpha[i] > 0.0) || (y[i] < 0.0 && alpha[i] < c) {
            mm_val = mm_val.min(v);
        }
    }
    m_val - mm_val
}

/// Result of a dual solve, including the raw dual variables for warm
/// starting the next problem.
#[derive(Clone, Debug)]
pub struct TrainedSvm {
    pub model: SvmModel,
    /// Dual variables aligned with the training points.
    pub alphas: Vec<f64>,
    pub iterations: usize,
    pub kkt_gap: f64,
}

/// Solve the dual on `points`/`labels` at width `gamma`.
///
/// Validates label consistency; use [`train_svm_warm`] inside loops that
/// have already validated their data.
pub fn train_svm(points: &[Vec<f64>], labels: &[i8], gamma: f64, opts: &TrainOptions) -> Result<SvmModel> {
    check_consistent(points, labels)?;
    Ok(train_svm_warm(points, labels, gamma, opts, None, None)?.model)
}

/// Reject identical points carrying different labels.
pub fn check_consistent(points: &[Vec<f64>], labels: &[i8]) -> Result<()> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if labels[i] != labels[j] && points[i] == points[j] {
                return Err(Error::InconsistentLabels);
            }
        }
    }
    Ok(())
}

/// Dual solve with optional warm start and shared kernel cache.
///
/// The solver optimizes pairs of dual variables chosen by the most
/// violating pair rule, which keeps the equality constraint Σ βₖ yₖ = 0
/// satisfied exactly at every step.
pub fn train_svm_warm(
    points: &[Vec<f64>],
    labels: &[i8],
    gamma: f64,
    opts: &TrainOptions,
    warm: Option<&[f64]>,
    gram: Option<&GramCache>,
) -> Result<TrainedSvm> {
    let n = points.len();
    if !(gamma > 0.0) || !(opts.box_bound > 0.0) {
        return Err(Error::Config(format!(
            "gamma and box bound must be positive (gamma={gamma}, L={})",
            opts.box_bound
        )));
    }
    if n == 0 || labels.iter().all(|&y| y == 1) || labels.iter().all(|&y| y == -1) {
        return Err(Error::SingleClass);
    }
    let c = opts.box_bound;
    let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();

    let kernels = match gram {
        Some(g) if g.matches(n, gamma) => Kernels::Cached(g),
        _ if n <= KERNEL_CACHE_LIMIT => {
            let mut local = GramCache::new();
            local.update(points, gamma);
            Kernels::Local(local)
        }
        _ => Kernels::OnTheFly { gamma },
    };

    let mut alpha = vec![0.0; n];
    if let Some(w) = warm {
        for (a, &wv) in alpha.iter_mut().zip(w) {
            *a = wv.clamp(0.0, c);
        }
    }

    // Gradient of the (minimization form) dual: G_i = y_i Σ_j α_j y_j K_ij − 1.
    let mut grad = vec![-1.0; n];
    let mut scratch = Vec::new();
    if alpha.iter().any(|&a| a > 0.0) {
        let mut s = vec![0.0; n]; // Σ_j α_j y_j K_ij
        for j in 0..n {
            if alpha[j] > 0.0 {
                let row = kernels.row_into(points, j, &mut scratch);
                let w = alpha[j] * y[j];
                for (sp, &k) in s.iter_mut().zip(row) {
                    *sp += w * k;
                }
            }
        }
        for i in 0..n {
            grad[i] = y[i] * s[i] - 1.0;
        }
    }

    let mut iterations = 0;
    let mut gap;
    let mut scratch_j = Vec::new();
    loop {
        // First index: most violating among I_up; the I_low minimum only
        // sets the stopping gap.
        let mut m_val = f64::NEG_INFINITY;
        let mut m_idx = usize::MAX;
        let mut mm_val = f64::INFINITY;
        let mut mm_any = false;
        for i in 0..n {
            let v = -y[i] * grad[i];
            let in_up = (y[i] > 0.0 && alpha[i] < c) || (y[i] < 0.0 && alpha[i] > 0.0);
            let in_low = (y[i] > 0.0 && alpha[i] > 0.0) || (y[i] < 0.0 && alpha[i] < c);
            if in_up && v > m_val {
                m_val = v;
                m_idx = i;
            }
            if in_low && v < mm_val {
                mm_val = v;
                mm_any = true;
            }
        }
        gap = m_val - mm_val;
        if gap <= opts.kkt_tol || m_idx == usize::MAX || !mm_any {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(Error::SolverNonConvergence {
                kkt_violation: gap,
                iterations,
            });
        }
        iterations += 1;

        // Second index by second-order selection: maximize the dual
        // decrease b²/2a over violating I_low partners. First-order
        // most-violating-pair zigzags badly on near-singular Gram rows.
        let i = m_idx;
        let row_i = kernels.row_into(points, i, &mut scratch).to_vec();
        let mut j = usize::MAX;
        let mut best_obj = 0.0;
        let mut b_ij = 0.0;
        for p in 0..n {
            let in_low = (y[p] > 0.0 && alpha[p] > 0.0) || (y[p] < 0.0 && alpha[p] < c);
            if !in_low {
                continue;
            }
            let b = m_val + y[p] * grad[p];
            if b <= 0.0 {
                continue;
            }
            let a = (row_i[i] + 1.0 - 2.0 * row_i[p]).max(1e-12);
            let obj = -b * b / a;
            if obj < best_obj {
                best_obj = obj;
                j = p;
                b_ij = b;
            }
        }
        if j == usize::MAX {
            break;
        }
        let row_j = kernels.row_into(points, j, &mut scratch_j);
        let curvature = (row_i[i] + row_j[j] - 2.0 * row_i[j]).max(1e-12);

        // Step t along the feasible direction (α_i += y_i t, α_j −= y_j t).
        let mut t = b_ij / curvature;
        let cap_i = if y[i] > 0.0 { c - alpha[i] } else { alpha[i] };
        let cap_j = if y[j] > 0.0 { alpha[j] } else { c - alpha[j] };
        t = t.min(cap_i).min(cap_j);
        if t <= 0.0 {
            break; // numerically blocked; the gap is already tiny
        }

        alpha[i] = (alpha[i] + y[i] * t).clamp(0.0, c);
        alpha[j] = (alpha[j] - y[j] * t).clamp(0.0, c);
        for p in 0..n {
            grad[p] += y[p] * t * (row_i[p] - row_j[p]);
        }

        // Periodic direct polish. Pair updates identify the support set
        // quickly but polish ill-conditioned coefficient values (close
        // opposite-label pairs need α ~ γ²/d²) at a crawl; solving the
        // dual exactly on the current free set finishes in one linear
        // solve what would otherwise take ~1e6 pair steps.
        if iterations % REFINE_EVERY == 0
            && refine_free_set(&kernels, points, &y, c, gap, &mut alpha, &mut scratch)
        {
            let mut s = vec![0.0; n];
            for q in 0..n {
                if alpha[q] > 0.0 {
                    let row = kernels.row_into(points, q, &mut scratch);
                    let w = alpha[q] * y[q];
                    for (sp, &k) in s.iter_mut().zip(row) {
                        *sp += w * k;
                    }
                }
            }
            for p in 0..n {
                grad[p] = y[p] * s[p] - 1.0;
            }
        }
    }

    // Bias from free support vectors; fall back to the gap midpoint.
    let mut b_sum = 0.0;
    let mut b_cnt = 0usize;
    for i in 0..n {
        if alpha[i] > 0.0 && alpha[i] < c {
            b_sum += -y[i] * grad[i];
            b_cnt += 1;
        }
    }
    let bias = if b_cnt > 0 {
        b_sum / b_cnt as f64
    } else {
        let mut m_val = f64::NEG_INFINITY;
        let mut mm_val = f64::INFINITY;
        for i in 0..n {
            let v = -y[i] * grad[i];
            let in_up = (y[i] > 0.0 && alpha[i] < c) || (y[i] < 0.0 && alpha[i] > 0.0);
            let in_low = (y[i] > 0.0 && alpha[i] > 0.0) || (y[i] < 0.0 && alpha[i] < c);
            if in_up {
                m_val = m_val.max(v);
            }
            if in_low {
                mm_val = mm_val.min(v);
            }
        }
        0.5 * (m_val + mm_val)
    };

    let mut support_points = Vec::new();
    let mut support_labels = Vec::new();
    let mut coefficients = Vec::new();
    for i in 0..n {
        if alpha[i] > 0.0 {
            support_points.push(points[i].clone());
            support_labels.push(labels[i]);
            coefficients.push(alpha[i]);
        }
    }
    let model = SvmModel {
        support_points,
        support_labels,
        coefficients,
        bias,
        gamma,
        box_bound: c,
    };
    debug_assert!(
        model
            .coefficients
            .iter()
            .zip(&model.support_labels)
            .map(|(&b, &y)| b * y as f64)
            .sum::<f64>()
            .abs()
            <= 1e-8 * (1.0 + model.coefficients.iter().sum::<f64>()),
        "equality constraint drifted"
    );
    Ok(TrainedSvm {
        model,
        alphas: alpha,
        iterations,
        kkt_gap: gap.max(0.0),
    })
}

/// Geometric schedule of kernel widths for calibration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GammaSchedule {
    pub gamma0: f64,
    pub growth: f64,
    pub max_steps: usize,
}

impl GammaSchedule {
    /// gamma0 = 0.1 × diameter(Ω), growth 2, 30 steps.
    pub fn default_for(omega: &IntervalBox) -> Self {
        Self {
            gamma0: 0.1 * omega.diameter(),
            growth: 2.0,
            max_steps: 30,
        }
    }
}

/// Which way the calibration walked the schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanDirection {
    Incumbent,
    Start,
    Down,
    Up,
}

/// A calibrated width together with its separating model.
#[derive(Clone, Debug)]
pub struct Calibration {
    pub gamma: f64,
    pub model: SvmModel,
    pub alphas: Vec<f64>,
    pub direction: ScanDirection,
    /// Number of dual solves spent.
    pub trains: usize,
}

/// Find the smallest tried kernel width in the geometric schedule whose
/// trained model has zero empirical error on the training set.
///
/// The walk starts from the incumbent width of a previous call (else
/// gamma0) and narrows until the data first separates; under a hard
/// margin, widths that once failed only get harder as samples accrue,
/// so wider widths are not revisited. Widths where the dual solver
/// stalls count as unseparable.
pub fn calibrate_gamma(
    points: &[Vec<f64>],
    labels: &[i8],
    schedule: &GammaSchedule,
    opts: &TrainOptions,
    incumbent: Option<f64>,
    warm: Option<&[f64]>,
    gram: Option<&mut GramCache>,
) -> Result<Calibration> {
    if !(schedule.gamma0 > 0.0) || !(schedule.growth > 1.0) {
        return Err(Error::Config(format!(
            "calibration schedule needs gamma0 > 0 and growth > 1 (got {}, {})",
            schedule.gamma0, schedule.growth
        )));
    }
    check_consistent(points, labels)?;

    let mut gram = gram;
    let mut trains = 0usize;
    let mut best_err = usize::MAX;
    let mut best_gamma = schedule.gamma0;

    let try_gamma = |gamma: f64,
                         direction: ScanDirection,
                         gram: &mut Option<&mut GramCache>,
                         trains: &mut usize,
                         best_err: &mut usize,
                         best_gamma: &mut f64|
     -> Result<std::result::Result<Calibration, usize>> {
        if let Some(g) = gram.as_deref_mut() {
            g.update(points, gamma);
        }
        *trains += 1;
        let trained = match train_svm_warm(points, labels, gamma, opts, warm, gram.as_deref()) {
            Ok(t) => t,
            // A width where the hard-margin dual stalls is just an
            // unseparable width; move along the schedule.
            Err(Error::SolverNonConvergence { .. }) => return Ok(Err(usize::MAX - 1)),
            Err(e) => return Err(e),
        };
        let errs = trained.model.training_errors(points, labels)?;
        if errs < *best_err {
            *best_err = errs;
            *best_gamma = gamma;
        }
        if errs == 0 {
            Ok(Ok(Calibration {
                gamma,
                model: trained.model,
                alphas: trained.alphas,
                direction,
                trains: *trains,
            }))
        } else {
            Ok(Err(errs))
        }
    };

    let range_max = schedule.gamma0 * schedule.growth.powi(schedule.max_steps as i32);
    let range_min = schedule.gamma0 / schedule.growth.powi(schedule.max_steps as i32);
    let (start, start_dir) = match incumbent {
        Some(g) if g > 0.0 => (g, ScanDirection::Incumbent),
        _ => (schedule.gamma0, ScanDirection::Start),
    };

    match try_gamma(start, start_dir, &mut gram, &mut trains, &mut best_err, &mut best_gamma)? {
        Ok(cal) => return Ok(cal),
        Err(_) => {
            let mut gamma = start;
            while gamma / schedule.growth >= range_min {
                gamma /= schedule.growth;
                if let Ok(cal) = try_gamma(gamma, ScanDirection::Down, &mut gram, &mut trains, &mut best_err, &mut best_gamma)? {
                    return Ok(cal);
                }
            }
            // Separability at small widths can fail numerically for
            // near-duplicate points; give wider widths a chance too.
            let mut gamma = start;
            while gamma * schedule.growth <= range_max {
                gamma *= schedule.growth;
                if let Ok(cal) = try_gamma(gamma, ScanDirection::Up, &mut gram, &mut trains, &mut best_err, &mut best_gamma)? {
                    return Ok(cal);
                }
            }
        }
    }

    Err(Error::CalibrationFailed {
        best_error: best_err as f64 / points.len() as f64,
        best_gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kernel_examples() {
        let g = 1.7;
        assert_eq!(rbf_kernel(&[0.3, -0.2], &[0.3, -0.2], g).unwrap(), 1.0);
        // ‖x−y‖ = γ√2 gives e⁻¹.
        let d = g * 2.0f64.sqrt();
        let v = rbf_kernel(&[0.0], &[d], g).unwrap();
        assert_relative_eq!(v, (-1.0f64).exp(), max_relative = 1e-12);
        let far = rbf_kernel(&[0.0], &[100.0], 1.0).unwrap();
        assert!(far >= 0.0 && far < 1e-100);
        assert!(rbf_kernel(&[0.0], &[1.0], 0.0).is_err());
        assert!(rbf_kernel(&[0.0], &[1.0], -1.0).is_err());
        assert!(rbf_kernel(&[0.0, 1.0], &[1.0], 1.0).is_err());
    }

    fn two_point_model() -> SvmModel {
        train_svm(
            &[vec![0.0], vec![2.0]],
            &[1, -1],
            1.0,
            &TrainOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn two_point_dual_by_symmetry() {
        let m = two_point_model();
        assert_eq!(m.n_support(), 2);
        assert!(m.coefficients[0] > 0.0);
        assert_relative_eq!(m.coefficients[0], m.coefficients[1], max_relative = 1e-9);
        assert!(m.decision_value(&[0.0]).unwrap() > 0.0);
        assert!(m.decision_value(&[2.0]).unwrap() < 0.0);
        // The midpoint sits on the manifold by symmetry.
        assert!(m.decision_value(&[1.0]).unwrap().abs() < 1e-9);
        // Closed-form check: the dual objective 2β − β²(1 − K(0,2)) is
        // maximal at β = 1/(1 − K(0,2)), and then ψ(0) = 1.
        let k02 = (-2.0f64).exp();
        assert_relative_eq!(m.coefficients[0], 1.0 / (1.0 - k02), max_relative = 1e-6);
        assert_relative_eq!(m.decision_value(&[0.0]).unwrap(), 1.0, max_relative = 1e-6);
    }

    #[test]
    fn model_invariants_hold() {
        let m = two_point_model();
        let balance: f64 = m
            .coefficients
            .iter()
            .zip(&m.support_labels)
            .map(|(&b, &y)| b * y as f64)
            .sum();
        assert!(balance.abs() <= 1e-8);
        assert!(m.coefficients.iter().all(|&b| (0.0..=m.box_bound).contains(&b)));
    }

    #[test]
    fn duplicate_same_label_keeps_decision_function() {
        let opts = TrainOptions::default();
        let a = train_svm(&[vec![0.0], vec![2.0]], &[1, -1], 1.0, &opts).unwrap();
        let b = train_svm(&[vec![0.0], vec![0.0], vec![2.0]], &[1, 1, -1], 1.0, &opts).unwrap();
        for x in [-1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
            assert_relative_eq!(
                a.decision_value(&[x]).unwrap(),
                b.decision_value(&[x]).unwrap(),
                epsilon = 1e-4
            );
        }
    }

    #[test]
    fn conflicting_duplicates_rejected() {
        let r = train_svm(
            &[vec![1.0, 2.0], vec![1.0, 2.0]],
            &[1, -1],
            1.0,
            &TrainOptions::default(),
        );
        assert!(matches!(r, Err(Error::InconsistentLabels)));
    }

    #[test]
    fn single_class_rejected() {
        let r = train_svm(&[vec![0.0], vec![1.0]], &[1, 1], 1.0, &TrainOptions::default());
        assert!(matches!(r, Err(Error::SingleClass)));
    }

    #[test]
    fn decision_value_examples() {
        let m = SvmModel {
            support_points: vec![vec![0.0, 0.0]],
            support_labels: vec![1],
            coefficients: vec![1.0],
            bias: 0.0,
            gamma: 1.0,
            box_bound: 1e6,
        };
        assert_eq!(m.decision_value(&[0.0, 0.0]).unwrap(), 1.0);
        let d = 2.0f64.sqrt();
        assert_relative_eq!(
            m.decision_value(&[d, 0.0]).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-12
        );

        // With b = −e^{−1/2} the zero set is the unit circle.
        let unit = SvmModel {
            bias: -(-0.5f64).exp(),
            ..m
        };
        for theta in [0.0f64, 0.7, 2.1, 4.0] {
            let x = [theta.cos(), theta.sin()];
            assert!(unit.decision_value(&x).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn predict_tie_rule() {
        let m = SvmModel {
            support_points: vec![vec![0.0]],
            support_labels: vec![1],
            coefficients: vec![0.0],
            bias: 0.0,
            gamma: 1.0,
            box_bound: 1e6,
        };
        assert_eq!(m.predict(&[5.0]).unwrap(), 1); // ψ = 0 → +1
        let plus = SvmModel { bias: 0.5, ..m.clone() };
        assert_eq!(plus.predict(&[5.0]).unwrap(), 1);
        let minus = SvmModel { bias: -0.5, ..m };
        assert_eq!(minus.predict(&[5.0]).unwrap(), -1);
    }

    #[test]
    fn gradient_examples() {
        let m = SvmModel {
            support_points: vec![vec![0.0, 0.0]],
            support_labels: vec![1],
            coefficients: vec![1.0],
            bias: 0.0,
            gamma: 1.0,
            box_bound: 1e6,
        };
        assert_eq!(m.decision_gradient(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let g = m.decision_gradient(&[1.0, 0.0]).unwrap();
        assert_relative_eq!(g[0], -(-0.5f64).exp(), max_relative = 1e-12);
        assert_eq!(g[1], 0.0);
    }

    fn random_model(rng: &mut ChaCha8Rng, dim: usize) -> SvmModel {
        let n = rng.gen_range(2..8);
        let mut pts = Vec::new();
        let mut lab = Vec::new();
        let mut coef = Vec::new();
        for _ in 0..n {
            pts.push((0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect());
            lab.push(if rng.gen_bool(0.5) { 1 } else { -1 });
            coef.push(rng.gen_range(0.0..3.0));
        }
        SvmModel {
            support_points: pts,
            support_labels: lab,
            coefficients: coef,
            bias: rng.gen_range(-1.0..1.0),
            gamma: rng.gen_range(0.3..2.0),
            box_bound: 1e6,
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let dim = rng.gen_range(1..4);
            let m = random_model(&mut rng, dim);
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let g = m.decision_gradient(&x).unwrap();
            let h = 1e-6;
            for d in 0..dim {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[d] += h;
                xm[d] -= h;
                let fd = (m.decision_value(&xp).unwrap() - m.decision_value(&xm).unwrap()) / (2.0 * h);
                assert!(
                    (fd - g[d]).abs() <= 1e-5 * (1.0 + g[d].abs()),
                    "dim {d}: analytic {} vs fd {fd}",
                    g[d]
                );
            }
        }
    }

    fn random_consistent_dataset(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<i8>) {
        let mut pts: Vec<Vec<f64>> = Vec::new();
        let mut lab = Vec::new();
        while pts.len() < n {
            let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
            pts.push(p);
            lab.push(if rng.gen_bool(0.5) { 1i8 } else { -1 });
        }
        // Guarantee both classes.
        lab[0] = 1;
        lab[1] = -1;
        (pts, lab)
    }

    #[test]
    fn calibration_separates_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let schedule = GammaSchedule {
            gamma0: 1.0,
            growth: 2.0,
            max_steps: 30,
        };
        let opts = TrainOptions::default();
        for _ in 0..5 {
            let (pts, lab) = random_consistent_dataset(&mut rng, 40, 2);
            let cal = calibrate_gamma(&pts, &lab, &schedule, &opts, None, None, None).unwrap();
            assert_eq!(cal.model.training_errors(&pts, &lab).unwrap(), 0);
        }
    }

    #[test]
    fn calibration_returns_first_separating_width() {
        // Two points far apart separate at the schedule start.
        let pts = vec![vec![0.0], vec![2.0]];
        let lab = vec![1i8, -1];
        let schedule = GammaSchedule {
            gamma0: 1.0,
            growth: 2.0,
            max_steps: 30,
        };
        let cal = calibrate_gamma(&pts, &lab, &schedule, &TrainOptions::default(), None, None, None).unwrap();
        assert_eq!(cal.gamma, 1.0);
        assert_eq!(cal.direction, ScanDirection::Start);
        assert_eq!(cal.trains, 1);
    }

    #[test]
    fn label_flip_negates_decision_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (pts, lab) = random_consistent_dataset(&mut rng, 30, 2);
        let flipped: Vec<i8> = lab.iter().map(|&y| -y).collect();
        let opts = TrainOptions::default();
        let m = train_svm(&pts, &lab, 0.8, &opts).unwrap();
        let mf = train_svm(&pts, &flipped, 0.8, &opts).unwrap();
        for _ in 0..50 {
            let x = vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let a = m.decision_value(&x).unwrap();
            let b = mf.decision_value(&x).unwrap();
            assert!((a + b).abs() <= 1e-6 * (1.0 + a.abs()), "ψ={a}, flipped={b}");
        }
    }

    #[test]
    fn warm_start_reaches_same_model_faster() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (pts, lab) = random_consistent_dataset(&mut rng, 60, 2);
        let opts = TrainOptions::default();
        let cold = train_svm_warm(&pts, &lab, 0.9, &opts, None, None).unwrap();
        let warm = train_svm_warm(&pts, &lab, 0.9, &opts, Some(&cold.alphas), None).unwrap();
        assert!(warm.iterations <= 2, "warm restart took {} iterations", warm.iterations);
        assert_relative_eq!(warm.model.bias, cold.model.bias, epsilon = 1e-6);
    }

    #[test]
    fn gram_cache_extension_matches_rebuild() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut pts: Vec<Vec<f64>> = (0..10)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let mut cache = GramCache::new();
        cache.update(&pts, 0.7);
        pts.push(vec![0.3, -0.4]);
        pts.push(vec![-0.1, 0.9]);
        cache.update(&pts, 0.7);
        let mut fresh = GramCache::new();
        fresh.update(&pts, 0.7);
        assert_eq!(cache.data, fresh.data);
    }

    #[test]
    fn model_json_roundtrip() {
        let m = two_point_model();
        let mut buf = Vec::new();
        m.save_json(&mut buf).unwrap();
        let back = SvmModel::load_json(buf.as_slice()).unwrap();
        assert_eq!(m.support_points, back.support_points);
        assert_eq!(m.bias, back.bias);
        assert_eq!(m.gamma, back.gamma);
    }
}
