//! Baseline set inverter via interval analysis: bisection over a
//! worklist, producing inner / uncertain / outer subpavings, plus point
//! classification over the result.

use crate::error::{Error, Result};
use crate::geometry::{IntervalBox, Subpaving};
use crate::models::ProblemSpec;

/// Default cap on the number of boxes processed before the inversion is
/// declared out of resources.
pub const DEFAULT_BOX_BUDGET: usize = 10_000_000;

/// Default tolerance per state-space dimension: the values used for the
/// benchmark problems, falling back to 1% of the widest side above 4D.
pub fn default_epsilon(omega: &IntervalBox) -> f64 {
    match omega.dim() {
        1 | 2 => 0.05,
        3 | 4 => 0.1,
        _ => 0.01 * omega.width(),
    }
}

/// Invert `spec.target` over the state space by recursive bisection.
///
/// For each box b: [F](b) ⊆ U puts b in `inner`, [F](b) ∩ U = ∅ in
/// `outer`; otherwise b is bisected until its width reaches `epsilon`
/// and it lands in `uncertain`. The worklist is an explicit stack with
/// a fixed order, so results are deterministic.
pub fn sivia_invert(spec: &ProblemSpec, epsilon: f64, budget: usize) -> Result<Subpaving> {
    if !(epsilon > 0.0) {
        return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
    }
    let root = spec.state_space.clone();
    let target = &spec.target;

    let mut inner = Vec::new();
    let mut uncertain = Vec::new();
    let mut outer = Vec::new();
    let mut stack: Vec<(IntervalBox, usize)> = vec![(root.clone(), 0)];
    let mut processed = 0usize;
    let mut max_depth = 0usize;

    while let Some((b, depth)) = stack.pop() {
        processed += 1;
        max_depth = max_depth.max(depth);
        if processed > budget {
            return Err(Error::BoxBudgetExceeded {
                budget,
                depth: max_depth,
            });
        }
        let image = spec.eval_inclusion(&b)?;
        let subset = image
            .intervals()
            .iter()
            .zip(target.intervals())
            .all(|(img, t)| img.subset_of(t));
        if subset {
            inner.push(b);
            continue;
        }
        let disjoint = image
            .intervals()
            .iter()
            .zip(target.intervals())
            .any(|(img, t)| !img.intersects(t));
        if disjoint {
            outer.push(b);
            continue;
        }
        if b.width() <= epsilon {
            uncertain.push(b);
            continue;
        }
        let (left, right) = b.bisect()?;
        stack.push((right, depth + 1));
        stack.push((left, depth + 1));
    }

    Ok(Subpaving {
        inner,
        uncertain,
        outer,
        epsilon,
        root,
    })
}

/// Classify a point from a finished subpaving by linear scan.
///
/// Uncertain boxes count as inside the pre-image; ties across shared
/// faces resolve inner > uncertain > outer.
pub fn subpaving_classify(sp: &Subpaving, x: &[f64]) -> Result<i8> {
    for b in sp.inner.iter().chain(&sp.uncertain) {
        if b.contains(x)? {
            return Ok(1);
        }
    }
    for b in &sp.outer {
        if b.contains(x)? {
            return Ok(-1);
        }
    }
    Err(Error::OutsidePaving)
}

/// A grid-bucket index over a subpaving for faster point lookup.
///
/// Buckets partition the root box uniformly; each bucket lists the boxes
/// intersecting it, ordered inner, uncertain, outer so the precedence
/// rule falls out of scan order.
pub struct SubpavingIndex<'a> {
    sp: &'a Subpaving,
    cells_per_dim: usize,
    /// (class rank 0/1/2, index into the class list), per bucket.
    buckets: Vec<Vec<(u8, u32)>>,
}

impl<'a> SubpavingIndex<'a> {
    pub fn build(sp: &'a Subpaving) -> Self {
        let dim = sp.root.dim();
        let n_boxes = sp.total_boxes().max(1);
        // Aim for O(1) boxes per bucket without exploding memory.
        let cells_per_dim = ((n_boxes as f64).powf(1.0 / dim as f64).ceil() as usize).clamp(1, 64);
        let n_buckets = cells_per_dim.pow(dim as u32);
        let mut buckets: Vec<Vec<(u8, u32)>> = vec![Vec::new(); n_buckets];

        let mut insert = |rank: u8, boxes: &[IntervalBox]| {
            for (bi, b) in boxes.iter().enumerate() {
                // Bucket ranges overlapped by the box, per dimension.
                let ranges: Vec<(usize, usize)> = (0..dim)
                    .map(|d| {
                        let root = sp.root.interval(d);
                        let w = root.width() / cells_per_dim as f64;
                        let lo = (((b.interval(d).lo - root.lo) / w).floor() as isize)
                            .clamp(0, cells_per_dim as isize - 1) as usize;
                        let hi = (((b.interval(d).hi - root.lo) / w).floor() as isize)
                            .clamp(0, cells_per_dim as isize - 1) as usize;
                        (lo, hi)
                    })
                    .collect();
                let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
                'cells: loop {
                    let mut flat = 0usize;
                    for d in 0..dim {
                        flat = flat * cells_per_dim + idx[d];
                    }
                    buckets[flat].push((rank, bi as u32));
                    // Odometer over the covered cell ranges.
                    let mut d = dim;
                    while d > 0 {
                        d -= 1;
                        if idx[d] < ranges[d].1 {
                            idx[d] += 1;
                            for trailing in idx.iter_mut().skip(d + 1).zip(ranges.iter().skip(d + 1)) {
                                *trailing.0 = trailing.1 .0;
                            }
                            continue 'cells;
                        }
                    }
                    break;
                }
            }
        };
        insert(0, &sp.inner);
        insert(1, &sp.uncertain);
        insert(2, &sp.outer);
        for bucket in &mut buckets {
            bucket.sort_unstable();
        }
        Self {
            sp,
            cells_per_dim,
            buckets,
        }
    }

    pub fn classify(&self, x: &[f64]) -> Result<i8> {
        let dim = self.sp.root.dim();
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        let mut flat = 0usize;
        for d in 0..dim {
            let root = self.sp.root.interval(d);
            let w = root.width() / self.cells_per_dim as f64;
            let cell = (((x[d] - root.lo) / w).floor() as isize)
                .clamp(0, self.cells_per_dim as isize - 1) as usize;
            flat = flat * self.cells_per_dim + cell;
        }
        for &(rank, bi) in &self.buckets[flat] {
            let b = match rank {
                0 => &self.sp.inner[bi as usize],
                1 => &self.sp.uncertain[bi as usize],
                _ => &self.sp.outer[bi as usize],
            };
            if b.contains(x)? {
                return Ok(if rank < 2 { 1 } else { -1 });
            }
        }
        Err(Error::OutsidePaving)
    }
}
