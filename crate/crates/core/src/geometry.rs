//! Interval arithmetic, boxes, and subpaving containers.
//!
//! Endpoint arithmetic uses ordinary floating point without outward
//! rounding; the inversion comparison here is accuracy-based, not
//! certified.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed real interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval lo {lo} > hi {hi}");
        Self { lo, hi }
    }

    /// Degenerate interval `[v, v]`.
    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `[a.lo+b.lo, a.hi+b.hi]`.
    pub fn add(self, other: Interval) -> Interval {
        Interval::new(self.lo + other.lo, self.hi + other.hi)
    }

    /// Min/max over the four endpoint products.
    pub fn mul(self, other: Interval) -> Interval {
        let p = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        let lo = p.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }

    /// Exact range of x² over the interval (tighter than `a.mul(a)` when
    /// the interval straddles zero).
    pub fn sq(self) -> Interval {
        let (a, b) = (self.lo * self.lo, self.hi * self.hi);
        if self.contains(0.0) {
            Interval::new(0.0, a.max(b))
        } else {
            Interval::new(a.min(b), a.max(b))
        }
    }

    /// True if the two closed intervals share at least one point.
    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// True if `self` is contained in `other`.
    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }
}

/// A Cartesian product of intervals.
///
/// Serializes as a JSON array of `[lo, hi]` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalBox {
    dims: Vec<Interval>,
}

impl IntervalBox {
    pub fn new(dims: Vec<Interval>) -> Self {
        assert!(!dims.is_empty(), "a box needs at least one dimension");
        Self { dims }
    }

    /// Box from `(lo, hi)` pairs.
    pub fn from_bounds(bounds: &[(f64, f64)]) -> Self {
        Self::new(bounds.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect())
    }

    /// The cube `[lo, hi]^n`.
    pub fn cube(lo: f64, hi: f64, n: usize) -> Self {
        Self::new(vec![Interval::new(lo, hi); n])
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.dims
    }

    pub fn interval(&self, i: usize) -> Interval {
        self.dims[i]
    }

    /// Maximum component width.
    pub fn width(&self) -> f64 {
        self.dims.iter().map(|iv| iv.width()).fold(0.0, f64::max)
    }

    pub fn center(&self) -> Vec<f64> {
        self.dims.iter().map(|iv| iv.center()).collect()
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().map(|iv| iv.width()).product()
    }

    /// Euclidean length of the main diagonal.
    pub fn diameter(&self) -> f64 {
        self.dims
            .iter()
            .map(|iv| iv.width() * iv.width())
            .sum::<f64>()
            .sqrt()
    }

    /// Closed containment test.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.dims.iter().zip(x).all(|(iv, &v)| iv.contains(v)))
    }

    /// Clamp a point onto the box, component-wise.
    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        self.dims
            .iter()
            .zip(x)
            .map(|(iv, &v)| v.clamp(iv.lo, iv.hi))
            .collect()
    }

    /// Split at the midpoint of the widest component; ties break to the
    /// lowest index. The halves cover the box and overlap only on the
    /// cut face.
    pub fn bisect(&self) -> Result<(IntervalBox, IntervalBox)> {
        if self.width() <= 0.0 {
            return Err(Error::ZeroWidthBox);
        }
        let mut cut = 0;
        let mut best = f64::NEG_INFINITY;
        for (i, iv) in self.dims.iter().enumerate() {
            if iv.width() > best {
                best = iv.width();
                cut = i;
            }
        }
        let mid = self.dims[cut].center();
        let mut left = self.dims.clone();
        let mut right = self.dims.clone();
        left[cut] = Interval::new(self.dims[cut].lo, mid);
        right[cut] = Interval::new(mid, self.dims[cut].hi);
        Ok((IntervalBox::new(left), IntervalBox::new(right)))
    }
}

impl Serialize for IntervalBox {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.dims.iter().map(|iv| [iv.lo, iv.hi]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntervalBox {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        if pairs.is_empty() {
            return Err(serde::de::Error::custom("box needs at least one dimension"));
        }
        for p in &pairs {
            if !(p[0] <= p[1]) {
                return Err(serde::de::Error::custom(format!(
                    "invalid interval [{}, {}]",
                    p[0], p[1]
                )));
            }
        }
        Ok(IntervalBox::new(
            pairs.into_iter().map(|p| Interval::new(p[0], p[1])).collect(),
        ))
    }
}

/// Which of the three subpaving lists a box was classified into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoxClass {
    Inner,
    Uncertain,
    Outer,
}

impl BoxClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoxClass::Inner => "inner",
            BoxClass::Uncertain => "uncertain",
            BoxClass::Outer => "outer",
        }
    }
}

/// Disjoint box lists covering the initial search box: boxes certainly
/// inside the pre-image, certainly outside, and undecided at width ≤ ε.
#[derive(Clone, Debug)]
pub struct Subpaving {
    pub inner: Vec<IntervalBox>,
    pub uncertain: Vec<IntervalBox>,
    pub outer: Vec<IntervalBox>,
    pub epsilon: f64,
    /// The box the inversion started from.
    pub root: IntervalBox,
}

impl Subpaving {
    pub fn total_boxes(&self) -> usize {
        self.inner.len() + self.uncertain.len() + self.outer.len()
    }

    pub fn uncertain_volume(&self) -> f64 {
        self.uncertain.iter().map(|b| b.volume()).sum()
    }

    /// Write one box per row: class, then lo/hi for every dimension.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let dim = self.root.dim();
        let mut header = vec!["class".to_string()];
        for i in 0..dim {
            header.push(format!("lo{i}"));
            header.push(format!("hi{i}"));
        }
        wtr.write_record(&header)?;
        for (class, boxes) in [
            (BoxClass::Inner, &self.inner),
            (BoxClass::Uncertain, &self.uncertain),
            (BoxClass::Outer, &self.outer),
        ] {
            for b in boxes {
                let mut rec = vec![class.as_str().to_string()];
                for iv in b.intervals() {
                    rec.push(iv.lo.to_string());
                    rec.push(iv.hi.to_string());
                }
                wtr.write_record(&rec)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}
