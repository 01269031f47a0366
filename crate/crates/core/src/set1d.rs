//! Closed subsets of the real line made of finitely many intervals and
//! isolated points.
//!
//! Every one-dimensional subdifferential produced by this crate is a
//! [`RealSet1D`]. Interval endpoints may be infinite, so rays such as
//! `[0, inf)` and the whole line are representable. Values are always kept
//! in normal form: intervals sorted, pairwise disjoint and non-touching, and
//! isolated points lying outside every interval.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A finite union of closed intervals and isolated points.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RealSet1D {
    intervals: Vec<(f64, f64)>,
    points: Vec<f64>,
}

/// Adds extended reals, resolving `inf + (-inf)` towards `tie`.
fn ext_add(a: f64, b: f64, tie: f64) -> f64 {
    let s = a + b;
    if s.is_nan() {
        tie
    } else {
        s
    }
}

impl RealSet1D {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn point(v: f64) -> Self {
        Self::from_parts(Vec::new(), vec![v])
    }

    pub fn points(vs: &[f64]) -> Self {
        Self::from_parts(Vec::new(), vs.to_vec())
    }

    /// The closed interval `[lo, hi]`; empty when `lo > hi`.
    pub fn interval(lo: f64, hi: f64) -> Self {
        Self::from_parts(vec![(lo, hi)], Vec::new())
    }

    pub fn whole_line() -> Self {
        Self::interval(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `[0, inf)`.
    pub fn nonneg_ray() -> Self {
        Self::interval(0.0, f64::INFINITY)
    }

    /// `(-inf, 0]`.
    pub fn nonpos_ray() -> Self {
        Self::interval(f64::NEG_INFINITY, 0.0)
    }

    /// Builds a normalized set from raw components. NaN entries are dropped.
    pub fn from_parts(intervals: Vec<(f64, f64)>, points: Vec<f64>) -> Self {
        let mut ivs: Vec<(f64, f64)> = Vec::new();
        let mut pts: Vec<f64> = points.into_iter().filter(|p| p.is_finite()).collect();
        for (lo, hi) in intervals {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                continue;
            }
            if lo == hi {
                if lo.is_finite() {
                    pts.push(lo);
                }
                continue;
            }
            ivs.push((lo, hi));
        }
        ivs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(ivs.len());
        for (lo, hi) in ivs {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        pts.retain(|p| !merged.iter().any(|&(lo, hi)| lo <= *p && *p <= hi));
        // -0.0 and 0.0 compare equal; store the positive zero
        for p in &mut pts {
            if *p == 0.0 {
                *p = 0.0;
            }
        }
        Self {
            intervals: merged,
            points: pts,
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn isolated_points(&self) -> &[f64] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && self.points.is_empty()
    }

    /// Convex components in increasing order, points as degenerate intervals.
    pub fn components(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .intervals
            .iter()
            .copied()
            .chain(self.points.iter().map(|&p| (p, p)))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    pub fn contains(&self, v: f64) -> bool {
        self.points.contains(&v) || self.intervals.iter().any(|&(lo, hi)| lo <= v && v <= hi)
    }

    /// Euclidean distance from `v` to the set (`inf` for the empty set).
    pub fn distance_to(&self, v: f64) -> f64 {
        self.components()
            .iter()
            .map(|&(lo, hi)| {
                if v < lo {
                    lo - v
                } else if v > hi {
                    v - hi
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn inf(&self) -> Option<f64> {
        self.components().first().map(|c| c.0)
    }

    pub fn sup(&self) -> Option<f64> {
        self.components().iter().map(|c| c.1).reduce(f64::max)
    }

    pub fn is_bounded(&self) -> bool {
        self.components()
            .iter()
            .all(|&(lo, hi)| lo.is_finite() && hi.is_finite())
    }

    pub fn unbounded_above(&self) -> bool {
        self.sup() == Some(f64::INFINITY)
    }

    pub fn unbounded_below(&self) -> bool {
        self.inf() == Some(f64::NEG_INFINITY)
    }

    /// `true` when the set is exactly `{0}`.
    pub fn is_zero(&self) -> bool {
        self.intervals.is_empty() && self.points == [0.0]
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut ivs = self.intervals.clone();
        ivs.extend_from_slice(&other.intervals);
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points);
        Self::from_parts(ivs, pts)
    }

    pub fn intersect_interval(&self, lo: f64, hi: f64) -> Self {
        let ivs = self
            .intervals
            .iter()
            .map(|&(a, b)| (a.max(lo), b.min(hi)))
            .collect();
        let pts = self
            .points
            .iter()
            .copied()
            .filter(|&p| lo <= p && p <= hi)
            .collect();
        Self::from_parts(ivs, pts)
    }

    /// Exact inclusion test `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        let others = other.components();
        self.components().iter().all(|&(lo, hi)| {
            others
                .iter()
                .any(|&(olo, ohi)| olo <= lo && hi <= ohi)
        })
    }

    /// Inclusion after enlarging `other` by `tol` on every side.
    pub fn is_subset_within(&self, other: &Self, tol: f64) -> bool {
        self.is_subset_of(&other.expand(tol))
    }

    /// Enlarges every component by `r` on both sides.
    pub fn expand(&self, r: f64) -> Self {
        Self::from_parts(
            self.components()
                .into_iter()
                .map(|(lo, hi)| (lo - r, hi + r))
                .collect(),
            Vec::new(),
        )
    }

    /// Minkowski sum `{a + b : a ∈ self, b ∈ other}`.
    pub fn minkowski_sum(&self, other: &Self) -> Self {
        let mut ivs = Vec::new();
        for &(a, b) in &self.components() {
            for &(c, d) in &other.components() {
                ivs.push((
                    ext_add(a, c, f64::NEG_INFINITY),
                    ext_add(b, d, f64::INFINITY),
                ));
            }
        }
        Self::from_parts(ivs, Vec::new())
    }

    /// `{c·v : v ∈ self}`.
    pub fn scale(&self, c: f64) -> Self {
        if self.is_empty() {
            return Self::empty();
        }
        if c == 0.0 {
            return Self::point(0.0);
        }
        let ivs = self
            .intervals
            .iter()
            .map(|&(lo, hi)| {
                let (a, b) = (c * lo, c * hi);
                (a.min(b), a.max(b))
            })
            .collect();
        let pts = self.points.iter().map(|&p| c * p).collect();
        Self::from_parts(ivs, pts)
    }

    /// Closed convex hull (a single interval, point, or the empty set).
    pub fn convex_hull(&self) -> Self {
        match (self.inf(), self.sup()) {
            (Some(lo), Some(hi)) => Self::interval(lo, hi),
            _ => Self::empty(),
        }
    }

    /// Hausdorff distance between two bounded sets; `None` when either side is
    /// empty or unbounded.
    pub fn hausdorff(&self, other: &Self) -> Option<f64> {
        if self.is_empty() || other.is_empty() || !self.is_bounded() || !other.is_bounded() {
            return None;
        }
        Some(directed_hausdorff(self, other).max(directed_hausdorff(other, self)))
    }

    /// Approximate equality: identical ray structure, and Hausdorff distance
    /// at most `tol` between the parts inside a box covering every finite
    /// endpoint.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.is_empty() || other.is_empty() {
            return self.is_empty() && other.is_empty();
        }
        if self.unbounded_above() != other.unbounded_above()
            || self.unbounded_below() != other.unbounded_below()
        {
            return false;
        }
        let r = self
            .finite_magnitude()
            .max(other.finite_magnitude())
            + 1.0;
        let a = self.intersect_interval(-r, r);
        let b = other.intersect_interval(-r, r);
        match a.hausdorff(&b) {
            Some(h) => h <= tol,
            None => a.is_empty() && b.is_empty(),
        }
    }

    fn finite_magnitude(&self) -> f64 {
        self.components()
            .iter()
            .flat_map(|&(lo, hi)| [lo, hi])
            .filter(|v| v.is_finite())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `sup_{a ∈ from} d(a, to)` for bounded nonempty sets.
fn directed_hausdorff(from: &RealSet1D, to: &RealSet1D) -> f64 {
    let targets = to.components();
    let mut worst: f64 = 0.0;
    for (lo, hi) in from.components() {
        worst = worst.max(to.distance_to(lo)).max(to.distance_to(hi));
        // d(·, to) peaks at midpoints of the gaps between target components
        for w in targets.windows(2) {
            let mid = 0.5 * (w[0].1 + w[1].0);
            if lo <= mid && mid <= hi {
                worst = worst.max(to.distance_to(mid));
            }
        }
    }
    worst
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

impl fmt::Display for RealSet1D {
    /// Formats as e.g. `[-1, 1]`, `{-1, 1}`, `[0, inf) ∪ {-2}` or `∅`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        let mut parts: Vec<String> = self
            .intervals
            .iter()
            .map(|&(lo, hi)| {
                let open_lo = if lo.is_infinite() { "(" } else { "[" };
                let open_hi = if hi.is_infinite() { ")" } else { "]" };
                format!("{open_lo}{}, {}{open_hi}", fmt_bound(lo), fmt_bound(hi))
            })
            .collect();
        if !self.points.is_empty() {
            let pts: Vec<String> = self.points.iter().map(|&p| fmt_bound(p)).collect();
            parts.push(format!("{{{}}}", pts.join(", ")));
        }
        write!(f, "{}", parts.join(" ∪ "))
    }
}

fn parse_bound(s: &str) -> Result<f64, Error> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad set bound `{t}`"))),
    }
}

impl FromStr for RealSet1D {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s == "∅" || s == "{}" || s.is_empty() {
            return Ok(Self::empty());
        }
        let mut ivs = Vec::new();
        let mut pts = Vec::new();
        for part in s.split(['∪', 'U']) {
            let part = part.trim();
            if let Some(inner) = part.strip_prefix('{').and_then(|p| p.strip_suffix('}')) {
                for p in inner.split(',').filter(|p| !p.trim().is_empty()) {
                    pts.push(parse_bound(p)?);
                }
            } else if part.len() >= 2
                && (part.starts_with('[') || part.starts_with('('))
                && (part.ends_with(']') || part.ends_with(')'))
            {
                let inner = &part[1..part.len() - 1];
                let (lo, hi) = inner
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("bad interval `{part}`")))?;
                ivs.push((parse_bound(lo)?, parse_bound(hi)?));
            } else {
                return Err(Error::Parse(format!("bad set component `{part}`")));
            }
        }
        Ok(Self::from_parts(ivs, pts))
    }
}

impl Serialize for RealSet1D {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RealSet1D {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalization_merges_and_absorbs() {
        let s = RealSet1D::from_parts(vec![(0.0, 1.0), (1.0, 2.0), (5.0, 6.0)], vec![0.5, 3.0, 3.0]);
        assert_eq!(s.intervals(), &[(0.0, 2.0), (5.0, 6.0)]);
        assert_eq!(s.isolated_points(), &[3.0]);
        assert_eq!(RealSet1D::interval(2.0, 2.0), RealSet1D::point(2.0));
        assert!(RealSet1D::interval(3.0, 2.0).is_empty());
    }

    #[test]
    fn minkowski_with_rays() {
        let a = RealSet1D::nonneg_ray();
        let b = RealSet1D::point(-1.0);
        assert_eq!(a.minkowski_sum(&b), RealSet1D::interval(-1.0, f64::INFINITY));
        let c = RealSet1D::nonneg_ray().minkowski_sum(&RealSet1D::nonpos_ray());
        assert_eq!(c, RealSet1D::whole_line());
        let d = RealSet1D::interval(-1.0, 1.0).minkowski_sum(&RealSet1D::point(-1.0));
        assert_eq!(d, RealSet1D::interval(-2.0, 0.0));
    }

    #[test]
    fn hull_scale_subset() {
        let s = RealSet1D::points(&[-1.0, 1.0]);
        assert_eq!(s.convex_hull(), RealSet1D::interval(-1.0, 1.0));
        assert_eq!(s.scale(-2.0), RealSet1D::points(&[-2.0, 2.0]));
        assert!(s.is_subset_of(&RealSet1D::interval(-1.0, 1.0)));
        assert!(!RealSet1D::interval(-1.0, 1.0).is_subset_of(&s));
        assert!(RealSet1D::empty().is_subset_of(&s));
        assert_eq!(RealSet1D::nonneg_ray().scale(0.0), RealSet1D::point(0.0));
    }

    #[test]
    fn hausdorff_gap_midpoint() {
        let a = RealSet1D::interval(0.0, 4.0);
        let b = RealSet1D::points(&[0.0, 4.0]);
        assert_eq!(a.hausdorff(&b), Some(2.0));
        assert_eq!(b.hausdorff(&a), Some(2.0));
        assert!(RealSet1D::nonneg_ray().hausdorff(&a).is_none());
    }

    #[test]
    fn approx_eq_checks_rays_exactly() {
        let a = RealSet1D::interval(0.0, f64::INFINITY);
        let b = RealSet1D::interval(1e-9, f64::INFINITY);
        assert!(a.approx_eq(&b, 1e-6));
        assert!(!a.approx_eq(&RealSet1D::interval(0.0, 1e9), 1e-6));
        assert!(RealSet1D::empty().approx_eq(&RealSet1D::empty(), 0.0));
    }

    #[test]
    fn display_and_parse() {
        let s = RealSet1D::from_parts(vec![(f64::NEG_INFINITY, -3.0)], vec![1.0, 2.5]);
        assert_eq!(s.to_string(), "(-inf, -3] ∪ {1, 2.5}");
        assert_eq!(RealSet1D::nonneg_ray().to_string(), "[0, inf)");
        assert_eq!(RealSet1D::empty().to_string(), "∅");
        assert_eq!("[0, inf)".parse::<RealSet1D>().unwrap(), RealSet1D::nonneg_ray());
        assert_eq!("[-2, 0] U {3}".parse::<RealSet1D>().unwrap().components().len(), 2);
        assert!("[1, 2".parse::<RealSet1D>().is_err());
    }

    fn arb_set() -> impl Strategy<Value = RealSet1D> {
        let bound = prop_oneof![
            4 => -100.0f64..100.0,
            1 => Just(f64::INFINITY),
            1 => Just(f64::NEG_INFINITY),
        ];
        (
            prop::collection::vec((bound.clone(), bound), 0..4),
            prop::collection::vec(-100.0f64..100.0, 0..4),
        )
            .prop_map(|(ivs, pts)| RealSet1D::from_parts(ivs, pts))
    }

    proptest! {
        #[test]
        fn text_form_round_trips(s in arb_set()) {
            let back: RealSet1D = s.to_string().parse().unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn normal_form_is_stable(s in arb_set()) {
            let again = RealSet1D::from_parts(s.intervals().to_vec(), s.isolated_points().to_vec());
            prop_assert_eq!(&again, &s);
            for w in s.intervals().windows(2) {
                prop_assert!(w[0].1 < w[1].0);
            }
        }

        #[test]
        fn minkowski_contains_pairwise_sums(a in arb_set(), b in arb_set(), x in -50.0f64..50.0, y in -50.0f64..50.0) {
            let sum = a.minkowski_sum(&b);
            if a.contains(x) && b.contains(y) {
                prop_assert!(sum.contains(x + y));
            }
            prop_assert!(a.is_subset_of(&a.convex_hull()));
        }
    }
}
