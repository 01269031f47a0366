//! Regular, limiting, singular and Clarke subdifferentials.
//!
//! The calculus is exact in one dimension: every adjoining piece is expanded
//! one-sidedly, and the four sets are read off from the one-sided quotient
//! limits and derivative cluster sets. In `R^n` only separable sums and
//! smooth points are supported; both reduce to per-coordinate sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{guard_interval_1d, PiecewiseFunction};
use crate::local::germ;
use crate::set1d::RealSet1D;

/// One adjoining side of a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideInfo {
    /// `+1` for the right side, `−1` for the left side.
    pub side: i8,
    /// Piece covering the side, if any.
    pub piece: Option<usize>,
    /// One-sided limit of the value (`+inf` outside the domain).
    #[serde(with = "crate::report::ext_f64")]
    pub limit: f64,
    /// Whether the side limit equals `f(x)`.
    pub attentive: bool,
    /// `liminf (f(x + s·h) − f(x)) / h`.
    #[serde(with = "crate::report::ext_f64")]
    pub quotient_liminf: f64,
    /// Cluster set of `f'` along the side, as a closed extended interval.
    #[serde(with = "crate::report::ext_pair")]
    pub derivative: (f64, f64),
    pub approximate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubdiffReport {
    pub point: f64,
    pub value: f64,
    pub frechet: RealSet1D,
    pub limiting: RealSet1D,
    pub singular: RealSet1D,
    /// Convex hull of the limiting set; absent at non-Lipschitz points.
    pub clarke: Option<RealSet1D>,
    pub lipschitz: bool,
    pub sides: Vec<SideInfo>,
    /// Set when some side fell back to sampling.
    pub approximate: bool,
}

const VALUE_TOL: f64 = 1e-12;

fn check_1d(f: &PiecewiseFunction) -> Result<()> {
    if f.dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: f.dim,
        });
    }
    Ok(())
}

fn side_piece(f: &PiecewiseFunction, x: f64, side: i8) -> Option<usize> {
    f.pieces
        .iter()
        .position(|p| guard_interval_1d(&p.guard).contains_side(x, side))
}

/// Sampled stand-in for the local expansion when the body is not resolved
/// symbolically.
fn sampled_side(f: &PiecewiseFunction, piece: usize, x: f64, s: f64) -> (f64, f64, (f64, f64)) {
    let body = &f.pieces[piece].body;
    let ev = |y: f64| body.eval(&[y]).unwrap_or(f64::INFINITY);
    let scale = x.abs().max(1.0);
    let hs: Vec<f64> = (6..=11)
        .flat_map(|k| (0..8).map(move |j| 10f64.powi(-k) * (1.0 + j as f64 / 8.0)))
        .map(|h| h * scale)
        .collect();
    let limit = ev(x + s * hs[hs.len() - 1]);
    let fx = f.value(&[x]);
    let q = hs
        .iter()
        .map(|&h| (ev(x + s * h) - fx) / h)
        .fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &h in &hs {
        let y = x + s * h;
        let eta = h * 1e-3;
        let d = (ev(y + eta) - ev(y - eta)) / (2.0 * eta);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let big = 1e6;
    let clamp = |d: f64| {
        if d > big {
            f64::INFINITY
        } else if d < -big {
            f64::NEG_INFINITY
        } else {
            d
        }
    };
    (limit, q, (clamp(lo), clamp(hi)))
}

fn analyze_side(f: &PiecewiseFunction, x: f64, fx: f64, side: i8) -> SideInfo {
    let s = side as f64;
    let Some(piece) = side_piece(f, x, side) else {
        return SideInfo {
            side,
            piece: None,
            limit: f64::INFINITY,
            attentive: false,
            quotient_liminf: f64::INFINITY,
            derivative: (0.0, 0.0),
            approximate: false,
        };
    };
    let (limit, q, deriv, approximate) = match germ(&f.pieces[piece].body, x, s) {
        Some(g) => {
            let limit = g.value.unwrap_or(f64::INFINITY);
            (limit, g.quotient_liminf(), g.derivative_cluster(s), false)
        }
        None => {
            let (limit, q, d) = sampled_side(f, piece, x, s);
            (limit, q, d, true)
        }
    };
    let attentive = limit.is_finite() && (limit - fx).abs() <= VALUE_TOL * (1.0 + fx.abs());
    let quotient_liminf = if attentive {
        q
    } else if limit > fx {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    SideInfo {
        side,
        piece: Some(piece),
        limit,
        attentive,
        quotient_liminf,
        derivative: deriv,
        approximate,
    }
}

/// Finite part of a closed extended interval.
fn finite_part((lo, hi): (f64, f64)) -> RealSet1D {
    if lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
        RealSet1D::empty()
    } else {
        RealSet1D::interval(lo, hi)
    }
}

/// Full one-dimensional report at `x`.
pub fn subdiff_report(f: &PiecewiseFunction, x: f64) -> Result<SubdiffReport> {
    check_1d(f)?;
    let fx = f.value(&[x]);
    if !fx.is_finite() {
        return Err(Error::OutsideDomain(vec![x]));
    }
    let sides = [analyze_side(f, x, fx, -1), analyze_side(f, x, fx, 1)];
    let lo = -sides[0].quotient_liminf;
    let hi = sides[1].quotient_liminf;
    let frechet = finite_part((lo, hi));

    let mut limiting = frechet.clone();
    let mut singular = RealSet1D::point(0.0);
    if frechet.unbounded_above() {
        singular = singular.union(&RealSet1D::nonneg_ray());
    }
    if frechet.unbounded_below() {
        singular = singular.union(&RealSet1D::nonpos_ray());
    }
    for side in sides.iter().filter(|s| s.attentive) {
        limiting = limiting.union(&finite_part(side.derivative));
        if side.derivative.1 == f64::INFINITY {
            singular = singular.union(&RealSet1D::nonneg_ray());
        }
        if side.derivative.0 == f64::NEG_INFINITY {
            singular = singular.union(&RealSet1D::nonpos_ray());
        }
    }
    let lipschitz = singular.is_zero();
    let clarke = lipschitz.then(|| limiting.convex_hull());
    Ok(SubdiffReport {
        point: x,
        value: fx,
        frechet,
        limiting,
        singular,
        clarke,
        lipschitz,
        approximate: sides.iter().any(|s| s.approximate),
        sides: sides.to_vec(),
    })
}

pub fn frechet_subdiff(f: &PiecewiseFunction, x: f64) -> Result<RealSet1D> {
    Ok(subdiff_report(f, x)?.frechet)
}

pub fn limiting_subdiff(f: &PiecewiseFunction, x: f64) -> Result<RealSet1D> {
    Ok(subdiff_report(f, x)?.limiting)
}

pub fn singular_subdiff(f: &PiecewiseFunction, x: f64) -> Result<RealSet1D> {
    Ok(subdiff_report(f, x)?.singular)
}

/// Clarke generalized gradient; fails at points where `f` is not locally
/// Lipschitzian.
pub fn clarke(f: &PiecewiseFunction, x: f64) -> Result<RealSet1D> {
    let r = subdiff_report(f, x)?;
    r.clarke.ok_or(Error::NotLipschitz {
        singular: r.singular,
    })
}

/// Shrinking levels `t_j = 10^{-j}` used by the sampling cross-checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSchedule {
    pub levels: Vec<f64>,
}

impl ProbeSchedule {
    pub fn geometric(first: i32, last: i32) -> Self {
        Self {
            levels: (first..=last).map(|j| 10f64.powi(-j)).collect(),
        }
    }
}

impl Default for ProbeSchedule {
    fn default() -> Self {
        Self::geometric(1, 6)
    }
}

/// Numeric limsup of `(f(y + t·d) − f(y)) / t` over `y → x`, `t ↓ 0`.
///
/// Each level `t_j` scans a deterministic grid of `y` within `√t_j` of `x`
/// and steps `t ∈ t_j·{1, 1/2, 1/4, 1/10}`; the estimate is the maximum at
/// the finest level. The default schedule runs to `t = 1e-10`.
pub fn clarke_dirderiv(f: &PiecewiseFunction, x: f64, d: f64) -> Result<f64> {
    clarke_dirderiv_with(f, x, d, &ProbeSchedule::geometric(1, 10))
}

pub fn clarke_dirderiv_with(f: &PiecewiseFunction, x: f64, d: f64, sched: &ProbeSchedule) -> Result<f64> {
    let r = subdiff_report(f, x)?;
    if !r.lipschitz {
        return Err(Error::NotLipschitz { singular: r.singular });
    }
    const K: i32 = 64;
    let per_level: Vec<f64> = sched
        .levels
        .iter()
        .map(|&tj| {
            let radius = tj.sqrt();
            let mut best = f64::NEG_INFINITY;
            for k in -K..=K {
                let y = x + radius * k as f64 / K as f64;
                let fy = f.value(&[y]);
                for t in [tj, 0.5 * tj, 0.25 * tj, 0.1 * tj] {
                    best = best.max((f.value(&[y + t * d]) - fy) / t);
                }
            }
            best
        })
        .collect();
    let last = *per_level.last().ok_or_else(|| Error::InvalidParameter("empty schedule".into()))?;
    if !last.is_finite() || last.abs() > 1e8 {
        return Err(Error::BlowUp);
    }
    if per_level.len() >= 3 {
        let prev = per_level[per_level.len() - 3].abs();
        if last.abs() > 10.0 * prev.max(1.0) {
            return Err(Error::BlowUp);
        }
    }
    Ok(last)
}

/// Outcome of the sum rule at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumRule {
    /// Only the trivial combination of singular subgradients sums to zero.
    pub qualified: bool,
    pub singular: Vec<RealSet1D>,
    /// Minkowski sum of the limiting sets; an outer estimate of the limiting
    /// subdifferential of the sum when `qualified`.
    pub sum: RealSet1D,
}

/// Qualification check and Minkowski sum of limiting subdifferentials.
pub fn sum_rule(fs: &[PiecewiseFunction], x: f64) -> Result<SumRule> {
    if fs.is_empty() {
        return Err(Error::InvalidParameter("sum rule needs a function".into()));
    }
    let reports: Vec<SubdiffReport> = fs.iter().map(|f| subdiff_report(f, x)).collect::<Result<_>>()?;
    let singular: Vec<RealSet1D> = reports.iter().map(|r| r.singular.clone()).collect();
    // singular sets are closed cones in R: a nontrivial zero sum needs a
    // positive element in one and a negative element in another
    let pos: Vec<bool> = singular.iter().map(|s| s.sup().is_some_and(|v| v > 0.0)).collect();
    let neg: Vec<bool> = singular.iter().map(|s| s.inf().is_some_and(|v| v < 0.0)).collect();
    let qualified = !(0..fs.len()).any(|i| pos[i] && (0..fs.len()).any(|j| j != i && neg[j]));
    let sum = reports
        .iter()
        .skip(1)
        .fold(reports[0].limiting.clone(), |acc, r| acc.minkowski_sum(&r.limiting));
    Ok(SumRule {
        qualified,
        singular,
        sum,
    })
}

/// Outcome of a robustness (closedness) check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub passed: bool,
    pub trials: usize,
    /// Trials whose subgradient sequence converged.
    pub convergent: usize,
    /// Largest distance from a limit to the limiting set at the point.
    pub worst_distance: f64,
}

/// Samples `x_k → x` with `f(x_k) → f(x)`, picks `ω_k ∈ ∂^M f(x_k)` and
/// checks that convergent limits land in `∂^M f(x)` within `1e-9`.
pub fn robustness_check(f: &PiecewiseFunction, x: f64, trials: usize, seed: u64) -> Result<RobustnessReport> {
    let base = subdiff_report(f, x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = x.abs().max(1.0);
    let mut convergent = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let side = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let c: f64 = rng.gen_range(0.5..2.0);
        let mut omegas = Vec::new();
        let mut prev: Option<f64> = None;
        for k in 2..=40 {
            let xk = x + side * c * scale * 10f64.powi(-k);
            if xk == x {
                break;
            }
            let fk = f.value(&[xk]);
            if !fk.is_finite() || (fk - base.value).abs() > 10f64.powi(-k / 3).max(1e-9) * 10.0 {
                continue;
            }
            let set = subdiff_report(f, xk)?.limiting;
            let pick = match prev {
                Some(p) if !set.is_empty() => nearest(&set, p),
                _ => nearest(&set, 0.0),
            };
            if let Some(w) = pick {
                omegas.push(w);
                prev = Some(w);
            }
        }
        let n = omegas.len();
        if n < 3 {
            continue;
        }
        let (a, b, c2) = (omegas[n - 3], omegas[n - 2], omegas[n - 1]);
        let converging = c2.is_finite() && (c2 - b).abs() <= 1e-9 * (1.0 + c2.abs()) && (c2 - b).abs() <= (b - a).abs();
        if !converging {
            continue;
        }
        convergent += 1;
        worst = worst.max(base.limiting.distance_to(c2));
    }
    Ok(RobustnessReport {
        passed: worst <= 1e-9,
        trials,
        convergent,
        worst_distance: worst,
    })
}

fn nearest(set: &RealSet1D, target: f64) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for (lo, hi) in set.components() {
        let v = target.clamp(lo, hi);
        let d = (v - target).abs();
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, v));
        }
    }
    best.map(|b| b.1)
}

/// Brute-force lower estimate of the regular subdifferential.
///
/// Tests every candidate `v` on the grid `[-bound, bound]` with spacing
/// `step`: `v` passes when `(f(x + s·h) − f(x) − v·s·h)/h ≥ −1e-9` for both
/// sides and all sampled `h` at the finest level (down to `1e-6·t_J`).
pub fn numeric_frechet_probe(f: &PiecewiseFunction, x: f64, sched: &ProbeSchedule, bound: f64, step: f64) -> Result<RealSet1D> {
    check_1d(f)?;
    let fx = f.value(&[x]);
    if !fx.is_finite() {
        return Err(Error::OutsideDomain(vec![x]));
    }
    let tj = *sched
        .levels
        .last()
        .ok_or_else(|| Error::InvalidParameter("empty schedule".into()))?;
    let hs: Vec<f64> = (0..=24).map(|w| tj * 10f64.powf(-0.25 * w as f64)).collect();
    let samples: Vec<(f64, f64)> = [-1.0, 1.0]
        .iter()
        .flat_map(|&s| hs.iter().map(move |&h| (s, h)))
        .map(|(s, h)| (s, (f.value(&[x + s * h]) - fx) / h))
        .collect();
    let nsteps = (2.0 * bound / step).round() as i64;
    let mut hits: Vec<f64> = Vec::new();
    for k in 0..=nsteps {
        let v = -bound + k as f64 * step;
        let ok = samples.iter().all(|&(s, q)| q.is_nan() || q - v * s >= -1e-9);
        if ok {
            hits.push(v);
        }
    }
    // merge consecutive grid hits into intervals
    let mut intervals = Vec::new();
    let mut points = Vec::new();
    let mut i = 0;
    while i < hits.len() {
        let mut j = i;
        while j + 1 < hits.len() && (hits[j + 1] - hits[j] - step).abs() < step * 1e-6 {
            j += 1;
        }
        if j > i {
            intervals.push((hits[i], hits[j]));
        } else {
            points.push(hits[i]);
        }
        i = j + 1;
    }
    Ok(RealSet1D::from_parts(intervals, points))
}

/// How an `R^n` subdifferential was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    OneDimensional,
    Separable,
    Smooth,
}

/// Per-coordinate sets whose Cartesian products are the subdifferentials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductSubdiff {
    pub structure: Structure,
    pub frechet: Vec<RealSet1D>,
    pub limiting: Vec<RealSet1D>,
    pub singular: Vec<RealSet1D>,
    pub approximate: bool,
}

impl ProductSubdiff {
    pub fn lipschitz(&self) -> bool {
        self.singular.iter().all(RealSet1D::is_zero)
    }
}

/// Subdifferentials in `R^n` for one-dimensional, separable, or smooth
/// situations.
pub fn product_subdiff(f: &PiecewiseFunction, x: &[f64]) -> Result<ProductSubdiff> {
    if x.len() != f.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            got: x.len(),
        });
    }
    if !f.value(x).is_finite() {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    let from_reports = |structure, reports: Vec<SubdiffReport>| ProductSubdiff {
        structure,
        approximate: reports.iter().any(|r| r.approximate),
        frechet: reports.iter().map(|r| r.frechet.clone()).collect(),
        limiting: reports.iter().map(|r| r.limiting.clone()).collect(),
        singular: reports.iter().map(|r| r.singular.clone()).collect(),
    };
    if f.dim == 1 {
        return Ok(from_reports(Structure::OneDimensional, vec![subdiff_report(f, x[0])?]));
    }
    if f.is_separable() {
        let reports = (0..f.dim)
            .map(|i| subdiff_report(&f.restrict(i, x), x[i]))
            .collect::<Result<Vec<_>>>()?;
        return Ok(from_reports(Structure::Separable, reports));
    }
    let piece = f.active_piece(x).expect("finite value implies an active piece");
    let interior = f.pieces[piece].guard.iter().all(|g| g.slack(x) > 0.0);
    match f.pieces[piece].body.gradient(x) {
        Some(grad) if interior => {
            let sets: Vec<RealSet1D> = grad.iter().map(|&g| RealSet1D::point(g)).collect();
            Ok(ProductSubdiff {
                structure: Structure::Smooth,
                frechet: sets.clone(),
                limiting: sets,
                singular: vec![RealSet1D::point(0.0); f.dim],
                approximate: false,
            })
        }
        _ => Err(Error::Unsupported(
            "subdifferentials in R^n need a separable sum or a smooth point".into(),
        )),
    }
}
