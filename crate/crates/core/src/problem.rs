//! Constrained multiobjective problems, their proximal regularizations, and
//! the brute-force lattice Pareto oracle.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{build_prox_objective, LinIneq, VectorFunction};
use crate::set1d::RealSet1D;

/// Closed constraint set `Ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSet {
    Whole {
        dim: usize,
    },
    Box {
        #[serde(with = "crate::report::ext_vec")]
        lo: Vec<f64>,
        #[serde(with = "crate::report::ext_vec")]
        hi: Vec<f64>,
    },
    /// `{x : a_k·x ≤ b_k}`; `feasible_point` certifies nonemptiness.
    Polyhedron {
        ineqs: Vec<LinIneq>,
        feasible_point: Vec<f64>,
    },
}

/// Outward generators of a normal cone; no generators means the cone `{0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalCone {
    pub generators: Vec<Vec<f64>>,
}

impl NormalCone {
    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty()
    }
}

const ACTIVE_TOL: f64 = 1e-12;
const MAX_POLY_CONSTRAINTS: usize = 8;

impl ConstraintSet {
    pub fn whole(dim: usize) -> Self {
        ConstraintSet::Whole { dim }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        ConstraintSet::Box {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConstraintSet::Whole { dim } => *dim,
            ConstraintSet::Box { lo, .. } => lo.len(),
            ConstraintSet::Polyhedron { feasible_point, .. } => feasible_point.len(),
        }
    }

    pub fn is_whole(&self) -> bool {
        match self {
            ConstraintSet::Whole { .. } => true,
            ConstraintSet::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .all(|(l, h)| *l == f64::NEG_INFINITY && *h == f64::INFINITY),
            ConstraintSet::Polyhedron { ineqs, .. } => ineqs.is_empty(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConstraintSet::Whole { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter("dimension must be positive".into()));
                }
            }
            ConstraintSet::Box { lo, hi } => {
                if lo.len() != hi.len() {
                    return Err(Error::DimensionMismatch {
                        expected: lo.len(),
                        got: hi.len(),
                    });
                }
                if lo.is_empty() || lo.iter().zip(hi).any(|(l, h)| !(l <= h) || l.is_nan()) {
                    return Err(Error::InvalidParameter("box needs lo ≤ hi".into()));
                }
            }
            ConstraintSet::Polyhedron {
                ineqs,
                feasible_point,
            } => {
                let n = feasible_point.len();
                if n == 0 {
                    return Err(Error::InvalidParameter("dimension must be positive".into()));
                }
                if let Some(g) = ineqs.iter().find(|g| g.coeffs.len() != n) {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: g.coeffs.len(),
                    });
                }
                if ineqs.iter().any(|g| g.strict) {
                    return Err(Error::InvalidParameter("polyhedron constraints must be closed".into()));
                }
                if !self.contains(feasible_point) {
                    return Err(Error::InvalidParameter("feasible point violates the constraints".into()));
                }
            }
        }
        Ok(())
    }

    /// Exact membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ConstraintSet::Whole { .. } => true,
            ConstraintSet::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *l <= *v && *v <= *h),
            ConstraintSet::Polyhedron { ineqs, .. } => ineqs.iter().all(|g| g.lhs(x) <= g.bound),
        }
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

    /// Euclidean distance `d_Ω(x)` and a nearest point.
    pub fn distance_and_projection(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_dim(x)?;
        let proj = match self {
            ConstraintSet::Whole { .. } => x.to_vec(),
            ConstraintSet::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| v.clamp(*l, *h))
                .collect(),
            ConstraintSet::Polyhedron { ineqs, .. } => {
                if self.contains(x) {
                    x.to_vec()
                } else {
                    project_polyhedron(ineqs, x)?
                }
            }
        };
        let d = x.iter().zip(&proj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        Ok((d, proj))
    }

    /// `d_Ω(x)`; panics on dimension mismatch (internal use).
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.distance_and_projection(x).map(|r| r.0).unwrap_or(f64::INFINITY)
    }

    /// Generators of the normal cone at `x ∈ Ω` (outward normals of the
    /// active constraints).
    pub fn normal_cone(&self, x: &[f64]) -> Result<NormalCone> {
        self.check_dim(x)?;
        if !self.contains(x) {
            return Err(Error::Precondition(format!("{x:?} is not in the constraint set")));
        }
        let n = x.len();
        let mut generators = Vec::new();
        match self {
            ConstraintSet::Whole { .. } => {}
            ConstraintSet::Box { lo, hi } => {
                for i in 0..n {
                    let unit = |s: f64| {
                        let mut e = vec![0.0; n];
                        e[i] = s;
                        e
                    };
                    if lo[i].is_finite() && (x[i] - lo[i]).abs() <= ACTIVE_TOL * (1.0 + lo[i].abs()) {
                        generators.push(unit(-1.0));
                    }
                    if hi[i].is_finite() && (x[i] - hi[i]).abs() <= ACTIVE_TOL * (1.0 + hi[i].abs()) {
                        generators.push(unit(1.0));
                    }
                }
            }
            ConstraintSet::Polyhedron { ineqs, .. } => {
                for g in ineqs {
                    let norm = g.coeffs.iter().map(|a| a * a).sum::<f64>().sqrt();
                    if norm > 0.0 && g.slack(x) <= ACTIVE_TOL * (1.0 + g.bound.abs()) {
                        generators.push(g.coeffs.iter().map(|a| a / norm).collect());
                    }
                }
            }
        }
        Ok(NormalCone { generators })
    }

    /// `∂d_Ω(x) = N_Ω(x) ∩ B` on the real line.
    pub fn dist_subdiff_1d(&self, x: f64) -> Result<RealSet1D> {
        if self.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.dim(),
            });
        }
        let cone = self.normal_cone(&[x])?;
        let pos = cone.generators.iter().any(|g| g[0] > 0.0);
        let neg = cone.generators.iter().any(|g| g[0] < 0.0);
        Ok(RealSet1D::interval(if neg { -1.0 } else { 0.0 }, if pos { 1.0 } else { 0.0 }))
    }
}

/// Projection onto a polyhedron by enumerating candidate active sets.
fn project_polyhedron(ineqs: &[LinIneq], x: &[f64]) -> Result<Vec<f64>> {
    let rows: Vec<&LinIneq> = ineqs.iter().filter(|g| g.coeffs.iter().any(|&a| a != 0.0)).collect();
    if rows.len() > MAX_POLY_CONSTRAINTS {
        return Err(Error::Unsupported(format!(
            "projection supports at most {MAX_POLY_CONSTRAINTS} constraints"
        )));
    }
    let n = x.len();
    let feasible = |y: &[f64]| {
        rows.iter()
            .all(|g| g.lhs(y) <= g.bound + 1e-10 * (1.0 + g.bound.abs()))
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << rows.len()) {
        let active: Vec<&LinIneq> = (0..rows.len()).filter(|k| mask >> k & 1 == 1).map(|k| rows[k]).collect();
        if active.len() > n {
            continue;
        }
        // y = x − Aᵀ(AAᵀ)⁻¹(Ax − b)
        let a = DMatrix::from_fn(active.len(), n, |r, c| active[r].coeffs[c]);
        let resid = DVector::from_iterator(active.len(), active.iter().map(|g| g.lhs(x) - g.bound));
        let gram = &a * a.transpose();
        let Some(mult) = gram.lu().solve(&resid) else {
            continue;
        };
        if mult.iter().any(|m| !m.is_finite()) {
            continue;
        }
        let step = a.transpose() * mult;
        let y: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, s)| xi - s).collect();
        if !feasible(&y) {
            continue;
        }
        let d = x.iter().zip(&y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, y));
        }
    }
    best.map(|b| b.1)
        .ok_or_else(|| Error::Unsupported("no feasible projection candidate".into()))
}

/// `min F(x)` over `x ∈ Ω` in the Pareto sense.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MOProblem {
    pub objectives: VectorFunction,
    pub constraint: ConstraintSet,
}

impl MOProblem {
    pub fn new(objectives: VectorFunction, constraint: ConstraintSet) -> Result<Self> {
        constraint.validate()?;
        if constraint.dim() != objectives.dim() {
            return Err(Error::DimensionMismatch {
                expected: objectives.dim(),
                got: constraint.dim(),
            });
        }
        Ok(Self {
            objectives,
            constraint,
        })
    }

    pub fn dim(&self) -> usize {
        self.objectives.dim()
    }
}

/// Proximal regularization at `x̃`: objectives `Ψ = F + λ‖x − x̃‖²Υ` over
/// `D = Ω ∩ {F ≤ F(x̃)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizedProblem {
    pub base: MOProblem,
    pub center: Vec<f64>,
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub psi: VectorFunction,
    /// `F(x̃)`.
    pub center_values: Vec<f64>,
}

/// Tolerance of the level-set part of `D`.
pub const LEVEL_TOL: f64 = 1e-12;

impl RegularizedProblem {
    pub fn new(base: MOProblem, center: Vec<f64>, lambda: f64, weights: Vec<f64>) -> Result<Self> {
        if center.len() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                got: center.len(),
            });
        }
        if !base.constraint.contains(&center) {
            return Err(Error::Precondition("prox center must lie in the constraint set".into()));
        }
        let psi = build_prox_objective(&base.objectives, &center, lambda, &weights)?;
        let center_values = base.objectives.values(&center);
        Ok(Self {
            base,
            center,
            lambda,
            weights,
            psi,
            center_values,
        })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn psi_values(&self, x: &[f64]) -> Vec<f64> {
        self.psi.values(x)
    }

    /// `Φ(x) = F(x) − F(x̃)`.
    pub fn phi_values(&self, x: &[f64]) -> Vec<f64> {
        self.base
            .objectives
            .values(x)
            .iter()
            .zip(&self.center_values)
            .map(|(f, c)| f - c)
            .collect()
    }

    /// Level-set part of `D` (`Φ ≤ 0` up to [`LEVEL_TOL`]).
    pub fn in_level_set(&self, x: &[f64]) -> bool {
        self.phi_values(x).iter().all(|&p| p <= LEVEL_TOL)
    }

    /// Membership in `D = Ω ∩ {Φ ≤ 0}`.
    pub fn in_d(&self, x: &[f64]) -> bool {
        self.base.constraint.contains(x) && self.in_level_set(x)
    }
}

/// Uniform lattice `lo_i + k·step` within per-coordinate ranges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub ranges: Vec<(f64, f64)>,
    pub step: f64,
    #[serde(default = "default_cap")]
    pub cap: u64,
}

fn default_cap() -> u64 {
    10_000_000
}

impl Grid {
    pub fn new(ranges: Vec<(f64, f64)>, step: f64) -> Result<Self> {
        let g = Self {
            ranges,
            step,
            cap: default_cap(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn line(lo: f64, hi: f64, step: f64) -> Result<Self> {
        Self::new(vec![(lo, hi)], step)
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidParameter("grid step must be positive".into()));
        }
        if self.ranges.is_empty() || self.ranges.iter().any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::InvalidParameter("grid ranges need finite lo ≤ hi".into()));
        }
        let size = self.size();
        if size > self.cap as u128 {
            return Err(Error::GridCapExceeded {
                points: size,
                cap: self.cap,
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.ranges.len()
    }

    pub fn counts(&self) -> Vec<u64> {
        self.ranges
            .iter()
            .map(|(l, h)| ((h - l) / self.step + 1e-9).floor() as u64 + 1)
            .collect()
    }

    pub fn size(&self) -> u128 {
        self.counts().iter().map(|&c| c as u128).product()
    }

    /// Lattice point with linear index `idx` (first coordinate fastest).
    pub fn point(&self, mut idx: u64) -> Vec<f64> {
        self.counts()
            .iter()
            .zip(&self.ranges)
            .map(|(&c, (l, _))| {
                let k = idx % c;
                idx /= c;
                l + k as f64 * self.step
            })
            .collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let counts = self.counts();
        let total: u64 = counts.iter().product();
        (0..total).map(|i| self.point(i)).collect()
    }
}

/// A lattice point that no other feasible lattice point dominates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub index: u64,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

/// Values closer than this are treated as ties.
pub const TIE_TOL: f64 = 1e-15;

/// `a` dominates `b`: no worse everywhere, strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() <= TIE_TOL {
            continue;
        }
        if x > y {
            return false;
        }
        strict = true;
    }
    strict
}

fn archive_insert(archive: &mut Vec<ParetoPoint>, p: ParetoPoint) {
    if archive.iter().any(|q| dominates(&q.values, &p.values)) {
        return;
    }
    archive.retain(|q| !dominates(&p.values, &q.values));
    archive.push(p);
}

/// Non-dominated lattice points of `objectives` over `feasible ∩ grid`,
/// sorted by lattice index. Points with an infinite value are skipped.
pub fn pareto_lattice<V, F>(objectives: V, feasible: F, grid: &Grid) -> Result<Vec<ParetoPoint>>
where
    V: Fn(&[f64]) -> Vec<f64> + Sync,
    F: Fn(&[f64]) -> bool + Sync,
{
    grid.validate()?;
    let total = grid.size() as u64;
    const CHUNK: u64 = 4096;
    let chunks: Vec<Vec<ParetoPoint>> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut archive = Vec::new();
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let x = grid.point(idx);
                if !feasible(&x) {
                    continue;
                }
                let values = objectives(&x);
                if values.iter().any(|v| !v.is_finite()) {
                    continue;
                }
                archive_insert(&mut archive, ParetoPoint { index: idx, x, values });
            }
            archive
        })
        .collect();
    let mut archive = Vec::new();
    for p in chunks.into_iter().flatten() {
        archive_insert(&mut archive, p);
    }
    archive.sort_by_key(|p| p.index);
    Ok(archive)
}

/// Lattice Pareto points of `F` over `Ω`.
pub fn pareto_bruteforce(p: &MOProblem, grid: &Grid) -> Result<Vec<ParetoPoint>> {
    check_grid(p.dim(), grid)?;
    pareto_lattice(|x| p.objectives.values(x), |x| p.constraint.contains(x), grid)
}

/// Lattice Pareto points of `Ψ` over `D`.
pub fn pareto_regularized(rp: &RegularizedProblem, grid: &Grid) -> Result<Vec<ParetoPoint>> {
    check_grid(rp.dim(), grid)?;
    pareto_lattice(|x| rp.psi_values(x), |x| rp.in_d(x), grid)
}

fn check_grid(n: usize, grid: &Grid) -> Result<()> {
    if grid.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: grid.dim(),
        });
    }
    Ok(())
}

/// `φ_γ(x) = max_i max{ψ_i(x) − ψ_i(x̄) + γ, φ_i(x)}`.
pub fn phi_gamma(rp: &RegularizedProblem, xbar: &[f64], gamma: f64, x: &[f64]) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    for p in [xbar, x] {
        if p.len() != rp.dim() {
            return Err(Error::DimensionMismatch {
                expected: rp.dim(),
                got: p.len(),
            });
        }
    }
    Ok(phi_gamma_unchecked(rp, &rp.psi_values(xbar), gamma, x))
}

pub(crate) fn phi_gamma_unchecked(rp: &RegularizedProblem, psi_bar: &[f64], gamma: f64, x: &[f64]) -> f64 {
    let psi = rp.psi_values(x);
    let phi = rp.phi_values(x);
    psi.iter()
        .zip(psi_bar)
        .zip(&phi)
        .map(|((p, pb), f)| (p - pb + gamma).max(*f))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Minimum of `φ_γ` over `Ω ∩ grid`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiScan {
    pub min: f64,
    pub argmin: Vec<f64>,
    pub positive: bool,
    pub points: u64,
}

pub fn phi_gamma_scan(rp: &RegularizedProblem, xbar: &[f64], gamma: f64, grid: &Grid) -> Result<PhiScan> {
    phi_gamma(rp, xbar, gamma, xbar)?;
    check_grid(rp.dim(), grid)?;
    grid.validate()?;
    let psi_bar = rp.psi_values(xbar);
    let total = grid.size() as u64;
    let best = (0..total)
        .into_par_iter()
        .filter_map(|i| {
            let x = grid.point(i);
            rp.base
                .constraint
                .contains(&x)
                .then(|| (phi_gamma_unchecked(rp, &psi_bar, gamma, &x), i))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (min, idx) = best.ok_or_else(|| Error::Precondition("no lattice point lies in the constraint set".into()))?;
    Ok(PhiScan {
        min,
        argmin: grid.point(idx),
        positive: min > 0.0,
        points: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projections() {
        let ray = ConstraintSet::interval(0.0, f64::INFINITY);
        assert_eq!(ray.distance_and_projection(&[-2.0]).unwrap(), (2.0, vec![0.0]));
        let seg = ConstraintSet::interval(1.0, 2.0);
        assert_eq!(seg.distance_and_projection(&[1.5]).unwrap(), (0.0, vec![1.5]));
        let half = ConstraintSet::Polyhedron {
            ineqs: vec![LinIneq::le(vec![1.0, 1.0], 0.0)],
            feasible_point: vec![0.0, 0.0],
        };
        let (d, p) = half.distance_and_projection(&[1.0, 1.0]).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert!(p.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn polyhedron_corner_projection() {
        let quad = ConstraintSet::Polyhedron {
            ineqs: vec![LinIneq::le(vec![1.0, 0.0], 0.0), LinIneq::le(vec![0.0, 1.0], 0.0)],
            feasible_point: vec![-1.0, -1.0],
        };
        let (d, p) = quad.distance_and_projection(&[3.0, 4.0]).unwrap();
        assert!((d - 5.0).abs() < 1e-12);
        assert!(p.iter().all(|v| v.abs() < 1e-12));
        let (d, p) = quad.distance_and_projection(&[3.0, -4.0]).unwrap();
        assert!((d - 3.0).abs() < 1e-12 && (p[1] + 4.0).abs() < 1e-12);
    }

    #[test]
    fn normal_cones() {
        let ray = ConstraintSet::interval(0.0, f64::INFINITY);
        assert_eq!(ray.normal_cone(&[0.0]).unwrap().generators, vec![vec![-1.0]]);
        assert!(ConstraintSet::interval(1.0, 2.0).normal_cone(&[1.5]).unwrap().is_trivial());
        let orthant = ConstraintSet::Box {
            lo: vec![0.0, 0.0],
            hi: vec![f64::INFINITY, f64::INFINITY],
        };
        assert_eq!(
            orthant.normal_cone(&[0.0, 0.0]).unwrap().generators,
            vec![vec![-1.0, 0.0], vec![0.0, -1.0]]
        );
        assert!(ray.normal_cone(&[-1.0]).is_err());
    }

    #[test]
    fn distance_subdifferentials() {
        let ray = ConstraintSet::interval(0.0, f64::INFINITY);
        assert_eq!(ray.dist_subdiff_1d(0.0).unwrap(), RealSet1D::interval(-1.0, 0.0));
        assert_eq!(ray.dist_subdiff_1d(3.0).unwrap(), RealSet1D::point(0.0));
        let seg = ConstraintSet::interval(1.0, 2.0);
        assert_eq!(seg.dist_subdiff_1d(2.0).unwrap(), RealSet1D::interval(0.0, 1.0));
    }

    #[test]
    fn grid_indexing_and_cap() {
        let g = Grid::new(vec![(0.0, 1.0), (-1.0, 1.0)], 0.5).unwrap();
        assert_eq!(g.counts(), vec![3, 5]);
        assert_eq!(g.point(0), vec![0.0, -1.0]);
        assert_eq!(g.point(4), vec![0.5, -0.5]);
        let big = Grid::new(vec![(0.0, 1e4), (0.0, 1e4)], 1e-2);
        assert!(matches!(big, Err(Error::GridCapExceeded { .. })));
    }

    #[test]
    fn dominance_tolerates_float_ties() {
        assert!(dominates(&[0.0, 1.0], &[0.0, 2.0]));
        assert!(!dominates(&[0.0, 1.0], &[0.0, 1.0 + 1e-16]));
        assert!(!dominates(&[0.0, 3.0], &[1.0, 2.0]));
    }
}
