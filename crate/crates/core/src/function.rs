//! Piecewise-defined extended-real-valued functions and vector objectives.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

/// `coeffs · x ≤ bound`, or `<` when `strict`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinIneq {
    pub coeffs: Vec<f64>,
    pub bound: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub strict: bool,
}

impl LinIneq {
    pub fn le(coeffs: Vec<f64>, bound: f64) -> Self {
        Self {
            coeffs,
            bound,
            strict: false,
        }
    }

    pub fn lt(coeffs: Vec<f64>, bound: f64) -> Self {
        Self {
            coeffs,
            bound,
            strict: true,
        }
    }

    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn holds(&self, x: &[f64]) -> bool {
        let l = self.lhs(x);
        if self.strict {
            l < self.bound
        } else {
            l <= self.bound
        }
    }

    /// Slack `bound - coeffs·x`.
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.bound - self.lhs(x)
    }

    fn restrict(&self, coord: usize, at: &[f64]) -> LinIneq {
        let rest: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != coord)
            .map(|(j, a)| a * at[j])
            .sum();
        LinIneq {
            coeffs: vec![self.coeffs[coord]],
            bound: self.bound - rest,
            strict: self.strict,
        }
    }
}

/// A conjunction of affine inequalities; the empty guard is all of `R^n`.
pub type Guard = Vec<LinIneq>;

pub fn guard_holds(guard: &[LinIneq], x: &[f64]) -> bool {
    guard.iter().all(|g| g.holds(x))
}

/// A one-dimensional guard as an interval with open/closed ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GuardInterval {
    pub lo: f64,
    pub lo_open: bool,
    pub hi: f64,
    pub hi_open: bool,
}

impl GuardInterval {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }

    pub fn contains(&self, y: f64) -> bool {
        let above = if self.lo_open { y > self.lo } else { y >= self.lo };
        let below = if self.hi_open { y < self.hi } else { y <= self.hi };
        above && below
    }

    /// Whether the guard contains `(y, y + ε)` (side `+1`) or `(y − ε, y)`
    /// (side `−1`) for all small `ε > 0`.
    pub fn contains_side(&self, y: f64, side: i8) -> bool {
        if side > 0 {
            self.lo <= y && y < self.hi
        } else {
            self.lo < y && y <= self.hi
        }
    }

    fn intersect(&self, o: &GuardInterval) -> GuardInterval {
        let (lo, lo_open) = if self.lo > o.lo {
            (self.lo, self.lo_open)
        } else if o.lo > self.lo {
            (o.lo, o.lo_open)
        } else {
            (self.lo, self.lo_open || o.lo_open)
        };
        let (hi, hi_open) = if self.hi < o.hi {
            (self.hi, self.hi_open)
        } else if o.hi < self.hi {
            (o.hi, o.hi_open)
        } else {
            (self.hi, self.hi_open || o.hi_open)
        };
        GuardInterval {
            lo,
            lo_open,
            hi,
            hi_open,
        }
    }

    fn to_guard(self) -> Guard {
        let mut g = Vec::new();
        if self.lo.is_finite() {
            g.push(LinIneq {
                coeffs: vec![-1.0],
                bound: -self.lo,
                strict: self.lo_open,
            });
        }
        if self.hi.is_finite() {
            g.push(LinIneq {
                coeffs: vec![1.0],
                bound: self.hi,
                strict: self.hi_open,
            });
        }
        g
    }
}

/// Interval described by a guard on the real line.
pub fn guard_interval_1d(guard: &[LinIneq]) -> GuardInterval {
    let mut out = GuardInterval {
        lo: f64::NEG_INFINITY,
        lo_open: false,
        hi: f64::INFINITY,
        hi_open: false,
    };
    for g in guard {
        let a = g.coeffs[0];
        let piece = if a > 0.0 {
            GuardInterval {
                lo: f64::NEG_INFINITY,
                lo_open: false,
                hi: g.bound / a,
                hi_open: g.strict,
            }
        } else if a < 0.0 {
            GuardInterval {
                lo: g.bound / a,
                lo_open: g.strict,
                hi: f64::INFINITY,
                hi_open: false,
            }
        } else if (g.strict && 0.0 < g.bound) || (!g.strict && 0.0 <= g.bound) {
            continue;
        } else {
            return GuardInterval {
                lo: 1.0,
                lo_open: false,
                hi: 0.0,
                hi_open: false,
            };
        };
        out = out.intersect(&piece);
    }
    out
}

/// Radius of the largest ball inside the closure of `guard` (capped at
/// `cap`), or `None` when the closure is empty.
pub(crate) fn inscribed_radius(guard: &[LinIneq], n: usize, cap: f64) -> Option<f64> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let xs: Vec<_> = (0..n)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let s = lp.add_var(1.0, (0.0, cap));
    for g in guard {
        let norm = g.coeffs.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            if g.bound < 0.0 || (g.strict && g.bound == 0.0) {
                return None;
            }
            continue;
        }
        let mut terms: Vec<_> = xs.iter().copied().zip(g.coeffs.iter().copied()).collect();
        terms.push((s, norm));
        lp.add_constraint(terms.as_slice(), ComparisonOp::Le, g.bound);
    }
    lp.solve().ok().map(|sol| sol.objective())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(default)]
    pub guard: Guard,
    pub body: Expr,
}

/// Guarded pieces over `R^n`. A point is evaluated by the first piece whose
/// guard holds; points covered by no guard lie outside the domain (`+inf`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFunction {
    pub dim: usize,
    pub pieces: Vec<Piece>,
    #[serde(default = "default_true")]
    pub continuous: bool,
}

fn default_true() -> bool {
    true
}

impl PiecewiseFunction {
    /// Builds and validates a piecewise function.
    pub fn new(dim: usize, pieces: Vec<Piece>, continuous: bool) -> Result<Self> {
        let f = Self {
            dim,
            pieces,
            continuous,
        };
        f.validate()?;
        Ok(f)
    }

    /// A single unguarded piece.
    pub fn from_expr(dim: usize, body: Expr) -> Result<Self> {
        Self::new(
            dim,
            vec![Piece {
                guard: Vec::new(),
                body,
            }],
            true,
        )
    }

    /// Convenience constructor for one-dimensional functions given as
    /// `(interval, body)` pairs.
    pub fn from_intervals_1d(pieces: Vec<(GuardInterval, Expr)>, continuous: bool) -> Result<Self> {
        Self::new(
            1,
            pieces
                .into_iter()
                .map(|(iv, body)| Piece {
                    guard: iv.to_guard(),
                    body,
                })
                .collect(),
            continuous,
        )
    }

    /// Checks dimensions, disjointness of guard interiors and, when declared,
    /// continuity across shared boundaries.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if self.pieces.is_empty() {
            return Err(Error::InvalidParameter("function has no pieces".into()));
        }
        for p in &self.pieces {
            p.body.validate(self.dim)?;
            for g in &p.guard {
                if g.coeffs.len() != self.dim {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        got: g.coeffs.len(),
                    });
                }
                if !g.bound.is_finite() || g.coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidParameter("non-finite guard".into()));
                }
            }
        }
        for i in 0..self.pieces.len() {
            for j in i + 1..self.pieces.len() {
                if self.interiors_overlap(i, j) {
                    return Err(Error::InvalidParameter(format!(
                        "guards of pieces {i} and {j} overlap"
                    )));
                }
            }
        }
        if self.continuous {
            if let Some((x, gap)) = self.continuity_defect() {
                return Err(Error::InvalidParameter(format!(
                    "declared continuous but pieces disagree by {gap:e} at {x:?}"
                )));
            }
        }
        Ok(())
    }

    fn interiors_overlap(&self, i: usize, j: usize) -> bool {
        let (a, b) = (&self.pieces[i].guard, &self.pieces[j].guard);
        if self.dim == 1 {
            let (ia, ib) = (guard_interval_1d(a), guard_interval_1d(b));
            ia.lo.max(ib.lo) < ia.hi.min(ib.hi)
        } else {
            let both: Guard = a.iter().chain(b).cloned().collect();
            inscribed_radius(&both, self.dim, 1.0).is_some_and(|r| r > 1e-12)
        }
    }

    /// Largest disagreement between adjacent piece bodies at sampled shared
    /// boundary points, if above `1e-12`.
    pub fn continuity_defect(&self) -> Option<(Vec<f64>, f64)> {
        let mut worst: Option<(Vec<f64>, f64)> = None;
        for x in self.boundary_samples() {
            let vals: Vec<f64> = self
                .pieces
                .iter()
                .filter(|p| self.in_closure(&p.guard, &x))
                .filter_map(|p| p.body.eval(&x))
                .collect();
            for w in vals.windows(2) {
                let gap = (w[0] - w[1]).abs();
                let tol = 1e-12 * (1.0 + w[0].abs().max(w[1].abs()));
                if gap > tol && worst.as_ref().is_none_or(|(_, g)| gap > *g) {
                    worst = Some((x.clone(), gap));
                }
            }
        }
        worst
    }

    fn in_closure(&self, guard: &[LinIneq], x: &[f64]) -> bool {
        guard.iter().all(|g| g.lhs(x) <= g.bound + 1e-12 * (1.0 + g.bound.abs()))
    }

    fn boundary_samples(&self) -> Vec<Vec<f64>> {
        if self.dim == 1 {
            let mut pts: Vec<f64> = self
                .pieces
                .iter()
                .flat_map(|p| {
                    let iv = guard_interval_1d(&p.guard);
                    [iv.lo, iv.hi]
                })
                .filter(|v| v.is_finite())
                .collect();
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            return pts.into_iter().map(|v| vec![v]).collect();
        }
        // project a fixed cloud of points onto every guard hyperplane
        let mut out = Vec::new();
        let cloud: Vec<Vec<f64>> = (0..24)
            .map(|k| {
                (0..self.dim)
                    .map(|d| {
                        let t = (k * (d + 3) + 7 * d) as f64;
                        (t * 0.6180339887498949).fract() * 8.0 - 4.0
                    })
                    .collect()
            })
            .collect();
        for p in &self.pieces {
            for g in &p.guard {
                let nn: f64 = g.coeffs.iter().map(|a| a * a).sum();
                if nn == 0.0 {
                    continue;
                }
                for c in &cloud {
                    let shift = g.slack(c) / nn;
                    out.push(c.iter().zip(&g.coeffs).map(|(ci, a)| ci + shift * a).collect());
                }
            }
        }
        out
    }

    /// Index of the piece that evaluates `x`.
    pub fn active_piece(&self, x: &[f64]) -> Option<usize> {
        self.pieces.iter().position(|p| guard_holds(&p.guard, x))
    }

    /// Value at `x`; `+inf` outside the domain.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.value(x))
    }

    /// Unchecked evaluation; `x` must have length `dim`.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.active_piece(x)
            .and_then(|i| self.pieces[i].body.eval(x))
            .filter(|v| !v.is_nan())
            .unwrap_or(f64::INFINITY)
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        self.value(x) < f64::INFINITY
    }

    /// `c · f`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    guard: p.guard.clone(),
                    body: Expr::scale(c, p.body.clone()),
                })
                .collect(),
            continuous: self.continuous,
        }
    }

    /// The one-dimensional function `y ↦ f(at with at[coord] = y)`.
    pub fn restrict(&self, coord: usize, at: &[f64]) -> Self {
        Self {
            dim: 1,
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    guard: p.guard.iter().map(|g| g.restrict(coord, at)).collect(),
                    body: p.body.restrict(coord, at),
                })
                .collect(),
            continuous: self.continuous,
        }
    }

    /// Whether `f` is a single piece with a box guard whose body is a sum of
    /// terms that each depend on at most one coordinate.
    pub fn is_separable(&self) -> bool {
        if self.pieces.len() != 1 {
            return false;
        }
        let p = &self.pieces[0];
        let box_guard = p
            .guard
            .iter()
            .all(|g| g.coeffs.iter().filter(|&&c| c != 0.0).count() <= 1);
        fn terms<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            match e {
                Expr::Sum { terms: ts } => ts.iter().for_each(|t| terms(t, out)),
                Expr::Scale { arg, .. } => terms(arg, out),
                other => out.push(other),
            }
        }
        let mut ts = Vec::new();
        terms(&p.body, &mut ts);
        box_guard
            && ts.iter().all(|t| match t {
                // ‖x − c‖² splits into coordinate squares
                Expr::SqNormShift { .. } => true,
                t => t.support(self.dim).iter().filter(|&&b| b).count() <= 1,
            })
    }

    pub fn has_oscillation(&self) -> bool {
        self.pieces.iter().any(|p| p.body.has_oscillation())
    }
}

/// `F = (f_1, …, f_m)` over a common dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorFunction {
    pub components: Vec<PiecewiseFunction>,
}

impl VectorFunction {
    pub fn new(components: Vec<PiecewiseFunction>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("vector function needs a component".into()))?;
        for c in &components {
            if c.dim != first.dim {
                return Err(Error::DimensionMismatch {
                    expected: first.dim,
                    got: c.dim,
                });
            }
        }
        Ok(Self { components })
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// Unchecked evaluation.
    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.value(x)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineKind {
    Sum,
    Max,
}

/// Pointwise sum or max on the common refinement of the piece partitions.
///
/// Refined pieces are listed in lexicographic order of the source pieces, so
/// first-match evaluation agrees with evaluating each member separately.
pub fn combine(kind: CombineKind, fs: &[PiecewiseFunction]) -> Result<PiecewiseFunction> {
    let (first, rest) = fs
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("combine needs at least one function".into()))?;
    let mut acc = first.clone();
    for f in rest {
        if f.dim != acc.dim {
            return Err(Error::DimensionMismatch {
                expected: acc.dim,
                got: f.dim,
            });
        }
        acc = combine_pair(kind, &acc, f);
    }
    Ok(acc)
}

fn combine_pair(kind: CombineKind, f: &PiecewiseFunction, g: &PiecewiseFunction) -> PiecewiseFunction {
    let n = f.dim;
    let mut pieces = Vec::new();
    for p in &f.pieces {
        for q in &g.pieces {
            let guard: Guard = p.guard.iter().chain(&q.guard).cloned().collect();
            if guard_is_empty(&guard, n) {
                continue;
            }
            match kind {
                CombineKind::Sum => pieces.push(Piece {
                    guard,
                    body: flat_sum(&p.body, &q.body),
                }),
                CombineKind::Max => pieces.extend(split_max(guard, &p.body, &q.body, n)),
            }
        }
    }
    PiecewiseFunction {
        dim: n,
        pieces,
        continuous: f.continuous && g.continuous,
    }
}

fn guard_is_empty(guard: &[LinIneq], n: usize) -> bool {
    if n == 1 {
        guard_interval_1d(guard).is_empty()
    } else {
        inscribed_radius(guard, n, 1.0).is_none()
    }
}

fn flat_sum(a: &Expr, b: &Expr) -> Expr {
    let mut terms = Vec::new();
    for e in [a, b] {
        match e {
            Expr::Sum { terms: ts } => terms.extend(ts.iter().cloned()),
            other => terms.push(other.clone()),
        }
    }
    Expr::sum(terms)
}

/// Splits `max(a, b)` on `guard` along the switching surface when both bodies
/// are affine, or quadratic in one variable; otherwise keeps a max node.
fn split_max(guard: Guard, a: &Expr, b: &Expr, n: usize) -> Vec<Piece> {
    let keep = |guard: Guard| {
        vec![Piece {
            guard,
            body: Expr::max(vec![a.clone(), b.clone()]),
        }]
    };
    if let (Some(la), Some(lb)) = (a.as_affine(n), b.as_affine(n)) {
        // a ≥ b  ⇔  (b − a)·x ≤ a₀ − b₀
        let diff: Vec<f64> = lb.coeffs.iter().zip(&la.coeffs).map(|(y, x)| y - x).collect();
        let bound = la.offset - lb.offset;
        if diff.iter().all(|&d| d == 0.0) {
            return vec![Piece {
                guard,
                body: if bound >= 0.0 { a.clone() } else { b.clone() },
            }];
        }
        let mut out = Vec::new();
        let mut ga = guard.clone();
        ga.push(LinIneq::le(diff.clone(), bound));
        let mut gb = guard;
        gb.push(LinIneq::lt(diff.iter().map(|d| -d).collect(), -bound));
        for (g, body) in [(ga, a), (gb, b)] {
            if !guard_is_empty(&g, n) {
                out.push(Piece {
                    guard: g,
                    body: body.clone(),
                });
            }
        }
        return out;
    }
    if n == 1 {
        if let (Some(qa), Some(qb)) = (a.as_quadratic_1d(), b.as_quadratic_1d()) {
            let d = [qa[0] - qb[0], qa[1] - qb[1], qa[2] - qb[2]];
            let mut cuts = real_roots(d);
            let iv = guard_interval_1d(&guard);
            cuts.retain(|&r| r > iv.lo && r < iv.hi);
            let mut edges = vec![f64::NEG_INFINITY];
            edges.extend(cuts);
            edges.push(f64::INFINITY);
            let mut out = Vec::new();
            for w in edges.windows(2) {
                let probe = interior_probe(w[0].max(iv.lo), w[1].min(iv.hi));
                let val = d[0] + probe * (d[1] + probe * d[2]);
                let body = if val >= 0.0 { a } else { b };
                let cell = GuardInterval {
                    lo: w[0],
                    lo_open: false,
                    hi: w[1],
                    hi_open: false,
                };
                let sub = iv.intersect(&cell);
                if !sub.is_empty() {
                    out.push(Piece {
                        guard: sub.to_guard(),
                        body: body.clone(),
                    });
                }
            }
            return out;
        }
    }
    keep(guard)
}

fn interior_probe(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

/// Real roots of `c0 + c1·y + c2·y²`, sorted.
fn real_roots([c0, c1, c2]: [f64; 3]) -> Vec<f64> {
    if c2 == 0.0 {
        return if c1 == 0.0 { vec![] } else { vec![-c0 / c1] };
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return vec![];
    }
    // numerically stable pair
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    let mut r = if q == 0.0 {
        vec![0.0]
    } else {
        vec![q / c2, c0 / q]
    };
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

/// `ψ_i = f_i + λ‖x − x̃‖²υ_i`.
pub fn build_prox_objective(
    f: &VectorFunction,
    center: &[f64],
    lambda: f64,
    weights: &[f64],
) -> Result<VectorFunction> {
    check_prox_params(f, center, lambda, weights)?;
    let components = f
        .components
        .iter()
        .zip(weights)
        .map(|(fi, &w)| PiecewiseFunction {
            dim: fi.dim,
            pieces: fi
                .pieces
                .iter()
                .map(|p| Piece {
                    guard: p.guard.clone(),
                    body: flat_sum(
                        &p.body,
                        &Expr::scale(lambda * w, Expr::sq_norm_shift(center.to_vec())),
                    ),
                })
                .collect(),
            continuous: fi.continuous,
        })
        .collect();
    Ok(VectorFunction { components })
}

pub(crate) fn check_prox_params(
    f: &VectorFunction,
    center: &[f64],
    lambda: f64,
    weights: &[f64],
) -> Result<()> {
    if center.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: center.len(),
        });
    }
    if weights.len() != f.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            got: weights.len(),
        });
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if let Some(w) = weights.iter().find(|&&w| !(w > 0.0)) {
        return Err(Error::InvalidParameter(format!("weights must be positive, got {w}")));
    }
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "weight vector must have unit norm, got {norm}"
        )));
    }
    if let Some(i) = f.values(center).iter().position(|v| !v.is_finite()) {
        return Err(Error::Precondition(format!(
            "prox center lies outside the domain of component {i}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::AffineForm;

    fn x() -> Expr {
        Expr::coord(1, 0)
    }

    pub(crate) fn cube_root_pareto_f2() -> PiecewiseFunction {
        PiecewiseFunction::new(
            1,
            vec![
                Piece {
                    guard: vec![LinIneq::lt(vec![-1.0], 0.0)],
                    body: Expr::power(AffineForm::coord(1, 0), 1, 3).unwrap(),
                },
                Piece {
                    guard: vec![LinIneq::le(vec![1.0], 0.0)],
                    body: Expr::sum(vec![Expr::square(x()), x()]),
                },
            ],
            true,
        )
        .unwrap()
    }

    #[test]
    fn evaluates_pieces_and_domain() {
        let f2 = cube_root_pareto_f2();
        assert_eq!(f2.eval(&[-1.0]).unwrap(), 0.0);
        assert_eq!(f2.eval(&[8.0]).unwrap(), 2.0);
        assert!(f2.eval(&[1.0, 2.0]).is_err());
        let half = PiecewiseFunction::new(
            1,
            vec![Piece {
                guard: vec![LinIneq::le(vec![-1.0], 0.0)],
                body: x(),
            }],
            true,
        )
        .unwrap();
        assert_eq!(half.value(&[-1.0]), f64::INFINITY);
        let root = PiecewiseFunction::from_expr(1, Expr::power(AffineForm::coord(1, 0), 1, 2).unwrap()).unwrap();
        assert_eq!(root.value(&[-4.0]), f64::INFINITY);
    }

    #[test]
    fn rejects_overlap_and_discontinuity() {
        let overlap = PiecewiseFunction::new(
            1,
            vec![
                Piece {
                    guard: vec![LinIneq::le(vec![1.0], 1.0)],
                    body: x(),
                },
                Piece {
                    guard: vec![LinIneq::le(vec![-1.0], 0.0)],
                    body: x(),
                },
            ],
            false,
        );
        assert!(overlap.is_err());
        let jump = PiecewiseFunction::new(
            1,
            vec![
                Piece {
                    guard: vec![LinIneq::le(vec![1.0], 0.0)],
                    body: x(),
                },
                Piece {
                    guard: vec![LinIneq::lt(vec![-1.0], 0.0)],
                    body: Expr::constant(1.0),
                },
            ],
            true,
        );
        assert!(jump.is_err());
    }

    #[test]
    fn sum_refines_partition() {
        let abs = PiecewiseFunction::new(
            1,
            vec![
                Piece {
                    guard: vec![LinIneq::lt(vec![1.0], 0.0)],
                    body: Expr::scale(-1.0, x()),
                },
                Piece {
                    guard: vec![LinIneq::le(vec![-1.0], 0.0)],
                    body: x(),
                },
            ],
            true,
        )
        .unwrap();
        let neg = PiecewiseFunction::from_expr(1, Expr::scale(-1.0, x())).unwrap();
        let s = combine(CombineKind::Sum, &[abs, neg]).unwrap();
        assert_eq!(s.pieces.len(), 2);
        assert_eq!(s.value(&[0.0]), 0.0);
        assert_eq!(s.pieces[0].body.as_quadratic_1d(), Some([0.0, -2.0, 0.0]));
        assert_eq!(s.pieces[1].body.as_quadratic_1d(), Some([0.0, 0.0, 0.0]));
    }

    #[test]
    fn max_of_lines_is_abs() {
        let a = PiecewiseFunction::from_expr(1, x()).unwrap();
        let b = PiecewiseFunction::from_expr(1, Expr::scale(-1.0, x())).unwrap();
        let m = combine(CombineKind::Max, &[a, b]).unwrap();
        assert_eq!(m.pieces.len(), 2);
        for k in -1000..=1000 {
            let y = k as f64 * 1e-3;
            assert_eq!(m.value(&[y]), y.abs());
        }
    }

    #[test]
    fn max_splits_quadratics_in_one_variable() {
        let a = PiecewiseFunction::from_expr(1, Expr::square(x())).unwrap();
        let b = PiecewiseFunction::from_expr(1, Expr::constant(1.0)).unwrap();
        let m = combine(CombineKind::Max, &[a, b]).unwrap();
        assert_eq!(m.pieces.len(), 3);
        assert!(m.pieces.iter().all(|p| !matches!(p.body, Expr::Max { .. })));
        for y in [-3.0, -1.0, -0.5, 0.0, 0.7, 1.0, 2.0] {
            assert_eq!(m.value(&[y]), (y * y).max(1.0));
        }
    }

    #[test]
    fn max_splits_affine_planes() {
        let a = PiecewiseFunction::from_expr(2, Expr::coord(2, 0)).unwrap();
        let b = PiecewiseFunction::from_expr(2, Expr::coord(2, 1)).unwrap();
        let m = combine(CombineKind::Max, &[a, b]).unwrap();
        assert_eq!(m.pieces.len(), 2);
        assert_eq!(m.value(&[1.0, 3.0]), 3.0);
        assert_eq!(m.value(&[4.0, 3.0]), 4.0);
    }

    #[test]
    fn prox_objective() {
        let f = VectorFunction::new(vec![PiecewiseFunction::from_expr(1, Expr::abs(x())).unwrap()]).unwrap();
        let psi = build_prox_objective(&f, &[1.0], 1.0, &[1.0]).unwrap();
        assert_eq!(psi.values(&[0.0]), vec![1.0]);
        assert_eq!(psi.values(&[1.0]), f.values(&[1.0]));
        assert!(build_prox_objective(&f, &[1.0], 0.0, &[1.0]).is_err());
        assert!(build_prox_objective(&f, &[1.0], 1.0, &[0.9]).is_err());
        assert!(build_prox_objective(&f, &[1.0], 1.0, &[-1.0]).is_err());
    }

    #[test]
    fn separability() {
        let f = PiecewiseFunction::from_expr(
            2,
            Expr::sum(vec![
                Expr::power(AffineForm::coord(2, 0), 1, 3).unwrap(),
                Expr::power(AffineForm::coord(2, 1), 1, 3).unwrap(),
            ]),
        )
        .unwrap();
        assert!(f.is_separable());
        let g = PiecewiseFunction::from_expr(2, Expr::abs(Expr::affine(vec![1.0, 1.0], 0.0))).unwrap();
        assert!(!g.is_separable());
        let r = f.restrict(1, &[8.0, 0.0]);
        assert_eq!(r.value(&[-1.0]), 1.0);
    }
}
