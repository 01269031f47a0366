//! Numeric certification of the directionally Lipschitzian property.
//!
//! `f` is directionally Lipschitzian at `x̄` when, for some unit `u`,
//! `limsup (f(x + t·v) − f(x)) / t < ∞` as `x → x̄` f-attentively, `v → u`
//! and `t ↓ 0`. The limsup is estimated level by level on a shrinking
//! schedule and classified by how the per-level maxima evolve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{combine, CombineKind, PiecewiseFunction};
use crate::report::{ext_f64, ext_vec};

/// A scalar function on `R^n` that can be sampled.
pub trait ScalarField: Sync {
    fn dim(&self) -> usize;
    /// Value at `x`, `+inf` outside the domain.
    fn value_at(&self, x: &[f64]) -> f64;
    /// Continuous functions need no f-attentive filter.
    fn is_continuous(&self) -> bool {
        false
    }
}

impl ScalarField for PiecewiseFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value_at(&self, x: &[f64]) -> f64 {
        self.value(x)
    }

    fn is_continuous(&self) -> bool {
        self.continuous
    }
}

/// A closure on `R^n`, e.g. for scalarizations built on the fly.
pub struct FnField<F> {
    pub dim: usize,
    pub f: F,
    pub continuous: bool,
}

impl<F: Fn(&[f64]) -> f64 + Sync> ScalarField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value_at(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn is_continuous(&self) -> bool {
        self.continuous
    }
}

/// Shrinking sampling levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DLSchedule {
    /// Step levels `t_j`, strictly decreasing.
    pub steps: Vec<f64>,
    /// Neighborhood radii `δ_j` around `x̄`.
    pub deltas: Vec<f64>,
    /// Direction perturbation radii `ρ_j` around `u`.
    pub rhos: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for DLSchedule {
    /// `t_j = 10^{-j}` for `j = 1..6`, `δ_j = √t_j`, `ρ_j = √t_j / 2`,
    /// 256 samples per level.
    fn default() -> Self {
        let steps: Vec<f64> = (1..=6).map(|j| 10f64.powi(-j)).collect();
        Self {
            deltas: steps.iter().map(|t| t.sqrt()).collect(),
            rhos: steps.iter().map(|t| 0.5 * t.sqrt()).collect(),
            steps,
            samples: 256,
            seed: 0x5eed,
        }
    }
}

impl DLSchedule {
    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.steps.len();
        if n < 2 || self.deltas.len() != n || self.rhos.len() != n {
            return Err(Error::InvalidParameter(
                "schedule needs at least two levels of matching length".into(),
            ));
        }
        let decreasing = |v: &[f64], strict: bool| {
            v.windows(2).all(|w| if strict { w[1] < w[0] } else { w[1] <= w[0] })
        };
        if !decreasing(&self.steps, true)
            || !decreasing(&self.deltas, false)
            || !decreasing(&self.rhos, false)
            || self.steps.iter().any(|&t| t <= 0.0)
        {
            return Err(Error::InvalidParameter("schedule levels must decrease".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DLVerdict {
    #[serde(rename = "DL")]
    Dl,
    #[serde(rename = "not-DL")]
    NotDl,
    Inconclusive,
}

/// Per-direction outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub direction: Vec<f64>,
    pub steps: Vec<f64>,
    /// Per-level maximal quotients `Q_j`.
    #[serde(with = "ext_vec")]
    pub quotients: Vec<f64>,
    /// Slope of `log Q_j` against `log t_j` over levels with `Q_j > 0`.
    pub slope: Option<f64>,
    pub r_squared: Option<f64>,
    pub verdict: DLVerdict,
    /// Certified constant `L(x̄, u)` when the verdict is DL.
    #[serde(with = "ext_f64")]
    pub constant: f64,
    pub radius: f64,
}

/// A direction that certified, with its constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedDirection {
    pub direction: Vec<f64>,
    pub constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirLipReport {
    pub point: Vec<f64>,
    pub verdict: DLVerdict,
    /// Witness: the certified direction with the smallest constant, or the
    /// most representative direction otherwise.
    pub best: DirectionReport,
    /// Every certified direction.
    pub certified: Vec<CertifiedDirection>,
    pub directions_tested: usize,
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|a| *a /= n);
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller; one value per call keeps the stream simple
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn ball_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
    let mut g: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
    normalize(&mut g);
    let r = radius * rng.gen::<f64>().powf(1.0 / n as f64);
    g.iter().map(|a| a * r).collect()
}

const WIDTHS: [f64; 4] = [0.0, 0.25, 0.5, 0.75];

/// Per-level maxima `Q_j` of `(f(x + t·v) − f(x)) / t` over sampled
/// `x ∈ B_{δ_j}(x̄)` (filtered f-attentively unless `f` is continuous),
/// `v` near `u` and `t ∈ (0, t_j]`.
///
/// Samples cycle through `x = x̄`, `x = x̄ − t·v`, random points of the
/// ball, and random points whose masked coordinates straddle `x̄` along the
/// step; the random stream depends only on the seed, so functions analyzed
/// with the same schedule and direction see identical sample triples.
pub fn quotient_limsup<F: ScalarField + ?Sized>(f: &F, xbar: &[f64], u: &[f64], sched: &DLSchedule) -> Result<Vec<f64>> {
    sched.validate()?;
    let n = f.dim();
    if xbar.len() != n || u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if xbar.len() != n { xbar.len() } else { u.len() },
        });
    }
    let unorm = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (unorm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("direction must be a unit vector, norm {unorm}")));
    }
    let fbar = f.value_at(xbar);
    if !fbar.is_finite() {
        return Err(Error::OutsideDomain(xbar.to_vec()));
    }
    let continuous = f.is_continuous();
    let mut rng = ChaCha8Rng::seed_from_u64(sched.seed);
    let mut out = Vec::with_capacity(sched.steps.len());
    for j in 0..sched.steps.len() {
        let (tj, dj, rj) = (sched.steps[j], sched.deltas[j], sched.rhos[j]);
        let filter = tj.powf(1.0 / 3.0);
        let mut best = f64::NEG_INFINITY;
        for k in 0..sched.samples {
            let t = tj * 10f64.powf(-WIDTHS[k % WIDTHS.len()]);
            let mut v: Vec<f64> = ball_point(&mut rng, n, rj).iter().zip(u).map(|(r, ui)| ui + r).collect();
            normalize(&mut v);
            let offset = ball_point(&mut rng, n, dj);
            let theta: f64 = rng.gen();
            let mask: u32 = rng.gen();
            let x: Vec<f64> = match k % 4 {
                0 => xbar.to_vec(),
                1 => xbar.iter().zip(&v).map(|(a, vi)| a - t * vi).collect(),
                2 => xbar.iter().zip(&offset).map(|(a, o)| a + o).collect(),
                // some coordinates straddle x̄ along the step, the rest are
                // spread over the ball
                _ => (0..n)
                    .map(|i| {
                        if mask >> (i % 32) & 1 == 1 {
                            xbar[i] - theta * t * v[i]
                        } else {
                            xbar[i] + offset[i]
                        }
                    })
                    .collect(),
            };
            let fx = f.value_at(&x);
            if !fx.is_finite() || (!continuous && (fx - fbar).abs() > filter) {
                continue;
            }
            let y: Vec<f64> = x.iter().zip(&v).map(|(a, vi)| a + t * vi).collect();
            let q = (f.value_at(&y) - fx) / t;
            if q.is_nan() {
                continue;
            }
            best = best.max(q);
        }
        out.push(best);
    }
    Ok(out)
}

/// Least-squares slope and R² of `ys` against `xs`.
fn fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// Applies the verdict rule to per-level maxima.
///
/// * not-DL: over the levels with `Q_j > 0` (at least three), the fitted
///   slope of `log Q` against `log t` is `≤ −0.2` with `R² ≥ 0.9`;
/// * DL: the two finest maxima are finite and do not grow,
///   `Q_J ≤ Q_{J−1} + 0.1·max(|Q_{J−1}|, |Q_J|) + 1e-6`; the constant is
///   `max(Q_{J−1}, Q_J)`;
/// * otherwise inconclusive.
pub fn classify(steps: &[f64], quotients: &[f64], radius: f64, direction: Vec<f64>) -> DirectionReport {
    let pos: Vec<(f64, f64)> = steps
        .iter()
        .zip(quotients)
        .filter(|(_, &q)| q > 0.0 && q.is_finite())
        .map(|(&t, &q)| (t.ln(), q.ln()))
        .collect();
    let (slope, r2) = if pos.len() >= 3 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pos.into_iter().unzip();
        let (s, r) = fit(&xs, &ys);
        (Some(s), Some(r))
    } else {
        (None, None)
    };
    let jl = quotients.len() - 1;
    let (qp, ql) = (quotients[jl - 1], quotients[jl]);
    let blows_up = matches!((slope, r2), (Some(s), Some(r)) if s <= -0.2 && r >= 0.9);
    let finite = qp.is_finite() && ql.is_finite();
    let (verdict, constant) = if blows_up && ql > 0.0 {
        (DLVerdict::NotDl, f64::INFINITY)
    } else if finite && ql <= qp + 0.1 * qp.abs().max(ql.abs()) + 1e-6 {
        (DLVerdict::Dl, qp.max(ql))
    } else {
        (DLVerdict::Inconclusive, f64::INFINITY)
    };
    DirectionReport {
        direction,
        steps: steps.to_vec(),
        quotients: quotients.to_vec(),
        slope,
        r_squared: r2,
        verdict,
        constant,
        radius,
    }
}

/// Runs the limsup estimate and verdict rule along a single direction.
pub fn certify_direction<F: ScalarField + ?Sized>(f: &F, xbar: &[f64], u: &[f64], sched: &DLSchedule) -> Result<DirectionReport> {
    let q = quotient_limsup(f, xbar, u, sched)?;
    let radius = *sched.deltas.last().expect("validated");
    Ok(classify(&sched.steps, &q, radius, u.to_vec()))
}

/// Candidate unit directions: `±1` on the line, 64·n spread directions plus
/// the signed coordinate axes for `n ∈ {2, 3}`.
pub fn candidate_directions(n: usize) -> Result<Vec<Vec<f64>>> {
    let mut dirs: Vec<Vec<f64>> = match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..128)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 128.0;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            // Fibonacci sphere
            let m = 192;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "direction search covers n ≤ 3; supply a direction for n = {n}"
            )))
        }
    };
    if n > 1 {
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = s;
                let present = dirs
                    .iter()
                    .any(|d| d.iter().zip(&e).all(|(a, b)| (a - b).abs() < 1e-12));
                if !present {
                    dirs.push(e);
                }
            }
        }
    }
    for d in &mut dirs {
        normalize(d);
    }
    Ok(dirs)
}

/// Searches candidate directions and reports the verdict.
///
/// DL if some direction certifies (witness: smallest constant, ties by
/// index); not-DL if every direction blows up (witness: mildest slope);
/// otherwise inconclusive. Directions are analyzed in parallel with the same
/// sample stream, so the result does not depend on the worker count.
pub fn certify_dl<F: ScalarField + ?Sized>(f: &F, xbar: &[f64], sched: &DLSchedule) -> Result<DirLipReport> {
    let dirs = candidate_directions(f.dim())?;
    certify_dl_among(f, xbar, &dirs, sched)
}

pub fn certify_dl_among<F: ScalarField + ?Sized>(f: &F, xbar: &[f64], dirs: &[Vec<f64>], sched: &DLSchedule) -> Result<DirLipReport> {
    if dirs.is_empty() {
        return Err(Error::InvalidParameter("no candidate directions".into()));
    }
    let reports: Vec<DirectionReport> = dirs
        .par_iter()
        .map(|u| certify_direction(f, xbar, u, sched))
        .collect::<Result<_>>()?;
    let certified: Vec<CertifiedDirection> = reports
        .iter()
        .filter(|r| r.verdict == DLVerdict::Dl)
        .map(|r| CertifiedDirection {
            direction: r.direction.clone(),
            constant: r.constant,
        })
        .collect();
    let (verdict, best) = if !certified.is_empty() {
        let best = reports
            .iter()
            .filter(|r| r.verdict == DLVerdict::Dl)
            .min_by(|a, b| a.constant.total_cmp(&b.constant))
            .expect("nonempty");
        (DLVerdict::Dl, best.clone())
    } else if reports.iter().all(|r| r.verdict == DLVerdict::NotDl) {
        let best = reports
            .iter()
            .max_by(|a, b| {
                a.slope
                    .unwrap_or(f64::NEG_INFINITY)
                    .total_cmp(&b.slope.unwrap_or(f64::NEG_INFINITY))
            })
            .expect("nonempty");
        (DLVerdict::NotDl, best.clone())
    } else {
        let best = reports
            .iter()
            .find(|r| r.verdict == DLVerdict::Inconclusive)
            .expect("some direction is inconclusive");
        (DLVerdict::Inconclusive, best.clone())
    };
    Ok(DirLipReport {
        point: xbar.to_vec(),
        verdict,
        best,
        certified,
        directions_tested: dirs.len(),
    })
}

/// Result of checking the sum/max preservation rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CalculusCheck {
    Pass { l_f: f64, l_g: f64, l_combined: f64, bound: f64 },
    Fail { l_f: f64, l_g: f64, combined: Box<DirectionReport>, bound: f64 },
    /// `f` or `g` does not certify along `u`; the rule does not apply.
    PreconditionViolated { reason: String },
}

impl CalculusCheck {
    pub fn passed(&self) -> bool {
        matches!(self, CalculusCheck::Pass { .. })
    }
}

/// Checks that `f + g` (or `max(f, g)`) is DL along the common direction `u`
/// with `L ≤ L_f + L_g + 1e-3` (or `max(L_f, L_g) + 1e-3`).
pub fn dl_calculus_check(
    kind: CombineKind,
    f: &PiecewiseFunction,
    g: &PiecewiseFunction,
    xbar: &[f64],
    u: &[f64],
    sched: &DLSchedule,
) -> Result<CalculusCheck> {
    let rf = certify_direction(f, xbar, u, sched)?;
    let rg = certify_direction(g, xbar, u, sched)?;
    for (name, r) in [("f", &rf), ("g", &rg)] {
        if r.verdict != DLVerdict::Dl {
            return Ok(CalculusCheck::PreconditionViolated {
                reason: format!("{name} is not certified along u (verdict {:?})", r.verdict),
            });
        }
    }
    let h = combine(kind, &[f.clone(), g.clone()])?;
    let rh = certify_direction(&h, xbar, u, sched)?;
    let bound = match kind {
        CombineKind::Sum => rf.constant + rg.constant,
        CombineKind::Max => rf.constant.max(rg.constant),
    } + 1e-3;
    Ok(if rh.verdict == DLVerdict::Dl && rh.constant <= bound {
        CalculusCheck::Pass {
            l_f: rf.constant,
            l_g: rg.constant,
            l_combined: rh.constant,
            bound,
        }
    } else {
        CalculusCheck::Fail {
            l_f: rf.constant,
            l_g: rg.constant,
            combined: Box::new(rh),
            bound,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{AffineForm, Expr};

    fn f1(e: Expr) -> PiecewiseFunction {
        PiecewiseFunction::from_expr(1, e).unwrap()
    }

    fn cube_root_sum(n: usize) -> PiecewiseFunction {
        PiecewiseFunction::from_expr(
            n,
            Expr::sum((0..n).map(|i| Expr::power(AffineForm::coord(n, i), 1, 3).unwrap()).collect()),
        )
        .unwrap()
    }

    #[test]
    fn abs_is_bounded() {
        let q = quotient_limsup(&f1(Expr::abs(Expr::coord(1, 0))), &[0.0], &[1.0], &DLSchedule::default()).unwrap();
        assert!(q.iter().all(|&v| (0.9..=1.0 + 1e-9).contains(&v)), "{q:?}");
    }

    #[test]
    fn cube_root_sum_quotients_nonpositive() {
        let u = [-(0.5f64.sqrt()), -(0.5f64.sqrt())];
        let q = quotient_limsup(&cube_root_sum(2), &[0.0, 0.0], &u, &DLSchedule::default()).unwrap();
        assert!(q.iter().all(|&v| v <= 0.0), "{q:?}");
    }

    #[test]
    fn abs_cube_root_grows() {
        let g = f1(Expr::abs(Expr::power(AffineForm::coord(1, 0), 1, 3).unwrap()));
        let r = certify_dl(&g, &[0.0], &DLSchedule::default()).unwrap();
        assert_eq!(r.verdict, DLVerdict::NotDl);
        let s = r.best.slope.unwrap();
        assert!((-0.8..=-0.5).contains(&s), "{s}");
    }

    #[test]
    fn schedule_validation() {
        let mut s = DLSchedule::default();
        s.steps.swap(0, 1);
        assert!(s.validate().is_err());
        assert!(DLSchedule::default().with_samples(0).validate().is_err());
    }

    #[test]
    fn directions_are_unit() {
        for n in 1..=3 {
            let d = candidate_directions(n).unwrap();
            assert!(d.len() >= 2 * n);
            for u in d {
                let norm: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() <= 1e-12);
            }
        }
        assert!(candidate_directions(4).is_err());
    }
}
