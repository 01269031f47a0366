//! One-sided local expansions of one-dimensional expressions.
//!
//! Near a point `x`, on side `s = ±1`, every supported body behaves like
//! `value + Σ c_k h^{e_k}` with `h = |y − x| ↓ 0`, possibly plus a bounded
//! oscillating term `∈ [−amp, amp]·h^e`. The expansion is enough to read off
//! one-sided difference-quotient limits and derivative cluster sets.

use crate::expr::{AffineForm, Expr, Rational};

const MAX_TERMS: usize = 6;
const EXP_EPS: f64 = 1e-12;

/// Truncated one-sided expansion of an expression.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Germ {
    /// One-sided limit of the value; `None` where the expression is undefined.
    pub value: Option<f64>,
    /// `(coefficient, exponent)` pairs sorted by exponent.
    pub series: Vec<(f64, f64)>,
    /// Oscillating remainder `(amp, exponent)`.
    pub osc: Option<(f64, f64)>,
}

fn same_exp(a: f64, b: f64) -> bool {
    (a - b).abs() <= EXP_EPS
}

fn tidy(mut terms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    terms.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out: Vec<(f64, f64, f64)> = Vec::new(); // coef, exp, magnitude scale
    for (c, e) in terms {
        match out.last_mut() {
            Some(last) if same_exp(last.1, e) => {
                last.0 += c;
                last.2 += c.abs();
            }
            _ => out.push((c, e, c.abs())),
        }
    }
    out.into_iter()
        .filter(|&(c, _, scale)| c.abs() > 1e-12 * scale && c != 0.0)
        .map(|(c, e, _)| (c, e))
        .take(MAX_TERMS)
        .collect()
}

impl Germ {
    fn constant(v: Option<f64>) -> Self {
        Germ {
            value: v,
            series: Vec::new(),
            osc: None,
        }
    }

    fn scale(mut self, c: f64) -> Self {
        self.value = self.value.map(|v| if c == 0.0 { 0.0 } else { c * v });
        if c == 0.0 {
            self.series.clear();
            self.osc = None;
        } else {
            self.series.iter_mut().for_each(|t| t.0 *= c);
            self.osc = self.osc.map(|(a, e)| (a * c.abs(), e));
        }
        self
    }

    fn add(self, o: Germ) -> Germ {
        let value = match (self.value, o.value) {
            (Some(a), Some(b)) => {
                let s = a + b;
                (!s.is_nan()).then_some(s)
            }
            _ => None,
        };
        let mut terms = self.series;
        terms.extend(o.series);
        let osc = match (self.osc, o.osc) {
            (Some((a1, e1)), Some((a2, e2))) => Some(if same_exp(e1, e2) {
                (a1 + a2, e1)
            } else if e1 < e2 {
                (a1, e1)
            } else {
                (a2, e2)
            }),
            (a, b) => a.or(b),
        };
        Germ {
            value,
            series: tidy(terms),
            osc,
        }
    }

    /// Eventual sign of the increment `g(x + s·h) − value`: `Some(0)` when it
    /// vanishes identically, `None` when an oscillation decides it.
    pub fn increment_sign(&self) -> Option<i8> {
        match (self.series.first(), self.osc) {
            (None, None) => Some(0),
            (None, Some(_)) => None,
            (Some(&(c, e)), osc) => match osc {
                Some((_, eo)) if eo <= e + EXP_EPS => None,
                _ => Some(if c > 0.0 { 1 } else { -1 }),
            },
        }
    }

    /// `liminf_{h↓0} (g(x + s·h) − value) / h`.
    pub fn quotient_liminf(&self) -> f64 {
        let lead_exp = self
            .series
            .first()
            .map(|t| t.1)
            .into_iter()
            .chain(self.osc.map(|o| o.1))
            .fold(f64::INFINITY, f64::min);
        if lead_exp == f64::INFINITY || lead_exp > 1.0 + EXP_EPS {
            return 0.0;
        }
        let coef_at = |e: f64| {
            self.series
                .iter()
                .find(|t| same_exp(t.1, e))
                .map_or(0.0, |t| t.0)
        };
        let amp_at = |e: f64| match self.osc {
            Some((a, eo)) if same_exp(eo, e) => a,
            _ => 0.0,
        };
        let low = coef_at(lead_exp) - amp_at(lead_exp);
        if same_exp(lead_exp, 1.0) {
            low
        } else if low > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Closed cluster set (in the extended reals) of `g'(y)` as `y → x` from
    /// side `s`.
    pub fn derivative_cluster(&self, s: f64) -> (f64, f64) {
        if matches!(self.osc, Some((a, _)) if a > 0.0) {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        match self.series.first() {
            None => (0.0, 0.0),
            Some(&(c, e)) => {
                let d = if e > 1.0 + EXP_EPS {
                    0.0
                } else if same_exp(e, 1.0) {
                    s * c
                } else {
                    (s * c).signum() * f64::INFINITY
                };
                (d, d)
            }
        }
    }
}

fn binom(r: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (r - j as f64) / (j as f64 + 1.0))
}

fn power_germ(base: &AffineForm, exponent: Rational, x: f64, s: f64) -> Germ {
    let (a, b) = (base.coeffs[0], base.offset);
    let z0 = a * x + b;
    if a == 0.0 || exponent.num() == 0 {
        return Germ::constant(exponent.pow(z0));
    }
    let r = exponent.value();
    if z0 != 0.0 {
        let Some(v) = exponent.pow(z0) else {
            return Germ::constant(None);
        };
        let u = a * s / z0;
        let terms = (1..=MAX_TERMS)
            .map(|k| (v * binom(r, k) * u.powi(k as i32), k as f64))
            .collect();
        return Germ {
            value: Some(v),
            series: tidy(terms),
            osc: None,
        };
    }
    let sigma = a.signum() * s;
    let mag = a.abs().powf(r);
    let sign = if sigma > 0.0 {
        1.0
    } else if exponent.odd_denominator() {
        exponent.sign_for_negative_base()
    } else {
        return Germ::constant(None);
    };
    if r < 0.0 {
        return Germ::constant(Some(sign * f64::INFINITY));
    }
    Germ {
        value: Some(0.0),
        series: vec![(sign * mag, r)],
        osc: None,
    }
}

fn xsin_germ(coef: f64, base: &AffineForm, x: f64, s: f64) -> Germ {
    let (a, b) = (base.coeffs[0], base.offset);
    let z0 = a * x + b;
    if a == 0.0 || coef == 0.0 {
        let v = if z0 == 0.0 { 0.0 } else { coef * z0 * (1.0 / z0).sin() };
        return Germ::constant(Some(v));
    }
    if z0 == 0.0 {
        return Germ {
            value: Some(0.0),
            series: Vec::new(),
            osc: Some(((coef * a).abs(), 1.0)),
        };
    }
    let w = 1.0 / z0;
    let v = coef * z0 * w.sin();
    let d1 = coef * (w.sin() - w.cos() * w);
    let d2 = -coef * w.sin() * w * w * w;
    let step = a * s;
    Germ {
        value: Some(v),
        series: tidy(vec![(d1 * step, 1.0), (0.5 * d2 * step * step, 2.0)]),
        osc: None,
    }
}

/// One-sided expansion of a one-dimensional expression at `x` from side
/// `s ∈ {−1, +1}`; `None` when the structure is not resolved symbolically.
pub(crate) fn germ(e: &Expr, x: f64, s: f64) -> Option<Germ> {
    Some(match e {
        Expr::Constant { value } => Germ::constant(Some(*value)),
        Expr::Affine(a) => {
            let c = a.coeffs[0];
            Germ {
                value: Some(a.eval(&[x])),
                series: tidy(vec![(c * s, 1.0)]),
                osc: None,
            }
        }
        Expr::Power { base, exponent } => power_germ(base, *exponent, x, s),
        Expr::XSinRecip { coef, base } => xsin_germ(*coef, base, x, s),
        Expr::SqNormShift { center } => {
            let d = x - center[0];
            Germ {
                value: Some(d * d),
                series: tidy(vec![(2.0 * d * s, 1.0), (1.0, 2.0)]),
                osc: None,
            }
        }
        Expr::Scale { coef, arg } => germ(arg, x, s)?.scale(*coef),
        Expr::Sum { terms } => terms
            .iter()
            .try_fold(Germ::constant(Some(0.0)), |acc, t| Some(acc.add(germ(t, x, s)?)))?,
        Expr::Abs { arg } => {
            let g = germ(arg, x, s)?;
            match g.value {
                None => g,
                Some(v) if v > 0.0 => g,
                Some(v) if v < 0.0 => g.scale(-1.0),
                Some(_) => match g.increment_sign()? {
                    -1 => g.scale(-1.0),
                    _ => g,
                },
            }
        }
        Expr::Square { arg } => {
            let g = germ(arg, x, s)?;
            let Some(v) = g.value else { return Some(g) };
            if !v.is_finite() {
                return Some(Germ::constant(Some(f64::INFINITY)));
            }
            if g.osc.is_some() && v == 0.0 {
                return None;
            }
            let mut terms: Vec<(f64, f64)> = g.series.iter().map(|&(c, e)| (2.0 * v * c, e)).collect();
            for &(c1, e1) in &g.series {
                for &(c2, e2) in &g.series {
                    terms.push((c1 * c2, e1 + e2));
                }
            }
            Germ {
                value: Some(v * v),
                series: tidy(terms),
                osc: g.osc.map(|(amp, e)| (2.0 * v.abs() * amp, e)),
            }
        }
        Expr::Max { args } | Expr::Min { args } => {
            let is_max = matches!(e, Expr::Max { .. });
            let mut best = germ(&args[0], x, s)?;
            for a in &args[1..] {
                let cand = germ(a, x, s)?;
                let (Some(vb), Some(vc)) = (best.value, cand.value) else {
                    return Some(Germ::constant(None));
                };
                let cand_wins = if vb != vc {
                    (vc > vb) == is_max
                } else {
                    let diff = cand.clone().add(best.clone().scale(-1.0));
                    match diff.increment_sign()? {
                        1 => is_max,
                        -1 => !is_max,
                        _ => false,
                    }
                };
                if cand_wins {
                    best = cand;
                }
            }
            best
        }
    })
}
