//! Expression trees for the bodies of piecewise functions.
//!
//! Evaluation returns `None` outside the natural domain of the expression
//! (negative base under an even root, zero base under a negative power); the
//! piecewise layer maps that to `+inf`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `coeffs · x + offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineForm {
    pub coeffs: Vec<f64>,
    #[serde(default)]
    pub offset: f64,
}

impl AffineForm {
    pub fn new(coeffs: Vec<f64>, offset: f64) -> Self {
        Self { coeffs, offset }
    }

    /// The coordinate function `x_i` in dimension `n`.
    pub fn coord(n: usize, i: usize) -> Self {
        let mut coeffs = vec![0.0; n];
        coeffs[i] = 1.0;
        Self { coeffs, offset: 0.0 }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(x)
            .fold(self.offset, |acc, (a, xi)| acc + a * xi)
    }

    fn restrict(&self, coord: usize, at: &[f64]) -> AffineForm {
        let offset = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != coord)
            .fold(self.offset, |acc, (j, a)| acc + a * at[j]);
        AffineForm {
            coeffs: vec![self.coeffs[coord]],
            offset,
        }
    }
}

/// A rational exponent kept in lowest terms with a positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("zero denominator in exponent".into()));
        }
        let sign = if (num < 0) != (den < 0) && num != 0 { -1 } else { 1 };
        let (n, d) = (num.unsigned_abs(), den.unsigned_abs());
        let g = gcd(n, d).max(1);
        Ok(Self {
            num: sign * (n / g) as i64,
            den: d / g,
        })
    }

    pub fn integer(n: i64) -> Self {
        Self { num: n, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn odd_denominator(&self) -> bool {
        self.den % 2 == 1
    }

    /// `self - 1`.
    pub fn minus_one(&self) -> Self {
        Self {
            num: self.num - self.den as i64,
            den: self.den,
        }
    }

    /// `z^self` with the real signed root for odd denominators.
    pub fn pow(&self, z: f64) -> Option<f64> {
        if z < 0.0 && !self.odd_denominator() {
            return None;
        }
        if z == 0.0 {
            return match self.num.signum() {
                0 => Some(1.0),
                1 => Some(0.0),
                _ => None,
            };
        }
        let root = match self.den {
            1 => z,
            2 => z.sqrt(),
            3 => z.cbrt(),
            d => z.signum() * z.abs().powf(1.0 / d as f64),
        };
        let p = self.num;
        if p.unsigned_abs() <= i32::MAX as u64 {
            Some(root.powi(p as i32))
        } else {
            Some(root.powf(p as f64))
        }
    }

    /// Sign of `z^self` for `z < 0` (odd denominator): `(-1)^num`.
    pub fn sign_for_negative_base(&self) -> f64 {
        if self.num.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad exponent `{s}`"));
        match s.split_once('/') {
            Some((n, d)) => Rational::new(
                n.trim().parse().map_err(|_| bad())?,
                d.trim().parse().map_err(|_| bad())?,
            ),
            None => Ok(Rational::integer(s.trim().parse().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Expression node. The JSON form is tagged by `"node"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Expr {
    Constant { value: f64 },
    Affine(AffineForm),
    /// `(affine)^(p/q)`.
    Power { base: AffineForm, exponent: Rational },
    Abs { arg: Box<Expr> },
    Square { arg: Box<Expr> },
    /// `‖x - center‖²`.
    SqNormShift { center: Vec<f64> },
    Sum { terms: Vec<Expr> },
    Scale { coef: f64, arg: Box<Expr> },
    Max { args: Vec<Expr> },
    Min { args: Vec<Expr> },
    /// `coef · ℓ(x) · sin(1/ℓ(x))`, continuously extended by 0 where `ℓ = 0`.
    XSinRecip { coef: f64, base: AffineForm },
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Expr::Constant { value }
    }

    pub fn coord(n: usize, i: usize) -> Self {
        Expr::Affine(AffineForm::coord(n, i))
    }

    pub fn affine(coeffs: Vec<f64>, offset: f64) -> Self {
        Expr::Affine(AffineForm::new(coeffs, offset))
    }

    pub fn power(base: AffineForm, num: i64, den: i64) -> Result<Self> {
        Ok(Expr::Power {
            base,
            exponent: Rational::new(num, den)?,
        })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn abs(arg: Expr) -> Self {
        Expr::Abs { arg: Box::new(arg) }
    }

    pub fn square(arg: Expr) -> Self {
        Expr::Square { arg: Box::new(arg) }
    }

    pub fn sq_norm_shift(center: Vec<f64>) -> Self {
        Expr::SqNormShift { center }
    }

    pub fn sum(terms: Vec<Expr>) -> Self {
        Expr::Sum { terms }
    }

    pub fn scale(coef: f64, arg: Expr) -> Self {
        Expr::Scale {
            coef,
            arg: Box::new(arg),
        }
    }

    pub fn max(args: Vec<Expr>) -> Self {
        Expr::Max { args }
    }

    pub fn min(args: Vec<Expr>) -> Self {
        Expr::Min { args }
    }

    pub fn x_sin_recip(coef: f64, base: AffineForm) -> Self {
        Expr::XSinRecip { coef, base }
    }

    /// Checks arity and that every coefficient vector has length `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let dim = |len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: n,
                    got: len,
                })
            }
        };
        match self {
            Expr::Constant { value } => {
                if value.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("non-finite constant".into()))
                }
            }
            Expr::Affine(a) | Expr::Power { base: a, .. } | Expr::XSinRecip { base: a, .. } => {
                dim(a.coeffs.len())
            }
            Expr::SqNormShift { center } => dim(center.len()),
            Expr::Abs { arg } | Expr::Square { arg } | Expr::Scale { arg, .. } => arg.validate(n),
            Expr::Sum { terms: args } | Expr::Max { args } | Expr::Min { args } => {
                if args.is_empty() {
                    return Err(Error::InvalidParameter("empty n-ary node".into()));
                }
                args.iter().try_for_each(|a| a.validate(n))
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        match self {
            Expr::Constant { value } => Some(*value),
            Expr::Affine(a) => Some(a.eval(x)),
            Expr::Power { base, exponent } => exponent.pow(base.eval(x)),
            Expr::Abs { arg } => arg.eval(x).map(f64::abs),
            Expr::Square { arg } => arg.eval(x).map(|v| v * v),
            Expr::SqNormShift { center } => Some(
                x.iter()
                    .zip(center)
                    .map(|(xi, ci)| (xi - ci) * (xi - ci))
                    .sum(),
            ),
            Expr::Sum { terms } => terms.iter().try_fold(0.0, |acc, t| Some(acc + t.eval(x)?)),
            Expr::Scale { coef, arg } => arg.eval(x).map(|v| coef * v),
            Expr::Max { args } => args
                .iter()
                .try_fold(f64::NEG_INFINITY, |m, a| Some(m.max(a.eval(x)?))),
            Expr::Min { args } => args
                .iter()
                .try_fold(f64::INFINITY, |m, a| Some(m.min(a.eval(x)?))),
            Expr::XSinRecip { coef, base } => {
                let z = base.eval(x);
                Some(if z == 0.0 { 0.0 } else { coef * z * (1.0 / z).sin() })
            }
        }
    }

    /// Gradient at `x`, or `None` where the expression is undefined or not
    /// differentiable (kinks, ties in max/min, singular roots).
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n = x.len();
        match self {
            Expr::Constant { .. } => Some(vec![0.0; n]),
            Expr::Affine(a) => Some(a.coeffs.clone()),
            Expr::Power { base, exponent } => {
                let z = base.eval(x);
                if base.coeffs.iter().all(|&c| c == 0.0) {
                    return exponent.pow(z).map(|_| vec![0.0; n]);
                }
                let r = exponent.value();
                let d = if z == 0.0 {
                    if exponent.num() == 0 {
                        0.0
                    } else if r > 1.0 || (exponent.den() == 1 && r >= 1.0) {
                        if r == 1.0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        return None;
                    }
                } else {
                    r * exponent.minus_one().pow(z)?
                };
                Some(base.coeffs.iter().map(|c| c * d).collect())
            }
            Expr::Abs { arg } => {
                let v = arg.eval(x)?;
                let g = arg.gradient(x)?;
                if v == 0.0 {
                    // differentiable only when the argument is stationary
                    g.iter().all(|&gi| gi == 0.0).then_some(g)
                } else {
                    Some(g.into_iter().map(|gi| v.signum() * gi).collect())
                }
            }
            Expr::Square { arg } => {
                let v = arg.eval(x)?;
                let g = arg.gradient(x)?;
                Some(g.into_iter().map(|gi| 2.0 * v * gi).collect())
            }
            Expr::SqNormShift { center } => {
                Some(x.iter().zip(center).map(|(xi, ci)| 2.0 * (xi - ci)).collect())
            }
            Expr::Sum { terms } => terms.iter().try_fold(vec![0.0; n], |mut acc, t| {
                for (a, g) in acc.iter_mut().zip(t.gradient(x)?) {
                    *a += g;
                }
                Some(acc)
            }),
            Expr::Scale { coef, arg } => {
                Some(arg.gradient(x)?.into_iter().map(|g| coef * g).collect())
            }
            Expr::Max { args } | Expr::Min { args } => {
                let is_max = matches!(self, Expr::Max { .. });
                let vals: Vec<f64> = args.iter().map(|a| a.eval(x)).collect::<Option<_>>()?;
                let best = if is_max {
                    vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                } else {
                    vals.iter().copied().fold(f64::INFINITY, f64::min)
                };
                let active: Vec<usize> = (0..args.len()).filter(|&i| vals[i] == best).collect();
                let grads: Vec<Vec<f64>> = active
                    .iter()
                    .map(|&i| args[i].gradient(x))
                    .collect::<Option<_>>()?;
                grads.windows(2).all(|w| w[0] == w[1]).then(|| grads[0].clone())
            }
            Expr::XSinRecip { coef, base } => {
                let z = base.eval(x);
                if z == 0.0 {
                    return None;
                }
                let d = coef * ((1.0 / z).sin() - (1.0 / z).cos() / z);
                Some(base.coeffs.iter().map(|c| c * d).collect())
            }
        }
    }

    /// Marks the coordinates the expression depends on.
    pub fn support(&self, n: usize) -> Vec<bool> {
        let mut out = vec![false; n];
        self.mark_support(&mut out);
        out
    }

    fn mark_support(&self, out: &mut [bool]) {
        let mark_affine = |a: &AffineForm, out: &mut [bool]| {
            for (o, c) in out.iter_mut().zip(&a.coeffs) {
                *o |= *c != 0.0;
            }
        };
        match self {
            Expr::Constant { .. } => {}
            Expr::Affine(a) | Expr::Power { base: a, .. } | Expr::XSinRecip { base: a, .. } => {
                mark_affine(a, out)
            }
            Expr::SqNormShift { .. } => out.iter_mut().for_each(|o| *o = true),
            Expr::Abs { arg } | Expr::Square { arg } | Expr::Scale { arg, .. } => {
                arg.mark_support(out)
            }
            Expr::Sum { terms: args } | Expr::Max { args } | Expr::Min { args } => {
                args.iter().for_each(|a| a.mark_support(out))
            }
        }
    }

    /// The one-dimensional expression `y ↦ self(at with at[coord] = y)`.
    pub fn restrict(&self, coord: usize, at: &[f64]) -> Expr {
        match self {
            Expr::Constant { value } => Expr::Constant { value: *value },
            Expr::Affine(a) => Expr::Affine(a.restrict(coord, at)),
            Expr::Power { base, exponent } => Expr::Power {
                base: base.restrict(coord, at),
                exponent: *exponent,
            },
            Expr::XSinRecip { coef, base } => Expr::XSinRecip {
                coef: *coef,
                base: base.restrict(coord, at),
            },
            Expr::SqNormShift { center } => {
                let rest: f64 = center
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != coord)
                    .map(|(j, c)| (at[j] - c) * (at[j] - c))
                    .sum();
                Expr::sum(vec![
                    Expr::sq_norm_shift(vec![center[coord]]),
                    Expr::constant(rest),
                ])
            }
            Expr::Abs { arg } => Expr::abs(arg.restrict(coord, at)),
            Expr::Square { arg } => Expr::square(arg.restrict(coord, at)),
            Expr::Scale { coef, arg } => Expr::scale(*coef, arg.restrict(coord, at)),
            Expr::Sum { terms } => Expr::sum(terms.iter().map(|t| t.restrict(coord, at)).collect()),
            Expr::Max { args } => Expr::max(args.iter().map(|t| t.restrict(coord, at)).collect()),
            Expr::Min { args } => Expr::min(args.iter().map(|t| t.restrict(coord, at)).collect()),
        }
    }

    /// Affine form of the expression if it is affine in `x`.
    pub fn as_affine(&self, n: usize) -> Option<AffineForm> {
        match self {
            Expr::Constant { value } => Some(AffineForm::new(vec![0.0; n], *value)),
            Expr::Affine(a) => Some(a.clone()),
            Expr::Power { base, exponent } if *exponent == Rational::integer(1) => {
                Some(base.clone())
            }
            Expr::Scale { coef, arg } => arg.as_affine(n).map(|a| AffineForm {
                coeffs: a.coeffs.iter().map(|c| coef * c).collect(),
                offset: coef * a.offset,
            }),
            Expr::Sum { terms } => terms.iter().try_fold(
                AffineForm::new(vec![0.0; n], 0.0),
                |mut acc, t| {
                    let a = t.as_affine(n)?;
                    for (x, y) in acc.coeffs.iter_mut().zip(&a.coeffs) {
                        *x += y;
                    }
                    acc.offset += a.offset;
                    Some(acc)
                },
            ),
            _ => None,
        }
    }

    /// Coefficients `[c0, c1, c2]` of `c0 + c1·y + c2·y²` for one-dimensional
    /// expressions that are polynomials of degree at most two.
    pub fn as_quadratic_1d(&self) -> Option<[f64; 3]> {
        match self {
            Expr::Constant { value } => Some([*value, 0.0, 0.0]),
            Expr::Affine(a) if a.coeffs.len() == 1 => Some([a.offset, a.coeffs[0], 0.0]),
            Expr::Power { base, exponent } if base.coeffs.len() == 1 => {
                let (b, a) = (base.offset, base.coeffs[0]);
                match (exponent.num(), exponent.den()) {
                    (0, 1) => Some([1.0, 0.0, 0.0]),
                    (1, 1) => Some([b, a, 0.0]),
                    (2, 1) => Some([b * b, 2.0 * a * b, a * a]),
                    _ => None,
                }
            }
            Expr::Square { arg } => {
                let [c0, c1, c2] = arg.as_quadratic_1d()?;
                (c2 == 0.0).then_some([c0 * c0, 2.0 * c0 * c1, c1 * c1])
            }
            Expr::SqNormShift { center } if center.len() == 1 => {
                let c = center[0];
                Some([c * c, -2.0 * c, 1.0])
            }
            Expr::Scale { coef, arg } => {
                let q = arg.as_quadratic_1d()?;
                Some(q.map(|v| coef * v))
            }
            Expr::Sum { terms } => terms.iter().try_fold([0.0; 3], |mut acc, t| {
                let q = t.as_quadratic_1d()?;
                for k in 0..3 {
                    acc[k] += q[k];
                }
                Some(acc)
            }),
            _ => None,
        }
    }

    /// `true` if the tree contains an oscillating `x·sin(1/x)` atom.
    pub fn has_oscillation(&self) -> bool {
        match self {
            Expr::XSinRecip { .. } => true,
            Expr::Abs { arg } | Expr::Square { arg } | Expr::Scale { arg, .. } => {
                arg.has_oscillation()
            }
            Expr::Sum { terms: args } | Expr::Max { args } | Expr::Min { args } => {
                args.iter().any(Expr::has_oscillation)
            }
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x1() -> AffineForm {
        AffineForm::coord(1, 0)
    }

    #[test]
    fn rational_reduces() {
        let r = Rational::new(2, 6).unwrap();
        assert_eq!((r.num(), r.den()), (1, 3));
        let r = Rational::new(3, -6).unwrap();
        assert_eq!((r.num(), r.den()), (-1, 2));
        assert!(Rational::new(1, 0).is_err());
        assert_eq!("4/6".parse::<Rational>().unwrap(), Rational::new(2, 3).unwrap());
        assert_eq!(Rational::new(2, 3).unwrap().to_string(), "2/3");
    }

    #[test]
    fn cube_root_is_signed_and_exact() {
        let f = Expr::power(x1(), 1, 3).unwrap();
        assert_eq!(f.eval(&[8.0]), Some(2.0));
        assert_eq!(f.eval(&[-8.0]), Some(-2.0));
        let g = Expr::power(x1(), 1, 2).unwrap();
        assert_eq!(g.eval(&[-1.0]), None);
        assert_eq!(g.eval(&[4.0]), Some(2.0));
        let h = Expr::power(x1(), -1, 1).unwrap();
        assert_eq!(h.eval(&[0.0]), None);
    }

    #[test]
    fn cube_root_is_odd() {
        let f = Expr::power(x1(), 1, 3).unwrap();
        for k in 1..200 {
            let x = k as f64 * 0.137 - 13.0;
            let (a, b) = (f.eval(&[x]).unwrap(), f.eval(&[-x]).unwrap());
            assert!((a + b).abs() <= 1e-12);
        }
    }

    #[test]
    fn json_shape() {
        let e = Expr::sum(vec![
            Expr::abs(Expr::coord(1, 0)),
            Expr::power(x1(), 1, 3).unwrap(),
        ]);
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.contains(r#""node":"sum""#));
        assert!(s.contains(r#""exponent":"1/3""#));
        let back: Expr = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn gradient_kinks_are_none() {
        let abs = Expr::abs(Expr::coord(1, 0));
        assert_eq!(abs.gradient(&[0.0]), None);
        assert_eq!(abs.gradient(&[-2.0]), Some(vec![-1.0]));
        let mx = Expr::max(vec![Expr::coord(1, 0), Expr::constant(0.0)]);
        assert_eq!(mx.gradient(&[0.0]), None);
        let sq = Expr::power(x1(), 2, 1).unwrap();
        assert_eq!(sq.gradient(&[0.0]), Some(vec![0.0]));
        assert_eq!(Expr::power(x1(), 1, 3).unwrap().gradient(&[0.0]), None);
    }

    #[test]
    fn restriction_and_quadratic_form() {
        let e = Expr::sum(vec![
            Expr::sq_norm_shift(vec![1.0, 2.0]),
            Expr::affine(vec![3.0, 4.0], 1.0),
        ]);
        let r = e.restrict(0, &[0.0, 5.0]);
        // (y-1)^2 + 9 + 3y + 21
        assert_eq!(r.as_quadratic_1d(), Some([1.0 + 9.0 + 21.0, -2.0 + 3.0, 1.0]));
        assert_eq!(r.eval(&[2.0]), e.eval(&[2.0, 5.0]));
        assert_eq!(e.support(2), vec![true, true]);
        assert_eq!(Expr::power(x1(), 1, 3).unwrap().as_quadratic_1d(), None);
    }
}
