//! Scalar expressions over chart coordinates.
//!
//! Expressions are parsed once against an ordered list of coordinate names;
//! identifiers are resolved to positions at parse time so evaluation never
//! looks at names. See `GRAMMAR.md` at the repository root for the grammar.

mod parser;

use std::fmt;

use num_rational::Rational64;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::jet::Jet;

pub use parser::{parse_expr, ParseError};

/// A numeric literal. Decimal literals that fit are kept exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Const {
    Rational(Rational64),
    Float(f64),
}

impl Const {
    pub fn to_f64(self) -> f64 {
        match self {
            Const::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Const::Float(f) => f,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Const::Rational(r) => *r.numer() == 0,
            Const::Float(f) => f == 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Const),
    Coord(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn int(value: i64) -> Expr {
        Expr::Const(Const::Rational(Rational64::from_integer(value)))
    }

    pub fn float(value: f64) -> Expr {
        Expr::Const(Const::Float(value))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn coord(index: usize) -> Expr {
        Expr::Coord(index)
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Coord(_) => Vec::new(),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) | Expr::Sqrt(a) => {
                vec![a]
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => vec![a, b],
        }
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_coord(&self) -> Option<usize> {
        match self {
            Expr::Coord(i) => Some(*i),
            _ => self.children().into_iter().filter_map(Expr::max_coord).max(),
        }
    }

    /// Checks every coordinate reference against a chart dimension.
    pub fn bind(&self, dim: usize) -> Result<()> {
        match self.max_coord() {
            Some(index) if index >= dim => Err(Error::CoordOutOfRange { index, dim }),
            _ => Ok(()),
        }
    }

    /// True for a literal zero. No simplification is attempted.
    pub fn is_literal_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    /// Evaluates with jets for the coordinate functions already seeded.
    pub fn eval_jets(&self, coords: &[Jet]) -> Result<Jet> {
        let like = coords.first().ok_or(Error::DimensionMismatch { expected: 1, found: 0 })?;
        self.eval_inner(coords, like)
    }

    fn eval_inner(&self, coords: &[Jet], like: &Jet) -> Result<Jet> {
        Ok(match self {
            Expr::Const(c) => like.constant_like(c.to_f64()),
            Expr::Coord(i) => coords
                .get(*i)
                .cloned()
                .ok_or(Error::CoordOutOfRange { index: *i, dim: coords.len() })?,
            Expr::Neg(a) => -&a.eval_inner(coords, like)?,
            Expr::Add(a, b) => a.eval_inner(coords, like)?.try_add(&b.eval_inner(coords, like)?)?,
            Expr::Sub(a, b) => a.eval_inner(coords, like)?.try_sub(&b.eval_inner(coords, like)?)?,
            Expr::Mul(a, b) => a.eval_inner(coords, like)?.try_mul(&b.eval_inner(coords, like)?)?,
            Expr::Div(a, b) => a.eval_inner(coords, like)?.try_div(&b.eval_inner(coords, like)?)?,
            Expr::Pow(a, e) => a.eval_inner(coords, like)?.powi(*e)?,
            Expr::Sin(a) => a.eval_inner(coords, like)?.sin(),
            Expr::Cos(a) => a.eval_inner(coords, like)?.cos(),
            Expr::Exp(a) => a.eval_inner(coords, like)?.exp(),
            Expr::Sqrt(a) => a.eval_inner(coords, like)?.sqrt()?,
        })
    }

    /// Plain floating-point evaluation.
    pub fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => c.to_f64(),
            Expr::Coord(i) => *x.get(*i).ok_or(Error::CoordOutOfRange { index: *i, dim: x.len() })?,
            Expr::Neg(a) => -a.eval_f64(x)?,
            Expr::Add(a, b) => a.eval_f64(x)? + b.eval_f64(x)?,
            Expr::Sub(a, b) => a.eval_f64(x)? - b.eval_f64(x)?,
            Expr::Mul(a, b) => a.eval_f64(x)? * b.eval_f64(x)?,
            Expr::Div(a, b) => {
                let d = b.eval_f64(x)?;
                if d == 0.0 {
                    return Err(Error::DivisionByZero);
                }
                a.eval_f64(x)? / d
            }
            Expr::Pow(a, e) => {
                let base = a.eval_f64(x)?;
                if *e < 0 && base == 0.0 {
                    return Err(Error::DivisionByZero);
                }
                base.powi(*e)
            }
            Expr::Sin(a) => a.eval_f64(x)?.sin(),
            Expr::Cos(a) => a.eval_f64(x)?.cos(),
            Expr::Exp(a) => a.eval_f64(x)?.exp(),
            Expr::Sqrt(a) => {
                let v = a.eval_f64(x)?;
                if v <= 0.0 {
                    return Err(Error::Domain(format!("sqrt of non-positive value {v}")));
                }
                v.sqrt()
            }
        })
    }

    /// Renders with coordinate names instead of positions.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> Named<'a> {
        Named { expr: self, names: Some(names) }
    }
}

/// Taylor expansion of `e` at `point` up to `order`.
pub fn eval_jet(e: &Expr, point: &[f64], order: usize) -> Result<Jet> {
    let dim = point.len();
    e.bind(dim)?;
    let seeds: Vec<Jet> = (0..dim)
        .map(|i| Jet::seed_coordinate(dim, order, i, point[i]))
        .collect();
    if seeds.is_empty() {
        return match e {
            Expr::Const(c) => Ok(Jet::constant(0, order, c.to_f64())),
            _ => e.eval_f64(&[]).map(|v| Jet::constant(0, order, v)),
        };
    }
    e.eval_jets(&seeds)
}

pub struct Named<'a> {
    expr: &'a Expr,
    names: Option<&'a [String]>,
}

fn write_const(f: &mut fmt::Formatter<'_>, c: &Const) -> fmt::Result {
    match c {
        Const::Rational(r) => {
            if *r.denom() == 1 {
                write!(f, "{}", r.numer())
            } else if let Some(text) = terminating_decimal(*r) {
                write!(f, "{text}")
            } else {
                write!(f, "({}/{})", r.numer(), r.denom())
            }
        }
        Const::Float(x) => write!(f, "{x:e}"),
    }
}

/// Exact decimal text when the denominator has only factors 2 and 5.
fn terminating_decimal(r: Rational64) -> Option<String> {
    let mut d = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return None;
    }
    let digits = twos.max(fives);
    let scale = 10i128.checked_pow(digits)?;
    let scaled = (*r.numer() as i128) * scale / (*r.denom() as i128);
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.unsigned_abs();
    let int_part = abs / scale as u128;
    let frac = abs % scale as u128;
    Some(format!("{sign}{int_part}.{frac:0width$}", width = digits as usize))
}

impl<'a> fmt::Display for Named<'a> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.names;
        let sub = move |e: &'a Expr| Named { expr: e, names };
        match self.expr {
            Expr::Const(c) => write_const(f, c),
            Expr::Coord(i) => match self.names.and_then(|n| n.get(*i)) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "x{i}"),
            },
            Expr::Neg(a) => write!(f, "(-{})", sub(a)),
            Expr::Add(a, b) => write!(f, "({} + {})", sub(a), sub(b)),
            Expr::Sub(a, b) => write!(f, "({} - {})", sub(a), sub(b)),
            Expr::Mul(a, b) => write!(f, "({} * {})", sub(a), sub(b)),
            Expr::Div(a, b) => write!(f, "({} / {})", sub(a), sub(b)),
            Expr::Pow(a, e) => write!(f, "({}^{})", sub(a), e),
            Expr::Sin(a) => write!(f, "sin({})", sub(a)),
            Expr::Cos(a) => write!(f, "cos({})", sub(a)),
            Expr::Exp(a) => write!(f, "exp({})", sub(a)),
            Expr::Sqrt(a) => write!(f, "sqrt({})", sub(a)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Named { expr: self, names: None }.fmt(f)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn product_rule_at_a_point() {
        let e = parse_expr("x1*x2", &names(&["x1", "x2"])).unwrap();
        let j = eval_jet(&e, &[2.0, 3.0], 1).unwrap();
        assert_eq!(j.value(), 6.0);
        assert_eq!(j.gradient().unwrap(), vec![3.0, 2.0]);
    }

    #[test]
    fn sine_squared_at_half_pi() {
        let e = parse_expr("sin(th)^2", &names(&["th", "ph"])).unwrap();
        let j = eval_jet(&e, &[std::f64::consts::FRAC_PI_2, 0.0], 2).unwrap();
        assert!((j.value() - 1.0).abs() < 1e-15);
        assert!(j.derivative_along(&[0]).unwrap().abs() < 1e-15);
        assert!((j.derivative_along(&[0, 0]).unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn pole_is_division_by_zero() {
        let e = parse_expr("1/x1", &names(&["x1"])).unwrap();
        for order in 0..4 {
            assert_eq!(eval_jet(&e, &[0.0], order).unwrap_err(), Error::DivisionByZero);
        }
    }

    #[test]
    fn binding_rejects_out_of_range() {
        let e = Expr::coord(3);
        assert!(matches!(e.bind(2), Err(Error::CoordOutOfRange { index: 3, dim: 2 })));
    }

    #[test]
    fn exact_decimal_printing() {
        let e = parse_expr("0.125 + 3", &names(&["x"])).unwrap();
        assert_eq!(e.to_string(), "(0.125 + 3)");
        let third = Expr::Const(Const::Rational(Rational64::new(1, 3)));
        assert_eq!(third.to_string(), "(1/3)");
    }

    #[test]
    fn named_display() {
        let n = names(&["th", "ph"]);
        let e = parse_expr("-th^2*cos(ph)", &n).unwrap();
        assert_eq!(e.display_with(&n).to_string(), "(((-th)^2) * cos(ph))");
    }
}
