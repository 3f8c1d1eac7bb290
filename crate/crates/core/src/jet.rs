//! Multivariate truncated Taylor arithmetic.
//!
//! A [`Jet`] holds the Taylor coefficients of a scalar function around a
//! point, up to total degree `order`, in the monomial basis: the coefficient
//! of the multi-index `α` is `∂^α f / α!`. Multiplication is then a plain
//! truncated convolution and every derivative up to `order` is exact up to
//! floating-point rounding.
//!
//! Coefficients are stored densely in graded-lexicographic order. Because the
//! layout is graded, the coefficients of degree `<= m` form a prefix of the
//! layout of any higher order, so truncation is a slice and binary operations
//! on jets of different orders simply work at the smaller order.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

/// Default truncation order. Curvature needs two derivatives of the metric
/// and nested brackets need one more.
pub const DEFAULT_ORDER: usize = 3;

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 8;

/// Precomputed index tables for one `(dim, order)` pair.
pub struct Layout {
    dim: usize,
    order: usize,
    indices: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)`: coefficient `i` times coefficient `j` lands in `k`.
    mul_table: Vec<(u32, u32, u32)>,
    /// Per direction: `(target, source, factor)` for the partial derivative.
    deriv: Vec<Vec<(u32, u32, f64)>>,
    lower: Option<Arc<Layout>>,
}

impl Layout {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn multi_index(&self, position: usize) -> &[u8] {
        &self.indices[position]
    }

    pub fn position(&self, alpha: &[u8]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    fn build(dim: usize, order: usize, lower: Option<Arc<Layout>>) -> Layout {
        let mut indices = Vec::new();
        for degree in 0..=order {
            let mut current = vec![0u8; dim];
            push_degree(dim, degree, 0, &mut current, &mut indices);
        }
        let lookup: HashMap<Vec<u8>, usize> = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();

        let mut mul_table = Vec::new();
        let mut sum = vec![0u8; dim];
        for (i, a) in indices.iter().enumerate() {
            let da: usize = a.iter().map(|&e| e as usize).sum();
            for (j, b) in indices.iter().enumerate() {
                let db: usize = b.iter().map(|&e| e as usize).sum();
                if da + db > order {
                    continue;
                }
                for v in 0..dim {
                    sum[v] = a[v] + b[v];
                }
                let k = lookup[&sum];
                mul_table.push((i as u32, j as u32, k as u32));
            }
        }

        let mut deriv = vec![Vec::new(); dim];
        if order > 0 {
            for (target, beta) in indices.iter().enumerate() {
                let degree: usize = beta.iter().map(|&e| e as usize).sum();
                if degree + 1 > order {
                    continue;
                }
                for (v, table) in deriv.iter_mut().enumerate() {
                    let mut alpha = beta.clone();
                    alpha[v] += 1;
                    let source = lookup[&alpha];
                    table.push((target as u32, source as u32, f64::from(alpha[v])));
                }
            }
        }

        Layout {
            dim,
            order,
            indices,
            lookup,
            mul_table,
            deriv,
            lower,
        }
    }

    /// Layout for `(dim, order)`, shared process-wide.
    pub fn get(dim: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<RwLock<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(layout) = cache.read().expect("layout cache poisoned").get(&(dim, order)) {
            return Arc::clone(layout);
        }
        let mut guard = cache.write().expect("layout cache poisoned");
        let mut lower: Option<Arc<Layout>> = None;
        for k in 0..=order {
            let layout = match guard.get(&(dim, k)) {
                Some(existing) => Arc::clone(existing),
                None => {
                    let built = Arc::new(Layout::build(dim, k, lower.clone()));
                    guard.insert((dim, k), Arc::clone(&built));
                    built
                }
            };
            lower = Some(layout);
        }
        lower.expect("order loop runs at least once")
    }

    fn truncated(self: &Arc<Self>, order: usize) -> Arc<Layout> {
        let mut layout = Arc::clone(self);
        while layout.order > order {
            layout = Arc::clone(layout.lower.as_ref().expect("lower layout present"));
        }
        layout
    }
}

fn push_degree(dim: usize, remaining: usize, var: usize, current: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if var + 1 == dim {
        current[var] = remaining as u8;
        out.push(current.clone());
        current[var] = 0;
        return;
    }
    if dim == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e as u8;
        push_degree(dim, remaining - e, var + 1, current, out);
    }
    current[var] = 0;
}

/// Truncated Taylor expansion of a scalar at a point.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.dim())
            .field("order", &self.order())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.order() == other.order() && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn constant(dim: usize, order: usize, value: f64) -> Jet {
        let layout = Layout::get(dim, order);
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        Jet { layout, coeffs }
    }

    pub fn zero(dim: usize, order: usize) -> Jet {
        Jet::constant(dim, order, 0.0)
    }

    /// The coordinate function `x_i` expanded around `x_i = value`.
    pub fn seed_coordinate(dim: usize, order: usize, i: usize, value: f64) -> Jet {
        assert!(i < dim, "seed index {i} out of range for dimension {dim}");
        let mut jet = Jet::constant(dim, order, value);
        if order > 0 {
            let mut alpha = vec![0u8; dim];
            alpha[i] = 1;
            let pos = jet.layout.position(&alpha).expect("degree-one index");
            jet.coeffs[pos] = 1.0;
        }
        jet
    }

    /// Builds a jet from raw monomial-basis coefficients in layout order.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Jet> {
        let layout = Layout::get(dim, order);
        if coeffs.len() != layout.len() {
            return Err(Error::DimensionMismatch {
                expected: layout.len(),
                found: coeffs.len(),
            });
        }
        Ok(Jet { layout, coeffs })
    }

    /// A constant with the same dim and order as `self`.
    pub fn constant_like(&self, value: f64) -> Jet {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        coeffs[0] = value;
        Jet {
            layout: Arc::clone(&self.layout),
            coeffs,
        }
    }

    pub fn zero_like(&self) -> Jet {
        self.constant_like(0.0)
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Monomial-basis coefficient of `alpha`, or `None` beyond the order.
    pub fn coeff(&self, alpha: &[u8]) -> Option<f64> {
        self.layout.position(alpha).map(|p| self.coeffs[p])
    }

    /// The mixed partial `∂^α f` at the expansion point.
    pub fn derivative(&self, alpha: &[u8]) -> Option<f64> {
        let c = self.coeff(alpha)?;
        let fact: f64 = alpha.iter().map(|&e| factorial(e as usize)).product();
        Some(c * fact)
    }

    /// Derivative along the listed directions, in any order.
    pub fn derivative_along(&self, directions: &[usize]) -> Option<f64> {
        let mut alpha = vec![0u8; self.dim()];
        for &d in directions {
            *alpha.get_mut(d)? += 1;
        }
        self.derivative(&alpha)
    }

    pub fn gradient(&self) -> Option<Vec<f64>> {
        (0..self.dim()).map(|i| self.derivative_along(&[i])).collect()
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let layout = self.layout.truncated(order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Jet { layout, coeffs }
    }

    /// Jet of `∂f/∂x_direction`, one order lower.
    pub fn partial(&self, direction: usize) -> Result<Jet> {
        if self.order() == 0 {
            return Err(Error::InsufficientJetOrder {
                operation: "partial derivative",
                needed: 1,
                available: 0,
            });
        }
        if direction >= self.dim() {
            return Err(Error::CoordOutOfRange {
                index: direction,
                dim: self.dim(),
            });
        }
        let layout = self.layout.truncated(self.order() - 1);
        let mut coeffs = vec![0.0; layout.len()];
        for &(target, source, factor) in &self.layout.deriv[direction] {
            coeffs[target as usize] = factor * self.coeffs[source as usize];
        }
        Ok(Jet { layout, coeffs })
    }

    fn check_dim(&self, other: &Jet) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    fn common_layout(&self, other: &Jet) -> Arc<Layout> {
        if self.order() <= other.order() {
            Arc::clone(&self.layout)
        } else {
            Arc::clone(&other.layout)
        }
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet> {
        self.check_dim(other)?;
        let layout = self.common_layout(other);
        let coeffs = (0..layout.len()).map(|i| self.coeffs[i] + other.coeffs[i]).collect();
        Ok(Jet { layout, coeffs })
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet> {
        self.check_dim(other)?;
        let layout = self.common_layout(other);
        let coeffs = (0..layout.len()).map(|i| self.coeffs[i] - other.coeffs[i]).collect();
        Ok(Jet { layout, coeffs })
    }

    /// Cauchy product truncated at the smaller of the two orders.
    pub fn try_mul(&self, other: &Jet) -> Result<Jet> {
        self.check_dim(other)?;
        let layout = self.common_layout(other);
        let mut coeffs = vec![0.0; layout.len()];
        for &(i, j, k) in &layout.mul_table {
            coeffs[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Ok(Jet { layout, coeffs })
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet> {
        self.check_dim(other)?;
        self.try_mul(&other.recip()?)
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet {
            layout: Arc::clone(&self.layout),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// `self + factor * other`, in place.
    pub fn axpy(&mut self, factor: f64, other: &Jet) {
        if other.order() < self.order() {
            *self = self.truncate(other.order());
        }
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += factor * b;
        }
    }

    /// `self += factor * a * b` without an intermediate allocation.
    pub fn add_product(&mut self, factor: f64, a: &Jet, b: &Jet) {
        let order = self.order().min(a.order()).min(b.order());
        if order < self.order() {
            *self = self.truncate(order);
        }
        let layout = Arc::clone(&self.layout);
        for &(i, j, k) in &layout.mul_table {
            self.coeffs[k as usize] += factor * a.coeffs[i as usize] * b.coeffs[j as usize];
        }
    }

    /// Evaluates `Σ_k series[k] h^k` where `h` is the non-constant part.
    fn compose(&self, series: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut result = self.constant_like(series[series.len() - 1]);
        for &c in series[..series.len() - 1].iter().rev() {
            result = &result * &h;
            result.coeffs[0] += c;
        }
        result
    }

    pub fn recip(&self) -> Result<Jet> {
        let b0 = self.value();
        if b0 == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let series: Vec<f64> = (0..=self.order())
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / b0.powi(k as i32 + 1)
            })
            .collect();
        Ok(self.compose(&series))
    }

    pub fn sin(&self) -> Jet {
        let a0 = self.value();
        let (s, c) = a0.sin_cos();
        let cycle = [s, c, -s, -c];
        let series: Vec<f64> = (0..=self.order()).map(|k| cycle[k % 4] / factorial(k)).collect();
        self.compose(&series)
    }

    pub fn cos(&self) -> Jet {
        let a0 = self.value();
        let (s, c) = a0.sin_cos();
        let cycle = [c, -s, -c, s];
        let series: Vec<f64> = (0..=self.order()).map(|k| cycle[k % 4] / factorial(k)).collect();
        self.compose(&series)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let series: Vec<f64> = (0..=self.order()).map(|k| e / factorial(k)).collect();
        self.compose(&series)
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let a0 = self.value();
        if a0 <= 0.0 || a0.is_nan() {
            return Err(Error::Domain(format!("sqrt of non-positive value {a0}")));
        }
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut binom = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                binom *= (0.5 - (k as f64 - 1.0)) / k as f64;
            }
            series.push(binom * a0.powf(0.5 - k as f64));
        }
        Ok(self.compose(&series))
    }

    pub fn powi(&self, exponent: i32) -> Result<Jet> {
        if exponent < 0 {
            return self.recip()?.powi(-exponent);
        }
        let mut base = self.clone();
        let mut result = self.constant_like(1.0);
        let mut e = exponent as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest coefficient difference, compared at the common order.
    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.try_add(rhs).expect("jet dimension mismatch")
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.try_sub(rhs).expect("jet dimension mismatch")
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.try_mul(rhs).expect("jet dimension mismatch")
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}
