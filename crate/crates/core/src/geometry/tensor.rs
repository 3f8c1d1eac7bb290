use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr};
use crate::jet::Jet;

use super::chart::{Chart, Point};

/// Below this `|det|` a metric or frame counts as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Declared index symmetry, asserted numerically rather than used for storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Symmetry {
    #[default]
    None,
    Symmetric,
    Antisymmetric,
}

/// Evaluates a field at a point to a given jet order.
pub type Procedure = Arc<dyn Fn(&Point, usize) -> Result<EvaluatedTensor> + Send + Sync>;

#[derive(Clone)]
pub enum Source {
    Exprs(Arc<Vec<Expr>>),
    Procedure(Procedure),
}

/// An `(upper, lower)` tensor field on a chart.
///
/// Components are stored row-major with the upper indices first. They are
/// either expressions in the chart coordinates or a procedure that produces
/// jets directly, which is how fields built from pointwise inverses are
/// represented.
#[derive(Clone)]
pub struct TensorField {
    dim: usize,
    upper: usize,
    lower: usize,
    source: Source,
    symmetry: Symmetry,
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let source = match &self.source {
            Source::Exprs(e) => format!("{} expressions", e.len()),
            Source::Procedure(_) => "procedure".to_string(),
        };
        f.debug_struct("TensorField")
            .field("dim", &self.dim)
            .field("rank", &(self.upper, self.lower))
            .field("source", &source)
            .field("symmetry", &self.symmetry)
            .finish()
    }
}

fn component_count(dim: usize, rank: usize) -> usize {
    dim.pow(rank as u32)
}

impl TensorField {
    pub fn from_exprs(dim: usize, upper: usize, lower: usize, exprs: Vec<Expr>) -> Result<TensorField> {
        let expected = component_count(dim, upper + lower);
        if exprs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: exprs.len(),
            });
        }
        for e in &exprs {
            e.bind(dim)?;
        }
        Ok(TensorField {
            dim,
            upper,
            lower,
            source: Source::Exprs(Arc::new(exprs)),
            symmetry: Symmetry::None,
        })
    }

    /// Parses each component against the chart's coordinate names.
    pub fn parse(chart: &Chart, upper: usize, lower: usize, sources: &[&str]) -> Result<TensorField> {
        let exprs = sources
            .iter()
            .map(|s| parse_expr(s, chart.coord_names()).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        TensorField::from_exprs(chart.dim(), upper, lower, exprs)
    }

    pub fn constant(dim: usize, upper: usize, lower: usize, values: &[f64]) -> Result<TensorField> {
        let exprs = values.iter().map(|&v| constant_expr(v)).collect();
        TensorField::from_exprs(dim, upper, lower, exprs)
    }

    pub fn vector(dim: usize, exprs: Vec<Expr>) -> Result<TensorField> {
        TensorField::from_exprs(dim, 1, 0, exprs)
    }

    /// The coordinate vector field `∂_i`.
    pub fn coordinate_vector(dim: usize, i: usize) -> TensorField {
        let exprs = (0..dim).map(|k| if k == i { Expr::one() } else { Expr::zero() }).collect();
        TensorField::from_exprs(dim, 1, 0, exprs).expect("coordinate vector is well formed")
    }

    pub fn procedure(dim: usize, upper: usize, lower: usize, f: Procedure) -> TensorField {
        TensorField {
            dim,
            upper,
            lower,
            source: Source::Procedure(f),
            symmetry: Symmetry::None,
        }
    }

    pub fn with_symmetry(mut self, symmetry: Symmetry) -> TensorField {
        self.symmetry = symmetry;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> (usize, usize) {
        (self.upper, self.lower)
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    /// Expression components, if the field is expression-backed.
    pub fn exprs(&self) -> Option<&[Expr]> {
        match &self.source {
            Source::Exprs(e) => Some(e),
            Source::Procedure(_) => None,
        }
    }

    pub fn expect_rank(&self, upper: usize, lower: usize) -> Result<()> {
        if (self.upper, self.lower) != (upper, lower) {
            return Err(Error::RankMismatch {
                expected_upper: upper,
                expected_lower: lower,
                upper: self.upper,
                lower: self.lower,
            });
        }
        Ok(())
    }

    pub fn eval(&self, p: &Point, order: usize) -> Result<EvaluatedTensor> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.dim(),
            });
        }
        let t = match &self.source {
            Source::Exprs(exprs) => {
                let seeds = p.seeds(order);
                let comps = exprs.iter().map(|e| e.eval_jets(&seeds)).collect::<Result<Vec<_>>>()?;
                EvaluatedTensor::new(self.dim, self.upper, self.lower, comps)?
            }
            Source::Procedure(f) => {
                let t = f(p, order)?;
                t.expect_rank(self.upper, self.lower)?;
                if t.dim() != self.dim {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        found: t.dim(),
                    });
                }
                t
            }
        };
        Ok(t)
    }

    /// Evaluates and checks the declared symmetry at `p`.
    pub fn eval_checked(&self, p: &Point, order: usize, tol: f64) -> Result<EvaluatedTensor> {
        let t = self.eval(p, order)?;
        match self.symmetry {
            Symmetry::Antisymmetric => {
                let residual = t.antisymmetry_residual();
                if residual > tol {
                    return Err(Error::NotAntisymmetric { residual });
                }
            }
            Symmetry::Symmetric => {
                let residual = t.symmetry_residual();
                if residual > tol {
                    return Err(Error::InvalidStructure(format!(
                        "declared symmetric field has residual {residual:.3e}"
                    )));
                }
            }
            Symmetry::None => {}
        }
        Ok(t)
    }
}

pub(crate) fn constant_expr(v: f64) -> Expr {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        Expr::int(v as i64)
    } else {
        Expr::float(v)
    }
}

/// All multi-indices of a given rank in row-major order.
pub fn multi_indices(dim: usize, rank: usize) -> Vec<Vec<usize>> {
    let total = component_count(dim, rank);
    (0..total)
        .map(|mut flat| {
            let mut idx = vec![0; rank];
            for slot in (0..rank).rev() {
                idx[slot] = flat % dim;
                flat /= dim;
            }
            idx
        })
        .collect()
}

/// A tensor evaluated to jets at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluatedTensor {
    dim: usize,
    upper: usize,
    lower: usize,
    comps: Vec<Jet>,
}

impl EvaluatedTensor {
    pub fn new(dim: usize, upper: usize, lower: usize, comps: Vec<Jet>) -> Result<EvaluatedTensor> {
        let expected = component_count(dim, upper + lower);
        if comps.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: comps.len(),
            });
        }
        if let Some(bad) = comps.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(EvaluatedTensor { dim, upper, lower, comps })
    }

    pub fn from_fn(dim: usize, upper: usize, lower: usize, mut f: impl FnMut(&[usize]) -> Jet) -> EvaluatedTensor {
        let comps = multi_indices(dim, upper + lower).iter().map(|i| f(i)).collect();
        EvaluatedTensor { dim, upper, lower, comps }
    }

    pub fn try_from_fn(
        dim: usize,
        upper: usize,
        lower: usize,
        mut f: impl FnMut(&[usize]) -> Result<Jet>,
    ) -> Result<EvaluatedTensor> {
        let comps = multi_indices(dim, upper + lower)
            .iter()
            .map(|i| f(i))
            .collect::<Result<Vec<_>>>()?;
        Ok(EvaluatedTensor { dim, upper, lower, comps })
    }

    pub fn scalar(j: Jet) -> EvaluatedTensor {
        EvaluatedTensor {
            dim: j.dim(),
            upper: 0,
            lower: 0,
            comps: vec![j],
        }
    }

    pub fn vector(comps: Vec<Jet>) -> Result<EvaluatedTensor> {
        let dim = comps.len();
        EvaluatedTensor::new(dim, 1, 0, comps)
    }

    pub fn covector(comps: Vec<Jet>) -> Result<EvaluatedTensor> {
        let dim = comps.len();
        EvaluatedTensor::new(dim, 0, 1, comps)
    }

    /// A constant vector in a space of dimension `values.len()`.
    pub fn constant_vector(values: &[f64], order: usize) -> EvaluatedTensor {
        let dim = values.len();
        EvaluatedTensor {
            dim,
            upper: 1,
            lower: 0,
            comps: values.iter().map(|&v| Jet::constant(dim, order, v)).collect(),
        }
    }

    pub fn zeros(dim: usize, upper: usize, lower: usize, order: usize) -> EvaluatedTensor {
        EvaluatedTensor::from_fn(dim, upper, lower, |_| Jet::zero(dim, order))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> (usize, usize) {
        (self.upper, self.lower)
    }

    /// Smallest jet order among the components.
    pub fn order(&self) -> usize {
        self.comps.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn comps(&self) -> &[Jet] {
        &self.comps
    }

    pub fn into_comps(self) -> Vec<Jet> {
        self.comps
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.upper + self.lower);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.comps[self.index(idx)]
    }

    pub fn value(&self, idx: &[usize]) -> f64 {
        self.get(idx).value()
    }

    /// Component values at the expansion point.
    pub fn values(&self) -> Vec<f64> {
        self.comps.iter().map(Jet::value).collect()
    }

    pub fn expect_rank(&self, upper: usize, lower: usize) -> Result<()> {
        if (self.upper, self.lower) != (upper, lower) {
            return Err(Error::RankMismatch {
                expected_upper: upper,
                expected_lower: lower,
                upper: self.upper,
                lower: self.lower,
            });
        }
        Ok(())
    }

    pub fn truncate(&self, order: usize) -> EvaluatedTensor {
        self.map(|j| j.truncate(order))
    }

    pub fn map(&self, f: impl FnMut(&Jet) -> Jet) -> EvaluatedTensor {
        EvaluatedTensor {
            dim: self.dim,
            upper: self.upper,
            lower: self.lower,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    /// Componentwise partial derivative, one jet order lower.
    pub fn partial(&self, direction: usize) -> Result<EvaluatedTensor> {
        Ok(EvaluatedTensor {
            dim: self.dim,
            upper: self.upper,
            lower: self.lower,
            comps: self.comps.iter().map(|c| c.partial(direction)).collect::<Result<Vec<_>>>()?,
        })
    }

    fn same_shape(&self, other: &EvaluatedTensor) -> Result<()> {
        other.expect_rank(self.upper, self.lower)?;
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &EvaluatedTensor) -> Result<EvaluatedTensor> {
        self.same_shape(other)?;
        Ok(EvaluatedTensor {
            dim: self.dim,
            upper: self.upper,
            lower: self.lower,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, other: &EvaluatedTensor) -> Result<EvaluatedTensor> {
        self.same_shape(other)?;
        Ok(EvaluatedTensor {
            dim: self.dim,
            upper: self.upper,
            lower: self.lower,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, factor: f64) -> EvaluatedTensor {
        self.map(|c| c.scale(factor))
    }

    /// Multiplies every component by a scalar jet.
    pub fn scale_by(&self, f: &Jet) -> EvaluatedTensor {
        self.map(|c| c * f)
    }

    pub fn max_abs_value(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.value().abs()))
    }

    /// Largest componentwise difference of values at the point.
    pub fn max_value_diff(&self, other: &EvaluatedTensor) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .fold(0.0, |m, (a, b)| m.max((a.value() - b.value()).abs()))
    }

    /// Largest difference over all retained Taylor coefficients.
    pub fn max_coeff_diff(&self, other: &EvaluatedTensor) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    fn slot_group(&self) -> (usize, usize) {
        if self.lower >= 2 {
            (self.upper, self.lower)
        } else {
            (0, self.upper)
        }
    }

    fn transposition_residual(&self, sign: f64) -> f64 {
        let (start, count) = self.slot_group();
        if count < 2 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for idx in multi_indices(self.dim, self.upper + self.lower) {
            for s in start..start + count - 1 {
                let mut swapped = idx.clone();
                swapped.swap(s, s + 1);
                let r = self.value(&idx) - sign * self.value(&swapped);
                worst = worst.max(r.abs());
            }
        }
        worst
    }

    /// Sign-rule violation over the lower indices (or the upper ones for a
    /// purely contravariant tensor).
    pub fn antisymmetry_residual(&self) -> f64 {
        self.transposition_residual(-1.0)
    }

    pub fn symmetry_residual(&self) -> f64 {
        self.transposition_residual(1.0)
    }
}

/// `(M v)^k = M^k_i v^i` for a `(1,1)` tensor and a vector.
pub fn apply(m: &EvaluatedTensor, v: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    m.expect_rank(1, 1)?;
    v.expect_rank(1, 0)?;
    let n = m.dim();
    let order = m.order().min(v.order());
    let comps = (0..n)
        .map(|k| {
            let mut acc = Jet::zero(n, order);
            for i in 0..n {
                acc.add_product(1.0, m.get(&[k, i]), v.get(&[i]));
            }
            acc
        })
        .collect();
    EvaluatedTensor::new(n, 1, 0, comps)
}

/// `(A B)^k_i = A^k_m B^m_i`.
pub fn compose(a: &EvaluatedTensor, b: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    a.expect_rank(1, 1)?;
    b.expect_rank(1, 1)?;
    let n = a.dim();
    let order = a.order().min(b.order());
    Ok(EvaluatedTensor::from_fn(n, 1, 1, |idx| {
        let mut acc = Jet::zero(n, order);
        for m in 0..n {
            acc.add_product(1.0, a.get(&[idx[0], m]), b.get(&[m, idx[1]]));
        }
        acc
    }))
}

/// `g(x, y) = g_{ij} x^i y^j` for a `(0,2)` tensor.
pub fn pair(g: &EvaluatedTensor, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<Jet> {
    g.expect_rank(0, 2)?;
    x.expect_rank(1, 0)?;
    y.expect_rank(1, 0)?;
    let n = g.dim();
    let order = g.order().min(x.order()).min(y.order());
    let mut acc = Jet::zero(n, order);
    for i in 0..n {
        let mut row = Jet::zero(n, order);
        for j in 0..n {
            row.add_product(1.0, g.get(&[i, j]), y.get(&[j]));
        }
        acc.add_product(1.0, x.get(&[i]), &row);
    }
    Ok(acc)
}

/// `ξ(x) = ξ_i x^i`.
pub fn contract(xi: &EvaluatedTensor, x: &EvaluatedTensor) -> Result<Jet> {
    xi.expect_rank(0, 1)?;
    x.expect_rank(1, 0)?;
    let n = xi.dim();
    let mut acc = Jet::zero(n, xi.order().min(x.order()));
    for i in 0..n {
        acc.add_product(1.0, xi.get(&[i]), x.get(&[i]));
    }
    Ok(acc)
}

/// Evaluates a `(0,k)` tensor on `k` vectors.
pub fn eval_form(w: &EvaluatedTensor, args: &[&EvaluatedTensor]) -> Result<Jet> {
    w.expect_rank(0, args.len())?;
    for a in args {
        a.expect_rank(1, 0)?;
    }
    let n = w.dim();
    let order = args.iter().map(|a| a.order()).min().unwrap_or(usize::MAX).min(w.order());
    let mut acc = Jet::zero(n, order);
    for idx in multi_indices(n, args.len()) {
        let c = w.get(&idx);
        if c.max_abs() == 0.0 {
            continue;
        }
        let mut term = c.truncate(order);
        for (slot, a) in args.iter().enumerate() {
            term = &term * a.get(&[idx[slot]]);
        }
        acc.axpy(1.0, &term);
    }
    Ok(acc)
}

/// Determinant of the values of an `n x n` block, by elimination.
pub fn det_values(values: &[f64], n: usize) -> f64 {
    let mut a = values.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
            .expect("non-empty range");
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
        }
    }
    det
}

/// Inverse of an `n x n` matrix of jets (row-major), by Gauss-Jordan
/// elimination pivoting on values. Fails with `SingularMetric` when the
/// determinant of the values is below [`SINGULAR_DET`].
pub fn invert_jet_matrix(m: &[Jet], n: usize) -> Result<Vec<Jet>> {
    let values: Vec<f64> = m.iter().map(Jet::value).collect();
    let det = det_values(&values, n);
    if det.abs() < SINGULAR_DET || !det.is_finite() {
        return Err(Error::SingularMetric { det: det.abs() });
    }
    let like = &m[0];
    let mut a: Vec<Jet> = m.to_vec();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|k| like.constant_like(if k / n == k % n { 1.0 } else { 0.0 }))
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r * n + col].value().abs().total_cmp(&a[s * n + col].value().abs()))
            .expect("non-empty range");
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
        }
        let p = a[col * n + col].recip()?;
        for k in 0..n {
            a[col * n + k] = &a[col * n + k] * &p;
            inv[col * n + k] = &inv[col * n + k] * &p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col].clone();
            if f.max_abs() == 0.0 {
                continue;
            }
            for k in 0..n {
                let sa = &f * &a[col * n + k];
                let si = &f * &inv[col * n + k];
                a[r * n + k] = &a[r * n + k] - &sa;
                inv[r * n + k] = &inv[r * n + k] - &si;
            }
        }
    }
    Ok(inv)
}

/// `η^{ij}` as a `(2,0)` tensor.
pub fn metric_inverse(eta: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    eta.expect_rank(0, 2)?;
    let inv = invert_jet_matrix(eta.comps(), eta.dim())?;
    EvaluatedTensor::new(eta.dim(), 2, 0, inv)
}

/// Inverse of a `(1,1)` tensor viewed as a matrix; fails with `SingularFrame`.
pub fn endomorphism_inverse(m: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    m.expect_rank(1, 1)?;
    let inv = invert_jet_matrix(m.comps(), m.dim()).map_err(|e| match e {
        Error::SingularMetric { det } => Error::SingularFrame { det },
        other => other,
    })?;
    EvaluatedTensor::new(m.dim(), 1, 1, inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_order_is_row_major() {
        let idx = multi_indices(3, 2);
        assert_eq!(idx[0], vec![0, 0]);
        assert_eq!(idx[1], vec![0, 1]);
        assert_eq!(idx[3], vec![1, 0]);
        assert_eq!(idx.len(), 9);
    }

    #[test]
    fn jet_matrix_inverse_is_exact_on_jets() {
        let p = Point::new(vec![0.3, -0.2]).unwrap();
        let seeds = p.seeds(3);
        let one = seeds[0].constant_like(1.0);
        let m = vec![
            one.add_scalar(1.0),
            seeds[0].clone(),
            (&seeds[1] * &seeds[0]).add_scalar(0.5),
            seeds[1].exp(),
        ];
        let inv = invert_jet_matrix(&m, 2).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let mut acc = Jet::zero(2, 3);
                for k in 0..2 {
                    acc.add_product(1.0, &m[r * 2 + k], &inv[k * 2 + c]);
                }
                let want = if r == c { 1.0 } else { 0.0 };
                assert!(acc.add_scalar(-want).max_abs() < 1e-13);
            }
        }
    }

    #[test]
    fn singular_metric_is_reported() {
        let o = Jet::constant(2, 1, 1.0);
        let m = vec![o.clone(), o.clone(), o.clone(), o];
        assert!(matches!(invert_jet_matrix(&m, 2), Err(Error::SingularMetric { .. })));
    }

    #[test]
    fn declared_antisymmetry_is_checked() {
        let chart = Chart::new(vec!["x".into(), "y".into()]).unwrap();
        let w = TensorField::parse(&chart, 0, 2, &["0", "x", "x", "0"])
            .unwrap()
            .with_symmetry(Symmetry::Antisymmetric);
        let p = chart.point(vec![1.0, 0.0]).unwrap();
        assert!(matches!(w.eval_checked(&p, 1, 1e-10), Err(Error::NotAntisymmetric { .. })));
    }
}
