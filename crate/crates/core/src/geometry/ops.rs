//! Differential operators on evaluated tensors.
//!
//! Every operator that differentiates lowers the jet order of its result by
//! one, so nested operations work as long as the order budget lasts.

use crate::error::{Error, Result};
use crate::jet::Jet;

use super::tensor::{multi_indices, EvaluatedTensor};

/// Absolute tolerance for the antisymmetry precondition of `d`.
pub const ANTISYMMETRY_TOL: f64 = 1e-10;

fn need_order(t: &EvaluatedTensor, operation: &'static str) -> Result<()> {
    if t.order() == 0 {
        return Err(Error::InsufficientJetOrder {
            operation,
            needed: 1,
            available: 0,
        });
    }
    Ok(())
}

/// `X[f] = X^i ∂_i f`.
pub fn directional(x: &EvaluatedTensor, f: &Jet) -> Result<Jet> {
    x.expect_rank(1, 0)?;
    if f.order() == 0 {
        return Err(Error::InsufficientJetOrder {
            operation: "directional derivative",
            needed: 1,
            available: 0,
        });
    }
    let n = x.dim();
    let mut acc = Jet::zero(n, f.order() - 1);
    for i in 0..n {
        acc.add_product(1.0, x.get(&[i]), &f.partial(i)?);
    }
    Ok(acc)
}

/// `[X,Y]^J = X^I ∂_I Y^J − Y^I ∂_I X^J`.
pub fn lie_bracket(x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    x.expect_rank(1, 0)?;
    y.expect_rank(1, 0)?;
    need_order(x, "Lie bracket")?;
    need_order(y, "Lie bracket")?;
    let n = x.dim();
    let comps = (0..n)
        .map(|j| {
            let a = directional(x, y.get(&[j]))?;
            let b = directional(y, x.get(&[j]))?;
            Ok(&a - &b)
        })
        .collect::<Result<Vec<_>>>()?;
    EvaluatedTensor::vector(comps)
}

/// `(dω)_{I_0…I_k} = Σ_j (−1)^j ∂_{I_j} ω_{I_0…Î_j…I_k}`, with no `1/k!`.
pub fn exterior_derivative(w: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    let (upper, k) = w.rank();
    if upper != 0 {
        return Err(Error::RankMismatch {
            expected_upper: 0,
            expected_lower: k,
            upper,
            lower: k,
        });
    }
    let residual = w.antisymmetry_residual();
    if residual > ANTISYMMETRY_TOL {
        return Err(Error::NotAntisymmetric { residual });
    }
    need_order(w, "exterior derivative")?;
    let n = w.dim();
    let partials = (0..n).map(|i| w.partial(i)).collect::<Result<Vec<_>>>()?;
    let order = w.order() - 1;
    Ok(EvaluatedTensor::from_fn(n, 0, k + 1, |idx| {
        let mut acc = Jet::zero(n, order);
        for j in 0..=k {
            let rest: Vec<usize> = idx.iter().enumerate().filter(|&(s, _)| s != j).map(|(_, &i)| i).collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc.axpy(sign, partials[idx[j]].get(&rest));
        }
        acc
    }))
}

/// `(ι_X ω)_{I_2…} = X^i ω_{i I_2…}`.
pub fn interior(x: &EvaluatedTensor, w: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    x.expect_rank(1, 0)?;
    let (upper, k) = w.rank();
    if upper != 0 || k == 0 {
        return Err(Error::RankMismatch {
            expected_upper: 0,
            expected_lower: k.max(1),
            upper,
            lower: k,
        });
    }
    let n = w.dim();
    let order = x.order().min(w.order());
    Ok(EvaluatedTensor::from_fn(n, 0, k - 1, |rest| {
        let mut acc = Jet::zero(n, order);
        let mut idx = Vec::with_capacity(k);
        for i in 0..n {
            idx.clear();
            idx.push(i);
            idx.extend_from_slice(rest);
            acc.add_product(1.0, x.get(&[i]), w.get(&idx));
        }
        acc
    }))
}

/// Lie derivative of a covariant tensor (or of a vector field, which is the
/// Lie bracket): `(L_X T)_I = X^J ∂_J T_I + Σ_s T_{…J…} ∂_{I_s} X^J`.
pub fn lie_derivative(x: &EvaluatedTensor, t: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    x.expect_rank(1, 0)?;
    match t.rank() {
        (1, 0) => return lie_bracket(x, t),
        (0, _) => {}
        (upper, lower) => {
            return Err(Error::RankMismatch {
                expected_upper: 0,
                expected_lower: lower,
                upper,
                lower,
            })
        }
    }
    need_order(x, "Lie derivative")?;
    need_order(t, "Lie derivative")?;
    let n = t.dim();
    let k = t.rank().1;
    let dx = (0..n).map(|i| x.partial(i)).collect::<Result<Vec<_>>>()?;
    let order = x.order().min(t.order()) - 1;
    EvaluatedTensor::try_from_fn(n, 0, k, |idx| {
        let mut acc = directional(x, t.get(idx))?.truncate(order);
        let mut swapped = idx.to_vec();
        for s in 0..k {
            for j in 0..n {
                swapped[s] = j;
                acc.add_product(1.0, t.get(&swapped), dx[idx[s]].get(&[j]));
            }
            swapped[s] = idx[s];
        }
        Ok(acc)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Musical {
    /// Lower every index of a contravariant tensor with `η_{ij}`.
    Flat,
    /// Raise every index of a covariant tensor with `η^{ij}`.
    Sharp,
}

/// Lowers (or raises) all indices, keeping their order. `metric` is `η_{ij}`
/// for [`Musical::Flat`] and `η^{ij}` for [`Musical::Sharp`].
pub fn musical(metric: &EvaluatedTensor, t: &EvaluatedTensor, mode: Musical) -> Result<EvaluatedTensor> {
    let (rank, out_upper) = match mode {
        Musical::Flat => {
            metric.expect_rank(0, 2)?;
            t.expect_rank(t.rank().0, 0)?;
            (t.rank().0, false)
        }
        Musical::Sharp => {
            metric.expect_rank(2, 0)?;
            t.expect_rank(0, t.rank().1)?;
            (t.rank().1, true)
        }
    };
    let n = t.dim();
    let order = metric.order().min(t.order());
    let mut current: Vec<Jet> = t.comps().iter().map(|c| c.truncate(order)).collect();
    let all = multi_indices(n, rank);
    let pos = |idx: &[usize]| idx.iter().fold(0, |acc, &i| acc * n + i);
    for slot in 0..rank {
        let next: Vec<Jet> = all
            .iter()
            .map(|idx| {
                let mut acc = Jet::zero(n, order);
                let mut src = idx.clone();
                for j in 0..n {
                    src[slot] = j;
                    acc.add_product(1.0, metric.get(&[idx[slot], j]), &current[pos(&src)]);
                }
                acc
            })
            .collect();
        current = next;
    }
    if out_upper {
        EvaluatedTensor::new(n, rank, 0, current)
    } else {
        EvaluatedTensor::new(n, 0, rank, current)
    }
}

/// `η(X, ·)` as a covector.
pub fn flat(eta: &EvaluatedTensor, x: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    musical(eta, x, Musical::Flat)
}

/// `η^{-1}(ξ)` as a vector.
pub fn sharp(eta_inv: &EvaluatedTensor, xi: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    musical(eta_inv, xi, Musical::Sharp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::chart::{Chart, Point};
    use crate::geometry::tensor::TensorField;

    fn flat_chart() -> Chart {
        Chart::new(vec!["x".into(), "xt".into()]).unwrap()
    }

    #[test]
    fn coordinate_fields_commute() {
        let p = Point::new(vec![0.4, 0.1]).unwrap();
        let a = TensorField::coordinate_vector(2, 0).eval(&p, 2).unwrap();
        let b = TensorField::coordinate_vector(2, 1).eval(&p, 2).unwrap();
        assert_eq!(lie_bracket(&a, &b).unwrap().max_abs_value(), 0.0);
    }

    #[test]
    fn textbook_bracket() {
        let c = flat_chart();
        let p = c.point(vec![0.7, -0.3]).unwrap();
        let dx = TensorField::parse(&c, 1, 0, &["1", "0"]).unwrap().eval(&p, 2).unwrap();
        let xdx = TensorField::parse(&c, 1, 0, &["x", "0"]).unwrap().eval(&p, 2).unwrap();
        assert_eq!(lie_bracket(&dx, &xdx).unwrap().values(), vec![1.0, 0.0]);
    }

    #[test]
    fn d_of_xt_dx() {
        let c = flat_chart();
        let p = c.point(vec![0.2, 0.9]).unwrap();
        let alpha = TensorField::parse(&c, 0, 1, &["xt", "0"]).unwrap().eval(&p, 2).unwrap();
        let da = exterior_derivative(&alpha).unwrap();
        assert_eq!(da.value(&[1, 0]), 1.0);
        assert_eq!(da.value(&[0, 1]), -1.0);
    }

    #[test]
    fn lie_derivative_examples() {
        let c = flat_chart();
        let p = c.point(vec![0.2, 0.9]).unwrap();
        let dx = TensorField::parse(&c, 1, 0, &["1", "0"]).unwrap().eval(&p, 2).unwrap();
        let x_dx = TensorField::parse(&c, 0, 1, &["x", "0"]).unwrap().eval(&p, 2).unwrap();
        assert_eq!(lie_derivative(&dx, &x_dx).unwrap().values(), vec![1.0, 0.0]);
        let xt_dt = TensorField::parse(&c, 1, 0, &["0", "xt"]).unwrap().eval(&p, 2).unwrap();
        let dxt = TensorField::parse(&c, 0, 1, &["0", "1"]).unwrap().eval(&p, 2).unwrap();
        assert_eq!(lie_derivative(&xt_dt, &dxt).unwrap().values(), vec![0.0, 1.0]);
    }

    #[test]
    fn order_zero_is_insufficient() {
        let p = Point::new(vec![0.0, 0.0]).unwrap();
        let a = TensorField::coordinate_vector(2, 0).eval(&p, 0).unwrap();
        assert!(matches!(lie_bracket(&a, &a), Err(Error::InsufficientJetOrder { .. })));
    }

    #[test]
    fn rank_is_checked() {
        let p = Point::new(vec![0.0, 0.0]).unwrap();
        let a = TensorField::coordinate_vector(2, 0).eval(&p, 1).unwrap();
        let w = EvaluatedTensor::zeros(2, 0, 1, 1);
        assert!(matches!(lie_bracket(&a, &w), Err(Error::RankMismatch { .. })));
    }
}
