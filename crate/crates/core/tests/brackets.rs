mod common;

use common::flat_d_bracket;
use parahermitian::brackets::{
    c_bracket_local, courant_residuals, d_bracket_local, AssociatedBracket, PointBracket, SkewBracket,
};
use parahermitian::geometry::{directional, Point, TensorField};
use parahermitian::models::TangentBundleModel;
use parahermitian::sampling::{random_polynomial, random_polynomial_field, stream};
use proptest::prelude::*;

fn field(seed: u64, k: u64) -> TensorField {
    random_polynomial_field(&mut stream(seed, k), 4, 2, None)
}

fn sphere_point() -> impl Strategy<Value = Point> {
    (0.4f64..2.7, -3.0f64..3.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b, c, d)| Point::new(vec![a, b, c, d]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// `⟦fX,Y⟧ = f⟦X,Y⟧ − Y[f]X + η(X,Y) η⁻¹df` and `⟦X,fY⟧ = f⟦X,Y⟧ + X[f]Y`.
    #[test]
    fn d_bracket_anchor_rules(p in sphere_point(), seed in any::<u64>()) {
        let m = TangentBundleModel::sphere()?;
        let local = m.structure().local(&p, 2)?;
        let (x, y) = (field(seed, 0).eval(&p, 2)?, field(seed, 1).eval(&p, 2)?);
        let vars: Vec<usize> = (0..4).collect();
        let f = random_polynomial(&mut stream(seed, 2), &vars, 2).eval_jets(&p.seeds(2))?;
        let base = d_bracket_local(&local, &x, &y)?;

        let left = d_bracket_local(&local, &x.scale_by(&f), &y)?;
        let df = parahermitian::geometry::EvaluatedTensor::covector((0..4).map(|i| f.partial(i)).collect::<Result<_, _>>()?)?;
        let expected = base
            .scale_by(&f)
            .try_sub(&x.scale_by(&directional(&y, &f)?))?
            .try_add(&local.sharp(&df)?.scale_by(&local.metric(&x, &y)?))?;
        let tol = 1e-10 * (1.0 + expected.max_abs_value());
        prop_assert!(left.max_value_diff(&expected) < tol);

        let right = d_bracket_local(&local, &x, &y.scale_by(&f))?;
        let expected = base.scale_by(&f).try_add(&y.scale_by(&directional(&x, &f)?))?;
        prop_assert!(right.max_value_diff(&expected) < tol);
    }

    /// Axioms (1) and (2) of the D-bracket hold with the identity anchor on
    /// the sphere model, where `T₊` is not integrable.
    #[test]
    fn d_bracket_is_metric_compatible_without_integrability(p in sphere_point(), seed in any::<u64>()) {
        let m = TangentBundleModel::sphere()?;
        let br = AssociatedBracket::d_bracket(m.structure().local(&p, 3)?)?;
        let (x, y, z) = (field(seed, 0).eval(&p, 3)?, field(seed, 1).eval(&p, 3)?, field(seed, 2).eval(&p, 3)?);
        let r = courant_residuals(&br, &x, &y, &z)?;
        prop_assert!(r.axiom1.unwrap() < 1e-9);
        prop_assert!(r.axiom2.unwrap() < 1e-9);
    }

    #[test]
    fn skew_bracket_is_exactly_antisymmetric(p in sphere_point(), seed in any::<u64>()) {
        let m = TangentBundleModel::sphere()?;
        let local = m.structure().local(&p, 2)?;
        let br = SkewBracket(AssociatedBracket::d_bracket(local.clone())?);
        let (x, y) = (field(seed, 0).eval(&p, 2)?, field(seed, 1).eval(&p, 2)?);
        let xy = br.bracket(&x, &y)?;
        let yx = br.bracket(&y, &x)?;
        for (a, b) in xy.values().iter().zip(yx.values()) {
            prop_assert_eq!(a.to_bits(), (-b).to_bits());
        }
        prop_assert_eq!(xy.values(), c_bracket_local(&local, &x, &y)?.values());
    }
}

/// With `g = δ` the tangent-bundle D-bracket takes the flat coordinate form
/// with `(x, v)` in place of `(x, x̃)`.
#[test]
fn euclidean_tangent_bundle_has_flat_coordinate_bracket() {
    let m = TangentBundleModel::euclidean(2).unwrap();
    let pts = m.sample(20, 3).unwrap();
    for (k, p) in pts.iter().enumerate() {
        let x = field(40, k as u64);
        let y = field(41, k as u64);
        let local = m.structure().local(p, 1).unwrap();
        let ours = d_bracket_local(&local, &x.eval(p, 1).unwrap(), &y.eval(p, 1).unwrap()).unwrap();
        let oracle = flat_d_bracket(2, x.exprs().unwrap(), y.exprs().unwrap(), p.coords());
        for (a, b) in ours.values().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        // sanity: the oracle is not trivially zero
        assert!(oracle.iter().any(|v| v.abs() > 1e-3));
    }
}
