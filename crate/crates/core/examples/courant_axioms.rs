//! Courant axioms for the projected brackets of the sphere's tangent bundle.
//! `T₋` is integrable there and `T₊` is not, so only `⟦,⟧₋` is Courant.

use parahermitian::brackets::{courant_axiom_suite, AssociatedBracket, PointBracket};
use parahermitian::geometry::TensorField;
use parahermitian::models::TangentBundleModel;
use parahermitian::parastructure::Sign;
use parahermitian::sampling::{random_polynomial_field, stream};

fn main() -> parahermitian::Result<()> {
    let m = TangentBundleModel::sphere()?;
    let pts = m.sample(6, 2)?;
    let mut rng = stream(3, 0);
    let triples: Vec<[TensorField; 3]> = (0..4)
        .map(|_| std::array::from_fn(|_| random_polynomial_field(&mut rng, 4, 2, None)))
        .collect();
    for sign in [Sign::Plus, Sign::Minus] {
        let s = m.structure().clone();
        let r = courant_axiom_suite(&pts, 3, &triples, 3, move |p, order| {
            Ok(Box::new(AssociatedBracket::projected_canonical(s.local(p, order)?, sign)?) as Box<dyn PointBracket>)
        })?;
        println!(
            "⟦,⟧{}: axiom1 {:.1e}  axiom2 {:.1e}  Jacobi {:.1e}",
            sign.symbol(),
            r.axiom1.unwrap_or(0.0),
            r.axiom2.unwrap_or(0.0),
            r.axiom3
        );
        for w in &r.witnesses {
            println!("  worst axiom {} at point {} {:?}: {:.3e}", w.axiom, w.point_index, w.point, w.residual);
        }
    }
    Ok(())
}
