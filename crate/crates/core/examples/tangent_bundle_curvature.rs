//! The round sphere's tangent bundle: horizontal lifts fail to commute by
//! the curvature, and that shows up as a non-integrable `T₊`.

use parahermitian::geometry::{lie_bracket, Point};
use parahermitian::models::TangentBundleModel;
use parahermitian::parastructure::{classify, n_sign, Sign};

fn main() -> parahermitian::Result<()> {
    let m = TangentBundleModel::sphere()?;
    let p = Point::new(vec![1.0, 0.4, 0.3, -0.8])?;
    let h0 = m.horizontal(0).eval(&p, 1)?;
    let h1 = m.horizontal(1).eval(&p, 1)?;
    let br = lie_bracket(&h0, &h1)?;
    println!("[H_1, H_2] at {:?} = {:?}", p.coords(), br.values());

    let local = m.structure().local(&p, 1)?;
    println!("max |N₊| = {:.4}", n_sign(&local, Sign::Plus)?.max_abs_value());
    println!("max |N₋| = {:.1e}", n_sign(&local, Sign::Minus)?.max_abs_value());

    let c = classify(m.structure(), &m.sample(10, 4)?, 1e-9)?;
    println!("{c:#?}");
    Ok(())
}
