//! A B-transformation of flat `R^6` by a two-form on `T₊`, its
//! Maurer–Cartan terms and the fluxes it generates.

use parahermitian::deformations::{extract_fluxes, maurer_cartan, BTransformation};
use parahermitian::expr::{parse_expr, Expr};
use parahermitian::geometry::{Point, TensorField};
use parahermitian::models::FlatModel;

fn main() -> parahermitian::Result<()> {
    let m = FlatModel::new(3)?;
    let names = m.chart().coord_names().to_vec();
    let mut e = vec![Expr::zero(); 36];
    for (i, j, src) in [(0, 1, "x3 * xt1"), (0, 2, "x2^2"), (1, 2, "xt3 * x1")] {
        let c = parse_expr(src, &names)?;
        e[i * 6 + j] = c.clone();
        e[j * 6 + i] = -c;
    }
    let b = TensorField::from_exprs(6, 0, 2, e)?;
    let p = Point::new(vec![0.2, -0.5, 0.7, 0.1, 0.3, -0.4])?;
    let t = BTransformation::b_transform(m.structure(), b, std::slice::from_ref(&p))?;
    println!("transformed structure residual: {:.1e}", t.invariants(&p)?.max());

    let coord = |k: usize| {
        let e = (0..6).map(|i| if i == k { Expr::float(1.0) } else { Expr::zero() }).collect();
        TensorField::from_exprs(6, 1, 0, e)
    };
    let mc = maurer_cartan(&t, &coord(0)?, &coord(1)?, &coord(2)?, &p, 2)?;
    println!(
        "on ∂_1, ∂_2, ∂_3: bracket side {:.6}, db {:.6}, [b,b] {:.6}",
        mc.bracket_side, mc.differential, mc.schouten
    );

    let f = extract_fluxes(&t, &p)?;
    println!("H_123 = {:.6}", f.h[5]);
    println!("R̃^123 = {:.6}", f.r_tilde[5]);
    println!("ℋ_123 = {:.6}", f.h_cov[5]);
    println!("Q̃^3_23 = {:.6}", f.q_tilde[23]);
    println!("reassembly residual {:.1e}", f.reassembly_residual);
    Ok(())
}
