//! The D-bracket on flat `R^4` with coordinates `(x1, x2, xt1, xt2)`.

use parahermitian::brackets::d_bracket;
use parahermitian::expr::parse_expr;
use parahermitian::geometry::{Point, TensorField};
use parahermitian::models::FlatModel;
use parahermitian::parastructure::{classify, validate_structure};

fn main() -> parahermitian::Result<()> {
    let m = FlatModel::new(2)?;
    let names = m.chart().coord_names().to_vec();
    println!("coordinates: {names:?}");
    let pts = m.sample(8, 1)?;
    println!("structure residual: {:.1e}", validate_structure(m.structure(), &pts, 1e-10)?.max_residual());
    let c = classify(m.structure(), &pts, 1e-9)?;
    println!("para-Kähler: {}", c.para_kahler);

    let field = |src: [&str; 4]| -> parahermitian::Result<TensorField> {
        let e = src.iter().map(|s| parse_expr(s, &names)).collect::<Result<Vec<_>, _>>()?;
        TensorField::from_exprs(4, 1, 0, e)
    };
    let x = field(["x1*xt2", "0", "x2", "1"])?;
    let y = field(["0", "xt1^2", "x1", "x2*xt2"])?;
    let p = Point::new(vec![0.3, -0.7, 1.1, 0.4])?;
    let xy = d_bracket(m.structure(), &x, &y, &p, 1)?;
    let yx = d_bracket(m.structure(), &y, &x, &p, 1)?;
    println!("⟦X,Y⟧ at {:?} = {:?}", p.coords(), xy.values());
    println!("⟦Y,X⟧ at {:?} = {:?}", p.coords(), yx.values());
    Ok(())
}
