//! Fields that depend only on `x1, x2` on flat `R^4`: the D-bracket closes
//! with no Jacobi defect, while general fields produce one.

use parahermitian::brackets::{jacobi_defect, AssociatedBracket};
use parahermitian::geometry::TensorField;
use parahermitian::models::FlatModel;
use parahermitian::sampling::{random_polynomial_field, stream};

fn worst_defect(m: &FlatModel, vars: Option<&[usize]>) -> parahermitian::Result<f64> {
    let mut rng = stream(5, 0);
    let f: Vec<TensorField> = (0..6).map(|_| random_polynomial_field(&mut rng, 4, 2, vars)).collect();
    let mut worst: f64 = 0.0;
    for p in m.sample(10, 6)? {
        let d = AssociatedBracket::d_bracket(m.structure().local(&p, 3)?)?;
        let ev = f.iter().map(|x| x.eval(&p, 3)).collect::<parahermitian::Result<Vec<_>>>()?;
        for c in ev.chunks(3) {
            worst = worst.max(jacobi_defect(&d, &c[0], &c[1], &c[2])?.max_abs_value());
        }
    }
    Ok(worst)
}

fn main() -> parahermitian::Result<()> {
    let m = FlatModel::new(2)?;
    println!("fields of (x1, x2) only: Jacobi defect {:.1e}", worst_defect(&m, Some(&[0, 1]))?);
    println!("general fields:          Jacobi defect {:.1e}", worst_defect(&m, None)?);
    Ok(())
}
