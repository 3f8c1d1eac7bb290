//! Parse an expression, print it back, and read derivatives off its jet.

use parahermitian::expr::{eval_jet, parse_expr};

fn main() -> parahermitian::Result<()> {
    let names = vec!["x".to_string(), "y".to_string()];
    let e = parse_expr("exp(x) * sin(y) + x^3 / (1 + y^2)", &names)?;
    println!("f(x, y) = {}", e.display_with(&names));

    let at = [0.5, -0.3];
    let jet = eval_jet(&e, &at, 2)?;
    println!("f        = {:.12}", jet.value());
    println!("grad f   = {:?}", jet.gradient().expect("order >= 1"));
    println!("f_xy     = {:.12}", jet.derivative_along(&[0, 1]).expect("order >= 2"));
    println!("f_yy     = {:.12}", jet.derivative_along(&[1, 1]).expect("order >= 2"));

    // the derivative of a product, through the jet algebra
    let s = parse_expr("sin(x)", &names)?;
    let c = parse_expr("cos(x)", &names)?;
    let product = &eval_jet(&s, &at, 1)? * &eval_jet(&c, &at, 1)?;
    println!("d/dx (sin x cos x) = {:.12} (cos 2x = {:.12})", product.derivative_along(&[0]).expect("order >= 1"), (2.0 * at[0]).cos());
    Ok(())
}
