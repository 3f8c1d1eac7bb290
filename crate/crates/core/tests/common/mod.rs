//! Oracles shared by the integration tests. Nothing here uses jets: the
//! derivatives come from symbolic differentiation of expression trees and are
//! evaluated in plain floating point.
#![allow(dead_code)]

use parahermitian::expr::Expr;
use rand::Rng;

/// `∂e/∂x^i` as a new expression.
pub fn diff(e: &Expr, i: usize) -> Expr {
    let b = |x: Expr| Box::new(x);
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Coord(j) => {
            if *j == i {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Neg(a) => Expr::Neg(b(diff(a, i))),
        Expr::Add(x, y) => diff(x, i) + diff(y, i),
        Expr::Sub(x, y) => diff(x, i) - diff(y, i),
        Expr::Mul(x, y) => diff(x, i) * (**y).clone() + (**x).clone() * diff(y, i),
        Expr::Div(x, y) => {
            (diff(x, i) * (**y).clone() - (**x).clone() * diff(y, i)) / Expr::Pow(y.clone(), 2)
        }
        Expr::Pow(x, k) => Expr::int(*k as i64) * Expr::Pow(x.clone(), k - 1) * diff(x, i),
        Expr::Sin(x) => Expr::Cos(x.clone()) * diff(x, i),
        Expr::Cos(x) => -(Expr::Sin(x.clone()) * diff(x, i)),
        Expr::Exp(x) => Expr::Exp(x.clone()) * diff(x, i),
        Expr::Sqrt(x) => diff(x, i) / (Expr::int(2) * Expr::Sqrt(x.clone())),
    }
}

pub fn ev(e: &Expr, p: &[f64]) -> f64 {
    e.eval_f64(p).expect("oracle evaluation")
}

/// Flat `η` of `R^{2n}` in adapted coordinates; it is its own inverse.
pub fn flat_eta(n: usize, a: usize, b: usize) -> f64 {
    if (a < n && b == a + n) || (b < n && a == b + n) {
        1.0
    } else {
        0.0
    }
}

/// Coordinate D-bracket of flat `R^{2n}`:
/// `X^I ∂_I Y^J − Y^I ∂_I X^J + η_{IL} η^{KJ} Y^I ∂_K X^L`.
pub fn flat_d_bracket(n: usize, x: &[Expr], y: &[Expr], p: &[f64]) -> Vec<f64> {
    let dim = 2 * n;
    let xv: Vec<f64> = x.iter().map(|e| ev(e, p)).collect();
    let yv: Vec<f64> = y.iter().map(|e| ev(e, p)).collect();
    // d[a][k] = ∂_k a^a
    let grad = |f: &[Expr]| -> Vec<Vec<f64>> {
        f.iter().map(|e| (0..dim).map(|k| ev(&diff(e, k), p)).collect()).collect()
    };
    let dx = grad(x);
    let dy = grad(y);
    (0..dim)
        .map(|j| {
            let mut v = 0.0;
            for i in 0..dim {
                v += xv[i] * dy[j][i] - yv[i] * dx[j][i];
            }
            for i in 0..dim {
                for l in 0..dim {
                    let e_il = flat_eta(n, i, l);
                    if e_il == 0.0 {
                        continue;
                    }
                    for k in 0..dim {
                        v += e_il * flat_eta(n, k, j) * yv[i] * dx[l][k];
                    }
                }
            }
            v
        })
        .collect()
}

/// Riemann tensor of the unit round sphere in `(θ, φ)`:
/// `R(∂_i,∂_j)∂_l = g_{jl}∂_i − g_{il}∂_j`, returned as `R^k_{lij}`.
pub fn sphere_riemann(theta: f64, k: usize, l: usize, i: usize, j: usize) -> f64 {
    let g = |a: usize, b: usize| match (a, b) {
        (0, 0) => 1.0,
        (1, 1) => theta.sin().powi(2),
        _ => 0.0,
    };
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    d(k, i) * g(j, l) - d(k, j) * g(i, l)
}

pub fn sphere_metric(theta: f64, a: usize, b: usize) -> f64 {
    match (a, b) {
        (0, 0) => 1.0,
        (1, 1) => theta.sin().powi(2),
        _ => 0.0,
    }
}

/// A random expression of bounded depth built only from operations that
/// are smooth everywhere (denominators and square-root arguments are kept
/// away from zero).
pub fn random_smooth_expr(rng: &mut impl Rng, dim: usize, depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.7) {
            Expr::coord(rng.gen_range(0..dim))
        } else {
            Expr::float((rng.gen_range(-2.0..2.0f64) * 8.0).round() / 8.0)
        };
    }
    let sub = |rng: &mut _| random_smooth_expr(rng, dim, depth - 1);
    match rng.gen_range(0..9) {
        0 => sub(rng) + sub(rng),
        1 => sub(rng) - sub(rng),
        2 => sub(rng) * sub(rng),
        3 => sub(rng) / (Expr::float(2.5) + Expr::Sin(Box::new(sub(rng)))),
        4 => Expr::Sin(Box::new(sub(rng))),
        5 => Expr::Cos(Box::new(sub(rng))),
        6 => Expr::Exp(Box::new(Expr::Sin(Box::new(sub(rng))))),
        7 => Expr::Sqrt(Box::new(Expr::one() + Expr::Pow(Box::new(sub(rng)), 2))),
        _ => Expr::Pow(Box::new(sub(rng)), rng.gen_range(-1..4).max(0) + 1),
    }
}

/// A constant `(1,2)` field `S^k_{ij}` from a list of nonzero entries.
pub fn shift_entries(dim: usize, entries: &[(usize, usize, usize, f64)]) -> Vec<f64> {
    let mut s = vec![0.0; dim * dim * dim];
    for &(k, i, j, v) in entries {
        s[(k * dim + i) * dim + j] += v;
    }
    s
}
