//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain
//! binary (`harness = false`) and exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;

use common::{diff, ev, flat_d_bracket, random_smooth_expr, shift_entries, sphere_riemann};
use parahermitian::brackets::{
    associated_bracket_local, courant_axiom_suite, dorfman_contracted, jacobi_defect, leafwise_mismatch,
    AssociatedBracket, PointBracket,
};
use parahermitian::connections::{canonical_coefficients, check_adapted, Connection, Side};
use parahermitian::deformations::{
    extract_fluxes, maurer_cartan, twisted_d_bracket, BTransformation,
};
use parahermitian::expr::{eval_jet, Expr};
use parahermitian::geometry::{lie_bracket, EvaluatedTensor, Point, TensorField};
use parahermitian::models::{FlatModel, TangentBundleModel};
use parahermitian::parastructure::{bigraded_part, cyclic_sum, n_sign, ParaHermitianStructure, Sign};
use parahermitian::sampling::{random_polynomial, random_polynomial_field, stream, Region};
use parahermitian::{Error, Result};

type Verdict = std::result::Result<String, String>;

fn lib<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| format!("library error: {e}"))
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// The flat metric on `R^2` in polar coordinates, lifted to its tangent
/// bundle: para-Kähler, with non-vanishing Christoffel symbols.
fn polar_tm() -> Result<TangentBundleModel> {
    let region = Region::cube(4, 1.0).with_bounds(0, 0.5, 1.5).with_bounds(1, -PI, PI);
    TangentBundleModel::new(vec!["r".into(), "t".into()], None, &["1", "0", "0", "r^2"])?.with_region(region)
}

fn fields(seed: u64, stream_id: u64, count: usize, dim: usize, vars: Option<&[usize]>) -> Vec<TensorField> {
    let mut rng = stream(seed, stream_id);
    (0..count).map(|_| random_polynomial_field(&mut rng, dim, 2, vars)).collect()
}

fn exprs(f: &TensorField) -> Vec<Expr> {
    f.exprs().expect("expression-backed field").to_vec()
}

// 1 ---------------------------------------------------------------------

fn flat_oracle() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in [2usize, 3] {
        let m = lib(FlatModel::new(n))?;
        let pts = lib(m.sample(50, 11 + n as u64))?;
        let xs = fields(12, n as u64, 100, 2 * n, None);
        let ys = fields(13, n as u64, 100, 2 * n, None);
        let err = pts
            .par_iter()
            .map(|p| {
                let local = m.structure().local(p, 1)?;
                let gamma = canonical_coefficients(&local)?;
                let mut w: f64 = 0.0;
                for (x, y) in xs.iter().zip(&ys) {
                    let ours = associated_bracket_local(&local, &gamma, None, &x.eval(p, 1)?, &y.eval(p, 1)?)?;
                    let oracle = flat_d_bracket(n, &exprs(x), &exprs(y), p.coords());
                    for (a, b) in ours.values().iter().zip(&oracle) {
                        w = w.max((a - b).abs());
                    }
                }
                Ok(w)
            })
            .collect::<Result<Vec<f64>>>();
        worst = worst.max(lib(err)?.into_iter().fold(0.0, f64::max));
    }
    check(worst < 1e-9, format!("n=2,3: 100 pairs x 50 points, max error {worst:.2e}"))
}

// 2 ---------------------------------------------------------------------

fn forward_direction() -> Verdict {
    let mut details = Vec::new();
    let mut ok = true;
    let models: Vec<(&str, ParaHermitianStructure, Vec<Point>, Vec<Sign>)> = {
        let f2 = lib(FlatModel::new(2))?;
        let f3 = lib(FlatModel::new(3))?;
        let tm = lib(polar_tm())?;
        vec![
            ("flat n=2", f2.structure().clone(), lib(f2.sample(10, 21))?, vec![Sign::Plus, Sign::Minus]),
            ("flat n=3", f3.structure().clone(), lib(f3.sample(10, 22))?, vec![Sign::Plus]),
            ("flat-g TM", tm.structure().clone(), lib(tm.sample(10, 23))?, vec![Sign::Plus]),
        ]
    };
    for (name, s, pts, signs) in models {
        let dim = s.dim();
        let mut rng = stream(24, dim as u64);
        let c: Vec<f64> = (0..dim * dim * dim).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let xs = fields(25, dim as u64, 10, dim, None);
        let ys = fields(26, dim as u64, 10, dim, None);
        for sign in signs {
            let alt = lib(Connection::alternative_adapted(&s, sign, c.clone()))?;
            let side = if sign == Sign::Plus { Side::P } else { Side::N };
            let adapted = lib(check_adapted(&alt, &s, side, &pts, 20, 27, 1e-9))?;
            let per_point = pts
                .par_iter()
                .map(|p| {
                    let local = s.local(p, 2)?;
                    let gc = canonical_coefficients(&local)?;
                    let ga = alt.christoffels_at(&local)?;
                    let shift = gc.max_value_diff(&ga);
                    let can = AssociatedBracket::new(local.clone(), gc, Some(sign));
                    let other = AssociatedBracket::new(local, ga, Some(sign));
                    let (mut same, mut dorf): (f64, f64) = (0.0, 0.0);
                    for (x, y) in xs.iter().zip(&ys) {
                        let (xe, ye) = (x.eval(p, 2)?, y.eval(p, 2)?);
                        same = same.max(can.bracket(&xe, &ye)?.max_value_diff(&other.bracket(&xe, &ye)?));
                        dorf = dorf.max(leafwise_mismatch(&can, sign, &xe, &ye)?);
                        dorf = dorf.max(leafwise_mismatch(&other, sign, &xe, &ye)?);
                    }
                    Ok((same, dorf, shift))
                })
                .collect::<Result<Vec<_>>>();
            let per_point = lib(per_point)?;
            let same = per_point.iter().map(|r| r.0).fold(0.0, f64::max);
            let dorf = per_point.iter().map(|r| r.1).fold(0.0, f64::max);
            let shift = per_point.iter().map(|r| r.2).fold(0.0, f64::max);
            let good = adapted.adapted() && shift > 1e-3 && same < 1e-9 && dorf < 1e-9;
            ok &= good;
            details.push(format!(
                "{name} {}: canonical vs alternative {same:.1e}, vs Dorfman {dorf:.1e} (connections differ by {shift:.2})",
                sign.symbol()
            ));
        }
    }
    check(ok, details.join("; "))
}

// 3 ---------------------------------------------------------------------

fn converse_witnesses() -> Verdict {
    let n = 3;
    let dim = 2 * n;
    let m = lib(FlatModel::new(n))?;
    let s = m.structure();
    let pts = lib(m.sample(8, 31))?;
    let t = |i: usize| n + i;
    // Each shift breaks exactly one condition on the + side.
    let shifts: [(usize, Vec<f64>); 4] = [
        // (1) rescales T₋ along x₊: ∇η ≠ 0
        (1, shift_entries(dim, &[(t(0), 0, t(0), 1.0), (t(1), 0, t(1), 1.0)])),
        // (2) ∇_{x₊} y₋ acquires a T₊ part, η-skew so ∇η = 0 survives
        (2, shift_entries(dim, &[(1, 0, t(0), 1.0), (0, 0, t(1), -1.0)])),
        // (3) torsion in T₊ with the compensating T₋ part
        (3, shift_entries(dim, &[(0, 0, 1, 1.0), (0, 1, 0, -1.0), (t(1), 0, t(0), -1.0), (t(0), 1, t(0), 1.0)])),
        // (4) totally antisymmetric T₋-valued shift on T₊ × T₊
        (4, {
            let mut e = Vec::new();
            for (i, j, k, sgn) in [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0), (1, 0, 2, -1.0), (2, 1, 0, -1.0), (0, 2, 1, -1.0)] {
                e.push((t(k), i, j, sgn));
            }
            shift_entries(dim, &e)
        }),
    ];
    let names = ["η(⟦x₊,y₋⟧₊,z₊)", "η(⟦x₊,y₋⟧₊,z₋)", "η(⟦x₊,y₊⟧₊,z₋)", "η(⟦x₊,y₊⟧₊,z₊)"];
    // (sign of x, sign of y, sign of z) for the component named in each case
    let types = [
        [Sign::Plus, Sign::Minus, Sign::Plus],
        [Sign::Plus, Sign::Minus, Sign::Minus],
        [Sign::Plus, Sign::Plus, Sign::Minus],
        [Sign::Plus, Sign::Plus, Sign::Plus],
    ];
    let fx = fields(32, 0, 6, dim, None);
    let fy = fields(33, 0, 6, dim, None);
    let fz = fields(34, 0, 6, dim, None);
    let mut ok = true;
    let mut details = Vec::new();
    for (cond, entries) in shifts {
        let shift = lib(TensorField::constant(dim, 1, 2, &entries))?;
        let conn = lib(Connection::canonical(s).shifted(shift))?;
        let report = lib(check_adapted(&conn, s, Side::P, &pts, 20, 35, 1e-9))?;
        let side = report.side(Sign::Plus).expect("plus side checked");
        let violated: Vec<usize> = side
            .conditions
            .iter()
            .enumerate()
            .filter(|(_, c)| c.max > 1e-9)
            .map(|(i, _)| i + 1)
            .collect();
        let per_point = pts
            .par_iter()
            .map(|p| {
                let local = s.local(p, 2)?;
                let br = AssociatedBracket::new(local.clone(), conn.christoffels_at(&local)?, Some(Sign::Plus));
                let mut named = [0.0f64; 4];
                for ((x, y), z) in fx.iter().zip(&fy).zip(&fz) {
                    for (c, ty) in types.iter().enumerate() {
                        let xe = local.project(ty[0], &x.eval(p, 2)?)?;
                        let ye = local.project(ty[1], &y.eval(p, 2)?)?;
                        let ze = local.project(ty[2], &z.eval(p, 2)?)?;
                        let ours = local.metric(&br.bracket(&xe, &ye)?, &ze)?.value();
                        let dorf = dorfman_contracted(&local, Sign::Plus, &xe, &ye, &ze)?.value();
                        named[c] = named[c].max((ours - dorf).abs());
                    }
                }
                Ok(named)
            })
            .collect::<Result<Vec<_>>>();
        let mut named = [0.0f64; 4];
        for r in lib(per_point)? {
            for c in 0..4 {
                named[c] = named[c].max(r[c]);
            }
        }
        let good = violated == vec![cond] && named[cond - 1] > 1e-4;
        ok &= good;
        details.push(format!(
            "({cond}) violates {violated:?}, {} mismatch {:.2e}",
            names[cond - 1],
            named[cond - 1]
        ));
    }
    check(ok, details.join("; "))
}

// 4 ---------------------------------------------------------------------

fn courant_axioms() -> Verdict {
    let f2 = lib(FlatModel::new(2))?;
    let tm = lib(polar_tm())?;
    let sphere = lib(TangentBundleModel::sphere())?;
    let cases: Vec<(&str, ParaHermitianStructure, Vec<Point>, Vec<Sign>)> = vec![
        ("flat", f2.structure().clone(), lib(f2.sample(10, 41))?, vec![Sign::Plus, Sign::Minus]),
        ("flat-g TM", tm.structure().clone(), lib(tm.sample(10, 42))?, vec![Sign::Plus, Sign::Minus]),
        ("sphere TM", sphere.structure().clone(), lib(sphere.sample(10, 43))?, vec![Sign::Minus]),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (name, s, pts, signs) in cases {
        let triples: Vec<[TensorField; 3]> = {
            let f = fields(44, 0, 15, s.dim(), None);
            f.chunks(3).map(|c| [c[0].clone(), c[1].clone(), c[2].clone()]).collect()
        };
        for sign in signs {
            let s2 = s.clone();
            let r = lib(courant_axiom_suite(&pts, 3, &triples, 44, move |p, order| {
                Ok(Box::new(AssociatedBracket::projected_canonical(s2.local(p, order)?, sign)?) as Box<dyn PointBracket>)
            }))?;
            let worst = r.axiom1.unwrap_or(0.0).max(r.axiom2.unwrap_or(0.0)).max(r.axiom3);
            ok &= worst < 1e-9;
            details.push(format!("{name} {}: {worst:.1e}", sign.symbol()));
        }
    }
    let s = f2.structure().clone();
    let pts = lib(f2.sample(10, 45))?;
    let triples: Vec<[TensorField; 3]> = {
        let f = fields(46, 0, 15, 4, None);
        f.chunks(3).map(|c| [c[0].clone(), c[1].clone(), c[2].clone()]).collect()
    };
    let r = lib(courant_axiom_suite(&pts, 3, &triples, 46, move |p, order| {
        Ok(Box::new(AssociatedBracket::d_bracket(s.local(p, order)?)?) as Box<dyn PointBracket>)
    }))?;
    let a12 = r.axiom1.unwrap_or(f64::INFINITY).max(r.axiom2.unwrap_or(f64::INFINITY));
    let witness = r.witnesses.iter().find(|w| w.axiom == 3);
    let d_ok = a12 < 1e-9 && r.axiom3 > 1e-4 && witness.is_some();
    ok &= d_ok;
    details.push(format!(
        "D-bracket: axioms 1-2 {a12:.1e}, Jacobi defect {:.2e} witnessed at point {:?}",
        r.axiom3,
        witness.map(|w| w.point_index)
    ));
    check(ok, details.join("; "))
}

// 5 ---------------------------------------------------------------------

fn section_condition() -> Verdict {
    let n = 2;
    let m = lib(FlatModel::new(n))?;
    let pts = lib(m.sample(50, 51))?;
    let vars: Vec<usize> = (0..n).collect();
    let f = fields(52, 0, 9, 2 * n, Some(&vars));
    let r = pts
        .par_iter()
        .map(|p| {
            let local = m.structure().local(p, 3)?;
            let minus = AssociatedBracket::projected_canonical(local.clone(), Sign::Minus)?;
            let d = AssociatedBracket::d_bracket(local)?;
            let ev: Vec<EvaluatedTensor> = f.iter().map(|x| x.eval(p, 3)).collect::<Result<_>>()?;
            let (mut minus_max, mut jac): (f64, f64) = (0.0, 0.0);
            for x in &ev {
                for y in &ev {
                    minus_max = minus_max.max(minus.bracket(x, y)?.max_abs_value());
                }
            }
            for c in ev.chunks(3) {
                jac = jac.max(jacobi_defect(&d, &c[0], &c[1], &c[2])?.max_abs_value());
            }
            Ok((minus_max, jac))
        })
        .collect::<Result<Vec<_>>>();
    let r = lib(r)?;
    let minus = r.iter().map(|v| v.0).fold(0.0, f64::max);
    let jac = r.iter().map(|v| v.1).fold(0.0, f64::max);
    check(
        minus < 1e-9 && jac < 1e-9,
        format!("50 points: max |⟦,⟧₋| {minus:.1e}, D-bracket Jacobi defect {jac:.1e}"),
    )
}

// 6 ---------------------------------------------------------------------

/// `b` on flat `R^{2n}` with the listed `T₊ × T₊` components.
fn flat_b(m: &FlatModel, comps: &[(usize, usize, Expr)]) -> Result<TensorField> {
    let dim = 2 * m.n();
    let mut e = vec![Expr::zero(); dim * dim];
    for (i, j, c) in comps {
        e[i * dim + j] = c.clone();
        e[j * dim + i] = -c.clone();
    }
    TensorField::from_exprs(dim, 0, 2, e)
}

fn random_flat_b(m: &FlatModel, seed: u64) -> Result<TensorField> {
    let mut rng = stream(seed, 0);
    let vars: Vec<usize> = (0..2 * m.n()).collect();
    let mut comps = Vec::new();
    for i in 0..m.n() {
        for j in i + 1..m.n() {
            comps.push((i, j, random_polynomial(&mut rng, &vars, 2)));
        }
    }
    flat_b(m, &comps)
}

fn maurer_cartan_sides() -> Verdict {
    let mut details = Vec::new();
    let mut ok = true;
    for n in [2usize, 3] {
        let m = lib(FlatModel::new(n))?;
        let pts = lib(m.sample(10, 61 + n as u64))?;
        let f = fields(62, n as u64, 15, 2 * n, None);
        let mut agree: f64 = 0.0;
        let mut size: f64 = 0.0;
        for k in 0..10 {
            let t = lib(BTransformation::b_transform(m.structure(), lib(random_flat_b(&m, 600 + k))?, &pts))?;
            let r = pts
                .par_iter()
                .map(|p| {
                    let mut a: f64 = 0.0;
                    let mut s: f64 = 0.0;
                    for c in f.chunks(3) {
                        let v = maurer_cartan(&t, &c[0], &c[1], &c[2], p, 2)?;
                        a = a.max(v.agreement());
                        s = s.max(v.bracket_side.abs());
                    }
                    Ok((a, s))
                })
                .collect::<Result<Vec<_>>>();
            for (a, s) in lib(r)? {
                agree = agree.max(a);
                size = size.max(s);
            }
        }
        ok &= agree < 1e-9;
        details.push(format!("n={n}: 10 random b, sides agree to {agree:.1e} (largest side {size:.2})"));
    }
    let m = lib(FlatModel::new(2))?;
    let pts = lib(m.sample(10, 64))?;
    let t = lib(BTransformation::b_transform(
        m.structure(),
        lib(flat_b(&m, &[(0, 1, Expr::float(0.7))]))?,
        &pts,
    ))?;
    let f = fields(65, 0, 3, 4, None);
    let mut exact = true;
    let mut bracket: f64 = 0.0;
    for p in &pts {
        let v = lib(maurer_cartan(&t, &f[0], &f[1], &f[2], p, 2))?;
        exact &= v.residual() == 0.0;
        bracket = bracket.max(v.bracket_side.abs());
    }
    ok &= exact && bracket < 1e-9;
    details.push(format!(
        "constant b: residual exactly zero = {exact}, D-bracket side {bracket:.1e}"
    ));
    check(ok, details.join("; "))
}

// 7 ---------------------------------------------------------------------

fn twisted_bracket() -> Verdict {
    let mut details = Vec::new();
    let mut ok = true;
    let mut cases: Vec<(String, BTransformation, Vec<Point>)> = Vec::new();
    for n in [2usize, 3] {
        let m = lib(FlatModel::new(n))?;
        let pts = lib(m.sample(10, 71 + n as u64))?;
        let t = lib(BTransformation::b_transform(m.structure(), lib(random_flat_b(&m, 700 + n as u64))?, &pts))?;
        cases.push((format!("flat n={n}"), t, pts));
    }
    let tm = lib(polar_tm())?;
    let pts = lib(tm.sample(10, 74))?;
    let t = lib(tm.b_field(&["0", "r*v2 + t*v1^2", "-(r*v2 + t*v1^2)", "0"], &pts))?;
    cases.push(("flat-g TM".into(), t, pts));
    for (name, t, pts) in cases {
        let dim = t.base().dim();
        let f = fields(75, dim as u64, 10, dim, None);
        let r = pts
            .par_iter()
            .map(|p| {
                let mut w: f64 = 0.0;
                for c in f.chunks(2) {
                    w = w.max(twisted_d_bracket(&t, &c[0], &c[1], p, 2)?.mismatch());
                }
                Ok(w)
            })
            .collect::<Result<Vec<f64>>>();
        let w = lib(r)?.into_iter().fold(0.0, f64::max);
        ok &= w < 1e-9;
        details.push(format!("{name}: {w:.1e}"));
    }
    let sphere = lib(TangentBundleModel::sphere())?;
    let pts = lib(sphere.sample(3, 76))?;
    let b = ["0", "v1", "-v1", "0"];
    let refused = matches!(sphere.b_field(&b, &pts), Err(Error::NotParaKahler { .. }));
    let direct = lib(BTransformation::b_transform(sphere.structure(), lib(sphere.two_form(&b))?, &pts))?;
    let x = TensorField::coordinate_vector(4, 0);
    let y = TensorField::coordinate_vector(4, 1);
    let twisted_refused = matches!(twisted_d_bracket(&direct, &x, &y, &pts[0], 2), Err(Error::NotParaKahler { .. }));
    ok &= refused && twisted_refused;
    details.push(format!("sphere TM refused: {}", refused && twisted_refused));
    check(ok, details.join("; "))
}

// 8 ---------------------------------------------------------------------

fn flux_reassembly() -> Verdict {
    let mut ok = true;
    let mut details = Vec::new();
    let m = lib(FlatModel::new(3))?;
    let pts = lib(m.sample(5, 81))?;
    let (mut re, mut mixed, mut hc): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 0..10 {
        let t = lib(BTransformation::b_transform(m.structure(), lib(random_flat_b(&m, 800 + k))?, &pts))?;
        for p in &pts {
            let f = lib(extract_fluxes(&t, p))?;
            re = re.max(f.reassembly_residual);
            mixed = mixed.max(f.mixed_residual);
            hc = hc.max(f.h_cov_residual);
        }
    }
    ok &= re < 1e-10 && mixed < 1e-10 && hc < 1e-10;
    details.push(format!(
        "flat n=3: reassembly {re:.1e}, (+1,-2)/(+0,-3) parts {mixed:.1e}, H+R̃ vs db(e,e,e) {hc:.1e}"
    ));

    // Closed forms on TM with a constant flat metric.
    let n = 3;
    let g = [[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 1.5]];
    let g_src: Vec<String> = g.iter().flatten().map(|v| v.to_string()).collect();
    let g_refs: Vec<&str> = g_src.iter().map(String::as_str).collect();
    let tm = lib(TangentBundleModel::new(
        vec!["x1".into(), "x2".into(), "x3".into()],
        None,
        &g_refs,
    ))?;
    let ginv = invert3(&g);
    let pts = lib(tm.sample(20, 82))?;
    let mut rng = stream(83, 0);
    let vars: Vec<usize> = (0..2 * n).collect();
    let mut b = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let e = random_polynomial(&mut rng, &vars, 2);
            b[i][j] = e.clone();
            b[j][i] = -e;
        }
    }
    let names = tm.chart().coord_names().to_vec();
    let src: Vec<String> = (0..n * n).map(|k| b[k / n][k % n].display_with(&names).to_string()).collect();
    let refs: Vec<&str> = src.iter().map(String::as_str).collect();
    let t = lib(tm.b_field(&refs, &pts))?;
    let (mut dh, mut dq): (f64, f64) = (0.0, 0.0);
    for p in &pts {
        let f = lib(extract_fluxes(&t, p))?;
        let x = p.coords();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let pos = (i * n + j) * n + k;
                    let q = ev(&diff(&b[j][k], n + i), x);
                    dq = dq.max((f.q_tilde[pos] - q).abs());
                    let mut h = 0.0;
                    for (a, c, d) in [(i, j, k), (j, k, i), (k, i, j)] {
                        h += ev(&diff(&b[c][d], a), x);
                        for l in 0..n {
                            for mm in 0..n {
                                h += ev(&b[a][l], x) * ginv[l][mm] * ev(&diff(&b[c][d], n + mm), x);
                            }
                        }
                    }
                    dh = dh.max((f.h_cov[pos] - h).abs());
                }
            }
        }
    }
    ok &= dh < 1e-9 && dq < 1e-9;
    details.push(format!("TM closed forms at 20 points: ℋ {dh:.1e}, Q {dq:.1e}"));
    check(ok, details.join("; "))
}

fn invert3(g: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (g[r0][c0] * g[r1][c1] - g[r0][c1] * g[r1][c0]) / det;
        }
    }
    inv
}

// 9 ---------------------------------------------------------------------

fn curvature_obstruction() -> Verdict {
    let m = lib(TangentBundleModel::sphere())?;
    let pts = lib(m.sample(20, 91))?;
    let r = pts
        .par_iter()
        .map(|p| {
            let x = p.coords();
            let (theta, v) = (x[0], [x[2], x[3]]);
            let mut w: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let hi = m.horizontal(i).eval(p, 1)?;
                    let hj = m.horizontal(j).eval(p, 1)?;
                    let br = lie_bracket(&hi, &hj)?;
                    for a in 0..2 {
                        w = w.max(br.value(&[a]).abs());
                    }
                    for k in 0..2 {
                        let oracle: f64 = -(0..2).map(|l| sphere_riemann(theta, k, l, i, j) * v[l]).sum::<f64>();
                        w = w.max((br.value(&[2 + k]) - oracle).abs());
                    }
                }
            }
            let local = m.structure().local(p, 1)?;
            let d_omega = parahermitian::geometry::exterior_derivative(local.omega())?;
            let lhs = bigraded_part(&local, &d_omega, 3)?;
            let rhs = cyclic_sum(&n_sign(&local, Sign::Plus)?);
            let cyclic = lhs.max_value_diff(&rhs);
            let n_plus = n_sign(&local, Sign::Plus)?.max_abs_value();
            Ok((w, cyclic, n_plus))
        })
        .collect::<Result<Vec<_>>>();
    let r = lib(r)?;
    let w = r.iter().map(|v| v.0).fold(0.0, f64::max);
    let cyclic = r.iter().map(|v| v.1).fold(0.0, f64::max);
    let n_plus = r.iter().map(|v| v.2).fold(0.0, f64::max);
    check(
        w < 1e-8 && cyclic < 1e-9 && n_plus > 1e-3,
        format!("20 points: [H_i,H_j] vs curvature {w:.1e}; dω(+3,-0) vs cyclic N₊ {cyclic:.1e} (max |N₊| {n_plus:.2})"),
    )
}

// 10 --------------------------------------------------------------------

fn numerical_hygiene() -> Verdict {
    let mut rng = stream(101, 0);
    let dim = 4;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for _ in 0..1000 {
        let e = random_smooth_expr(&mut rng, dim, 4);
        let x: Vec<f64> = (0..dim).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let jet = lib(eval_jet(&e, &x, 1))?;
        let grad = jet.gradient().expect("order-1 jet has a gradient");
        for i in 0..dim {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (lib(e.eval_f64(&xp))? - lib(e.eval_f64(&xm))?) / (2.0 * h);
            worst = worst.max((grad[i] - fd).abs() / grad[i].abs().max(1.0));
        }
        checked += 1;
    }
    let jets_ok = worst < 1e-6;

    let spec = concat!(env!("CARGO_MANIFEST_DIR"), "/specs/flat.toml");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let hash = |name: &str| -> std::result::Result<String, String> {
        let out = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_parahermitian"))
            .arg(spec)
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?
            .status;
        if !status.success() {
            return Err(format!("CLI exited with {status}"));
        }
        let text = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        Ok(v["determinism_hash"].as_str().unwrap_or_default().to_string())
    };
    let (a, b) = (hash("a.json")?, hash("b.json")?);
    let stable = !a.is_empty() && a == b;
    check(
        jets_ok && stable,
        format!("{checked} expressions: worst relative gradient error {worst:.1e}; CLI hash stable = {stable}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("flat D-bracket oracle", flat_oracle),
        ("projected bracket forward direction", forward_direction),
        ("converse witnesses", converse_witnesses),
        ("Courant axioms", courant_axioms),
        ("section condition", section_condition),
        ("Maurer-Cartan sides", maurer_cartan_sides),
        ("twisted D-bracket", twisted_bracket),
        ("flux reassembly", flux_reassembly),
        ("curvature obstruction", curvature_obstruction),
        ("numerical hygiene", numerical_hygiene),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(d) => println!("PASS {:>2} {name} ({secs:.1}s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
