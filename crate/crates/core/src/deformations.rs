//! B-transformations, the Maurer-Cartan residual, the twisted D-bracket and
//! flux extraction.
//!
//! A transformation on the `+` side is given by a two-form `b` with
//! `b(P₋·,·) = 0`. It defines `B^k_i = η^{kl} b_{il}`, so `η(BX,Y) = b(X,Y)`,
//! and `K_B = K + 2B`. On the `−` side the roles of `T±` swap and
//! `K_B = K − 2B`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::brackets::{d_bracket_local, schouten_eval};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::tensor::invert_jet_matrix;
use crate::geometry::{
    eval_form, exterior_derivative, lie_bracket, metric_inverse, multi_indices, EvaluatedTensor, Point,
    TensorField, SINGULAR_DET,
};
use crate::jet::Jet;
use crate::parastructure::{
    classification_residuals, project_slots, validate_structure, LocalStructure, ParaHermitianStructure, Sign,
    CLASSIFICATION_TOL, VALIDATION_TOL,
};

/// Tolerance for the type and antisymmetry preconditions on `b`.
pub const TYPE_TOL: f64 = 1e-10;
/// Threshold on the scale-normalized Maurer-Cartan residual.
pub const COMPATIBILITY_TOL: f64 = 1e-9;

/// `B^k_i = η^{kl} b_{il}`.
fn b_map(eta_inv: &EvaluatedTensor, b: &EvaluatedTensor) -> EvaluatedTensor {
    let n = b.dim();
    let order = eta_inv.order().min(b.order());
    EvaluatedTensor::from_fn(n, 1, 1, |idx| {
        let mut acc = Jet::zero(n, order);
        for l in 0..n {
            acc.add_product(1.0, eta_inv.get(&[idx[0], l]), b.get(&[idx[1], l]));
        }
        acc
    })
}

fn transformed_k(eta: &TensorField, k: &TensorField, b: &TensorField, side: Sign) -> TensorField {
    let (eta, k, b) = (eta.clone(), k.clone(), b.clone());
    let dim = eta.dim();
    TensorField::procedure(
        dim,
        1,
        1,
        Arc::new(move |p: &Point, order: usize| {
            let inv = metric_inverse(&eta.eval(p, order)?)?;
            let map = b_map(&inv, &b.eval(p, order)?);
            k.eval(p, order)?.try_add(&map.scale(2.0 * side.factor()))
        }),
    )
}

/// A B-transformation of a para-Hermitian structure on one side.
#[derive(Debug, Clone)]
pub struct BTransformation {
    base: ParaHermitianStructure,
    b: TensorField,
    side: Sign,
    transformed: ParaHermitianStructure,
}

/// Residuals of the defining properties of a transformation at a sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BInvariants {
    /// `|K_B² − 1|`.
    pub k_squared: f64,
    /// `|η(K_B·, K_B·) + η|`.
    pub anti_isometry: f64,
    /// `|P_side ∘ P^B_opposite|`: the opposite eigenbundle is shared.
    pub shared_eigenbundle: f64,
    /// `|ω_B − ω − 2 side b|`.
    pub omega_shift: f64,
}

impl BInvariants {
    pub fn max(&self) -> f64 {
        self.k_squared
            .max(self.anti_isometry)
            .max(self.shared_eigenbundle)
            .max(self.omega_shift)
    }
}

impl BTransformation {
    /// `e^B` with `B: T₊ → T₋` from a type `(+2,−0)` two-form.
    pub fn b_transform(base: &ParaHermitianStructure, b: TensorField, sample: &[Point]) -> Result<BTransformation> {
        BTransformation::new(base, b, Sign::Plus, sample)
    }

    /// `e^{B₋}` with `B₋: T₋ → T₊` from a type `(+0,−2)` two-form.
    pub fn b_minus_transform(base: &ParaHermitianStructure, beta: TensorField, sample: &[Point]) -> Result<BTransformation> {
        BTransformation::new(base, beta, Sign::Minus, sample)
    }

    fn new(base: &ParaHermitianStructure, b: TensorField, side: Sign, sample: &[Point]) -> Result<BTransformation> {
        b.expect_rank(0, 2)?;
        if b.dim() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: b.dim(),
            });
        }
        for p in sample {
            let local = base.local(p, 0)?;
            let bv = b.eval(p, 0)?;
            let residual = bv.antisymmetry_residual();
            if residual > TYPE_TOL {
                return Err(Error::NotAntisymmetric { residual });
            }
            let o = side.opposite();
            let mixed = project_slots(&local, &bv, &[side, o])?.max_abs_value();
            let pure = project_slots(&local, &bv, &[o, o])?.max_abs_value();
            if mixed > TYPE_TOL || pure > TYPE_TOL {
                let (pp, mm) = if side == Sign::Plus { (2, 0) } else { (0, 2) };
                return Err(Error::WrongType(format!(
                    "expected type (+{pp},-{mm}); (+1,-1) part {mixed:.3e}, opposite pure part {pure:.3e}"
                )));
            }
        }
        let transformed = base.with_k(transformed_k(base.eta(), base.k(), &b, side))?;
        let t = BTransformation {
            base: base.clone(),
            b,
            side,
            transformed,
        };
        if !sample.is_empty() {
            let v = validate_structure(&t.transformed, sample, VALIDATION_TOL)?;
            if !v.passed {
                return Err(Error::InvalidStructure(format!(
                    "transformed structure fails validation (residual {:.3e})",
                    v.max_residual()
                )));
            }
        }
        Ok(t)
    }

    /// Two transformations on the same side compose by adding their forms;
    /// mixing sides is not supported.
    pub fn compose(&self, other: &BTransformation, sample: &[Point]) -> Result<BTransformation> {
        if self.side != other.side {
            return Err(Error::Unsupported(
                "simultaneous B-transformations on both sides".into(),
            ));
        }
        let dim = self.b.dim();
        let (a, c) = (self.b.clone(), other.b.clone());
        let sum = TensorField::procedure(
            dim,
            0,
            2,
            Arc::new(move |p: &Point, order: usize| a.eval(p, order)?.try_add(&c.eval(p, order)?)),
        );
        BTransformation::new(&self.base, sum, self.side, sample)
    }

    pub fn base(&self) -> &ParaHermitianStructure {
        &self.base
    }

    /// The structure `(η, K_B)`.
    pub fn transformed(&self) -> &ParaHermitianStructure {
        &self.transformed
    }

    pub fn b(&self) -> &TensorField {
        &self.b
    }

    pub fn side(&self) -> Sign {
        self.side
    }

    pub fn local(&self, p: &Point, order: usize) -> Result<LocalBTransformation> {
        let base = self.base.local(p, order)?;
        let transformed = self.transformed.local(p, order)?;
        let b = self.b.eval(p, order + 1)?;
        let map = b_map(base.eta_inv(), &b);
        Ok(LocalBTransformation {
            base,
            transformed,
            b,
            map,
            side: self.side,
        })
    }

    /// Checks the defining properties at `p`, on values.
    pub fn invariants(&self, p: &Point) -> Result<BInvariants> {
        let lt = self.local(p, 0)?;
        let n = p.dim();
        let kb = lt.transformed.k();
        let eta = lt.base.eta();
        let mut out = BInvariants::default();
        let val = |t: &EvaluatedTensor, i: usize, j: usize| t.value(&[i, j]);
        let shared = lt.base.projector(self.side);
        let other = lt.transformed.projector(self.side.opposite());
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                let sq: f64 = (0..n).map(|m| val(kb, i, m) * val(kb, m, j)).sum();
                out.k_squared = out.k_squared.max((sq - delta).abs());
                let iso: f64 = (0..n)
                    .flat_map(|a| (0..n).map(move |c| (a, c)))
                    .map(|(a, c)| val(kb, a, i) * val(kb, c, j) * val(eta, a, c))
                    .sum();
                out.anti_isometry = out.anti_isometry.max((iso + val(eta, i, j)).abs());
                let pp: f64 = (0..n).map(|m| val(shared, i, m) * val(other, m, j)).sum();
                out.shared_eigenbundle = out.shared_eigenbundle.max(pp.abs());
                let shift = val(lt.transformed.omega(), i, j)
                    - val(lt.base.omega(), i, j)
                    - 2.0 * self.side.factor() * val(&lt.b, i, j);
                out.omega_shift = out.omega_shift.max(shift.abs());
            }
        }
        Ok(out)
    }
}

/// A transformation evaluated at one point for fields of a given order.
#[derive(Debug, Clone)]
pub struct LocalBTransformation {
    base: LocalStructure,
    transformed: LocalStructure,
    b: EvaluatedTensor,
    map: EvaluatedTensor,
    side: Sign,
}

impl LocalBTransformation {
    pub fn base(&self) -> &LocalStructure {
        &self.base
    }

    pub fn transformed(&self) -> &LocalStructure {
        &self.transformed
    }

    /// `b` one order above the field order.
    pub fn b(&self) -> &EvaluatedTensor {
        &self.b
    }

    /// `B^k_i`.
    pub fn map(&self) -> &EvaluatedTensor {
        &self.map
    }

    /// `e^B = 1 + B`.
    pub fn exp_b(&self) -> EvaluatedTensor {
        let n = self.map.dim();
        EvaluatedTensor::from_fn(n, 1, 1, |idx| {
            self.map.get(idx).add_scalar(if idx[0] == idx[1] { 1.0 } else { 0.0 })
        })
    }

    /// The bivector `b^{ij} = η^{ia} η^{jb} b_{ab}`.
    pub fn bivector(&self) -> EvaluatedTensor {
        let inv = self.base.eta_inv();
        let n = self.b.dim();
        let order = inv.order().min(self.b.order());
        EvaluatedTensor::from_fn(n, 2, 0, |idx| {
            let mut acc = Jet::zero(n, order);
            for a in 0..n {
                for c in 0..n {
                    let w = inv.get(&[idx[0], a]) * inv.get(&[idx[1], c]);
                    acc.add_product(1.0, &w, self.b.get(&[a, c]));
                }
            }
            acc
        })
    }

    pub fn db(&self) -> Result<EvaluatedTensor> {
        exterior_derivative(&self.b)
    }
}

/// Both sides of the Maurer-Cartan identity for one triple.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MaurerCartanValue {
    /// `η(⟦P^B X, P^B Y⟧^D, P^B Z)`.
    pub bracket_side: f64,
    /// `db(PX, PY, PZ)`.
    pub differential: f64,
    /// `[b,b](ηPX, ηPY, ηPZ)`.
    pub schouten: f64,
}

impl MaurerCartanValue {
    /// The Maurer–Cartan expression `d₊b + [b,b]₋` on the given fields.
    pub fn residual(&self) -> f64 {
        self.differential + self.schouten
    }

    pub fn agreement(&self) -> f64 {
        (self.bracket_side - self.differential - self.schouten).abs()
    }
}

/// Evaluates both sides for fields at the structure's field order, which
/// must be at least 1.
pub fn maurer_cartan_local(
    lt: &LocalBTransformation,
    x: &EvaluatedTensor,
    y: &EvaluatedTensor,
    z: &EvaluatedTensor,
) -> Result<MaurerCartanValue> {
    let s = lt.side;
    let t = &lt.transformed;
    let (xb, yb, zb) = (t.project(s, x)?, t.project(s, y)?, t.project(s, z)?);
    let bracket = d_bracket_local(&lt.base, &xb, &yb)?;
    let bracket_side = lt.base.metric(&bracket, &zb)?.value();

    let base = &lt.base;
    let (xp, yp, zp) = (base.project(s, x)?, base.project(s, y)?, base.project(s, z)?);
    let db = lt.db()?;
    let differential = eval_form(&db, &[&xp, &yp, &zp])?.value();
    let lc = base.levi_civita()?;
    let schouten = schouten_eval(&lt.bivector(), &lc, &base.flat(&xp)?, &base.flat(&yp)?, &base.flat(&zp)?)?.value();
    Ok(MaurerCartanValue {
        bracket_side,
        differential,
        schouten,
    })
}

pub fn maurer_cartan(
    t: &BTransformation,
    x: &TensorField,
    y: &TensorField,
    z: &TensorField,
    p: &Point,
    order: usize,
) -> Result<MaurerCartanValue> {
    let order = order.max(1);
    let lt = t.local(p, order)?;
    maurer_cartan_local(&lt, &x.eval(p, order)?, &y.eval(p, order)?, &z.eval(p, order)?)
}

/// The Maurer-Cartan form on coordinate vectors: `[a, b, c]` holds both
/// sides for `X = ∂_a, Y = ∂_b, Z = ∂_c`.
pub fn maurer_cartan_tensor(lt: &LocalBTransformation) -> Result<(EvaluatedTensor, EvaluatedTensor)> {
    let n = lt.base.dim();
    let s = lt.side;
    let basis: Vec<EvaluatedTensor> = (0..n).map(|i| lt.transformed.projected_basis(s, i)).collect();
    let mut brackets = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            brackets.push(d_bracket_local(&lt.base, &basis[a], &basis[b])?);
        }
    }
    let lhs = EvaluatedTensor::try_from_fn(n, 0, 3, |idx| {
        Ok(Jet::constant(n, 0, lt.base.metric(&brackets[idx[0] * n + idx[1]], &basis[idx[2]])?.value()))
    })?;

    let base = &lt.base;
    let plain: Vec<EvaluatedTensor> = (0..n).map(|i| base.projected_basis(s, i)).collect();
    let flats = plain.iter().map(|v| base.flat(v)).collect::<Result<Vec<_>>>()?;
    let db = lt.db()?;
    let lc = base.levi_civita()?;
    let bivector = lt.bivector();
    let rhs = EvaluatedTensor::try_from_fn(n, 0, 3, |idx| {
        let (a, b, c) = (idx[0], idx[1], idx[2]);
        let d = eval_form(&db, &[&plain[a], &plain[b], &plain[c]])?.value();
        let sch = schouten_eval(&bivector, &lc, &flats[a], &flats[b], &flats[c])?.value();
        Ok(Jet::constant(n, 0, d + sch))
    })?;
    Ok((lhs, rhs))
}

/// Compatibility of `K_B` with `K` over a sample.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub points: usize,
    pub tolerance: f64,
    /// Largest scale-normalized component of the bracket side.
    pub max_residual: f64,
    /// Largest disagreement between the bracket side and `db + [b,b]`.
    pub max_disagreement: f64,
    pub worst_point: Option<usize>,
    pub compatible: bool,
}

pub fn compatibility(t: &BTransformation, sample: &[Point], order: usize, tol: f64) -> Result<CompatibilityReport> {
    let order = order.max(1);
    let per_point = sample
        .par_iter()
        .map(|p| {
            let lt = t.local(p, order)?;
            let (lhs, rhs) = maurer_cartan_tensor(&lt)?;
            let scale = lt.base.scale().max(f64::MIN_POSITIVE);
            Ok((lhs.max_abs_value() / scale, lhs.max_value_diff(&rhs)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = CompatibilityReport {
        points: sample.len(),
        tolerance: tol,
        ..Default::default()
    };
    for (i, (r, d)) in per_point.into_iter().enumerate() {
        if r > report.max_residual {
            report.max_residual = r;
            report.worst_point = Some(i);
        }
        report.max_disagreement = report.max_disagreement.max(d);
    }
    report.compatible = report.max_residual <= tol && report.max_disagreement <= tol;
    Ok(report)
}

fn require_para_kahler(local: &LocalStructure) -> Result<()> {
    let r = classification_residuals(local)?;
    let residual = r.n_plus.max(r.n_minus).max(r.d_omega);
    if residual > CLASSIFICATION_TOL {
        return Err(Error::NotParaKahler { residual });
    }
    Ok(())
}

fn require_plus(t: &LocalBTransformation, what: &str) -> Result<()> {
    if t.side != Sign::Plus {
        return Err(Error::Unsupported(format!("{what} is defined for B-transformations on the + side")));
    }
    Ok(())
}

/// The D-bracket of `(η, K_B)` computed two ways.
#[derive(Debug, Clone)]
pub struct TwistedComparison {
    /// Via the canonical connection of `K_B`.
    pub transformed: EvaluatedTensor,
    /// `⟦X,Y⟧^D − η⁻¹ db(X,Y,·)` with the base D-bracket.
    pub twisted: EvaluatedTensor,
}

impl TwistedComparison {
    pub fn mismatch(&self) -> f64 {
        self.transformed.max_value_diff(&self.twisted)
    }
}

pub fn twisted_d_bracket_local(
    lt: &LocalBTransformation,
    x: &EvaluatedTensor,
    y: &EvaluatedTensor,
) -> Result<TwistedComparison> {
    require_plus(lt, "the twisted D-bracket")?;
    require_para_kahler(&lt.base)?;
    let transformed = d_bracket_local(&lt.transformed, x, y)?;
    let base = d_bracket_local(&lt.base, x, y)?;
    let db = lt.db()?;
    let n = x.dim();
    let order = base.order();
    let covector = EvaluatedTensor::from_fn(n, 0, 1, |idx| {
        let mut acc = Jet::zero(n, order);
        for i in 0..n {
            for j in 0..n {
                let w = x.get(&[i]) * y.get(&[j]);
                acc.add_product(1.0, &w, db.get(&[i, j, idx[0]]));
            }
        }
        acc
    });
    let twisted = base.try_sub(&lt.base.sharp(&covector)?)?;
    Ok(TwistedComparison { transformed, twisted })
}

/// Requires a para-Kähler base at `p` and `order >= 1`.
pub fn twisted_d_bracket(
    t: &BTransformation,
    x: &TensorField,
    y: &TensorField,
    p: &Point,
    order: usize,
) -> Result<TwistedComparison> {
    let order = order.max(1);
    let lt = t.local(p, order)?;
    twisted_d_bracket_local(&lt, &x.eval(p, order)?, &y.eval(p, order)?)
}

/// Flux components at a point.
///
/// Frame indices: `e_i = P^B₊∂_i` for `i < n` and `ẽ^j = P^B₋∂_{n+j}`. Arrays
/// of rank 3 are row-major; `q_tilde[i][j][k] = db(ẽ^i, e_j, e_k)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FluxReport {
    pub n: usize,
    pub point: Vec<f64>,
    /// `db(P₊∂_i, P₊∂_j, P₊∂_k)`.
    pub h: Vec<f64>,
    /// `[b,b](ηP₊∂_i, ηP₊∂_j, ηP₊∂_k)`.
    pub r_tilde: Vec<f64>,
    /// `H + R̃`, the covariantized H-flux.
    pub h_cov: Vec<f64>,
    pub q_tilde: Vec<f64>,
    /// `db` in the coordinate coframe, `(2n)^3` entries.
    pub db_coordinate: Vec<f64>,
    /// `db` on the `K_B`-adapted frame, `(2n)^3` entries.
    pub db_frame: Vec<f64>,
    /// `|db − (H + R̃ + Q̃ reassembled)|` in coordinates.
    pub reassembly_residual: f64,
    /// Largest `(+1,−2)_B` or `(+0,−3)_B` component of `db`.
    pub mixed_residual: f64,
    /// `|H + R̃ − db(e,e,e)|`.
    pub h_cov_residual: f64,
}

pub fn extract_fluxes(t: &BTransformation, p: &Point) -> Result<FluxReport> {
    let n = t.base.chart().require_split()?;
    let lt = t.local(p, 1)?;
    require_plus(&lt, "flux extraction")?;
    require_para_kahler(&lt.base)?;
    let dim = 2 * n;
    let base = &lt.base;
    let db = lt.db()?;
    let frame: Vec<EvaluatedTensor> = (0..dim)
        .map(|a| {
            let sign = if a < n { Sign::Plus } else { Sign::Minus };
            lt.transformed.projected_basis(sign, a).truncate(0)
        })
        .collect();
    let frame_values: Vec<Jet> = (0..dim * dim)
        .map(|k| frame[k % dim].get(&[k / dim]).clone())
        .collect();
    // coframe[a * dim + i] = θ^a_i, the inverse of the matrix whose columns are the frame
    let det = crate::geometry::tensor::det_values(&frame_values.iter().map(Jet::value).collect::<Vec<_>>(), dim);
    if det.abs() < SINGULAR_DET {
        return Err(Error::SingularFrame { det: det.abs() });
    }
    let coframe: Vec<f64> = invert_jet_matrix(&frame_values, dim)?.iter().map(Jet::value).collect();

    let form = |a: &EvaluatedTensor, b: &EvaluatedTensor, c: &EvaluatedTensor| -> Result<f64> {
        Ok(eval_form(&db, &[a, b, c])?.value())
    };
    let mut db_frame = vec![0.0; dim * dim * dim];
    for (pos, idx) in multi_indices(dim, 3).into_iter().enumerate() {
        db_frame[pos] = form(&frame[idx[0]], &frame[idx[1]], &frame[idx[2]])?;
    }
    let db_coordinate = db.values();

    let plain: Vec<EvaluatedTensor> = (0..n).map(|i| base.projected_basis(Sign::Plus, i)).collect();
    let flats = plain.iter().map(|v| base.flat(v)).collect::<Result<Vec<_>>>()?;
    let lc = base.levi_civita()?;
    let bivector = lt.bivector();
    let cube = n * n * n;
    let (mut h, mut r_tilde, mut h_cov, mut q_tilde) = (vec![0.0; cube], vec![0.0; cube], vec![0.0; cube], vec![0.0; cube]);
    let mut h_cov_residual: f64 = 0.0;
    for (pos, idx) in multi_indices(n, 3).into_iter().enumerate() {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        h[pos] = form(&plain[i], &plain[j], &plain[k])?;
        r_tilde[pos] = schouten_eval(&bivector, &lc, &flats[i], &flats[j], &flats[k])?.value();
        h_cov[pos] = h[pos] + r_tilde[pos];
        q_tilde[pos] = db_frame[((n + i) * dim + j) * dim + k];
        h_cov_residual = h_cov_residual.max((h_cov[pos] - db_frame[(i * dim + j) * dim + k]).abs());
    }

    // Reassemble db from ℋ and Q̃ alone.
    let frame_component = |a: usize, b: usize, c: usize| -> f64 {
        let tilde = [a, b, c].iter().filter(|&&x| x >= n).count();
        match tilde {
            0 => h_cov[(a * n + b) * n + c],
            1 => {
                // move the tilde index to the front
                let (sign, i, j, k) = if a >= n {
                    (1.0, a - n, b, c)
                } else if b >= n {
                    (-1.0, b - n, a, c)
                } else {
                    (1.0, c - n, a, b)
                };
                sign * q_tilde[(i * n + j) * n + k]
            }
            _ => 0.0,
        }
    };
    let mut mixed_residual: f64 = 0.0;
    for idx in multi_indices(dim, 3) {
        if idx.iter().filter(|&&x| x >= n).count() >= 2 {
            mixed_residual = mixed_residual.max(db_frame[(idx[0] * dim + idx[1]) * dim + idx[2]].abs());
        }
    }
    let mut components = vec![0.0; dim * dim * dim];
    for idx in multi_indices(dim, 3) {
        let f = frame_component(idx[0], idx[1], idx[2]);
        if f == 0.0 {
            continue;
        }
        for (pos, out) in multi_indices(dim, 3).into_iter().enumerate() {
            components[pos] += f
                * coframe[idx[0] * dim + out[0]]
                * coframe[idx[1] * dim + out[1]]
                * coframe[idx[2] * dim + out[2]];
        }
    }
    let reassembly_residual = components
        .iter()
        .zip(&db_coordinate)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    Ok(FluxReport {
        n,
        point: p.coords().to_vec(),
        h,
        r_tilde,
        h_cov,
        q_tilde,
        db_coordinate,
        db_frame,
        reassembly_residual,
        mixed_residual,
        h_cov_residual,
    })
}

/// Structure functions `f^c_{ab} = η(⟦e_a, e_b⟧^D, e^c)` of the frame
/// `e_a = A_a^i P₊∂_i` with dual `e^c = (A⁻¹)_j^c P₋∂_{n+j}`. `a` lists
/// `A_a^i` row-major as expressions in the chart coordinates. The result is
/// indexed `[c, a, b]`.
pub fn f_flux(s: &ParaHermitianStructure, a: &[Expr], p: &Point, order: usize) -> Result<Vec<f64>> {
    let n = s.chart().require_split()?;
    if a.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: a.len(),
        });
    }
    let order = order.max(1);
    let local = s.local(p, order)?;
    let seeds = p.seeds(order);
    let a_jets = a.iter().map(|e| e.eval_jets(&seeds)).collect::<Result<Vec<_>>>()?;
    let a_inv = invert_jet_matrix(&a_jets, n).map_err(|e| match e {
        Error::SingularMetric { det } => Error::SingularFrame { det },
        other => other,
    })?;
    let dim = 2 * n;
    let plus: Vec<EvaluatedTensor> = (0..n).map(|i| local.projected_basis(Sign::Plus, i)).collect();
    let minus: Vec<EvaluatedTensor> = (0..n).map(|j| local.projected_basis(Sign::Minus, n + j)).collect();
    let combine = |coeff: &dyn Fn(usize) -> Jet, basis: &[EvaluatedTensor]| {
        EvaluatedTensor::from_fn(dim, 1, 0, |idx| {
            let mut acc = Jet::zero(dim, order);
            for (i, v) in basis.iter().enumerate() {
                acc.add_product(1.0, &coeff(i), v.get(idx));
            }
            acc
        })
    };
    let e: Vec<EvaluatedTensor> = (0..n).map(|c| combine(&|i| a_jets[c * n + i].clone(), &plus)).collect();
    let dual: Vec<EvaluatedTensor> = (0..n).map(|c| combine(&|j| a_inv[j * n + c].clone(), &minus)).collect();
    let mut f = vec![0.0; n * n * n];
    for x in 0..n {
        for y in 0..n {
            let br = d_bracket_local(&local, &e[x], &e[y])?;
            for c in 0..n {
                f[(c * n + x) * n + y] = local.metric(&br, &dual[c])?.value();
            }
        }
    }
    Ok(f)
}

/// `[e_a, e_b]` for the same frame, through the Lie bracket. Used to read
/// off structure functions without the D-bracket.
pub fn frame_lie_bracket(s: &ParaHermitianStructure, a: &[Expr], x: usize, y: usize, p: &Point) -> Result<EvaluatedTensor> {
    let n = s.chart().require_split()?;
    let dim = 2 * n;
    let seeds = p.seeds(1);
    let field = |row: usize| -> Result<EvaluatedTensor> {
        let comps = (0..dim)
            .map(|i| if i < n { a[row * n + i].eval_jets(&seeds) } else { Ok(Jet::zero(dim, 1)) })
            .collect::<Result<Vec<_>>>()?;
        EvaluatedTensor::vector(comps)
    };
    lie_bracket(&field(x)?, &field(y)?)
}
