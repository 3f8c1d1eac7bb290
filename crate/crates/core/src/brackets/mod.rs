//! Brackets built from connections, the leafwise Dorfman bracket, the
//! Schouten bracket of a bivector, and the Courant-axiom harness.
//!
//! All brackets act on fields already evaluated to jets at a point; the
//! jets carry the local behaviour of the fields, so a bracket result can be
//! fed into another bracket. Each nesting level costs one jet order.

use serde::Serialize;

use crate::connections::{canonical_coefficients, covariant_vector, nabla, torsion};
use crate::error::{Error, Result};
use crate::geometry::{contract, directional, lie_bracket, EvaluatedTensor, Point, TensorField};
use crate::jet::Jet;
use crate::parastructure::{n_sign, LocalStructure, Sign};

/// Above this scale-normalized `N±` residual a leaf is treated as
/// non-integrable.
pub const INTEGRABILITY_TOL: f64 = 1e-9;
/// Torsion allowed for a connection passed to [`schouten_bivector`].
pub const TORSION_TOL: f64 = 1e-9;

/// A section `X + α` of `T ⊕ T*`, stored on the full chart.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedVector {
    vector: EvaluatedTensor,
    covector: EvaluatedTensor,
}

impl GeneralizedVector {
    pub fn new(vector: EvaluatedTensor, covector: EvaluatedTensor) -> GeneralizedVector {
        GeneralizedVector { vector, covector }
    }

    pub fn vector(&self) -> &EvaluatedTensor {
        &self.vector
    }

    pub fn covector(&self) -> &EvaluatedTensor {
        &self.covector
    }

    /// `⟨X+α, Y+β⟩ = α(Y) + β(X)`.
    pub fn pairing(&self, other: &GeneralizedVector) -> Result<Jet> {
        let a = contract(&self.covector, &other.vector)?;
        let b = contract(&other.covector, &self.vector)?;
        Ok(&a + &b)
    }

    pub fn max_value_diff(&self, other: &GeneralizedVector) -> f64 {
        self.vector
            .max_value_diff(&other.vector)
            .max(self.covector.max_value_diff(&other.covector))
    }

    /// Largest value of the covector part on the complementary eigenbundle;
    /// zero for an object living on the `sign` leaf.
    pub fn leaf_residual(&self, local: &LocalStructure, sign: Sign) -> Result<f64> {
        let n = local.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let v = local.projected_basis(sign.opposite(), i);
            worst = worst.max(contract(&self.covector, &v)?.value().abs());
            worst = worst.max(local.project(sign.opposite(), &self.vector)?.max_abs_value());
        }
        Ok(worst)
    }
}

/// A bracket on vector fields evaluated at one point, with its anchor and
/// (optional) pairing.
pub trait PointBracket: Send + Sync {
    fn bracket(&self, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<EvaluatedTensor>;

    fn anchor(&self, x: &EvaluatedTensor) -> Result<EvaluatedTensor> {
        Ok(x.clone())
    }

    /// `None` when the bracket comes without a pairing; axioms (1) and (2)
    /// are skipped then.
    fn pairing(&self, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<Option<Jet>> {
        let _ = (x, y);
        Ok(None)
    }
}

/// The Lie bracket with identity anchor and no pairing.
#[derive(Debug, Clone, Copy, Default)]
pub struct LieBracket;

impl PointBracket for LieBracket {
    fn bracket(&self, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<EvaluatedTensor> {
        lie_bracket(x, y)
    }
}

/// `η(⟦X,Y⟧,Z) = η(∇_{PX}Y − ∇_{PY}X, Z) + η(∇_{PZ}X, Y)` where `P` is the
/// identity, or `P±` for a projected bracket.
pub fn associated_bracket_local(
    local: &LocalStructure,
    gamma: &EvaluatedTensor,
    projection: Option<Sign>,
    x: &EvaluatedTensor,
    y: &EvaluatedTensor,
) -> Result<EvaluatedTensor> {
    let n = local.dim();
    let (px, py) = match projection {
        Some(s) => (local.project(s, x)?, local.project(s, y)?),
        None => (x.clone(), y.clone()),
    };
    let u = covariant_vector(gamma, &px, y)?.try_sub(&covariant_vector(gamma, &py, x)?)?;
    let eta = local.eta();
    let order = u.order();
    // w_a = η(∇_{∂_a} X, Y)
    let dx = (0..n).map(|a| x.partial(a)).collect::<Result<Vec<_>>>()?;
    let eta_y: Vec<Jet> = (0..n)
        .map(|k| {
            let mut acc = Jet::zero(n, order);
            for l in 0..n {
                acc.add_product(1.0, eta.get(&[k, l]), y.get(&[l]));
            }
            acc
        })
        .collect();
    let w: Vec<Jet> = (0..n)
        .map(|a| {
            let mut acc = Jet::zero(n, order);
            for k in 0..n {
                let mut nab = dx[a].get(&[k]).truncate(order);
                for j in 0..n {
                    nab.add_product(1.0, gamma.get(&[k, a, j]), x.get(&[j]));
                }
                acc.add_product(1.0, &nab, &eta_y[k]);
            }
            acc
        })
        .collect();
    let xi: Vec<Jet> = (0..n)
        .map(|m| {
            let mut acc = Jet::zero(n, order);
            for k in 0..n {
                acc.add_product(1.0, eta.get(&[m, k]), u.get(&[k]));
            }
            match projection {
                None => acc.axpy(1.0, &w[m]),
                Some(s) => {
                    let p = local.projector(s);
                    for a in 0..n {
                        acc.add_product(1.0, p.get(&[a, m]), &w[a]);
                    }
                }
            }
            acc
        })
        .collect();
    local.sharp(&EvaluatedTensor::covector(xi)?)
}

/// The bracket associated to a connection, optionally `P±`-projected.
#[derive(Debug, Clone)]
pub struct AssociatedBracket {
    local: LocalStructure,
    gamma: EvaluatedTensor,
    projection: Option<Sign>,
}

impl AssociatedBracket {
    pub fn new(local: LocalStructure, gamma: EvaluatedTensor, projection: Option<Sign>) -> AssociatedBracket {
        AssociatedBracket {
            local,
            gamma,
            projection,
        }
    }

    /// The D-bracket: the unprojected bracket of the canonical connection.
    pub fn d_bracket(local: LocalStructure) -> Result<AssociatedBracket> {
        let gamma = canonical_coefficients(&local)?;
        Ok(AssociatedBracket::new(local, gamma, None))
    }

    /// `⟦,⟧±` from the canonical connection.
    pub fn projected_canonical(local: LocalStructure, sign: Sign) -> Result<AssociatedBracket> {
        let gamma = canonical_coefficients(&local)?;
        Ok(AssociatedBracket::new(local, gamma, Some(sign)))
    }

    pub fn local(&self) -> &LocalStructure {
        &self.local
    }

    pub fn gamma(&self) -> &EvaluatedTensor {
        &self.gamma
    }

    pub fn projection(&self) -> Option<Sign> {
        self.projection
    }

    pub fn with_projection(&self, projection: Option<Sign>) -> AssociatedBracket {
        AssociatedBracket {
            projection,
            ..self.clone()
        }
    }
}

impl PointBracket for AssociatedBracket {
    fn bracket(&self, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<EvaluatedTensor> {
        associated_bracket_local(&self.local, &self.gamma, self.projection, x, y)
    }

    fn anchor(&self, x: &EvaluatedTensor) -> Result<EvaluatedTensor> {
        match self.projection {
            Some(s) => self.local.project(s, x),
            None => Ok(x.clone()),
        }
    }

    fn pairing(&self, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<Option<Jet>> {
        self.local.metric(x, y).map(Some)
    }
}

/// `½(⟦X,Y⟧ − ⟦Y,X⟧)` of an underlying bracket.
#[derive(Debug, Clone)]
pub struct SkewBracket<B>(pub B);

impl<B: PointBracket> PointBracket for SkewBracket<B> {
    fn bracket(&self, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<EvaluatedTensor> {
        Ok(self.0.bracket(x, y)?.try_sub(&self.0.bracket(y, x)?)?.scale(0.5))
    }

    fn anchor(&self, x: &EvaluatedTensor) -> Result<EvaluatedTensor> {
        self.0.anchor(x)
    }

    fn pairing(&self, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<Option<Jet>> {
        self.0.pairing(x, y)
    }
}

pub fn d_bracket_local(local: &LocalStructure, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    associated_bracket_local(local, &canonical_coefficients(local)?, None, x, y)
}

pub fn c_bracket_local(local: &LocalStructure, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    let gamma = canonical_coefficients(local)?;
    let xy = associated_bracket_local(local, &gamma, None, x, y)?;
    let yx = associated_bracket_local(local, &gamma, None, y, x)?;
    Ok(xy.try_sub(&yx)?.scale(0.5))
}

/// Evaluates fields and structure at `p` and applies the D-bracket.
pub fn d_bracket(
    s: &crate::parastructure::ParaHermitianStructure,
    x: &TensorField,
    y: &TensorField,
    p: &Point,
    order: usize,
) -> Result<EvaluatedTensor> {
    let local = s.local(p, order)?;
    d_bracket_local(&local, &x.eval(p, order)?, &y.eval(p, order)?)
}

/// Evaluates fields, structure and connection at `p` and applies the
/// associated bracket (projected when `projection` is set).
pub fn associated_bracket(
    conn: &crate::connections::Connection,
    s: &crate::parastructure::ParaHermitianStructure,
    projection: Option<Sign>,
    x: &TensorField,
    y: &TensorField,
    p: &Point,
    order: usize,
) -> Result<EvaluatedTensor> {
    let local = s.local(p, order)?;
    let gamma = conn.christoffels_at(&local)?;
    associated_bracket_local(&local, &gamma, projection, &x.eval(p, order)?, &y.eval(p, order)?)
}

fn require_integrable(local: &LocalStructure, sign: Sign) -> Result<()> {
    let residual = n_sign(local, sign)?.max_abs_value() / local.scale().max(f64::MIN_POSITIVE);
    if residual > INTEGRABILITY_TOL {
        return Err(Error::NotIntegrable {
            sign: sign.symbol(),
            residual,
        });
    }
    Ok(())
}

/// Dorfman bracket of `(T ⊕ T*)F±` for sections living on the leaf:
/// `[X,Y] + L_Xβ − L_Yα + d±(α(Y))`, with the covector evaluated on the
/// frame `P±∂_m`.
pub fn dorfman_leafwise(
    local: &LocalStructure,
    sign: Sign,
    e1: &GeneralizedVector,
    e2: &GeneralizedVector,
) -> Result<GeneralizedVector> {
    require_integrable(local, sign)?;
    let (x, alpha) = (e1.vector(), e1.covector());
    let (y, beta) = (e2.vector(), e2.covector());
    let vector = lie_bracket(x, y)?;
    let alpha_y = contract(alpha, y)?;
    let n = local.dim();
    let comps = (0..n)
        .map(|m| {
            let z = local.projected_basis(sign, m);
            let mut acc = directional(x, &contract(beta, &z)?)?;
            acc.axpy(-1.0, &contract(beta, &lie_bracket(x, &z)?)?);
            acc.axpy(-1.0, &directional(y, &contract(alpha, &z)?)?);
            acc.axpy(1.0, &contract(alpha, &lie_bracket(y, &z)?)?);
            acc.axpy(1.0, &directional(&z, &alpha_y)?);
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneralizedVector::new(vector, EvaluatedTensor::covector(comps)?))
}

/// The contracted leafwise Dorfman expression `η(⟦X,Y⟧±, Z)` written with
/// Lie brackets and derivatives of `η` only.
pub fn dorfman_contracted(
    local: &LocalStructure,
    sign: Sign,
    x: &EvaluatedTensor,
    y: &EvaluatedTensor,
    z: &EvaluatedTensor,
) -> Result<Jet> {
    let o = sign.opposite();
    let (xp, xm) = (local.project(sign, x)?, local.project(o, x)?);
    let (yp, ym) = (local.project(sign, y)?, local.project(o, y)?);
    let (zp, zm) = (local.project(sign, z)?, local.project(o, z)?);
    let eta = |a: &EvaluatedTensor, b: &EvaluatedTensor| local.metric(a, b);
    let mut acc = directional(&xp, &eta(&ym, &zp)?)?;
    acc.axpy(-1.0, &directional(&yp, &eta(&xm, &zp)?)?);
    acc.axpy(1.0, &directional(&zp, &eta(&xm, &yp)?)?);
    acc.axpy(1.0, &eta(&lie_bracket(&xp, &yp)?, &zm)?);
    acc.axpy(1.0, &eta(&xm, &lie_bracket(&yp, &zp)?)?);
    acc.axpy(-1.0, &eta(&ym, &lie_bracket(&xp, &zp)?)?);
    Ok(acc)
}

/// `⟦X,⟦Y,Z⟧⟧ − ⟦⟦X,Y⟧,Z⟧ − ⟦Y,⟦X,Z⟧⟧`.
pub fn jacobi_defect(
    br: &dyn PointBracket,
    x: &EvaluatedTensor,
    y: &EvaluatedTensor,
    z: &EvaluatedTensor,
) -> Result<EvaluatedTensor> {
    let a = br.bracket(x, &br.bracket(y, z)?)?;
    let b = br.bracket(&br.bracket(x, y)?, z)?;
    let c = br.bracket(y, &br.bracket(x, z)?)?;
    a.try_sub(&b)?.try_sub(&c)
}

/// `[β,β]^{abc} = Σ_cycl β^{ai} (∇_i β)^{bc}` for a torsionless connection,
/// unnormalized.
pub fn schouten_bivector(beta: &EvaluatedTensor, gamma: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    beta.expect_rank(2, 0)?;
    let residual = beta.antisymmetry_residual();
    if residual > crate::geometry::ops::ANTISYMMETRY_TOL {
        return Err(Error::NotAntisymmetric { residual });
    }
    let t = torsion(gamma)?.max_abs_value();
    if t > TORSION_TOL {
        return Err(Error::NotTorsionless { residual: t });
    }
    let nb = nabla(gamma, beta)?;
    let n = beta.dim();
    let order = nb.order();
    let term = |a: usize, b: usize, c: usize| {
        let mut acc = Jet::zero(n, order);
        for i in 0..n {
            acc.add_product(1.0, beta.get(&[a, i]), nb.get(&[b, c, i]));
        }
        acc
    };
    Ok(EvaluatedTensor::from_fn(n, 3, 0, |idx| {
        let (a, b, c) = (idx[0], idx[1], idx[2]);
        let mut acc = term(a, b, c);
        acc.axpy(1.0, &term(b, c, a));
        acc.axpy(1.0, &term(c, a, b));
        acc
    }))
}

/// `[β,β](λ,μ,ν)`.
pub fn schouten_eval(
    beta: &EvaluatedTensor,
    gamma: &EvaluatedTensor,
    lambda: &EvaluatedTensor,
    mu: &EvaluatedTensor,
    nu: &EvaluatedTensor,
) -> Result<Jet> {
    let s = schouten_bivector(beta, gamma)?;
    let n = s.dim();
    let order = s.order().min(lambda.order()).min(mu.order()).min(nu.order());
    let mut acc = Jet::zero(n, order);
    for idx in crate::geometry::multi_indices(n, 3) {
        let c = s.get(&idx);
        if c.max_abs() == 0.0 {
            continue;
        }
        let t = &(lambda.get(&[idx[0]]) * mu.get(&[idx[1]])) * nu.get(&[idx[2]]);
        acc.add_product(1.0, c, &t);
    }
    Ok(acc)
}

/// Residuals of the three Courant axioms for one triple of fields.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AxiomResiduals {
    pub axiom1: Option<f64>,
    pub axiom2: Option<f64>,
    pub axiom3: f64,
}

pub fn courant_residuals(
    br: &dyn PointBracket,
    x: &EvaluatedTensor,
    y: &EvaluatedTensor,
    z: &EvaluatedTensor,
) -> Result<AxiomResiduals> {
    let axiom3 = jacobi_defect(br, x, y, z)?.max_abs_value();
    let (axiom1, axiom2) = match br.pairing(y, z)? {
        None => (None, None),
        Some(yz) => {
            let lhs = directional(&br.anchor(x)?, &yz)?;
            let a = br.pairing(&br.bracket(x, y)?, z)?.expect("pairing present");
            let b = br.pairing(y, &br.bracket(x, z)?)?.expect("pairing present");
            let r1 = (lhs.value() - a.value() - b.value()).abs();
            let xx = br.pairing(x, x)?.expect("pairing present");
            let half = directional(&br.anchor(y)?, &xx)?.value() * 0.5;
            let lhs2 = br.pairing(&br.bracket(x, x)?, y)?.expect("pairing present").value();
            (Some(r1), Some((lhs2 - half).abs()))
        }
    };
    Ok(AxiomResiduals { axiom1, axiom2, axiom3 })
}

/// A witness: where the worst residual of an axiom was seen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomWitness {
    pub axiom: usize,
    pub point_index: usize,
    pub point: Vec<f64>,
    pub field_index: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketReport {
    pub points: usize,
    pub field_triples: usize,
    pub seed: u64,
    pub axiom1: Option<f64>,
    pub axiom2: Option<f64>,
    pub axiom3: f64,
    /// Worst case per axiom, in axiom order; only axioms that were checked.
    pub witnesses: Vec<AxiomWitness>,
}

impl BracketReport {
    pub fn passes(&self, axiom: usize, tol: f64) -> bool {
        match axiom {
            1 => self.axiom1.is_none_or(|r| r <= tol),
            2 => self.axiom2.is_none_or(|r| r <= tol),
            _ => self.axiom3 <= tol,
        }
    }
}

/// Runs the Courant axioms for every field triple at every point. `make`
/// builds the bracket at a point for fields of the given jet order.
pub fn courant_axiom_suite<F>(
    sample: &[Point],
    order: usize,
    fields: &[[TensorField; 3]],
    seed: u64,
    make: F,
) -> Result<BracketReport>
where
    F: Fn(&Point, usize) -> Result<Box<dyn PointBracket>> + Sync,
{
    use rayon::prelude::*;
    let per_point = sample
        .par_iter()
        .map(|p| {
            let br = make(p, order)?;
            fields
                .iter()
                .map(|[x, y, z]| {
                    courant_residuals(br.as_ref(), &x.eval(p, order)?, &y.eval(p, order)?, &z.eval(p, order)?)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = BracketReport {
        points: sample.len(),
        field_triples: fields.len(),
        seed,
        axiom1: None,
        axiom2: None,
        axiom3: 0.0,
        witnesses: Vec::new(),
    };
    let mut worst: [Option<(f64, usize, usize)>; 3] = [None, None, None];
    for (pi, row) in per_point.iter().enumerate() {
        for (fi, r) in row.iter().enumerate() {
            let vals = [r.axiom1, r.axiom2, Some(r.axiom3)];
            for (a, v) in vals.into_iter().enumerate() {
                if let Some(v) = v {
                    if worst[a].is_none_or(|(w, _, _)| v > w) {
                        worst[a] = Some((v, pi, fi));
                    }
                }
            }
        }
    }
    report.axiom1 = worst[0].map(|w| w.0);
    report.axiom2 = worst[1].map(|w| w.0);
    report.axiom3 = worst[2].map_or(0.0, |w| w.0);
    for (a, w) in worst.iter().enumerate() {
        if let Some((residual, pi, fi)) = *w {
            report.witnesses.push(AxiomWitness {
                axiom: a + 1,
                point_index: pi,
                point: sample[pi].coords().to_vec(),
                field_index: fi,
                residual,
            });
        }
    }
    Ok(report)
}

/// `ρ±`-side consistency: `ρ±(⟦X,Y⟧±)` from a bracket against the leafwise
/// Dorfman bracket of `ρ±X` and `ρ±Y`. Returns the largest difference.
pub fn leafwise_mismatch(
    br: &AssociatedBracket,
    sign: Sign,
    x: &EvaluatedTensor,
    y: &EvaluatedTensor,
) -> Result<f64> {
    use crate::parastructure::rho;
    let local = br.local();
    let lhs = rho(local, sign, &br.with_projection(Some(sign)).bracket(x, y)?)?;
    let rhs = dorfman_leafwise(local, sign, &rho(local, sign, x)?, &rho(local, sign, y)?)?;
    Ok(lhs.max_value_diff(&rhs))
}
