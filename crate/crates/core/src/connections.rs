//! Affine connections given by their coefficients `Γ^k_{ij}`, stored as a
//! `(1,2)` tensor with index order `[k, i, j]` where `i` is the direction and
//! `j` the argument: `∇_{∂_i}∂_j = Γ^k_{ij}∂_k`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{multi_indices, pair, EvaluatedTensor, Point, TensorField};
use crate::jet::Jet;
use crate::parastructure::{LocalStructure, ParaHermitianStructure, Sign};

/// Default tolerance for adaptedness conditions.
pub const ADAPTED_TOL: f64 = 1e-9;
/// Default number of random vector triples per point in [`check_adapted`].
pub const DEFAULT_VECTORS_PER_POINT: usize = 20;

/// `Γ^k_{ij} = ½ η^{kl}(∂_i η_{jl} + ∂_j η_{il} − ∂_l η_{ij})`, one jet order
/// below `eta`.
pub fn levi_civita_coefficients(eta: &EvaluatedTensor, eta_inv: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    eta.expect_rank(0, 2)?;
    eta_inv.expect_rank(2, 0)?;
    let n = eta.dim();
    let d = (0..n).map(|i| eta.partial(i)).collect::<Result<Vec<_>>>()?;
    let order = eta.order() - 1;
    // First kind: Γ_{lij} = ½(∂_i η_{jl} + ∂_j η_{il} − ∂_l η_{ij}).
    let first = EvaluatedTensor::from_fn(n, 0, 3, |idx| {
        let (l, i, j) = (idx[0], idx[1], idx[2]);
        let mut acc = d[i].get(&[j, l]).clone();
        acc.axpy(1.0, d[j].get(&[i, l]));
        acc.axpy(-1.0, d[l].get(&[i, j]));
        acc.scale(0.5)
    });
    Ok(EvaluatedTensor::from_fn(n, 1, 2, |idx| {
        let mut acc = Jet::zero(n, order);
        for l in 0..n {
            acc.add_product(1.0, eta_inv.get(&[idx[0], l]), first.get(&[l, idx[1], idx[2]]));
        }
        acc
    }))
}

/// `∇T` with the derivative index inserted as the first lower index:
/// `(∇T)[a.., i, b..] = (∇_i T)^{a..}_{b..}`.
pub fn nabla(gamma: &EvaluatedTensor, t: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    gamma.expect_rank(1, 2)?;
    let (upper, lower) = t.rank();
    let n = t.dim();
    let d = (0..n).map(|i| t.partial(i)).collect::<Result<Vec<_>>>()?;
    let order = (t.order() - 1).min(gamma.order());
    EvaluatedTensor::try_from_fn(n, upper, lower + 1, |idx| {
        let i = idx[upper];
        let mut base: Vec<usize> = idx[..upper].to_vec();
        base.extend_from_slice(&idx[upper + 1..]);
        let mut acc = d[i].get(&base).truncate(order);
        let mut src = base.clone();
        for slot in 0..upper + lower {
            let orig = base[slot];
            for m in 0..n {
                src[slot] = m;
                if slot < upper {
                    acc.add_product(1.0, gamma.get(&[orig, i, m]), t.get(&src));
                } else {
                    acc.add_product(-1.0, gamma.get(&[m, i, orig]), t.get(&src));
                }
            }
            src[slot] = orig;
        }
        Ok(acc)
    })
}

/// `(∇_i M)^k_j` stored as `[k, i, j]`.
pub fn covariant_endomorphism(gamma: &EvaluatedTensor, m: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    m.expect_rank(1, 1)?;
    nabla(gamma, m)
}

/// `∇_X T`: contracts `X` into the derivative slot of [`nabla`].
pub fn covariant_derivative(gamma: &EvaluatedTensor, x: &EvaluatedTensor, t: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    x.expect_rank(1, 0)?;
    let full = nabla(gamma, t)?;
    let (upper, lower) = t.rank();
    let n = t.dim();
    let order = full.order().min(x.order());
    Ok(EvaluatedTensor::from_fn(n, upper, lower, |idx| {
        let mut acc = Jet::zero(n, order);
        let mut src = Vec::with_capacity(idx.len() + 1);
        for i in 0..n {
            src.clear();
            src.extend_from_slice(&idx[..upper]);
            src.push(i);
            src.extend_from_slice(&idx[upper..]);
            acc.add_product(1.0, x.get(&[i]), full.get(&src));
        }
        acc
    }))
}

/// `(∇_X Y)^k = X^i ∂_i Y^k + Γ^k_{ij} X^i Y^j`, the common special case.
pub fn covariant_vector(gamma: &EvaluatedTensor, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    x.expect_rank(1, 0)?;
    y.expect_rank(1, 0)?;
    let n = y.dim();
    let dy = (0..n).map(|i| y.partial(i)).collect::<Result<Vec<_>>>()?;
    let order = (y.order() - 1).min(x.order()).min(gamma.order());
    let comps = (0..n)
        .map(|k| {
            let mut acc = Jet::zero(n, order);
            for i in 0..n {
                acc.add_product(1.0, x.get(&[i]), dy[i].get(&[k]));
                for j in 0..n {
                    let g = gamma.get(&[k, i, j]);
                    if g.max_abs() == 0.0 {
                        continue;
                    }
                    let xy = x.get(&[i]) * y.get(&[j]);
                    acc.add_product(1.0, g, &xy);
                }
            }
            acc
        })
        .collect();
    EvaluatedTensor::vector(comps)
}

/// `T^k_{ij} = Γ^k_{ij} − Γ^k_{ji}`.
pub fn torsion(gamma: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    gamma.expect_rank(1, 2)?;
    Ok(EvaluatedTensor::from_fn(gamma.dim(), 1, 2, |idx| {
        gamma.get(idx) - gamma.get(&[idx[0], idx[2], idx[1]])
    }))
}

/// Applies a `(1,2)` tensor to two vectors: `T(X,Y)^k = T^k_{ij} X^i Y^j`.
pub fn apply_bilinear(t: &EvaluatedTensor, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    t.expect_rank(1, 2)?;
    x.expect_rank(1, 0)?;
    y.expect_rank(1, 0)?;
    let n = t.dim();
    let order = t.order().min(x.order()).min(y.order());
    let comps = (0..n)
        .map(|k| {
            let mut acc = Jet::zero(n, order);
            for i in 0..n {
                for j in 0..n {
                    let c = t.get(&[k, i, j]);
                    if c.max_abs() == 0.0 {
                        continue;
                    }
                    acc.add_product(1.0, c, &(x.get(&[i]) * y.get(&[j])));
                }
            }
            acc
        })
        .collect();
    EvaluatedTensor::vector(comps)
}

/// Riemann tensor stored as `[k, l, i, j]` with
/// `R(∂_i,∂_j)∂_l = R^k_{lij}∂_k`, one jet order below `gamma`.
pub fn curvature(gamma: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    gamma.expect_rank(1, 2)?;
    let n = gamma.dim();
    let d = (0..n).map(|i| gamma.partial(i)).collect::<Result<Vec<_>>>()?;
    let order = gamma.order() - 1;
    Ok(EvaluatedTensor::from_fn(n, 1, 3, |idx| {
        let (k, l, i, j) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = d[i].get(&[k, j, l]).clone();
        acc.axpy(-1.0, d[j].get(&[k, i, l]));
        for m in 0..n {
            acc.add_product(1.0, gamma.get(&[k, i, m]), gamma.get(&[m, j, l]));
            acc.add_product(-1.0, gamma.get(&[k, j, m]), gamma.get(&[m, i, l]));
        }
        acc.truncate(order)
    }))
}

/// Canonical connection in projector form:
/// `Γc^k_{ij} = Γ̊^k_{ij} + Σ± (P±)^k_m (∇̊_i P±)^m_j`.
pub fn canonical_coefficients(local: &LocalStructure) -> Result<EvaluatedTensor> {
    let lc = local.levi_civita()?;
    let n = local.dim();
    let mut out = lc.clone();
    for sign in [Sign::Plus, Sign::Minus] {
        let p = local.projector(sign);
        let np = covariant_endomorphism(&lc, p)?;
        out = EvaluatedTensor::from_fn(n, 1, 2, |idx| {
            let mut acc = out.get(idx).clone();
            for m in 0..n {
                acc.add_product(1.0, p.get(&[idx[0], m]), np.get(&[m, idx[1], idx[2]]));
            }
            acc
        });
    }
    Ok(out)
}

/// Canonical connection in contorsion form:
/// `Γc^k_{ij} = Γ̊^k_{ij} − ½ η^{kl} (∇̊_i ω)_{jm} K^m_l`.
pub fn canonical_contorsion_coefficients(local: &LocalStructure) -> Result<EvaluatedTensor> {
    let lc = local.levi_civita()?;
    let n = local.dim();
    let nw = nabla(&lc, local.omega())?;
    let k = local.k();
    let inv = local.eta_inv();
    let order = lc.order().min(nw.order());
    // c_{ijl} = (∇̊_i ω)_{jm} K^m_l
    let c = EvaluatedTensor::from_fn(n, 0, 3, |idx| {
        let mut acc = Jet::zero(n, order);
        for m in 0..n {
            acc.add_product(1.0, nw.get(&[idx[0], idx[1], m]), k.get(&[m, idx[2]]));
        }
        acc
    });
    Ok(EvaluatedTensor::from_fn(n, 1, 2, |idx| {
        let mut acc = lc.get(idx).clone();
        for l in 0..n {
            acc.add_product(-0.5, inv.get(&[idx[0], l]), c.get(&[idx[1], idx[2], l]));
        }
        acc
    }))
}

/// Shift tensor of an alternative adapted connection on one side.
///
/// With a symmetric `C(A,B) = P±c(P±A, P±B)` (`c` constant, symmetrized in
/// its lower pair), `S(X,Y) = P±C(X,Y) + η⁻¹ξ` where
/// `ξ(Z) = −η(P∓Y, C(X, Z))`. Adding `S` to an adapted connection preserves
/// all four adaptedness conditions on that side while changing `∇` on
/// `T± × T±`.
pub fn adapted_shift(local: &LocalStructure, sign: Sign, c: &[f64]) -> Result<EvaluatedTensor> {
    let n = local.dim();
    if c.len() != n * n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n * n,
            found: c.len(),
        });
    }
    let order = local.order();
    let p = local.projector(sign).truncate(order);
    let q = local.projector(sign.opposite()).truncate(order);
    let eta = local.eta().truncate(order);
    let inv = local.eta_inv().truncate(order);
    let sym = |m: usize, a: usize, b: usize| 0.5 * (c[(m * n + a) * n + b] + c[(m * n + b) * n + a]);
    // C^k_{ij} = P^k_m c^m_{ab} P^a_i P^b_j, symmetric in (i, j).
    let raw = EvaluatedTensor::from_fn(n, 1, 2, |idx| {
        let (m, i, j) = (idx[0], idx[1], idx[2]);
        let mut acc = Jet::zero(n, order);
        for a in 0..n {
            for b in 0..n {
                let s = sym(m, a, b);
                if s != 0.0 {
                    acc.add_product(s, p.get(&[a, i]), p.get(&[b, j]));
                }
            }
        }
        acc
    });
    let cc = EvaluatedTensor::from_fn(n, 1, 2, |idx| {
        let mut acc = Jet::zero(n, order);
        for m in 0..n {
            acc.add_product(1.0, p.get(&[idx[0], m]), raw.get(&[m, idx[1], idx[2]]));
        }
        acc
    });
    // ξ_{ijl} = −η(P∓∂_j, C(∂_i, ∂_l)) = −q^a_j η_{ab} C^b_{il}
    let qeta = EvaluatedTensor::from_fn(n, 0, 2, |idx| {
        let mut acc = Jet::zero(n, order);
        for a in 0..n {
            acc.add_product(1.0, q.get(&[a, idx[0]]), eta.get(&[a, idx[1]]));
        }
        acc
    });
    let xi = EvaluatedTensor::from_fn(n, 0, 3, |idx| {
        let (i, j, l) = (idx[0], idx[1], idx[2]);
        let mut acc = Jet::zero(n, order);
        for b in 0..n {
            acc.add_product(-1.0, qeta.get(&[j, b]), cc.get(&[b, i, l]));
        }
        acc
    });
    Ok(EvaluatedTensor::from_fn(n, 1, 2, |idx| {
        let (k, i, j) = (idx[0], idx[1], idx[2]);
        let mut acc = Jet::zero(n, order);
        for m in 0..n {
            acc.add_product(1.0, p.get(&[k, m]), cc.get(&[m, i, j]));
            acc.add_product(1.0, inv.get(&[k, m]), xi.get(&[i, j, m]));
        }
        acc
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    LeviCivita,
    Canonical,
    UserSupplied,
}

#[derive(Clone)]
enum Coefficients {
    LeviCivita(TensorField),
    Canonical(ParaHermitianStructure),
    Field(TensorField),
    Shifted(Box<Connection>, TensorField),
}

/// A connection on a chart, evaluated pointwise to jets.
#[derive(Clone)]
pub struct Connection {
    kind: ConnectionKind,
    dim: usize,
    coeffs: Coefficients,
}

impl fmt::Debug for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Connection")
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .finish()
    }
}

impl Connection {
    pub fn levi_civita(eta: &TensorField) -> Result<Connection> {
        eta.expect_rank(0, 2)?;
        Ok(Connection {
            kind: ConnectionKind::LeviCivita,
            dim: eta.dim(),
            coeffs: Coefficients::LeviCivita(eta.clone()),
        })
    }

    pub fn canonical(s: &ParaHermitianStructure) -> Connection {
        Connection {
            kind: ConnectionKind::Canonical,
            dim: s.dim(),
            coeffs: Coefficients::Canonical(s.clone()),
        }
    }

    /// Coefficients given directly as a `(1,2)` field in `[k, i, j]` order.
    pub fn user_supplied(gamma: TensorField) -> Result<Connection> {
        gamma.expect_rank(1, 2)?;
        Ok(Connection {
            kind: ConnectionKind::UserSupplied,
            dim: gamma.dim(),
            coeffs: Coefficients::Field(gamma),
        })
    }

    /// `∇ + S` for a `(1,2)` field `S`.
    pub fn shifted(&self, s: TensorField) -> Result<Connection> {
        s.expect_rank(1, 2)?;
        if s.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: s.dim(),
            });
        }
        Ok(Connection {
            kind: ConnectionKind::UserSupplied,
            dim: self.dim,
            coeffs: Coefficients::Shifted(Box::new(self.clone()), s),
        })
    }

    /// The canonical connection plus [`adapted_shift`] on one side.
    pub fn alternative_adapted(s: &ParaHermitianStructure, sign: Sign, c: Vec<f64>) -> Result<Connection> {
        let n = s.dim();
        if c.len() != n * n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n * n,
                found: c.len(),
            });
        }
        let structure = s.clone();
        let c = Arc::new(c);
        let shift = TensorField::procedure(
            n,
            1,
            2,
            Arc::new(move |p: &Point, order: usize| adapted_shift(&structure.local(p, order)?, sign, &c)),
        );
        Connection::canonical(s).shifted(shift)
    }

    pub fn kind(&self) -> ConnectionKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ^k_{ij}` at `p` with jet order `order`.
    pub fn christoffels(&self, p: &Point, order: usize) -> Result<EvaluatedTensor> {
        match &self.coeffs {
            Coefficients::LeviCivita(eta) => {
                let e = eta.eval(p, order + 1)?;
                let inv = crate::geometry::metric_inverse(&e)?;
                levi_civita_coefficients(&e, &inv)
            }
            Coefficients::Canonical(s) => canonical_coefficients(&s.local(p, order)?),
            Coefficients::Field(f) => f.eval(p, order),
            Coefficients::Shifted(base, s) => base.christoffels(p, order)?.try_add(&s.eval(p, order)?),
        }
    }

    /// Coefficients for a structure already evaluated at the point; avoids
    /// re-evaluating `η` and `K` for the canonical connection.
    pub fn christoffels_at(&self, local: &LocalStructure) -> Result<EvaluatedTensor> {
        match &self.coeffs {
            Coefficients::Canonical(_) => canonical_coefficients(local),
            Coefficients::LeviCivita(_) => self.christoffels(local.point(), local.order()),
            Coefficients::Field(f) => f.eval(local.point(), local.order()),
            Coefficients::Shifted(base, s) => base.christoffels_at(local)?.try_add(&s.eval(local.point(), local.order())?),
        }
    }

    /// The coefficients as a procedure-backed `(1,2)` field.
    pub fn as_field(&self) -> TensorField {
        let me = self.clone();
        TensorField::procedure(self.dim, 1, 2, Arc::new(move |p: &Point, order: usize| me.christoffels(p, order)))
    }
}

/// Which eigenbundle side(s) to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    P,
    N,
    Both,
}

impl Side {
    pub fn signs(self) -> Vec<Sign> {
        match self {
            Side::P => vec![Sign::Plus],
            Side::N => vec![Sign::Minus],
            Side::Both => vec![Sign::Plus, Sign::Minus],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResidual {
    pub max: f64,
    pub point_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideReport {
    pub sign: Sign,
    /// Conditions (1) to (4) in order.
    pub conditions: Vec<ConditionResidual>,
    pub adapted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptedReport {
    pub kind: ConnectionKind,
    pub points: usize,
    pub vectors_per_point: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub sides: Vec<SideReport>,
}

impl AdaptedReport {
    pub fn side(&self, sign: Sign) -> Option<&SideReport> {
        self.sides.iter().find(|s| s.sign == sign)
    }

    pub fn adapted(&self) -> bool {
        self.sides.iter().all(|s| s.adapted)
    }
}

/// Per-point residuals of the four conditions on one side, maximized over
/// `triples` of constant vectors projected onto the eigenbundles.
pub fn adapted_residuals(
    local: &LocalStructure,
    gamma: &EvaluatedTensor,
    sign: Sign,
    triples: &[[Vec<f64>; 3]],
) -> Result<[f64; 4]> {
    let order = local.order();
    let eta = local.eta();
    let nabla_eta = nabla(gamma, eta)?;
    let tors = torsion(gamma)?;
    let n = local.dim();
    let mut out = [0.0f64; 4];
    let field = |s: Sign, c: &[f64]| local.project(s, &EvaluatedTensor::constant_vector(c, order));
    for [c1, c2, c3] in triples {
        let x = field(sign, c1)?;
        let y = field(sign, c2)?;
        let z = field(sign, c3)?;
        let yo = field(sign.opposite(), c2)?;
        let zo = field(sign.opposite(), c3)?;
        // (1) x^i (∇_i η)_{ab}
        for ab in multi_indices(n, 2) {
            let mut v = 0.0;
            for i in 0..n {
                v += x.value(&[i]) * nabla_eta.value(&[i, ab[0], ab[1]]);
            }
            out[0] = out[0].max(v.abs());
        }
        // (2) P± ∇_x y∓
        let nxy = covariant_vector(gamma, &x, &yo)?;
        out[1] = out[1].max(local.project(sign, &nxy)?.max_abs_value());
        // (3), (4)
        let txy = crate::connections::apply_bilinear(&tors, &x, &y)?;
        out[2] = out[2].max(pair(eta, &txy, &zo)?.value().abs());
        let nzx = covariant_vector(gamma, &z, &x)?;
        let c4 = pair(eta, &txy, &z)?.value() + pair(eta, &nzx, &y)?.value();
        out[3] = out[3].max(c4.abs());
    }
    Ok(out)
}

/// Random triples of constant vectors for one point, reproducible from
/// `(seed, point_index)`.
pub fn random_triples(n: usize, count: usize, seed: u64, point_index: usize) -> Vec<[Vec<f64>; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (point_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    (0..count)
        .map(|_| {
            let mut v = || (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
            [v(), v(), v()]
        })
        .collect()
}

/// Checks the four adaptedness conditions on the requested side(s).
pub fn check_adapted(
    conn: &Connection,
    s: &ParaHermitianStructure,
    side: Side,
    sample: &[Point],
    vectors_per_point: usize,
    seed: u64,
    tol: f64,
) -> Result<AdaptedReport> {
    let signs = side.signs();
    let per_point = sample
        .par_iter()
        .enumerate()
        .map(|(pi, p)| {
            let local = s.local(p, 1)?;
            let gamma = conn.christoffels_at(&local)?;
            let triples = random_triples(s.dim(), vectors_per_point, seed, pi);
            signs
                .iter()
                .map(|&sign| adapted_residuals(&local, &gamma, sign, &triples))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let sides = signs
        .iter()
        .enumerate()
        .map(|(si, &sign)| {
            let conditions: Vec<ConditionResidual> = (0..4)
                .map(|c| {
                    let mut best = ConditionResidual {
                        max: 0.0,
                        point_index: None,
                    };
                    for (pi, r) in per_point.iter().enumerate() {
                        if r[si][c] > best.max || best.point_index.is_none() {
                            best = ConditionResidual {
                                max: r[si][c],
                                point_index: Some(pi),
                            };
                        }
                    }
                    best
                })
                .collect();
            let adapted = conditions.iter().all(|c| c.max <= tol);
            SideReport {
                sign,
                conditions,
                adapted,
            }
        })
        .collect();
    Ok(AdaptedReport {
        kind: conn.kind(),
        points: sample.len(),
        vectors_per_point,
        seed,
        tolerance: tol,
        sides,
    })
}
