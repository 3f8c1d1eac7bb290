//! Almost para-Hermitian structures `(η, K)` and the quantities derived from
//! them: `ω`, the projections `P±`, the maps `ρ±`, the Nijenhuis tensor, `Φ`
//! and the classification flags.

use serde::Serialize;

use crate::brackets::GeneralizedVector;
use crate::connections::levi_civita_coefficients;
use crate::error::{Error, Result};
use crate::geometry::tensor::{det_values, multi_indices};
use crate::geometry::{
    apply, exterior_derivative, flat, lie_bracket, metric_inverse, pair, sharp, Chart, EvaluatedTensor, Point,
    TensorField, SINGULAR_DET,
};
use crate::jet::Jet;

/// Default tolerance for [`validate_structure`].
pub const VALIDATION_TOL: f64 = 1e-10;
/// Default tolerance for [`classify`], applied to scale-normalized residuals.
pub const CLASSIFICATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// The pair `(η, K)` on a chart.
#[derive(Debug, Clone)]
pub struct ParaHermitianStructure {
    chart: Chart,
    eta: TensorField,
    k: TensorField,
}

impl ParaHermitianStructure {
    pub fn new(chart: Chart, eta: TensorField, k: TensorField) -> Result<ParaHermitianStructure> {
        eta.expect_rank(0, 2)?;
        k.expect_rank(1, 1)?;
        for field in [&eta, &k] {
            if field.dim() != chart.dim() {
                return Err(Error::DimensionMismatch {
                    expected: chart.dim(),
                    found: field.dim(),
                });
            }
        }
        Ok(ParaHermitianStructure { chart, eta, k })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn eta(&self) -> &TensorField {
        &self.eta
    }

    pub fn k(&self) -> &TensorField {
        &self.k
    }

    /// Same metric, different `K`.
    pub fn with_k(&self, k: TensorField) -> Result<ParaHermitianStructure> {
        ParaHermitianStructure::new(self.chart.clone(), self.eta.clone(), k)
    }

    /// Evaluates the structure at `p` for fields of jet order `order`.
    ///
    /// `η` and `K` are expanded one order higher so that connection
    /// coefficients built from their first derivatives come out at `order`.
    pub fn local(&self, p: &Point, order: usize) -> Result<LocalStructure> {
        let eta = self.eta.eval(p, order + 1)?;
        let k = self.k.eval(p, order + 1)?;
        LocalStructure::from_parts(p.clone(), order, eta, k)
    }
}

/// A structure evaluated to jets at one point.
#[derive(Debug, Clone)]
pub struct LocalStructure {
    point: Point,
    order: usize,
    eta: EvaluatedTensor,
    eta_inv: EvaluatedTensor,
    k: EvaluatedTensor,
    omega: EvaluatedTensor,
    p_plus: EvaluatedTensor,
    p_minus: EvaluatedTensor,
}

impl LocalStructure {
    /// `eta` and `k` should carry jets of order `order + 1`.
    pub fn from_parts(point: Point, order: usize, eta: EvaluatedTensor, k: EvaluatedTensor) -> Result<LocalStructure> {
        eta.expect_rank(0, 2)?;
        k.expect_rank(1, 1)?;
        let n = eta.dim();
        let eta_inv = metric_inverse(&eta)?;
        let inner = eta.order().min(k.order());
        let omega = EvaluatedTensor::from_fn(n, 0, 2, |idx| {
            let mut acc = Jet::zero(n, inner);
            for m in 0..n {
                acc.add_product(1.0, k.get(&[m, idx[0]]), eta.get(&[m, idx[1]]));
            }
            acc
        });
        let half = |s: f64| {
            EvaluatedTensor::from_fn(n, 1, 1, |idx| {
                let delta = if idx[0] == idx[1] { 0.5 } else { 0.0 };
                k.get(idx).scale(0.5 * s).add_scalar(delta)
            })
        };
        let p_plus = half(1.0);
        let p_minus = half(-1.0);
        Ok(LocalStructure {
            point,
            order,
            eta,
            eta_inv,
            k,
            omega,
            p_plus,
            p_minus,
        })
    }

    pub fn point(&self) -> &Point {
        &self.point
    }

    pub fn dim(&self) -> usize {
        self.eta.dim()
    }

    /// Jet order of the fields this structure serves.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn eta(&self) -> &EvaluatedTensor {
        &self.eta
    }

    pub fn eta_inv(&self) -> &EvaluatedTensor {
        &self.eta_inv
    }

    pub fn k(&self) -> &EvaluatedTensor {
        &self.k
    }

    pub fn omega(&self) -> &EvaluatedTensor {
        &self.omega
    }

    pub fn projector(&self, sign: Sign) -> &EvaluatedTensor {
        match sign {
            Sign::Plus => &self.p_plus,
            Sign::Minus => &self.p_minus,
        }
    }

    pub fn project(&self, sign: Sign, x: &EvaluatedTensor) -> Result<EvaluatedTensor> {
        apply(self.projector(sign), x)
    }

    /// `P±∂_i` as a field, at the structure's field order.
    pub fn projected_basis(&self, sign: Sign, i: usize) -> EvaluatedTensor {
        let p = self.projector(sign);
        let n = self.dim();
        EvaluatedTensor::from_fn(n, 1, 0, |idx| p.get(&[idx[0], i]).truncate(self.order))
    }

    pub fn metric(&self, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<Jet> {
        pair(&self.eta, x, y)
    }

    pub fn flat(&self, x: &EvaluatedTensor) -> Result<EvaluatedTensor> {
        flat(&self.eta, x)
    }

    pub fn sharp(&self, xi: &EvaluatedTensor) -> Result<EvaluatedTensor> {
        sharp(&self.eta_inv, xi)
    }

    /// Largest absolute component of `η` and `K`, the scale used to
    /// normalize classification residuals.
    pub fn scale(&self) -> f64 {
        self.eta.max_abs_value().max(self.k.max_abs_value())
    }

    /// Levi-Civita coefficients of `η` at the field order.
    pub fn levi_civita(&self) -> Result<EvaluatedTensor> {
        levi_civita_coefficients(&self.eta, &self.eta_inv)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub points: usize,
    pub eta_symmetry: f64,
    pub k_squared: f64,
    pub anti_isometry: f64,
    pub trace: f64,
    pub omega_antisymmetry: f64,
    pub projector_idempotence: f64,
    pub projector_sum: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ValidationReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.eta_symmetry,
            self.k_squared,
            self.anti_isometry,
            self.trace,
            self.omega_antisymmetry,
            self.projector_idempotence,
            self.projector_sum,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for m in 0..n {
            let aim = a[i * n + m];
            if aim == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aim * b[m * n + j];
            }
        }
    }
    out
}

/// Checks the defining identities of an almost para-Hermitian structure at
/// every sample point.
pub fn validate_structure(s: &ParaHermitianStructure, sample: &[Point], tol: f64) -> Result<ValidationReport> {
    let n = s.dim();
    let mut report = ValidationReport {
        points: sample.len(),
        tolerance: tol,
        ..ValidationReport::default()
    };
    let worst = |slot: &mut f64, v: f64| *slot = slot.max(v);
    for p in sample {
        let eta = s.eta.eval(p, 0)?.values();
        let k = s.k.eval(p, 0)?.values();
        let det = det_values(&eta, n);
        if det.abs() < SINGULAR_DET || !det.is_finite() {
            return Err(Error::SingularMetric { det: det.abs() });
        }
        let k2 = matmul(&k, &k, n);
        let mut trace = 0.0;
        for i in 0..n {
            trace += k[i * n + i];
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst(&mut report.k_squared, (k2[i * n + j] - delta).abs());
                worst(&mut report.eta_symmetry, (eta[i * n + j] - eta[j * n + i]).abs());
                let mut kk = 0.0;
                let mut om_ij = 0.0;
                let mut om_ji = 0.0;
                for a in 0..n {
                    om_ij += k[a * n + i] * eta[a * n + j];
                    om_ji += k[a * n + j] * eta[a * n + i];
                    for b in 0..n {
                        kk += k[a * n + i] * k[b * n + j] * eta[a * n + b];
                    }
                }
                worst(&mut report.anti_isometry, (kk + eta[i * n + j]).abs());
                worst(&mut report.omega_antisymmetry, (om_ij + om_ji).abs());
                // P±² − P± = ±(K² − 1)/4, so idempotence follows K² = 1;
                // it is still measured directly.
                for sign in [1.0, -1.0] {
                    let pm = |r: usize, c: usize| 0.5 * (if r == c { 1.0 } else { 0.0 } + sign * k[r * n + c]);
                    let mut sq = 0.0;
                    for m in 0..n {
                        sq += pm(i, m) * pm(m, j);
                    }
                    worst(&mut report.projector_idempotence, (sq - pm(i, j)).abs());
                }
                let plus = 0.5 * (delta + k[i * n + j]);
                let minus = 0.5 * (delta - k[i * n + j]);
                worst(&mut report.projector_sum, (plus + minus - delta).abs());
            }
        }
        worst(&mut report.trace, trace.abs());
    }
    report.passed = report.max_residual() <= tol;
    Ok(report)
}

/// `ρ±(X) = x± + η(x∓)`.
pub fn rho(local: &LocalStructure, sign: Sign, x: &EvaluatedTensor) -> Result<GeneralizedVector> {
    let vector = local.project(sign, x)?;
    let other = local.project(sign.opposite(), x)?;
    Ok(GeneralizedVector::new(vector, local.flat(&other)?))
}

/// Inverse of [`rho`] for either sign: the vector part plus `η⁻¹` of the
/// covector part.
pub fn rho_inv(local: &LocalStructure, e: &GeneralizedVector) -> Result<EvaluatedTensor> {
    e.vector().try_add(&local.sharp(e.covector())?)
}

/// `N^k_{ij}` from the coordinate expression of the Nijenhuis tensor.
pub fn nijenhuis_tensor(local: &LocalStructure) -> Result<EvaluatedTensor> {
    let k = local.k();
    let n = local.dim();
    let dk = (0..n).map(|i| k.partial(i)).collect::<Result<Vec<_>>>()?;
    let order = local.order();
    Ok(EvaluatedTensor::from_fn(n, 1, 2, |idx| {
        let (c, i, j) = (idx[0], idx[1], idx[2]);
        let mut acc = Jet::zero(n, order);
        for m in 0..n {
            acc.add_product(1.0, k.get(&[m, i]), dk[m].get(&[c, j]));
            acc.add_product(-1.0, k.get(&[m, j]), dk[m].get(&[c, i]));
            acc.add_product(-1.0, k.get(&[c, m]), dk[i].get(&[m, j]));
            acc.add_product(1.0, k.get(&[c, m]), dk[j].get(&[m, i]));
        }
        acc.scale(0.25)
    }))
}

/// `N_K(X,Y) = ¼([X,Y] + [KX,KY] − K([KX,Y] + [X,KY]))`, from Lie brackets
/// of the fields.
pub fn nijenhuis_brackets(local: &LocalStructure, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    let k = local.k();
    let kx = apply(k, x)?;
    let ky = apply(k, y)?;
    let inner = lie_bracket(&kx, y)?.try_add(&lie_bracket(x, &ky)?)?;
    let total = lie_bracket(x, y)?
        .try_add(&lie_bracket(&kx, &ky)?)?
        .try_sub(&apply(k, &inner)?)?;
    Ok(total.scale(0.25))
}

/// `N_K(X,Y) = P₊[P₋X,P₋Y] + P₋[P₊X,P₊Y]`.
pub fn nijenhuis_projectors(local: &LocalStructure, x: &EvaluatedTensor, y: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    let mut total: Option<EvaluatedTensor> = None;
    for sign in [Sign::Plus, Sign::Minus] {
        let a = local.project(sign, x)?;
        let b = local.project(sign, y)?;
        let term = local.project(sign.opposite(), &lie_bracket(&a, &b)?)?;
        total = Some(match total {
            None => term,
            Some(t) => t.try_add(&term)?,
        });
    }
    Ok(total.expect("two terms"))
}

/// `(∇_i K)^k_j` stored as `[k, i, j]`, for connection coefficients `gamma`.
pub fn covariant_k(local: &LocalStructure, gamma: &EvaluatedTensor) -> Result<EvaluatedTensor> {
    crate::connections::covariant_endomorphism(gamma, local.k())
}

/// `¼((∇_{KX}K)Y + (∇_XK)KY − (∇_{KY}K)X − (∇_YK)KX)` for a torsionless
/// connection `gamma`.
pub fn nijenhuis_connection(
    local: &LocalStructure,
    gamma: &EvaluatedTensor,
    x: &EvaluatedTensor,
    y: &EvaluatedTensor,
) -> Result<EvaluatedTensor> {
    let nk = covariant_k(local, gamma)?;
    let k = local.k();
    let n = local.dim();
    let kx = apply(k, x)?;
    let ky = apply(k, y)?;
    let order = nk.order().min(x.order()).min(y.order());
    let term = |dir: &EvaluatedTensor, arg: &EvaluatedTensor, c: usize| {
        let mut acc = Jet::zero(n, order);
        for i in 0..n {
            for j in 0..n {
                let t = dir.get(&[i]) * arg.get(&[j]);
                acc.add_product(1.0, nk.get(&[c, i, j]), &t);
            }
        }
        acc
    };
    let comps = (0..n)
        .map(|c| {
            let mut acc = term(&kx, y, c);
            acc.axpy(1.0, &term(x, &ky, c));
            acc.axpy(-1.0, &term(&ky, x, c));
            acc.axpy(-1.0, &term(y, &kx, c));
            acc.scale(0.25)
        })
        .collect();
    EvaluatedTensor::vector(comps)
}

/// `N_{ijk} = η(N(∂_i,∂_j), ∂_k)`.
pub fn nijenhuis_form(local: &LocalStructure) -> Result<EvaluatedTensor> {
    let nt = nijenhuis_tensor(local)?;
    let n = local.dim();
    let order = local.order();
    Ok(EvaluatedTensor::from_fn(n, 0, 3, |idx| {
        let mut acc = Jet::zero(n, order);
        for m in 0..n {
            acc.add_product(1.0, nt.get(&[m, idx[0], idx[1]]), local.eta().get(&[m, idx[2]]));
        }
        acc
    }))
}

/// `N±(X,Y,Z) = N_K(P±X, P±Y, P±Z)` as a `(0,3)` tensor.
pub fn n_sign(local: &LocalStructure, sign: Sign) -> Result<EvaluatedTensor> {
    project_slots(local, &nijenhuis_form(local)?, &[sign, sign, sign])
}

/// Inserts `P_{signs[s]}` into slot `s` of a covariant tensor.
pub fn project_slots(local: &LocalStructure, w: &EvaluatedTensor, signs: &[Sign]) -> Result<EvaluatedTensor> {
    let (upper, k) = w.rank();
    if upper != 0 || k != signs.len() {
        return Err(Error::RankMismatch {
            expected_upper: 0,
            expected_lower: signs.len(),
            upper,
            lower: k,
        });
    }
    let n = w.dim();
    let mut current = w.clone();
    for (slot, &sign) in signs.iter().enumerate() {
        let p = local.projector(sign);
        let order = current.order().min(p.order());
        let prev = current;
        current = EvaluatedTensor::from_fn(n, 0, k, |idx| {
            let mut acc = Jet::zero(n, order);
            let mut src = idx.to_vec();
            for i in 0..n {
                src[slot] = i;
                acc.add_product(1.0, prev.get(&src), p.get(&[i, idx[slot]]));
            }
            acc
        });
    }
    Ok(current)
}

/// The `(+plus, −(k−plus))` part of a covariant `k`-tensor: the sum over all
/// ways of projecting `plus` slots onto `T₊` and the rest onto `T₋`.
pub fn bigraded_part(local: &LocalStructure, w: &EvaluatedTensor, plus: usize) -> Result<EvaluatedTensor> {
    let k = w.rank().1;
    if plus > k {
        return Err(Error::InvalidStructure(format!("type (+{plus}) exceeds form degree {k}")));
    }
    let mut total = EvaluatedTensor::zeros(w.dim(), 0, k, w.order().min(local.order() + 1));
    for mask in 0u32..(1 << k) {
        if mask.count_ones() as usize != plus {
            continue;
        }
        let signs: Vec<Sign> = (0..k)
            .map(|s| if mask & (1 << s) != 0 { Sign::Plus } else { Sign::Minus })
            .collect();
        total = total.try_add(&project_slots(local, w, &signs)?)?;
    }
    Ok(total)
}

/// `Φ_{ijk} = η((∇̊_i K)∂_j, ∂_k)`.
pub fn phi_tensor(local: &LocalStructure) -> Result<EvaluatedTensor> {
    let lc = local.levi_civita()?;
    let nk = covariant_k(local, &lc)?;
    let n = local.dim();
    let order = nk.order();
    Ok(EvaluatedTensor::from_fn(n, 0, 3, |idx| {
        let mut acc = Jet::zero(n, order);
        for m in 0..n {
            acc.add_product(1.0, nk.get(&[m, idx[0], idx[1]]), local.eta().get(&[m, idx[2]]));
        }
        acc
    }))
}

/// `±½[Φ(x±,y±,z±) − Φ(y±,x±,z±)]`, which equals `N±`. The sign flips on the
/// minus side because `∇̊P₋ = −½∇̊K`.
pub fn n_sign_from_phi(local: &LocalStructure, sign: Sign) -> Result<EvaluatedTensor> {
    let phi = project_slots(local, &phi_tensor(local)?, &[sign, sign, sign])?;
    let n = local.dim();
    Ok(EvaluatedTensor::from_fn(n, 0, 3, |idx| {
        (phi.get(idx) - phi.get(&[idx[1], idx[0], idx[2]])).scale(0.5 * sign.factor())
    }))
}

/// `(w(a,b,c) + w(b,c,a) + w(c,a,b))` componentwise.
pub fn cyclic_sum(w: &EvaluatedTensor) -> EvaluatedTensor {
    let n = w.dim();
    EvaluatedTensor::from_fn(n, 0, 3, |idx| {
        let (a, b, c) = (idx[0], idx[1], idx[2]);
        let mut acc = w.get(&[a, b, c]).clone();
        acc.axpy(1.0, w.get(&[b, c, a]));
        acc.axpy(1.0, w.get(&[c, a, b]));
        acc
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClassificationResiduals {
    pub n_plus: f64,
    pub n_minus: f64,
    pub nearly: f64,
    pub d_omega: f64,
    /// `dω^{(+3,−0)}`, `dω^{(+2,−1)}`, `dω^{(+1,−2)}`, `dω^{(+0,−3)}`.
    pub d_omega_parts: [f64; 4],
    pub nabla_k: f64,
    pub cyclic_plus: f64,
    pub cyclic_minus: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub points: usize,
    pub tolerance: f64,
    pub p_integrable: bool,
    pub n_integrable: bool,
    pub nearly_para_kahler: bool,
    pub almost_para_kahler: bool,
    pub para_kahler: bool,
    pub p_para_kahler: bool,
    pub n_para_kahler: bool,
    pub levi_civita_parallel: bool,
    /// Para-Kähler agrees with `∇̊K = 0` and both cyclic `N±` identities for
    /// `dω^{(+3,−0)}` and `dω^{(+0,−3)}` hold.
    pub consistent: bool,
    pub residuals: ClassificationResiduals,
}

/// Local classification data at one point, scale-normalized.
pub fn classification_residuals(local: &LocalStructure) -> Result<ClassificationResiduals> {
    let scale = local.scale().max(f64::MIN_POSITIVE);
    let norm = |t: &EvaluatedTensor| t.max_abs_value() / scale;
    let n_plus = n_sign(local, Sign::Plus)?;
    let n_minus = n_sign(local, Sign::Minus)?;
    let phi = phi_tensor(local)?;
    let dim = local.dim();
    let nearly = EvaluatedTensor::from_fn(dim, 0, 3, |idx| phi.get(idx) + phi.get(&[idx[1], idx[0], idx[2]]));
    let d_omega = exterior_derivative(local.omega())?;
    let mut parts = [0.0; 4];
    let mut part_tensors = Vec::with_capacity(4);
    for (slot, plus) in [3usize, 2, 1, 0].into_iter().enumerate() {
        let t = bigraded_part(local, &d_omega, plus)?;
        parts[slot] = norm(&t);
        part_tensors.push(t);
    }
    let lc = local.levi_civita()?;
    let nabla_k = covariant_k(local, &lc)?;
    let cyc_plus = part_tensors[0].try_sub(&cyclic_sum(&n_plus))?;
    let cyc_minus = part_tensors[3].try_add(&cyclic_sum(&n_minus))?;
    Ok(ClassificationResiduals {
        n_plus: norm(&n_plus),
        n_minus: norm(&n_minus),
        nearly: norm(&nearly),
        d_omega: norm(&d_omega),
        d_omega_parts: parts,
        nabla_k: norm(&nabla_k),
        cyclic_plus: norm(&cyc_plus),
        cyclic_minus: norm(&cyc_minus),
    })
}

fn merge_max(into: &mut ClassificationResiduals, r: &ClassificationResiduals) {
    into.n_plus = into.n_plus.max(r.n_plus);
    into.n_minus = into.n_minus.max(r.n_minus);
    into.nearly = into.nearly.max(r.nearly);
    into.d_omega = into.d_omega.max(r.d_omega);
    for (a, b) in into.d_omega_parts.iter_mut().zip(r.d_omega_parts) {
        *a = a.max(b);
    }
    into.nabla_k = into.nabla_k.max(r.nabla_k);
    into.cyclic_plus = into.cyclic_plus.max(r.cyclic_plus);
    into.cyclic_minus = into.cyclic_minus.max(r.cyclic_minus);
}

/// Classification flags from maximal residuals over the sample.
pub fn classify(s: &ParaHermitianStructure, sample: &[Point], tol: f64) -> Result<ClassificationReport> {
    use rayon::prelude::*;
    let per_point = sample
        .par_iter()
        .map(|p| classification_residuals(&s.local(p, 1)?))
        .collect::<Result<Vec<_>>>()?;
    let mut r = ClassificationResiduals::default();
    for pr in &per_point {
        merge_max(&mut r, pr);
    }
    Ok(report_from_residuals(sample.len(), tol, r))
}

pub fn report_from_residuals(points: usize, tol: f64, r: ClassificationResiduals) -> ClassificationReport {
    let ok = |v: f64| v <= tol;
    let [d30, d21, d12, d03] = r.d_omega_parts;
    let p_integrable = ok(r.n_plus);
    let n_integrable = ok(r.n_minus);
    let almost = ok(r.d_omega);
    let para_kahler = almost && p_integrable && n_integrable;
    let levi_civita_parallel = ok(r.nabla_k);
    ClassificationReport {
        points,
        tolerance: tol,
        p_integrable,
        n_integrable,
        nearly_para_kahler: ok(r.nearly),
        almost_para_kahler: almost,
        para_kahler,
        p_para_kahler: p_integrable && ok(d30) && ok(d21),
        n_para_kahler: n_integrable && ok(d12) && ok(d03),
        levi_civita_parallel,
        consistent: para_kahler == levi_civita_parallel && ok(r.cyclic_plus) && ok(r.cyclic_minus),
        residuals: r,
    }
}

/// Every multi-index of rank 3, handy for componentwise comparisons.
pub fn triples(n: usize) -> Vec<Vec<usize>> {
    multi_indices(n, 3)
}
