//! Built-in example manifolds: flat `R^{2n}` and the tangent bundle of a
//! Riemannian base.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::deformations::BTransformation;
use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr};
use crate::geometry::tensor::invert_jet_matrix;
use crate::geometry::{Chart, EvaluatedTensor, Point, TensorField};
use crate::jet::Jet;
use crate::parastructure::{classify, ParaHermitianStructure, CLASSIFICATION_TOL};
use crate::sampling::{uniform_points, Region};

/// `R^{2n}` with coordinates `(x1..xn, xt1..xtn)`, `η(∂_i, ∂̃^j) = δ_i^j` and
/// `K = diag(1, −1)`.
#[derive(Debug, Clone)]
pub struct FlatModel {
    n: usize,
    structure: ParaHermitianStructure,
}

impl FlatModel {
    pub fn new(n: usize) -> Result<FlatModel> {
        if n == 0 {
            return Err(Error::InvalidStructure("flat model needs n >= 1".into()));
        }
        let names: Vec<String> = (1..=n)
            .map(|i| format!("x{i}"))
            .chain((1..=n).map(|i| format!("xt{i}")))
            .collect();
        let chart = Chart::new(names)?.with_split();
        let dim = 2 * n;
        let mut eta = vec![0.0; dim * dim];
        let mut k = vec![0.0; dim * dim];
        for i in 0..n {
            eta[i * dim + n + i] = 1.0;
            eta[(n + i) * dim + i] = 1.0;
            k[i * dim + i] = 1.0;
            k[(n + i) * dim + n + i] = -1.0;
        }
        let structure = ParaHermitianStructure::new(
            chart,
            TensorField::constant(dim, 0, 2, &eta)?,
            TensorField::constant(dim, 1, 1, &k)?,
        )?;
        Ok(FlatModel { n, structure })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn structure(&self) -> &ParaHermitianStructure {
        &self.structure
    }

    pub fn chart(&self) -> &Chart {
        self.structure.chart()
    }

    pub fn region(&self) -> Region {
        Region::cube(2 * self.n, 1.0)
    }

    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Point>> {
        uniform_points(&self.region(), count, seed, |_| true)
    }
}

/// `TM` over a base with metric `g`, split by the Levi-Civita connection of
/// `g` into horizontal `H_i = ∂_i − Γ^k_{ij}v^j ∂_{v^k}` and vertical
/// `V_i = ∂_{v^i}`, with `η(H,H) = η(V,V) = 0`, `η(V_i,H_j) = g_ij` and `K`
/// equal to `+1` on `H` and `−1` on `V`.
#[derive(Debug, Clone)]
pub struct TangentBundleModel {
    n: usize,
    g: Arc<Vec<Expr>>,
    structure: ParaHermitianStructure,
    region: Region,
    pole: Option<usize>,
}

/// `Γ^k_{ij} = ½ g^{kl}(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})` on the base,
/// one order below `g`. Stored as `[k, i, j]`.
pub fn base_christoffels(g: &[Jet], n: usize) -> Result<Vec<Jet>> {
    let order = g[0].order();
    if order == 0 {
        return Err(Error::InsufficientJetOrder {
            operation: "base Christoffel symbols",
            needed: 1,
            available: 0,
        });
    }
    let dim = g[0].dim();
    let g_inv: Vec<Jet> = invert_jet_matrix(g, n)?.iter().map(|j| j.truncate(order - 1)).collect();
    let dg = |l: usize, a: usize, b: usize| g[a * n + b].partial(l);
    let mut lowered = vec![Jet::zero(dim, order - 1); n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                let v = &(&dg(i, j, l)? + &dg(j, i, l)?) - &dg(l, i, j)?;
                lowered[l * n * n + i * n + j] = v.scale(0.5);
            }
        }
    }
    let mut gamma = vec![Jet::zero(dim, order - 1); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let acc = &mut gamma[k * n * n + i * n + j];
                for l in 0..n {
                    acc.add_product(1.0, &g_inv[k * n + l], &lowered[l * n * n + i * n + j]);
                }
            }
        }
    }
    Ok(gamma)
}

/// `g` and `N^k_i = Γ^k_{ij} v^j` at `p`, both at jet order `order`.
fn tm_parts(g: &[Expr], n: usize, p: &Point, order: usize) -> Result<(Vec<Jet>, Vec<Jet>)> {
    let seeds = p.seeds(order + 1);
    let g_hi = g.iter().map(|e| e.eval_jets(&seeds)).collect::<Result<Vec<_>>>()?;
    let gamma = base_christoffels(&g_hi, n)?;
    let dim = 2 * n;
    let mut nonlinear = vec![Jet::zero(dim, order); n * n];
    for k in 0..n {
        for i in 0..n {
            let acc = &mut nonlinear[k * n + i];
            for j in 0..n {
                acc.add_product(1.0, &gamma[k * n * n + i * n + j], &seeds[n + j]);
            }
        }
    }
    let g_lo = g_hi.iter().map(|j| j.truncate(order)).collect();
    Ok((g_lo, nonlinear))
}

impl TangentBundleModel {
    /// `g` lists the `n × n` components row-major as expressions in the base
    /// coordinate names. Velocity coordinates default to `v1..vn`.
    pub fn new(base_names: Vec<String>, velocity_names: Option<Vec<String>>, g: &[&str]) -> Result<TangentBundleModel> {
        let g = g
            .iter()
            .map(|s| parse_expr(s, &base_names).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        TangentBundleModel::from_exprs(base_names, velocity_names, g)
    }

    pub fn from_exprs(base_names: Vec<String>, velocity_names: Option<Vec<String>>, g: Vec<Expr>) -> Result<TangentBundleModel> {
        let n = base_names.len();
        if n == 0 {
            return Err(Error::InvalidStructure("base dimension must be at least 1".into()));
        }
        if g.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: g.len(),
            });
        }
        for e in &g {
            e.bind(n)?;
        }
        let velocity_names = velocity_names.unwrap_or_else(|| (1..=n).map(|i| format!("v{i}")).collect());
        if velocity_names.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: velocity_names.len(),
            });
        }
        let chart = Chart::new(base_names.into_iter().chain(velocity_names).collect())?.with_split();
        let g = Arc::new(g);
        let dim = 2 * n;

        let g_eta = Arc::clone(&g);
        let eta = TensorField::procedure(
            dim,
            0,
            2,
            Arc::new(move |p: &Point, order: usize| {
                let (g, nl) = tm_parts(&g_eta, n, p, order)?;
                Ok(EvaluatedTensor::from_fn(dim, 0, 2, |idx| {
                    let (a, b) = (idx[0], idx[1]);
                    match (a < n, b < n) {
                        (true, true) => {
                            let mut acc = Jet::zero(dim, order);
                            for i in 0..n {
                                acc.add_product(1.0, &g[i * n + b], &nl[i * n + a]);
                                acc.add_product(1.0, &g[a * n + i], &nl[i * n + b]);
                            }
                            acc
                        }
                        (true, false) => g[a * n + b - n].clone(),
                        (false, true) => g[(a - n) * n + b].clone(),
                        (false, false) => Jet::zero(dim, order),
                    }
                }))
            }),
        );

        let g_k = Arc::clone(&g);
        let k = TensorField::procedure(
            dim,
            1,
            1,
            Arc::new(move |p: &Point, order: usize| {
                let (_, nl) = tm_parts(&g_k, n, p, order)?;
                Ok(EvaluatedTensor::from_fn(dim, 1, 1, |idx| {
                    let (row, col) = (idx[0], idx[1]);
                    match (row < n, col < n) {
                        (true, true) => Jet::constant(dim, order, if row == col { 1.0 } else { 0.0 }),
                        (false, true) => nl[(row - n) * n + col].scale(-2.0),
                        (false, false) => Jet::constant(dim, order, if row == col { -1.0 } else { 0.0 }),
                        (true, false) => Jet::zero(dim, order),
                    }
                }))
            }),
        );

        let structure = ParaHermitianStructure::new(chart, eta, k)?;
        Ok(TangentBundleModel {
            n,
            g,
            structure,
            region: Region::cube(dim, 1.0),
            pole: None,
        })
    }

    /// Euclidean base `R^n` with coordinates `x1..xn`.
    pub fn euclidean(n: usize) -> Result<TangentBundleModel> {
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let g: Vec<String> = (0..n * n)
            .map(|k| if k / n == k % n { "1".into() } else { "0".into() })
            .collect();
        let g: Vec<&str> = g.iter().map(String::as_str).collect();
        TangentBundleModel::new(names, None, &g)
    }

    /// The round unit sphere in coordinates `(th, ph)`. Sampling keeps away
    /// from the poles.
    pub fn sphere() -> Result<TangentBundleModel> {
        let mut m = TangentBundleModel::new(vec!["th".into(), "ph".into()], None, &["1", "0", "0", "sin(th)^2"])?;
        m.region = m.region.with_bounds(0, 0.3, PI - 0.3).with_bounds(1, -PI, PI);
        m.pole = Some(0);
        Ok(m)
    }

    pub fn with_region(mut self, region: Region) -> Result<TangentBundleModel> {
        if region.dim() != 2 * self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                found: region.dim(),
            });
        }
        self.region = region;
        Ok(self)
    }

    /// Excludes points with `|sin x^index| <= 0.05`.
    pub fn with_pole_guard(mut self, index: usize) -> TangentBundleModel {
        self.pole = Some(index);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn structure(&self) -> &ParaHermitianStructure {
        &self.structure
    }

    pub fn chart(&self) -> &Chart {
        self.structure.chart()
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn admits(&self, coords: &[f64]) -> bool {
        self.pole.is_none_or(|i| coords[i].sin().abs() > 0.05)
    }

    /// Seeded sample from the model region, checked for a positive-definite
    /// base metric.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Point>> {
        let points = uniform_points(&self.region, count, seed, |c| self.admits(c))?;
        for p in &points {
            self.check_positive_definite(p)?;
        }
        Ok(points)
    }

    /// Base metric components at `p`, row-major.
    pub fn base_metric(&self, p: &Point, order: usize) -> Result<Vec<Jet>> {
        let seeds = p.seeds(order);
        self.g.iter().map(|e| e.eval_jets(&seeds)).collect()
    }

    /// Levi-Civita coefficients of `g` at `p`, `[k, i, j]`.
    pub fn base_christoffels(&self, p: &Point, order: usize) -> Result<Vec<Jet>> {
        base_christoffels(&self.base_metric(p, order + 1)?, self.n)
    }

    /// `N^k_i = Γ^k_{ij} v^j`, row-major in `(k, i)`.
    pub fn nonlinear_connection(&self, p: &Point, order: usize) -> Result<Vec<Jet>> {
        Ok(tm_parts(&self.g, self.n, p, order)?.1)
    }

    /// Cholesky test on the values of `g` at `p`.
    pub fn check_positive_definite(&self, p: &Point) -> Result<()> {
        let n = self.n;
        let g: Vec<f64> = self.base_metric(p, 0)?.iter().map(Jet::value).collect();
        for i in 0..n {
            for j in 0..i {
                if (g[i * n + j] - g[j * n + i]).abs() > 1e-12 {
                    return Err(Error::InvalidStructure("base metric is not symmetric".into()));
                }
            }
        }
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
                if i == j {
                    let d = g[i * n + i] - s;
                    if !(d > 0.0) {
                        return Err(Error::NotPositiveDefinite);
                    }
                    l[i * n + i] = d.sqrt();
                } else {
                    l[i * n + j] = (g[i * n + j] - s) / l[j * n + j];
                }
            }
        }
        Ok(())
    }

    /// The horizontal lift `H_i`.
    pub fn horizontal(&self, i: usize) -> TensorField {
        let (g, n) = (Arc::clone(&self.g), self.n);
        TensorField::procedure(
            2 * n,
            1,
            0,
            Arc::new(move |p: &Point, order: usize| {
                let (_, nl) = tm_parts(&g, n, p, order)?;
                EvaluatedTensor::vector(
                    (0..2 * n)
                        .map(|a| {
                            if a < n {
                                Jet::constant(2 * n, order, if a == i { 1.0 } else { 0.0 })
                            } else {
                                nl[(a - n) * n + i].scale(-1.0)
                            }
                        })
                        .collect(),
                )
            }),
        )
    }

    /// `V_i = ∂_{v^i}`.
    pub fn vertical(&self, i: usize) -> TensorField {
        TensorField::coordinate_vector(2 * self.n, self.n + i)
    }

    /// The two-form `b = b_ij dx^i ⊗ dx^j` on `TM`, with `b_ij` given as
    /// expressions in the full chart coordinates.
    pub fn two_form(&self, b: &[&str]) -> Result<TensorField> {
        let n = self.n;
        if b.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: b.len(),
            });
        }
        let names = self.chart().coord_names();
        let dim = 2 * n;
        let mut exprs = vec![Expr::zero(); dim * dim];
        for i in 0..n {
            for j in 0..n {
                exprs[i * dim + j] = parse_expr(b[i * n + j], names)?;
            }
        }
        TensorField::from_exprs(dim, 0, 2, exprs)
    }

    /// B-transformation by `b = b_ij(x,v) dx^i ⊗ dx^j`. The base must be
    /// para-Kähler on `sample`, which for this model means `g` is flat.
    pub fn b_field(&self, b: &[&str], sample: &[Point]) -> Result<BTransformation> {
        let report = classify(&self.structure, sample, CLASSIFICATION_TOL)?;
        if !report.para_kahler {
            let r = &report.residuals;
            return Err(Error::NotParaKahler {
                residual: r.n_plus.max(r.n_minus).max(r.d_omega),
            });
        }
        BTransformation::b_transform(&self.structure, self.two_form(b)?, sample)
    }
}

/// A model addressable by name.
#[derive(Debug, Clone)]
pub enum Model {
    Flat(FlatModel),
    TangentBundle(TangentBundleModel),
    Explicit {
        structure: ParaHermitianStructure,
        region: Region,
    },
}

impl Model {
    pub fn structure(&self) -> &ParaHermitianStructure {
        match self {
            Model::Flat(m) => m.structure(),
            Model::TangentBundle(m) => m.structure(),
            Model::Explicit { structure, .. } => structure,
        }
    }

    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Point>> {
        match self {
            Model::Flat(m) => m.sample(count, seed),
            Model::TangentBundle(m) => m.sample(count, seed),
            Model::Explicit { region, .. } => uniform_points(region, count, seed, |_| true),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Flat(_) => "flat",
            Model::TangentBundle(_) => "tangent_bundle",
            Model::Explicit { .. } => "explicit",
        }
    }
}
