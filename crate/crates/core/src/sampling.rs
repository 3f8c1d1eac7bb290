//! Seeded random points and polynomial test fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{Point, TensorField};

/// An axis-aligned box of coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Region> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::Domain("region bounds must be finite with lower <= upper".into()));
        }
        Ok(Region { lower, upper })
    }

    /// `[-r, r]` in every one of `dim` coordinates.
    pub fn cube(dim: usize, r: f64) -> Region {
        Region {
            lower: vec![-r; dim],
            upper: vec![r; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Replaces the bounds of one coordinate.
    pub fn with_bounds(mut self, index: usize, lower: f64, upper: f64) -> Region {
        self.lower[index] = lower;
        self.upper[index] = upper;
        self
    }
}

/// `count` points drawn uniformly from `region`, keeping only those accepted
/// by `admit`. Gives up with a domain error if admission is too rare.
pub fn uniform_points(region: &Region, count: usize, seed: u64, admit: impl Fn(&[f64]) -> bool) -> Result<Vec<Point>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while points.len() < count {
        attempts += 1;
        if attempts > 1000 * count.max(1) {
            return Err(Error::Domain("sampling region admits almost no points".into()));
        }
        let coords: Vec<f64> = region
            .lower
            .iter()
            .zip(&region.upper)
            .map(|(&a, &b)| if a == b { a } else { rng.gen_range(a..b) })
            .collect();
        if admit(&coords) {
            points.push(Point::new(coords)?);
        }
    }
    Ok(points)
}

/// A random polynomial in the coordinates listed in `vars`, with every
/// monomial of total degree at most `degree` and coefficients in `[-1, 1]`.
pub fn random_polynomial(rng: &mut impl Rng, vars: &[usize], degree: usize) -> Expr {
    let mut monomials: Vec<Vec<usize>> = vec![vec![]];
    let mut frontier = monomials.clone();
    for _ in 0..degree {
        let mut next = Vec::new();
        for m in &frontier {
            let start = m.last().map_or(0, |&l| vars.iter().position(|&v| v == l).unwrap_or(0));
            for &v in &vars[start..] {
                let mut grown = m.clone();
                grown.push(v);
                next.push(grown);
            }
        }
        monomials.extend(next.iter().cloned());
        frontier = next;
    }
    let mut acc: Option<Expr> = None;
    for m in monomials {
        let c: f64 = rng.gen_range(-1.0..1.0);
        let term = m.iter().fold(Expr::float(c), |t, &v| t * Expr::coord(v));
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    acc.unwrap_or_else(Expr::zero)
}

/// A vector field on a `dim`-dimensional chart whose components are random
/// polynomials. When `vars` is given the field depends only on those
/// coordinates.
pub fn random_polynomial_field(rng: &mut impl Rng, dim: usize, degree: usize, vars: Option<&[usize]>) -> TensorField {
    let all: Vec<usize> = (0..dim).collect();
    let vars = vars.unwrap_or(&all);
    let comps = (0..dim).map(|_| random_polynomial(rng, vars, degree)).collect();
    TensorField::vector(dim, comps).expect("polynomial components bind to the chart")
}

/// A deterministic generator for a named stream, so independent consumers
/// of one seed do not share draws.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
