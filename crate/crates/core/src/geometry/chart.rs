use crate::error::{Error, Result};
use crate::jet::Jet;

/// A coordinate patch of even dimension `2n`.
///
/// When `split` is set the first `n` coordinates span the `+` directions and
/// the last `n` the `-` directions of an adapted chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    coord_names: Vec<String>,
    split: bool,
}

impl Chart {
    pub fn new(coord_names: Vec<String>) -> Result<Chart> {
        let dim = coord_names.len();
        if dim < 2 || !dim.is_multiple_of(2) {
            return Err(Error::InvalidStructure(format!(
                "chart dimension must be even and at least 2, got {dim}"
            )));
        }
        for (i, name) in coord_names.iter().enumerate() {
            if coord_names[..i].contains(name) {
                return Err(Error::InvalidStructure(format!("coordinate `{name}` appears twice")));
            }
        }
        Ok(Chart {
            coord_names,
            split: false,
        })
    }

    /// Marks the first half of the coordinates as `+` directions.
    pub fn with_split(mut self) -> Chart {
        self.split = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.coord_names.len()
    }

    /// Half the dimension.
    pub fn n(&self) -> usize {
        self.dim() / 2
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn has_split(&self) -> bool {
        self.split
    }

    pub fn require_split(&self) -> Result<usize> {
        if self.split {
            Ok(self.n())
        } else {
            Err(Error::MissingSplit)
        }
    }

    pub fn point(&self, coords: Vec<f64>) -> Result<Point> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: coords.len(),
            });
        }
        Point::new(coords)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Point> {
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate {bad}")));
        }
        Ok(Point { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Coordinate functions expanded around this point.
    pub fn seeds(&self, order: usize) -> Vec<Jet> {
        let dim = self.dim();
        (0..dim)
            .map(|i| Jet::seed_coordinate(dim, order, i, self.coords[i]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn odd_dimension_is_rejected() {
        assert!(Chart::new(names(&["x", "y", "z"])).is_err());
        assert!(Chart::new(names(&["x", "x"])).is_err());
    }

    #[test]
    fn split_is_opt_in() {
        let c = Chart::new(names(&["x", "xt"])).unwrap();
        assert_eq!(c.require_split(), Err(Error::MissingSplit));
        assert_eq!(c.with_split().require_split(), Ok(1));
    }

    #[test]
    fn points_must_be_finite() {
        assert!(Point::new(vec![0.0, f64::NAN]).is_err());
    }
}
