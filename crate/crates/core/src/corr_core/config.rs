use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An ordered tuple of pairwise-distinct points of `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointConfiguration {
    points: Vec<Vec<f64>>,
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `<x> = sqrt(1 + |x|^2)`.
pub fn japanese(x: &[f64]) -> f64 {
    (1.0 + x.iter().map(|t| t * t).sum::<f64>()).sqrt()
}

impl PointConfiguration {
    /// Fails with [`Error::Diagonal`] on coincident points or mixed dimensions.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let c = PointConfiguration { points };
        if let Some(p) = c.points.first() {
            if c.points.iter().any(|q| q.len() != p.len()) {
                return Err(Error::Format("points of mixed dimension".into()));
            }
        }
        if let Some((i, j)) = c.first_coincidence() {
            return Err(Error::Diagonal(i, j));
        }
        Ok(c)
    }

    /// Construct without the distinctness check (for degenerate probes).
    pub fn new_unchecked(points: Vec<Vec<f64>>) -> Self {
        PointConfiguration { points }
    }

    pub fn first_coincidence(&self) -> Option<(usize, usize)> {
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                if self.points[i] == self.points[j] {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn from_1d(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| vec![x]).collect())
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        distance(&self.points[i], &self.points[j])
    }

    /// Nearest neighbor of `i` among the indices in `among` (excluding `i`),
    /// lowest index on ties. Returns `None` if no other index is available.
    pub fn nearest_among(&self, i: usize, among: impl IntoIterator<Item = usize>) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in among {
            if j == i {
                continue;
            }
            let dj = self.dist(i, j);
            match best {
                Some((bj, bd)) if dj > bd || (dj == bd && j > bj) => {}
                _ => best = Some((j, dj)),
            }
        }
        best
    }

    /// Nearest neighbor of `i` with lowest-index tie-breaking.
    pub fn nearest(&self, i: usize) -> Option<(usize, f64)> {
        self.nearest_among(i, 0..self.len())
    }

    /// `min_{j != i} |x_i - x_j|`, infinite for a single point.
    pub fn nn_distance(&self, i: usize) -> f64 {
        self.nearest(i).map_or(f64::INFINITY, |(_, d)| d)
    }

    pub fn concat(&self, other: &PointConfiguration) -> PointConfiguration {
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        PointConfiguration { points }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coincident_points_are_rejected() {
        assert_eq!(
            PointConfiguration::from_1d(&[0.0, 1.0, 0.0]),
            Err(Error::Diagonal(0, 2))
        );
    }

    #[test]
    fn nearest_with_ties_prefers_lowest_index() {
        let c = PointConfiguration::from_1d(&[0.0, 1.0, -1.0]).unwrap();
        assert_eq!(c.nearest(0), Some((1, 1.0)));
        let c = PointConfiguration::from_1d(&[0.0, 1.0, 3.0]).unwrap();
        assert_eq!(c.nearest(0).unwrap().0, 1);
        assert_eq!(c.nearest(1).unwrap().0, 0);
        assert_eq!(c.nearest(2).unwrap().0, 1);
    }
}
