use serde::{Deserialize, Serialize};

use crate::corr_core::{distance, PointConfiguration};
use crate::{Error, Result};

/// Largest size accepted by [`enumerate_ffe`] (`7^8 ≈ 5.8e6` functions).
pub const MAX_ENUMERATION_SIZE: usize = 8;

/// A fixed-point-free map `τ: [p] → [p]` (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Endofunction {
    map: Vec<usize>,
}

impl Endofunction {
    /// Fails with [`Error::Size`] for `p < 2` and [`Error::Format`] on an
    /// out-of-range image or a fixed point.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        if map.len() < 2 {
            return Err(Error::Size(format!("endofunction needs p >= 2, got {}", map.len())));
        }
        for (i, &t) in map.iter().enumerate() {
            if t >= map.len() {
                return Err(Error::Format(format!("image {t} of {i} is out of range")));
            }
            if t == i {
                return Err(Error::Format(format!("fixed point at {i}")));
            }
        }
        Ok(Endofunction { map })
    }

    /// Build from 1-based images, e.g. `(2, 3, 2)`.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::Format("1-based images must be positive".into()));
        }
        Self::new(images.iter().map(|&t| t - 1).collect())
    }

    pub fn p(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Directed edges `i → τ(i)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.map.iter().enumerate().map(|(i, &t)| (i, t)).collect()
    }
}

impl TryFrom<Vec<usize>> for Endofunction {
    type Error = Error;
    fn try_from(map: Vec<usize>) -> Result<Self> {
        Self::new(map)
    }
}

impl From<Endofunction> for Vec<usize> {
    fn from(e: Endofunction) -> Self {
        e.map
    }
}

/// All `(p-1)^p` fixed-point-free endofunctions of `[p]` in lexicographic order
/// of their image tuples.
pub fn enumerate_ffe(p: usize) -> Result<Vec<Endofunction>> {
    if p < 2 {
        return Err(Error::Size(format!("enumerate_ffe needs p >= 2, got {p}")));
    }
    if p > MAX_ENUMERATION_SIZE {
        return Err(Error::Size(format!(
            "enumerate_ffe is limited to p <= {MAX_ENUMERATION_SIZE}, got {p}"
        )));
    }
    let first = |i: usize| if i == 0 { 1 } else { 0 };
    let mut cur: Vec<usize> = (0..p).map(first).collect();
    let mut out = Vec::with_capacity((p - 1).pow(p as u32));
    loop {
        out.push(Endofunction { map: cur.clone() });
        // Odometer increment from the last position, skipping fixed points.
        let mut pos = p;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            let mut next = cur[pos] + 1;
            if next == pos {
                next += 1;
            }
            if next < p {
                cur[pos] = next;
                for (j, c) in cur.iter_mut().enumerate().skip(pos + 1) {
                    *c = first(j);
                }
                break;
            }
        }
    }
}

/// Nearest-neighbor map of a configuration, ties broken by lowest index.
pub fn nn_endofunction(config: &PointConfiguration) -> Result<Endofunction> {
    let pts = config.points();
    if pts.len() < 2 {
        return Err(Error::Size(format!("nearest neighbors need n >= 2, got {}", pts.len())));
    }
    let map = (0..pts.len())
        .map(|i| {
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for (j, q) in pts.iter().enumerate() {
                if j == i {
                    continue;
                }
                let dist = distance(&pts[i], q);
                if dist < best_d {
                    best_d = dist;
                    best = j;
                }
            }
            best
        })
        .collect();
    Endofunction::new(map)
}

/// The indicator product `Π_i 1{|x_i - x_{τ(i)}| = min_{j≠i} |x_i - x_j|}`.
pub fn nn_indicator(config: &PointConfiguration, tau: &Endofunction) -> bool {
    let pts = config.points();
    if pts.len() != tau.p() {
        return false;
    }
    (0..pts.len()).all(|i| {
        let own = distance(&pts[i], &pts[tau.apply(i)]);
        (0..pts.len()).filter(|&j| j != i).all(|j| own <= distance(&pts[i], &pts[j]))
    })
}

/// Number of fixed-point-free endofunctions whose nearest-neighbor indicator
/// product equals one. The pin-and-sum inequality states this is at least one.
pub fn pin_and_sum_count(config: &PointConfiguration) -> Result<usize> {
    let all = enumerate_ffe(config.len())?;
    Ok(all.iter().filter(|t| nn_indicator(config, t)).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_order() {
        for p in 2..=5 {
            let all = enumerate_ffe(p).unwrap();
            assert_eq!(all.len(), (p - 1).pow(p as u32));
            assert!(all.windows(2).all(|w| w[0].map < w[1].map));
        }
        assert!(matches!(enumerate_ffe(1), Err(Error::Size(_))));
    }

    #[test]
    fn collinear_nearest_neighbors() {
        let c = PointConfiguration::from_1d(&[0.0, 1.0, 3.0]).unwrap();
        let t = nn_endofunction(&c).unwrap();
        assert_eq!(t, Endofunction::from_one_based(&[2, 1, 2]).unwrap());
        assert!(nn_indicator(&c, &t));
        assert_eq!(pin_and_sum_count(&c).unwrap(), 1);
    }
}
