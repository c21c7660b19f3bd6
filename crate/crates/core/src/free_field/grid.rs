use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Periodic cubic lattice of `n^d` sites on a box of side `box_length`.
///
/// Site `j` along an axis sits at `x_j = (j - n/2) h`, so the box is centered at
/// the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub d: usize,
    pub n_per_side: usize,
    pub box_length: f64,
}

impl Grid {
    pub fn new(d: usize, n_per_side: usize, box_length: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Range(format!("grid dimension must be 1..=3, got {d}")));
        }
        if n_per_side < 4 || !n_per_side.is_power_of_two() {
            return Err(Error::Range(format!(
                "points per side must be a power of two >= 4, got {n_per_side}"
            )));
        }
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(Error::Range(format!("box length must be positive, got {box_length}")));
        }
        Ok(Grid {
            d,
            n_per_side,
            box_length,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n_per_side as f64
    }

    pub fn sites(&self) -> usize {
        self.n_per_side.pow(self.d as u32)
    }

    /// Volume of one cell, `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Row-major multi-index of a site.
    pub fn multi_index(&self, mut site: usize) -> [usize; 3] {
        let n = self.n_per_side;
        let mut idx = [0; 3];
        for a in (0..self.d).rev() {
            idx[a] = site % n;
            site /= n;
        }
        idx
    }

    pub fn site(&self, idx: &[usize]) -> usize {
        idx[..self.d]
            .iter()
            .fold(0, |acc, &i| acc * self.n_per_side + i % self.n_per_side)
    }

    /// Position of a site.
    pub fn position(&self, site: usize) -> Vec<f64> {
        let h = self.spacing();
        let half = (self.n_per_side / 2) as f64;
        let idx = self.multi_index(site);
        (0..self.d).map(|a| (idx[a] as f64 - half) * h).collect()
    }

    /// Signed integer offset of an index along one axis, in `[-n/2, n/2)`.
    pub fn signed(&self, i: usize) -> i64 {
        let n = self.n_per_side as i64;
        let i = i as i64;
        if i >= n / 2 {
            i - n
        } else {
            i
        }
    }

    /// Periodic displacement of a site from site 0 (the lattice origin of
    /// convolution kernels).
    pub fn displacement(&self, site: usize) -> Vec<f64> {
        let h = self.spacing();
        let idx = self.multi_index(site);
        (0..self.d).map(|a| self.signed(idx[a]) as f64 * h).collect()
    }

    /// Wave vector `2 pi k / l` of a spectral index.
    pub fn wavevector(&self, site: usize) -> Vec<f64> {
        let idx = self.multi_index(site);
        let w = 2.0 * PI / self.box_length;
        (0..self.d).map(|a| self.signed(idx[a]) as f64 * w).collect()
    }

    pub fn wavenumber(&self, site: usize) -> f64 {
        self.wavevector(site).iter().map(|t| t * t).sum::<f64>().sqrt()
    }

    /// Spectral index of `-k`.
    pub fn conjugate(&self, site: usize) -> usize {
        let n = self.n_per_side;
        let idx = self.multi_index(site);
        let neg: Vec<usize> = (0..self.d).map(|a| (n - idx[a]) % n).collect();
        self.site(&neg)
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized multidimensional DFT in place. The forward transform uses
/// `e^{-2 pi i k j / n}`, the inverse `e^{+2 pi i k j / n}`.
pub fn fft_nd(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n_per_side;
    assert_eq!(data.len(), grid.sites());
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        if grid.d == 1 {
            fft.process(data);
            return;
        }
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..grid.d {
            let stride = n.pow((grid.d - 1 - axis) as u32);
            for start in 0..data.len() {
                if !(start / stride).is_multiple_of(n) {
                    continue;
                }
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + i * stride];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[start + i * stride] = *v;
                }
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip_and_conjugate() {
        let g = Grid::new(3, 8, 2.0).unwrap();
        for s in [0, 1, 77, 511] {
            let idx = g.multi_index(s);
            assert_eq!(g.site(&idx), s);
            assert_eq!(g.conjugate(g.conjugate(s)), s);
        }
        assert_eq!(g.position(0), vec![-1.0, -1.0, -1.0]);
        assert_eq!(g.conjugate(0), 0);
    }

    #[test]
    fn fft_nd_matches_direct_sum() {
        let g = Grid::new(2, 4, 1.0).unwrap();
        let data: Vec<Complex64> = (0..16).map(|i| Complex64::new(i as f64, (i * i) as f64 * 0.1)).collect();
        let mut out = data.clone();
        fft_nd(&g, &mut out, false);
        for k in 0..16 {
            let kk = g.multi_index(k);
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..16 {
                let jj = g.multi_index(j);
                let ph = -2.0 * PI * ((kk[0] * jj[0] + kk[1] * jj[1]) as f64) / 4.0;
                s += data[j] * Complex64::from_polar(1.0, ph);
            }
            assert!((s - out[k]).norm() < 1e-10);
        }
        assert!(Grid::new(1, 6, 1.0).is_err());
    }
}
