use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::grid::{fft_nd, Grid};
use crate::{Error, Result};

/// One sample of the fractional massless free field on a periodic grid.
///
/// `spectral[k]` are the Fourier coefficients with
/// `φ_j = l^{-d} Σ_k spectral[k] e^{2πi k·j/n}` and
/// `E|spectral[k]|^2 = l^d |ξ_k|^{-(d - 2[φ])}`.
#[derive(Clone, Debug)]
pub struct LatticeField {
    pub grid: Grid,
    pub dim_phi: f64,
    pub seed: u64,
    pub index: u64,
    pub spectral: Vec<Complex64>,
    pub real_space: Vec<f64>,
}

/// Spectral variance `l^d |ξ_k|^{-(d-2[φ])}` per mode; zero for the zero mode.
pub fn spectral_variance(grid: &Grid, dim_phi: f64) -> Vec<f64> {
    let vol = grid.box_length.powi(grid.d as i32);
    let s = grid.d as f64 - 2.0 * dim_phi;
    (0..grid.sites())
        .map(|k| if k == 0 { 0.0 } else { vol * grid.wavenumber(k).powf(-s) })
        .collect()
}

fn check_dim(grid: &Grid, dim_phi: f64) -> Result<()> {
    if !(dim_phi > 0.0 && dim_phi < grid.d as f64 / 2.0) {
        return Err(Error::Range(format!(
            "[φ] must lie in (0, d/2), got {dim_phi} for d = {}",
            grid.d
        )));
    }
    Ok(())
}

/// Precomputed per-mode standard deviations and conjugate partners.
#[derive(Clone, Debug)]
pub struct Sampler {
    pub grid: Grid,
    pub dim_phi: f64,
    std: Vec<f64>,
    partner: Vec<usize>,
}

impl Sampler {
    pub fn new(grid: &Grid, dim_phi: f64) -> Result<Self> {
        check_dim(grid, dim_phi)?;
        Ok(Sampler {
            grid: *grid,
            dim_phi,
            std: spectral_variance(grid, dim_phi).into_iter().map(f64::sqrt).collect(),
            partner: (0..grid.sites()).map(|k| grid.conjugate(k)).collect(),
        })
    }

    /// Spectral coefficients of sample `index` of stream `seed`.
    ///
    /// Each sample draws from its own ChaCha stream `(seed, index)`, so samples
    /// can be generated in any order and on any number of workers. Modes paired
    /// with their conjugate split the variance between real and imaginary
    /// parts; self-conjugate modes are real.
    pub fn spectral(&self, seed: u64, index: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut c = vec![Complex64::new(0.0, 0.0); self.grid.sites()];
        for k in 1..c.len() {
            let p = self.partner[k];
            if p == k {
                let z: f64 = rng.sample(StandardNormal);
                c[k] = Complex64::new(self.std[k] * z, 0.0);
            } else if k < p {
                let s = self.std[k] * std::f64::consts::FRAC_1_SQRT_2;
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                c[k] = Complex64::new(s * re, s * im);
                c[p] = c[k].conj();
            }
        }
        c
    }

    pub fn field(&self, seed: u64, index: u64) -> LatticeField {
        let spectral = self.spectral(seed, index);
        let real_space = to_real_space(&self.grid, &spectral);
        LatticeField {
            grid: self.grid,
            dim_phi: self.dim_phi,
            seed,
            index,
            spectral,
            real_space,
        }
    }

    /// Apply `f` to samples `0..n` of stream `seed` in parallel; results come
    /// back in sample order. The fields passed to `f` carry only spectral
    /// coefficients (see [`LatticeField::with_real_space`]).
    pub fn map<T, F>(&self, seed: u64, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&LatticeField) -> Result<T> + Sync,
    {
        (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let field = LatticeField {
                    grid: self.grid,
                    dim_phi: self.dim_phi,
                    seed,
                    index: i,
                    real_space: Vec::new(),
                    spectral: self.spectral(seed, i),
                };
                f(&field)
            })
            .collect()
    }
}

/// Spectral coefficients of sample `index` of stream `seed`.
pub fn sample_spectral(grid: &Grid, dim_phi: f64, seed: u64, index: u64) -> Result<Vec<Complex64>> {
    Ok(Sampler::new(grid, dim_phi)?.spectral(seed, index))
}

/// `l^{-d} IDFT(coeffs)`, returning the real part.
pub fn to_real_space(grid: &Grid, coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    fft_nd(grid, &mut buf, true);
    let norm = grid.box_length.powi(grid.d as i32).recip();
    buf.iter().map(|z| z.re * norm).collect()
}

/// Largest `|Im| / max |Re|` of the inverse transform of `coeffs`.
pub fn imaginary_residual(grid: &Grid, coeffs: &[Complex64]) -> f64 {
    let mut buf = coeffs.to_vec();
    fft_nd(grid, &mut buf, true);
    let re = buf.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let im = buf.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if re == 0.0 {
        im
    } else {
        im / re
    }
}

/// Sample `index` of stream `seed`.
pub fn sample_field_indexed(grid: &Grid, dim_phi: f64, seed: u64, index: u64) -> Result<LatticeField> {
    Ok(Sampler::new(grid, dim_phi)?.field(seed, index))
}

/// Sample 0 of stream `seed`.
pub fn sample_field(grid: &Grid, dim_phi: f64, seed: u64) -> Result<LatticeField> {
    sample_field_indexed(grid, dim_phi, seed, 0)
}

/// Apply `f` to samples `0..n` of stream `seed`; see [`Sampler::map`].
pub fn map_samples<T, F>(grid: &Grid, dim_phi: f64, seed: u64, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&LatticeField) -> Result<T> + Sync,
{
    Sampler::new(grid, dim_phi)?.map(seed, n, f)
}

impl LatticeField {
    /// Field with the real-space values filled in (samples from
    /// [`map_samples`] carry only the spectral coefficients).
    pub fn with_real_space(mut self) -> Self {
        if self.real_space.is_empty() {
            self.real_space = to_real_space(&self.grid, &self.spectral);
        }
        self
    }

    /// `a φ_1 + b φ_2` on the same grid.
    pub fn combine(&self, a: f64, other: &LatticeField, b: f64) -> Result<LatticeField> {
        if self.grid != other.grid {
            return Err(Error::Format("fields live on different grids".into()));
        }
        let spectral: Vec<Complex64> = self
            .spectral
            .iter()
            .zip(&other.spectral)
            .map(|(x, y)| x * a + y * b)
            .collect();
        let real_space = to_real_space(&self.grid, &spectral);
        Ok(LatticeField {
            grid: self.grid,
            dim_phi: self.dim_phi,
            seed: self.seed,
            index: self.index,
            spectral,
            real_space,
        })
    }

    /// The identically zero field.
    pub fn zero(grid: &Grid, dim_phi: f64) -> LatticeField {
        LatticeField {
            grid: *grid,
            dim_phi,
            seed: 0,
            index: 0,
            spectral: vec![Complex64::new(0.0, 0.0); grid.sites()],
            real_space: vec![0.0; grid.sites()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_real() {
        let g = Grid::new(2, 16, 4.0).unwrap();
        let a = sample_field(&g, 0.4, 7).unwrap();
        let b = sample_field(&g, 0.4, 7).unwrap();
        assert_eq!(a.real_space, b.real_space);
        assert_eq!(a.spectral[0], Complex64::new(0.0, 0.0));
        assert!(imaginary_residual(&g, &a.spectral) < 1e-10);
        let c = sample_field_indexed(&g, 0.4, 7, 1).unwrap();
        assert_ne!(a.real_space, c.real_space);
    }

    #[test]
    fn map_samples_matches_direct() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let v = map_samples(&g, 0.2, 3, 4, |f| Ok(f.spectral[5])).unwrap();
        let direct = sample_field_indexed(&g, 0.2, 3, 2).unwrap();
        assert_eq!(v[2], direct.spectral[5]);
    }
}
