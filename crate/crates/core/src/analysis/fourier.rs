use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use crate::spectral::WavefunctionGrid;
use crate::{ComplexMatrix, Error, Result, C64};

/// `|Σ_nm ψ_nm e^{-i(k_x n + k_y m)}|²` on a centered grid, maximum 1.
///
/// Sites are numbered from 1. `magnitudes` is row-major in `k_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMap {
    pub k: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

/// Centered grid `k_j = -π + 2πj/n_k`, `j = 0..n_k`.
pub fn centered_grid(n_k: usize) -> Vec<f64> {
    (0..n_k).map(|j| -PI + TAU * j as f64 / n_k as f64).collect()
}

impl FourierMap {
    pub fn n_k(&self) -> usize {
        self.k.len()
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.n_k() as f64
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.magnitudes[ix * self.n_k() + iy]
    }

    pub fn total(&self) -> f64 {
        self.magnitudes.iter().sum()
    }

    /// Largest `|F(k_x, k_y) - F(k_y, k_x)|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n_k();
        let mut worst = 0.0_f64;
        for ix in 0..n {
            for iy in ix + 1..n {
                worst = worst.max((self.at(ix, iy) - self.at(iy, ix)).abs());
            }
        }
        worst
    }

    /// Cells strictly above their eight periodic neighbours and at least
    /// `threshold` (relative to the maximum of 1).
    pub fn peaks(&self, threshold: f64) -> Vec<(usize, usize)> {
        let n = self.n_k() as isize;
        let mut out = Vec::new();
        for ix in 0..n {
            for iy in 0..n {
                let v = self.at(ix as usize, iy as usize);
                if v < threshold {
                    continue;
                }
                let is_max = (-1..=1).all(|dx| {
                    (-1..=1).all(|dy| {
                        (dx == 0 && dy == 0)
                            || v > self.at((ix + dx).rem_euclid(n) as usize, (iy + dy).rem_euclid(n) as usize)
                    })
                });
                if is_max {
                    out.push((ix as usize, iy as usize));
                }
            }
        }
        out
    }

    /// CSV with columns `kx,ky,magnitude`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kx,ky,magnitude\n");
        for (ix, kx) in self.k.iter().enumerate() {
            for (iy, ky) in self.k.iter().enumerate() {
                let _ = writeln!(s, "{kx},{ky},{}", self.at(ix, iy));
            }
        }
        s
    }
}

/// Separable transform `Φ ψ Φᵀ` with `Φ_jn = e^{-i k_j n}`.
pub fn fourier_map(grid: &WavefunctionGrid, n_k: usize) -> Result<FourierMap> {
    let n = grid.n_qubits();
    if n_k < n {
        return Err(Error::Undersampled { n_k, n });
    }
    let k = centered_grid(n_k);
    let phi = ComplexMatrix::from_fn(n_k, n, |j, site| C64::from_polar(1.0, -k[j] * (site + 1) as f64));
    let f = phi.matmul(&grid.values).matmul(&phi.transpose());
    let mut magnitudes: Vec<f64> = f.as_slice().iter().map(|z| z.norm_sqr()).collect();
    let max = magnitudes.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::ZeroNorm);
    }
    magnitudes.iter_mut().for_each(|m| *m /= max);
    Ok(FourierMap { k, magnitudes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_state_peaks_at_the_origin() {
        let g = WavefunctionGrid::from_fn(12, |_, _| C64::new(1.0, 0.0));
        let f = fourier_map(&g, 24).unwrap();
        let (ix, iy) = (0..24 * 24)
            .map(|i| (i / 24, i % 24))
            .max_by(|a, b| f.at(a.0, a.1).total_cmp(&f.at(b.0, b.1)))
            .unwrap();
        assert_eq!((f.k[ix], f.k[iy]), (0.0, 0.0));
        assert_eq!(f.at(ix, iy), 1.0);
    }

    #[test]
    fn plane_wave_peaks_at_both_orderings() {
        let n = 16;
        let k = centered_grid(n);
        let (k1, k2) = (k[11], k[3]);
        let g = WavefunctionGrid::from_fn(n, |a, b| {
            let (a, b) = ((a + 1) as f64, (b + 1) as f64);
            C64::from_polar(1.0, k1 * a + k2 * b) + C64::from_polar(1.0, k2 * a + k1 * b)
        });
        let f = fourier_map(&g, n).unwrap();
        let peaks = f.peaks(0.5);
        assert!(peaks.contains(&(11, 3)) && peaks.contains(&(3, 11)), "{peaks:?}");
        assert_eq!(peaks.len(), 2);
        assert!(f.asymmetry() < 1e-10);
    }

    #[test]
    fn undersampling_is_an_error() {
        let g = WavefunctionGrid::from_fn(10, |_, _| C64::new(1.0, 0.0));
        assert!(matches!(fourier_map(&g, 9), Err(Error::Undersampled { n_k: 9, n: 10 })));
        let zero = WavefunctionGrid::from_fn(4, |_, _| C64::new(0.0, 0.0));
        assert!(matches!(fourier_map(&zero, 8), Err(Error::ZeroNorm)));
    }

    #[test]
    fn csv_has_every_cell() {
        let g = WavefunctionGrid::from_fn(3, |a, b| C64::new(a as f64, b as f64));
        let f = fourier_map(&g, 4).unwrap();
        assert_eq!(f.to_csv().lines().count(), 17);
    }
}
