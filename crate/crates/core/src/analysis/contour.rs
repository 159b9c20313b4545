use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::fourier::FourierMap;
use crate::model::{pair_energy_residual, single_polariton_dispersion};
use crate::{ArrayParams, Error, Result, C64};

/// Largest accepted scaled energy mismatch of a stored contour point.
pub const CONTOUR_TOLERANCE: f64 = 1e-10;

/// Real pairs with `ω(k₁) + ω(k₂) = 2ε`, folded into `[-π, π)²`.
///
/// The point set is closed under `k₁ ↔ k₂` and under `k → -k` for either
/// momentum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoenergyContour {
    pub eps2: f64,
    pub resolution: usize,
    pub points: Vec<(f64, f64)>,
    /// Samples of `k₁` for which no real `k₂` exists.
    pub skipped: usize,
}

fn fold(k: f64) -> f64 {
    let r = (k + PI).rem_euclid(TAU) - PI;
    if r >= PI {
        -PI
    } else {
        r
    }
}

/// Traces the contour by scanning `k₁` over `(0, π]` in `resolution` steps.
///
/// For each `k₁` the partner solves `cos k₂ = cos φ + Γ₀ sin φ / (2ε - ω(k₁))`
/// in closed form. Samples at the pole `k₁ = φ`, at `2ε = ω(k₁)`, or with
/// `|cos k₂| > 1` are skipped and counted.
pub fn isoenergy_contour(eps2: f64, params: &ArrayParams, resolution: usize) -> Result<IsoenergyContour> {
    params.validate()?;
    if resolution < 64 {
        return Err(Error::Config(format!("contour resolution must be at least 64, got {resolution}")));
    }
    let (s, c) = params.phase_phi.sin_cos();
    let mut points = Vec::with_capacity(8 * resolution);
    let mut skipped = 0;
    for i in 1..=resolution {
        let k1 = PI * i as f64 / resolution as f64;
        let Ok(w1) = single_polariton_dispersion(k1, params) else {
            skipped += 1;
            continue;
        };
        let rest = eps2 - w1;
        let cos_k2 = c + params.gamma0 * s / rest;
        if rest == 0.0 || !cos_k2.is_finite() || cos_k2.abs() > 1.0 {
            skipped += 1;
            continue;
        }
        let k2 = cos_k2.acos();
        let res = pair_energy_residual(C64::new(k1, 0.0), C64::new(k2, 0.0), eps2, params.phase_phi, params.gamma0);
        if res >= CONTOUR_TOLERANCE {
            skipped += 1;
            continue;
        }
        for (a, b) in [(k1, k2), (k1, -k2), (-k1, k2), (-k1, -k2)] {
            points.push((fold(a), fold(b)));
            points.push((fold(b), fold(a)));
        }
    }
    Ok(IsoenergyContour {
        eps2,
        resolution,
        points,
        skipped,
    })
}

impl IsoenergyContour {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with columns `k1,k2`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k1,k2\n");
        for (a, b) in &self.points {
            let _ = writeln!(s, "{a},{b}");
        }
        s
    }
}

fn periodic_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Grid cells whose centre lies within `band_halfwidth` of a contour point,
/// with periodic distance in both momenta.
pub fn band_mask(fmap: &FourierMap, contour: &IsoenergyContour, band_halfwidth: f64) -> Result<Vec<bool>> {
    let n = fmap.n_k();
    let dk = fmap.spacing();
    if !(band_halfwidth > dk) {
        return Err(Error::Config(format!(
            "band half-width {band_halfwidth} must exceed the grid spacing {dk}"
        )));
    }
    if contour.is_empty() {
        return Err(Error::EmptyContour);
    }
    if band_halfwidth >= PI * SQRT_2 {
        return Ok(vec![true; n * n]);
    }
    let mut mask = vec![false; n * n];
    let reach = ((band_halfwidth / dk).ceil() as isize).min(n as isize / 2);
    let r2 = band_halfwidth * band_halfwidth;
    let n_i = n as isize;
    for &(a, b) in &contour.points {
        let ca = ((a + PI) / dk).round() as isize;
        let cb = ((b + PI) / dk).round() as isize;
        for dx in -reach..=reach {
            let ix = (ca + dx).rem_euclid(n_i) as usize;
            let gx = periodic_gap(fmap.k[ix], a);
            if gx * gx > r2 {
                continue;
            }
            for dy in -reach..=reach {
                let iy = (cb + dy).rem_euclid(n_i) as usize;
                let gy = periodic_gap(fmap.k[iy], b);
                if gx * gx + gy * gy <= r2 {
                    mask[ix * n + iy] = true;
                }
            }
        }
    }
    Ok(mask)
}

/// Fraction of the Fourier weight inside the contour band.
pub fn contour_band_weight(fmap: &FourierMap, contour: &IsoenergyContour, band_halfwidth: f64) -> Result<f64> {
    let mask = band_mask(fmap, contour, band_halfwidth)?;
    let inside: f64 = fmap
        .magnitudes
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|(v, _)| v)
        .sum();
    Ok(inside / fmap.total())
}
