use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::contour::{band_mask, isoenergy_contour};
use super::fourier::fourier_map;
use super::metrics::{maximize_fermionized_overlap, momentum_ipr, real_space_ipr};
use crate::spectral::{eigenvector_to_grid, EigenpairSet, WavefunctionGrid};
use crate::{ArrayParams, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateLabel {
    Regular,
    Chaotic,
    Fermionized,
}

impl StateLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Regular => "regular",
            Self::Chaotic => "chaotic",
            Self::Fermionized => "fermionized",
        }
    }
}

/// Calibrated classifier thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Fourier grid size as a multiple of `N`.
    pub oversampling: usize,
    pub contour_resolution: usize,
    pub band_halfwidth: f64,
    /// Minimum maximized ansatz overlap for the fermionized label.
    pub fermionized_overlap: f64,
    /// Regular states have momentum IPR at most this fraction of the band cells.
    pub regular_ipr_fraction: f64,
    /// Minimum contour-band weight for the chaotic label.
    pub chaotic_band_weight: f64,
    /// Relative height of a counted Fourier peak.
    pub peak_threshold: f64,
    /// Fourier peaks tried as starting points of the overlap fit.
    pub overlap_seeds: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            oversampling: 2,
            contour_resolution: 4000,
            band_halfwidth: 0.2,
            fermionized_overlap: 0.9,
            regular_ipr_fraction: 0.05,
            chaotic_band_weight: 0.5,
            peak_threshold: 0.5,
            overlap_seeds: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateMetrics {
    pub momentum_ipr: f64,
    pub real_space_ipr: f64,
    /// Fourier weight fraction inside the contour band; 0 without a contour.
    pub band_weight: f64,
    /// Grid cells inside the contour band.
    pub band_cells: usize,
    pub overlap: f64,
    pub overlap_k1: f64,
    pub overlap_k2: f64,
    /// Fourier local maxima above the peak threshold.
    pub peaks: usize,
}

/// Spectrum-wide reference values used by the percentile rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumContext {
    pub real_ipr_median: f64,
    pub momentum_ipr_p75: f64,
}

/// Linear-interpolation quantile; `NaN` for empty input.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

impl SpectrumContext {
    pub fn from_metrics(metrics: &[StateMetrics]) -> Self {
        let real: Vec<f64> = metrics.iter().map(|m| m.real_space_ipr).collect();
        let mom: Vec<f64> = metrics.iter().map(|m| m.momentum_ipr).collect();
        Self {
            real_ipr_median: quantile(&real, 0.5),
            momentum_ipr_p75: quantile(&mom, 0.75),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateClass {
    pub label: StateLabel,
    pub metrics: StateMetrics,
}

/// Metrics of one state at real pair energy `eps2`.
pub fn state_metrics(
    grid: &WavefunctionGrid,
    eps2: f64,
    params: &ArrayParams,
    config: &ClassifierConfig,
) -> Result<StateMetrics> {
    let fmap = fourier_map(grid, config.oversampling.max(1) * grid.n_qubits())?;
    let contour = isoenergy_contour(eps2, params, config.contour_resolution)?;
    let (band_weight, band_cells) = match band_mask(&fmap, &contour, config.band_halfwidth) {
        Ok(mask) => {
            let inside: f64 = fmap.magnitudes.iter().zip(&mask).filter(|(_, &m)| m).map(|(v, _)| v).sum();
            (inside / fmap.total(), mask.iter().filter(|&&m| m).count())
        }
        Err(Error::EmptyContour) => (0.0, 0),
        Err(e) => return Err(e),
    };
    let fit = maximize_fermionized_overlap(grid, &fmap, config.overlap_seeds)?;
    Ok(StateMetrics {
        momentum_ipr: momentum_ipr(&fmap)?,
        real_space_ipr: real_space_ipr(grid)?,
        band_weight,
        band_cells,
        overlap: fit.overlap,
        overlap_k1: fit.k1,
        overlap_k2: fit.k2,
        peaks: fmap.peaks(config.peak_threshold).len(),
    })
}

/// Label from metrics alone.
///
/// Fermionized if the overlap reaches its threshold. Otherwise regular when
/// the momentum IPR is small against the band and the real-space IPR is
/// below the spectrum median. Otherwise chaotic when the band holds enough
/// weight and the momentum IPR exceeds the spectrum's upper quartile.
/// Everything else is regular.
pub fn classify_metrics(m: &StateMetrics, ctx: &SpectrumContext, config: &ClassifierConfig) -> StateLabel {
    if m.overlap >= config.fermionized_overlap {
        StateLabel::Fermionized
    } else if m.momentum_ipr <= config.regular_ipr_fraction * m.band_cells as f64
        && m.real_space_ipr < ctx.real_ipr_median
    {
        StateLabel::Regular
    } else if m.band_weight >= config.chaotic_band_weight && m.momentum_ipr > ctx.momentum_ipr_p75 {
        StateLabel::Chaotic
    } else {
        StateLabel::Regular
    }
}

pub fn classify_state(
    grid: &WavefunctionGrid,
    eps2: f64,
    params: &ArrayParams,
    ctx: &SpectrumContext,
    config: &ClassifierConfig,
) -> Result<StateClass> {
    let metrics = state_metrics(grid, eps2, params, config)?;
    Ok(StateClass {
        label: classify_metrics(&metrics, ctx, config),
        metrics,
    })
}

/// Metrics and labels for the given eigenstates, in parallel.
pub fn classify_spectrum(set: &EigenpairSet, indices: &[usize], config: &ClassifierConfig) -> Result<Vec<StateClass>> {
    let metrics = indices
        .par_iter()
        .map(|&i| state_metrics(&eigenvector_to_grid(set, i)?, set.energies[i].re, &set.params, config))
        .collect::<Result<Vec<_>>>()?;
    let ctx = SpectrumContext::from_metrics(&metrics);
    Ok(metrics
        .into_iter()
        .map(|m| StateClass {
            label: classify_metrics(&m, &ctx, config),
            metrics: m,
        })
        .collect())
}

/// CSV with one row per classified eigenstate.
pub fn classification_csv(set: &EigenpairSet, indices: &[usize], classes: &[StateClass]) -> String {
    let mut s = String::from(
        "index,re_e,im_e,momentum_ipr,real_space_ipr,band_weight,band_cells,overlap,overlap_k1,overlap_k2,peaks,label\n",
    );
    for (&i, c) in indices.iter().zip(classes) {
        let m = &c.metrics;
        let e = set.energies[i];
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{},{},{},{},{},{},{}",
            e.re,
            e.im,
            m.momentum_ipr,
            m.real_space_ipr,
            m.band_weight,
            m.band_cells,
            m.overlap,
            m.overlap_k1,
            m.overlap_k2,
            m.peaks,
            c.label.as_str()
        );
    }
    s
}
