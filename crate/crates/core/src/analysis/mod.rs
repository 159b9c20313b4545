//! Momentum-space analysis of two-polariton eigenstates.
//!
//! Fourier maps, non-interacting isoenergy contours, participation ratios,
//! overlap with the antisymmetrized standing-wave form, and the
//! regular/chaotic/fermionized classifier built on them.

pub mod classify;
pub mod contour;
pub mod fourier;
pub mod metrics;

pub use classify::{
    classification_csv, classify_metrics, classify_spectrum, classify_state, quantile, state_metrics,
    ClassifierConfig, SpectrumContext, StateClass, StateLabel, StateMetrics,
};
pub use contour::{band_mask, contour_band_weight, isoenergy_contour, IsoenergyContour};
pub use fourier::{centered_grid, fourier_map, FourierMap};
pub use metrics::{
    fermionized_ansatz, fermionized_overlap, maximize_fermionized_overlap, momentum_ipr, real_space_ipr,
    OverlapFit,
};
