//! Reflection map on pair momenta.
//!
//! A pair `(k₁, k₂)` with center of mass `K = (k₁ + k₂)/2` and relative
//! momentum `q = k₁ - k₂` reflects off an array edge into a pair whose center
//! of mass is `±q/2`. The new relative momentum is fixed by energy
//! conservation, which is a palindromic quartic in `z = exp(iq/2)`.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{pair_energy_residual, single_polariton_dispersion};
use crate::{ArrayParams, Error, Result, C64};

/// The four relative momenta at fixed center of mass and energy.
///
/// `q` is ordered `[q_A, -q_A, q_B, -q_B]`, with `z[i]` the matching roots of
/// the quartic. `z[0] z[1] = z[2] z[3] = 1` up to rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionRoots {
    pub center: C64,
    pub eps2: f64,
    pub z: [C64; 4],
    pub q: [C64; 4],
}

impl DispersionRoots {
    /// Pair `(K + q/2, K - q/2)` for root `i`.
    pub fn pair(&self, i: usize) -> (C64, C64) {
        (self.center + self.q[i] / 2.0, self.center - self.q[i] / 2.0)
    }

    /// Largest scaled energy mismatch over the four reconstructed pairs.
    pub fn max_on_shell_residual(&self, params: &ArrayParams) -> f64 {
        (0..4)
            .map(|i| {
                let (a, b) = self.pair(i);
                pair_energy_residual(a, b, self.eps2, params.phase_phi, params.gamma0)
            })
            .fold(0.0, f64::max)
    }
}

/// Roots of `a x² + b x + c` without cancellation in the larger root.
fn quadratic(a: C64, b: C64, c: C64) -> [C64; 2] {
    let disc = (b * b - 4.0 * a * c).sqrt();
    // Pick the sign that adds magnitudes.
    let d = if (b.conj() * disc).re >= 0.0 { -b - disc } else { -b + disc };
    if d.norm() == 0.0 {
        let r = -b / (2.0 * a);
        return [r, r];
    }
    [d / (2.0 * a), 2.0 * c / d]
}

/// Solves the energy-conservation quartic at center of mass `K`.
///
/// With `ε = eps2/2` the quartic
/// `-ε(z⁴+1) + 2(2ε cos φ + sin φ) cos K (z³+z) - 2(2ε cos²φ + ε cos 2K + sin 2φ) z² = 0`
/// is palindromic; dividing by `z²` leaves a quadratic in `s = z + 1/z`.
/// `q = -2i log z` on the principal branch, so `Re q ∈ (-2π, 2π]`.
pub fn quartic_roots(center: C64, eps2: f64, params: &ArrayParams) -> Result<DispersionRoots> {
    let eps = eps2 / 2.0;
    if eps == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let g = params.gamma0;
    let (s_phi, c_phi) = params.phase_phi.sin_cos();
    let e = C64::new(eps / g, 0.0);
    let cos_k = center.cos();
    let a4 = -e;
    let a3 = 2.0 * (2.0 * c_phi * e + s_phi) * cos_k;
    let a2 = -2.0 * (2.0 * c_phi * c_phi * e + e * (2.0 * center).cos() + (2.0 * params.phase_phi).sin());
    let [s1, s2] = quadratic(a4, a3, a2 - 2.0 * a4);
    let mut z = [C64::new(0.0, 0.0); 4];
    let mut q = [C64::new(0.0, 0.0); 4];
    for (slot, s) in [s1, s2].into_iter().enumerate() {
        let [big, small] = quadratic(C64::new(1.0, 0.0), -s, C64::new(1.0, 0.0));
        let (zi, zj) = if big.norm() >= small.norm() {
            (big, 1.0 / big)
        } else {
            (small, 1.0 / small)
        };
        if !zi.is_finite() || zi.norm() == 0.0 {
            return Err(Error::RootPairing);
        }
        let qi = C64::new(0.0, -2.0) * zi.ln();
        z[2 * slot] = zi;
        z[2 * slot + 1] = zj;
        q[2 * slot] = qi;
        q[2 * slot + 1] = -qi;
    }
    Ok(DispersionRoots { center, eps2, z, q })
}

/// Small-φ closed form for the relative momenta, `ω(k) ≈ -2φΓ₀/k²`.
///
/// `center` is the center-of-mass momentum `K` and `w = ε/(φΓ₀)`. With the
/// total momentum `P = 2K`,
/// `q² = P² - 4/w ± 4√(1 - wP²)/w`.
/// Returns `[q₊, -q₊, q₋, -q₋]` with principal square roots.
pub fn small_phi_roots(center: f64, w: f64) -> Result<[C64; 4]> {
    if w == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let p = 2.0 * center;
    let root = C64::new(1.0 - w * p * p, 0.0).sqrt();
    let base = C64::new(p * p - 4.0 / w, 0.0);
    let plus = (base + 4.0 * root / w).sqrt();
    let minus = (base - 4.0 * root / w).sqrt();
    Ok([plus, -plus, minus, -minus])
}

/// Small-φ map on center-of-mass cosines: roots `x` of
/// `(c - x)² - (φΓ₀/ε)(c x - 1) = 0` with `c = cos K`, energies in Γ₀ units.
///
/// Real inputs with a negative discriminant give a conjugate pair.
pub fn approx_map_step(cos_k: f64, eps: f64, phi: f64) -> Result<[C64; 2]> {
    if eps == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let a = phi / eps;
    let c = C64::new(cos_k, 0.0);
    Ok(quadratic(
        C64::new(1.0, 0.0),
        -(2.0 + a) * c,
        c * c + a,
    ))
}

/// Rotation angle of the exact map on center-of-mass cosines.
///
/// The exact map is the linear recurrence `c' + c'' = λ c` with
/// `λ = 2cos φ + Γ₀ sin φ/ε`; for `|λ| < 2` it rotates by `arccos(λ/2)`.
pub fn rotation_angle(eps2: f64, params: &ArrayParams) -> Option<f64> {
    let eps = eps2 / 2.0;
    let half = params.phase_phi.cos() + params.gamma0 * params.phase_phi.sin() / (2.0 * eps);
    (half.abs() < 1.0).then(|| half.acos())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Plus,
    Minus,
}

/// Which reflected center of mass `K̃ = ±q/2` to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchPolicy {
    AllBranches,
    SignedChoice(Sign),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitConfig {
    pub max_iterations: usize,
    /// Roots with `|Im q| ≥ cutoff` are discarded as strongly evanescent.
    pub cutoff: f64,
    /// Two pairs coincide when both momenta agree to this many radians mod 2π.
    pub tolerance: f64,
    pub branch: BranchPolicy,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            cutoff: 1.0,
            tolerance: 1e-6,
            branch: BranchPolicy::AllBranches,
        }
    }
}

impl OrbitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0) {
            return Err(Error::Config(format!("cutoff must be positive, got {}", self.cutoff)));
        }
        if !(self.tolerance > 0.0 && self.tolerance < PI) {
            return Err(Error::Config(format!(
                "tolerance must lie in (0, pi), got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Reduces the real part into `[0, 2π)`; the imaginary part is kept.
pub fn canonicalize(k: C64) -> C64 {
    let mut re = k.re.rem_euclid(TAU);
    if re >= TAU {
        re = 0.0;
    }
    C64::new(re, k.im)
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// One application of the reflection map.
///
/// Successors are canonicalized. Both members of each `±q̃` pair are
/// returned, so the successor set is closed under exchanging `k₁ ↔ k₂`.
pub fn map_step(
    state: (C64, C64),
    eps2: f64,
    params: &ArrayParams,
    config: &OrbitConfig,
) -> Result<Vec<(C64, C64)>> {
    let half = (state.0 - state.1) / 2.0;
    let centers: &[C64] = match config.branch {
        BranchPolicy::AllBranches => &[half, -half],
        BranchPolicy::SignedChoice(Sign::Plus) => &[half],
        BranchPolicy::SignedChoice(Sign::Minus) => &[-half],
    };
    let mut out = Vec::with_capacity(4 * centers.len());
    for &center in centers {
        let roots = quartic_roots(center, eps2, params)?;
        for i in 0..4 {
            if roots.q[i].im.abs() < config.cutoff {
                let (a, b) = roots.pair(i);
                out.push((canonicalize(a), canonicalize(b)));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitState {
    pub k1: C64,
    pub k2: C64,
    /// Map iteration at which the state first appeared; the seed has 0.
    pub iteration: usize,
}

impl OrbitState {
    pub fn is_real(&self, tol: f64) -> bool {
        self.k1.im.abs() <= tol && self.k2.im.abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapOrbit {
    pub seed: (f64, f64),
    pub eps2: f64,
    pub states: Vec<OrbitState>,
    pub closed: bool,
    /// Map applications performed.
    pub iterations: usize,
}

impl MapOrbit {
    pub fn count(&self) -> usize {
        self.states.len()
    }

    /// Distinct center-of-mass cosines among real states.
    pub fn distinct_center_cosines(&self, tol: f64) -> usize {
        let mut cos: Vec<f64> = self
            .states
            .iter()
            .filter(|s| s.is_real(1e-12))
            .map(|s| ((s.k1.re + s.k2.re) / 2.0).cos())
            .collect();
        cos.sort_by(f64::total_cmp);
        cos.dedup_by(|a, b| (*a - *b).abs() < tol);
        cos.len()
    }

    /// Turns of the center-of-mass rotation covered by a closed orbit.
    pub fn winding(&self, params: &ArrayParams) -> Option<f64> {
        let theta = rotation_angle(self.eps2, params)?;
        Some(self.distinct_center_cosines(1e-6) as f64 * theta / TAU)
    }

    /// Closed orbit whose center of mass goes around at most once.
    pub fn is_single_loop(&self, params: &ArrayParams) -> bool {
        self.closed && self.winding(params).is_some_and(|w| w <= 1.0 + 1e-9)
    }

    /// CSV with columns `iteration,k1_re,k1_im,k2_re,k2_im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,k1_re,k1_im,k2_re,k2_im\n");
        for st in &self.states {
            let _ = writeln!(s, "{},{},{},{},{}", st.iteration, st.k1.re, st.k1.im, st.k2.re, st.k2.im);
        }
        s
    }
}

/// Canonical-pair set with tolerance matching via hash buckets.
struct PairSet {
    tol: f64,
    buckets_per_axis: i64,
    buckets: HashMap<(i64, i64), Vec<(f64, f64)>>,
}

impl PairSet {
    fn new(tol: f64) -> Self {
        Self {
            tol,
            buckets_per_axis: ((TAU / tol).floor() as i64).max(1),
            buckets: HashMap::new(),
        }
    }

    fn bucket(&self, x: f64) -> i64 {
        ((x / self.tol).floor() as i64).rem_euclid(self.buckets_per_axis)
    }

    /// Inserts unless a matching pair exists; returns whether it was new.
    fn insert(&mut self, a: f64, b: f64) -> bool {
        let (ba, bb) = (self.bucket(a), self.bucket(b));
        let n = self.buckets_per_axis;
        for da in -1..=1 {
            for db in -1..=1 {
                let key = ((ba + da).rem_euclid(n), (bb + db).rem_euclid(n));
                if let Some(list) = self.buckets.get(&key) {
                    if list.iter().any(|&(x, y)| {
                        circular_distance(x, a) < self.tol && circular_distance(y, b) < self.tol
                    }) {
                        return false;
                    }
                }
            }
        }
        self.buckets.entry((ba, bb)).or_default().push((a, b));
        true
    }
}

/// Pair energy `ω(k₁) + ω(k₂)` of a real seed.
pub fn seed_energy(k1: f64, k2: f64, params: &ArrayParams) -> Result<f64> {
    Ok(single_polariton_dispersion(k1, params)? + single_polariton_dispersion(k2, params)?)
}

/// Breadth-first closure of [`map_step`] from a real seed.
pub fn orbit(seed: (f64, f64), params: &ArrayParams, config: &OrbitConfig) -> Result<MapOrbit> {
    params.validate()?;
    config.validate()?;
    let eps2 = seed_energy(seed.0, seed.1, params)?;
    let first = (
        canonicalize(C64::new(seed.0, 0.0)),
        canonicalize(C64::new(seed.1, 0.0)),
    );
    let mut seen = PairSet::new(config.tolerance);
    seen.insert(first.0.re, first.1.re);
    let mut states = vec![OrbitState {
        k1: first.0,
        k2: first.1,
        iteration: 0,
    }];
    let mut frontier = vec![first];
    let mut closed = false;
    let mut iterations = 0;
    for it in 1..=config.max_iterations {
        iterations = it;
        let mut next = Vec::new();
        for &state in &frontier {
            for (a, b) in map_step(state, eps2, params, config)? {
                if seen.insert(a.re, b.re) {
                    states.push(OrbitState { k1: a, k2: b, iteration: it });
                    next.push((a, b));
                }
            }
        }
        if next.is_empty() {
            closed = true;
            break;
        }
        frontier = next;
    }
    Ok(MapOrbit {
        seed,
        eps2,
        states,
        closed,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub k1: f64,
    pub k2: f64,
    pub count: usize,
    pub closed: bool,
    /// Present when the seed could not be iterated; `count` is then 1.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: OrbitConfig,
    /// `k₂ = k₁ + delta` for line sweeps; `None` for grid sweeps.
    pub delta: Option<f64>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn k1_samples(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.k1).collect()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.count).collect()
    }

    /// CSV with columns `k1,k2,count,closed`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k1,k2,count,closed\n");
        for p in &self.points {
            let _ = writeln!(s, "{},{},{},{}", p.k1, p.k2, p.count, p.closed);
        }
        s
    }
}

fn sweep_point(k1: f64, k2: f64, params: &ArrayParams, config: &OrbitConfig) -> SweepPoint {
    match orbit((k1, k2), params, config) {
        Ok(o) => SweepPoint {
            k1,
            k2,
            count: o.count(),
            closed: o.closed,
            error: None,
        },
        Err(e) => SweepPoint {
            k1,
            k2,
            count: 1,
            closed: false,
            error: Some(e.to_string()),
        },
    }
}

/// `samples` points evenly spaced over `[lo, hi]`, both ends included.
pub fn linspace(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Orbit size along the line `k₂ = k₁ + delta`.
pub fn sweep(
    k1_range: (f64, f64),
    samples: usize,
    delta: f64,
    params: &ArrayParams,
    config: &OrbitConfig,
) -> Result<SweepResult> {
    params.validate()?;
    config.validate()?;
    let points = linspace(k1_range.0, k1_range.1, samples)
        .into_par_iter()
        .map(|k1| sweep_point(k1, k1 + delta, params, config))
        .collect();
    Ok(SweepResult {
        config: *config,
        delta: Some(delta),
        points,
    })
}

/// Orbit size over a rectangular `(k₁, k₂)` grid with spacing `step`,
/// row-major in `k₁`.
pub fn sweep_grid(
    k1_range: (f64, f64),
    k2_range: (f64, f64),
    step: f64,
    params: &ArrayParams,
    config: &OrbitConfig,
) -> Result<SweepResult> {
    params.validate()?;
    config.validate()?;
    if !(step > 0.0) {
        return Err(Error::Config(format!("grid step must be positive, got {step}")));
    }
    let axis = |(lo, hi): (f64, f64)| {
        // Slack keeps an endpoint that is a whole number of steps away.
        let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| lo + step * i as f64).collect::<Vec<_>>()
    };
    let (a1, a2) = (axis(k1_range), axis(k2_range));
    let seeds: Vec<(f64, f64)> = a1
        .iter()
        .flat_map(|&x| a2.iter().map(move |&y| (x, y)))
        .collect();
    let points = seeds
        .into_par_iter()
        .map(|(k1, k2)| sweep_point(k1, k2, params, config))
        .collect();
    Ok(SweepResult {
        config: *config,
        delta: None,
        points,
    })
}
