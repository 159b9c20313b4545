//! Bethe ansatz for two polaritons in an infinite array.
//!
//! The pair wavefunction is `Ψ_mn = exp(iK(m+n)) ψ_r` with `r = |m - n|`.
//! Away from contact the relative motion `ψ_r` obeys a five-point
//! tight-binding relation solved by any on-shell plane wave `exp(iqr/2)`.
//! The contact relations at `r = 0` and `r = 1` fix two of the four
//! plane-wave amplitudes in terms of the other two.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::map::quartic_roots;
use crate::{ArrayParams, Error, Result, C64};

/// Smallest allowed `|sin(q_A/2) f*(q_B) - sin(q_B/2) f*(q_A)|`.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Default number of relative distances kept beyond contact.
pub const DEFAULT_R_MAX: usize = 200;

/// `f(q) = (2cos²φ + cos 2K) - 4 cos φ cos K e^{iq/2} + e^{iq}`.
///
/// The starred kernel is `f(-q)`, a formal substitution rather than complex
/// conjugation, so it stays valid for complex `q`.
pub fn f_kernel(q: C64, center: f64, phi: f64) -> C64 {
    let c = phi.cos();
    let half = (C64::i() * q / 2.0).exp();
    (2.0 * c * c + (2.0 * center).cos()) - 4.0 * c * center.cos() * half + half * half
}

/// Relative-motion amplitudes `ψ_r`, `r = 0..=r_max`; `ψ_{-r} = ψ_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeWavefunction {
    pub center: f64,
    pub eps2: f64,
    pub values: Vec<C64>,
    pub params: ArrayParams,
}

impl RelativeWavefunction {
    pub fn r_max(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Even extension to negative distances.
    pub fn at(&self, r: isize) -> C64 {
        self.values[r.unsigned_abs()]
    }

    /// CSV with columns `r,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,re,im\n");
        for (r, v) in self.values.iter().enumerate() {
            let _ = writeln!(s, "{r},{},{}", v.re, v.im);
        }
        s
    }
}

/// Residuals of the three relation families divided by `max_r |ψ_r|`.
///
/// The `r = 1` and bulk relations are first multiplied by `sin²φ`, which
/// clears their `1/sin²φ` prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetheResiduals {
    pub r0: f64,
    pub r1: f64,
    /// Largest bulk residual over `2 ≤ r ≤ r_max - 2`.
    pub bulk: f64,
}

impl BetheResiduals {
    pub fn max(&self) -> f64 {
        self.r0.max(self.r1).max(self.bulk)
    }
}

/// `sin²φ · (LHS - RHS)` of the tight-binding relation centred on `r`.
///
/// At `r = 1` the even extension folds `ψ_{-1}` onto `ψ_1`, which is exactly
/// the extra on-site term of the contact relation there.
fn tight_binding(psi: &RelativeWavefunction, r: isize) -> C64 {
    let p = &psi.params;
    let (s, c) = p.phase_phi.sin_cos();
    let cos_k = psi.center.cos();
    let eps = psi.eps2 / 2.0;
    let near = psi.at(r - 1) + psi.at(r + 1);
    let lhs = cos_k * s * near - 2.0 * c * s * psi.at(r);
    let bracket = (4.0 * c * c + 2.0 * (2.0 * psi.center).cos()) * psi.at(r)
        + psi.at(r - 2)
        + psi.at(r + 2)
        - 4.0 * c * cos_k * near;
    lhs - eps / (2.0 * p.gamma0) * bracket
}

/// Evaluates the contact (`r = 0`, `r = 1`) and bulk relations.
pub fn relative_motion_residual(psi: &RelativeWavefunction) -> Result<BetheResiduals> {
    let r_max = psi.r_max();
    if psi.values.len() < 5 {
        return Err(Error::RelativeRangeTooSmall(r_max));
    }
    let scale = psi.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let p = &psi.params;
    let c = p.phase_phi.cos();
    let cos_k = psi.center.cos();
    let r0 = (2.0 * c * c + (2.0 * psi.center).cos()) * psi.at(0) - 4.0 * c * cos_k * psi.at(1)
        + psi.at(2);
    let r1 = tight_binding(psi, 1);
    let bulk = (2..=(r_max - 2) as isize)
        .map(|r| tight_binding(psi, r).norm())
        .fold(0.0, f64::max);
    Ok(BetheResiduals {
        r0: r0.norm() / scale,
        r1: r1.norm() / scale,
        bulk: bulk / scale,
    })
}

/// Four-wave solution `ψ_r = A e^{iq_A r/2} + Ã e^{-iq_A r/2} + B e^{iq_B r/2} + B̃ e^{-iq_B r/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetheSolution {
    pub center: f64,
    pub eps2: f64,
    pub q_a: C64,
    pub q_b: C64,
    pub a: C64,
    pub a_tilde: C64,
    pub b: C64,
    pub b_tilde: C64,
    pub params: ArrayParams,
}

/// Splits the quartic roots into the `A` and `B` pairs.
///
/// Pairs are ordered by ascending `|Im q|`, ties by `Re q`; within a pair the
/// representative has `Im q > 0`, or `Re q ≥ 0` when `q` is real.
pub fn assign_root_pairs(center: f64, eps2: f64, params: &ArrayParams) -> Result<(C64, C64)> {
    const REAL: f64 = 1e-12;
    let roots = quartic_roots(C64::new(center, 0.0), eps2, params)?;
    let pick = |q: C64| {
        let flip = if q.im.abs() > REAL { q.im < 0.0 } else { q.re < 0.0 };
        if flip {
            -q
        } else {
            q
        }
    };
    let mut pair = [pick(roots.q[0]), pick(roots.q[2])];
    let key = |q: &C64| if q.im.abs() > REAL { q.im.abs() } else { 0.0 };
    pair.sort_by(|x, y| key(x).total_cmp(&key(y)).then(x.re.total_cmp(&y.re)));
    Ok((pair[0], pair[1]))
}

/// Fixes `Ã`, `B̃` from free amplitudes `(A, B)` so both contact relations hold.
///
/// With `s_ν = sin(q_ν/2)`, `f_ν = f(q_ν)`, `f*_ν = f(-q_ν)` and
/// `D = s_A f*_B - s_B f*_A`:
/// `Ã = [(s_A f*_B + s_B f_A) A + s_B (f*_B + f_B) B] / D`,
/// `B̃ = -[(s_A f_B + s_B f*_A) B + s_A (f*_A + f_A) A] / D`.
pub fn solve_bethe_coefficients(
    center: f64,
    eps2: f64,
    params: &ArrayParams,
    free: (C64, C64),
) -> Result<BetheSolution> {
    params.validate()?;
    let (q_a, q_b) = assign_root_pairs(center, eps2, params)?;
    let phi = params.phase_phi;
    let (s_a, s_b) = ((q_a / 2.0).sin(), (q_b / 2.0).sin());
    let (f_a, f_a_star) = (f_kernel(q_a, center, phi), f_kernel(-q_a, center, phi));
    let (f_b, f_b_star) = (f_kernel(q_b, center, phi), f_kernel(-q_b, center, phi));
    let d = s_a * f_b_star - s_b * f_a_star;
    if d.norm() < DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateBethe(d.norm()));
    }
    let (a, b) = free;
    let a_tilde = ((s_a * f_b_star + s_b * f_a) * a + s_b * (f_b_star + f_b) * b) / d;
    let b_tilde = -((s_a * f_b + s_b * f_a_star) * b + s_a * (f_a_star + f_a) * a) / d;
    Ok(BetheSolution {
        center,
        eps2,
        q_a,
        q_b,
        a,
        a_tilde,
        b,
        b_tilde,
        params: *params,
    })
}

impl BetheSolution {
    /// `Σ_ν A_ν f(q_ν)`, the contact relation at `r = 0`.
    pub fn contact_sum(&self) -> C64 {
        let phi = self.params.phase_phi;
        let k = self.center;
        self.a * f_kernel(self.q_a, k, phi)
            + self.a_tilde * f_kernel(-self.q_a, k, phi)
            + self.b * f_kernel(self.q_b, k, phi)
            + self.b_tilde * f_kernel(-self.q_b, k, phi)
    }

    /// `Σ_ν A_ν sin(q_ν/2)`, the contact relation at `r = 1`.
    pub fn sine_sum(&self) -> C64 {
        let (s_a, s_b) = ((self.q_a / 2.0).sin(), (self.q_b / 2.0).sin());
        (self.a - self.a_tilde) * s_a + (self.b - self.b_tilde) * s_b
    }
}

pub fn build_relative_wavefunction(sol: &BetheSolution, r_max: usize) -> RelativeWavefunction {
    let wave = |q: C64, r: f64| (C64::i() * q * r / 2.0).exp();
    let values = (0..=r_max)
        .map(|r| {
            let r = r as f64;
            sol.a * wave(sol.q_a, r)
                + sol.a_tilde * wave(-sol.q_a, r)
                + sol.b * wave(sol.q_b, r)
                + sol.b_tilde * wave(-sol.q_b, r)
        })
        .collect();
    RelativeWavefunction {
        center: sol.center,
        eps2: sol.eps2,
        values,
        params: sol.params,
    }
}
