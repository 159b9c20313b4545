//! Single-excitation model: the waveguide Hamiltonian, its tridiagonal
//! inverse, the polariton dispersion and the hard-core pair basis.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Physical configuration of the array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayParams {
    /// Number of qubits `N`.
    pub n_qubits: usize,
    /// Phase `φ` picked up by light between neighbouring qubits, radians.
    pub phase_phi: f64,
    /// Radiative decay rate of a single qubit.
    pub gamma0: f64,
}

impl ArrayParams {
    pub fn new(n_qubits: usize, phase_phi: f64, gamma0: f64) -> Result<Self> {
        let params = Self {
            n_qubits,
            phase_phi,
            gamma0,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters with `Γ₀ = 1`.
    pub fn unit(n_qubits: usize, phase_phi: f64) -> Result<Self> {
        Self::new(n_qubits, phase_phi, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 1 {
            return Err(Error::Config("n_qubits must be at least 1".into()));
        }
        if !(self.phase_phi > 0.0 && self.phase_phi < std::f64::consts::PI) {
            return Err(Error::Config(format!(
                "phase_phi must lie in (0, pi), got {}",
                self.phase_phi
            )));
        }
        if self.phase_phi.sin().abs() < f64::EPSILON {
            return Err(Error::Singular {
                sin_phi: self.phase_phi.sin(),
            });
        }
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(Error::Config(format!(
                "gamma0 must be positive, got {}",
                self.gamma0
            )));
        }
        Ok(())
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Wraps row-major `data`; panics unless `data.len() == rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "storage does not match shape");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise `|a - b|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn to_faer(&self) -> faer::Mat<C64> {
        faer::Mat::from_fn(self.rows, self.cols, |r, c| self[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

/// `H_mn = -i Γ₀ exp(i φ |m - n|)`; complex symmetric, not Hermitian.
pub fn build_hamiltonian(params: &ArrayParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let n = params.n_qubits;
    let g = params.gamma0;
    let phi = params.phase_phi;
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let d = r.abs_diff(c) as f64;
        C64::new(0.0, -g) * C64::from_polar(1.0, phi * d)
    }))
}

/// Compact three-band form of `H⁻¹`.
///
/// Interior diagonal `-cot φ / Γ₀`, both corners `(-cot φ / 2 + i/2) / Γ₀`,
/// constant off-diagonal `1 / (2 Γ₀ sin φ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalInverse {
    pub diag: Vec<C64>,
    pub off: C64,
}

impl TridiagonalInverse {
    pub fn new(params: &ArrayParams) -> Result<Self> {
        params.validate()?;
        let n = params.n_qubits;
        if n < 2 {
            return Err(Error::Config(
                "three-band inverse needs at least 2 qubits".into(),
            ));
        }
        let (s, c) = params.phase_phi.sin_cos();
        if s.abs() < f64::EPSILON {
            return Err(Error::Singular { sin_phi: s });
        }
        let g = params.gamma0;
        let cot = c / s;
        let mut diag = vec![C64::new(-cot / g, 0.0); n];
        let corner = C64::new(-0.5 * cot, 0.5) / g;
        diag[0] = corner;
        diag[n - 1] = corner;
        Ok(Self {
            diag,
            off: C64::new(1.0 / (2.0 * g * s), 0.0),
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let n = self.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off;
                m[(i + 1, i)] = self.off;
            }
        }
        m
    }

    /// `H⁻¹ X`.
    pub fn apply_left(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = self.len();
        assert_eq!(x.rows(), n);
        ComplexMatrix::from_fn(n, x.cols(), |r, c| {
            let mut acc = self.diag[r] * x[(r, c)];
            if r > 0 {
                acc += self.off * x[(r - 1, c)];
            }
            if r + 1 < n {
                acc += self.off * x[(r + 1, c)];
            }
            acc
        })
    }

    /// `X H⁻¹`.
    pub fn apply_right(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = self.len();
        assert_eq!(x.cols(), n);
        ComplexMatrix::from_fn(x.rows(), n, |r, c| {
            let mut acc = x[(r, c)] * self.diag[c];
            if c > 0 {
                acc += x[(r, c - 1)] * self.off;
            }
            if c + 1 < n {
                acc += x[(r, c + 1)] * self.off;
            }
            acc
        })
    }
}

/// Closed-form inverse of [`build_hamiltonian`]. A single qubit falls back to
/// the reciprocal `i / Γ₀`.
pub fn inverse_hamiltonian_analytic(params: &ArrayParams) -> Result<ComplexMatrix> {
    params.validate()?;
    if params.n_qubits == 1 {
        return Ok(ComplexMatrix::from_fn(1, 1, |_, _| {
            C64::new(0.0, 1.0 / params.gamma0)
        }));
    }
    Ok(TridiagonalInverse::new(params)?.to_dense())
}

/// Lower-branch polariton energy `Γ₀ sin φ / (cos k - cos φ)`.
pub fn single_polariton_dispersion(k: f64, params: &ArrayParams) -> Result<f64> {
    let denom = k.cos() - params.phase_phi.cos();
    if denom.abs() <= 4.0 * f64::EPSILON {
        return Err(Error::Pole { k });
    }
    Ok(params.gamma0 * params.phase_phi.sin() / denom)
}

/// Dispersion continued to complex momenta. No pole check.
pub fn dispersion_complex(k: C64, phi: f64, gamma0: f64) -> C64 {
    gamma0 * phi.sin() / (k.cos() - phi.cos())
}

/// Scaled on-shell mismatch `|ω(k₁) + ω(k₂) - 2ε| / max(1, |ω(k₁)|, |ω(k₂)|)`.
///
/// The scaling keeps the measure meaningful next to the pole at `k = ±φ`,
/// where the individual energies diverge.
pub fn pair_energy_residual(k1: C64, k2: C64, eps2: f64, phi: f64, gamma0: f64) -> f64 {
    let w1 = dispersion_complex(k1, phi, gamma0);
    let w2 = dispersion_complex(k2, phi, gamma0);
    let scale = 1.0_f64.max(w1.norm()).max(w2.norm());
    (w1 + w2 - eps2).norm() / scale
}

/// Unordered qubit pairs `(n, m)`, `n < m`, in lexicographic order.
///
/// Indices are zero-based: pair `(0, 1)` is qubits 1 and 2. Diagonal pairs are
/// absent, which is the hard-core constraint `ψ_nn = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairBasis {
    n_qubits: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairBasis {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::NoPairSpace(n_qubits));
        }
        let pairs = (0..n_qubits)
            .flat_map(|n| (n + 1..n_qubits).map(move |m| (n, m)))
            .collect();
        Ok(Self { n_qubits, pairs })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair(&self, index: usize) -> (usize, usize) {
        self.pairs[index]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Linear index of the unordered pair `{a, b}`; `None` on the diagonal.
    pub fn index(&self, a: usize, b: usize) -> Option<usize> {
        if a == b || a >= self.n_qubits || b >= self.n_qubits {
            return None;
        }
        let (n, m) = if a < b { (a, b) } else { (b, a) };
        Some(n * (2 * self.n_qubits - n - 1) / 2 + (m - n - 1))
    }
}

/// Builds the pair basis; fails below two qubits.
pub fn pair_basis(n_qubits: usize) -> Result<PairBasis> {
    PairBasis::new(n_qubits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dense_inverse(m: &ComplexMatrix) -> ComplexMatrix {
        // Gauss-Jordan with partial pivoting, independent of the closed form.
        let n = m.rows();
        let mut a = m.clone();
        let mut inv = ComplexMatrix::identity(n);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
                .unwrap();
            for c in 0..n {
                let t = a[(col, c)];
                a[(col, c)] = a[(piv, c)];
                a[(piv, c)] = t;
                let t = inv[(col, c)];
                inv[(col, c)] = inv[(piv, c)];
                inv[(piv, c)] = t;
            }
            let p = a[(col, col)];
            for c in 0..n {
                a[(col, c)] /= p;
                inv[(col, c)] /= p;
            }
            for r in 0..n {
                if r != col {
                    let f = a[(r, col)];
                    for c in 0..n {
                        let (ac, ic) = (a[(col, c)], inv[(col, c)]);
                        a[(r, c)] -= f * ac;
                        inv[(r, c)] -= f * ic;
                    }
                }
            }
        }
        inv
    }

    #[test]
    fn single_qubit_hamiltonian() {
        let p = ArrayParams::unit(1, 0.3).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        assert_eq!(h[(0, 0)], C64::new(0.0, -1.0));
        let inv = inverse_hamiltonian_analytic(&p).unwrap();
        assert!((h.matmul(&inv)[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn two_qubit_entries() {
        let p = ArrayParams::unit(2, 0.02).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        assert_eq!(h[(0, 0)], C64::new(0.0, -1.0));
        let expected = C64::new(0.0, -1.0) * C64::from_polar(1.0, 0.02);
        assert!((h[(0, 1)] - expected).norm() < 1e-15);
    }

    #[test]
    fn hamiltonian_diagonal_and_symmetry() {
        let p = ArrayParams::unit(120, 0.02).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        assert_eq!(h.rows(), 120);
        for i in 0..120 {
            assert_eq!(h[(i, i)], C64::new(0.0, -1.0));
        }
        assert_eq!(h.max_abs_diff(&h.transpose()), 0.0);
        assert!(h.max_abs_diff(&h.conj_transpose()) > 0.0);
    }

    #[test]
    fn corner_entry_of_inverse() {
        let p = ArrayParams::unit(3, 0.02).unwrap();
        let inv = inverse_hamiltonian_analytic(&p).unwrap();
        let corner = inv[(0, 0)];
        assert!((corner.re - (-0.5 / 0.02f64.tan())).abs() < 1e-12);
        assert!((corner.re + 24.99667).abs() < 1e-4);
        assert_eq!(corner.im, 0.5);
        assert_eq!(inv[(2, 2)], corner);
    }

    #[test]
    fn inverse_is_tridiagonal() {
        let p = ArrayParams::unit(5, 0.1).unwrap();
        let inv = inverse_hamiltonian_analytic(&p).unwrap();
        for r in 0..5_usize {
            for c in 0..5 {
                if r.abs_diff(c) > 1 {
                    assert_eq!(inv[(r, c)], C64::new(0.0, 0.0));
                }
            }
        }
        assert_eq!(inv[(0, 2)], C64::new(0.0, 0.0));
    }

    #[test]
    fn analytic_inverse_matches_dense_inversion() {
        for n in 2..=50 {
            let p = ArrayParams::unit(n, 0.02).unwrap();
            let h = build_hamiltonian(&p).unwrap();
            let inv = inverse_hamiltonian_analytic(&p).unwrap();
            let id = ComplexMatrix::identity(n);
            assert!(h.matmul(&inv).max_abs_diff(&id) < 1e-8, "n = {n}");
            if n <= 12 {
                assert!(dense_inverse(&h).max_abs_diff(&inv) < 1e-8, "n = {n}");
            }
        }
    }

    #[test]
    fn banded_products_match_dense() {
        let p = ArrayParams::new(7, 0.4, 1.7).unwrap();
        let tri = TridiagonalInverse::new(&p).unwrap();
        let x = ComplexMatrix::from_fn(7, 7, |r, c| C64::new(r as f64 - 0.3 * c as f64, 0.1 * (r * c) as f64));
        let dense = tri.to_dense();
        assert!(tri.apply_left(&x).max_abs_diff(&dense.matmul(&x)) < 1e-12);
        assert!(tri.apply_right(&x).max_abs_diff(&x.matmul(&dense)) < 1e-12);
    }

    #[test]
    fn decay_part_is_negative_semidefinite() {
        // The decay matrix Γ₀ cos(φ(m-n)) is positive semidefinite.
        let p = ArrayParams::unit(30, 0.37).unwrap();
        let n = p.n_qubits;
        let herm = ComplexMatrix::from_fn(n, n, |r, c| {
            C64::new((p.phase_phi * (r as f64 - c as f64)).cos(), 0.0)
        });
        let mut seed = 12345u64;
        for _ in 0..200 {
            let x: Vec<C64> = (0..n)
                .map(|_| {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let a = (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let b = (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                    C64::new(a, b)
                })
                .collect();
            let mut q = C64::new(0.0, 0.0);
            for r in 0..n {
                for c in 0..n {
                    q += x[r].conj() * herm[(r, c)] * x[c];
                }
            }
            assert!(q.re >= -1e-10);
        }
    }

    #[test]
    fn dispersion_values() {
        let p = ArrayParams::unit(10, 0.02).unwrap();
        let w = single_polariton_dispersion(PI / 2.0, &p).unwrap();
        assert!((w + 0.02f64.tan()).abs() < 1e-12);
        assert!((w + 0.0200027).abs() < 1e-7);
        for k in [0.1, 0.7, 1.9, 3.0] {
            let a = single_polariton_dispersion(k, &p).unwrap();
            let b = single_polariton_dispersion(-k, &p).unwrap();
            let c = single_polariton_dispersion(k + 2.0 * PI, &p).unwrap();
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
            assert!((a - c).abs() < 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn dispersion_small_momentum_asymptote() {
        let p = ArrayParams::unit(10, 0.001).unwrap();
        let k = 0.1;
        let exact = single_polariton_dispersion(k, &p).unwrap();
        let approx = -2.0 * 0.001 / (k * k);
        assert!(((exact - approx) / approx).abs() < 0.05);
    }

    #[test]
    fn dispersion_pole_is_an_error() {
        let p = ArrayParams::unit(10, 0.25).unwrap();
        assert!(matches!(
            single_polariton_dispersion(0.25, &p),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn invalid_params() {
        assert!(ArrayParams::unit(0, 0.1).is_err());
        assert!(ArrayParams::unit(3, 0.0).is_err());
        assert!(ArrayParams::unit(3, PI).is_err());
        assert!(ArrayParams::new(3, 0.1, 0.0).is_err());
        assert!(ArrayParams::new(3, 0.1, -1.0).is_err());
    }

    #[test]
    fn pair_basis_sizes_and_bijection() {
        assert!(pair_basis(1).is_err());
        let b2 = pair_basis(2).unwrap();
        assert_eq!(b2.size(), 1);
        assert_eq!(b2.pair(0), (0, 1));
        assert_eq!(b2.index(0, 1), Some(0));
        assert_eq!(pair_basis(3).unwrap().size(), 3);
        let b = pair_basis(120).unwrap();
        assert_eq!(b.size(), 7140);
        for i in 0..b.size() {
            let (n, m) = b.pair(i);
            assert!(n < m);
            assert_eq!(b.index(n, m), Some(i));
            assert_eq!(b.index(m, n), Some(i));
        }
        assert_eq!(b.index(4, 4), None);
    }
}
