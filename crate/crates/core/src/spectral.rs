//! Hard-core two-excitation problem.
//!
//! A symmetric amplitude `ψ_nm` with `ψ_nn = 0` evolves under
//! `(Hψ + ψH)_nm` restricted to `n ≠ m`. Dropping the diagonal rows and
//! columns is the infinite-anharmonicity limit exactly, so the operator acts
//! on the unordered-pair basis only.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{build_hamiltonian, ComplexMatrix, PairBasis, TridiagonalInverse};
use crate::{ArrayParams, Error, Result, C64};

/// Backward-error bound `‖Mv - Ev‖ ≤ SOLVER_TOLERANCE · ‖M‖_F`.
pub const SOLVER_TOLERANCE: f64 = 1e-9;

/// Archive format tag.
pub const ARCHIVE_VERSION: &str = "polariton-eigs/1";

const SORT_ORDER: &str = "re-ascending,im-descending";

#[derive(Debug, Clone)]
pub struct TwoExcitationOperator {
    pub params: ArrayParams,
    pub basis: PairBasis,
    pub matrix: ComplexMatrix,
}

/// Builds `M` with `M[(n,m),(n,m)] = H_nn + H_mm`, `M[(n,m),(l,m)] = H_nl`
/// and `M[(n,m),(n,l)] = H_ml` for `l ∉ {n, m}`.
///
/// `M` is complex symmetric because `H` is.
pub fn assemble_two_excitation_operator(
    params: &ArrayParams,
    basis: &PairBasis,
) -> Result<TwoExcitationOperator> {
    params.validate()?;
    if basis.n_qubits() != params.n_qubits {
        return Err(Error::Config(format!(
            "basis built for {} qubits, params have {}",
            basis.n_qubits(),
            params.n_qubits
        )));
    }
    let h = build_hamiltonian(params)?;
    let n_qubits = params.n_qubits;
    let size = basis.size();
    let mut data = vec![C64::new(0.0, 0.0); size * size];
    data.par_chunks_mut(size).enumerate().for_each(|(row, out)| {
        let (n, m) = basis.pair(row);
        out[row] = h[(n, n)] + h[(m, m)];
        for l in 0..n_qubits {
            if l == n || l == m {
                continue;
            }
            if let Some(col) = basis.index(l, m) {
                out[col] += h[(n, l)];
            }
            if let Some(col) = basis.index(n, l) {
                out[col] += h[(m, l)];
            }
        }
    });
    Ok(TwoExcitationOperator {
        params: *params,
        basis: basis.clone(),
        matrix: ComplexMatrix::from_vec(size, size, data),
    })
}

/// Basis permutation induced by reversing the qubit order `n → N - 1 - n`.
pub fn mirror_permutation(basis: &PairBasis) -> Vec<usize> {
    let last = basis.n_qubits() - 1;
    basis
        .pairs()
        .iter()
        .map(|&(n, m)| basis.index(last - m, last - n).expect("mirror of a pair is a pair"))
        .collect()
}

impl TwoExcitationOperator {
    /// `P M Pᵀ` where `perm[i]` is the image of basis state `i`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let size = self.basis.size();
        let mut out = ComplexMatrix::zeros(size, size);
        for r in 0..size {
            for c in 0..size {
                out[(perm[r], perm[c])] = self.matrix[(r, c)];
            }
        }
        Self {
            params: self.params,
            basis: self.basis.clone(),
            matrix: out,
        }
    }
}

/// Full spectrum of a [`TwoExcitationOperator`].
///
/// Column `j` of `vectors` is the eigenvector for `energies[j]`, unit norm,
/// with its largest component real and positive. Energies are sorted by
/// real part ascending, ties by imaginary part descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenpairSet {
    pub params: ArrayParams,
    pub energies: Vec<C64>,
    pub vectors: ComplexMatrix,
    /// `‖Mv - Ev‖ / ‖M‖_F` per pair.
    pub residuals: Vec<f64>,
    pub tolerance: f64,
}

fn sort_key(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(b.im.total_cmp(&a.im))
}

fn fix_phase(v: &mut [C64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    // First component within rounding of the maximum, so mirror-related
    // entries of equal size resolve the same way on every run.
    let pivot = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-9)).copied().unwrap();
    let phase = pivot.conj() / pivot.norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

/// Dense eigendecomposition with backward-error verification.
pub fn solve_eigenpairs(op: &TwoExcitationOperator) -> Result<EigenpairSet> {
    let size = op.basis.size();
    let frobenius = op.matrix.frobenius_norm();
    let a = op.matrix.to_faer();
    let evd = a.eigen().map_err(|e| Error::Eigensolver {
        size,
        frobenius,
        reason: format!("{e:?}"),
    })?;
    let u = evd.U();
    let s = evd.S().column_vector();

    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&i, &j| sort_key(&s[i], &s[j]));
    let energies: Vec<C64> = order.iter().map(|&i| s[i]).collect();
    let columns: Vec<Vec<C64>> = order
        .par_iter()
        .map(|&i| {
            let mut v: Vec<C64> = (0..size).map(|r| u[(r, i)]).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= norm);
            fix_phase(&mut v);
            v
        })
        .collect();
    let vectors = ComplexMatrix::from_fn(size, size, |r, c| columns[c][r]);

    let mv = &a * &vectors.to_faer();
    let residuals: Vec<f64> = (0..size)
        .into_par_iter()
        .map(|j| {
            let e = energies[j];
            (0..size)
                .map(|r| (mv[(r, j)] - e * vectors[(r, j)]).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / frobenius
        })
        .collect();
    if let Some((j, &worst)) = residuals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
    {
        if worst > SOLVER_TOLERANCE {
            return Err(Error::Eigensolver {
                size,
                frobenius,
                reason: format!("pair {j} has backward error {worst:e}"),
            });
        }
    }
    Ok(EigenpairSet {
        params: op.params,
        energies,
        vectors,
        residuals,
        tolerance: SOLVER_TOLERANCE,
    })
}

/// Symmetric `N × N` amplitude grid with zero diagonal.
///
/// Grids taken from eigenvectors have unit norm over all `N²` entries, so
/// the upper triangle carries norm `1/√2`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionGrid {
    pub values: ComplexMatrix,
}

impl WavefunctionGrid {
    pub fn n_qubits(&self) -> usize {
        self.values.rows()
    }

    /// Symmetric extension of pair amplitudes.
    pub fn from_pair_amplitudes(basis: &PairBasis, amps: &[C64]) -> Self {
        let n = basis.n_qubits();
        let mut values = ComplexMatrix::zeros(n, n);
        for (i, &(a, b)) in basis.pairs().iter().enumerate() {
            values[(a, b)] = amps[i];
            values[(b, a)] = amps[i];
        }
        Self { values }
    }

    /// Builds `ψ_nm = f(n, m)` for `n < m` and extends symmetrically.
    pub fn from_fn(n_qubits: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut values = ComplexMatrix::zeros(n_qubits, n_qubits);
        for a in 0..n_qubits {
            for b in a + 1..n_qubits {
                let v = f(a, b);
                values[(a, b)] = v;
                values[(b, a)] = v;
            }
        }
        Self { values }
    }

    /// Euclidean norm over all entries.
    pub fn norm(&self) -> f64 {
        self.values.frobenius_norm()
    }

    /// Euclidean norm over the upper triangle.
    pub fn pair_norm(&self) -> f64 {
        let n = self.n_qubits();
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .map(|(a, b)| self.values[(a, b)].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Upper-triangle amplitudes in pair-basis order.
    pub fn pair_amplitudes(&self) -> Vec<C64> {
        let n = self.n_qubits();
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .map(|(a, b)| self.values[(a, b)])
            .collect()
    }
}

impl EigenpairSet {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn basis(&self) -> Result<PairBasis> {
        PairBasis::new(self.params.n_qubits)
    }

    pub fn vector(&self, index: usize) -> Result<Vec<C64>> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        Ok((0..self.vectors.rows()).map(|r| self.vectors[(r, index)]).collect())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, &Archive::from(self))?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let archive: Archive = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        archive.try_into()
    }
}

pub fn eigenvector_to_grid(set: &EigenpairSet, index: usize) -> Result<WavefunctionGrid> {
    let v: Vec<C64> = set
        .vector(index)?
        .into_iter()
        .map(|z| z * std::f64::consts::FRAC_1_SQRT_2)
        .collect();
    Ok(WavefunctionGrid::from_pair_amplitudes(&set.basis()?, &v))
}

/// Largest entry of the sparse-form residual
/// `(H⁻¹Ψ + ΨH⁻¹)_nm - 2δ_nm (ΨH⁻¹)_nn - 2ε (H⁻¹ΨH⁻¹)_nm` with `Ψ = HψH`,
/// using the three-band inverse.
pub fn sparse_form_residual(params: &ArrayParams, grid: &WavefunctionGrid, eps2: C64) -> Result<f64> {
    let tri = TridiagonalInverse::new(params)?;
    let h = build_hamiltonian(params)?;
    let psi_big = h.matmul(&grid.values).matmul(&h);
    let left = tri.apply_left(&psi_big);
    let right = tri.apply_right(&psi_big);
    let both = tri.apply_left(&right);
    let n = params.n_qubits;
    let mut worst = 0.0_f64;
    for a in 0..n {
        for b in 0..n {
            let mut r = left[(a, b)] + right[(a, b)] - eps2 * both[(a, b)];
            if a == b {
                r -= 2.0 * right[(a, a)];
            }
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}

/// Checks eigenpair `index` against the sparse reformulation.
pub fn crosscheck_sparse_form(set: &EigenpairSet, params: &ArrayParams, index: usize) -> Result<f64> {
    let grid = eigenvector_to_grid(set, index)?;
    sparse_form_residual(params, &grid, set.energies[index])
}

#[derive(Serialize, Deserialize)]
struct Archive {
    version: String,
    params: ArrayParams,
    basis_size: usize,
    solver_tolerance: f64,
    sort_order: String,
    energies: Vec<[f64; 2]>,
    /// One entry per eigenvector, in energy order.
    vectors: Vec<Vec<[f64; 2]>>,
    residuals: Vec<f64>,
}

impl From<&EigenpairSet> for Archive {
    fn from(set: &EigenpairSet) -> Self {
        let pair = |z: C64| [z.re, z.im];
        Self {
            version: ARCHIVE_VERSION.into(),
            params: set.params,
            basis_size: set.len(),
            solver_tolerance: set.tolerance,
            sort_order: SORT_ORDER.into(),
            energies: set.energies.iter().copied().map(pair).collect(),
            vectors: (0..set.len())
                .map(|c| (0..set.vectors.rows()).map(|r| pair(set.vectors[(r, c)])).collect())
                .collect(),
            residuals: set.residuals.clone(),
        }
    }
}

impl TryFrom<Archive> for EigenpairSet {
    type Error = Error;

    fn try_from(a: Archive) -> Result<Self> {
        if a.version != ARCHIVE_VERSION {
            return Err(Error::Archive(format!("unsupported version {:?}", a.version)));
        }
        a.params.validate()?;
        let size = a.params.n_qubits * (a.params.n_qubits - 1) / 2;
        if a.basis_size != size
            || a.energies.len() != size
            || a.residuals.len() != size
            || a.vectors.len() != size
            || a.vectors.iter().any(|v| v.len() != size)
        {
            return Err(Error::Archive(format!(
                "inconsistent sizes for basis of {size}"
            )));
        }
        let c = |p: [f64; 2]| C64::new(p[0], p[1]);
        Ok(Self {
            params: a.params,
            energies: a.energies.into_iter().map(c).collect(),
            vectors: ComplexMatrix::from_fn(size, size, |r, col| c(a.vectors[col][r])),
            residuals: a.residuals,
            tolerance: a.solver_tolerance,
        })
    }
}
