use std::f64::consts::PI;

use super::fourier::FourierMap;
use crate::spectral::WavefunctionGrid;
use crate::{Error, Result, C64};

fn ipr_of(weights: impl Iterator<Item = f64> + Clone) -> Result<f64> {
    let total: f64 = weights.clone().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let sum_sq: f64 = weights.map(|w| (w / total).powi(2)).sum();
    Ok(1.0 / sum_sq)
}

/// `1/Σp²` over Fourier cells, `p` the normalized map.
pub fn momentum_ipr(fmap: &FourierMap) -> Result<f64> {
    ipr_of(fmap.magnitudes.iter().copied())
}

/// `1/Σp²` over unordered pairs, `p = |ψ_nm|²` normalized.
pub fn real_space_ipr(grid: &WavefunctionGrid) -> Result<f64> {
    ipr_of(grid.pair_amplitudes().into_iter().map(|z| z.norm_sqr()))
}

/// Antisymmetrized standing-wave product, normalized over unordered pairs.
///
/// For sites `n > m` (numbered from 1) the amplitude is
/// `cos k₁(n-½) cos k₂(m-½) - cos k₂(n-½) cos k₁(m-½)`, extended symmetrically.
/// It vanishes on the diagonal.
pub fn fermionized_ansatz(n_qubits: usize, k1: f64, k2: f64) -> Result<WavefunctionGrid> {
    let c1: Vec<f64> = (0..n_qubits).map(|i| (k1 * (i as f64 + 0.5)).cos()).collect();
    let c2: Vec<f64> = (0..n_qubits).map(|i| (k2 * (i as f64 + 0.5)).cos()).collect();
    // For a < b the larger site is b.
    let mut grid = WavefunctionGrid::from_fn(n_qubits, |a, b| C64::new(c1[b] * c2[a] - c2[b] * c1[a], 0.0));
    let norm = grid.pair_norm();
    if norm < 1e-12 * (n_qubits as f64) {
        return Err(Error::DegenerateMomenta(k1 - k2));
    }
    for z in grid.values.as_mut_slice() {
        *z /= norm;
    }
    Ok(grid)
}

fn overlap_with(ansatz: &WavefunctionGrid, psi: &[C64], psi_norm_sq: f64) -> f64 {
    let a = ansatz.pair_amplitudes();
    let dot: C64 = a.iter().zip(psi).map(|(x, y)| x.conj() * y).sum();
    dot.norm_sqr() / psi_norm_sq
}

/// `|⟨ansatz|ψ⟩|²` with both normalized over unordered pairs.
pub fn fermionized_overlap(grid: &WavefunctionGrid, k1: f64, k2: f64) -> Result<f64> {
    let psi = grid.pair_amplitudes();
    let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if norm_sq == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let a = fermionized_ansatz(grid.n_qubits(), k1, k2)?;
    Ok(overlap_with(&a, &psi, norm_sq))
}

/// Best ansatz overlap and the momenta attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapFit {
    pub overlap: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Nelder-Mead minimisation of `f` over the plane.
fn nelder_mead(f: &mut impl FnMut([f64; 2]) -> f64, start: [f64; 2], step: f64, max_iter: usize, tol: f64) -> ([f64; 2], f64) {
    let mut simplex = [
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ];
    let mut values = simplex.map(&mut *f);
    for _ in 0..max_iter {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        if (values[2] - values[0]).abs() < tol {
            break;
        }
        let centroid = [(simplex[0][0] + simplex[1][0]) / 2.0, (simplex[0][1] + simplex[1][1]) / 2.0];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };
        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] { along(-0.5) } else { along(0.5) };
            let fc = f(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        (simplex[0][0] + simplex[i][0]) / 2.0,
                        (simplex[0][1] + simplex[i][1]) / 2.0,
                    ];
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    (simplex[best], values[best])
}

/// Maximizes the ansatz overlap, starting from the strongest Fourier peaks
/// folded into `[0, π]`.
pub fn maximize_fermionized_overlap(grid: &WavefunctionGrid, fmap: &FourierMap, seeds: usize) -> Result<OverlapFit> {
    let psi = grid.pair_amplitudes();
    let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if norm_sq == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let n = grid.n_qubits();
    let mut objective = |x: [f64; 2]| match fermionized_ansatz(n, x[0], x[1]) {
        Ok(a) => -overlap_with(&a, &psi, norm_sq),
        Err(_) => 0.0,
    };
    let mut peaks = fmap.peaks(0.0);
    peaks.sort_by(|a, b| fmap.at(b.0, b.1).total_cmp(&fmap.at(a.0, a.1)).then(a.cmp(b)));
    let mut starts: Vec<[f64; 2]> = Vec::new();
    for &(ix, iy) in &peaks {
        let (mut a, mut b) = (fmap.k[ix].abs(), fmap.k[iy].abs());
        if a < b {
            std::mem::swap(&mut a, &mut b);
        }
        if (a - b).abs() < 1e-3 {
            b = (b - fmap.spacing()).max(0.0);
        }
        if !starts.iter().any(|s| (s[0] - a).abs() < 1e-9 && (s[1] - b).abs() < 1e-9) {
            starts.push([a, b]);
        }
        if starts.len() == seeds.max(1) {
            break;
        }
    }
    if starts.is_empty() {
        starts.push([PI / 2.0, PI / 4.0]);
    }
    let step = fmap.spacing() / 2.0;
    let mut best = OverlapFit {
        overlap: 0.0,
        k1: starts[0][0],
        k2: starts[0][1],
    };
    for s in starts {
        let (x, v) = nelder_mead(&mut objective, s, step, 400, 1e-12);
        if -v > best.overlap {
            best = OverlapFit {
                overlap: -v,
                k1: x[0],
                k2: x[1],
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fourier::{centered_grid, fourier_map};

    #[test]
    fn ipr_of_simple_distributions() {
        let mut single = vec![0.0; 25];
        single[7] = 3.0;
        let map = FourierMap {
            k: centered_grid(5),
            magnitudes: single,
        };
        assert!((momentum_ipr(&map).unwrap() - 1.0).abs() < 1e-15);
        let uniform = FourierMap {
            k: centered_grid(5),
            magnitudes: vec![0.4; 25],
        };
        assert!((momentum_ipr(&uniform).unwrap() - 25.0).abs() < 1e-12);
        let zero = FourierMap {
            k: centered_grid(5),
            magnitudes: vec![0.0; 25],
        };
        assert!(matches!(momentum_ipr(&zero), Err(Error::ZeroNorm)));
    }

    #[test]
    fn real_space_ipr_counts_pairs() {
        let g = WavefunctionGrid::from_fn(6, |a, b| C64::new(if (a, b) == (1, 4) { 1.0 } else { 0.0 }, 0.0));
        assert!((real_space_ipr(&g).unwrap() - 1.0).abs() < 1e-15);
        let u = WavefunctionGrid::from_fn(6, |_, _| C64::new(0.0, 2.0));
        assert!((real_space_ipr(&u).unwrap() - 15.0).abs() < 1e-12);
    }

    #[test]
    fn eight_peak_state_has_ipr_near_eight() {
        // Symmetric standing-wave products with on-grid momenta give eight
        // equal Fourier peaks at (±k₁, ±k₂) and (±k₂, ±k₁).
        let n = 40;
        let k = centered_grid(n);
        let (k1, k2) = (k[32], k[27]);
        let g = WavefunctionGrid::from_fn(n, |a, b| {
            let (a, b) = ((a + 1) as f64, (b + 1) as f64);
            C64::new((k1 * b).cos() * (k2 * a).cos() + (k2 * b).cos() * (k1 * a).cos(), 0.0)
        });
        let f = fourier_map(&g, n).unwrap();
        let ipr = momentum_ipr(&f).unwrap();
        assert!((ipr - 8.0).abs() < 1.6, "{ipr}");
        assert_eq!(f.peaks(0.5).len(), 8);
    }

    #[test]
    fn ansatz_against_itself() {
        let g = fermionized_ansatz(30, 2.7, 2.9).unwrap();
        assert!((fermionized_overlap(&g, 2.7, 2.9).unwrap() - 1.0).abs() < 1e-12);
        for n in 0..30 {
            assert_eq!(g.values[(n, n)], C64::new(0.0, 0.0));
        }
        assert!(matches!(fermionized_overlap(&g, 1.0, 1.0), Err(Error::DegenerateMomenta(_))));
    }

    #[test]
    fn maximization_recovers_the_momenta() {
        let n = 30;
        let (k1, k2) = (2.81, 2.52);
        let g = fermionized_ansatz(n, k1, k2).unwrap();
        let f = fourier_map(&g, 2 * n).unwrap();
        let fit = maximize_fermionized_overlap(&g, &f, 4).unwrap();
        assert!(fit.overlap > 1.0 - 1e-8, "{fit:?}");
        assert!((fit.k1 - k1).abs() < 1e-3 && (fit.k2 - k2).abs() < 1e-3, "{fit:?}");
    }

    #[test]
    fn nelder_mead_finds_a_quadratic_minimum() {
        let mut f = |x: [f64; 2]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2);
        let (x, v) = nelder_mead(&mut f, [0.0, 0.0], 0.1, 500, 1e-16);
        assert!(v < 1e-12 && (x[0] - 1.0).abs() < 1e-5 && (x[1] + 0.5).abs() < 1e-5);
    }
}
