//! Hermitian eigendecomposition and spectrum-level products: band structures
//! with transverse weights, flux-swept spectra, three-leg perturbative
//! formulas, and two-level gap maps.

use crate::error::{CoreError, Warning};
use crate::lattice::{
    build_quasimomentum_dims, build_real_space, index_window, HermitianMatrix, LatticeSpec,
};
use crate::C64;
use nalgebra::{DMatrix, DVectorView};
use rayon::prelude::*;

/// Residual bound factor for `‖H v − ω v‖₂ ≤ RESIDUAL_FACTOR · ‖H‖_F`.
pub const RESIDUAL_FACTOR: f64 = 1e-9;
/// Orthonormality bound on `max |V†V − 1|`.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Sorted, gauge-fixed eigendecomposition of a Hermitian matrix.
///
/// Values ascend; column j of the vector matrix pairs with value j. Each
/// column's largest-magnitude component is rotated real positive (ties broken
/// by lowest index), so identical inputs produce identical decompositions.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl EigenSystem {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    /// Column view of eigenvector j.
    pub fn vector(&self, j: usize) -> DVectorView<'_, C64> {
        self.vectors.column(j)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Smallest gap between adjacent levels.
    pub fn min_adjacent_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Adjacent level pairs closer than `tol`.
    pub fn degenerate_pairs(&self, tol: f64) -> Vec<(usize, usize)> {
        self.values
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1] - w[0] <= tol)
            .map(|(i, _)| (i, i + 1))
            .collect()
    }

    /// True when level j sits within `tol` of a neighboring level.
    pub fn is_degenerate(&self, j: usize, tol: f64) -> bool {
        (j > 0 && self.values[j] - self.values[j - 1] <= tol)
            || (j + 1 < self.values.len() && self.values[j + 1] - self.values[j] <= tol)
    }
}

/// Full eigendecomposition with residual and orthonormality verification.
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<EigenSystem, CoreError> {
    let m = h.as_matrix();
    let n = m.nrows();
    let mut fm = faer::Mat::<C64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            fm[(i, j)] = m[(i, j)];
        }
    }
    let se = fm
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| CoreError::Validation(format!("eigendecomposition failed: {e:?}")))?;

    let values: Vec<f64> = (0..n).map(|i| se.S()[i].re).collect();
    debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
    let u = se.U();
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            vectors[(i, j)] = u[(i, j)];
        }
    }

    for j in 0..n {
        let mut col = vectors.column_mut(j);
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for (i, v) in col.iter().enumerate() {
            let mag = v.norm();
            if mag > best_mag {
                best_mag = mag;
                best = i;
            }
        }
        if best_mag > 0.0 {
            let phase = col[best] / C64::new(best_mag, 0.0);
            let rot = phase.conj();
            for v in col.iter_mut() {
                *v *= rot;
            }
            // Pin the pivot exactly real to make the gauge bit-reproducible.
            let pivot = col[best];
            col[best] = C64::new(pivot.norm(), 0.0);
        }
    }

    let bound = RESIDUAL_FACTOR * h.norm_fro();
    let hv = m * &vectors;
    for j in 0..n {
        let residual = (0..n)
            .map(|i| (hv[(i, j)] - C64::new(values[j], 0.0) * vectors[(i, j)]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > bound {
            return Err(CoreError::EigenResidual { residual, bound });
        }
    }
    let gram = vectors.adjoint() * &vectors;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            let dev = (gram[(i, j)] - target).norm();
            if dev > ORTHONORMALITY_TOL {
                return Err(CoreError::Validation(format!(
                    "eigenvector orthonormality violated at ({i}, {j}): deviation {dev:.3e}"
                )));
            }
        }
    }

    Ok(EigenSystem { values, vectors })
}

/// Band structure over a row-momentum grid, with per-state transverse weight.
#[derive(Debug, Clone)]
pub struct BandStructure {
    pub k_grid: Vec<f64>,
    /// `bands[k][j]`: ascending frequencies at grid point k.
    pub bands: Vec<Vec<f64>>,
    /// `edge_weight[k][j]`: mean transverse position ⟨m⟩ of state (k, j).
    pub edge_weight: Vec<Vec<f64>>,
}

/// Default row-momentum grid: 401 uniform points over (−π, π].
pub fn default_k_grid() -> Vec<f64> {
    let n = 401;
    (0..n)
        .map(|i| -std::f64::consts::PI + (i + 1) as f64 * std::f64::consts::TAU / n as f64)
        .collect()
}

/// Bands of the open-column strip at each `k_x`, any width.
pub fn bands_open_column_dims(
    w: usize,
    g_x: f64,
    g_y: f64,
    gamma: f64,
    k_grid: &[f64],
) -> Result<BandStructure, CoreError> {
    let m_offsets = index_window(w);
    let per_k: Result<Vec<(Vec<f64>, Vec<f64>)>, CoreError> = k_grid
        .par_iter()
        .map(|&k| {
            let h = build_quasimomentum_dims(k, w, g_x, g_y, gamma);
            let eig = eig_hermitian(&h)?;
            let weights: Vec<f64> = (0..w)
                .map(|j| {
                    eig.vector(j)
                        .iter()
                        .zip(&m_offsets)
                        .map(|(u, &m)| m as f64 * u.norm_sqr())
                        .sum()
                })
                .collect();
            Ok((eig.values().to_vec(), weights))
        })
        .collect();
    let per_k = per_k?;
    Ok(BandStructure {
        k_grid: k_grid.to_vec(),
        bands: per_k.iter().map(|(v, _)| v.clone()).collect(),
        edge_weight: per_k.into_iter().map(|(_, w)| w).collect(),
    })
}

/// Bands of the open-column strip described by `spec`.
pub fn bands_open_column(spec: &LatticeSpec, k_grid: &[f64]) -> Result<BandStructure, CoreError> {
    if spec.col_boundary != crate::lattice::Boundary::Open {
        return Err(CoreError::domain(
            "bands_open_column",
            "column boundary must be open",
        ));
    }
    bands_open_column_dims(spec.w(), spec.g_x, spec.g_y, spec.gamma, k_grid)
}

/// Full real-space spectrum per flux value.
#[derive(Debug, Clone)]
pub struct ButterflySpectrum {
    pub gamma_grid: Vec<f64>,
    /// `levels[i]`: ascending L·W eigenfrequencies at `gamma_grid[i]`.
    pub levels: Vec<Vec<f64>>,
}

/// Default flux grid: 401 uniform points over [0, 2π].
pub fn default_gamma_grid() -> Vec<f64> {
    (0..=400)
        .map(|i| i as f64 * std::f64::consts::TAU / 400.0)
        .collect()
}

/// Real-space spectrum swept over flux values.
pub fn butterfly(spec: &LatticeSpec, gamma_grid: &[f64]) -> Result<ButterflySpectrum, CoreError> {
    let levels: Result<Vec<Vec<f64>>, CoreError> = gamma_grid
        .par_iter()
        .map(|&gamma| {
            let s = LatticeSpec { gamma, ..*spec };
            let eig = eig_hermitian(&build_real_space(&s))?;
            Ok(eig.values().to_vec())
        })
        .collect();
    Ok(ButterflySpectrum {
        gamma_grid: gamma_grid.to_vec(),
        levels: levels?,
    })
}

/// Second-order ground-level estimates of the three-leg ladder at row momenta
/// 0 and γ: E'_0 = −2g_x − (g_y²/g_x)/(1 − cos γ) and
/// E'_γ = −2g_x − (g_y²/2g_x)/(1 − cos γ).
pub fn threeleg_perturbative(gamma: f64, g_x: f64, g_y: f64) -> Result<(f64, f64), CoreError> {
    let denom = 1.0 - gamma.cos();
    if denom.abs() < 1e-12 {
        return Err(CoreError::domain(
            "threeleg_perturbative",
            "flux gamma = 0 (mod 2pi): degenerate legs, perturbative split undefined",
        ));
    }
    let base = -2.0 * g_x;
    let e0 = base - (g_y * g_y / g_x) / denom;
    let eg = base - (g_y * g_y / (2.0 * g_x)) / denom;
    Ok((e0, eg))
}

/// Gap ω₂ − ω₁ of the real-space spectrum on a (γ, K) grid.
#[derive(Debug, Clone)]
pub struct GapMap {
    pub gamma_grid: Vec<f64>,
    pub coupling_grid: Vec<f64>,
    /// `omega21[i][j]` at (gamma_grid[i], coupling_grid[j]).
    pub omega21: Vec<Vec<f64>>,
}

/// Frequency interval between the two lowest levels over a (γ, K) grid,
/// K = g_y/g_x.
pub fn gap_map(
    spec: &LatticeSpec,
    gamma_grid: &[f64],
    coupling_grid: &[f64],
) -> Result<GapMap, CoreError> {
    let omega21: Result<Vec<Vec<f64>>, CoreError> = gamma_grid
        .par_iter()
        .map(|&gamma| {
            coupling_grid
                .iter()
                .map(|&k| {
                    let s = LatticeSpec {
                        gamma,
                        g_y: k * spec.g_x,
                        ..*spec
                    };
                    let eig = eig_hermitian(&build_real_space(&s))?;
                    Ok(eig.values()[1] - eig.values()[0])
                })
                .collect()
        })
        .collect();
    Ok(GapMap {
        gamma_grid: gamma_grid.to_vec(),
        coupling_grid: coupling_grid.to_vec(),
        omega21: omega21?,
    })
}

/// Warns when the sampled minimum of the lowest band sits away from the grid
/// point nearest k_x = 0. Grids excluding k = 0 have two equidistant nearest
/// points; either one passes.
pub fn lowest_band_minimum_check(band: &BandStructure) -> Option<Warning> {
    let nearest_abs = band
        .k_grid
        .iter()
        .map(|k| k.abs())
        .fold(f64::INFINITY, f64::min);
    let min_idx = band
        .bands
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a[0].partial_cmp(&b[0]).unwrap())
        .map(|(i, _)| i)?;
    let at_min = band.k_grid[min_idx].abs();
    if at_min > nearest_abs + 1e-12 * (1.0 + nearest_abs) {
        return Some(Warning::new(
            "lowest_band_minimum_check",
            format!(
                "lowest-band minimum at k = {} rather than the grid point nearest 0 (|k| = {nearest_abs})",
                band.k_grid[min_idx]
            ),
        ));
    }
    None
}
