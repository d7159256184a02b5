//! Ground-state bond currents, vortex counting, chiral current, and the
//! staggered-transition diagnostics: phase maps with thresholds, ground-level
//! derivatives, quasimomentum distributions, and the large-L edge-current
//! formula.

use crate::error::CoreError;
use crate::lattice::{build_quasimomentum, build_real_space, Boundary, LatticeSpec};
use crate::spectra::eig_hermitian;
use crate::C64;
use nalgebra::DVector;
use rayon::prelude::*;

/// Degeneracy tolerance factor relative to g_x.
pub const DEGENERACY_FACTOR: f64 = 1e-10;
/// Relative circulation threshold for vortex detection.
pub const VORTEX_TOL_REL: f64 = 1e-6;
/// Patterns with max |I| below this times the coupling scale count as
/// currentless (numerical noise, not circulation).
pub const CURRENT_FLOOR_REL: f64 = 1e-12;

/// Normalized lowest eigenstate of the open lattice.
#[derive(Debug, Clone)]
pub struct GroundState {
    /// Flat-indexed complex amplitudes, Σ|ψ|² = 1.
    pub psi: DVector<C64>,
    /// Ground frequency ω₁ (rad/s).
    pub omega1: f64,
    /// Ground level within 1e−10·g_x of the next level.
    pub degenerate: bool,
    /// Minimal-reflection-parity partner of the recombined doublet; present
    /// only when degenerate, for inspection.
    pub antisymmetric: Option<DVector<C64>>,
}

/// Antiunitary image (Aψ)_{n,m} = ψ̄_{n,−m}; A commutes with the lattice
/// Hamiltonian at every flux (conjugation flips γ, reflecting the columns
/// flips it back).
fn antiunitary_image(spec: &LatticeSpec, psi: &DVector<C64>) -> DVector<C64> {
    let mut out = DVector::<C64>::zeros(psi.len());
    for flat in 0..psi.len() {
        let s = spec.site(flat);
        out[spec.flat(crate::lattice::SiteIndex { n: s.n, m: -s.m })] = psi[flat].conj();
    }
    out
}

/// Deterministic sign for vectors whose gauge is fixed up to ±1.
fn sign_fix(v: &mut DVector<C64>) {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, x) in v.iter().enumerate() {
        let mag = x.norm();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    let p = v[best];
    if p.re < 0.0 || (p.re == 0.0 && p.im < 0.0) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Lowest eigenpair of the open lattice with the deterministic gauge.
///
/// A degenerate ground level (gap ≤ 1e−10·g_x) is recombined under the
/// antiunitary map A: ψ ↦ ψ̄_{n,−m} into the A-symmetric member
/// ψ⁺ ∝ ψ + Aψ, which satisfies ψ⁺_{n,−m} = ψ̄⁺_{n,m} and so carries no
/// central-row current; the A-antisymmetric partner (ψ⁻_{n,−m} = −ψ̄⁻_{n,m})
/// spans the rest of the doublet.
pub fn ground_state(spec: &LatticeSpec) -> Result<GroundState, CoreError> {
    if spec.row_boundary != Boundary::Open || spec.col_boundary != Boundary::Open {
        return Err(CoreError::domain("ground_state", "boundaries must be open"));
    }
    let eig = eig_hermitian(&build_real_space(spec))?;
    let tol = DEGENERACY_FACTOR * spec.g_x.abs();
    let omega1 = eig.values()[0];
    let cluster_len = (0..eig.dim())
        .take_while(|&j| eig.values()[j] - omega1 <= tol)
        .count();
    if cluster_len == 1 {
        return Ok(GroundState {
            psi: DVector::from_iterator(eig.dim(), eig.vector(0).iter().copied()),
            omega1,
            degenerate: false,
            antisymmetric: None,
        });
    }
    // Both v + Av and i(v − Av) are A-symmetric; at least one has norm ≥ √2
    // for a normalized v, so the larger is a stable representative.
    let reps = |v: &DVector<C64>| -> [DVector<C64>; 2] {
        let w = antiunitary_image(spec, v);
        [v + &w, (v - &w) * C64::new(0.0, 1.0)]
    };
    let pick = |pair: [DVector<C64>; 2]| -> (DVector<C64>, DVector<C64>) {
        let [a, b] = pair;
        if a.norm() >= b.norm() {
            (a, b)
        } else {
            (b, a)
        }
    };
    let v1 = DVector::from_iterator(eig.dim(), eig.vector(0).iter().copied());
    let v2 = DVector::from_iterator(eig.dim(), eig.vector(1).iter().copied());
    let (main1, alt1) = pick(reps(&v1));
    let mut plus = main1;
    plus /= C64::new(plus.norm(), 0.0);
    sign_fix(&mut plus);
    // Partner: an independent A-symmetric vector of the doublet, orthogonal
    // to ψ⁺ (the overlap of two A-symmetric vectors is real, so projection
    // preserves the symmetry), rotated by i into the antisymmetric gauge.
    let (main2, alt2) = pick(reps(&v2));
    let mut partner = None;
    for cand in [main2, alt2, alt1] {
        let mut c = cand;
        let overlap = plus.dotc(&c);
        c -= &plus * overlap;
        let norm = c.norm();
        if norm > 1e-6 {
            c /= C64::new(norm, 0.0);
            let mut anti = c * C64::new(0.0, 1.0);
            sign_fix(&mut anti);
            partner = Some(anti);
            break;
        }
    }
    Ok(GroundState {
        psi: plus,
        omega1,
        degenerate: true,
        antisymmetric: partner,
    })
}

/// Real bond currents of a normalized state on the open lattice.
///
/// Row bond (n,m)→(n+1,m): I = −i(z − z̄), z = −g_x ψ_{nm} ψ̄_{n+1,m};
/// column bond (n,m)→(n,m+1): z = g_y e^{iγn} ψ_{nm} ψ̄_{n,m+1}.
#[derive(Debug, Clone)]
pub struct CurrentPattern {
    pub l: usize,
    pub w: usize,
    /// (L−1)·W row-bond currents, index i_m·(L−1) + i_n.
    pub row: Vec<f64>,
    /// L·(W−1) column-bond currents, index i_m·L + i_n.
    pub col: Vec<f64>,
    /// Coupling scale max(|g_x|, |g_y|) used for noise floors.
    pub scale: f64,
}

impl CurrentPattern {
    /// Current on row bond (n,m)→(n+1,m) by zero-based indices.
    pub fn row_bond(&self, i_n: usize, i_m: usize) -> f64 {
        self.row[i_m * (self.l - 1) + i_n]
    }

    /// Current on column bond (n,m)→(n,m+1) by zero-based indices.
    pub fn col_bond(&self, i_n: usize, i_m: usize) -> f64 {
        self.col[i_m * self.l + i_n]
    }

    pub fn max_abs(&self) -> f64 {
        self.row
            .iter()
            .chain(self.col.iter())
            .fold(0.0f64, |a, &b| a.max(b.abs()))
    }

    /// Net outflow at every site; ≈ 0 for eigenstates.
    pub fn divergence(&self) -> Vec<f64> {
        let (l, w) = (self.l, self.w);
        let mut div = vec![0.0; l * w];
        for i_m in 0..w {
            for i_n in 0..l {
                let s = i_m * l + i_n;
                if i_n < l - 1 {
                    div[s] += self.row_bond(i_n, i_m);
                }
                if i_n > 0 {
                    div[s] -= self.row_bond(i_n - 1, i_m);
                }
                if i_m < w - 1 {
                    div[s] += self.col_bond(i_n, i_m);
                }
                if i_m > 0 {
                    div[s] -= self.col_bond(i_n, i_m - 1);
                }
            }
        }
        div
    }

    /// Copy with every supra-threshold current rescaled to ±1.
    pub fn normalized(&self) -> CurrentPattern {
        let thr = VORTEX_TOL_REL * self.max_abs();
        let squash = |xs: &[f64]| {
            xs.iter()
                .map(|&x| {
                    if x.abs() > thr {
                        if x > 0.0 {
                            1.0
                        } else {
                            -1.0
                        }
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        CurrentPattern {
            l: self.l,
            w: self.w,
            row: squash(&self.row),
            col: squash(&self.col),
            scale: 1.0,
        }
    }
}

/// Bond currents of an arbitrary flat-indexed state.
pub fn bond_currents_of(psi: &DVector<C64>, spec: &LatticeSpec) -> CurrentPattern {
    let (l, w) = (spec.l(), spec.w());
    debug_assert_eq!(psi.len(), l * w);
    let n_half = spec.n_half as i64;
    let mut row = vec![0.0; (l - 1) * w];
    let mut col = vec![0.0; l * (w - 1)];
    for i_m in 0..w {
        for i_n in 0..l - 1 {
            let a = i_m * l + i_n;
            let z = C64::new(-spec.g_x, 0.0) * psi[a] * psi[a + 1].conj();
            row[i_m * (l - 1) + i_n] = 2.0 * z.im;
        }
    }
    for i_m in 0..w - 1 {
        for i_n in 0..l {
            let a = i_m * l + i_n;
            let n = i_n as i64 - n_half;
            let z = C64::from_polar(spec.g_y, spec.gamma * n as f64) * psi[a] * psi[a + l].conj();
            col[i_m * l + i_n] = 2.0 * z.im;
        }
    }
    CurrentPattern {
        l,
        w,
        row,
        col,
        scale: spec.g_x.abs().max(spec.g_y.abs()),
    }
}

/// Bond currents of a ground state.
pub fn bond_currents(state: &GroundState, spec: &LatticeSpec) -> CurrentPattern {
    bond_currents_of(&state.psi, spec)
}

/// Chiral current I_c = Σ top-row bonds − Σ bottom-row bonds of a three-leg
/// pattern.
pub fn chiral_current(pattern: &CurrentPattern) -> Result<f64, CoreError> {
    if pattern.w != 3 {
        return Err(CoreError::domain(
            "chiral_current",
            format!("three-leg definition, got width {}", pattern.w),
        ));
    }
    let top: f64 = (0..pattern.l - 1).map(|i| pattern.row_bond(i, 2)).sum();
    let bottom: f64 = (0..pattern.l - 1).map(|i| pattern.row_bond(i, 0)).sum();
    Ok(top - bottom)
}

/// Signed-component vortex census of one current pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VortexCount {
    /// Positive plus negative circulation families.
    pub total: u32,
    pub positive: u32,
    pub negative: u32,
}

/// Counts vortices: currents are sign-normalized above `tol_rel`·max|I|, the
/// per-plaquette circulation of signs is thresholded at |circ| ≥ 2, and
/// 4-neighbor connected components are counted per circulation sign.
///
/// A pattern whose largest current sits below the noise floor counts as zero.
pub fn count_vortices(pattern: &CurrentPattern, tol_rel: f64) -> VortexCount {
    let zero = VortexCount {
        total: 0,
        positive: 0,
        negative: 0,
    };
    let (l, w) = (pattern.l, pattern.w);
    if l < 2 || w < 2 {
        return zero;
    }
    let mx = pattern.max_abs();
    if mx <= CURRENT_FLOOR_REL * pattern.scale {
        return zero;
    }
    let thr = tol_rel * mx;
    let sgn = |x: f64| {
        if x.abs() > thr {
            if x > 0.0 {
                1i8
            } else {
                -1i8
            }
        } else {
            0i8
        }
    };
    // Plaquette (i_n, i_m): counterclockwise loop
    // R(i_n, i_m) + C(i_n+1, i_m) − R(i_n, i_m+1) − C(i_n, i_m).
    let (pl, pw) = (l - 1, w - 1);
    let mut sign = vec![0i8; pl * pw];
    for i_m in 0..pw {
        for i_n in 0..pl {
            let circ = sgn(pattern.row_bond(i_n, i_m)) as i32
                + sgn(pattern.col_bond(i_n + 1, i_m)) as i32
                - sgn(pattern.row_bond(i_n, i_m + 1)) as i32
                - sgn(pattern.col_bond(i_n, i_m)) as i32;
            sign[i_m * pl + i_n] = if circ >= 2 {
                1
            } else if circ <= -2 {
                -1
            } else {
                0
            };
        }
    }
    let mut seen = vec![false; pl * pw];
    let mut positive = 0u32;
    let mut negative = 0u32;
    let mut stack = Vec::new();
    for start in 0..pl * pw {
        if sign[start] == 0 || seen[start] {
            continue;
        }
        let s = sign[start];
        if s > 0 {
            positive += 1;
        } else {
            negative += 1;
        }
        seen[start] = true;
        stack.push(start);
        while let Some(cell) = stack.pop() {
            let (i_n, i_m) = (cell % pl, cell / pl);
            let mut push = |x: usize, y: usize| {
                let c = y * pl + x;
                if !seen[c] && sign[c] == s {
                    seen[c] = true;
                    stack.push(c);
                }
            };
            if i_n + 1 < pl {
                push(i_n + 1, i_m);
            }
            if i_n > 0 {
                push(i_n - 1, i_m);
            }
            if i_m + 1 < pw {
                push(i_n, i_m + 1);
            }
            if i_m > 0 {
                push(i_n, i_m - 1);
            }
        }
    }
    VortexCount {
        total: positive + negative,
        positive,
        negative,
    }
}

/// Vortex counts and chiral currents over a (γ, K) grid, with thresholds.
#[derive(Debug, Clone)]
pub struct PhaseMap {
    pub gamma_grid: Vec<f64>,
    pub coupling_grid: Vec<f64>,
    /// `vortex_count[i][j]` at (gamma_grid[i], coupling_grid[j]).
    pub vortex_count: Vec<Vec<u32>>,
    pub chiral_current: Vec<Vec<f64>>,
    /// Smallest grid K above which every sampled γ shows at most one vortex:
    /// the last coupling column containing a multi-vortex cell, the first
    /// grid K when no such cell exists, `None` when the top column itself
    /// has one (no in-grid threshold).
    pub k_c: Option<f64>,
    /// Smallest grid |γ| whose row exceeds one vortex at some K; below it the
    /// pattern stays a single vortex (or none) at every sampled K.
    pub gamma_c: Option<f64>,
}

/// Canonical staggered-transition grids: flux over 201 points spanning
/// [−π, π], coupling ratio over 191 points spanning [0.01, 1.91].
pub fn default_phase_grids() -> (Vec<f64>, Vec<f64>) {
    let gammas = (0..201)
        .map(|i| {
            ((i as f64 - 100.0) * std::f64::consts::PI / 100.0)
                .clamp(-std::f64::consts::PI, std::f64::consts::PI)
        })
        .collect();
    let ks = (0..191).map(|j| (j + 1) as f64 * 0.01).collect();
    (gammas, ks)
}

/// Ground-state vortex count and chiral current per (γ, K) cell.
pub fn vortex_map(
    spec: &LatticeSpec,
    gamma_grid: &[f64],
    coupling_grid: &[f64],
) -> Result<PhaseMap, CoreError> {
    let rows: Result<Vec<(Vec<u32>, Vec<f64>)>, CoreError> = gamma_grid
        .par_iter()
        .map(|&gamma| {
            let mut counts = Vec::with_capacity(coupling_grid.len());
            let mut chirals = Vec::with_capacity(coupling_grid.len());
            for &k in coupling_grid {
                let cell = LatticeSpec {
                    gamma,
                    g_y: k * spec.g_x,
                    ..*spec
                };
                let gs = ground_state(&cell)?;
                let pattern = bond_currents(&gs, &cell);
                counts.push(count_vortices(&pattern, VORTEX_TOL_REL).total);
                chirals.push(chiral_current(&pattern).unwrap_or(f64::NAN));
            }
            Ok((counts, chirals))
        })
        .collect();
    let rows = rows?;
    let vortex_count: Vec<Vec<u32>> = rows.iter().map(|(c, _)| c.clone()).collect();
    let chiral: Vec<Vec<f64>> = rows.into_iter().map(|(_, c)| c).collect();

    let n_gamma = gamma_grid.len();
    let n_k = coupling_grid.len();
    let ok_col: Vec<bool> = (0..n_k)
        .map(|j| (0..n_gamma).all(|i| vortex_count[i][j] <= 1))
        .collect();
    let k_c = match (0..n_k).rev().find(|&j| !ok_col[j]) {
        None => Some(coupling_grid[0]),
        Some(jb) if jb + 1 == n_k => None,
        Some(jb) => Some(coupling_grid[jb]),
    };
    let gamma_c = (0..n_gamma)
        .filter(|&i| (0..n_k).any(|j| vortex_count[i][j] > 1))
        .map(|i| gamma_grid[i].abs())
        .fold(None, |acc: Option<f64>, g| {
            Some(acc.map_or(g, |a| a.min(g)))
        });

    Ok(PhaseMap {
        gamma_grid: gamma_grid.to_vec(),
        coupling_grid: coupling_grid.to_vec(),
        vortex_count,
        chiral_current: chiral,
        k_c,
        gamma_c,
    })
}

/// Row-momentum distribution ψ'_{k_x m} = Σ_n e^{−i(γ m n + k_x n)} ψ_{nm}.
#[derive(Debug, Clone)]
pub struct QuasimomentumDistribution {
    pub k_grid: Vec<f64>,
    /// `amplitudes[ik][i_m]`.
    pub amplitudes: Vec<Vec<C64>>,
}

impl QuasimomentumDistribution {
    pub fn magnitudes(&self) -> Vec<Vec<f64>> {
        self.amplitudes
            .iter()
            .map(|row| row.iter().map(|a| a.norm()).collect())
            .collect()
    }

    /// Index of the peak |ψ'| over k for leg `i_m`.
    pub fn peak_index(&self, i_m: usize) -> usize {
        let mut best = 0;
        let mut best_mag = -1.0;
        for (ik, row) in self.amplitudes.iter().enumerate() {
            let mag = row[i_m].norm();
            if mag > best_mag {
                best_mag = mag;
                best = ik;
            }
        }
        best
    }

    /// Index of the peak of Σ_m |ψ'_{k m}|² over k.
    pub fn peak_index_total(&self) -> usize {
        let mut best = 0;
        let mut best_mag = -1.0;
        for (ik, row) in self.amplitudes.iter().enumerate() {
            let mag: f64 = row.iter().map(|a| a.norm_sqr()).sum();
            if mag > best_mag {
                best_mag = mag;
                best = ik;
            }
        }
        best
    }
}

/// Fourier transform of a state along rows, leg by leg.
pub fn quasimomentum_distribution(
    psi: &DVector<C64>,
    spec: &LatticeSpec,
    k_grid: &[f64],
) -> QuasimomentumDistribution {
    let (l, w) = (spec.l(), spec.w());
    let n_half = spec.n_half as i64;
    let m_half = spec.m_half as i64;
    let amplitudes = k_grid
        .iter()
        .map(|&k| {
            (0..w)
                .map(|i_m| {
                    let m = i_m as i64 - m_half;
                    (0..l)
                        .map(|i_n| {
                            let n = i_n as i64 - n_half;
                            let phase =
                                -(spec.gamma * m as f64 * n as f64 + k * n as f64);
                            C64::from_polar(1.0, phase) * psi[i_m * l + i_n]
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    QuasimomentumDistribution {
        k_grid: k_grid.to_vec(),
        amplitudes,
    }
}

/// First and second derivatives of ω₁ with respect to K on a uniform grid,
/// by 2nd-order central stencils with one-sided ends.
pub fn ground_energy_derivatives(
    spec: &LatticeSpec,
    coupling_grid: &[f64],
    gamma: f64,
) -> Result<(Vec<f64>, Vec<f64>), CoreError> {
    let n = coupling_grid.len();
    if n < 5 {
        return Err(CoreError::domain(
            "ground_energy_derivatives",
            "need at least 5 grid points",
        ));
    }
    let dk = coupling_grid[1] - coupling_grid[0];
    for w in coupling_grid.windows(2) {
        if (w[1] - w[0] - dk).abs() > 1e-9 * dk.abs() {
            return Err(CoreError::domain(
                "ground_energy_derivatives",
                "coupling grid must be uniform",
            ));
        }
    }
    let omega1: Result<Vec<f64>, CoreError> = coupling_grid
        .par_iter()
        .map(|&k| {
            let cell = LatticeSpec {
                gamma,
                g_y: k * spec.g_x,
                ..*spec
            };
            Ok(ground_state(&cell)?.omega1)
        })
        .collect();
    let f = omega1?;
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 1..n - 1 {
        d1[i] = (f[i + 1] - f[i - 1]) / (2.0 * dk);
        d2[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (dk * dk);
    }
    d1[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dk);
    d1[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dk);
    d2[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (dk * dk);
    d2[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (dk * dk);
    Ok((d1, d2))
}

/// Largest local jump ratio of a sampled curve: for each interior jump,
/// |Δd_i| relative to the larger neighboring jump (with an absolute floor of
/// 1e−9·max|d|). Smooth curves stay near 1; a discontinuity spikes.
pub fn max_local_jump_ratio(d: &[f64]) -> f64 {
    if d.len() < 4 {
        return 0.0;
    }
    let floor = 1e-9 * d.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let jumps: Vec<f64> = d.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let mut worst = 0.0f64;
    for i in 1..jumps.len() - 1 {
        let local = jumps[i - 1].max(jumps[i + 1]).max(floor);
        worst = worst.max(jumps[i] / local);
    }
    worst
}

/// Plane-wave edge-current estimate −(2g_x/L)|e_{−1}(0)|² sin γ, with
/// e_{−1}(0) the bottom-leg amplitude of the k_x = 0 transverse ground mode.
///
/// Predicts the row-mean edge bond current of the open lattice at large L.
pub fn edge_current_asymptotic(spec: &LatticeSpec) -> Result<f64, CoreError> {
    if spec.w() != 3 {
        return Err(CoreError::domain(
            "edge_current_asymptotic",
            "three-leg formula",
        ));
    }
    if spec.l() < 101 {
        return Err(CoreError::domain(
            "edge_current_asymptotic",
            "asymptotic regime needs L >= 101",
        ));
    }
    let eig = eig_hermitian(&build_quasimomentum(0.0, spec))?;
    let e_bottom = eig.vector(0)[0].norm_sqr();
    Ok(-(2.0 * spec.g_x / spec.l() as f64) * e_bottom * spec.gamma.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const G: f64 = 1.0;

    fn spec(l_half: usize, k: f64, gamma: f64) -> LatticeSpec {
        LatticeSpec::open(l_half, 1, G, k * G, gamma)
    }

    #[test]
    fn ground_state_basics() {
        let s = LatticeSpec::open(0, 0, G, G, 0.0);
        let gs = ground_state(&s).unwrap();
        assert_eq!(gs.psi.len(), 1);
        assert_relative_eq!(gs.psi[0].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(gs.omega1, 0.0, epsilon = 1e-14);
        assert!(!gs.degenerate);
    }

    #[test]
    fn zero_flux_ground_state_is_real() {
        let s = spec(8, 0.3, 0.0);
        let gs = ground_state(&s).unwrap();
        for a in gs.psi.iter() {
            assert!(a.im.abs() < 1e-13, "{a}");
        }
        assert_relative_eq!(gs.psi.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn strong_column_coupling_row_weights() {
        // K → ∞: transverse mode e_{x,−1} = ½(1, −√2, 1), weights (¼, ½, ¼)
        // up to row-coupling admixture of order (2/K)².
        let s = spec(8, 100.0, 0.9);
        let gs = ground_state(&s).unwrap();
        let l = s.l();
        for (i_m, want) in [(0usize, 0.25), (1, 0.5), (2, 0.25)] {
            let got: f64 = (0..l).map(|i_n| gs.psi[i_m * l + i_n].norm_sqr()).sum();
            assert_relative_eq!(got, want, max_relative = 5e-3);
        }
    }

    #[test]
    fn degenerate_doublet_recombined() {
        for k in [0.1, 0.5, 1.0] {
            let s = spec(8, k, std::f64::consts::PI);
            let gs = ground_state(&s).unwrap();
            assert!(gs.degenerate, "K={k}");
            let partner = gs.antisymmetric.as_ref().unwrap();
            assert_relative_eq!(gs.psi.norm(), 1.0, epsilon = 1e-12);
            assert_relative_eq!(partner.norm(), 1.0, epsilon = 1e-12);
            assert!(gs.psi.dotc(partner).norm() < 1e-10);
            // ψ⁺ obeys ψ_{n,−m} = ψ̄_{n,m}, the partner the negated version.
            for flat in 0..s.sites() {
                let site = s.site(flat);
                let refl = s.flat(crate::lattice::SiteIndex {
                    n: site.n,
                    m: -site.m,
                });
                assert!((gs.psi[refl] - gs.psi[flat].conj()).norm() < 1e-10);
                assert!((partner[refl] + partner[flat].conj()).norm() < 1e-10);
            }
            // At γ = π the recombined state is current-free: the vortex
            // census sees a sub-floor pattern and reports zero.
            let p = bond_currents(&gs, &s);
            assert!(p.max_abs() <= CURRENT_FLOOR_REL * p.scale, "K={k}");
            assert_eq!(count_vortices(&p, VORTEX_TOL_REL).total, 0);
        }
    }

    #[test]
    fn central_row_currents_vanish() {
        for gamma in [-std::f64::consts::FRAC_PI_2, 0.7, 2.2] {
            for k in [0.1, 0.5, 1.0] {
                let s = spec(8, k, gamma);
                let gs = ground_state(&s).unwrap();
                let p = bond_currents(&gs, &s);
                let mx = p.max_abs();
                for i_n in 0..s.l() - 1 {
                    assert!(
                        p.row_bond(i_n, 1).abs() <= 1e-12 * mx,
                        "gamma={gamma} K={k} bond {i_n}"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_flux_means_zero_current() {
        let s = spec(8, 0.4, 0.0);
        let gs = ground_state(&s).unwrap();
        let p = bond_currents(&gs, &s);
        assert!(p.max_abs() < 1e-14);
        assert_eq!(count_vortices(&p, VORTEX_TOL_REL).total, 0);
        assert_relative_eq!(chiral_current(&p).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn currents_negate_under_flux_reversal() {
        let k = 0.3;
        for gamma in [0.6, 1.9] {
            let sp = spec(8, k, gamma);
            let sm = spec(8, k, -gamma);
            let pp = bond_currents(&ground_state(&sp).unwrap(), &sp);
            let pm = bond_currents(&ground_state(&sm).unwrap(), &sm);
            let mx = pp.max_abs();
            for (a, b) in pp.row.iter().zip(&pm.row) {
                assert!((a + b).abs() <= 1e-11 * mx, "{a} vs {b}");
            }
            for (a, b) in pp.col.iter().zip(&pm.col) {
                assert!((a + b).abs() <= 1e-11 * mx, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn eigenstate_currents_are_divergence_free() {
        let s = spec(5, 0.7, 1.1);
        let eig = eig_hermitian(&build_real_space(&s)).unwrap();
        for j in [0, 3, s.sites() - 1] {
            let psi = DVector::from_iterator(s.sites(), eig.vector(j).iter().copied());
            let p = bond_currents_of(&psi, &s);
            let mx = p.max_abs().max(1e-300);
            for d in p.divergence() {
                assert!(d.abs() <= 1e-12 * mx, "level {j}: {d}");
            }
        }
    }

    #[test]
    fn published_vortex_counts() {
        let cases = [(0.1, 7u32), (0.2, 4), (0.4, 2), (0.7, 1)];
        for (k, want) in cases {
            let s = spec(8, k, -std::f64::consts::FRAC_PI_2);
            let gs = ground_state(&s).unwrap();
            let p = bond_currents(&gs, &s);
            let got = count_vortices(&p, VORTEX_TOL_REL);
            assert_eq!(got.total, want, "K={k}");
            // Mirrored flux: same census with circulation families swapped.
            let sm = spec(8, k, std::f64::consts::FRAC_PI_2);
            let gm = ground_state(&sm).unwrap();
            let pm = bond_currents(&gm, &sm);
            let mirr = count_vortices(&pm, VORTEX_TOL_REL);
            assert_eq!(mirr.total, want, "K={k} mirrored");
            assert_eq!(mirr.positive, got.negative, "K={k} mirrored");
            assert_eq!(mirr.negative, got.positive, "K={k} mirrored");
        }
    }

    #[test]
    fn count_invariant_under_sign_normalization() {
        for (k, gamma) in [(0.1, -std::f64::consts::FRAC_PI_2), (0.3, 0.9), (0.7, 2.0)] {
            let s = spec(8, k, gamma);
            let p = bond_currents(&ground_state(&s).unwrap(), &s);
            let n = p.normalized();
            assert_eq!(
                count_vortices(&p, VORTEX_TOL_REL).total,
                count_vortices(&n, VORTEX_TOL_REL).total
            );
        }
    }

    #[test]
    fn count_threshold_stability() {
        let s = spec(8, 0.1, -std::f64::consts::FRAC_PI_2);
        let p = bond_currents(&ground_state(&s).unwrap(), &s);
        for tol in [1e-8, 1e-6, 1e-4] {
            assert_eq!(count_vortices(&p, tol).total, 7, "tol={tol}");
        }
    }

    #[test]
    fn chiral_current_symmetries() {
        let s0 = spec(8, 0.5, 0.0);
        let p0 = bond_currents(&ground_state(&s0).unwrap(), &s0);
        assert_relative_eq!(chiral_current(&p0).unwrap(), 0.0, epsilon = 1e-13);
        for gamma in [std::f64::consts::PI, -std::f64::consts::PI] {
            let s = spec(8, 0.5, gamma);
            let p = bond_currents(&ground_state(&s).unwrap(), &s);
            assert_relative_eq!(chiral_current(&p).unwrap(), 0.0, epsilon = 1e-13);
        }
        for gamma in [0.4, 1.3, 2.8] {
            let sp = spec(8, 0.5, gamma);
            let sm = spec(8, 0.5, -gamma);
            let ip = chiral_current(&bond_currents(&ground_state(&sp).unwrap(), &sp)).unwrap();
            let im = chiral_current(&bond_currents(&ground_state(&sm).unwrap(), &sm)).unwrap();
            assert_relative_eq!(ip, -im, max_relative = 1e-9);
            assert!(ip.abs() > 1e-6, "gamma={gamma} should carry current");
        }
        let wide = LatticeSpec::open(4, 2, G, 0.5, 0.9);
        let pw = bond_currents(&ground_state(&wide).unwrap(), &wide);
        assert!(chiral_current(&pw).is_err());
    }

    #[test]
    fn vortex_map_small_grid() {
        let base = spec(8, 1.0, 0.0);
        let gammas: Vec<f64> = (-10..=10)
            .map(|i| {
                (i as f64 * std::f64::consts::PI / 10.0)
                    .clamp(-std::f64::consts::PI, std::f64::consts::PI)
            })
            .collect();
        let ks = [0.1, 0.4, 0.7, 1.0, 1.5];
        let map = vortex_map(&base, &gammas, &ks).unwrap();
        for i in 0..gammas.len() {
            for j in 0..ks.len() {
                let mirror = map.vortex_count[gammas.len() - 1 - i][j];
                assert_eq!(map.vortex_count[i][j], mirror, "i={i} j={j}");
                let c = map.chiral_current[i][j];
                let cm = map.chiral_current[gammas.len() - 1 - i][j];
                assert!(
                    (c + cm).abs() <= 1e-9 * (1.0 + c.abs()),
                    "chiral asymmetry i={i} j={j}: {c} vs {cm}"
                );
            }
        }
        // Time-reversal-like rows carry no circulation at any K.
        for j in 0..ks.len() {
            assert_eq!(map.vortex_count[0][j], 0, "gamma=-pi j={j}");
            assert_eq!(map.vortex_count[gammas.len() - 1][j], 0, "gamma=+pi j={j}");
        }
        // Thresholds follow the count matrix: K_c is the last coupling column
        // with a multi-vortex cell, gamma_c the innermost such row.
        let k_c = map.k_c.expect("threshold exists");
        let jc = ks.iter().position(|&k| k == k_c).unwrap();
        assert!((0..gammas.len()).any(|i| map.vortex_count[i][jc] > 1));
        assert!(
            (jc + 1..ks.len()).all(|j| (0..gammas.len()).all(|i| map.vortex_count[i][j] <= 1))
        );
        let g_c = map.gamma_c.expect("multi-vortex rows exist");
        assert_relative_eq!(g_c, 0.3 * std::f64::consts::PI, epsilon = 1e-12);
        let (gg, kk) = default_phase_grids();
        assert_eq!((gg.len(), kk.len()), (201, 191));
        assert_relative_eq!(gg[0], -std::f64::consts::PI, epsilon = 0.0);
        assert_relative_eq!(gg[200], std::f64::consts::PI, epsilon = 0.0);
        assert_relative_eq!(gg[100], 0.0, epsilon = 0.0);
        assert_relative_eq!(kk[0], 0.01, epsilon = 1e-15);
        assert_relative_eq!(kk[190], 1.91, epsilon = 1e-12);
    }

    #[test]
    fn quasimomentum_peak_pinning() {
        let k_grid = crate::spectra::default_k_grid();
        // Uniform ψ_nm = e^{iγmn}/√(LW): transform collapses onto k_x = 0.
        let s = spec(8, 0.3, 0.4 * std::f64::consts::PI);
        let (l, w) = (s.l(), s.w());
        let norm = 1.0 / ((l * w) as f64).sqrt();
        let mut uniform = DVector::<C64>::zeros(l * w);
        for i_m in 0..w {
            for i_n in 0..l {
                let n = i_n as i64 - s.n_half as i64;
                let m = i_m as i64 - s.m_half as i64;
                uniform[i_m * l + i_n] =
                    C64::from_polar(norm, s.gamma * m as f64 * n as f64);
            }
        }
        let qd = quasimomentum_distribution(&uniform, &s, &k_grid);
        let min_abs = k_grid.iter().map(|k| k.abs()).fold(f64::INFINITY, f64::min);
        for i_m in 0..w {
            let peak = qd.peak_index(i_m);
            assert!(k_grid[peak].abs() <= min_abs + 1e-12);
        }
        // Ground-state distributions at the two reference fluxes: the total
        // weight and the dominant central leg pin to the grid point nearest
        // k = 0 (tie between ±π/401 allowed); the weak outer legs peak
        // within the packet width of zero but not exactly on it.
        for gamma in [0.4 * std::f64::consts::PI, 0.6 * std::f64::consts::PI] {
            let sg = spec(8, 0.3, gamma);
            let gs = ground_state(&sg).unwrap();
            let qd = quasimomentum_distribution(&gs.psi, &sg, &k_grid);
            let total = qd.peak_index_total();
            assert!(
                k_grid[total].abs() <= min_abs + 1e-12,
                "gamma={gamma}: total peak at {}",
                k_grid[total]
            );
            assert!(k_grid[qd.peak_index(1)].abs() <= min_abs + 1e-12);
            for i_m in [0, 2] {
                assert!(
                    k_grid[qd.peak_index(i_m)].abs() < 0.15,
                    "gamma={gamma} leg {i_m}: peak at {}",
                    k_grid[qd.peak_index(i_m)]
                );
            }
        }
    }

    #[test]
    fn derivative_stencils_recover_polynomials() {
        let s = spec(2, 1.0, 0.9);
        // Machine check of the stencils on ω₁(K) directly is entangled with
        // physics; validate the stencil arithmetic through a tiny lattice
        // whose ground level is smooth, then the jump-ratio helper on
        // synthetic data.
        let grid: Vec<f64> = (0..40).map(|i| 0.05 + i as f64 * 0.01).collect();
        let (d1, d2) = ground_energy_derivatives(&s, &grid, 0.9).unwrap();
        assert_eq!(d1.len(), grid.len());
        assert_eq!(d2.len(), grid.len());
        assert!(max_local_jump_ratio(&d1) <= 10.0);
        assert!(max_local_jump_ratio(&d2) <= 10.0);
        let quad: Vec<f64> = (0..50).map(|i| (i as f64 * 0.1).powi(2)).collect();
        assert!(max_local_jump_ratio(&quad) <= 1.5);
        let mut step = vec![0.0; 50];
        for v in step.iter_mut().skip(25) {
            *v = 1.0;
        }
        assert!(max_local_jump_ratio(&step) > 100.0);
        assert!(ground_energy_derivatives(&s, &grid[..4], 0.9).is_err());
        assert!(ground_energy_derivatives(&s, &[0.1, 0.2, 0.25, 0.3, 0.4], 0.9).is_err());
    }

    #[test]
    fn flat_coupling_keeps_derivatives_zero() {
        // g_x = 0: ω₁ = −2·K·g_x·(transverse factor)... with g_x = 0 the
        // spectrum scales purely linearly in g_y, so ω₁(K)/K is constant and
        // d²ω₁/dK² vanishes.
        let s = LatticeSpec::open(2, 1, 0.0, 1.0, 0.9);
        let grid: Vec<f64> = (1..=6).map(|i| 0.2 * i as f64).collect();
        let omega: Vec<f64> = grid
            .iter()
            .map(|&k| {
                let cell = LatticeSpec {
                    g_y: k,
                    ..s
                };
                ground_state(&cell).unwrap().omega1
            })
            .collect();
        let slope0 = omega[0] / grid[0];
        for (w, &k) in omega.iter().zip(&grid) {
            assert_relative_eq!(w / k, slope0, max_relative = 1e-9);
        }
    }

    #[test]
    fn edge_current_formula_matches_row_mean() {
        let s = LatticeSpec::open(50, 1, G, 0.7, std::f64::consts::FRAC_PI_2);
        let formula = edge_current_asymptotic(&s).unwrap();
        let gs = ground_state(&s).unwrap();
        let p = bond_currents(&gs, &s);
        let l = s.l();
        let mean_bottom: f64 = (0..l - 1).map(|i| p.row_bond(i, 0)).sum::<f64>() / (l - 1) as f64;
        let mean_top: f64 = (0..l - 1).map(|i| p.row_bond(i, 2)).sum::<f64>() / (l - 1) as f64;
        assert_relative_eq!(mean_bottom, formula, max_relative = 0.05);
        assert_relative_eq!(mean_top, -formula, max_relative = 0.05);
        // Standing-wave envelope doubles the mid-lattice bond relative to
        // the plane-wave mean: factor 2L/(L+1).
        let mid = p.row_bond(l / 2, 0);
        let envelope = 2.0 * l as f64 / (l as f64 + 1.0);
        assert_relative_eq!(mid, formula * envelope, max_relative = 0.02);
        // Sign flips with flux.
        let sm = LatticeSpec {
            gamma: -std::f64::consts::FRAC_PI_2,
            ..s
        };
        assert_relative_eq!(
            edge_current_asymptotic(&sm).unwrap(),
            -formula,
            epsilon = 1e-15
        );
        assert!(edge_current_asymptotic(&spec(8, 0.7, 1.0)).is_err());
        let wide = LatticeSpec::open(50, 2, G, 0.7, 1.0);
        assert!(edge_current_asymptotic(&wide).is_err());
    }
}
