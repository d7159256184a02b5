//! Dense single-particle Hamiltonians of the Harper model.
//!
//! Sites `(n, m)` with `n` along rows and `m` along columns. Row bonds carry
//! `−g_x`; the column bond `(n, m) → (n, m+1)` carries `g_y e^{iγn}` on the
//! creation side. This gauge (phase on column bonds only) is the one and only
//! stored gauge. `ħ = 1`: entries are angular frequencies.
//!
//! Index windows are `[−⌈(d−1)/2⌉, +⌊(d−1)/2⌋]`, the symmetric range
//! `[−N, N]` for odd extents with the extra site on the negative side for
//! even ones. The flat index is row-major over `m`, then `n`.

use crate::error::{CoreError, Warning};
use crate::C64;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Boundary condition along one direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Geometry and couplings of one lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Half-length N; lattice length L = 2N+1.
    pub n_half: usize,
    /// Half-width M; lattice width W = 2M+1.
    pub m_half: usize,
    /// Row hopping strength (rad/s).
    pub g_x: f64,
    /// Column hopping strength (rad/s).
    pub g_y: f64,
    /// Effective magnetic flux per plaquette (rad).
    pub gamma: f64,
    pub row_boundary: Boundary,
    pub col_boundary: Boundary,
}

impl LatticeSpec {
    /// Fully open lattice.
    pub fn open(n_half: usize, m_half: usize, g_x: f64, g_y: f64, gamma: f64) -> Self {
        LatticeSpec {
            n_half,
            m_half,
            g_x,
            g_y,
            gamma,
            row_boundary: Boundary::Open,
            col_boundary: Boundary::Open,
        }
    }

    pub fn l(&self) -> usize {
        2 * self.n_half + 1
    }

    pub fn w(&self) -> usize {
        2 * self.m_half + 1
    }

    pub fn sites(&self) -> usize {
        self.l() * self.w()
    }

    /// Coupling ratio K = g_y/g_x.
    pub fn coupling_ratio(&self) -> f64 {
        self.g_y / self.g_x
    }

    /// Canonical-range and commensuration checks.
    pub fn validate(&self) -> Result<Vec<Warning>, CoreError> {
        if !self.g_x.is_finite() || !self.g_y.is_finite() || !self.gamma.is_finite() {
            return Err(CoreError::domain("LatticeSpec", "non-finite parameter"));
        }
        if !(self.gamma > -std::f64::consts::PI - 1e-12
            && self.gamma <= std::f64::consts::PI + 1e-12)
        {
            return Err(CoreError::domain(
                "LatticeSpec",
                format!("gamma = {} outside (-pi, pi]", self.gamma),
            ));
        }
        let mut warnings = Vec::new();
        if self.row_boundary == Boundary::Periodic {
            // Total flux through the torus is commensurate only when
            // γ·L ∈ 2πZ; otherwise the wrap bond carries a flux defect.
            let cycles = self.gamma * self.l() as f64 / std::f64::consts::TAU;
            if (cycles - cycles.round()).abs() > 1e-9 {
                warnings.push(Warning::new(
                    "LatticeSpec",
                    format!(
                        "row-periodic with incommensurate flux: gamma*L/2pi = {cycles:.6} \
                         is not an integer; the wrap bond breaks magnetic translation symmetry"
                    ),
                ));
            }
        }
        Ok(warnings)
    }

    /// Flat index of a site: (m+M)·L + (n+N).
    pub fn flat(&self, site: SiteIndex) -> usize {
        debug_assert!(site.n.unsigned_abs() as usize <= self.n_half);
        debug_assert!(site.m.unsigned_abs() as usize <= self.m_half);
        (site.m + self.m_half as i64) as usize * self.l() + (site.n + self.n_half as i64) as usize
    }

    /// Inverse of [`Self::flat`].
    pub fn site(&self, flat: usize) -> SiteIndex {
        debug_assert!(flat < self.sites());
        SiteIndex {
            n: (flat % self.l()) as i64 - self.n_half as i64,
            m: (flat / self.l()) as i64 - self.m_half as i64,
        }
    }
}

/// Lattice site `(n, m)`, `n ∈ [−N, N]`, `m ∈ [−M, M]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteIndex {
    pub n: i64,
    pub m: i64,
}

/// Integer index window for extent `d`: `[−⌈(d−1)/2⌉, +⌊(d−1)/2⌋]`.
pub fn index_window(d: usize) -> Vec<i64> {
    let lo = -(((d as i64) - 1 + 1) / 2);
    (lo..lo + d as i64).collect()
}

/// Dense Hermitian matrix of angular frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<C64>);

impl HermitianMatrix {
    /// Validates conjugate symmetry (1e−14 relative) and finiteness.
    pub fn new(m: DMatrix<C64>) -> Result<Self, CoreError> {
        if !m.is_square() {
            return Err(CoreError::Validation(format!(
                "matrix is {}x{}, not square",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut scale = 0.0_f64;
        for v in m.iter() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(CoreError::Validation("non-finite matrix entry".into()));
            }
            scale = scale.max(v.norm());
        }
        let tol = 1e-14 * scale.max(1e-300);
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > tol {
                    return Err(CoreError::Validation(format!(
                        "not Hermitian at ({i}, {j}): {} vs conj {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        Ok(HermitianMatrix(m))
    }

    /// Construction from code paths that are Hermitian by construction.
    fn new_unchecked(m: DMatrix<C64>) -> Self {
        debug_assert!(HermitianMatrix::new(m.clone()).is_ok());
        HermitianMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.0.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Real-space Hamiltonian for explicit extents; `LatticeSpec` wrapper below.
pub fn build_real_space_dims(
    l: usize,
    w: usize,
    g_x: f64,
    g_y: f64,
    gamma: f64,
    row_boundary: Boundary,
    col_boundary: Boundary,
) -> HermitianMatrix {
    let n_offsets = index_window(l);
    let dim = l * w;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    let flat = |i_n: usize, i_m: usize| i_m * l + i_n;
    for i_m in 0..w {
        for i_n in 0..l {
            // Row bond (n, m) → (n+1, m); the wrap bond exists only under
            // periodic rows and is emitted once, from the last site.
            if i_n + 1 < l || (row_boundary == Boundary::Periodic && l > 1) {
                let j_n = (i_n + 1) % l;
                let a = flat(i_n, i_m);
                let b = flat(j_n, i_m);
                h[(b, a)] += C64::new(-g_x, 0.0);
                h[(a, b)] += C64::new(-g_x, 0.0);
            }
            // Column bond (n, m) → (n, m+1), phase e^{iγn} on the upper site.
            if i_m + 1 < w || (col_boundary == Boundary::Periodic && w > 1) {
                let j_m = (i_m + 1) % w;
                let phase = C64::from_polar(g_y, gamma * n_offsets[i_n] as f64);
                let a = flat(i_n, i_m);
                let b = flat(i_n, j_m);
                h[(b, a)] += phase;
                h[(a, b)] += phase.conj();
            }
        }
    }
    HermitianMatrix::new_unchecked(h)
}

/// Real-space Hamiltonian of Eq-style lattice spec.
pub fn build_real_space(spec: &LatticeSpec) -> HermitianMatrix {
    build_real_space_dims(
        spec.l(),
        spec.w(),
        spec.g_x,
        spec.g_y,
        spec.gamma,
        spec.row_boundary,
        spec.col_boundary,
    )
}

/// Mixed-space W×W tridiagonal at row quasimomentum `k_x`:
/// diagonal ε_{γm+k_x} with ε_k = −2 g_x cos k, off-diagonal g_y.
pub fn build_quasimomentum_dims(k_x: f64, w: usize, g_x: f64, g_y: f64, gamma: f64) -> HermitianMatrix {
    let m_offsets = index_window(w);
    let mut h = DMatrix::<C64>::zeros(w, w);
    for (i, &m) in m_offsets.iter().enumerate() {
        h[(i, i)] = C64::new(-2.0 * g_x * (gamma * m as f64 + k_x).cos(), 0.0);
        if i + 1 < w {
            h[(i, i + 1)] = C64::new(g_y, 0.0);
            h[(i + 1, i)] = C64::new(g_y, 0.0);
        }
    }
    HermitianMatrix::new_unchecked(h)
}

pub fn build_quasimomentum(k_x: f64, spec: &LatticeSpec) -> HermitianMatrix {
    build_quasimomentum_dims(k_x, spec.w(), spec.g_x, spec.g_y, spec.gamma)
}

/// Magnetic-Bloch Q×Q cell at `(k_x, k_y)` for flux γ = 2πP/Q:
/// diagonal 2 g_y cos(k_y − γq), −g_x hopping with corner Bloch phases
/// ⟨0|h|Q−1⟩ = −g_x e^{+i k_x Q}, ⟨Q−1|h|0⟩ = −g_x e^{−i k_x Q}.
/// The corner orientation sets the Berry-curvature sign downstream.
pub fn build_bloch(
    k_x: f64,
    k_y: f64,
    spec: &LatticeSpec,
    p: i64,
    q: u32,
) -> Result<HermitianMatrix, CoreError> {
    if q == 0 || gcd(p.unsigned_abs(), q as u64) != 1 {
        return Err(CoreError::domain(
            "build_bloch",
            format!("P/Q = {p}/{q} must be coprime with Q >= 1"),
        ));
    }
    let gamma_pq = std::f64::consts::TAU * p as f64 / q as f64;
    // Compare as flux per plaquette modulo 2π.
    let diff = (spec.gamma - gamma_pq) / std::f64::consts::TAU;
    if (diff - diff.round()).abs() > 1e-12 {
        return Err(CoreError::domain(
            "build_bloch",
            format!(
                "gamma = {} does not match 2pi*{p}/{q} within 1e-12",
                spec.gamma
            ),
        ));
    }
    let n = q as usize;
    let mut h = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(2.0 * spec.g_y * (k_y - gamma_pq * i as f64).cos(), 0.0);
        let j = (i + 1) % n;
        let amp = if i == n - 1 {
            -C64::from_polar(spec.g_x, -k_x * q as f64)
        } else {
            C64::new(-spec.g_x, 0.0)
        };
        h[(i, j)] += amp;
        h[(j, i)] += amp.conj();
    }
    Ok(HermitianMatrix::new_unchecked(h))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}
