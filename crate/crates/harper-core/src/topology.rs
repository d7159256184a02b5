//! Berry curvature over the magnetic Brillouin zone, integer Chern numbers
//! from link variables on a discretized zone, winding numbers per gap, and a
//! sum-over-states evaluation of the curvature as an independent cross-check.
//!
//! For flux γ = 2πP/Q the magnetic unit cell is 1×Q and the zone is
//! `k_x ∈ [0, 2π/Q) × k_y ∈ [0, 2π)`. Each plaquette of the discretized zone
//! carries the field strength `F = i·Im log(U₁U₂Ū₃Ū₄)` built from normalized
//! eigenvector overlaps on its edges; the zone sum equals `2πi·C_j` with
//! integer `C_j` by construction.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::CoreError;
use crate::lattice::{build_bloch, build_quasimomentum_dims, index_window, LatticeSpec};
use crate::spectra::eig_hermitian;
use crate::C64;

/// Adjacent bands closer than this factor times `g_x` count as touching.
pub const BAND_TOUCH_FACTOR: f64 = 1e-10;
/// Smallest admissible link-variable magnitude.
pub const LINK_FLOOR: f64 = 1e-12;
/// Largest tolerated distance of a Chern zone sum from an integer.
pub const CHERN_RESIDUE_TOL: f64 = 1e-6;
/// Default zone discretization.
pub const DEFAULT_ZONE_GRID: (usize, usize) = (60, 60);
/// Smallest allowed zone grid per direction.
pub const MIN_ZONE_GRID: usize = 20;
/// Refinement cap per direction.
pub const MAX_ZONE_GRID: usize = 480;

/// Per-plaquette Berry field strengths of every band.
///
/// `field_im[j][(ix, iy)]` stores the imaginary part of the purely imaginary
/// field strength of band j on the plaquette whose lower corner is
/// `(kx_grid[ix], ky_grid[iy])`; every stored phase satisfies `|φ| < π`.
#[derive(Debug, Clone)]
pub struct BerryField {
    pub kx_grid: Vec<f64>,
    pub ky_grid: Vec<f64>,
    pub field_im: Vec<DMatrix<f64>>,
}

impl BerryField {
    pub fn bands(&self) -> usize {
        self.field_im.len()
    }

    /// Zone sum of the field strength of band j; equals `2πi·C_j`.
    pub fn band_sum(&self, j: usize) -> C64 {
        C64::new(0.0, self.field_im[j].iter().sum())
    }

    /// Zone sum divided by 2π: the (un-rounded) Chern number of band j.
    pub fn chern_estimate(&self, j: usize) -> f64 {
        self.band_sum(j).im / TAU
    }

    /// Zone area of one plaquette.
    pub fn plaquette_area(&self) -> f64 {
        let q = self.field_im.len().max(1) as f64;
        (TAU / q / self.kx_grid.len() as f64) * (TAU / self.ky_grid.len() as f64)
    }
}

/// Integer topological summary of one commensurate flux.
#[derive(Debug, Clone)]
pub struct ChernResult {
    /// Chern number per band, ascending band order.
    pub chern: Vec<i64>,
    /// Winding number per gap: partial sums `I_j = Σ_{j'≤j} C_{j'}`.
    pub winding: Vec<i64>,
    pub kx_grid: Vec<f64>,
    pub ky_grid: Vec<f64>,
    /// Band energies over the zone grid, one (n_kx × n_ky) matrix per band.
    pub band_energies: Vec<DMatrix<f64>>,
}

struct ZoneRow {
    vectors: Vec<DMatrix<C64>>,
    energies: Vec<Vec<f64>>,
}

fn solve_zone_row(
    spec: &LatticeSpec,
    p: i64,
    q: u32,
    k_x: f64,
    ky_grid: &[f64],
    context: &'static str,
) -> Result<ZoneRow, CoreError> {
    let touch_tol = BAND_TOUCH_FACTOR * spec.g_x.abs();
    let points: Vec<(DMatrix<C64>, Vec<f64>)> = ky_grid
        .par_iter()
        .map(|&k_y| {
            let h = build_bloch(k_x, k_y, spec, p, q)?;
            let eig = eig_hermitian(&h)?;
            if q >= 2 {
                let gap = eig.min_adjacent_gap();
                if gap <= touch_tol {
                    return Err(CoreError::Refinement {
                        context: context.to_string(),
                        message: format!(
                            "bands touch at k = ({k_x:.6}, {k_y:.6}): gap {gap:.3e} <= {touch_tol:.3e}"
                        ),
                    });
                }
            }
            Ok((eig.vectors().clone(), eig.values().to_vec()))
        })
        .collect::<Result<_, CoreError>>()?;
    let (vectors, energies) = points.into_iter().unzip();
    Ok(ZoneRow { vectors, energies })
}

enum ZonePass {
    Done(BerryField, Vec<DMatrix<f64>>),
    Inadmissible(String),
}

fn fhs_zone(
    spec: &LatticeSpec,
    p: i64,
    q: u32,
    n_x: usize,
    n_y: usize,
    context: &'static str,
) -> Result<ZonePass, CoreError> {
    let bands = q as usize;
    let kx_grid: Vec<f64> = (0..n_x)
        .map(|i| i as f64 * TAU / q as f64 / n_x as f64)
        .collect();
    let ky_grid: Vec<f64> = (0..n_y).map(|j| j as f64 * TAU / n_y as f64).collect();

    let first = solve_zone_row(spec, p, q, kx_grid[0], &ky_grid, context)?;
    let mut field_im = vec![DMatrix::<f64>::zeros(n_x, n_y); bands];
    let mut band_energies = vec![DMatrix::<f64>::zeros(n_x, n_y); bands];
    for j in 0..n_y {
        for b in 0..bands {
            band_energies[b][(0, j)] = first.energies[j][b];
        }
    }

    let mut prev = ZoneRow {
        vectors: first.vectors.clone(),
        energies: Vec::new(),
    };
    for i in 0..n_x {
        let next = if i + 1 == n_x {
            ZoneRow {
                vectors: first.vectors.clone(),
                energies: Vec::new(),
            }
        } else {
            let row = solve_zone_row(spec, p, q, kx_grid[i + 1], &ky_grid, context)?;
            for j in 0..n_y {
                for b in 0..bands {
                    band_energies[b][(i + 1, j)] = row.energies[j][b];
                }
            }
            row
        };
        for b in 0..bands {
            for j in 0..n_y {
                let jn = (j + 1) % n_y;
                let u1 = prev.vectors[j].column(b);
                let u2 = next.vectors[j].column(b);
                let u3 = next.vectors[jn].column(b);
                let u4 = prev.vectors[jn].column(b);
                let l1 = u1.dotc(&u2);
                let l2 = u2.dotc(&u3);
                let l3 = u4.dotc(&u3);
                let l4 = u1.dotc(&u4);
                let smallest = l1.norm().min(l2.norm()).min(l3.norm()).min(l4.norm());
                if smallest <= LINK_FLOOR {
                    return Ok(ZonePass::Inadmissible(format!(
                        "link magnitude {smallest:.3e} at plaquette ({i}, {j}), band {b}"
                    )));
                }
                let phase = (l1 * l2 * l3.conj() * l4.conj()).arg();
                if !(phase.abs() < PI) {
                    return Ok(ZonePass::Inadmissible(format!(
                        "plaquette phase {phase:.6} at ({i}, {j}), band {b} reaches the branch cut"
                    )));
                }
                field_im[b][(i, j)] = phase;
            }
        }
        prev = next;
    }

    Ok(ZonePass::Done(
        BerryField {
            kx_grid,
            ky_grid,
            field_im,
        },
        band_energies,
    ))
}

fn refined_zone(
    spec: &LatticeSpec,
    p: i64,
    q: u32,
    grid: (usize, usize),
    context: &'static str,
) -> Result<(BerryField, Vec<DMatrix<f64>>), CoreError> {
    let (mut n_x, mut n_y) = grid;
    if n_x < MIN_ZONE_GRID || n_y < MIN_ZONE_GRID {
        return Err(CoreError::domain(
            context,
            format!("zone grid {n_x}x{n_y} below minimum {MIN_ZONE_GRID}x{MIN_ZONE_GRID}"),
        ));
    }
    loop {
        match fhs_zone(spec, p, q, n_x, n_y, context)? {
            ZonePass::Done(field, energies) => return Ok((field, energies)),
            ZonePass::Inadmissible(reason) => {
                if n_x * 2 > MAX_ZONE_GRID || n_y * 2 > MAX_ZONE_GRID {
                    return Err(CoreError::Refinement {
                        context: context.to_string(),
                        message: format!(
                            "inadmissible at {n_x}x{n_y} ({reason}) and the refinement cap \
                             {MAX_ZONE_GRID} is reached"
                        ),
                    });
                }
                n_x *= 2;
                n_y *= 2;
            }
        }
    }
}

/// Per-plaquette Berry field strengths for flux γ = 2πP/Q on a `grid` zone
/// discretization, refined ×2 on admissibility failure up to
/// [`MAX_ZONE_GRID`].
pub fn berry_field(
    spec: &LatticeSpec,
    p: i64,
    q: u32,
    grid: (usize, usize),
) -> Result<BerryField, CoreError> {
    refined_zone(spec, p, q, grid, "berry_field").map(|(field, _)| field)
}

/// Integer Chern number per band and winding number per gap for flux
/// γ = 2πP/Q.
pub fn chern_numbers(
    spec: &LatticeSpec,
    p: i64,
    q: u32,
    grid: (usize, usize),
) -> Result<ChernResult, CoreError> {
    let (field, band_energies) = refined_zone(spec, p, q, grid, "chern_numbers")?;
    let mut chern = Vec::with_capacity(field.bands());
    for b in 0..field.bands() {
        let estimate = field.chern_estimate(b);
        let rounded = estimate.round();
        if (estimate - rounded).abs() >= CHERN_RESIDUE_TOL {
            return Err(CoreError::Refinement {
                context: "chern_numbers".to_string(),
                message: format!(
                    "band {b} zone sum / 2π = {estimate:.8} is {:.3e} from an integer",
                    (estimate - rounded).abs()
                ),
            });
        }
        chern.push(rounded as i64);
    }
    let total: i64 = chern.iter().sum();
    if total != 0 {
        return Err(CoreError::Validation(format!(
            "Chern numbers {chern:?} sum to {total}, expected 0"
        )));
    }
    let winding: Vec<i64> = chern
        .iter()
        .scan(0i64, |acc, &c| {
            *acc += c;
            Some(*acc)
        })
        .collect();
    Ok(ChernResult {
        chern,
        winding,
        kx_grid: field.kx_grid,
        ky_grid: field.ky_grid,
        band_energies,
    })
}

/// Berry curvature of band `band` at one zone point from the sum over
/// states: `F = Σ_{r≠j} [⟨u_j|∂ₓh|u_r⟩⟨u_r|∂ᵧh|u_j⟩ − (x↔y)] / (E_j−E_r)²`,
/// with the analytic `∂h/∂k` of the magnetic-Bloch cell. Purely imaginary;
/// comparable to a [`BerryField`] plaquette value divided by the plaquette
/// area.
pub fn berry_perturbative(
    k: (f64, f64),
    spec: &LatticeSpec,
    p: i64,
    q: u32,
    band: usize,
) -> Result<C64, CoreError> {
    let h = build_bloch(k.0, k.1, spec, p, q)?;
    let bands = q as usize;
    if band >= bands {
        return Err(CoreError::domain(
            "berry_perturbative",
            format!("band index {band} out of range for Q = {q}"),
        ));
    }
    if bands == 1 {
        return Ok(C64::new(0.0, 0.0));
    }
    let eig = eig_hermitian(&h)?;
    let touch_tol = BAND_TOUCH_FACTOR * spec.g_x.abs();
    if eig.is_degenerate(band, touch_tol) {
        return Err(CoreError::domain(
            "berry_perturbative",
            format!(
                "band {band} degenerate at k = ({:.6}, {:.6}) within {touch_tol:.3e}",
                k.0, k.1
            ),
        ));
    }

    let mut dx = DMatrix::<C64>::zeros(bands, bands);
    let corner = C64::i() * q as f64 * spec.g_x * C64::from_polar(1.0, -k.0 * q as f64);
    dx[(bands - 1, 0)] = corner;
    dx[(0, bands - 1)] = corner.conj();
    let gamma_pq = TAU * p as f64 / q as f64;
    let mut dy = DMatrix::<C64>::zeros(bands, bands);
    for r in 0..bands {
        dy[(r, r)] = C64::new(-2.0 * spec.g_y * (k.1 - gamma_pq * r as f64).sin(), 0.0);
    }

    let u_j: DVector<C64> = eig.vector(band).clone_owned();
    let wx = &dx * &u_j;
    let wy = &dy * &u_j;
    let mut f = C64::new(0.0, 0.0);
    for r in 0..bands {
        if r == band {
            continue;
        }
        let u_r = eig.vector(r);
        let denom = (eig.values()[band] - eig.values()[r]).powi(2);
        f += (wx.dotc(&u_r) * u_r.dotc(&wy) - wy.dotc(&u_r) * u_r.dotc(&wx)) / denom;
    }
    Ok(f)
}

/// Net signed count of top-edge branches crossing each bulk gap of the
/// open-column spectrum at the mid-gap frequency, over one row Brillouin
/// zone of `n_k` points. A crossing counts when the branch is top-edge
/// localized (mean column offset > 0.5) and contributes the sign of its
/// slope. Matches the winding numbers of [`chern_numbers`] gap by gap.
pub fn edge_crossing_counts(
    spec: &LatticeSpec,
    p: i64,
    q: u32,
    w: usize,
    n_k: usize,
) -> Result<Vec<i64>, CoreError> {
    if w < 2 || n_k < 3 {
        return Err(CoreError::domain(
            "edge_crossing_counts",
            format!("need w >= 2 and n_k >= 3, got w = {w}, n_k = {n_k}"),
        ));
    }
    let bands = q as usize;
    let (_, energies) = refined_zone(spec, p, q, (40, 40), "edge_crossing_counts")?;
    let mut mids = Vec::with_capacity(bands.saturating_sub(1));
    for b in 0..bands.saturating_sub(1) {
        let hi = energies[b].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = energies[b + 1].iter().cloned().fold(f64::INFINITY, f64::min);
        if lo <= hi {
            return Err(CoreError::domain(
                "edge_crossing_counts",
                format!("bulk gap {b} is closed ([{hi:.6e}, {lo:.6e}])"),
            ));
        }
        mids.push(0.5 * (hi + lo));
    }

    let offsets = index_window(w);
    let k_grid: Vec<f64> = (0..n_k)
        .map(|i| -PI + i as f64 * TAU / (n_k - 1) as f64)
        .collect();
    let sweep: Vec<(Vec<f64>, Vec<f64>)> = k_grid
        .par_iter()
        .map(|&k| {
            let h = build_quasimomentum_dims(k, w, spec.g_x, spec.g_y, spec.gamma);
            let eig = eig_hermitian(&h)?;
            let mean_offset: Vec<f64> = (0..w)
                .map(|l| {
                    eig.vector(l)
                        .iter()
                        .zip(&offsets)
                        .map(|(a, &m)| m as f64 * a.norm_sqr())
                        .sum()
                })
                .collect();
            Ok((eig.values().to_vec(), mean_offset))
        })
        .collect::<Result<_, CoreError>>()?;

    let counts = mids
        .iter()
        .map(|&mid| {
            let mut net = 0i64;
            for i in 0..n_k - 1 {
                let (vals, moff) = &sweep[i];
                let (vals_next, _) = &sweep[i + 1];
                for l in 0..w {
                    let a = vals[l] - mid;
                    let b = vals_next[l] - mid;
                    if a * b < 0.0 && moff[l] > 0.5 {
                        net += if b > a { 1 } else { -1 };
                    }
                }
            }
            net
        })
        .collect();
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const G: f64 = TAU * 4.0e6;

    fn flux_spec(p: i64, q: u32) -> LatticeSpec {
        LatticeSpec::open(8, 1, G, G, TAU * p as f64 / q as f64)
    }

    #[test]
    fn published_chern_integers_and_windings() {
        let spec = flux_spec(1, 5);
        let result = chern_numbers(&spec, 1, 5, DEFAULT_ZONE_GRID).unwrap();
        assert_eq!(result.chern, vec![-1, -1, 4, -1, -1]);
        assert_eq!(result.winding, vec![-1, -2, 2, 1, 0]);
        assert_eq!(result.band_energies.len(), 5);
        assert_eq!(result.band_energies[0].nrows(), 60);
        assert_eq!(result.band_energies[0].ncols(), 60);

        let doubled = chern_numbers(&spec, 1, 5, (120, 120)).unwrap();
        assert_eq!(doubled.chern, result.chern);
        assert_eq!(doubled.winding, result.winding);
    }

    #[test]
    fn chern_one_third_flux() {
        let spec = flux_spec(1, 3);
        let result = chern_numbers(&spec, 1, 3, (30, 30)).unwrap();
        assert_eq!(result.chern, vec![-1, 2, -1]);
        assert_eq!(result.winding, vec![-1, 1, 0]);
    }

    #[test]
    fn chern_reverses_sign_with_flux() {
        let plus = chern_numbers(&flux_spec(1, 5), 1, 5, (30, 30)).unwrap();
        let minus = chern_numbers(&flux_spec(-1, 5), -1, 5, (30, 30)).unwrap();
        let negated: Vec<i64> = plus.chern.iter().map(|c| -c).collect();
        assert_eq!(minus.chern, negated);
        assert_eq!(minus.chern, vec![1, 1, -4, 1, 1]);
    }

    #[test]
    fn trivial_flux_single_band() {
        let spec = flux_spec(0, 1);
        let result = chern_numbers(&spec, 0, 1, (20, 20)).unwrap();
        assert_eq!(result.chern, vec![0]);
        assert_eq!(result.winding, vec![0]);
    }

    #[test]
    fn zone_sum_is_two_pi_i_times_integer() {
        let spec = flux_spec(1, 5);
        let field = berry_field(&spec, 1, 5, (30, 30)).unwrap();
        assert_eq!(field.bands(), 5);
        assert_eq!(field.kx_grid.len(), 30);
        assert_eq!(field.ky_grid.len(), 30);
        assert_relative_eq!(field.kx_grid[29], 29.0 / 30.0 * TAU / 5.0, max_relative = 1e-12);
        assert_relative_eq!(field.ky_grid[29], 29.0 / 30.0 * TAU, max_relative = 1e-12);
        let expected = [-1.0, -1.0, 4.0, -1.0, -1.0];
        for (b, &c) in expected.iter().enumerate() {
            let sum = field.band_sum(b);
            assert_eq!(sum.re, 0.0);
            assert!((sum.im / TAU - c).abs() < 1e-6);
            let max_phase = field.field_im[b].iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            assert!(max_phase < PI);
        }
    }

    #[test]
    fn field_conjugation_partner_under_flux_reversal() {
        let n = 20;
        let plus = berry_field(&flux_spec(1, 5), 1, 5, (n, n)).unwrap();
        let minus = berry_field(&flux_spec(-1, 5), -1, 5, (n, n)).unwrap();
        let scale = plus.field_im[2]
            .iter()
            .fold(0.0f64, |a, &v| a.max(v.abs()));
        for b in 0..5 {
            for i in 0..n {
                for j in 0..n {
                    let partner = minus.field_im[b][(i, n - 1 - j)];
                    assert!(
                        (partner + plus.field_im[b][(i, j)]).abs() <= 1e-9 * scale,
                        "band {b} plaquette ({i}, {j})"
                    );
                }
            }
        }
    }

    #[test]
    fn perturbative_matches_lattice_field() {
        let spec = flux_spec(1, 5);
        let n = 200;
        let field = berry_field(&spec, 1, 5, (n, n)).unwrap();
        let area = field.plaquette_area();
        let (i, j) = (100, 77);
        let k = (
            field.kx_grid[i] + 0.5 * TAU / 5.0 / n as f64,
            field.ky_grid[j] + 0.5 * TAU / n as f64,
        );
        for band in [0, 2] {
            let local = field.field_im[band][(i, j)] / area;
            let pert = berry_perturbative(k, &spec, 1, 5, band).unwrap();
            assert!(pert.re.abs() <= 1e-10 * pert.im.abs());
            assert!(
                (pert.im - local).abs() <= 0.02 * local.abs(),
                "band {band}: lattice {local:.6e} vs perturbative {:.6e}",
                pert.im
            );
        }
    }

    #[test]
    fn perturbative_trivial_and_error_cases() {
        let trivial = berry_perturbative((0.3, 0.7), &flux_spec(0, 1), 0, 1, 0).unwrap();
        assert_eq!(trivial, C64::new(0.0, 0.0));

        let spec = flux_spec(1, 5);
        assert!(matches!(
            berry_perturbative((0.1, 0.2), &spec, 1, 5, 5),
            Err(CoreError::Domain { .. })
        ));

        // Half flux has Dirac touchings; (π/2, π/2) is one of them.
        let half = flux_spec(1, 2);
        assert!(matches!(
            berry_perturbative((PI / 2.0, PI / 2.0), &half, 1, 2, 0),
            Err(CoreError::Domain { .. })
        ));
        assert!(matches!(
            chern_numbers(&half, 1, 2, (20, 20)),
            Err(CoreError::Refinement { .. })
        ));
    }

    #[test]
    fn zone_grid_minimum_enforced() {
        let spec = flux_spec(1, 5);
        assert!(matches!(
            chern_numbers(&spec, 1, 5, (10, 60)),
            Err(CoreError::Domain { .. })
        ));
        assert!(matches!(
            berry_field(&spec, 1, 5, (60, 19)),
            Err(CoreError::Domain { .. })
        ));
    }

    #[test]
    fn edge_crossings_match_windings() {
        let spec = flux_spec(1, 5);
        let crossings = edge_crossing_counts(&spec, 1, 5, 50, 1001).unwrap();
        assert_eq!(crossings, vec![-1, -2, 2, 1]);
        let result = chern_numbers(&spec, 1, 5, (30, 30)).unwrap();
        assert_eq!(crossings[..], result.winding[..4]);
    }
}
