//! Measurement protocols on the single-excitation sector.
//!
//! Every protocol is simulated in closed form: the pulse sequences are
//! piecewise-constant Hamiltonians with known exponentials, so populations
//! and relative phases follow from exact unitary algebra, never from time
//! stepping.

use crate::chirality::quasimomentum_distribution;
use crate::error::{CoreError, Warning};
use crate::lattice::{build_real_space, Boundary, LatticeSpec};
use crate::spectra::{eig_hermitian, EigenSystem};
use crate::C64;
use nalgebra::DVector;
use rayon::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI, TAU};

/// Sites dimmer than this cannot relay a phase along the accumulation path.
pub const DARK_SITE_FLOOR: f64 = 1e-12;
/// Quasimomentum peaks below this fraction of the maximum are discarded.
pub const BAND_POINT_THRESHOLD: f64 = 0.1;
/// Row-momentum grid size for band-point extraction.
pub const BAND_POINT_GRID: usize = 401;
/// Feature-function maxima below this fraction of the global maximum are
/// side lobes, not candidate eigenfrequencies.
pub const FEATURE_PEAK_THRESHOLD: f64 = 0.25;
/// Frequency-grid points per sinc main-lobe half-width 2π/T.
const FEATURE_GRID_PER_LOBE: f64 = 10.0;
/// T·(min adjacent gap) below this leaves sinc main lobes overlapping.
pub const RESOLVED_GAP_PRODUCT: f64 = 20.0;
/// Windowed-spectrum maxima below this fraction of the maximum are discarded.
pub const BUTTERFLY_PEAK_THRESHOLD: f64 = 0.5;
/// Frequency-grid oversampling relative to the window resolution 2π/T.
const BUTTERFLY_OVERSAMPLE: f64 = 8.0;

/// Classical drive profile and per-site decoherence rates.
#[derive(Debug, Clone)]
pub struct DriveSpec {
    /// Rabi strength Ω (rad/s).
    pub omega: f64,
    /// Drive detuning ν (rad/s).
    pub nu: f64,
    /// Per-site drive profile; the site drive is Ω_nm = Ω·site_weights[nm].
    pub site_weights: DVector<C64>,
    /// Per-site relaxation rates γ_nm (rad/s).
    pub gamma_relax: DVector<f64>,
    /// Per-site dephasing rates Γ_nm (rad/s).
    pub gamma_dephase: DVector<f64>,
}

impl DriveSpec {
    /// Validates nonnegative finite rates over a matching site count.
    pub fn new(
        omega: f64,
        nu: f64,
        site_weights: DVector<C64>,
        gamma_relax: DVector<f64>,
        gamma_dephase: DVector<f64>,
    ) -> Result<Self, CoreError> {
        let sites = site_weights.len();
        if gamma_relax.len() != sites || gamma_dephase.len() != sites {
            return Err(CoreError::Validation(format!(
                "drive profile over {sites} sites but rates over {} and {}",
                gamma_relax.len(),
                gamma_dephase.len()
            )));
        }
        for &r in gamma_relax.iter().chain(gamma_dephase.iter()) {
            if !r.is_finite() || r < 0.0 {
                return Err(CoreError::domain(
                    "DriveSpec",
                    format!("rate {r} is not a finite nonnegative number"),
                ));
            }
        }
        Ok(DriveSpec {
            omega,
            nu,
            site_weights,
            gamma_relax,
            gamma_dephase,
        })
    }

    /// Flat drive profile with uniform rates on `sites` sites.
    pub fn uniform(
        omega: f64,
        nu: f64,
        sites: usize,
        gamma: f64,
        big_gamma: f64,
    ) -> Result<Self, CoreError> {
        DriveSpec::new(
            omega,
            nu,
            DVector::from_element(sites, C64::new(1.0, 0.0)),
            DVector::from_element(sites, gamma),
            DVector::from_element(sites, big_gamma),
        )
    }

    /// Strength Ω'_j = Σ Ω_nm ψ*_nm with which the drive feeds eigenstate ψ.
    pub fn eigenstate_strength(&self, psi: &DVector<C64>) -> C64 {
        self.site_weights
            .iter()
            .zip(psi.iter())
            .map(|(w, p)| w * p.conj())
            .sum::<C64>()
            * self.omega
    }
}

/// State-weighted decoherence rates γ₁ = Σ |ψ_nm|² γ_nm and Γ₁ likewise.
pub fn effective_rates(psi: &DVector<C64>, drive: &DriveSpec) -> Result<(f64, f64), CoreError> {
    if psi.len() != drive.gamma_relax.len() {
        return Err(CoreError::Validation(format!(
            "state over {} sites but rates over {}",
            psi.len(),
            drive.gamma_relax.len()
        )));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(CoreError::domain(
            "effective_rates",
            format!("state norm {norm} is not 1"),
        ));
    }
    let g1 = psi
        .iter()
        .zip(drive.gamma_relax.iter())
        .map(|(p, &r)| p.norm_sqr() * r)
        .sum();
    let g2 = psi
        .iter()
        .zip(drive.gamma_dephase.iter())
        .map(|(p, &r)| p.norm_sqr() * r)
        .sum();
    Ok((g1, g2))
}

/// Vacuum-to-eigenstate Rabi fidelity
/// ⟨G|ρ|G⟩ = ½[1 − e^{−(γ₁+Γ₁/2)t/2} cos(2Ωt)].
pub fn generation_fidelity(
    omega: f64,
    gamma1: f64,
    big_gamma1: f64,
    t: f64,
) -> Result<f64, CoreError> {
    if !(omega > 0.0) {
        return Err(CoreError::domain(
            "generation_fidelity",
            format!("Rabi strength {omega} must be positive"),
        ));
    }
    if gamma1 < 0.0 || big_gamma1 < 0.0 || t < 0.0 {
        return Err(CoreError::domain(
            "generation_fidelity",
            "rates and time must be nonnegative",
        ));
    }
    let kappa = 0.5 * (gamma1 + 0.5 * big_gamma1);
    Ok(0.5 * (1.0 - (-kappa * t).exp() * (2.0 * omega * t).cos()))
}

/// Fidelity of the π/2 pulse, t = π/(2Ω).
pub fn generation_fidelity_half_pi(
    omega: f64,
    gamma1: f64,
    big_gamma1: f64,
) -> Result<f64, CoreError> {
    if !(omega > 0.0) {
        return Err(CoreError::domain(
            "generation_fidelity",
            format!("Rabi strength {omega} must be positive"),
        ));
    }
    generation_fidelity(omega, gamma1, big_gamma1, PI / (2.0 * omega))
}

/// Four-rate decay average γ̄ of a decoupled pair of sites.
pub fn pair_decay_rate(drive: &DriveSpec, a: usize, b: usize) -> f64 {
    0.25 * (drive.gamma_relax[a]
        + drive.gamma_relax[b]
        + drive.gamma_dephase[a]
        + drive.gamma_dephase[b])
}

/// Pair population difference e^{−γ̄t}[cos(2gt) + sin(2gt)·I_G/g] in the
/// strong-coupling regime |g| ≫ γ̄.
pub fn rabi_population_difference(
    t: f64,
    g: f64,
    current: f64,
    decay: f64,
) -> Result<f64, CoreError> {
    if g == 0.0 {
        return Err(CoreError::domain(
            "rabi_population_difference",
            "zero coupling leaves no oscillation to carry the current",
        ));
    }
    Ok((-decay * t).exp() * ((2.0 * g * t).cos() + (2.0 * g * t).sin() * current / g))
}

/// Sampled population difference or probability trace.
#[derive(Debug, Clone)]
pub struct PopulationTrace {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl PopulationTrace {
    /// Strictly increasing finite times; |values| ≤ 1 + 1e−9.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, CoreError> {
        if times.len() != values.len() {
            return Err(CoreError::Validation(format!(
                "trace has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::Validation(
                "trace times must be finite and strictly increasing".into(),
            ));
        }
        for &v in &values {
            if !v.is_finite() || v.abs() > 1.0 + 1e-9 {
                return Err(CoreError::Validation(format!(
                    "population value {v} outside [-1, 1]"
                )));
            }
        }
        Ok(PopulationTrace { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Least-squares estimates extracted from one Rabi trace.
#[derive(Debug, Clone, Copy)]
pub struct RabiFit {
    /// Bond current estimate I_G.
    pub current: f64,
    /// Decay rate estimate γ̄.
    pub decay: f64,
    /// Root-mean-square residual of the converged fit.
    pub residual_rms: f64,
}

/// Fits e^{−γ̄t}[cos(2gt) + sin(2gt)·I_G/g] to a trace by Gauss-Newton
/// iteration over (I_G, γ̄).
pub fn extract_current_fit(trace: &PopulationTrace, g: f64) -> Result<RabiFit, CoreError> {
    if g == 0.0 {
        return Err(CoreError::domain("extract_current_fit", "zero coupling"));
    }
    let n = trace.len();
    if n < 8 {
        return Err(CoreError::domain(
            "extract_current_fit",
            format!("{n} points; the fit needs at least 8"),
        ));
    }
    let times = trace.times();
    let values = trace.values();
    let span = times[n - 1] - times[0];
    let period = PI / g.abs();
    if span < period {
        return Err(CoreError::domain(
            "extract_current_fit",
            format!("trace spans {span:.3e}, less than one Rabi period {period:.3e}"),
        ));
    }

    let model = |current: f64, decay: f64, t: f64| {
        (-decay * t).exp() * ((2.0 * g * t).cos() + (2.0 * g * t).sin() * current / g)
    };
    let rss_of = |current: f64, decay: f64| {
        times
            .iter()
            .zip(values)
            .map(|(&t, &y)| {
                let r = y - model(current, decay, t);
                r * r
            })
            .sum::<f64>()
    };

    // Linear seed at zero decay: the sine quadrature isolates I_G/g.
    let mut num = 0.0;
    let mut den = 0.0;
    for (&t, &y) in times.iter().zip(values) {
        let s = (2.0 * g * t).sin();
        num += (y - (2.0 * g * t).cos()) * s;
        den += s * s;
    }
    let mut current = if den > 0.0 { g * num / den } else { 0.0 };
    let mut decay = 0.0;
    let mut rss = rss_of(current, decay);

    for _ in 0..50 {
        let mut a11 = 0.0;
        let mut a12 = 0.0;
        let mut a22 = 0.0;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for (&t, &y) in times.iter().zip(values) {
            let f = model(current, decay, t);
            let j1 = (-decay * t).exp() * (2.0 * g * t).sin() / g;
            let j2 = -t * f;
            let r = y - f;
            a11 += j1 * j1;
            a12 += j1 * j2;
            a22 += j2 * j2;
            b1 += j1 * r;
            b2 += j2 * r;
        }
        let det = a11 * a22 - a12 * a12;
        if det.abs() <= f64::MIN_POSITIVE * (1.0 + a11.abs() + a22.abs()) {
            return Err(CoreError::Fit {
                message: "degenerate normal equations".into(),
                residual_rms: (rss / n as f64).sqrt(),
            });
        }
        let d1 = (a22 * b1 - a12 * b2) / det;
        let d2 = (a11 * b2 - a12 * b1) / det;

        let converged =
            d1.abs() <= 1e-9 * (1.0 + current.abs()) && d2.abs() <= 1e-9 * (1.0 + decay.abs());

        let mut scale = 1.0;
        let mut stepped = false;
        for _ in 0..30 {
            let trial = rss_of(current + scale * d1, decay + scale * d2);
            if trial <= rss {
                current += scale * d1;
                decay += scale * d2;
                rss = trial;
                stepped = true;
                break;
            }
            scale *= 0.5;
        }
        let stalled_at_bottom = !stepped
            && d1.abs() <= 1e-6 * (1.0 + current.abs())
            && d2.abs() <= 1e-6 * (1.0 + decay.abs());
        if converged || stalled_at_bottom {
            return Ok(RabiFit {
                current,
                decay,
                residual_rms: (rss / n as f64).sqrt(),
            });
        }
        if !stepped {
            return Err(CoreError::Fit {
                message: "line search stalled before the step vanished".into(),
                residual_rms: (rss / n as f64).sqrt(),
            });
        }
    }
    Err(CoreError::Fit {
        message: "no convergence within 50 Gauss-Newton iterations".into(),
        residual_rms: (rss / n as f64).sqrt(),
    })
}

/// State rebuilt from site populations and pairwise interference readouts.
#[derive(Debug, Clone)]
pub struct ReconstructedState {
    /// Complex amplitudes |ψ_nm| e^{iθ_nm} in flat site order.
    pub amplitudes: DVector<C64>,
    /// Accumulated phases θ_nm in flat site order.
    pub phases: Vec<f64>,
    /// Gauge convention the phases are reported in.
    pub gauge_note: String,
}

/// Relative phase θ_b − θ_a of a decoupled pair, confined to (−π, π].
///
/// The X-π/4 pulse maps (a, b) to ((a − ib)/√2, (b − ia)/√2); the site-a
/// population then reads ½(|a|²+|b|²) + |a||b| sin(θ_b − θ_a). A Z-π/2
/// pulse (a, b) → (e^{−iπ/4}a, e^{iπ/4}b) ahead of the same readout turns
/// the sine into the cosine.
fn pair_relative_phase(a: C64, b: C64) -> f64 {
    let base = 0.5 * (a.norm_sqr() + b.norm_sqr());
    let p_sin = 0.5 * (a - C64::i() * b).norm_sqr();
    let half_z = C64::from_polar(1.0, -FRAC_PI_4);
    let p_cos = 0.5 * (half_z * a - C64::i() * (half_z.conj() * b)).norm_sqr();
    let d = (p_sin - base).atan2(p_cos - base);
    if d <= -PI {
        PI
    } else {
        d
    }
}

fn require_open(spec: &LatticeSpec, context: &str) -> Result<(), CoreError> {
    if spec.row_boundary != Boundary::Open || spec.col_boundary != Boundary::Open {
        return Err(CoreError::domain(
            context,
            "measurement protocols address the fully open lattice",
        ));
    }
    spec.validate()?;
    Ok(())
}

fn open_eigensystem(spec: &LatticeSpec, context: &str) -> Result<EigenSystem, CoreError> {
    require_open(spec, context)?;
    eig_hermitian(&build_real_space(spec))
}

/// Phase accumulation along the left column, then along each row, with the
/// anchor site (−N, −M) fixed real nonnegative.
pub fn reconstruct_state_special(
    spec: &LatticeSpec,
    psi: &DVector<C64>,
) -> Result<ReconstructedState, CoreError> {
    require_open(spec, "reconstruct_state_special")?;
    let (l, w) = (spec.l(), spec.w());
    if psi.len() != spec.sites() {
        return Err(CoreError::Validation(format!(
            "state over {} sites but lattice has {}",
            psi.len(),
            spec.sites()
        )));
    }
    let dark = |flat: usize| -> Option<CoreError> {
        let amplitude = psi[flat].norm();
        if amplitude < DARK_SITE_FLOOR {
            let site = spec.site(flat);
            Some(CoreError::DarkSitePath {
                n: site.n,
                m: site.m,
                amplitude,
            })
        } else {
            None
        }
    };
    let mut phases = vec![0.0; l * w];
    if let Some(e) = dark(0) {
        return Err(e);
    }
    for i_m in 1..w {
        let (prev, next) = ((i_m - 1) * l, i_m * l);
        if let Some(e) = dark(next) {
            return Err(e);
        }
        phases[next] = phases[prev] + pair_relative_phase(psi[prev], psi[next]);
    }
    for i_m in 0..w {
        for i_n in 1..l {
            let (prev, next) = (i_m * l + i_n - 1, i_m * l + i_n);
            if let Some(e) = dark(next) {
                return Err(e);
            }
            phases[next] = phases[prev] + pair_relative_phase(psi[prev], psi[next]);
        }
    }
    let amplitudes = DVector::from_iterator(
        l * w,
        phases
            .iter()
            .zip(psi.iter())
            .map(|(&theta, a)| C64::from_polar(a.norm(), theta)),
    );
    Ok(ReconstructedState {
        amplitudes,
        phases,
        gauge_note: format!(
            "anchor site (n={}, m={}) real nonnegative; phases accumulated \
             along the left column, then along rows",
            -(spec.n_half as i64),
            -(spec.m_half as i64)
        ),
    })
}

/// Reconstructs eigenstate j of the open lattice from simulated pair
/// measurements.
pub fn reconstruct_eigenstate_special(
    spec: &LatticeSpec,
    j: usize,
) -> Result<ReconstructedState, CoreError> {
    let eig = open_eigensystem(spec, "reconstruct_eigenstate_special")?;
    if j >= eig.dim() {
        return Err(CoreError::domain(
            "reconstruct_eigenstate_special",
            format!("eigenstate {j} of {}", eig.dim()),
        ));
    }
    reconstruct_state_special(spec, &eig.vector(j).clone_owned())
}

/// One recovered band point: a quasimomentum peak at an eigenfrequency.
#[derive(Debug, Clone, Copy)]
pub struct BandPoint {
    pub k_x: f64,
    /// Eigenfrequency ω_j (rad/s).
    pub omega: f64,
    /// Quasimomentum power P at the peak.
    pub power: f64,
}

/// Peaks of P(k_x) = (1/L) Σ_m |Σ_n e^{−i(γmn + k_x n)} ψ_nm|² above
/// `threshold · max`, each reported as a band point at frequency `omega`.
pub fn band_points_from_state(
    spec: &LatticeSpec,
    psi: &DVector<C64>,
    omega: f64,
    threshold: f64,
    n_k: usize,
) -> Result<Vec<BandPoint>, CoreError> {
    require_open(spec, "band_points_from_state")?;
    if n_k < 8 {
        return Err(CoreError::domain(
            "band_points_from_state",
            format!("{n_k} grid points resolve no peak structure"),
        ));
    }
    if !(threshold > 0.0) {
        return Err(CoreError::domain(
            "band_points_from_state",
            "threshold must be positive",
        ));
    }
    let k_grid: Vec<f64> = (0..n_k)
        .map(|i| -PI + TAU * i as f64 / n_k as f64)
        .collect();
    let dist = quasimomentum_distribution(psi, spec, &k_grid);
    let l = spec.l() as f64;
    let power: Vec<f64> = dist
        .amplitudes
        .iter()
        .map(|row| row.iter().map(|a| a.norm_sqr()).sum::<f64>() / l)
        .collect();
    let max = power.iter().fold(0.0_f64, |a, &p| a.max(p));
    let floor = threshold * max;
    let mut points = Vec::new();
    for i in 0..n_k {
        let prev = power[(i + n_k - 1) % n_k];
        let next = power[(i + 1) % n_k];
        if power[i] > prev && power[i] >= next && power[i] > floor {
            points.push(BandPoint {
                k_x: k_grid[i],
                omega,
                power: power[i],
            });
        }
    }
    if points.is_empty() {
        return Err(CoreError::NoPeak {
            threshold: floor,
            max_value: max,
        });
    }
    Ok(points)
}

/// Band points of eigenstate j at the default threshold and grid.
pub fn band_points_special(spec: &LatticeSpec, j: usize) -> Result<Vec<BandPoint>, CoreError> {
    let eig = open_eigensystem(spec, "band_points_special")?;
    if j >= eig.dim() {
        return Err(CoreError::domain(
            "band_points_special",
            format!("eigenstate {j} of {}", eig.dim()),
        ));
    }
    band_points_from_state(
        spec,
        &eig.vector(j).clone_owned(),
        eig.values()[j],
        BAND_POINT_THRESHOLD,
        BAND_POINT_GRID,
    )
}

/// Band points of every eigenstate, sharing one eigendecomposition.
pub fn band_points_all(
    spec: &LatticeSpec,
    threshold: f64,
    n_k: usize,
) -> Result<Vec<Vec<BandPoint>>, CoreError> {
    let eig = open_eigensystem(spec, "band_points_all")?;
    (0..eig.dim())
        .map(|j| {
            band_points_from_state(
                spec,
                &eig.vector(j).clone_owned(),
                eig.values()[j],
                threshold,
                n_k,
            )
        })
        .collect()
}

/// sin(x)/x with the removable singularity filled.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Closed-form feature function
/// F(ω) = ½ Σ_j sinc²((ω−ω_j)T/2) + ½ sinc²(ωT/2).
pub fn feature_function(frequencies: &[f64], t_total: f64, omega: f64) -> f64 {
    let half_t = 0.5 * t_total;
    let sum: f64 = frequencies
        .iter()
        .map(|&w| sinc((omega - w) * half_t).powi(2))
        .sum();
    0.5 * sum + 0.5 * sinc(omega * half_t).powi(2)
}

/// Feature-function scan with extracted peak frequencies.
#[derive(Debug, Clone)]
pub struct FeatureSpectrum {
    pub omega_grid: Vec<f64>,
    pub f_values: Vec<f64>,
    /// Local maxima above the side-lobe threshold: candidate eigenfrequencies.
    pub peaks: Vec<f64>,
    /// F value at each peak.
    pub amplitudes: Vec<f64>,
    pub warnings: Vec<Warning>,
}

/// Evaluates F(ω) for the open lattice over `omega_grid` (default: the
/// spectrum padded by one main lobe 2π/T, spaced 2π/(10T)) and extracts
/// peaks. Peaks are confined to [min ω_j − 2π/T, max ω_j + 2π/T].
pub fn feature_spectrum(
    spec: &LatticeSpec,
    t_total: f64,
    omega_grid: Option<&[f64]>,
) -> Result<FeatureSpectrum, CoreError> {
    if !(t_total > 0.0) {
        return Err(CoreError::domain(
            "feature_spectrum",
            format!("window {t_total} must be positive"),
        ));
    }
    let eig = open_eigensystem(spec, "feature_spectrum")?;
    let freqs = eig.values();
    let lobe = TAU / t_total;
    let lo = freqs[0] - lobe;
    let hi = freqs[freqs.len() - 1] + lobe;
    let grid: Vec<f64> = match omega_grid {
        Some(g) => {
            if g.len() < 3 || g.iter().any(|w| !w.is_finite()) || g.windows(2).any(|w| w[1] <= w[0])
            {
                return Err(CoreError::Validation(
                    "frequency grid must hold at least 3 finite ascending values".into(),
                ));
            }
            g.to_vec()
        }
        None => {
            let step = lobe / FEATURE_GRID_PER_LOBE;
            let n = ((hi - lo) / step).ceil() as usize + 1;
            (0..n).map(|i| lo + step * i as f64).collect()
        }
    };
    let mut warnings = Vec::new();
    let gap_product = t_total * eig.min_adjacent_gap();
    if gap_product < RESOLVED_GAP_PRODUCT {
        warnings.push(Warning::new(
            "feature_spectrum",
            format!(
                "T·min-gap = {gap_product:.3} < {RESOLVED_GAP_PRODUCT}; adjacent sinc main \
                 lobes overlap and close peaks merge"
            ),
        ));
    }
    let max_step = grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0_f64, f64::max);
    if max_step > 0.5 * lobe {
        warnings.push(Warning::new(
            "feature_spectrum",
            format!(
                "grid step {max_step:.3e} exceeds half a sinc main-lobe half-width \
                 {:.3e}; peaks can fall between samples",
                0.5 * lobe
            ),
        ));
    }
    let f_values: Vec<f64> = grid
        .iter()
        .map(|&w| feature_function(freqs, t_total, w))
        .collect();
    let fmax = f_values.iter().fold(0.0_f64, |a, &v| a.max(v));
    let floor = FEATURE_PEAK_THRESHOLD * fmax;
    let mut peaks = Vec::new();
    let mut amplitudes = Vec::new();
    for i in 1..grid.len() - 1 {
        if f_values[i] > f_values[i - 1]
            && f_values[i] >= f_values[i + 1]
            && f_values[i] > floor
            && grid[i] >= lo
            && grid[i] <= hi
        {
            peaks.push(grid[i]);
            amplitudes.push(f_values[i]);
        }
    }
    Ok(FeatureSpectrum {
        omega_grid: grid,
        f_values,
        peaks,
        amplitudes,
        warnings,
    })
}

/// Fidelities of the fictitious eigenstates rebuilt from windowed records.
#[derive(Debug, Clone)]
pub struct FictitiousStates {
    /// |⟨E_j|Ẽ_j⟩| after projection onto the single-excitation sector.
    pub fidelities: Vec<f64>,
    /// Vacuum weight carried by each |Ẽ_j⟩ before the projection.
    pub vacuum_weights: Vec<f64>,
}

/// Rebuilds every eigenstate from the time-windowed site records
/// |ψ̃_nm(ω)⟩ = (1/√2) Σ_j ψ_nm^(j)* e^{i(ω−ω_j)T/2} sinc((ω−ω_j)T/2) |E_j⟩
///             + (1/√2) e^{iωT/2} sinc(ωT/2) |0⟩
/// as |Ẽ_j⟩ = Σ_nm M̃_nm e^{−iΘ_nm} |ψ̃_nm(ω_j)⟩ with M̃_nm = 2‖ψ̃_nm‖ and
/// Θ_nm the record's phase at the pivot site, the gauge site where
/// arg ψ^(j) = 0.
pub fn fictitious_state_fidelities(
    spec: &LatticeSpec,
    t_total: f64,
) -> Result<FictitiousStates, CoreError> {
    if !(t_total > 0.0) {
        return Err(CoreError::domain(
            "fictitious_state_fidelities",
            format!("window {t_total} must be positive"),
        ));
    }
    let eig = open_eigensystem(spec, "fictitious_state_fidelities")?;
    let dim = eig.dim();
    let freqs = eig.values();
    let vecs = eig.vectors();
    let half_t = 0.5 * t_total;
    let mut fidelities = Vec::with_capacity(dim);
    let mut vacuum_weights = Vec::with_capacity(dim);
    for j in 0..dim {
        let w_j = freqs[j];
        let kernel: Vec<C64> = freqs
            .iter()
            .map(|&w| {
                let x = (w_j - w) * half_t;
                C64::from_polar(1.0, x) * (FRAC_1_SQRT_2 * sinc(x))
            })
            .collect();
        let x_vac = w_j * half_t;
        let c_vac = C64::from_polar(1.0, x_vac) * (FRAC_1_SQRT_2 * sinc(x_vac));
        // The solver gauge already pins the brightest component of ψ^(j)
        // real positive, so that site is the phase reference.
        let mut pivot = 0;
        let mut best = -1.0;
        for s in 0..dim {
            let mag = vecs[(s, j)].norm();
            if mag > best {
                best = mag;
                pivot = s;
            }
        }
        let mut b = vec![C64::new(0.0, 0.0); dim];
        let mut b_vac = C64::new(0.0, 0.0);
        for s in 0..dim {
            let mut at_pivot = C64::new(0.0, 0.0);
            let mut norm2 = c_vac.norm_sqr();
            for jp in 0..dim {
                let coef = kernel[jp] * vecs[(s, jp)].conj();
                at_pivot += coef * vecs[(pivot, jp)];
                norm2 += coef.norm_sqr();
            }
            let gauge = C64::from_polar(2.0 * norm2.sqrt(), -at_pivot.arg());
            for jp in 0..dim {
                b[jp] += gauge * kernel[jp] * vecs[(s, jp)].conj();
            }
            b_vac += gauge * c_vac;
        }
        let single_norm2: f64 = b.iter().map(|c| c.norm_sqr()).sum();
        let vac2 = b_vac.norm_sqr();
        vacuum_weights.push(vac2 / (vac2 + single_norm2));
        fidelities.push(b[j].norm() / single_norm2.sqrt());
    }
    Ok(FictitiousStates {
        fidelities,
        vacuum_weights,
    })
}

/// Site-averaged free-evolution record χ̄(t) = (1/LW) Σ_j e^{iω_j t} and its
/// Hann-windowed Fourier spectrum.
#[derive(Debug, Clone)]
pub struct ButterflySignal {
    pub times: Vec<f64>,
    pub trace: Vec<C64>,
    pub freq_grid: Vec<f64>,
    /// Windowed spectral amplitude at each grid frequency.
    pub spectrum: Vec<f64>,
    /// (frequency, amplitude) of maxima above the peak threshold.
    pub peaks: Vec<(f64, f64)>,
}

/// Evaluates χ̄(t) exactly from the spectrum on a uniform, Nyquist-valid
/// time grid and recovers the eigenfrequencies, each with amplitude ≈ 1/LW,
/// from the windowed transform.
pub fn butterfly_signal(spec: &LatticeSpec, t_grid: &[f64]) -> Result<ButterflySignal, CoreError> {
    let n = t_grid.len();
    if n < 16 {
        return Err(CoreError::domain(
            "butterfly_signal",
            format!("{n} samples cannot carry a spectrum"),
        ));
    }
    let dt = t_grid[1] - t_grid[0];
    if !(dt > 0.0)
        || t_grid
            .windows(2)
            .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt)
    {
        return Err(CoreError::domain(
            "butterfly_signal",
            "time grid must be uniform and increasing",
        ));
    }
    let eig = open_eigensystem(spec, "butterfly_signal")?;
    let freqs = eig.values();
    let w_max = freqs.iter().fold(0.0_f64, |a, &w| a.max(w.abs()));
    if w_max > 0.0 {
        let limit = PI / w_max;
        if dt > limit {
            return Err(CoreError::Nyquist { dt, limit });
        }
    }
    let sites = eig.dim() as f64;
    let trace: Vec<C64> = t_grid
        .iter()
        .map(|&t| {
            freqs
                .iter()
                .map(|&w| C64::from_polar(1.0, w * t))
                .sum::<C64>()
                / sites
        })
        .collect();
    let hann: Vec<f64> = (0..n)
        .map(|i| 0.5 * (1.0 - (TAU * i as f64 / (n - 1) as f64).cos()))
        .collect();
    let hann_sum: f64 = hann.iter().sum();
    let t_window = t_grid[n - 1] - t_grid[0];
    let resolution = TAU / t_window;
    let df = resolution / BUTTERFLY_OVERSAMPLE;
    let span = w_max + 8.0 * resolution;
    let n_f = (2.0 * span / df).ceil() as usize + 1;
    let freq_grid: Vec<f64> = (0..n_f).map(|i| -span + df * i as f64).collect();
    let spectrum: Vec<f64> = freq_grid
        .par_iter()
        .map(|&w| {
            let z: C64 = t_grid
                .iter()
                .zip(&trace)
                .zip(&hann)
                .map(|((&t, &x), &h)| x * h * C64::from_polar(1.0, -w * t))
                .sum();
            z.norm() / hann_sum
        })
        .collect();
    let smax = spectrum.iter().fold(0.0_f64, |a, &v| a.max(v));
    let floor = BUTTERFLY_PEAK_THRESHOLD * smax;
    let mut peaks = Vec::new();
    for i in 1..n_f - 1 {
        if spectrum[i] > spectrum[i - 1] && spectrum[i] >= spectrum[i + 1] && spectrum[i] > floor {
            peaks.push((freq_grid[i], spectrum[i]));
        }
    }
    Ok(ButterflySignal {
        times: t_grid.to_vec(),
        trace,
        freq_grid,
        spectrum,
        peaks,
    })
}
