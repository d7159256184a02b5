//! Circuit electrodynamics: junction parameters and flux biases to the
//! effective lattice couplings.
//!
//! Each transmon pair along a column is bridged by a gradiometric coupler
//! whose mutual inductance `M(φ) = −M0² cos(2πφ/Φ0) / (L_T + 2L0 cos(2πφ/Φ0))`
//! is tuned by the coupler flux. Static row biases set `g_x`; modulating the
//! column couplers at the odd/even detuning `ω_oe` with site-dependent phases
//! `γ'_nm = ∓nγ` generates the column coupling `g_y` (first Bessel sideband)
//! and the synthetic flux `γ` per plaquette.

use crate::bessel::bessel_j1;
use crate::constants::{E_CHARGE, HBAR, PHI0};
use crate::error::{CoreError, Warning};
use std::f64::consts::TAU;

/// Raw circuit values, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawCircuitParams {
    /// SQUID-equivalent junction inductance, odd rows (H).
    pub l_j_odd: f64,
    /// Junction inductance, even rows (H).
    pub l_j_even: f64,
    /// Coupler junction inductance (H).
    pub l_t: f64,
    /// Transmon shunt capacitance (F).
    pub c: f64,
    /// Gradiometer segment inductance (H).
    pub l0: f64,
    /// Qubit-coupler mutual inductance (H).
    pub m0: f64,
}

impl RawCircuitParams {
    /// Representative values for a transmon lattice with gradiometric
    /// couplers.
    pub fn typical() -> Self {
        RawCircuitParams {
            l_j_odd: 7.9e-9,
            l_j_even: 8.3e-9,
            l_t: 1.3e-9,
            c: 91e-15,
            l0: 210e-12,
            m0: 180e-12,
        }
    }

    /// Positivity check plus approximation warnings.
    pub fn validate(&self) -> Result<Vec<Warning>, CoreError> {
        let fields = [
            ("L_J_odd", self.l_j_odd),
            ("L_J_even", self.l_j_even),
            ("L_T", self.l_t),
            ("C", self.c),
            ("L0", self.l0),
            ("M0", self.m0),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::domain(
                    "RawCircuitParams",
                    format!("{name} must be strictly positive, got {v}"),
                ));
            }
        }
        let mut warnings = Vec::new();
        if self.l0 > self.l_t / 4.0 {
            warnings.push(Warning::new(
                "RawCircuitParams",
                format!(
                    "L0 = {:.3e} H exceeds L_T/4 = {:.3e} H; the flux-division \
                     approximation for the coupler weakens",
                    self.l0,
                    self.l_t / 4.0
                ),
            ));
        }
        Ok(warnings)
    }
}

/// Flux biases and the effective plaquette flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxBias {
    /// Direct column-coupler amplitude Φ̄ (Wb).
    pub phi_bar: f64,
    /// Alternating column-coupler amplitude Φ_eff (Wb).
    pub phi_eff: f64,
    /// Static odd-row coupler bias Φ_o (Wb).
    pub phi_odd: f64,
    /// Static even-row coupler bias Φ_e (Wb).
    pub phi_even: f64,
    /// Effective magnetic flux per plaquette (rad).
    pub gamma: f64,
}

impl FluxBias {
    pub fn validate(&self) -> Result<(), CoreError> {
        for (name, v) in [
            ("phi_bar", self.phi_bar),
            ("phi_eff", self.phi_eff),
            ("phi_odd", self.phi_odd),
            ("phi_even", self.phi_even),
        ] {
            if v.abs() > PHI0 / 2.0 + 1e-25 {
                return Err(CoreError::domain(
                    "FluxBias",
                    format!("{name} = {v:.3e} Wb outside [-Phi0/2, Phi0/2]"),
                ));
            }
        }
        if !(self.gamma > -std::f64::consts::PI - 1e-12
            && self.gamma <= std::f64::consts::PI + 1e-12)
        {
            return Err(CoreError::domain(
                "FluxBias",
                format!("gamma = {} outside (-pi, pi]", self.gamma),
            ));
        }
        Ok(())
    }
}

/// Point values derived from the raw parameters at a given bias.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedCircuitParams {
    /// Josephson energies (J).
    pub e_j_odd: f64,
    pub e_j_even: f64,
    /// Charging energy (J).
    pub e_c: f64,
    /// Plasma frequencies (rad/s).
    pub omega_p_odd: f64,
    pub omega_p_even: f64,
    /// Qubit transition frequencies ω_p − E_C/ħ (rad/s).
    pub omega_odd: f64,
    pub omega_even: f64,
    /// Odd/even detuning ω_o − ω_e (rad/s).
    pub omega_oe: f64,
    /// Characteristic impedances √(L_J/C) (Ω).
    pub z_odd: f64,
    pub z_even: f64,
    /// Bare column-coupling scale (rad/s).
    pub t_y: f64,
    /// Column coupling at the given bias (rad/s).
    pub g_y: f64,
    /// Row-coupler mutual inductances at the bias fluxes (H).
    pub m_odd: f64,
    pub m_even: f64,
    /// Row couplings at the bias fluxes (rad/s).
    pub g_odd: f64,
    pub g_even: f64,
    /// Non-fatal approximation reports.
    pub warnings: Vec<Warning>,
}

/// Mutual inductance of one gradiometric coupler at flux `phi`.
pub fn mutual_inductance(phi: f64, raw: &RawCircuitParams) -> Result<f64, CoreError> {
    let cosine = (TAU * phi / PHI0).cos();
    let denom = raw.l_t + 2.0 * raw.l0 * cosine;
    if denom.abs() < 1e-18 {
        return Err(CoreError::domain(
            "mutual_inductance",
            format!("singular coupler network at phi = {phi:.6e} Wb"),
        ));
    }
    Ok(-raw.m0 * raw.m0 * cosine / denom)
}

/// Linearized coupler network at flux `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveNetwork {
    /// Tunable coupler inductance L_T / cos(2πφ/Φ0); infinite at switch-off.
    pub coupler_inductance: f64,
    /// Geometric self-inductance base 4·L0 (H).
    pub self_base: f64,
    /// Mutual contribution entering L_pq = 4L0 + Σ M (H).
    pub mutual_term: f64,
}

pub fn effective_network(phi: f64, raw: &RawCircuitParams) -> Result<EffectiveNetwork, CoreError> {
    let cosine = (TAU * phi / PHI0).cos();
    // L_T/cos θ has a pole at θ = π/2; below tolerance the quotient exceeds
    // 1e12·L_T and is reported as the signed infinity of the approach side.
    let coupler_inductance = if cosine.abs() < 1e-12 {
        f64::INFINITY.copysign(cosine)
    } else {
        raw.l_t / cosine
    };
    Ok(EffectiveNetwork {
        coupler_inductance,
        self_base: 4.0 * raw.l0,
        mutual_term: mutual_inductance(phi, raw)?,
    })
}

/// Row coupling G = −(M/2)·ω_p²/Z for equal-row neighbors.
pub fn row_coupling(m: f64, omega_p: f64, z: f64) -> f64 {
    -(m / 2.0) * omega_p * omega_p / z
}

/// Two-site row coupling −(M/2)·ω_p ω_p'/√(Z Z').
pub fn row_coupling_pair(m: f64, omega_p: f64, omega_p2: f64, z: f64, z2: f64) -> f64 {
    -(m / 2.0) * omega_p * omega_p2 / (z * z2).sqrt()
}

/// Column coupling g_y = −2 t_y sin(2πΦ̄/Φ0) J1(2πΦ_eff/Φ0).
pub fn column_coupling(t_y: f64, bias: &FluxBias) -> Result<f64, CoreError> {
    let j1 = bessel_j1(TAU * bias.phi_eff / PHI0)?;
    Ok(-2.0 * t_y * (TAU * bias.phi_bar / PHI0).sin() * j1)
}

/// Every derived quantity at the given bias.
pub fn derive_params(raw: &RawCircuitParams, bias: &FluxBias) -> Result<DerivedCircuitParams, CoreError> {
    let mut warnings = raw.validate()?;
    bias.validate()?;

    let phi0_over_tau = PHI0 / TAU;
    let e_j_odd = phi0_over_tau * phi0_over_tau / raw.l_j_odd;
    let e_j_even = phi0_over_tau * phi0_over_tau / raw.l_j_even;
    let e_c = E_CHARGE * E_CHARGE / (2.0 * raw.c);
    let omega_p_odd = 1.0 / (raw.l_j_odd * raw.c).sqrt();
    let omega_p_even = 1.0 / (raw.l_j_even * raw.c).sqrt();
    let omega_odd = omega_p_odd - e_c / HBAR;
    let omega_even = omega_p_even - e_c / HBAR;
    let omega_oe = omega_odd - omega_even;
    if omega_oe <= 0.0 {
        return Err(CoreError::Validation(format!(
            "omega_oe = {omega_oe:.3e} rad/s must be positive (odd rows stiffer than even)"
        )));
    }
    let z_odd = (raw.l_j_odd / raw.c).sqrt();
    let z_even = (raw.l_j_even / raw.c).sqrt();
    let t_y = raw.m0 * raw.m0 * omega_p_odd * omega_p_even / (4.0 * raw.l_t * (z_odd * z_even).sqrt());

    let m_odd = mutual_inductance(bias.phi_odd, raw)?;
    let m_even = mutual_inductance(bias.phi_even, raw)?;
    let g_odd = row_coupling(m_odd, omega_p_odd, z_odd);
    let g_even = row_coupling(m_even, omega_p_even, z_even);
    let g_y = column_coupling(t_y, bias)?;

    for (name, m, l_j) in [("M_odd", m_odd, raw.l_j_odd), ("M_even", m_even, raw.l_j_even)] {
        if m.abs() > l_j / 10.0 {
            warnings.push(Warning::new(
                "derive_params",
                format!("{name} = {m:.3e} H is not small against L_J = {l_j:.3e} H"),
            ));
        }
    }

    Ok(DerivedCircuitParams {
        e_j_odd,
        e_j_even,
        e_c,
        omega_p_odd,
        omega_p_even,
        omega_odd,
        omega_even,
        omega_oe,
        z_odd,
        z_even,
        t_y,
        g_y,
        m_odd,
        m_even,
        g_odd,
        g_even,
        warnings,
    })
}

/// Extremes of M(φ) over φ ∈ [0, Φ0/2]: (M at φ=0, M at φ=Φ0/2).
pub fn mutual_range(raw: &RawCircuitParams) -> Result<(f64, f64), CoreError> {
    Ok((
        mutual_inductance(0.0, raw)?,
        mutual_inductance(PHI0 / 2.0, raw)?,
    ))
}

/// Achievable row-coupling interval (G_min, G_max) for one row parity.
pub fn row_coupling_range(raw: &RawCircuitParams, odd: bool) -> Result<(f64, f64), CoreError> {
    let (m_lo, m_hi) = mutual_range(raw)?;
    let (omega_p, z) = if odd {
        (1.0 / (raw.l_j_odd * raw.c).sqrt(), (raw.l_j_odd / raw.c).sqrt())
    } else {
        (1.0 / (raw.l_j_even * raw.c).sqrt(), (raw.l_j_even / raw.c).sqrt())
    };
    let a = row_coupling(m_lo, omega_p, z);
    let b = row_coupling(m_hi, omega_p, z);
    Ok((a.min(b), a.max(b)))
}

/// Largest attainable |g_y| (Φ̄ = Φ0/4, Φ_eff at the J1 maximum).
pub fn column_coupling_max(t_y: f64) -> f64 {
    2.0 * t_y * 5.818_652_242_276_430_9e-1
}

/// Flux bias realizing G = −g_x for one row parity, by bisection on the
/// monotone branch φ ∈ [0, Φ0/2]. Boundary-valued targets resolve to the
/// boundary flux.
pub fn solve_row_flux_parity(
    target_gx: f64,
    raw: &RawCircuitParams,
    odd: bool,
) -> Result<f64, CoreError> {
    if target_gx == 0.0 {
        // M vanishes where the coupler cosine does.
        return Ok(PHI0 / 4.0);
    }
    let (omega_p, z) = if odd {
        (1.0 / (raw.l_j_odd * raw.c).sqrt(), (raw.l_j_odd / raw.c).sqrt())
    } else {
        (1.0 / (raw.l_j_even * raw.c).sqrt(), (raw.l_j_even / raw.c).sqrt())
    };
    let g_at = |phi: f64| -> Result<f64, CoreError> {
        Ok(row_coupling(mutual_inductance(phi, raw)?, omega_p, z))
    };
    let target_g = -target_gx;
    let (mut lo, mut hi) = (0.0, PHI0 / 2.0);
    let (g_lo, g_hi) = (g_at(lo)?, g_at(hi)?);
    // G decreases from φ=0 to φ=Φ0/2 for positive M0, L_T > 2 L0.
    let (g_min, g_max) = (g_hi.min(g_lo), g_hi.max(g_lo));
    let tol = 1e-12 * target_gx.abs().max(g_max.abs());
    if target_g < g_min - tol || target_g > g_max + tol {
        return Err(CoreError::Range {
            context: format!("solve_row_flux ({} rows)", if odd { "odd" } else { "even" }),
            target: target_gx,
            lo: -g_max,
            hi: -g_min,
        });
    }
    if (target_g - g_lo).abs() <= tol {
        return Ok(lo);
    }
    if (target_g - g_hi).abs() <= tol {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g_mid = g_at(mid)?;
        if (g_mid > target_g) == (g_lo > target_g) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < f64::EPSILON * PHI0 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Flux biases realizing G_o = G_e = −g_x for a target g_x.
pub fn solve_row_flux(target_gx: f64, raw: &RawCircuitParams) -> Result<(f64, f64), CoreError> {
    raw.validate()?;
    Ok((
        solve_row_flux_parity(target_gx, raw, true)?,
        solve_row_flux_parity(target_gx, raw, false)?,
    ))
}

/// Instantaneous column-coupler flux Φ̄ + Φ_eff cos(ω_oe t + γ'_nm) with the
/// staggered drive phase γ'_nm = −nγ for odd m, +nγ for even m.
pub fn flux_drive(n: i64, m: i64, t: f64, bias: &FluxBias, omega_oe: f64) -> f64 {
    let gamma_nm = drive_phase(n, m, bias.gamma);
    bias.phi_bar + bias.phi_eff * (omega_oe * t + gamma_nm).cos()
}

/// Staggered drive phase γ'_nm.
pub fn drive_phase(n: i64, m: i64, gamma: f64) -> f64 {
    if m.rem_euclid(2) == 1 {
        -(n as f64) * gamma
    } else {
        n as f64 * gamma
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const MHZ: f64 = TAU * 1e6;
    const GHZ: f64 = TAU * 1e9;

    fn bias_at_gy_max(raw: &RawCircuitParams, gamma: f64) -> FluxBias {
        let (phi_odd, phi_even) = solve_row_flux(4.0 * MHZ, raw).unwrap();
        FluxBias {
            phi_bar: PHI0 / 4.0,
            phi_eff: 1.8412 / TAU * PHI0,
            phi_odd,
            phi_even,
            gamma,
        }
    }

    #[test]
    fn mutual_extremes() {
        let raw = RawCircuitParams::typical();
        let m0 = mutual_inductance(0.0, &raw).unwrap();
        let m_half = mutual_inductance(PHI0 / 2.0, &raw).unwrap();
        assert!((m0 - (-18.8e-12)).abs() < 0.05e-12, "{m0}");
        assert!((m_half - 36.8e-12).abs() < 0.05e-12, "{m_half}");
        // cos(π/2) rounds to ~6e-17, so the pole value is ~1e-27 H, not 0.
        assert!(mutual_inductance(PHI0 / 4.0, &raw).unwrap().abs() < 1e-26);
    }

    #[test]
    fn mutual_periodic_and_even() {
        let raw = RawCircuitParams::typical();
        for &phi in &[0.0, 0.1e-15, 0.3e-15, 0.9e-15] {
            let m = mutual_inductance(phi, &raw).unwrap();
            assert_relative_eq!(m, mutual_inductance(-phi, &raw).unwrap(), epsilon = 1e-25);
            assert_relative_eq!(m, mutual_inductance(phi + PHI0, &raw).unwrap(), epsilon = 1e-24);
        }
    }

    #[test]
    fn network_values() {
        let raw = RawCircuitParams::typical();
        let net0 = effective_network(0.0, &raw).unwrap();
        assert_relative_eq!(net0.coupler_inductance, raw.l_t, epsilon = 1e-20);
        assert_relative_eq!(net0.self_base, 840e-12, epsilon = 1e-20);
        let net3 = effective_network(PHI0 / 3.0, &raw).unwrap();
        assert_relative_eq!(net3.coupler_inductance, -2.0 * raw.l_t, max_relative = 1e-12);
        let off = effective_network(PHI0 / 4.0, &raw).unwrap();
        assert!(off.coupler_inductance.is_infinite());
    }

    #[test]
    fn derived_values_match_reference_table() {
        let raw = RawCircuitParams::typical();
        let bias = bias_at_gy_max(&raw, 0.4 * std::f64::consts::PI);
        let d = derive_params(&raw, &bias).unwrap();
        let h = crate::constants::PLANCK_H;
        // Josephson and charging energies as ordinary frequencies.
        assert!((d.e_j_odd / h - 20.7e9).abs() < 0.05e9);
        assert!((d.e_j_even / h - 19.7e9).abs() < 0.05e9);
        assert!((d.e_c / h - 0.213e9).abs() < 0.0005e9);
        // Plasma, qubit, and detuning frequencies.
        assert!((d.omega_p_odd / GHZ - 5.94).abs() < 0.005);
        assert!((d.omega_p_even / GHZ - 5.79).abs() < 0.005);
        assert!((d.omega_odd / GHZ - 5.72).abs() < 0.005);
        assert!((d.omega_even / GHZ - 5.58).abs() < 0.005);
        assert!((d.omega_oe / MHZ - 145.0).abs() < 0.5);
        // Impedances.
        assert!((d.z_odd - 295.0).abs() < 0.5);
        assert!((d.z_even - 302.0).abs() < 0.5);
        // Coupling scales.
        assert!((d.t_y / MHZ - 4.51).abs() < 0.005);
        assert!((column_coupling_max(d.t_y) / MHZ - 5.25).abs() < 0.005);
        // ω_p from 1/√(LC) coincides with √(8 E_C E_J)/ħ.
        let omega_sqrt = (8.0 * d.e_c * d.e_j_odd).sqrt() / HBAR;
        assert_relative_eq!(d.omega_p_odd, omega_sqrt, max_relative = 1e-12);
        // Row couplings solved to the 4 MHz target.
        assert_relative_eq!(d.g_odd, -4.0 * MHZ, max_relative = 1e-9);
        assert_relative_eq!(d.g_even, -4.0 * MHZ, max_relative = 1e-9);
        // g_y at the maximizing bias.
        assert!((d.g_y.abs() / MHZ - 5.25).abs() < 0.005);
    }

    #[test]
    fn row_coupling_extremes() {
        let raw = RawCircuitParams::typical();
        let (g_lo_o, g_hi_o) = row_coupling_range(&raw, true).unwrap();
        assert!((g_hi_o / MHZ - 7.08).abs() < 0.005, "{}", g_hi_o / MHZ);
        assert!((g_lo_o / MHZ - (-13.8)).abs() < 0.05, "{}", g_lo_o / MHZ);
        let (g_lo_e, g_hi_e) = row_coupling_range(&raw, false).unwrap();
        assert!((g_hi_e / MHZ - 6.57).abs() < 0.005);
        assert!((g_lo_e / MHZ - (-12.8)).abs() < 0.05);
        assert_eq!(row_coupling(0.0, 1e10, 300.0), 0.0);
    }

    #[test]
    fn column_coupling_odd_symmetries() {
        let raw = RawCircuitParams::typical();
        let t_y = derive_params(&raw, &bias_at_gy_max(&raw, 0.5)).unwrap().t_y;
        let base = FluxBias {
            phi_bar: 0.17 * PHI0,
            phi_eff: 0.23 * PHI0,
            phi_odd: 0.0,
            phi_even: 0.0,
            gamma: 0.5,
        };
        let g = column_coupling(t_y, &base).unwrap();
        let flip_bar = column_coupling(t_y, &FluxBias { phi_bar: -base.phi_bar, ..base }).unwrap();
        let flip_eff = column_coupling(t_y, &FluxBias { phi_eff: -base.phi_eff, ..base }).unwrap();
        assert_relative_eq!(flip_bar, -g, max_relative = 1e-12);
        assert_relative_eq!(flip_eff, -g, max_relative = 1e-12);
        assert_eq!(
            column_coupling(t_y, &FluxBias { phi_bar: 0.0, ..base }).unwrap(),
            0.0
        );
        assert_eq!(
            column_coupling(t_y, &FluxBias { phi_eff: 0.0, ..base }).unwrap(),
            0.0
        );
    }

    #[test]
    fn solve_row_flux_round_trip() {
        let raw = RawCircuitParams::typical();
        let target = 4.0 * MHZ;
        let (phi_o, phi_e) = solve_row_flux(target, &raw).unwrap();
        let d_o = row_coupling(
            mutual_inductance(phi_o, &raw).unwrap(),
            1.0 / (raw.l_j_odd * raw.c).sqrt(),
            (raw.l_j_odd / raw.c).sqrt(),
        );
        let d_e = row_coupling(
            mutual_inductance(phi_e, &raw).unwrap(),
            1.0 / (raw.l_j_even * raw.c).sqrt(),
            (raw.l_j_even / raw.c).sqrt(),
        );
        assert_relative_eq!(d_o, -target, max_relative = 1e-6);
        assert_relative_eq!(d_e, -target, max_relative = 1e-6);
    }

    #[test]
    fn solve_row_flux_boundaries() {
        let raw = RawCircuitParams::typical();
        // G_o(0) is the most positive row coupling; it realizes the most
        // negative g_x target, resolved to the φ=0 boundary.
        let (g_lo, g_hi) = row_coupling_range(&raw, true).unwrap();
        let phi_o = solve_row_flux_parity(-g_hi, &raw, true).unwrap();
        assert!(phi_o.abs() < 1e-20, "{phi_o}");
        // The most positive g_x target lands on the φ=Φ0/2 boundary.
        let phi_o = solve_row_flux_parity(-g_lo, &raw, true).unwrap();
        assert_relative_eq!(phi_o, PHI0 / 2.0, max_relative = 1e-12);
        // The even range is narrower, so the odd boundary target overflows
        // the joint solve.
        assert!(matches!(
            solve_row_flux(-g_hi, &raw),
            Err(CoreError::Range { .. })
        ));
        // Zero target switches the coupler off.
        let (phi_o, phi_e) = solve_row_flux(0.0, &raw).unwrap();
        assert_eq!(phi_o, PHI0 / 4.0);
        assert_eq!(phi_e, PHI0 / 4.0);
        // Far outside the achievable range.
        assert!(matches!(
            solve_row_flux(100.0 * MHZ, &raw),
            Err(CoreError::Range { .. })
        ));
    }

    #[test]
    fn flux_drive_examples() {
        let raw = RawCircuitParams::typical();
        let bias = bias_at_gy_max(&raw, std::f64::consts::FRAC_PI_2);
        let omega_oe = derive_params(&raw, &bias).unwrap().omega_oe;
        // t=0, n=0: cos(0) = 1.
        assert_relative_eq!(
            flux_drive(0, 1, 0.0, &bias, omega_oe),
            bias.phi_bar + bias.phi_eff,
            max_relative = 1e-14
        );
        // n=1, odd m, γ=π/2: cos(−π/2) = 0.
        assert_relative_eq!(
            flux_drive(1, 1, 0.0, &bias, omega_oe),
            bias.phi_bar,
            epsilon = 1e-28
        );
        // Even m flips the phase sign.
        for n in -3..=3 {
            assert_eq!(drive_phase(n, 1, 0.7), -drive_phase(n, 2, 0.7));
            assert_eq!(drive_phase(n, -1, 0.7), -drive_phase(n, 0, 0.7));
        }
    }

    #[test]
    fn validation_errors_and_warnings() {
        let mut raw = RawCircuitParams::typical();
        raw.c = -1.0;
        assert!(raw.validate().is_err());
        let mut raw = RawCircuitParams::typical();
        raw.l0 = raw.l_t;
        let warnings = raw.validate().unwrap();
        assert!(!warnings.is_empty());
        let bad_bias = FluxBias {
            phi_bar: PHI0,
            phi_eff: 0.0,
            phi_odd: 0.0,
            phi_even: 0.0,
            gamma: 0.0,
        };
        assert!(bad_bias.validate().is_err());
    }
}
