//! Physical constants (2019 SI exact values).

/// Magnetic flux quantum Φ0 = h/2e in Wb.
pub const PHI0: f64 = 6.626_070_15e-34 / (2.0 * 1.602_176_634e-19);

/// Elementary charge in C.
pub const E_CHARGE: f64 = 1.602_176_634e-19;

/// Planck constant in J·s.
pub const PLANCK_H: f64 = 6.626_070_15e-34;

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = PLANCK_H / std::f64::consts::TAU;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_quantum_value() {
        assert!((PHI0 - 2.067_833_848e-15).abs() < 1e-24);
    }

    #[test]
    fn hbar_value() {
        assert!((HBAR - 1.054_571_817e-34).abs() < 1e-43);
    }
}
