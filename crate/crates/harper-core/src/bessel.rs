//! Bessel function of the first kind, order one.
//!
//! `J1` enters the column-coupling strength through the first sideband of the
//! flux modulation. Power series below `|x| < 8`, Hankel asymptotic expansion
//! beyond, domain `|x| ≤ 50`. The asymptotic branch carries the expansion's
//! intrinsic error floor near the switch point (about 1e-8 at `x = 8`,
//! decaying to below 1e-13 by `x ≈ 16`); physical arguments `2πΦ_eff/Φ0`
//! stay below π, well inside the power-series branch.

use crate::error::CoreError;

/// J1(x) for `|x| ≤ 50`.
pub fn bessel_j1(x: f64) -> Result<f64, CoreError> {
    if !x.is_finite() || x.abs() > 50.0 {
        return Err(CoreError::domain(
            "bessel_j1",
            format!("argument {x} outside |x| <= 50"),
        ));
    }
    let ax = x.abs();
    let value = if ax < 8.0 {
        j1_power_series(ax)
    } else {
        j1_asymptotic(ax)
    };
    Ok(if x < 0.0 { -value } else { value })
}

/// Ascending series `(x/2) Σ_k (−x²/4)^k / (k!(k+1)!)`.
fn j1_power_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for k in 1..=60 {
        term *= q / (k as f64 * (k as f64 + 1.0));
        sum += term;
        if term.abs() < 1e-20 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Hankel expansion `√(2/πx) [P(x) cos ω − Q(x) sin ω]`, `ω = x − 3π/4`,
/// truncated at the smallest term.
fn j1_asymptotic(x: f64) -> f64 {
    // a_k = a_{k-1} · (4 − (2k−1)²) / (8k); P sums even k, Q sums odd k,
    // with alternating signs in 1/x powers.
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0_f64;
    let mut pow = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 0..24 {
        if k > 0 {
            let tk = 2.0 * k as f64 - 1.0;
            a *= (4.0 - tk * tk) / (8.0 * k as f64);
            pow /= x;
        }
        let term = a * pow;
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // sign pattern: + + − − + + − − … in (P, Q) interleaving
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
    }
    let omega = x - 0.75 * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * omega.cos() - q * omega.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 60-term ascending-series oracle, valid on the power-series branch.
    fn oracle_series(x: f64) -> f64 {
        let q = -0.25 * x * x;
        let mut term = 0.5 * x;
        let mut sum = term;
        for k in 1..=60 {
            term *= q / (k as f64 * (k as f64 + 1.0));
            sum += term;
        }
        sum
    }

    #[test]
    fn zero_argument() {
        assert_eq!(bessel_j1(0.0).unwrap(), 0.0);
    }

    #[test]
    fn matches_series_oracle_below_eight() {
        let mut x = 0.0;
        while x < 8.0 {
            let v = bessel_j1(x).unwrap();
            assert!(
                (v - oracle_series(x)).abs() <= 1e-12,
                "x={x}: {v} vs oracle {}",
                oracle_series(x)
            );
            x += 0.05;
        }
    }

    #[test]
    fn global_maximum() {
        let v = bessel_j1(1.8412).unwrap();
        assert!((v - 0.5819).abs() < 5e-5);
        assert!((v - 5.818_652_242_276_430_9e-1).abs() < 1e-13);
    }

    #[test]
    fn odd_parity() {
        for &x in &[0.3, 1.0, 4.5, 7.9, 9.0, 20.0, 49.5] {
            assert_eq!(bessel_j1(-x).unwrap(), -bessel_j1(x).unwrap());
        }
    }

    #[test]
    fn out_of_domain_rejected() {
        assert!(bessel_j1(50.1).is_err());
        assert!(bessel_j1(f64::NAN).is_err());
    }

    /// Reference values frozen from an independent high-precision evaluation.
    /// Tolerances on the asymptotic branch follow its intrinsic error floor.
    #[test]
    fn golden_values() {
        let goldens: &[(f64, f64, f64)] = &[
            (0.1, 4.993_752_603_624_199_8e-2, 1e-15),
            (0.5, 2.422_684_576_748_738_7e-1, 1e-15),
            (1.0, 4.400_505_857_449_335_5e-1, 1e-15),
            (2.0, 5.767_248_077_568_734_0e-1, 1e-14),
            (3.8317, 2.404_559_043_086_966_1e-6, 1e-13),
            (5.0, -3.275_791_375_914_652_9e-1, 1e-13),
            (7.5, 1.352_484_275_797_055_4e-1, 1e-12),
            (8.0, 2.346_363_468_539_146_0e-1, 5e-8),
            (10.0, 4.347_274_616_886_141_1e-2, 5e-9),
            (13.3237, 1.760_781_113_590_646_8e-6, 1e-10),
            (20.0, 6.683_312_417_585_020_3e-2, 1e-13),
            (35.0, 4.399_094_217_962_551_4e-2, 1e-13),
            (50.0, -9.751_182_812_517_508_7e-2, 1e-13),
        ];
        for &(x, expected, tol) in goldens {
            let v = bessel_j1(x).unwrap();
            assert!(
                (v - expected).abs() <= tol,
                "x={x}: {v} vs {expected} (err {:.3e}, tol {tol:.1e})",
                (v - expected).abs()
            );
        }
    }
}
