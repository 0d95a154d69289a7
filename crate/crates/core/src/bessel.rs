//! Zero-order Bessel function of the first kind.

use crate::error::LinalgError;

/// J0(x).
///
/// Power series for small arguments; for larger ones the periodic trapezoid
/// rule on `(1/2pi) \int_0^{2pi} cos(x sin t) dt`, which converges
/// geometrically for entire periodic integrands. Absolute accuracy is well
/// below 1e-12 over |x| <= 50.
pub fn bessel_j0(x: f64) -> Result<f64, LinalgError> {
    if !x.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let ax = x.abs();
    if ax <= 12.0 {
        Ok(j0_series(ax))
    } else {
        Ok(j0_quadrature(ax))
    }
}

fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..200 {
        term *= -q / ((k * k) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1.0) {
            break;
        }
    }
    sum
}

fn j0_quadrature(x: f64) -> f64 {
    // Aliasing error is bounded by |J_N(x)|, negligible once N > 1.5|x| + 40.
    let n = (1.5 * x) as usize + 48;
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let mut sum = 0.0;
    for j in 0..n {
        sum += (x * (step * j as f64).sin()).cos();
    }
    sum / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference power series in f64, summed to convergence. Independent of
    // the quadrature path used for large arguments.
    fn j0_reference(x: f64) -> f64 {
        let q = 0.25 * x * x;
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for k in 1..400 {
            term *= -q / ((k * k) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn j0_at_zero() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn j0_at_one() {
        // Series oracle value 0.7651976865579666.
        assert!((bessel_j0(1.0).unwrap() - 0.7651976865579666).abs() < 1e-10);
    }

    #[test]
    fn j0_first_root() {
        // First root located by bisection on the reference series.
        let (mut lo, mut hi) = (2.0f64, 3.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if j0_reference(lo) * j0_reference(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!((root - 2.404825557695773).abs() < 1e-9);
        assert!(bessel_j0(2.404825557695773).unwrap().abs() < 1e-9);
    }

    #[test]
    fn j0_matches_series_over_switchover() {
        // Both evaluation branches agree with the reference series where the
        // series is still accurate in f64.
        for i in 0..60 {
            let x = 0.5 * i as f64; // 0 .. 29.5
            if x > 16.0 {
                break;
            }
            let err = (bessel_j0(x).unwrap() - j0_reference(x)).abs();
            assert!(err < 1e-10, "x={x} err={err:.3e}");
        }
    }

    #[test]
    fn j0_even_function() {
        for x in [0.3, 1.7, 14.2, 37.5] {
            assert_eq!(bessel_j0(x).unwrap(), bessel_j0(-x).unwrap());
        }
    }

    #[test]
    fn j0_large_argument_known_values() {
        // Values from standard tables (Abramowitz & Stegun, 15 digits).
        let cases = [
            (20.0, 0.167024664340583),
            (30.0, -0.086367983581040),
            (50.0, 0.055812327669252),
        ];
        for (x, expect) in cases {
            assert!(
                (bessel_j0(x).unwrap() - expect).abs() < 1e-10,
                "J0({x}) = {} vs {expect}",
                bessel_j0(x).unwrap()
            );
        }
    }

    #[test]
    fn j0_rejects_non_finite() {
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_j0(f64::INFINITY).is_err());
    }
}
