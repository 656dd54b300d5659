//! Fresnel integrals `C(u) = int_0^u cos(pi t^2/2) dt`, `S(u) = int_0^u sin(pi t^2/2) dt`.
//!
//! Power series for `|u| <= 1.5`; beyond that the modified Lentz evaluation of
//! the continued fraction for `erfc((sqrt(pi)/2)(1 - i) u)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

const SERIES_LIMIT: f64 = 1.5;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 100_000;

/// Returns `(C(u), S(u))`. Non-finite input yields NaN.
pub fn fresnel_cs(u: f64) -> (f64, f64) {
    if !u.is_finite() {
        return (f64::NAN, f64::NAN);
    }
    let x = u.abs();
    let (c, s) = if x < 1e-150 {
        (x, 0.0)
    } else if x <= SERIES_LIMIT {
        series(x)
    } else {
        continued_fraction(x)
    };
    if u < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

fn series(x: f64) -> (f64, f64) {
    let fact = FRAC_PI_2 * x * x;
    let mut term = x;
    let mut c = x;
    let mut s = 0.0;
    for k in 1..200 {
        term *= fact / k as f64;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let contrib = sign * term / (2 * k + 1) as f64;
        if k % 2 == 0 {
            c += contrib;
        } else {
            s += contrib;
        }
        if term < EPS * (c.abs() + s.abs()) {
            break;
        }
    }
    (c, s)
}

fn continued_fraction(x: f64) -> (f64, f64) {
    let pix2 = PI * x * x;
    let one = Complex64::new(1.0, 0.0);
    let mut b = Complex64::new(1.0, -pix2);
    let mut cc = Complex64::new(1.0 / TINY, 0.0);
    let mut d = one / b;
    let mut h = d;
    let mut n = -1.0;
    for _ in 1..MAX_ITER {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += 4.0;
        d = one / (a * d + b);
        cc = b + a / cc;
        let del = cc * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < EPS {
            break;
        }
    }
    h *= Complex64::new(x, -x);
    let phase = Complex64::from_polar(1.0, 0.5 * pix2);
    let cs = Complex64::new(0.5, 0.5) * (one - phase * h);
    (cs.re, cs.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::quadrature::integrate_complex;
    use proptest::prelude::*;

    fn oracle(u: f64) -> (f64, f64) {
        let q = integrate_complex(
            |t| Complex64::from_polar(1.0, FRAC_PI_2 * t * t),
            0.0,
            u,
            1e-15,
            1e-15,
        )
        .unwrap();
        (q.value.re, q.value.im)
    }

    #[test]
    fn zero() {
        assert_eq!(fresnel_cs(0.0), (0.0, 0.0));
    }

    #[test]
    fn value_at_one() {
        let (co, so) = oracle(1.0);
        assert!((co - 0.779_893_400_377).abs() < 1e-12);
        assert!((so - 0.438_259_147_390).abs() < 1e-12);
        let (c, s) = fresnel_cs(1.0);
        assert!((c - co).abs() < 1e-10 && (s - so).abs() < 1e-10, "{c} {s}");
    }

    #[test]
    fn matches_quadrature_across_both_regimes() {
        let mut u = 0.05;
        while u < 8.0 {
            let (co, so) = oracle(u);
            let (c, s) = fresnel_cs(u);
            assert!((c - co).abs() < 1e-10, "C({u}) = {c}, oracle {co}");
            assert!((s - so).abs() < 1e-10, "S({u}) = {s}, oracle {so}");
            u += 0.137;
        }
    }

    #[test]
    fn large_argument_limit() {
        let (c, s) = fresnel_cs(100.0);
        assert!((c - 0.5).abs() < 1e-2 && (s - 0.5).abs() < 1e-2);
        // envelope 1/(pi u)
        assert!((c - 0.5).abs() <= 1.0 / (PI * 100.0) + 1e-12);
        assert!((s - 0.5).abs() <= 1.0 / (PI * 100.0) + 1e-12);
    }

    proptest! {
        #[test]
        fn odd_and_bounded(u in -20.0..20.0f64) {
            let (c, s) = fresnel_cs(u);
            let (cn, sn) = fresnel_cs(-u);
            prop_assert_eq!(c, -cn);
            prop_assert_eq!(s, -sn);
            // distance from the spiral's limit point stays within the envelope
            let x = u.abs();
            if x > 1.0 {
                let r = ((c.abs() - 0.5).powi(2) + (s.abs() - 0.5).powi(2)).sqrt();
                prop_assert!(r <= (1.0 + 1.0 / (x * x)) / (PI * x));
            }
        }
    }
}
