//! Special functions behind the conformal electrode field maps.
//!
//! Two functions are needed: the complete elliptic integral of the first
//! kind, which sets the field normalization of a coplanar electrode pair,
//! and a complex arccosine with one pinned branch convention, which the
//! potential maps are built from. Both are small enough, and central
//! enough, to own outright.

use num_complex::Complex64;

use crate::error::{Error, Result};

const AGM_MAX_ITER: usize = 40;
const AGM_TOL: f64 = 1e-15;

/// Complete elliptic integral of the first kind, parameter convention
/// `K(m)` with `m = k^2`.
///
/// Computed by the arithmetic-geometric mean: `K(m) = pi / (2 AGM(1, sqrt(1 - m)))`,
/// iterating until `|a_n - b_n| < 1e-15 * a_n`. Valid for `0 <= m < 1`;
/// `K(0) = pi/2` exactly.
///
/// ```
/// use cytowave_core::specfun::ellipk;
/// let k = ellipk(0.5).unwrap();
/// assert!((k - 1.8540746773013719).abs() < 1e-15);
/// ```
pub fn ellipk(m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::Domain {
            name: "m",
            value: m,
            expected: "[0, 1)",
        });
    }
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() < AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    Ok(core::f64::consts::PI / (2.0 * a))
}

/// Principal-branch complex arccosine, `carccos(z) = -j log(z + j sqrt(1 - z^2))`.
///
/// Branch cuts lie on the real axis at `|Re z| > 1`, `Im z = 0`. On the
/// cuts the value is the limit from below for `Re z > 1` (positive
/// imaginary part) and the limit from above for `Re z < -1` (negative
/// imaginary part); exact-real inputs land on those limits. Everywhere,
/// `cos(carccos(z)) = z`.
///
/// All potential-map evaluations share this one convention so that field
/// values are reproducible bit-for-bit.
pub fn carccos(z: Complex64) -> Complex64 {
    let j = Complex64::new(0.0, 1.0);
    let s = (Complex64::new(1.0, 0.0) - z * z).sqrt();
    -j * (z + j * s).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn ellipk_zero_is_half_pi() {
        assert_eq!(ellipk(0.0).unwrap(), FRAC_PI_2);
    }

    #[test]
    fn ellipk_reference_values() {
        // Frozen from 30-digit arbitrary-precision evaluation.
        assert_relative_eq!(ellipk(0.5).unwrap(), 1.8540746773013719, max_relative = 1e-15);
        assert_relative_eq!(ellipk(0.25).unwrap(), 1.6857503548125960, max_relative = 1e-15);
        assert_relative_eq!(ellipk(0.01).unwrap(), 1.5747455615173560, max_relative = 1e-15);
        assert_relative_eq!(
            ellipk(1.0 / 9.0).unwrap(),
            1.6173867356247324,
            max_relative = 1e-15
        );
        assert_relative_eq!(ellipk(0.999).unwrap(), 4.8411325605502970, max_relative = 1e-14);
    }

    #[test]
    fn ellipk_rejects_out_of_domain() {
        assert!(matches!(ellipk(-1e-12), Err(Error::Domain { .. })));
        assert!(matches!(ellipk(1.0), Err(Error::Domain { .. })));
        assert!(matches!(ellipk(1.5), Err(Error::Domain { .. })));
        assert!(matches!(ellipk(f64::NAN), Err(Error::Domain { .. })));
    }

    #[test]
    fn ellipk_monotone_in_m() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..500 {
            let m1: f64 = rng.gen_range(0.0..0.999);
            let m2: f64 = rng.gen_range(0.0..0.999);
            let (lo, hi) = if m1 < m2 { (m1, m2) } else { (m2, m1) };
            if hi - lo > 1e-12 {
                assert!(ellipk(lo).unwrap() < ellipk(hi).unwrap());
            }
        }
    }

    #[test]
    fn carccos_reference_values() {
        // Frozen from 30-digit arbitrary-precision evaluation.
        let v = carccos(Complex64::new(0.0, 1.0));
        assert_relative_eq!(v.re, FRAC_PI_2, max_relative = 1e-15);
        assert_relative_eq!(v.im, -0.8813735870195430, max_relative = 1e-14);

        let v = carccos(Complex64::new(0.3, 0.4));
        assert_relative_eq!(v.re, 1.2901667645030908, max_relative = 1e-14);
        assert_relative_eq!(v.im, -0.4051123371780309, max_relative = 1e-14);

        let v = carccos(Complex64::new(3.0, -2.0));
        assert_relative_eq!(v.re, 0.6061378223872938, max_relative = 1e-14);
        assert_relative_eq!(v.im, 1.9686379257930963, max_relative = 1e-14);
    }

    #[test]
    fn carccos_cut_continuity_convention() {
        // Right cut: exact-real input continues from below (Im > 0).
        let v = carccos(Complex64::new(2.0, 0.0));
        assert!(v.re.abs() < 1e-15);
        assert_relative_eq!(v.im, 1.3169578969248167, max_relative = 1e-14);
        let below = carccos(Complex64::new(2.0, -1e-12));
        assert!((v.im - below.im).abs() < 1e-9);

        // Left cut: exact-real input continues from above (Im < 0).
        let v = carccos(Complex64::new(-2.0, 0.0));
        assert_relative_eq!(v.re, PI, max_relative = 1e-14);
        assert_relative_eq!(v.im, -1.3169578969248167, max_relative = 1e-14);
        let above = carccos(Complex64::new(-2.0, 1e-12));
        assert!((v.im - above.im).abs() < 1e-9);
    }

    #[test]
    fn carccos_round_trip() {
        // cos(carccos(z)) = z over |z| <= 10, excluding a thin band
        // around the cuts where the limit value is one-sided.
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let mut checked = 0;
        while checked < 1000 {
            let re: f64 = rng.gen_range(-10.0..10.0);
            let im: f64 = rng.gen_range(-10.0..10.0);
            if re.abs() > 1.0 - 1e-9 && im.abs() < 1e-9 {
                continue;
            }
            let z = Complex64::new(re, im);
            let back = carccos(z).cos();
            assert!(
                (back - z).norm() <= 1e-12 * (1.0 + z.norm()),
                "round trip failed at {z}: {back}"
            );
            checked += 1;
        }
    }

    #[test]
    fn carccos_range_of_real_part() {
        // Principal branch keeps Re in [0, pi].
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let z = Complex64::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
            let w = carccos(z);
            assert!(w.re >= -1e-12 && w.re <= PI + 1e-12);
        }
    }
}
