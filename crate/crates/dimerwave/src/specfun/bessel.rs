//! Spherical Bessel and Hankel functions of complex argument.
//!
//! `j_n` uses Miller's downward recurrence (stable for all n, including
//! |z| << n where upward recurrence explodes); `h_n^(1)` uses upward
//! recurrence from its closed-form first two orders, which is stable because
//! h grows with n.

use crate::{C64, Error, Result};

/// `j_0(z), ..., j_nmax(z)`.
pub fn spherical_bessel_j_all(n_max: usize, z: C64) -> Vec<C64> {
    if z.norm() < 1e-8 {
        // leading series term j_n = z^n / (2n+1)!!; adequate at this size
        let mut out = vec![C64::new(0.0, 0.0); n_max + 1];
        out[0] = C64::new(1.0, 0.0);
        for n in 1..=n_max {
            out[n] = out[n - 1] * z / (2.0 * n as f64 + 1.0);
        }
        return out;
    }
    let m = n_max + z.norm() as usize + 25;
    let mut vals = vec![C64::new(0.0, 0.0); m + 1];
    let mut fp = C64::new(0.0, 0.0);
    let mut f = C64::new(1e-280, 0.0);
    vals[m] = f;
    for n in (1..=m).rev() {
        let fm = (2.0 * n as f64 + 1.0) / z * f - fp;
        fp = f;
        f = fm;
        vals[n - 1] = f;
        // rescale by a real factor: complex division squares the modulus
        // internally and would overflow
        if f.norm() > 1e250 {
            let r = f.norm();
            for v in vals[n - 1..].iter_mut() {
                *v /= r;
            }
            fp /= r;
            f = vals[n - 1];
        }
    }
    vals.truncate(n_max + 1);
    // bring the kept values to O(1) so the complex division below cannot
    // underflow its |denominator|^2
    let top = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if top > 0.0 {
        for v in vals.iter_mut() {
            *v /= top;
        }
    }
    // normalize against whichever closed form is better conditioned
    let j0 = z.sin() / z;
    let j1 = z.sin() / (z * z) - z.cos() / z;
    let scale = if n_max >= 1 && vals[1].norm() > vals[0].norm() {
        j1 / vals[1]
    } else {
        j0 / vals[0]
    };
    for v in vals.iter_mut() {
        *v *= scale;
    }
    vals
}

/// `h^(1)_0(z), ..., h^(1)_nmax(z)`. Errors on z = 0 (singular).
pub fn spherical_hankel_h1_all(n_max: usize, z: C64) -> Result<Vec<C64>> {
    if z.norm() == 0.0 {
        return Err(Error::invalid("hankel argument", "h_n^(1) is singular at z = 0"));
    }
    let i = C64::new(0.0, 1.0);
    let eiz = (i * z).exp();
    let mut h = vec![C64::new(0.0, 0.0); n_max + 1];
    h[0] = -i * eiz / z;
    if n_max >= 1 {
        h[1] = -eiz * (z + i) / (z * z);
    }
    for n in 1..n_max {
        h[n + 1] = (2.0 * n as f64 + 1.0) / z * h[n] - h[n - 1];
    }
    Ok(h)
}

pub fn spherical_bessel_j(n: usize, z: C64) -> C64 {
    spherical_bessel_j_all(n, z)[n]
}

pub fn spherical_hankel_h1(n: usize, z: C64) -> Result<C64> {
    Ok(spherical_hankel_h1_all(n, z)?[n])
}

/// Derivatives from the value table: `f'_n = f_{n-1} - (n+1)/z f_n`, `f'_0 = -f_1`.
///
/// `vals` must hold orders 0..=N with N >= 1; the result has the same length.
pub fn spherical_deriv(vals: &[C64], z: C64) -> Vec<C64> {
    assert!(vals.len() >= 2, "need at least orders 0 and 1 for derivatives");
    let mut out = Vec::with_capacity(vals.len());
    out.push(-vals[1]);
    for n in 1..vals.len() {
        out.push(vals[n - 1] - (n as f64 + 1.0) / z * vals[n]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Direct power series j_n(z) = z^n sum_k (-z^2/2)^k / (k! (2n+2k+1)!!).
    fn j_series(n: usize, z: C64) -> C64 {
        let mut dfact = 1.0; // (2n+1)!!
        for k in 0..=n {
            dfact *= (2 * k + 1) as f64;
        }
        let mut term = z.powu(n as u32) / dfact;
        let mut sum = term;
        for k in 1..200 {
            term *= -z * z / (2.0 * k as f64 * (2.0 * (n as f64 + k as f64) + 1.0));
            sum += term;
            if term.norm() < 1e-30 * sum.norm() {
                break;
            }
        }
        sum
    }

    #[test]
    fn j0_closed_form() {
        let z = c(1.0, 0.0);
        assert_relative_eq!(spherical_bessel_j(0, z).re, (1.0f64).sin(), epsilon = 1e-14);
        assert_relative_eq!(spherical_bessel_j(0, z).im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn jn_vanishes_at_zero() {
        assert_eq!(spherical_bessel_j(1, c(0.0, 0.0)).norm(), 0.0);
        assert_eq!(spherical_bessel_j(4, c(0.0, 0.0)).norm(), 0.0);
    }

    #[test]
    fn jn_matches_series_complex() {
        let z = c(2.0, 0.5);
        let got = spherical_bessel_j(5, z);
        let want = j_series(5, z);
        assert!((got - want).norm() / want.norm() < 1e-12);
        // small argument where downward recurrence really matters
        let z = c(0.05, -0.02);
        for n in [0usize, 3, 8] {
            let got = spherical_bessel_j(n, z);
            let want = j_series(n, z);
            assert!((got - want).norm() <= 1e-13 * want.norm().max(1e-300));
        }
    }

    #[test]
    fn h0_h1_closed_forms() {
        let z = c(1.0, 0.0);
        let h0 = spherical_hankel_h1(0, z).unwrap();
        assert_relative_eq!(h0.re, (1.0f64).sin(), epsilon = 1e-14);
        assert_relative_eq!(h0.im, -(1.0f64).cos(), epsilon = 1e-14);
        let h1 = spherical_hankel_h1(1, z).unwrap();
        let i = c(0.0, 1.0);
        let want = -(i * z).exp() * (z + i) / (z * z);
        assert!((h1 - want).norm() < 1e-14);
    }

    #[test]
    fn hankel_errors_at_origin() {
        assert!(spherical_hankel_h1(0, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn h4_recurrence_consistency() {
        // independent evaluation: recurrence seeded by the two closed forms
        let z = c(3.0, -0.2);
        let i = c(0.0, 1.0);
        let mut h0 = -i * (i * z).exp() / z;
        let mut h1 = -(i * z).exp() * (z + i) / (z * z);
        for n in 1..4 {
            let h2 = (2.0 * n as f64 + 1.0) / z * h1 - h0;
            h0 = h1;
            h1 = h2;
        }
        let got = spherical_hankel_h1(4, z).unwrap();
        assert!((got - h1).norm() / h1.norm() < 1e-12);
    }

    #[test]
    fn wronskian_identity_grid() {
        // j_n h'_n - j'_n h_n = i / z^2
        for &n_max in &[4usize, 12] {
            for &r in &[0.1f64, 0.7, 3.0, 20.0] {
                for &im in &[0.0f64, 0.3, -0.8] {
                    let z = c(r, im * r.min(2.0));
                    let j = spherical_bessel_j_all(n_max, z);
                    let h = spherical_hankel_h1_all(n_max, z).unwrap();
                    let jp = spherical_deriv(&j, z);
                    let hp = spherical_deriv(&h, z);
                    let want = c(0.0, 1.0) / (z * z);
                    for n in 0..=n_max {
                        let w = j[n] * hp[n] - jp[n] * h[n];
                        assert!(
                            (w - want).norm() < 1e-10 * want.norm(),
                            "wronskian failed n={n} z={z}"
                        );
                    }
                }
            }
        }
    }
}
