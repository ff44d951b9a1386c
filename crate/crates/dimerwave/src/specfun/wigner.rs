//! Wigner 3j symbols and Gaunt coefficients for integer angular momenta.

use std::sync::OnceLock;

const LN_FACT_LEN: usize = 512;

fn ln_fact(n: i64) -> f64 {
    debug_assert!(n >= 0 && (n as usize) < LN_FACT_LEN);
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; LN_FACT_LEN];
        for k in 2..LN_FACT_LEN {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    });
    table[n as usize]
}

/// Wigner 3j symbol `(j1 j2 j3 / m1 m2 m3)` for integer arguments.
/// Returns 0 when a selection rule fails (m-sum, triangle, |m| <= j).
pub fn wigner_3j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 {
        return 0.0;
    }
    if j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    // Racah's single-sum formula, evaluated through log-factorials
    let ln_delta = 0.5
        * (ln_fact(j1 + j2 - j3) + ln_fact(j1 - j2 + j3) + ln_fact(-j1 + j2 + j3)
            - ln_fact(j1 + j2 + j3 + 1));
    let ln_pref = 0.5
        * (ln_fact(j1 + m1)
            + ln_fact(j1 - m1)
            + ln_fact(j2 + m2)
            + ln_fact(j2 - m2)
            + ln_fact(j3 + m3)
            + ln_fact(j3 - m3));
    let t_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let t_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for t in t_min..=t_max {
        let ln_den = ln_fact(t)
            + ln_fact(j3 - j2 + t + m1)
            + ln_fact(j3 - j1 + t - m2)
            + ln_fact(j1 + j2 - j3 - t)
            + ln_fact(j1 - t - m1)
            + ln_fact(j2 - t + m2);
        let term = (ln_delta + ln_pref - ln_den).exp();
        sum += if t % 2 == 0 { term } else { -term };
    }
    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * sum
}

/// Gaunt coefficient `∫_{S²} Y_{l1}^{m1} Y_{l2}^{m2} Y_{l3}^{m3} dΩ`
/// in the orthonormal convention with Condon-Shortley phase.
pub fn gaunt(l1: i64, m1: i64, l2: i64, m2: i64, l3: i64, m3: i64) -> f64 {
    let pref = ((2 * l1 + 1) as f64 * (2 * l2 + 1) as f64 * (2 * l3 + 1) as f64
        / (4.0 * std::f64::consts::PI))
        .sqrt();
    pref * wigner_3j(l1, l2, l3, 0, 0, 0) * wigner_3j(l1, l2, l3, m1, m2, m3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre;
    use crate::specfun::sph_harm;
    use crate::C64;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn known_closed_forms() {
        assert_relative_eq!(wigner_3j(1, 1, 2, 0, 0, 0), (2.0_f64 / 15.0).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(wigner_3j(2, 2, 2, 0, 0, 0), -(2.0_f64 / 35.0).sqrt(), epsilon = 1e-14);
        // (j j 0 / m -m 0) = (-1)^{j-m} / sqrt(2j+1)
        assert_relative_eq!(wigner_3j(1, 1, 0, 1, -1, 0), 1.0 / 3.0_f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(wigner_3j(3, 3, 0, 2, -2, 0), -1.0 / 7.0_f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn selection_rules_give_zero() {
        assert_eq!(wigner_3j(1, 1, 1, 0, 0, 0), 0.0); // odd parity
        assert_eq!(wigner_3j(1, 1, 3, 0, 0, 0), 0.0); // triangle
        assert_eq!(wigner_3j(2, 2, 2, 1, 1, 1), 0.0); // m-sum
        assert_eq!(wigner_3j(2, 2, 2, 3, -3, 0), 0.0); // |m| > j
    }

    #[test]
    fn permutation_symmetry() {
        let (j1, j2, j3, m1, m2, m3) = (3i64, 2i64, 4i64, 1i64, -2i64, 1i64);
        let base = wigner_3j(j1, j2, j3, m1, m2, m3);
        // cyclic permutations leave the symbol unchanged
        assert_relative_eq!(wigner_3j(j2, j3, j1, m2, m3, m1), base, epsilon = 1e-14);
        assert_relative_eq!(wigner_3j(j3, j1, j2, m3, m1, m2), base, epsilon = 1e-14);
        // a swap multiplies by (-1)^{j1+j2+j3}
        let sign = if (j1 + j2 + j3) % 2 == 0 { 1.0 } else { -1.0 };
        assert_relative_eq!(wigner_3j(j2, j1, j3, m2, m1, m3), sign * base, epsilon = 1e-14);
    }

    /// Quadrature oracle: integrate the triple product over the sphere.
    fn gaunt_quadrature(l1: i64, m1: i64, l2: i64, m2: i64, l3: i64, m3: i64) -> f64 {
        let gl = gauss_legendre(24);
        let n_phi = 48;
        let mut acc = C64::new(0.0, 0.0);
        for (q, &ct) in gl.nodes.iter().enumerate() {
            for p in 0..n_phi {
                let phi = 2.0 * PI * p as f64 / n_phi as f64;
                let w = gl.weights[q] * 2.0 * PI / n_phi as f64;
                acc += w
                    * sph_harm(l1 as usize, m1 as i32, ct, phi)
                    * sph_harm(l2 as usize, m2 as i32, ct, phi)
                    * sph_harm(l3 as usize, m3 as i32, ct, phi);
            }
        }
        assert!(acc.im.abs() < 1e-13);
        acc.re
    }

    #[test]
    fn gaunt_matches_sphere_quadrature() {
        let cases = [
            (0, 0, 1, 0, 1, 0),
            (1, 1, 1, -1, 2, 0),
            (2, 1, 3, -2, 5, 1),
            (4, 2, 4, -2, 2, 0),
            (3, 0, 3, 0, 4, 0),
        ];
        for &(l1, m1, l2, m2, l3, m3) in &cases {
            let want = gaunt_quadrature(l1, m1, l2, m2, l3, m3);
            let got = gaunt(l1, m1, l2, m2, l3, m3);
            assert!(
                (got - want).abs() < 1e-12,
                "gaunt({l1},{m1};{l2},{m2};{l3},{m3}) = {got}, quadrature {want}"
            );
        }
    }
}
