//! Orthonormal associated Legendre functions and spherical harmonics.
//!
//! Normalization: `Y_n^m(θ, φ) = P̄_n^m(cos θ) e^{imφ}` with
//! `∫_{S²} Y_n^m conj(Y_ν^μ) dΩ = δ_{nν} δ_{mμ}`. The Condon-Shortley phase
//! `(-1)^m` is folded into `P̄_n^m`. Negative orders follow from
//! `Y_n^{-m} = (-1)^m conj(Y_n^m)`.

use crate::{C64, Error, Result};

/// Triangular table of `P̄_n^m(x)` for `0 <= m <= n <= n_max`.
pub struct AssocLegendreTable {
    n_max: usize,
    vals: Vec<f64>,
}

impl AssocLegendreTable {
    #[inline]
    fn idx(n: usize, m: usize) -> usize {
        n * (n + 1) / 2 + m
    }

    #[inline]
    pub fn get(&self, n: usize, m: usize) -> f64 {
        debug_assert!(m <= n && n <= self.n_max);
        self.vals[Self::idx(n, m)]
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }
}

/// Build `P̄_n^m(x)` for all `0 <= m <= n <= n_max` by stable recurrences.
pub fn assoc_legendre_table(n_max: usize, x: f64) -> AssocLegendreTable {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let len = (n_max + 1) * (n_max + 2) / 2;
    let mut vals = vec![0.0; len];
    let idx = AssocLegendreTable::idx;
    // diagonal: P̄_0^0 = 1/sqrt(4π), P̄_m^m = -sqrt((2m+1)/(2m)) s P̄_{m-1}^{m-1}
    vals[idx(0, 0)] = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
    for m in 1..=n_max {
        let f = ((2.0 * m as f64 + 1.0) / (2.0 * m as f64)).sqrt();
        vals[idx(m, m)] = -f * s * vals[idx(m - 1, m - 1)];
    }
    // first superdiagonal: P̄_{m+1}^m = sqrt(2m+3) x P̄_m^m
    for m in 0..n_max {
        vals[idx(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * vals[idx(m, m)];
    }
    // general: P̄_n^m = a (x P̄_{n-1}^m - b P̄_{n-2}^m)
    for m in 0..=n_max {
        for n in (m + 2)..=n_max {
            let nf = n as f64;
            let mf = m as f64;
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((nf - 1.0) * (nf - 1.0) - mf * mf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0))
                .sqrt();
            vals[idx(n, m)] = a * (x * vals[idx(n - 1, m)] - b * vals[idx(n - 2, m)]);
        }
    }
    AssocLegendreTable { n_max, vals }
}

/// `P̄_n^m(x)` in the orthonormal spherical-harmonic convention.
/// Errors when |x| > 1 (outside the Legendre domain) or m > n.
pub fn assoc_legendre(n: usize, m: usize, x: f64) -> Result<f64> {
    if m > n {
        return Err(Error::invalid("legendre order", format!("m = {m} exceeds degree n = {n}")));
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::invalid("legendre argument", format!("|x| > 1 (x = {x})")));
    }
    Ok(assoc_legendre_table(n, x).get(n, m))
}

/// Unnormalized Legendre polynomials `P_0(x), ..., P_nmax(x)`.
pub fn legendre_p_all(n_max: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n_max + 1];
    p[0] = 1.0;
    if n_max >= 1 {
        p[1] = x;
    }
    for n in 1..n_max {
        p[n + 1] = ((2 * n + 1) as f64 * x * p[n] - n as f64 * p[n - 1]) / (n + 1) as f64;
    }
    p
}

/// `Y_n^m` at the direction with polar cosine `cos_theta` and azimuth `phi`.
pub fn sph_harm(n: usize, m: i32, cos_theta: f64, phi: f64) -> C64 {
    let ma = m.unsigned_abs() as usize;
    let p = assoc_legendre_table(n, cos_theta).get(n, ma);
    let e = C64::from_polar(1.0, ma as f64 * phi);
    if m >= 0 {
        p * e
    } else {
        // Y_n^{-m} = (-1)^m conj(Y_n^m)
        let sign = if ma % 2 == 0 { 1.0 } else { -1.0 };
        sign * p * e.conj()
    }
}

/// All `Y_n^m` for `n <= n_max` in flat order `n² + n + m`.
pub fn sph_harm_row(n_max: usize, cos_theta: f64, phi: f64) -> Vec<C64> {
    let table = assoc_legendre_table(n_max, cos_theta);
    let mut out = vec![C64::new(0.0, 0.0); (n_max + 1) * (n_max + 1)];
    for n in 0..=n_max {
        for m in 0..=n as i32 {
            let p = table.get(n, m as usize);
            let e = C64::from_polar(1.0, m as f64 * phi);
            let pos = p * e;
            out[n * n + n + m as usize] = pos;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[n * n + n - m as usize] = sign * pos.conj();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn constant_mode_value() {
        let got = assoc_legendre(0, 0, 0.3).unwrap();
        assert_relative_eq!(got, 1.0 / (4.0 * PI).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn degree_one_proportional_to_x() {
        for &x in &[-0.9, -0.2, 0.5, 1.0] {
            let got = assoc_legendre(1, 0, x).unwrap();
            assert_relative_eq!(got, (3.0 / (4.0 * PI)).sqrt() * x, epsilon = 1e-14);
        }
    }

    #[test]
    fn explicit_polynomial_n3_m2() {
        // P_3^2(x) = 15 x (1-x²) with Condon-Shortley sign (+) for even m;
        // normalization sqrt((2n+1)(n-m)!/(4π (n+m)!)) = sqrt(7/(480π))
        let x = 0.5;
        let want = (7.0 / (480.0 * PI)).sqrt() * 15.0 * x * (1.0 - x * x);
        assert_relative_eq!(assoc_legendre(3, 2, x).unwrap(), want, epsilon = 1e-13);
    }

    #[test]
    fn domain_errors() {
        assert!(assoc_legendre(2, 0, 1.2).is_err());
        assert!(assoc_legendre(2, 3, 0.0).is_err());
    }

    #[test]
    fn orthonormal_on_sphere() {
        // Gauss-Legendre in cosθ integrates the products exactly
        let n_max = 5;
        let gl = gauss_legendre(16);
        let n_phi = 24;
        let mut gram = vec![vec![C64::new(0.0, 0.0); 36]; 36];
        for (q, &ct) in gl.nodes.iter().enumerate() {
            for p in 0..n_phi {
                let phi = 2.0 * PI * p as f64 / n_phi as f64;
                let w = gl.weights[q] * 2.0 * PI / n_phi as f64;
                let row = sph_harm_row(n_max, ct, phi);
                for a in 0..36 {
                    for b in 0..36 {
                        gram[a][b] += w * row[a] * row[b].conj();
                    }
                }
            }
        }
        for a in 0..36 {
            for b in 0..36 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (gram[a][b] - want).norm() < 1e-12,
                    "gram[{a}][{b}] = {}",
                    gram[a][b]
                );
            }
        }
    }

    #[test]
    fn negative_order_conjugation() {
        let (ct, phi) = (0.3, 1.1);
        for n in 0..5 {
            for m in 1..=n as i32 {
                let plus = sph_harm(n, m, ct, phi);
                let minus = sph_harm(n, -m, ct, phi);
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                assert!((minus - sign * plus.conj()).norm() < 1e-14);
            }
        }
    }
}
