//! Gauss-Legendre quadrature and product rules on the unit sphere.

use crate::geom::Vec3;

/// Nodes and weights of an n-point rule on `[-1, 1]`.
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// n-point Gauss-Legendre rule, exact for polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> GaussLegendre {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    // Newton iteration on P_n from the Chebyshev-like initial guess
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 1..n {
                let jf = j as f64;
                let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussLegendre { nodes, weights }
}

/// n-point Gauss-Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_01(n: usize) -> GaussLegendre {
    let mut rule = gauss_legendre(n);
    for (x, w) in rule.nodes.iter_mut().zip(rule.weights.iter_mut()) {
        *x = 0.5 * (*x + 1.0);
        *w *= 0.5;
    }
    rule
}

/// Product quadrature on the unit sphere: Gauss-Legendre in the polar
/// cosine, uniform trapezoid in azimuth. Weights sum to 4π; exact for
/// spherical harmonics with degree `< n_polar` and order `< n_azimuth/2`.
pub struct SphereRule {
    pub dirs: Vec<Vec3>,
    pub weights: Vec<f64>,
}

pub fn sphere_rule(n_polar: usize, n_azimuth: usize) -> SphereRule {
    let gl = gauss_legendre(n_polar);
    let mut dirs = Vec::with_capacity(n_polar * n_azimuth);
    let mut weights = Vec::with_capacity(n_polar * n_azimuth);
    let wp = 2.0 * std::f64::consts::PI / n_azimuth as f64;
    for (ct, wt) in gl.nodes.iter().zip(&gl.weights) {
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        for p in 0..n_azimuth {
            let phi = 2.0 * std::f64::consts::PI * p as f64 / n_azimuth as f64;
            dirs.push(Vec3::new(st * phi.cos(), st * phi.sin(), *ct));
            weights.push(wt * wp);
        }
    }
    SphereRule { dirs, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn low_order_rules_match_closed_forms() {
        let r1 = gauss_legendre(1);
        assert_relative_eq!(r1.nodes[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(r1.weights[0], 2.0, epsilon = 1e-15);
        let r2 = gauss_legendre(2);
        assert_relative_eq!(r2.nodes[1], 1.0 / 3.0_f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(r2.weights[0], 1.0, epsilon = 1e-15);
        let r3 = gauss_legendre(3);
        assert_relative_eq!(r3.nodes[2], (3.0_f64 / 5.0).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(r3.weights[1], 8.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn integrates_monomials_exactly() {
        for n in [4usize, 9, 16, 40] {
            let rule = gauss_legendre(n);
            for p in 0..2 * n {
                let got: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(p as i32))
                    .sum();
                let want = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
                assert!((got - want).abs() < 1e-13, "n = {n}, x^{p}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn unit_interval_rule() {
        let rule = gauss_legendre_01(12);
        let got: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(7))
            .sum();
        assert_relative_eq!(got, 0.125, epsilon = 1e-14);
    }

    #[test]
    fn sphere_rule_moments() {
        let rule = sphere_rule(6, 12);
        let total: f64 = rule.weights.iter().sum();
        assert_relative_eq!(total, 4.0 * PI, epsilon = 1e-12);
        // odd moments vanish, second moments are 4π/3
        let mut first = Vec3::zeros();
        let mut second = 0.0;
        for (d, w) in rule.dirs.iter().zip(&rule.weights) {
            first += *w * *d;
            second += w * d.x * d.x;
        }
        assert!(first.norm() < 1e-13);
        assert_relative_eq!(second, 4.0 * PI / 3.0, epsilon = 1e-12);
    }
}
