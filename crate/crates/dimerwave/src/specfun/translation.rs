//! Translation (addition) theorems for spherical wave functions.
//!
//! Outgoing waves `O_n^m(x) = h_n(k|x|) Y_n^m(x̂)` and regular waves
//! `R_n^m(x) = j_n(k|x|) Y_n^m(x̂)` recentered by a displacement `t`:
//!
//! `W_n^m(x + t) = Σ_{νμ} A_{νμ,nm}(t) R_ν^μ(x)`
//!
//! valid for `|x| < |t|` when `W = O`, and everywhere when `W = R`.
//! The static counterpart recenters `Y_n^m(x̂)/|x|^{n+1}` onto solid
//! harmonics `|x|^ν Y_ν^μ(x̂)`.

use ndarray::Array2;

use crate::geom::Vec3;
use crate::specfun::{gaunt, sph_harm_row, spherical_bessel_j_all, spherical_hankel_h1_all};
use crate::{C64, Error, Result};

/// Which radial function the source expansion carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    /// `h_n` source: valid for targets strictly inside the shifted origin's distance.
    Outgoing,
    /// `j_n` source: valid everywhere.
    Regular,
}

/// Dense recentering matrix in the flat mode order `n² + n + m`.
pub struct TranslationMatrix {
    n_max: usize,
    entries: Array2<C64>,
}

impl TranslationMatrix {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Coefficient multiplying source mode `(n, m)` in target mode `(ν, μ)`.
    #[inline]
    pub fn entry(&self, nu: usize, mu: i32, n: usize, m: i32) -> C64 {
        let row = (nu * nu) as i32 + nu as i32 + mu;
        let col = (n * n) as i32 + n as i32 + m;
        self.entries[(row as usize, col as usize)]
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.entries
    }
}

fn direction_angles(t: Vec3) -> (f64, f64) {
    let r = t.norm();
    (t.z / r, t.y.atan2(t.x))
}

/// `i^p` for possibly negative integer `p`.
fn i_pow(p: i64) -> C64 {
    match p.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Helmholtz recentering matrix `A_{νμ,nm}(t)` at wavenumber `k`
/// for all degrees `<= n_max`.
pub fn build_translation_matrix(
    k: C64,
    displacement: Vec3,
    n_max: usize,
    kind: WaveKind,
) -> Result<TranslationMatrix> {
    if k.norm() == 0.0 {
        return Err(Error::invalid("wavenumber", "k = 0; use the static recentering"));
    }
    let dist = displacement.norm();
    let dim = (n_max + 1) * (n_max + 1);
    if dist == 0.0 {
        if kind == WaveKind::Outgoing {
            return Err(Error::invalid(
                "displacement",
                "outgoing recentering is singular at zero displacement",
            ));
        }
        return Ok(TranslationMatrix { n_max, entries: Array2::eye(dim) });
    }
    let q_max = 2 * n_max;
    let rad = match kind {
        WaveKind::Outgoing => spherical_hankel_h1_all(q_max, k * dist)?,
        WaveKind::Regular => spherical_bessel_j_all(q_max, k * dist),
    };
    let (ct, phi) = direction_angles(displacement);
    let harm = sph_harm_row(q_max, ct, phi);
    let mut entries = Array2::zeros((dim, dim));
    for nu in 0..=n_max {
        for mu in -(nu as i64)..=(nu as i64) {
            let row = ((nu * nu) as i64 + nu as i64 + mu) as usize;
            for n in 0..=n_max {
                for m in -(n as i64)..=(n as i64) {
                    let col = ((n * n) as i64 + n as i64 + m) as usize;
                    let dm = m - mu;
                    // coupling of Y_n^m with conj(Y_ν^μ) conj(Y_q^{m-μ});
                    // conjugation contributes the (-1)^m prefactor
                    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    let mut acc = C64::new(0.0, 0.0);
                    let q_lo =
                        (n as i64 - nu as i64).unsigned_abs().max(dm.unsigned_abs()) as usize;
                    for q in q_lo..=n + nu {
                        if (n + nu + q) % 2 != 0 {
                            continue;
                        }
                        let g = gaunt(n as i64, m, nu as i64, -mu, q as i64, -dm);
                        if g == 0.0 {
                            continue;
                        }
                        let y = harm[q * q + (q as i64 + dm) as usize];
                        acc += i_pow(nu as i64 - n as i64 + q as i64) * rad[q] * y * (sign * g);
                    }
                    entries[(row, col)] = 4.0 * std::f64::consts::PI * acc;
                }
            }
        }
    }
    Ok(TranslationMatrix { n_max, entries })
}

/// Static recentering matrix `B_{νμ,nm}(t)`: expands `Y_n^m(x̂+t̂)/|x+t|^{n+1}`
/// source harmonics into regular solid harmonics `|x|^ν Y_ν^μ(x̂)`.
pub fn build_static_translation(displacement: Vec3, n_max: usize) -> Result<TranslationMatrix> {
    let dist = displacement.norm();
    if dist == 0.0 {
        return Err(Error::invalid(
            "displacement",
            "static recentering is singular at zero displacement",
        ));
    }
    let (ct, phi) = direction_angles(displacement);
    let harm = sph_harm_row(2 * n_max, ct, phi);
    let dim = (n_max + 1) * (n_max + 1);
    let mut entries = Array2::zeros((dim, dim));
    for nu in 0..=n_max {
        for mu in -(nu as i64)..=(nu as i64) {
            let row = ((nu * nu) as i64 + nu as i64 + mu) as usize;
            for n in 0..=n_max {
                for m in -(n as i64)..=(n as i64) {
                    let col = ((n * n) as i64 + n as i64 + m) as usize;
                    let dm = m - mu;
                    // only q = n + ν survives the k -> 0 limit of the wave case
                    let q = n + nu;
                    if dm.unsigned_abs() as usize > q {
                        continue;
                    }
                    // (2n+2ν-1)!!/((2n-1)!!(2ν+1)!!)
                    let mut ratio = 1.0;
                    for j in n..n + nu {
                        ratio *= (2 * j + 1) as f64;
                    }
                    for j in 1..=nu {
                        ratio /= (2 * j + 1) as f64;
                    }
                    let g = gaunt(n as i64, m, nu as i64, -mu, q as i64, -dm);
                    if g == 0.0 {
                        continue;
                    }
                    let sign =
                        if (nu as i64 + m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    let y = harm[q * q + (q as i64 + dm) as usize];
                    entries[(row, col)] = 4.0 * std::f64::consts::PI
                        * (sign * ratio * g)
                        * y
                        * dist.powi(-(q as i32) - 1);
                }
            }
        }
    }
    Ok(TranslationMatrix { n_max, entries })
}
