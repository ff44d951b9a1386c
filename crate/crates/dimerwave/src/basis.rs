//! Multipole indexing for densities on collections of sphere boundaries.
//!
//! A density on sphere `j` is expanded in orthonormal spherical harmonics of
//! the local direction, `φ|_{∂D_j} = Σ_{nm} c_{j,nm} Y_n^m`. Coefficients are
//! stored flat: sphere-major, modes in the order `n² + n + m`.

use ndarray::Array1;

use crate::C64;

/// One spherical-harmonic mode `(n, m)` with `|m| <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphericalWaveIndex {
    pub n: usize,
    pub m: i32,
}

impl SphericalWaveIndex {
    pub fn new(n: usize, m: i32) -> Self {
        debug_assert!(m.unsigned_abs() as usize <= n);
        Self { n, m }
    }

    /// Position in the per-sphere mode block.
    #[inline]
    pub fn flat(self) -> usize {
        ((self.n * self.n) as i32 + self.n as i32 + self.m) as usize
    }
}

/// Truncated multipole basis over `n_spheres` boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultipoleBasis {
    pub n_spheres: usize,
    pub n_max: usize,
}

impl MultipoleBasis {
    pub fn new(n_spheres: usize, n_max: usize) -> Self {
        Self { n_spheres, n_max }
    }

    /// Modes per sphere: `(n_max + 1)²`.
    #[inline]
    pub fn per_sphere(&self) -> usize {
        (self.n_max + 1) * (self.n_max + 1)
    }

    /// Total coefficient count.
    #[inline]
    pub fn len(&self) -> usize {
        self.n_spheres * self.per_sphere()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat position of mode `idx` on sphere `sphere`.
    #[inline]
    pub fn index(&self, sphere: usize, idx: SphericalWaveIndex) -> usize {
        debug_assert!(sphere < self.n_spheres && idx.n <= self.n_max);
        sphere * self.per_sphere() + idx.flat()
    }

    /// All modes of one sphere in flat order.
    pub fn modes(&self) -> impl Iterator<Item = SphericalWaveIndex> {
        let n_max = self.n_max;
        (0..=n_max).flat_map(|n| (-(n as i32)..=n as i32).map(move |m| SphericalWaveIndex { n, m }))
    }
}

/// Coefficients of a surface density over a [`MultipoleBasis`].
#[derive(Debug, Clone)]
pub struct SurfaceDensity {
    pub basis: MultipoleBasis,
    pub coeffs: Array1<C64>,
}

impl SurfaceDensity {
    pub fn zeros(basis: MultipoleBasis) -> Self {
        Self { basis, coeffs: Array1::zeros(basis.len()) }
    }

    pub fn from_coeffs(basis: MultipoleBasis, coeffs: Array1<C64>) -> Self {
        assert_eq!(coeffs.len(), basis.len());
        Self { basis, coeffs }
    }

    #[inline]
    pub fn get(&self, sphere: usize, idx: SphericalWaveIndex) -> C64 {
        self.coeffs[self.basis.index(sphere, idx)]
    }

    #[inline]
    pub fn set(&mut self, sphere: usize, idx: SphericalWaveIndex, value: C64) {
        self.coeffs[self.basis.index(sphere, idx)] = value;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_order_is_contiguous() {
        let basis = MultipoleBasis::new(2, 3);
        let mut seen = Vec::new();
        for idx in basis.modes() {
            seen.push(idx.flat());
        }
        let want: Vec<usize> = (0..basis.per_sphere()).collect();
        assert_eq!(seen, want);
        assert_eq!(basis.len(), 2 * 16);
        assert_eq!(basis.index(1, SphericalWaveIndex::new(0, 0)), 16);
        assert_eq!(basis.index(1, SphericalWaveIndex::new(2, -2)), 16 + 4);
    }
}
