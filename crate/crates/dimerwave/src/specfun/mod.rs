//! Special functions and spherical-wave translation machinery.
//!
//! Everything here is pure and deterministic: spherical Bessel/Hankel
//! functions of complex argument, orthonormal associated Legendre functions
//! and spherical harmonics, Wigner 3j/Gaunt coefficients, and the addition
//! theorems that re-expand outgoing or regular waves about a shifted center.

mod bessel;
mod legendre;
mod translation;
mod wigner;

pub use bessel::{
    spherical_bessel_j, spherical_bessel_j_all, spherical_deriv, spherical_hankel_h1,
    spherical_hankel_h1_all,
};
pub use legendre::{
    assoc_legendre, assoc_legendre_table, legendre_p_all, sph_harm, sph_harm_row,
    AssocLegendreTable,
};
pub use translation::{
    build_static_translation, build_translation_matrix, TranslationMatrix, WaveKind,
};
pub use wigner::{gaunt, wigner_3j};
