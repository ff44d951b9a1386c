//! The five computational subcommands.

pub mod capacitance;
pub mod dispersion;
pub mod foldy_compare;
pub mod resonances;
pub mod scatter;

use std::path::PathBuf;

use dimerwave::geom::{DimerGeometry, Vec3};
use dimerwave::layerpot::MediumParams;

use crate::config::{GeometryConfig, MediumConfig};
use crate::CliError;

/// Resolved output destination and plot switch.
pub struct OutContext {
    pub dir: PathBuf,
    pub svg: bool,
}

pub(crate) fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// The configured dimer with `d0` and `s` overridable by sweeps.
pub(crate) fn geometry_with(
    geometry: &GeometryConfig,
    d0: f64,
    s: f64,
) -> Result<DimerGeometry, CliError> {
    DimerGeometry::new(geometry.r0, d0, s, vec3(geometry.orientation), vec3(geometry.center))
        .map_err(CliError::from)
}

/// Medium exactly as configured.
pub(crate) fn medium_as_configured(medium: &MediumConfig) -> Result<MediumParams, CliError> {
    MediumParams::new(medium.rho, medium.kappa, medium.rho_b, medium.kappa_b)
        .map_err(CliError::from)
}

/// Medium with both bubble parameters rescaled to the given contrast.
pub(crate) fn medium_at_delta(medium: &MediumConfig, delta: f64) -> Result<MediumParams, CliError> {
    MediumParams::new(medium.rho, medium.kappa, delta * medium.rho, delta * medium.kappa)
        .map_err(CliError::from)
}

pub(crate) fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}
