//! `scatter`: point-approximation far field against the full boundary solve
//! on a ring of evaluation points, over a size sweep at fixed `mu`.

use dimerwave::geom::Vec3;
use dimerwave::layerpot::{capacitance_numeric, dipole_coupling, MediumParams};
use dimerwave::resonance::muller_resonances;
use dimerwave::scatter::{
    point_scattered_field, scattering_coefficients, ClusterScattering, IncidentWave,
};
use dimerwave::C64;

use crate::commands::{
    fit_slope, geometry_with, medium_as_configured, medium_at_delta, vec3, OutContext,
};
use crate::config::RunConfig;
use crate::csvout::{fmt, CsvFile};
use crate::CliError;

const COLUMNS: [&str; 7] =
    ["s", "angle_deg", "re_full", "im_full", "re_point", "im_point", "rel_error"];

pub fn run(config: &RunConfig, out: &OutContext) -> Result<(), CliError> {
    let geometry = &config.geometry;
    let sizes = geometry.s_sweep.clone().unwrap_or_else(|| vec![geometry.s]);
    let omega_re = config
        .sweep
        .omega
        .ok_or_else(|| CliError::Config("scatter requires sweep.omega".into()))?;
    let omega = C64::new(omega_re, 0.0);
    let matched = config.medium.rho_b == config.medium.rho
        && config.medium.kappa_b == config.medium.kappa
        && config.medium.mu.is_none();
    if sizes.len() > 1 && config.medium.mu.is_none() && !matched {
        return Err(CliError::Config(
            "scatter with geometry.s_sweep requires medium.mu (contrast delta = (mu s)^2)".into(),
        ));
    }
    let n_max = config.numerics.n_max;
    let angles = config.sweep.angles;

    let path = out.dir.join("scatter.csv");
    let mut csv = CsvFile::create(&path, "scatter", &config.echo(), &COLUMNS)?;
    if matched {
        csv.comment("degenerate: matched medium scatters nothing; absolute residuals reported")?;
    }

    let mut log_sizes = Vec::new();
    let mut log_errors = Vec::new();
    for &s in &sizes {
        let geom = geometry_with(geometry, geometry.d0, s)?;
        let params = match config.medium.mu {
            Some(mu) => medium_at_delta(&config.medium, (mu * s) * (mu * s))?,
            None => medium_as_configured(&config.medium)?,
        };
        let wave = IncidentWave::new(vec3(config.sweep.direction), params.k(omega), C64::new(1.0, 0.0))?;
        let full = ClusterScattering::solve_dimer(&geom, &params, &wave, n_max)?;
        let point = if matched {
            None
        } else {
            let caps =
                capacitance_numeric(&geom, n_max)?.with_dipole(dipole_coupling(&geom, n_max)?);
            let resonances = muller_resonances(&geom, &params, config.numerics.muller_n_max, None)?;
            Some(scattering_coefficients(&geom, &params, &caps, &resonances, omega)?)
        };

        let mut gap_sq = 0.0;
        let mut full_sq = 0.0;
        for (angle_deg, x) in ring_points(&geom, &params, config.sweep.ring_diameters, angles) {
            let full_value = full.scattered_at(x)?;
            let point_value = match &point {
                Some(coeffs) => point_scattered_field(coeffs, &wave, x),
                None => C64::new(0.0, 0.0),
            };
            let gap = (point_value - full_value).norm();
            let rel = if matched { gap } else { gap / full_value.norm() };
            gap_sq += gap * gap;
            full_sq += full_value.norm_sqr();
            csv.row(&[
                fmt(s),
                fmt(angle_deg),
                fmt(full_value.re),
                fmt(full_value.im),
                fmt(point_value.re),
                fmt(point_value.im),
                fmt(rel),
            ])?;
        }
        if !matched {
            log_sizes.push(s.ln());
            log_errors.push((gap_sq / full_sq).sqrt().max(f64::MIN_POSITIVE).ln());
        }
    }

    if log_sizes.len() >= 2 {
        csv.comment(&format!(
            "error_slope_vs_s = {}",
            fmt(fit_slope(&log_sizes, &log_errors))
        ))?;
    }
    csv.finish()
}

/// Evaluation ring in the plane spanned by the dimer axis and a transverse
/// direction, at the configured multiple of the tip-to-tip extent.
fn ring_points(
    geom: &dimerwave::geom::DimerGeometry,
    params: &MediumParams,
    ring_diameters: f64,
    angles: usize,
) -> Vec<(f64, Vec3)> {
    let _ = params;
    let extent = geom.scale * (geom.d0 + 4.0 * geom.r0);
    let radius = ring_diameters * extent;
    let axis = geom.orientation.normalize();
    let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let transverse = (helper - axis * helper.dot(&axis)).normalize();
    (0..angles)
        .map(|i| {
            let theta = std::f64::consts::TAU * i as f64 / angles as f64;
            let x = geom.center + radius * (theta.cos() * axis + theta.sin() * transverse);
            (theta.to_degrees(), x)
        })
        .collect()
}
