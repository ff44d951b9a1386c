//! `foldy-compare`: multi-dimer point-interaction solve against the
//! homogenized volume-integral solve on shared probe points, one comparison
//! per configured dimer count.
//!
//! The dilution convention ties size to count: `s = lambda / N`, so the
//! monopole density `N * s` stays fixed while individual dimers shrink.
//! Contrast follows `delta = (mu s)^2`, which pins the resonances in place
//! across the sweep.

use std::time::Instant;

use dimerwave::foldy::{
    assemble_and_solve_foldy, compare_micro_macro, ensemble_coefficients,
    excluded_volume_fraction, lippmann_schwinger_solve, sample_ensemble, write_ensemble,
    ProbeGrid, VoxelGrid,
};
use dimerwave::geom::Vec3;
use dimerwave::homogenize::{
    effective_coefficients, ensemble_statistics, BoxRegion, DispersionModel,
};
use dimerwave::layerpot::{capacitance_numeric, dipole_coupling};
use dimerwave::resonance::{muller_resonances, unit_volume_shape};
use dimerwave::scatter::{DimerPointModel, IncidentWave};
use dimerwave::C64;

use crate::commands::{geometry_with, medium_at_delta, vec3, OutContext};
use crate::config::RunConfig;
use crate::csvout::{fmt, CsvFile};
use crate::CliError;

const SUMMARY_COLUMNS: [&str; 3] = ["n", "relative_l2_error", "excluded_volume_fraction"];
const PROBE_COLUMNS: [&str; 9] =
    ["n", "x", "y", "z", "re_micro", "im_micro", "re_macro", "im_macro", "abs_error"];

pub fn run(config: &RunConfig, out: &OutContext) -> Result<(), CliError> {
    let mut config = config.clone();
    let ensemble = config
        .ensemble
        .as_mut()
        .ok_or_else(|| CliError::Config("foldy-compare requires an [ensemble] section".into()))?;
    let seed = match ensemble.seed {
        Some(seed) => seed,
        None => {
            let seed: u64 = rand::random();
            eprintln!("seed {seed} (auto-generated; pass --seed to reproduce)");
            seed
        }
    };
    ensemble.seed = Some(seed);
    let ensemble = config.ensemble.clone().expect("just set");
    let mu = config
        .medium
        .mu
        .ok_or_else(|| CliError::Config("foldy-compare requires medium.mu".into()))?;
    let omega_re = config
        .sweep
        .omega
        .ok_or_else(|| CliError::Config("foldy-compare requires sweep.omega".into()))?;
    let omega = C64::new(omega_re, 0.0);

    let domain = BoxRegion::new(vec3(ensemble.domain))?;
    let grid = voxel_grid(&domain, config.numerics.grid_per_axis)?;
    let probes_per_axis = config.numerics.probes_per_axis;
    let echo = config.echo();

    // volume-normalized capacitances are shared by every count
    let shape = geometry_with(&config.geometry, config.geometry.d0, 1.0)?;
    let (reference, _) = unit_volume_shape(&shape);
    let n_max = config.numerics.n_max;
    let caps_reference = capacitance_numeric(&reference, n_max)?
        .with_dipole(dipole_coupling(&reference, n_max)?);

    let mut summary = CsvFile::create(
        &out.dir.join("foldy_compare.csv"),
        "foldy-compare",
        &echo,
        &SUMMARY_COLUMNS,
    )?;
    let mut probes_csv =
        CsvFile::create(&out.dir.join("foldy_probes.csv"), "foldy-compare", &echo, &PROBE_COLUMNS)?;

    for &n in &ensemble.counts {
        let started = Instant::now();
        let size = ensemble.lambda / n as f64;
        let delta = (mu * size) * (mu * size);
        let params = medium_at_delta(&config.medium, delta)?;
        let geom = geometry_with(&config.geometry, config.geometry.d0, size)?;

        let spec = sample_ensemble(
            domain,
            n,
            size,
            mu,
            ensemble.lambda,
            ensemble.eta,
            seed.wrapping_add(n as u64),
        )?;
        write_ensemble(&spec, Some(seed.wrapping_add(n as u64)), &out.dir.join(format!("ensemble_{n}.txt")))?;

        let caps = capacitance_numeric(&geom, n_max)?.with_dipole(dipole_coupling(&geom, n_max)?);
        let resonances = muller_resonances(&geom, &params, config.numerics.muller_n_max, None)?;
        let model = DimerPointModel::new(&geom, &params, &caps, &resonances)?;
        let wave = IncidentWave::new(vec3(config.sweep.direction), params.k(omega), C64::new(1.0, 0.0))?;

        let coefficients = ensemble_coefficients(&model, &spec, omega)?;
        let state = assemble_and_solve_foldy(&spec, &coefficients, &wave)?;
        let micro_elapsed = started.elapsed();

        // homogenized counterpart: size-normalized coupling constants, the
        // ensemble's own orientation moment, and dilution N * (size / r_hat)
        let macro_started = Instant::now();
        let (_, volume_scale) = unit_volume_shape(&geom);
        let dispersion = DispersionModel::new(&caps_reference, &resonances, delta, params.v_b())?;
        let (v_tilde, b_tilde) = ensemble_statistics(&spec);
        let medium = effective_coefficients(
            n as f64 * volume_scale,
            v_tilde,
            &b_tilde,
            dispersion.g0_at(omega)?,
            dispersion.g1_at(omega)?,
            omega,
            params.k(omega),
            None,
        );
        let macro_field = lippmann_schwinger_solve(&medium, &grid, &wave)?;
        let macro_elapsed = macro_started.elapsed();

        let probes = ProbeGrid::filtered(probe_lattice(&domain, probes_per_axis), &spec)?;
        let report = compare_micro_macro(&state, &macro_field, &probes);

        summary.row(&[
            n.to_string(),
            fmt(report.relative_l2),
            fmt(excluded_volume_fraction(&spec)),
        ])?;
        for row in &report.rows {
            probes_csv.row(&[
                n.to_string(),
                fmt(row.point.x),
                fmt(row.point.y),
                fmt(row.point.z),
                fmt(row.micro_value.re),
                fmt(row.micro_value.im),
                fmt(row.macro_value.re),
                fmt(row.macro_value.im),
                fmt((row.micro_value - row.macro_value).norm()),
            ])?;
        }
        eprintln!(
            "N = {n}: micro {:.2}s, macro {:.2}s, relative L2 {:.4}",
            micro_elapsed.as_secs_f64(),
            macro_elapsed.as_secs_f64(),
            report.relative_l2
        );
    }

    summary.finish()?;
    probes_csv.finish()
}

/// Cubic-cell grid covering the box, sized from the shortest axis.
fn voxel_grid(domain: &BoxRegion, per_shortest_axis: usize) -> Result<VoxelGrid, CliError> {
    let lengths = domain.lengths();
    let shortest = lengths.x.min(lengths.y).min(lengths.z);
    let spacing = shortest / per_shortest_axis as f64;
    let mut per_axis = [0usize; 3];
    for (i, len) in [lengths.x, lengths.y, lengths.z].into_iter().enumerate() {
        let cells = len / spacing;
        if (cells - cells.round()).abs() > 1e-9 * cells {
            return Err(CliError::Config(format!(
                "ensemble.domain axes must be integer multiples of the voxel spacing; \
                 axis {i} needs {cells} cells"
            )));
        }
        per_axis[i] = cells.round() as usize;
    }
    VoxelGrid::new(*domain, per_axis).map_err(CliError::from)
}

/// Interior lattice of candidate probe points.
fn probe_lattice(domain: &BoxRegion, per_axis: usize) -> Vec<Vec3> {
    let lengths = domain.lengths();
    let mut points = Vec::with_capacity(per_axis * per_axis * per_axis);
    let fraction = |i: usize| (i + 1) as f64 / (per_axis + 1) as f64;
    for ix in 0..per_axis {
        for iy in 0..per_axis {
            for iz in 0..per_axis {
                points.push(Vec3::new(
                    fraction(ix) * lengths.x,
                    fraction(iy) * lengths.y,
                    fraction(iz) * lengths.z,
                ));
            }
        }
    }
    points
}
