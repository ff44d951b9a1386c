//! `dispersion`: effective ρ, κ, and refractive index over a frequency grid,
//! with the double-negative windows called out and optionally plotted.

use dimerwave::homogenize::{
    dispersion_sweep, isotropic_orientation_moment, BoxRegion, DispersionModel, DispersionPoint,
    OrientationMoment, Regime,
};
use dimerwave::layerpot::{capacitance_numeric, dipole_coupling};
use dimerwave::resonance::{muller_resonances, unit_volume_shape};
use dimerwave::C64;

use crate::commands::{geometry_with, medium_as_configured, vec3, OutContext};
use crate::config::{MomentConvention, RunConfig};
use crate::csvout::{fmt, CsvFile};
use crate::svg::{document, Panel, Series};
use crate::CliError;

const COLUMNS: [&str; 8] = [
    "omega",
    "re_rho_eff",
    "im_rho_eff",
    "re_kappa_eff",
    "im_kappa_eff",
    "re_n_eff",
    "im_n_eff",
    "regime",
];

pub fn run(config: &RunConfig, out: &OutContext) -> Result<(), CliError> {
    let ensemble = config.ensemble.as_ref().ok_or_else(|| {
        CliError::Config("dispersion requires an [ensemble] section (domain, lambda)".into())
    })?;
    let (lo, hi, steps) = match (config.sweep.omega_min, config.sweep.omega_max, config.sweep.steps)
    {
        (Some(lo), Some(hi), Some(steps)) if lo < hi => (lo, hi, steps),
        _ => {
            return Err(CliError::Config(
                "dispersion requires sweep.omega_min < sweep.omega_max and sweep.steps".into(),
            ))
        }
    };

    let geom = geometry_with(&config.geometry, config.geometry.d0, config.geometry.s)?;
    let params = medium_as_configured(&config.medium)?;
    let (reference, _) = unit_volume_shape(&geom);
    let n_max = config.numerics.n_max;
    let caps = capacitance_numeric(&reference, n_max)?
        .with_dipole(dipole_coupling(&reference, n_max)?);
    let guesses = match (config.numerics.muller_guess1, config.numerics.muller_guess2) {
        (Some(a), Some(b)) => Some([C64::new(a[0], a[1]), C64::new(b[0], b[1])]),
        _ => None,
    };
    let resonances = muller_resonances(&geom, &params, config.numerics.muller_n_max, guesses)?;
    let model = DispersionModel::new(&caps, &resonances, params.delta(), params.v_b())?;

    let domain = BoxRegion::new(vec3(ensemble.domain))?;
    let convention = match ensemble.orientation_moment {
        MomentConvention::Half => OrientationMoment::Half,
        MomentConvention::Third => OrientationMoment::Third,
    };
    let b_tilde = isotropic_orientation_moment(domain.volume(), convention);
    let v_tilde = 1.0 / domain.volume();
    let grid: Vec<f64> =
        (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect();
    let sweep = dispersion_sweep(&model, ensemble.lambda, v_tilde, &b_tilde, params.v(), &grid)?;

    let path = out.dir.join("dispersion.csv");
    let mut csv = CsvFile::create(&path, "dispersion", &config.echo(), &COLUMNS)?;
    for point in &sweep {
        let m = &point.medium;
        csv.row(&[
            fmt(point.omega),
            fmt(m.rho_eff.re),
            fmt(m.rho_eff.im),
            fmt(m.kappa_eff.re),
            fmt(m.kappa_eff.im),
            fmt(m.n_eff.re),
            fmt(m.n_eff.im),
            m.regime.label().to_string(),
        ])?;
    }
    csv.finish()?;

    if out.svg {
        let svg_path = out.dir.join("dispersion.svg");
        std::fs::write(&svg_path, render_svg(&sweep))
            .map_err(|e| CliError::Numeric(format!("write {}: {e}", svg_path.display())))?;
    }
    Ok(())
}

/// Contiguous frequency bands where both effective parameters are negative.
fn negative_bands(sweep: &[DispersionPoint]) -> Vec<(f64, f64)> {
    let mut bands = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    for point in sweep {
        if point.medium.regime == Regime::DoubleNegative {
            open = match open {
                Some((lo, _)) => Some((lo, point.omega)),
                None => Some((point.omega, point.omega)),
            };
        } else if let Some(band) = open.take() {
            bands.push(band);
        }
    }
    if let Some(band) = open {
        bands.push(band);
    }
    bands
}

fn render_svg(sweep: &[DispersionPoint]) -> String {
    let bands = negative_bands(sweep);
    let collect = |f: fn(&DispersionPoint) -> f64| -> Vec<(f64, f64)> {
        sweep.iter().map(|p| (p.omega, f(p))).collect()
    };
    let panel = |title: &str, y_label: &str, re: Vec<(f64, f64)>, im: Vec<(f64, f64)>| Panel {
        title: title.into(),
        x_label: "omega".into(),
        y_label: y_label.into(),
        series: vec![
            Series { label: "re".into(), color: "#1f77b4", points: re },
            Series { label: "im".into(), color: "#d62728", points: im },
        ],
        bands: bands.clone(),
    };
    document(&[
        panel(
            "effective density",
            "rho_eff",
            collect(|p| p.medium.rho_eff.re),
            collect(|p| p.medium.rho_eff.im),
        ),
        panel(
            "effective bulk modulus",
            "kappa_eff",
            collect(|p| p.medium.kappa_eff.re),
            collect(|p| p.medium.kappa_eff.im),
        ),
        panel(
            "refractive index",
            "n_eff",
            collect(|p| p.medium.n_eff.re),
            collect(|p| p.medium.n_eff.im),
        ),
    ])
}
