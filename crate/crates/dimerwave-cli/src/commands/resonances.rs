//! `resonances`: the hybridized pair by all three routes over a contrast
//! sweep, with per-row failure marking and a log-log gap summary.

use dimerwave::layerpot::{capacitance_numeric, dipole_coupling, MediumParams};
use dimerwave::resonance::{
    anti_resonance_corrections, asymptotic_resonances, muller_resonances,
    quasi_static_system_roots, unit_volume_shape, ResonancePair,
};
use dimerwave::C64;

use crate::commands::{fit_slope, geometry_with, medium_as_configured, medium_at_delta, OutContext};
use crate::config::RunConfig;
use crate::csvout::{fmt, CsvFile};
use crate::CliError;

const COLUMNS: [&str; 10] = [
    "delta",
    "method",
    "re_omega1",
    "im_omega1",
    "re_omega2",
    "im_omega2",
    "mode1",
    "mode2",
    "abs_re_omega1_gap_vs_muller",
    "status",
];

struct Row {
    delta: f64,
    method: &'static str,
    pair: Option<ResonancePair>,
    gap_vs_muller: Option<f64>,
}

pub fn run(config: &RunConfig, out: &OutContext) -> Result<(), CliError> {
    let geom = geometry_with(&config.geometry, config.geometry.d0, config.geometry.s)?;
    let deltas = match &config.medium.delta_sweep {
        Some(list) => list.clone(),
        None => vec![medium_as_configured(&config.medium)?.delta()],
    };
    let n_max = config.numerics.n_max;
    let muller_n_max = config.numerics.muller_n_max;
    let guesses = muller_guesses(config);

    let (reference, scale) = unit_volume_shape(&geom);
    let caps_reference = capacitance_numeric(&reference, n_max)?
        .with_dipole(dipole_coupling(&reference, n_max)?);

    let mut rows = Vec::new();
    let mut gap_points = Vec::new();
    for &delta in &deltas {
        let params = medium_at_delta(&config.medium, delta)?;
        let muller = muller_resonances(&geom, &params, muller_n_max, guesses).ok();

        let corrections = anti_resonance_corrections(&geom, &params, muller_n_max).ok();
        let asymptotic =
            asymptotic_resonances(&params, &caps_reference, corrections.as_ref(), scale).ok();
        let quasi = quasi_static_roots(&caps_reference, &params, scale);

        for (method, pair) in [
            ("asymptotic", asymptotic),
            ("quasi-static", quasi),
            ("muller", muller.clone()),
        ] {
            let gap = match (method, &pair, &muller) {
                ("muller", _, _) => None,
                (_, Some(p), Some(m)) => Some((p.omega1.re - m.omega1.re).abs()),
                _ => None,
            };
            if method == "asymptotic" {
                if let Some(g) = gap {
                    gap_points.push((delta, g));
                }
            }
            rows.push(Row { delta, method, pair, gap_vs_muller: gap });
        }
    }

    let succeeded = rows.iter().filter(|r| r.pair.is_some()).count();
    if succeeded == 0 {
        return Err(CliError::Numeric("every resonance computation failed".into()));
    }

    let path = out.dir.join("resonances.csv");
    let mut csv = CsvFile::create(&path, "resonances", &config.echo(), &COLUMNS)?;
    for row in &rows {
        csv.row(&render(row))?;
    }
    if gap_points.len() >= 2 {
        let logx: Vec<f64> = gap_points.iter().map(|p| p.0.ln()).collect();
        let logy: Vec<f64> = gap_points.iter().map(|p| p.1.max(f64::MIN_POSITIVE).ln()).collect();
        csv.comment(&format!(
            "loglog_slope_abs_re_omega1_gap_asymptotic_vs_muller = {}",
            fmt(fit_slope(&logx, &logy))
        ))?;
    }
    csv.finish()
}

fn muller_guesses(config: &RunConfig) -> Option<[C64; 2]> {
    match (config.numerics.muller_guess1, config.numerics.muller_guess2) {
        (Some(a), Some(b)) => Some([C64::new(a[0], a[1]), C64::new(b[0], b[1])]),
        _ => None,
    }
}

/// Quasi-static closed forms, mapped from the volume-normalized shape back
/// to actual size.
fn quasi_static_roots(
    caps_reference: &dimerwave::layerpot::CapacitanceSet,
    params: &MediumParams,
    scale: f64,
) -> Option<ResonancePair> {
    let [omega1, omega2] = quasi_static_system_roots(caps_reference, params).ok()?;
    Some(ResonancePair {
        omega1: omega1 / scale,
        omega2: omega2 / scale,
        method: dimerwave::resonance::ResonanceMethod::Asymptotic,
        n_max: None,
        residuals: [None, None],
        modes: None,
    })
}

fn render(row: &Row) -> Vec<String> {
    let (omega1, omega2) = match &row.pair {
        Some(p) => (p.omega1, p.omega2),
        None => (C64::new(f64::NAN, f64::NAN), C64::new(f64::NAN, f64::NAN)),
    };
    let modes = match row.pair.as_ref().and_then(|p| p.modes.as_ref()) {
        Some([first, second]) => (label(first.kind), label(second.kind)),
        None => ("", ""),
    };
    vec![
        fmt(row.delta),
        row.method.to_string(),
        fmt(omega1.re),
        fmt(omega1.im),
        fmt(omega2.re),
        fmt(omega2.im),
        modes.0.to_string(),
        modes.1.to_string(),
        row.gap_vs_muller.map(fmt).unwrap_or_default(),
        if row.pair.is_some() { "OK" } else { "FAILED" }.to_string(),
    ]
}

fn label(kind: dimerwave::resonance::ModeKind) -> &'static str {
    match kind {
        dimerwave::resonance::ModeKind::Symmetric => "symmetric",
        dimerwave::resonance::ModeKind::Antisymmetric => "antisymmetric",
    }
}
