//! `capacitance`: pair constants by both routes, with their relative gap.

use dimerwave::layerpot::{capacitance_numeric, capacitance_series, dipole_coupling, dipole_series};

use crate::commands::{geometry_with, relative_gap, OutContext};
use crate::config::RunConfig;
use crate::csvout::{fmt, CsvFile};
use crate::CliError;

const COLUMNS: [&str; 7] = ["r0", "d0", "c11", "c12", "p", "method", "rel_gap"];

pub fn run(config: &RunConfig, out: &OutContext) -> Result<(), CliError> {
    let geometry = &config.geometry;
    let gaps = geometry.d0_sweep.clone().unwrap_or_else(|| vec![geometry.d0]);
    let n_max = config.numerics.n_max;
    let path = out.dir.join("capacitance.csv");
    let mut csv = CsvFile::create(&path, "capacitance", &config.echo(), &COLUMNS)?;

    for &d0 in &gaps {
        let geom = geometry_with(geometry, d0, geometry.s)?;
        let numeric = capacitance_numeric(&geom, n_max)?;
        let p_numeric = dipole_coupling(&geom, n_max)?;
        let r_actual = geometry.r0 * geometry.s;
        let d_actual = d0 * geometry.s;
        let (c11_series, c12_series) = capacitance_series(r_actual, d_actual)?;
        let p_series = dipole_series(r_actual, d_actual)?;
        let gap = relative_gap(numeric.c11, c11_series)
            .max(relative_gap(numeric.c12, c12_series))
            .max(relative_gap(p_numeric, p_series));
        for (c11, c12, p, method) in [
            (c11_series, c12_series, p_series, "series"),
            (numeric.c11, numeric.c12, p_numeric, "numeric"),
        ] {
            csv.row(&[
                fmt(r_actual),
                fmt(d_actual),
                fmt(c11),
                fmt(c12),
                fmt(p),
                method.to_string(),
                fmt(gap),
            ])?;
        }
    }
    csv.finish()
}
