//! Run configuration: one TOML file shared by every subcommand.
//!
//! Sections mirror what the library needs: `[geometry]` fixes the dimer
//! shape, `[medium]` the two-phase material, `[sweep]` the frequency scan,
//! `[ensemble]` the multi-dimer runs, `[numerics]` truncations, `[output]`
//! destinations. Each command reads the sections it needs and rejects runs
//! with missing ones; unknown keys are parse errors so typos surface early.

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub medium: MediumConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Ball radius before scaling.
    pub r0: f64,
    /// Surface gap before scaling.
    pub d0: f64,
    /// Overall size factor `s`.
    #[serde(default = "one")]
    pub s: f64,
    /// Gap values for capacitance tables; overrides `d0` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d0_sweep: Option<Vec<f64>>,
    /// Size values for the scatter error scan; overrides `s` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_sweep: Option<Vec<f64>>,
    /// Dimer axis.
    #[serde(default = "x_axis")]
    pub orientation: [f64; 3],
    /// Dimer midpoint.
    #[serde(default = "origin")]
    pub center: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    /// Outer (liquid) density.
    pub rho: f64,
    /// Outer bulk modulus.
    pub kappa: f64,
    /// Bubble density.
    pub rho_b: f64,
    /// Bubble bulk modulus.
    pub kappa_b: f64,
    /// Contrast values for resonance tables: each entry rescales both bubble
    /// parameters to `delta * rho`, `delta * kappa`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_sweep: Option<Vec<f64>>,
    /// Size-tied contrast constant: runs that vary `s` set `delta = (mu s)^2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Single evaluation frequency for scatter and foldy-compare.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Incident plane-wave direction.
    #[serde(default = "z_axis")]
    pub direction: [f64; 3],
    /// Points on the scatter evaluation ring.
    #[serde(default = "default_angles")]
    pub angles: usize,
    /// Ring radius in units of the dimer's tip-to-tip extent.
    #[serde(default = "default_ring")]
    pub ring_diameters: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            omega_min: None,
            omega_max: None,
            steps: None,
            omega: None,
            direction: z_axis(),
            angles: default_angles(),
            ring_diameters: default_ring(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    /// Box side lengths; dimers live in `[0, L]^3`.
    pub domain: [f64; 3],
    /// Dimer counts, one micro/macro comparison per entry.
    pub counts: Vec<usize>,
    /// Dilution constant: each run of `N` dimers uses size `s = lambda / N`.
    pub lambda: f64,
    /// Separation constant: centers stay `eta * N^{-1/3}` apart.
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Orientation-moment convention for the dispersion command; the
    /// foldy-compare command always uses the sampled ensemble's own moment.
    #[serde(default)]
    pub orientation_moment: MomentConvention,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentConvention {
    #[default]
    Half,
    Third,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    /// Multipole truncation for capacitance and the full boundary solver.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Truncation of the determinant used by the root finder.
    #[serde(default = "default_muller_n_max")]
    pub muller_n_max: usize,
    /// Optional starting points `[re, im]` for the two roots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub muller_guess1: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub muller_guess2: Option<[f64; 2]>,
    /// Voxels per axis of the macroscopic volume-integral grid.
    #[serde(default = "default_grid")]
    pub grid_per_axis: usize,
    /// Probe lattice points per axis for micro/macro comparison.
    #[serde(default = "default_probes")]
    pub probes_per_axis: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            n_max: default_n_max(),
            muller_n_max: default_muller_n_max(),
            muller_guess1: None,
            muller_guess2: None,
            grid_per_axis: default_grid(),
            probes_per_axis: default_probes(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Destination directory; the `--out` flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Emit SVG plots where the command supports them; `--svg` overrides.
    #[serde(default)]
    pub svg: bool,
}

fn one() -> f64 {
    1.0
}

fn x_axis() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

fn z_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn origin() -> [f64; 3] {
    [0.0, 0.0, 0.0]
}

fn default_angles() -> usize {
    16
}

fn default_ring() -> f64 {
    50.0
}

fn default_eta() -> f64 {
    0.5
}

fn default_n_max() -> usize {
    14
}

fn default_muller_n_max() -> usize {
    6
}

fn default_grid() -> usize {
    10
}

fn default_probes() -> usize {
    4
}

impl RunConfig {
    /// Parse and validate; errors name the offending key.
    pub fn from_str(text: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config parse: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("geometry.r0", self.geometry.r0),
            ("geometry.d0", self.geometry.d0),
            ("geometry.s", self.geometry.s),
            ("medium.rho", self.medium.rho),
            ("medium.kappa", self.medium.kappa),
            ("medium.rho_b", self.medium.rho_b),
            ("medium.kappa_b", self.medium.kappa_b),
        ];
        for (key, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(CliError::Config(format!("{key} must be positive, got {value}")));
            }
        }
        if let Some(values) = &self.geometry.d0_sweep {
            require_positive_list("geometry.d0_sweep", values)?;
        }
        if let Some(values) = &self.geometry.s_sweep {
            require_positive_list("geometry.s_sweep", values)?;
        }
        if let Some(values) = &self.medium.delta_sweep {
            require_positive_list("medium.delta_sweep", values)?;
        }
        if let Some(mu) = self.medium.mu {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(CliError::Config(format!("medium.mu must be positive, got {mu}")));
            }
        }
        if norm(self.geometry.orientation) == 0.0 {
            return Err(CliError::Config("geometry.orientation must be nonzero".into()));
        }
        if norm(self.sweep.direction) == 0.0 {
            return Err(CliError::Config("sweep.direction must be nonzero".into()));
        }
        if let Some(steps) = self.sweep.steps {
            if steps < 2 {
                return Err(CliError::Config(format!("sweep.steps must be at least 2, got {steps}")));
            }
        }
        for (key, value) in [
            ("sweep.omega_min", self.sweep.omega_min),
            ("sweep.omega_max", self.sweep.omega_max),
            ("sweep.omega", self.sweep.omega),
        ] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Config(format!("{key} must be positive, got {v}")));
                }
            }
        }
        if self.sweep.angles == 0 {
            return Err(CliError::Config("sweep.angles must be at least 1".into()));
        }
        if !(self.sweep.ring_diameters > 0.0 && self.sweep.ring_diameters.is_finite()) {
            return Err(CliError::Config(format!(
                "sweep.ring_diameters must be positive, got {}",
                self.sweep.ring_diameters
            )));
        }
        if let Some(ensemble) = &self.ensemble {
            require_positive_list("ensemble.domain", &ensemble.domain)?;
            if ensemble.counts.is_empty() {
                return Err(CliError::Config("ensemble.counts must not be empty".into()));
            }
            if ensemble.counts.contains(&0) {
                return Err(CliError::Config("ensemble.counts entries must be positive".into()));
            }
            for (key, value) in [("ensemble.lambda", ensemble.lambda), ("ensemble.eta", ensemble.eta)] {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(CliError::Config(format!("{key} must be positive, got {value}")));
                }
            }
        }
        for (key, value) in [
            ("numerics.n_max", self.numerics.n_max),
            ("numerics.muller_n_max", self.numerics.muller_n_max),
            ("numerics.probes_per_axis", self.numerics.probes_per_axis),
        ] {
            if value < 2 {
                return Err(CliError::Config(format!("{key} must be at least 2, got {value}")));
            }
        }
        if self.numerics.grid_per_axis < 2 {
            return Err(CliError::Config(format!(
                "numerics.grid_per_axis must be at least 2, got {}",
                self.numerics.grid_per_axis
            )));
        }
        Ok(())
    }

    /// The header echo: the fully resolved configuration, one `# ` line each.
    pub fn echo(&self) -> String {
        let body = toml::to_string(self).expect("validated config serializes");
        let mut out = String::new();
        for line in body.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

fn require_positive_list(key: &str, values: &[f64]) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::Config(format!("{key} must not be empty")));
    }
    for &v in values {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!("{key} entries must be positive, got {v}")));
        }
    }
    Ok(())
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}
