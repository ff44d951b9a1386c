//! Multi-dimer point-interaction simulator and the homogenized
//! volume-integral solver, plus the probe-grid comparison that tests the
//! effective-medium limit empirically: the microscopic field of N coupled
//! point dimers against the macroscopic field of the homogenized equation.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{complex_mat, complex_vec, rotation_aligning, CMat3, CVec3, DimerGeometry, Vec3};
use crate::homogenize::{BoxRegion, EffectiveMedium, EnsembleSpec};
use crate::linalg;
use crate::scatter::{
    green, green_gradient, green_hessian, point_response, DimerPointModel, IncidentWave,
    ScatteringCoefficients,
};
use crate::{C64, Error, Result};

/// Largest dimer count solved by dense LU; larger systems go through GMRES.
const DENSE_LIMIT: usize = 2000;
/// Relative residual for the iterative multi-dimer solve.
const FOLDY_TOL: f64 = 1e-10;
/// Relative residual contract for the volume-integral solve.
const LS_TOL: f64 = 1e-8;
/// Wavelength resolution floor: at least 8 grid points per wavelength.
const MIN_POINTS_PER_WAVELENGTH: f64 = 8.0;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
/// Radius factor of the volume-equivalent sphere of a cube cell: (3/4π)^{1/3}.
const EQUIV_RADIUS: f64 = 0.620_350_490_899_4;

// ---------------------------------------------------------------------------
// ensemble generation and files
// ---------------------------------------------------------------------------

/// Draws a reproducible ensemble: dimer centers on a jittered grid honoring
/// the minimum separation `η N^{-1/3}`, orientations uniform on the sphere.
pub fn sample_ensemble(
    domain: BoxRegion,
    n: usize,
    size: f64,
    mu: f64,
    lambda: f64,
    eta: f64,
    seed: u64,
) -> Result<EnsembleSpec> {
    if n == 0 {
        return Err(Error::Sampling("ensemble must contain at least one dimer".into()));
    }
    let per_axis = (n as f64).cbrt().ceil() as usize;
    let cells = per_axis * per_axis * per_axis;
    let lengths = domain.lengths();
    let cell = lengths / per_axis as f64;
    let min_cell = cell.x.min(cell.y).min(cell.z);
    let required = eta * (n as f64).powf(-1.0 / 3.0);
    if min_cell <= required {
        return Err(Error::Sampling(format!(
            "cannot honor separation {required:.3e} with {n} dimers in this box (cell {min_cell:.3e})"
        )));
    }
    // jitter keeps same-axis neighbors at least `required` apart
    let jitter = 0.45 * (min_cell - required);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // partial Fisher-Yates: the first n entries become a uniform cell sample
    let mut slots: Vec<usize> = (0..cells).collect();
    for i in 0..n {
        let j = rng.gen_range(i..cells);
        slots.swap(i, j);
    }
    let mut positions = Vec::with_capacity(n);
    let mut orientations = Vec::with_capacity(n);
    for &slot in slots.iter().take(n) {
        let iz = slot % per_axis;
        let iy = (slot / per_axis) % per_axis;
        let ix = slot / (per_axis * per_axis);
        let center = Vec3::new(
            (ix as f64 + 0.5) * cell.x,
            (iy as f64 + 0.5) * cell.y,
            (iz as f64 + 0.5) * cell.z,
        );
        let offset = Vec3::new(
            rng.gen_range(-jitter..=jitter),
            rng.gen_range(-jitter..=jitter),
            rng.gen_range(-jitter..=jitter),
        );
        positions.push(center + offset);
        // uniform direction via the two-angle method
        let cos_polar: f64 = rng.gen_range(-1.0..=1.0);
        let azimuth = rng.gen_range(0.0..std::f64::consts::TAU);
        let sin_polar = (1.0 - cos_polar * cos_polar).sqrt();
        orientations.push(Vec3::new(
            sin_polar * azimuth.cos(),
            sin_polar * azimuth.sin(),
            cos_polar,
        ));
    }
    let spec = EnsembleSpec { domain, size, mu, lambda, eta, positions, orientations };
    spec.validate()?;
    Ok(spec)
}

/// Fraction of the domain covered by the exclusion balls `B(z_j, √s)`;
/// scales as `N s^{3/2}` and shrinks along the homogenization limit.
pub fn excluded_volume_fraction(spec: &EnsembleSpec) -> f64 {
    let ball = FOUR_PI / 3.0 * spec.size.powf(1.5);
    spec.len() as f64 * ball / spec.domain.volume()
}

/// Writes an ensemble as delimited text: `# key value` headers (the seed
/// echoed when known), then one `z d` record per dimer at full precision.
pub fn write_ensemble(spec: &EnsembleSpec, seed: Option<u64>, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let lengths = spec.domain.lengths();
    writeln!(out, "# dimer ensemble")?;
    writeln!(out, "# domain {:.17e} {:.17e} {:.17e}", lengths.x, lengths.y, lengths.z)?;
    writeln!(out, "# size {:.17e}", spec.size)?;
    writeln!(out, "# mu {:.17e}", spec.mu)?;
    writeln!(out, "# lambda {:.17e}", spec.lambda)?;
    writeln!(out, "# eta {:.17e}", spec.eta)?;
    match seed {
        Some(s) => writeln!(out, "# seed {s}")?,
        None => writeln!(out, "# seed unknown")?,
    }
    writeln!(out, "# columns z_x z_y z_z d_x d_y d_z")?;
    for (z, d) in spec.positions.iter().zip(&spec.orientations) {
        writeln!(
            out,
            "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
            z.x, z.y, z.z, d.x, d.y, d.z
        )?;
    }
    Ok(())
}

/// Reads an ensemble written by [`write_ensemble`] and validates it.
pub fn read_ensemble(path: &Path) -> Result<EnsembleSpec> {
    let reader = BufReader::new(File::open(path)?);
    let mut lengths = None;
    let mut size = None;
    let mut mu = None;
    let mut lambda = None;
    let mut eta = None;
    let mut positions = Vec::new();
    let mut orientations = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let number = idx + 1;
        let parse = |token: &str| -> Result<f64> {
            token.parse::<f64>().map_err(|e| Error::EnsembleParse {
                line: number,
                message: format!("bad float {token:?}: {e}"),
            })
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let mut words = rest.split_whitespace();
            let key = words.next();
            let mut grab = |key: &str| -> Result<f64> {
                parse(words.next().ok_or(Error::EnsembleParse {
                    line: number,
                    message: format!("header `{key}` needs a value"),
                })?)
            };
            match key {
                Some("domain") => {
                    lengths =
                        Some(Vec3::new(grab("domain")?, grab("domain")?, grab("domain")?));
                }
                Some("size") => size = Some(grab("size")?),
                Some("mu") => mu = Some(grab("mu")?),
                Some("lambda") => lambda = Some(grab("lambda")?),
                Some("eta") => eta = Some(grab("eta")?),
                _ => {} // free-form comment
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::EnsembleParse {
                line: number,
                message: format!("expected 6 columns, found {}", fields.len()),
            });
        }
        let values: Vec<f64> = fields.iter().map(|t| parse(t)).collect::<Result<_>>()?;
        positions.push(Vec3::new(values[0], values[1], values[2]));
        orientations.push(Vec3::new(values[3], values[4], values[5]));
    }
    let missing = |key: &str| Error::EnsembleParse {
        line: 0,
        message: format!("missing header `# {key} ...`"),
    };
    let spec = EnsembleSpec {
        domain: BoxRegion::new(lengths.ok_or_else(|| missing("domain"))?)?,
        size: size.ok_or_else(|| missing("size"))?,
        mu: mu.ok_or_else(|| missing("mu"))?,
        lambda: lambda.ok_or_else(|| missing("lambda"))?,
        eta: eta.ok_or_else(|| missing("eta"))?,
        positions,
        orientations,
    };
    spec.validate()?;
    Ok(spec)
}

// ---------------------------------------------------------------------------
// the coupled point system
// ---------------------------------------------------------------------------

/// Point coefficients for every dimer of an ensemble, obtained from one
/// reference model by rotation covariance: `g0` is orientation-invariant and
/// `g1` transforms as `R g1 Rᵀ`.
pub fn ensemble_coefficients(
    model: &DimerPointModel,
    spec: &EnsembleSpec,
    omega: C64,
) -> Result<Vec<ScatteringCoefficients>> {
    let base = model.at(omega)?;
    let reference = base.geometry;
    if (reference.scale - spec.size).abs() > 1e-12 * spec.size.abs() {
        return Err(Error::invalid(
            "ensemble coefficients",
            format!("model size {} differs from ensemble size {}", reference.scale, spec.size),
        ));
    }
    spec.positions
        .iter()
        .zip(&spec.orientations)
        .map(|(&z, &d)| {
            let rotation = complex_mat(rotation_aligning(reference.orientation, d));
            let geometry = DimerGeometry::new(reference.r0, reference.d0, reference.scale, d, z)?;
            Ok(ScatteringCoefficients {
                g0: base.g0,
                g1: rotation * base.g1 * rotation.transpose(),
                omega: base.omega,
                geometry,
                method: base.method,
                near_pole: base.near_pole,
            })
        })
        .collect()
}

/// Solution of the self-consistent multi-dimer system: the local incident
/// value and gradient seen by each dimer.
#[derive(Debug, Clone)]
pub struct FoldyState {
    coefficients: Vec<ScatteringCoefficients>,
    wave: IncidentWave,
    local_values: Vec<C64>,
    local_gradients: Vec<CVec3>,
}

fn foldy_matrix(coeffs: &[ScatteringCoefficients], k: C64) -> Array2<C64> {
    let n = coeffs.len();
    let mut a = Array2::eye(4 * n);
    for j in 0..n {
        let zj = coeffs[j].geometry.center;
        for (i, source) in coeffs.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = zj - source.geometry.center;
            let g = green(d, k);
            let grad = green_gradient(d, k);
            let hess = green_hessian(d, k);
            let dipole_row = source.g1 * grad;
            let dipole_block = hess * source.g1;
            a[(4 * j, 4 * i)] -= source.g0 * g;
            for c in 0..3 {
                a[(4 * j, 4 * i + 1 + c)] -= dipole_row[c];
                a[(4 * j + 1 + c, 4 * i)] -= source.g0 * grad[c];
                for r in 0..3 {
                    a[(4 * j + 1 + r, 4 * i + 1 + c)] -= dipole_block[(r, c)];
                }
            }
        }
    }
    a
}

/// Matrix-free action of the coupled system on an interleaved state vector.
fn foldy_apply(coeffs: &[ScatteringCoefficients], k: C64, x: &Array1<C64>) -> Array1<C64> {
    let n = coeffs.len();
    let mut out = x.clone();
    // per-source dipole moments reused across targets
    let moments: Vec<CVec3> = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c.g1 * CVec3::new(x[4 * i + 1], x[4 * i + 2], x[4 * i + 3]))
        .collect();
    for j in 0..n {
        let zj = coeffs[j].geometry.center;
        let mut acc_u = C64::new(0.0, 0.0);
        let mut acc_v = CVec3::zeros();
        for (i, source) in coeffs.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = zj - source.geometry.center;
            let g = green(d, k);
            let grad = green_gradient(d, k);
            let hess = green_hessian(d, k);
            let monopole = source.g0 * x[4 * i];
            acc_u += monopole * g + grad.dot(&moments[i]);
            acc_v += grad * monopole + hess * moments[i];
        }
        out[4 * j] -= acc_u;
        for r in 0..3 {
            out[4 * j + 1 + r] -= acc_v[r];
        }
    }
    out
}

fn foldy_rhs(coeffs: &[ScatteringCoefficients], wave: &IncidentWave) -> Array1<C64> {
    let n = coeffs.len();
    let mut rhs = Array1::zeros(4 * n);
    for (j, c) in coeffs.iter().enumerate() {
        let z = c.geometry.center;
        rhs[4 * j] = wave.value_at(z);
        let grad = wave.gradient_at(z);
        for r in 0..3 {
            rhs[4 * j + 1 + r] = grad[r];
        }
    }
    rhs
}

/// Solves the closed 4N×4N system: each dimer's local incident value and
/// gradient equal the incident wave plus every other dimer's monopole and
/// dipole fields. Dense LU up to 2000 dimers, GMRES beyond.
pub fn assemble_and_solve_foldy(
    spec: &EnsembleSpec,
    coeffs: &[ScatteringCoefficients],
    wave: &IncidentWave,
) -> Result<FoldyState> {
    spec.validate()?;
    if coeffs.len() != spec.len() {
        return Err(Error::invalid(
            "multi-dimer system",
            format!("{} coefficient sets for {} dimers", coeffs.len(), spec.len()),
        ));
    }
    let omega = coeffs[0].omega;
    for (j, c) in coeffs.iter().enumerate() {
        if (c.geometry.center - spec.positions[j]).norm() > 1e-12 {
            return Err(Error::invalid(
                "multi-dimer system",
                format!("coefficient set {j} anchored away from its dimer position"),
            ));
        }
        if (c.omega - omega).norm() > 1e-12 * omega.norm() {
            return Err(Error::invalid("multi-dimer system", "mixed frequencies"));
        }
        if let Some(mode) = c.near_pole {
            return Err(Error::invalid(
                "multi-dimer system",
                format!("frequency sits inside the near-pole band of the {mode:?} mode"),
            ));
        }
    }
    let k = wave.wavenumber;
    let rhs = foldy_rhs(coeffs, wave);
    let solution = if spec.len() <= DENSE_LIMIT {
        let matrix = foldy_matrix(coeffs, k);
        match linalg::solve(&matrix, &rhs, "multi-dimer point system") {
            Ok(x) => x,
            Err(_) => {
                let (smin, smax, _) = linalg::min_singular(&matrix, "multi-dimer point system")?;
                return Err(Error::Singular {
                    context: "multi-dimer point system",
                    rcond: smin / smax,
                });
            }
        }
    } else {
        linalg::gmres(|x| foldy_apply(coeffs, k, x), &rhs, FOLDY_TOL, 400)?
    };
    let n = spec.len();
    let mut local_values = Vec::with_capacity(n);
    let mut local_gradients = Vec::with_capacity(n);
    for j in 0..n {
        local_values.push(solution[4 * j]);
        local_gradients.push(CVec3::new(
            solution[4 * j + 1],
            solution[4 * j + 2],
            solution[4 * j + 3],
        ));
    }
    Ok(FoldyState { coefficients: coeffs.to_vec(), wave: *wave, local_values, local_gradients })
}

impl FoldyState {
    pub fn len(&self) -> usize {
        self.local_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.local_values.is_empty()
    }

    /// Local incident values `u^{i,N}_j(z_j)`.
    pub fn local_values(&self) -> &[C64] {
        &self.local_values
    }

    /// Local incident gradients `∇u^{i,N}_j(z_j)`.
    pub fn local_gradients(&self) -> &[CVec3] {
        &self.local_gradients
    }

    /// Sum of all dimers' monopole and dipole fields at `x`.
    pub fn scattered_at(&self, x: Vec3) -> C64 {
        let k = self.wave.wavenumber;
        self.coefficients
            .iter()
            .zip(self.local_values.iter().zip(&self.local_gradients))
            .map(|(c, (&u, v))| point_response(c, u, v, k, x))
            .sum()
    }

    pub fn total_at(&self, x: Vec3) -> C64 {
        self.wave.value_at(x) + self.scattered_at(x)
    }

    /// Far-field amplitude: the scattered field behaves like
    /// `f(x̂) e^{ik|x|}/|x|` about the world origin.
    pub fn far_field(&self, direction: Vec3) -> Result<C64> {
        let norm = direction.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("far-field direction", "zero or non-finite"));
        }
        let unit = direction / norm;
        let k = self.wave.wavenumber;
        let mut f = C64::new(0.0, 0.0);
        for (c, (&u, v)) in self
            .coefficients
            .iter()
            .zip(self.local_values.iter().zip(&self.local_gradients))
        {
            let z = c.geometry.center;
            let phase = (-C64::i() * k * unit.dot(&z)).exp();
            let dipole = C64::i() * k * (c.g1 * complex_vec(unit)).dot(v);
            f += phase * (c.g0 * u + dipole);
        }
        Ok(-f / FOUR_PI)
    }

    /// Extinction cross-section from the optical theorem,
    /// `(4π/k) Im[f(θ̂) conj(A)] / |A|²` for incident direction θ̂.
    pub fn extinction_cross_section(&self) -> Result<f64> {
        let forward = self.far_field(self.wave.direction())?;
        let amp = self.wave.amplitude;
        let k = self.wave.wavenumber.re;
        Ok(FOUR_PI / k * (forward * amp.conj()).im / amp.norm_sqr())
    }
}

// ---------------------------------------------------------------------------
// homogenized volume-integral solver
// ---------------------------------------------------------------------------

/// Uniform collocation grid of cubic cells over a box.
#[derive(Debug, Clone)]
pub struct VoxelGrid {
    domain: BoxRegion,
    per_axis: [usize; 3],
    spacing: f64,
}

impl VoxelGrid {
    pub fn new(domain: BoxRegion, per_axis: [usize; 3]) -> Result<Self> {
        if per_axis.iter().any(|&m| m < 2) {
            return Err(Error::invalid("voxel grid", "need at least 2 cells per axis"));
        }
        let lengths = domain.lengths();
        let h = lengths.x / per_axis[0] as f64;
        let hy = lengths.y / per_axis[1] as f64;
        let hz = lengths.z / per_axis[2] as f64;
        if (hy - h).abs() > 1e-9 * h || (hz - h).abs() > 1e-9 * h {
            return Err(Error::invalid(
                "voxel grid",
                format!("cells must be cubic, got spacings {h}, {hy}, {hz}"),
            ));
        }
        Ok(Self { domain, per_axis, spacing: h })
    }

    /// Cubic box split into `m³` cubic cells.
    pub fn cubic(domain: BoxRegion, m: usize) -> Result<Self> {
        Self::new(domain, [m, m, m])
    }

    pub fn len(&self) -> usize {
        self.per_axis[0] * self.per_axis[1] * self.per_axis[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn domain(&self) -> &BoxRegion {
        &self.domain
    }

    fn coords(&self, flat: usize) -> [usize; 3] {
        let mz = self.per_axis[2];
        let my = self.per_axis[1];
        [flat / (my * mz), (flat / mz) % my, flat % mz]
    }

    pub fn center(&self, flat: usize) -> Vec3 {
        let [ix, iy, iz] = self.coords(flat);
        Vec3::new(
            (ix as f64 + 0.5) * self.spacing,
            (iy as f64 + 0.5) * self.spacing,
            (iz as f64 + 0.5) * self.spacing,
        )
    }
}

/// Cell integrals of G, ∇G, and the Hessian for every voxel offset; the
/// self cell uses closed-form integrals over the volume-equivalent sphere.
struct CellKernels {
    dims: [usize; 3],
    greens: Vec<C64>,
    gradients: Vec<CVec3>,
    hessians: Vec<CMat3>,
}

impl CellKernels {
    fn build(grid: &VoxelGrid, k: C64) -> Self {
        let [mx, my, mz] = grid.per_axis;
        let dims = [2 * mx - 1, 2 * my - 1, 2 * mz - 1];
        let h = grid.spacing;
        let volume = h * h * h;
        let total = dims[0] * dims[1] * dims[2];
        let mut greens = vec![C64::new(0.0, 0.0); total];
        let mut gradients = vec![CVec3::zeros(); total];
        let mut hessians = vec![CMat3::zeros(); total];
        // singularity-extracted self cell: sphere of the same volume, over
        // which ∫G = (1 − e^{ika}(1−ika))/k², ∫∇G = 0, ∫∇∇G = e^{ika}(1−ika)I/3
        let a = h * EQUIV_RADIUS;
        let ika = C64::i() * k * a;
        let edge = ika.exp() * (C64::new(1.0, 0.0) - ika);
        let self_green = (C64::new(1.0, 0.0) - edge) / (k * k);
        let self_hessian = CMat3::identity() * (edge / 3.0);
        for dx in 0..dims[0] {
            for dy in 0..dims[1] {
                for dz in 0..dims[2] {
                    let idx = (dx * dims[1] + dy) * dims[2] + dz;
                    let off = Vec3::new(
                        (dx as isize - (mx as isize - 1)) as f64,
                        (dy as isize - (my as isize - 1)) as f64,
                        (dz as isize - (mz as isize - 1)) as f64,
                    ) * h;
                    if off.norm() == 0.0 {
                        greens[idx] = self_green;
                        hessians[idx] = self_hessian;
                    } else {
                        greens[idx] = volume * green(off, k);
                        gradients[idx] = green_gradient(off, k) * C64::new(volume, 0.0);
                        hessians[idx] = green_hessian(off, k) * C64::new(volume, 0.0);
                    }
                }
            }
        }
        Self { dims, greens, gradients, hessians }
    }

    fn index(&self, target: [usize; 3], source: [usize; 3]) -> usize {
        let dx = target[0] + (self.dims[0] / 2) - source[0];
        let dy = target[1] + (self.dims[1] / 2) - source[1];
        let dz = target[2] + (self.dims[2] / 2) - source[2];
        (dx * self.dims[1] + dy) * self.dims[2] + dz
    }
}

/// Macroscopic field: collocation solution of the volume integral equation
/// `u = u^in + Λg̃⁰Ṽ ∫ u G + Λg̃¹ ∫ ∇u·B̃∇G` with a field evaluator.
#[derive(Debug, Clone)]
pub struct MacroField {
    grid: VoxelGrid,
    wave: IncidentWave,
    monopole_coupling: C64,
    dipole_coupling: CMat3,
    values: Vec<C64>,
    gradients: Vec<CVec3>,
}

/// Solves the homogenized volume integral equation on the voxel grid by
/// collocation; GMRES to relative residual 1e-8.
pub fn lippmann_schwinger_solve(
    medium: &EffectiveMedium,
    grid: &VoxelGrid,
    wave: &IncidentWave,
) -> Result<MacroField> {
    let k = wave.wavenumber;
    if (k - medium.k).norm() > 1e-10 * k.norm() {
        return Err(Error::invalid(
            "volume integral solve",
            "incident wavenumber differs from the medium's",
        ));
    }
    let points_per_wavelength = std::f64::consts::TAU / (k.re * grid.spacing);
    if !(points_per_wavelength >= MIN_POINTS_PER_WAVELENGTH) {
        return Err(Error::invalid(
            "volume integral solve",
            format!("grid resolves only {points_per_wavelength:.2} points per wavelength, need 8"),
        ));
    }
    let c0 = medium.g0_tilde * (medium.lambda * medium.v_tilde);
    let c1 = complex_mat(medium.b_tilde) * (medium.g1_tilde * medium.lambda);
    let kernels = CellKernels::build(grid, k);
    let m = grid.len();
    let coords: Vec<[usize; 3]> = (0..m).map(|i| grid.coords(i)).collect();

    let mut rhs = Array1::zeros(4 * m);
    for j in 0..m {
        let x = grid.center(j);
        rhs[4 * j] = wave.value_at(x);
        let grad = wave.gradient_at(x);
        for r in 0..3 {
            rhs[4 * j + 1 + r] = grad[r];
        }
    }

    let apply = |x: &Array1<C64>| -> Array1<C64> {
        let mut out = x.clone();
        let moments: Vec<CVec3> = (0..m)
            .map(|i| c1 * CVec3::new(x[4 * i + 1], x[4 * i + 2], x[4 * i + 3]))
            .collect();
        for j in 0..m {
            let mut acc_u = C64::new(0.0, 0.0);
            let mut acc_v = CVec3::zeros();
            for i in 0..m {
                let idx = kernels.index(coords[j], coords[i]);
                let kg = kernels.greens[idx];
                let kgrad = kernels.gradients[idx];
                let kh = kernels.hessians[idx];
                let monopole = c0 * x[4 * i];
                acc_u += monopole * kg + kgrad.dot(&moments[i]);
                acc_v += kgrad * monopole + kh * moments[i];
            }
            out[4 * j] -= acc_u;
            for r in 0..3 {
                out[4 * j + 1 + r] -= acc_v[r];
            }
        }
        out
    };
    let solution = linalg::gmres(apply, &rhs, LS_TOL, 250)?;

    let mut values = Vec::with_capacity(m);
    let mut gradients = Vec::with_capacity(m);
    for j in 0..m {
        values.push(solution[4 * j]);
        gradients.push(CVec3::new(solution[4 * j + 1], solution[4 * j + 2], solution[4 * j + 3]));
    }
    Ok(MacroField {
        grid: grid.clone(),
        wave: *wave,
        monopole_coupling: c0,
        dipole_coupling: c1,
        values,
        gradients,
    })
}

impl MacroField {
    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    /// Solved field values at the voxel centers.
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Total macroscopic field at an arbitrary point via the representation
    /// formula; inside a cell's equivalent sphere the self integrals apply.
    pub fn value_at(&self, x: Vec3) -> C64 {
        let k = self.wave.wavenumber;
        let h = self.grid.spacing();
        let volume = h * h * h;
        let a = h * EQUIV_RADIUS;
        let ika = C64::i() * k * a;
        let edge = ika.exp() * (C64::new(1.0, 0.0) - ika);
        let self_green = (C64::new(1.0, 0.0) - edge) / (k * k);
        let mut acc = self.wave.value_at(x);
        for i in 0..self.grid.len() {
            let d = x - self.grid.center(i);
            let monopole = self.monopole_coupling * self.values[i];
            if d.norm() <= a {
                acc += monopole * self_green;
            } else {
                acc += monopole * (volume * green(d, k))
                    + (green_gradient(d, k) * C64::new(volume, 0.0))
                        .dot(&(self.dipole_coupling * self.gradients[i]));
            }
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// micro-macro comparison
// ---------------------------------------------------------------------------

/// Evaluation points in the domain, at distance ≥ √s from every dimer center.
#[derive(Debug, Clone)]
pub struct ProbeGrid {
    points: Vec<Vec3>,
}

impl ProbeGrid {
    /// All candidates must satisfy the exclusion rule; violations error.
    pub fn new(points: Vec<Vec3>, spec: &EnsembleSpec) -> Result<Self> {
        let exclusion = spec.size.sqrt();
        for (idx, x) in points.iter().enumerate() {
            if !spec.domain.contains(*x) {
                return Err(Error::invalid(
                    "probe grid",
                    format!("probe {idx} lies outside the domain"),
                ));
            }
            if let Some(j) = spec.positions.iter().position(|z| (x - z).norm() < exclusion) {
                return Err(Error::invalid(
                    "probe grid",
                    format!("probe {idx} lies inside the exclusion ball of dimer {j}"),
                ));
            }
        }
        if points.is_empty() {
            return Err(Error::invalid("probe grid", "no probe points"));
        }
        Ok(Self { points })
    }

    /// Keeps the admissible candidates; errors only if none survive.
    pub fn filtered(candidates: Vec<Vec3>, spec: &EnsembleSpec) -> Result<Self> {
        let exclusion = spec.size.sqrt();
        let points: Vec<Vec3> = candidates
            .into_iter()
            .filter(|x| {
                spec.domain.contains(*x)
                    && spec.positions.iter().all(|z| (x - z).norm() >= exclusion)
            })
            .collect();
        if points.is_empty() {
            return Err(Error::invalid("probe grid", "no probe survives the exclusion rule"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One probe of the microscopic and macroscopic total fields.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonRow {
    pub point: Vec3,
    pub micro_value: C64,
    pub macro_value: C64,
}

/// Probe table plus the relative L2 gap (normalized by the microscopic field).
#[derive(Debug, Clone)]
pub struct MicroMacroReport {
    pub rows: Vec<ComparisonRow>,
    pub relative_l2: f64,
}

pub fn compare_micro_macro(
    micro: &FoldyState,
    macro_field: &MacroField,
    probes: &ProbeGrid,
) -> MicroMacroReport {
    let rows: Vec<ComparisonRow> = probes
        .points()
        .iter()
        .map(|&x| ComparisonRow {
            point: x,
            micro_value: micro.total_at(x),
            macro_value: macro_field.value_at(x),
        })
        .collect();
    let gap: f64 = rows.iter().map(|r| (r.micro_value - r.macro_value).norm_sqr()).sum();
    let reference: f64 = rows.iter().map(|r| r.micro_value.norm_sqr()).sum();
    MicroMacroReport { rows, relative_l2: (gap / reference).sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Mat3, SphereCluster};
    use crate::homogenize::effective_coefficients;
    use crate::layerpot::{capacitance_numeric, dipole_coupling, MediumParams};
    use crate::quad::sphere_rule;
    use crate::resonance::{
        asymptotic_resonances, muller_resonances, unit_volume_shape, ResonancePair,
    };
    use crate::scatter::{point_scattered_field, ClusterScattering};

    /// Point model of the r0 = 1, d0 = 5 pair at `scale`, with asymptotic
    /// resonances from the volume-normalized shape.
    fn reference_model(
        scale: f64,
        delta: f64,
        n_caps: usize,
    ) -> (DimerPointModel, MediumParams, ResonancePair) {
        let geom = DimerGeometry::new(1.0, 5.0, scale, Vec3::z(), Vec3::zeros()).unwrap();
        let params = MediumParams::unit_contrast(delta).unwrap();
        let caps = capacitance_numeric(&geom, n_caps)
            .unwrap()
            .with_dipole(dipole_coupling(&geom, n_caps).unwrap());
        let (shape, factor) = unit_volume_shape(&geom);
        let caps_ref = capacitance_numeric(&shape, n_caps).unwrap();
        let resonances = asymptotic_resonances(&params, &caps_ref, None, factor).unwrap();
        let model = DimerPointModel::new(&geom, &params, &caps, &resonances).unwrap();
        (model, params, resonances)
    }

    fn small_ensemble(n: usize, seed: u64) -> EnsembleSpec {
        let domain = BoxRegion::cube(4.0).unwrap();
        sample_ensemble(domain, n, 0.01, 1.0, 1.0, 0.5, seed).unwrap()
    }

    #[test]
    fn single_dimer_reduces_to_point_model() {
        let (model, _, _) = reference_model(0.01, 1e-4, 8);
        let spec = EnsembleSpec {
            domain: BoxRegion::cube(2.0).unwrap(),
            size: 0.01,
            mu: 1.0,
            lambda: 1.0,
            eta: 0.5,
            positions: vec![Vec3::new(1.0, 1.0, 1.0)],
            orientations: vec![Vec3::new(0.6, 0.0, 0.8)],
        };
        let omega = C64::new(1.0, 0.0);
        let coeffs = ensemble_coefficients(&model, &spec, omega).unwrap();
        let wave = IncidentWave::new(Vec3::new(0.3, -0.2, 1.0), omega, C64::new(0.7, 0.4)).unwrap();
        let state = assemble_and_solve_foldy(&spec, &coeffs, &wave).unwrap();
        for x in [Vec3::new(0.2, 0.4, 0.1), Vec3::new(1.9, 1.2, 0.3), Vec3::new(0.5, 1.8, 1.9)] {
            let direct = point_scattered_field(&coeffs[0], &wave, x);
            let coupled = state.scattered_at(x);
            assert!(
                (direct - coupled).norm() <= 1e-13 * direct.norm(),
                "direct {direct}, coupled {coupled}"
            );
        }
    }

    #[test]
    fn relabeling_leaves_the_field_unchanged() {
        let (model, _, _) = reference_model(0.01, 1e-4, 6);
        let spec = small_ensemble(8, 11);
        let omega = C64::new(1.0, 0.0);
        let wave = IncidentWave::new(Vec3::z(), omega, C64::new(1.0, 0.0)).unwrap();
        let coeffs = ensemble_coefficients(&model, &spec, omega).unwrap();
        let state = assemble_and_solve_foldy(&spec, &coeffs, &wave).unwrap();

        let mut order: Vec<usize> = (0..spec.len()).collect();
        order.reverse();
        order.swap(0, 3);
        let permuted = EnsembleSpec {
            positions: order.iter().map(|&i| spec.positions[i]).collect(),
            orientations: order.iter().map(|&i| spec.orientations[i]).collect(),
            ..spec.clone()
        };
        let coeffs_p = ensemble_coefficients(&model, &permuted, omega).unwrap();
        let state_p = assemble_and_solve_foldy(&permuted, &coeffs_p, &wave).unwrap();
        for x in [Vec3::new(0.3, 0.3, 0.4), Vec3::new(3.6, 2.0, 1.1), Vec3::new(2.0, 3.8, 3.1)] {
            let a = state.scattered_at(x);
            let b = state_p.scattered_at(x);
            assert!((a - b).norm() <= 1e-12 * a.norm(), "{a} vs {b}");
        }
    }

    #[test]
    fn monopole_coupling_is_reciprocal() {
        let (model, _, _) = reference_model(0.01, 1e-4, 6);
        let spec = small_ensemble(6, 23);
        let omega = C64::new(1.0, 0.0);
        let coeffs = ensemble_coefficients(&model, &spec, omega).unwrap();
        let matrix = foldy_matrix(&coeffs, omega);
        for j in 0..spec.len() {
            for i in 0..spec.len() {
                let forward = matrix[(4 * j, 4 * i)];
                let reverse = matrix[(4 * i, 4 * j)];
                assert!((forward - reverse).norm() <= 1e-10 * forward.norm().max(1e-30));
            }
        }
    }

    #[test]
    fn dense_and_matrix_free_paths_agree() {
        let (model, _, _) = reference_model(0.01, 1e-4, 6);
        let spec = small_ensemble(10, 5);
        let omega = C64::new(1.0, 0.0);
        let coeffs = ensemble_coefficients(&model, &spec, omega).unwrap();
        let wave = IncidentWave::new(Vec3::x(), omega, C64::new(1.0, 0.0)).unwrap();
        let matrix = foldy_matrix(&coeffs, omega);
        let rhs = foldy_rhs(&coeffs, &wave);
        // the matrix-free operator reproduces the dense product
        let probe: Array1<C64> = (0..rhs.len())
            .map(|i| C64::new((i as f64).sin(), (i as f64).cos()))
            .collect();
        let dense_product = matrix.dot(&probe);
        let free_product = foldy_apply(&coeffs, omega, &probe);
        let gap: f64 = (&dense_product - &free_product).iter().map(|z| z.norm_sqr()).sum();
        let scale: f64 = dense_product.iter().map(|z| z.norm_sqr()).sum();
        assert!((gap / scale).sqrt() <= 1e-13);
        // and GMRES on it reaches the dense solution
        let direct = linalg::solve(&matrix, &rhs, "test").unwrap();
        let iterative =
            linalg::gmres(|x| foldy_apply(&coeffs, omega, x), &rhs, 1e-12, 200).unwrap();
        let gap: f64 = (&direct - &iterative).iter().map(|z| z.norm_sqr()).sum();
        let scale: f64 = direct.iter().map(|z| z.norm_sqr()).sum();
        assert!((gap / scale).sqrt() <= 1e-10);
    }

    #[test]
    fn two_dimers_match_four_sphere_solution() {
        // brute-force oracle: both dimers resolved as four spheres in one
        // boundary-integral solve, against the coupled point system; the
        // point model's leading truncation error is a retardation term
        // of order k·s, so the contrast keeps the frequency low
        let scale = 0.01;
        let delta = 1e-5;
        let geom_ref = DimerGeometry::new(1.0, 5.0, scale, Vec3::z(), Vec3::zeros()).unwrap();
        let params = MediumParams::unit_contrast(delta).unwrap();
        let caps = capacitance_numeric(&geom_ref, 10)
            .unwrap()
            .with_dipole(dipole_coupling(&geom_ref, 10).unwrap());
        let resonances = muller_resonances(&geom_ref, &params, 6, None).unwrap();
        let model = DimerPointModel::new(&geom_ref, &params, &caps, &resonances).unwrap();

        // moderately detuned: near a pole the point model's O(s) truncation
        // error is amplified by the resonant denominator
        let omega = C64::new(0.7 * resonances.omega1.re, 0.0);
        let d1 = Vec3::new(1.0, 1.0, 0.3).normalize();
        let d2 = Vec3::new(-0.2, 1.0, 0.8).normalize();
        let z1 = Vec3::new(1.9, 2.0, 2.0);
        let z2 = z1 + Vec3::new(20.0 * scale, 0.0, 0.0);
        let spec = EnsembleSpec {
            domain: BoxRegion::cube(4.0).unwrap(),
            size: scale,
            mu: delta.sqrt() / scale,
            lambda: 1.0,
            eta: 0.2,
            positions: vec![z1, z2],
            orientations: vec![d1, d2],
        };
        let coeffs = ensemble_coefficients(&model, &spec, omega).unwrap();
        let wave = IncidentWave::new(Vec3::new(1.0, 0.4, 0.2), omega, C64::new(1.0, 0.0)).unwrap();
        let state = assemble_and_solve_foldy(&spec, &coeffs, &wave).unwrap();

        let ga = DimerGeometry::new(1.0, 5.0, scale, d1, z1).unwrap();
        let gb = DimerGeometry::new(1.0, 5.0, scale, d2, z2).unwrap();
        let mut spheres = ga.cluster().spheres().to_vec();
        spheres.extend_from_slice(gb.cluster().spheres());
        let cluster = SphereCluster::new(spheres).unwrap();
        let full = ClusterScattering::solve(&cluster, &params, &wave, 6).unwrap();

        let mid = 0.5 * (z1 + z2);
        for i in 0..10 {
            let angle = std::f64::consts::TAU * i as f64 / 10.0;
            let probe = mid + 0.5 * (angle.cos() * Vec3::y() + angle.sin() * Vec3::z());
            let oracle = full.scattered_at(probe).unwrap();
            let point = state.scattered_at(probe);
            assert!(
                (oracle - point).norm() <= 0.02 * oracle.norm(),
                "probe {i}: oracle {oracle}, point {point}"
            );
        }
    }

    #[test]
    fn extinction_is_nonnegative_for_lossless_dimers() {
        let (model, _, resonances) = reference_model(0.01, 1e-4, 6);
        let spec = small_ensemble(20, 41);
        let omega = C64::new(0.95 * resonances.omega1.re, 0.0);
        let coeffs = ensemble_coefficients(&model, &spec, omega).unwrap();
        let wave = IncidentWave::new(Vec3::new(0.2, 0.3, 1.0), omega, C64::new(0.8, -0.6)).unwrap();
        let state = assemble_and_solve_foldy(&spec, &coeffs, &wave).unwrap();
        let extinction = state.extinction_cross_section().unwrap();
        assert!(extinction >= 0.0, "extinction {extinction}");
        // the medium is lossless, so the far-field power matches extinction
        // up to the point approximation's accuracy
        let rule = sphere_rule(16, 32);
        let mut scattered = 0.0;
        for (dir, w) in rule.dirs.iter().zip(&rule.weights) {
            scattered += state.far_field(*dir).unwrap().norm_sqr() * w;
        }
        scattered /= wave.amplitude.norm_sqr();
        assert!(scattered > 0.0);
        assert!(
            (scattered - extinction).abs() <= 0.5 * extinction,
            "scattered {scattered} vs extinction {extinction}"
        );
    }

    #[test]
    fn sampler_honors_separation_and_seed() {
        let domain = BoxRegion::cube(10.0).unwrap();
        let spec = sample_ensemble(domain, 64, 0.05, 1.0, 3.2, 1.0, 99).unwrap();
        assert_eq!(spec.len(), 64);
        assert!(spec.measured_eta() >= spec.eta);
        for d in &spec.orientations {
            assert!((d.norm() - 1.0).abs() <= 1e-12);
        }
        let again = sample_ensemble(domain, 64, 0.05, 1.0, 3.2, 1.0, 99).unwrap();
        assert_eq!(spec.positions, again.positions);
        assert_eq!(spec.orientations, again.orientations);
        let other = sample_ensemble(domain, 64, 0.05, 1.0, 3.2, 1.0, 100).unwrap();
        assert!(spec.positions != other.positions);
        // exclusion-ball volume fraction, the dilution figure of merit
        let fraction = excluded_volume_fraction(&spec);
        let expected = 64.0 * FOUR_PI / 3.0 * 0.05f64.powf(1.5) / 1000.0;
        assert!((fraction - expected).abs() <= 1e-15);
        // an impossible separation demand errors instead of looping
        assert!(sample_ensemble(domain, 64, 0.05, 1.0, 3.2, 40.0, 7).is_err());
    }

    #[test]
    fn ensemble_file_roundtrip() {
        let spec = small_ensemble(27, 3);
        let path = std::env::temp_dir().join("dimerwave_ensemble_roundtrip.txt");
        write_ensemble(&spec, Some(3), &path).unwrap();
        let back = read_ensemble(&path).unwrap();
        assert_eq!(spec.positions, back.positions);
        assert_eq!(spec.orientations, back.orientations);
        assert_eq!(spec.size, back.size);
        assert_eq!(spec.mu, back.mu);
        assert_eq!(spec.lambda, back.lambda);
        assert_eq!(spec.eta, back.eta);
        assert_eq!(spec.domain.lengths(), back.domain.lengths());
        std::fs::remove_file(&path).ok();

        let bad = std::env::temp_dir().join("dimerwave_ensemble_bad.txt");
        std::fs::write(&bad, "# dimer ensemble\n1.0 2.0 3.0\n").unwrap();
        assert!(matches!(read_ensemble(&bad), Err(Error::EnsembleParse { .. })));
        std::fs::remove_file(&bad).ok();
    }

    #[test]
    fn probe_grid_enforces_exclusion() {
        let spec = small_ensemble(8, 17);
        let z = spec.positions[0];
        let inside = z + Vec3::new(0.5 * spec.size.sqrt(), 0.0, 0.0);
        let outside = z + Vec3::new(2.0 * spec.size.sqrt(), 0.0, 0.0);
        assert!(ProbeGrid::new(vec![inside], &spec).is_err());
        let grid = ProbeGrid::new(vec![outside], &spec).unwrap();
        assert_eq!(grid.len(), 1);
        let filtered = ProbeGrid::filtered(vec![inside, outside], &spec).unwrap();
        assert_eq!(filtered.len(), 1);
        assert!(ProbeGrid::filtered(vec![inside], &spec).is_err());
    }

    #[test]
    fn identical_fields_compare_to_zero() {
        // both sides reduced to the bare incident wave: a transparent
        // microscopic ensemble against a transparent macroscopic medium
        let spec = small_ensemble(8, 29);
        let omega = C64::new(1.0, 0.0);
        let wave = IncidentWave::new(Vec3::z(), omega, C64::new(1.0, 0.0)).unwrap();
        let coeffs: Vec<ScatteringCoefficients> = spec
            .positions
            .iter()
            .zip(&spec.orientations)
            .map(|(&z, &d)| ScatteringCoefficients {
                g0: C64::new(0.0, 0.0),
                g1: CMat3::zeros(),
                omega,
                geometry: DimerGeometry::new(1.0, 5.0, spec.size, d, z).unwrap(),
                method: crate::resonance::ResonanceMethod::Asymptotic,
                near_pole: None,
            })
            .collect();
        let micro = assemble_and_solve_foldy(&spec, &coeffs, &wave).unwrap();
        let medium = quiet_medium(0.0, C64::new(1.0, 0.0), C64::new(1.0, 0.0), omega, 64.0);
        let grid = VoxelGrid::cubic(spec.domain, 8).unwrap();
        let macro_field = lippmann_schwinger_solve(&medium, &grid, &wave).unwrap();
        let candidates: Vec<Vec3> =
            (0..40).map(|i| Vec3::new(0.1 + 0.09 * i as f64, 2.0, 2.0)).collect();
        let probes = ProbeGrid::filtered(candidates, &spec).unwrap();
        let report = compare_micro_macro(&micro, &macro_field, &probes);
        assert_eq!(report.rows.len(), probes.len());
        assert!(report.relative_l2 <= 1e-12, "gap {}", report.relative_l2);
    }

    fn quiet_medium(lambda: f64, g0: C64, g1: C64, k: C64, volume: f64) -> EffectiveMedium {
        let b_tilde = Mat3::identity() * (0.5 / volume);
        effective_coefficients(lambda, 1.0 / volume, &b_tilde, g0, g1, k, k, None)
    }

    #[test]
    fn empty_medium_returns_the_incident_wave() {
        let domain = BoxRegion::cube(10.0).unwrap();
        let grid = VoxelGrid::cubic(domain, 6).unwrap();
        let k = C64::new(0.45, 0.0);
        let wave = IncidentWave::new(Vec3::new(1.0, 0.2, 0.1), k, C64::new(1.0, 0.5)).unwrap();
        let medium = quiet_medium(0.0, C64::new(-30.0, 0.0), C64::new(100.0, 0.0), k, 1000.0);
        let field = lippmann_schwinger_solve(&medium, &grid, &wave).unwrap();
        for j in [0, 57, 133, 215] {
            let x = grid.center(j);
            assert!((field.values()[j] - wave.value_at(x)).norm() <= 1e-12);
        }
        let probe = Vec3::new(3.3, 4.7, 6.1);
        assert!((field.value_at(probe) - wave.value_at(probe)).norm() <= 1e-12);
    }

    #[test]
    fn weak_coupling_follows_the_born_series() {
        let domain = BoxRegion::cube(10.0).unwrap();
        let grid = VoxelGrid::cubic(domain, 6).unwrap();
        let k = C64::new(0.45, 0.0);
        let wave = IncidentWave::new(Vec3::z(), k, C64::new(1.0, 0.0)).unwrap();
        let kernels = CellKernels::build(&grid, k);
        let coords: Vec<[usize; 3]> = (0..grid.len()).map(|i| grid.coords(i)).collect();
        let born_error = |lambda: f64| -> f64 {
            let medium = quiet_medium(lambda, C64::new(-10.0, 0.0), C64::new(0.0, 0.0), k, 1000.0);
            let field = lippmann_schwinger_solve(&medium, &grid, &wave).unwrap();
            let c0 = medium.g0_tilde * (lambda * medium.v_tilde);
            let mut gap = 0.0;
            let mut scale = 0.0;
            for j in 0..grid.len() {
                let mut born = wave.value_at(grid.center(j));
                for i in 0..grid.len() {
                    let idx = kernels.index(coords[j], coords[i]);
                    born += c0 * kernels.greens[idx] * wave.value_at(grid.center(i));
                }
                gap += (field.values()[j] - born).norm_sqr();
                scale += born.norm_sqr();
            }
            (gap / scale).sqrt()
        };
        let coarse = born_error(1.0);
        let fine = born_error(0.5);
        let ratio = coarse / fine;
        // second-order remainder: halving the coupling quarters the error
        assert!((2.8..=5.8).contains(&ratio), "Born ratio {ratio:.2}");
    }

    #[test]
    fn grid_refinement_is_self_consistent() {
        let domain = BoxRegion::cube(10.0).unwrap();
        let k = C64::new(0.45, 0.0);
        let wave = IncidentWave::new(Vec3::new(0.3, 0.5, 1.0), k, C64::new(1.0, 0.0)).unwrap();
        let medium = quiet_medium(1.0, C64::new(-30.0, 5.0), C64::new(100.0, 10.0), k, 1000.0);
        let coarse =
            lippmann_schwinger_solve(&medium, &VoxelGrid::cubic(domain, 6).unwrap(), &wave)
                .unwrap();
        let fine =
            lippmann_schwinger_solve(&medium, &VoxelGrid::cubic(domain, 12).unwrap(), &wave)
                .unwrap();
        for probe in [
            Vec3::new(2.4, 3.1, 5.2),
            Vec3::new(5.6, 7.2, 3.9),
            Vec3::new(7.1, 2.8, 6.6),
            Vec3::new(4.4, 5.5, 8.1),
        ] {
            let a = coarse.value_at(probe);
            let b = fine.value_at(probe);
            assert!((a - b).norm() <= 0.01 * b.norm(), "probe {probe:?}: {a} vs {b}");
        }
        // the wavelength precondition rejects a too-coarse grid
        let coarse_grid = VoxelGrid::cubic(domain, 4).unwrap();
        assert!(lippmann_schwinger_solve(&medium, &coarse_grid, &wave).is_err());
    }
}
