//! Scattering of a plane wave by the bubble pair.
//!
//! Two views of the same field: a point approximation that collapses the pair
//! to a monopole plus a dipole anchored at its center,
//!
//! `u - u^in ≈ g⁰ u^in(z) G(x - z, k) + ∇u^in(z) · g¹ ∇G(x - z, k)`,
//!
//! whose strengths `g⁰`, `g¹` blow up at the symmetric and antisymmetric
//! resonance respectively, and the converged boundary-integral solution the
//! approximation is measured against.

use std::f64::consts::PI;

use ndarray::{s, Array1};

use crate::basis::{MultipoleBasis, SurfaceDensity};
use crate::geom::{
    complex_mat, complex_vec, CMat3, CVec3, DimerGeometry, Frame, Mat3, SphereCluster, Vec3,
};
use crate::layerpot::{
    axial_cluster, eval_helmholtz_single_layer, i_pow, sigma_factors, static_polarizability,
    transmission_matrix, CapacitanceSet, MediumParams,
};
use crate::linalg;
use crate::resonance::{ModeKind, ResonanceMethod, ResonancePair};
use crate::specfun::{sph_harm_row, spherical_bessel_j_all, spherical_deriv};
use crate::{C64, Error, Result};

const FOUR_PI: f64 = 4.0 * PI;
/// Within this relative distance of a resonance the point strengths are
/// flagged as near a pole.
const NEAR_POLE_TOL: f64 = 1e-6;

// ---------------------------------------------------------------------------
// outgoing kernel
// ---------------------------------------------------------------------------

/// Outgoing kernel `G(x, k) = -e^{ik|x|}/(4π|x|)`; `x` away from the origin.
pub fn green(x: Vec3, k: C64) -> C64 {
    let r = x.norm();
    -(C64::i() * k * r).exp() / (FOUR_PI * r)
}

/// Gradient `∇ₓG(x, k)`.
pub fn green_gradient(x: Vec3, k: C64) -> CVec3 {
    let r = x.norm();
    let ikr = C64::i() * k * r;
    let radial = ikr.exp() * (C64::new(1.0, 0.0) - ikr) / (FOUR_PI * r * r);
    complex_vec(x / r) * radial
}

/// Hessian `∇ₓ∇ₓᵀG(x, k)`; its trace is `-k² G` away from the origin.
pub fn green_hessian(x: Vec3, k: C64) -> CMat3 {
    let r = x.norm();
    let ikr = C64::i() * k * r;
    let e = ikr.exp();
    let gp = e * (C64::new(1.0, 0.0) - ikr) / (FOUR_PI * r * r);
    let gpp = e * (k * k * r * r - 2.0 + 2.0 * ikr) / (FOUR_PI * r * r * r);
    let unit = complex_vec(x / r);
    let outer = unit * unit.transpose();
    outer * (gpp - gp / r) + CMat3::identity() * (gp / r)
}

// ---------------------------------------------------------------------------
// incident field
// ---------------------------------------------------------------------------

/// Monochromatic plane wave `amplitude · e^{ik θ·x}` (world frame).
#[derive(Debug, Clone, Copy)]
pub struct IncidentWave {
    direction: Vec3,
    pub wavenumber: C64,
    pub amplitude: C64,
}

impl IncidentWave {
    /// `direction` is normalized; it must not vanish.
    pub fn new(direction: Vec3, wavenumber: C64, amplitude: C64) -> Result<Self> {
        let norm = direction.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid(
                "incident wave",
                format!("direction ({}, {}, {}) is not normalizable", direction.x, direction.y, direction.z),
            ));
        }
        if !wavenumber.is_finite() || !amplitude.is_finite() {
            return Err(Error::invalid(
                "incident wave",
                format!("wavenumber {wavenumber}, amplitude {amplitude}"),
            ));
        }
        Ok(Self { direction: direction / norm, wavenumber, amplitude })
    }

    /// Unit propagation direction.
    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn value_at(&self, x: Vec3) -> C64 {
        self.amplitude * (C64::i() * self.wavenumber * self.direction.dot(&x)).exp()
    }

    pub fn gradient_at(&self, x: Vec3) -> CVec3 {
        complex_vec(self.direction) * (C64::i() * self.wavenumber * self.value_at(x))
    }
}

// ---------------------------------------------------------------------------
// point approximation
// ---------------------------------------------------------------------------

/// Monopole and dipole strengths of the point approximation at one frequency.
#[derive(Debug, Clone, Copy)]
pub struct ScatteringCoefficients {
    pub g0: C64,
    /// Symmetric; its resonant part is the dyad on the pair axis.
    pub g1: CMat3,
    pub omega: C64,
    pub geometry: DimerGeometry,
    /// How the resonance pair behind the denominators was obtained.
    pub method: ResonanceMethod,
    /// Set when `omega` sits within relative 1e-6 of a resonance.
    pub near_pole: Option<ModeKind>,
}

/// Frequency-independent ingredients of the point approximation: monopole
/// and dipole coupling constants, static polarizability, and the resonance
/// pair, all at the actual size and placement of the dimer.
#[derive(Debug, Clone)]
pub struct DimerPointModel {
    geometry: DimerGeometry,
    resonances: ResonancePair,
    monopole_strength: f64,
    dipole_constant: f64,
    polarizability: Mat3,
    delta: f64,
    v_b: f64,
}

impl DimerPointModel {
    /// `caps` must carry the dipole constant (`CapacitanceSet::with_dipole`)
    /// and be evaluated at the actual size of `geom`, like `resonances`.
    pub fn new(
        geom: &DimerGeometry,
        params: &MediumParams,
        caps: &CapacitanceSet,
        resonances: &ResonancePair,
    ) -> Result<Self> {
        caps.validate()?;
        let dipole_constant = caps
            .p
            .ok_or_else(|| Error::invalid("point model", "capacitance set lacks the dipole constant"))?;
        Ok(Self {
            geometry: *geom,
            resonances: resonances.clone(),
            monopole_strength: 2.0 * (caps.c11 + caps.c12),
            dipole_constant,
            polarizability: static_polarizability(geom)?,
            delta: params.delta(),
            v_b: params.v_b(),
        })
    }

    pub fn resonances(&self) -> &ResonancePair {
        &self.resonances
    }

    /// Strengths at `omega`. The monopole has its pole at the symmetric
    /// resonance; the axis component of the dipole strength has its pole at
    /// the antisymmetric one. Exactly on a pole (or at `omega = 0`) the
    /// strengths are undefined and an error is returned.
    pub fn at(&self, omega: C64) -> Result<ScatteringCoefficients> {
        if !(omega.is_finite() && omega.norm() > 0.0) {
            return Err(Error::invalid("frequency", format!("omega = {omega}")));
        }
        let w1 = self.resonances.omega1;
        let w2 = self.resonances.omega2;
        let monopole_denom = C64::new(1.0, 0.0) - w1 * w1 / (omega * omega);
        let dipole_denom = w2 * w2 - omega * omega;
        if monopole_denom.norm() == 0.0 || dipole_denom.norm() == 0.0 {
            return Err(Error::invalid("frequency", format!("omega = {omega} sits on a pole")));
        }
        let strength = self.delta * self.v_b * self.v_b * self.dipole_constant
            * self.dipole_constant
            / (self.geometry.total_volume() * dipole_denom);
        let axis = complex_vec(self.geometry.orientation);
        let near_pole = if (omega - w1).norm() <= NEAR_POLE_TOL * w1.norm() {
            Some(ModeKind::Symmetric)
        } else if (omega - w2).norm() <= NEAR_POLE_TOL * w2.norm() {
            Some(ModeKind::Antisymmetric)
        } else {
            None
        };
        Ok(ScatteringCoefficients {
            g0: self.monopole_strength / monopole_denom,
            g1: complex_mat(self.polarizability) + axis * axis.transpose() * strength,
            omega,
            geometry: self.geometry,
            method: self.resonances.method,
            near_pole,
        })
    }
}

/// One-shot point strengths at `omega`; see [`DimerPointModel`].
pub fn scattering_coefficients(
    geom: &DimerGeometry,
    params: &MediumParams,
    caps: &CapacitanceSet,
    resonances: &ResonancePair,
    omega: C64,
) -> Result<ScatteringCoefficients> {
    DimerPointModel::new(geom, params, caps, resonances)?.at(omega)
}

/// Point approximation of the scattered field at `x` (world frame): a
/// monopole plus a dipole anchored at the dimer center.
pub fn point_scattered_field(coeffs: &ScatteringCoefficients, wave: &IncidentWave, x: Vec3) -> C64 {
    let z = coeffs.geometry.center;
    point_response(coeffs, wave.value_at(z), &wave.gradient_at(z), wave.wavenumber, x)
}

/// Point response to a prescribed local excitation `(value, gradient)` at the
/// dimer center, as used by the multi-dimer self-consistent system.
pub(crate) fn point_response(
    coeffs: &ScatteringCoefficients,
    value: C64,
    gradient: &CVec3,
    k: C64,
    x: Vec3,
) -> C64 {
    let z = coeffs.geometry.center;
    let monopole = coeffs.g0 * value * green(x - z, k);
    let dipole = (coeffs.g1 * green_gradient(x - z, k)).dot(gradient);
    monopole + dipole
}

// ---------------------------------------------------------------------------
// boundary-integral solution
// ---------------------------------------------------------------------------

/// Converged Galerkin solution of the two-density transmission problem for
/// one incident plane wave: interior and exterior densities on the spheres.
#[derive(Debug, Clone)]
pub struct ClusterScattering {
    frame: Frame,
    cluster: SphereCluster,
    wave: IncidentWave,
    omega: C64,
    k: C64,
    k_b: C64,
    interior: SurfaceDensity,
    exterior: SurfaceDensity,
}

impl ClusterScattering {
    /// Solves for a cluster given in world coordinates.
    pub fn solve(
        cluster: &SphereCluster,
        params: &MediumParams,
        wave: &IncidentWave,
        n_max: usize,
    ) -> Result<Self> {
        let frame = Frame { rotation: Mat3::identity(), center: Vec3::zeros() };
        Self::solve_in_frame(frame, cluster.clone(), params, wave, n_max)
    }

    /// Solves for a dimer, assembling in its own axial frame.
    pub fn solve_dimer(
        geom: &DimerGeometry,
        params: &MediumParams,
        wave: &IncidentWave,
        n_max: usize,
    ) -> Result<Self> {
        Self::solve_in_frame(geom.frame(), axial_cluster(geom), params, wave, n_max)
    }

    fn solve_in_frame(
        frame: Frame,
        cluster: SphereCluster,
        params: &MediumParams,
        wave: &IncidentWave,
        n_max: usize,
    ) -> Result<Self> {
        let k = wave.wavenumber;
        if k.norm() == 0.0 {
            return Err(Error::invalid("incident wave", "zero wavenumber"));
        }
        let omega = k * params.v();
        let matrix = transmission_matrix(&cluster, params, omega, n_max)?;
        // incident data in frame coordinates: the wave picks up the phase of
        // the frame center and a rotated propagation direction
        let direction = frame.dir_to_local(wave.direction());
        let amplitude = wave.value_at(frame.center);
        let (vals, ders) = plane_wave_surface_data(&cluster, k, direction, amplitude, n_max);
        let p = vals.len();
        let mut rhs = Array1::<C64>::zeros(2 * p);
        rhs.slice_mut(s![..p]).assign(&vals);
        rhs.slice_mut(s![p..]).assign(&ders.mapv(|z| params.delta() * z));
        let sol = match linalg::solve(&matrix, &rhs, "plane-wave transmission") {
            Ok(sol) => sol,
            Err(err) => {
                if let Ok((smin, smax, _)) = linalg::min_singular(&matrix, "plane-wave transmission")
                {
                    return Err(Error::Singular {
                        context: "plane-wave transmission",
                        rcond: smin / smax,
                    });
                }
                return Err(err);
            }
        };
        let basis = MultipoleBasis::new(cluster.len(), n_max);
        let interior = SurfaceDensity::from_coeffs(basis, sol.slice(s![..p]).to_owned());
        let exterior = SurfaceDensity::from_coeffs(basis, sol.slice(s![p..]).to_owned());
        Ok(Self { frame, cluster, wave: *wave, omega, k, k_b: params.k_b(omega), interior, exterior })
    }

    pub fn omega(&self) -> C64 {
        self.omega
    }

    /// Scattered field at an exterior point `x` (world frame).
    pub fn scattered_at(&self, x: Vec3) -> Result<C64> {
        eval_helmholtz_single_layer(&self.cluster, &self.exterior, self.k, self.frame.to_local(x))
    }

    /// Total field at a point inside either inclusion (world frame).
    pub fn interior_at(&self, x: Vec3) -> Result<C64> {
        eval_helmholtz_single_layer(&self.cluster, &self.interior, self.k_b, self.frame.to_local(x))
    }

    /// Incident plus scattered field at an exterior point.
    pub fn total_at(&self, x: Vec3) -> Result<C64> {
        Ok(self.wave.value_at(x) + self.scattered_at(x)?)
    }

    /// Far-field amplitude about the world origin:
    /// `u - u^in → f(x̂) e^{ik|x|}/|x|` as `|x| → ∞`.
    pub fn far_field(&self, direction: Vec3) -> Result<C64> {
        let norm = direction.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("far field", "direction is not normalizable"));
        }
        let dir = direction / norm;
        let local = self.frame.dir_to_local(dir);
        let n_max = self.exterior.basis.n_max;
        let (ct, phi) = direction_angles(local);
        let row = sph_harm_row(n_max, ct, phi);
        let mut f = C64::new(0.0, 0.0);
        for (j, sphere) in self.cluster.spheres().iter().enumerate() {
            let center_world = self.frame.to_world(sphere.center);
            let phase = (-C64::i() * self.k * dir.dot(&center_world)).exp();
            let sigma = sigma_factors(self.k, sphere.radius, n_max);
            for idx in self.exterior.basis.modes() {
                f += phase
                    * self.exterior.get(j, idx)
                    * sigma[idx.n]
                    * i_pow(idx.n + 1).conj()
                    * row[idx.flat()];
            }
        }
        Ok(f / self.k)
    }

    pub fn interior_density(&self) -> &SurfaceDensity {
        &self.interior
    }

    pub fn exterior_density(&self) -> &SurfaceDensity {
        &self.exterior
    }
}

/// Boundary-integral scattered field of the dimer at a single point.
/// For fields at many points solve once via [`ClusterScattering::solve_dimer`].
pub fn full_scattered_field(
    geom: &DimerGeometry,
    params: &MediumParams,
    wave: &IncidentWave,
    n_max: usize,
    x: Vec3,
) -> Result<C64> {
    ClusterScattering::solve_dimer(geom, params, wave, n_max)?.scattered_at(x)
}

/// Values and normal derivatives of `amplitude · e^{ik d·x}` on each sphere
/// surface, expanded in the cluster's multipole basis. `direction` must be a
/// unit vector in cluster coordinates.
pub(crate) fn plane_wave_surface_data(
    cluster: &SphereCluster,
    k: C64,
    direction: Vec3,
    amplitude: C64,
    n_max: usize,
) -> (Array1<C64>, Array1<C64>) {
    let basis = MultipoleBasis::new(cluster.len(), n_max);
    let mut vals = Array1::<C64>::zeros(basis.len());
    let mut ders = Array1::<C64>::zeros(basis.len());
    let (ct, phi) = direction_angles(direction);
    let row = sph_harm_row(n_max, ct, phi);
    for (j, sphere) in cluster.spheres().iter().enumerate() {
        let phase = amplitude * (C64::i() * k * direction.dot(&sphere.center)).exp();
        let bessel = spherical_bessel_j_all(n_max, k * sphere.radius);
        let deriv = spherical_deriv(&bessel, k * sphere.radius);
        for idx in basis.modes() {
            let coef = phase * FOUR_PI * i_pow(idx.n) * row[idx.flat()].conj();
            vals[basis.index(j, idx)] = coef * bessel[idx.n];
            ders[basis.index(j, idx)] = coef * k * deriv[idx.n];
        }
    }
    (vals, ders)
}

/// Polar cosine and azimuth of a unit vector.
fn direction_angles(unit: Vec3) -> (f64, f64) {
    (unit.z.clamp(-1.0, 1.0), unit.y.atan2(unit.x))
}
