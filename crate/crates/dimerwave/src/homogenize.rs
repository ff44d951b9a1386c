//! Effective-medium description of a dilute ensemble of bubble dimers: the
//! hybridized frequencies, the coupling constants g̃⁰/g̃¹, the coefficient
//! fields of the homogenized equation `∇·M1∇u + M2 u = 0`, and the dispersion
//! of ρ_eff, κ_eff, n_eff with double-negative window detection.
//!
//! Conventions: the ensemble is parameterized by the dimer size `s`, the
//! contrast parameter `μ` with `δ = μ²s²`, and the dilution constant `Λ`.
//! Capacitance and dipole constants enter at the volume-normalized pair
//! (unit ball volumes); resonances enter at the actual size.

use crate::geom::{complex_mat, CMat3, Mat3, Vec3};
use crate::layerpot::CapacitanceSet;
use crate::resonance::{ResonanceMethod, ResonancePair};
use crate::{C64, Error, Result};

/// Near-pole flags on sweep points: the monopole denominator `1 − ω1²/ω²`
/// below this magnitude, or the dipole denominator below this fraction of
/// `|ω2|²`.
const MONOPOLE_POLE_TOL: f64 = 5e-2;
const DIPOLE_POLE_TOL: f64 = 1e-2;

// ---------------------------------------------------------------------------
// ensemble description
// ---------------------------------------------------------------------------

/// Axis-aligned box with one corner at the origin.
#[derive(Debug, Clone, Copy)]
pub struct BoxRegion {
    lengths: Vec3,
}

impl BoxRegion {
    pub fn new(lengths: Vec3) -> Result<Self> {
        if !(lengths.x > 0.0 && lengths.y > 0.0 && lengths.z > 0.0) || !lengths.norm().is_finite()
        {
            return Err(Error::invalid(
                "box region",
                format!("side lengths ({}, {}, {})", lengths.x, lengths.y, lengths.z),
            ));
        }
        Ok(Self { lengths })
    }

    pub fn cube(side: f64) -> Result<Self> {
        Self::new(Vec3::new(side, side, side))
    }

    pub fn lengths(&self) -> Vec3 {
        self.lengths
    }

    pub fn volume(&self) -> f64 {
        self.lengths.x * self.lengths.y * self.lengths.z
    }

    pub fn center(&self) -> Vec3 {
        0.5 * self.lengths
    }

    pub fn contains(&self, x: Vec3) -> bool {
        (0.0..=self.lengths.x).contains(&x.x)
            && (0.0..=self.lengths.y).contains(&x.y)
            && (0.0..=self.lengths.z).contains(&x.z)
    }
}

/// A realized ensemble of dimers: placement, orientation, and the scaling
/// parameters that tie the microscopic pair to the macroscopic medium.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub domain: BoxRegion,
    /// Dimer size `s`.
    pub size: f64,
    /// Contrast parameter `μ`; the density contrast is `δ = μ²s²`.
    pub mu: f64,
    /// Dilution constant `Λ`. Nominally `s·N`; kept independent because the
    /// reproduction runs override it.
    pub lambda: f64,
    /// Minimum-separation constant: centers stay `η·N^{-1/3}` apart.
    pub eta: f64,
    pub positions: Vec<Vec3>,
    pub orientations: Vec<Vec3>,
}

impl EnsembleSpec {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.mu * self.mu * self.size * self.size
    }

    /// Smallest center separation scaled by `N^{1/3}`; infinite for N < 2.
    pub fn measured_eta(&self) -> f64 {
        let n = self.positions.len();
        let mut min_sep = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                min_sep = min_sep.min((self.positions[i] - self.positions[j]).norm());
            }
        }
        min_sep * (n as f64).cbrt()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("size", self.size), ("mu", self.mu), ("lambda", self.lambda), ("eta", self.eta)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid("ensemble", format!("{name} = {v}")));
            }
        }
        if self.positions.is_empty() {
            return Err(Error::invalid("ensemble", "no dimers"));
        }
        if self.positions.len() != self.orientations.len() {
            return Err(Error::invalid(
                "ensemble",
                format!(
                    "{} positions vs {} orientations",
                    self.positions.len(),
                    self.orientations.len()
                ),
            ));
        }
        for (j, z) in self.positions.iter().enumerate() {
            if !self.domain.contains(*z) {
                return Err(Error::invalid(
                    "ensemble",
                    format!("dimer {j} at ({}, {}, {}) lies outside the domain", z.x, z.y, z.z),
                ));
            }
        }
        for (j, d) in self.orientations.iter().enumerate() {
            if (d.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::invalid(
                    "ensemble",
                    format!("orientation {j} has length {}", d.norm()),
                ));
            }
        }
        if self.positions.len() >= 2 {
            let measured = self.measured_eta();
            if measured < self.eta {
                return Err(Error::invalid(
                    "ensemble",
                    format!("separation constant {measured:.6} below the required {}", self.eta),
                ));
            }
        }
        Ok(())
    }
}

/// Density and orientation-moment estimates of an ensemble: the uniform-fit
/// number density `1/|Ω|` and the raw second moment `(1/(N|Ω|)) Σ d_j d_jᵀ`.
pub fn ensemble_statistics(spec: &EnsembleSpec) -> (f64, Mat3) {
    let volume = spec.domain.volume();
    let n = spec.orientations.len() as f64;
    let mut moment = Mat3::zeros();
    for d in &spec.orientations {
        moment += d * d.transpose();
    }
    (1.0 / volume, moment / (n * volume))
}

/// Isotropic-orientation convention for B̃.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrientationMoment {
    /// Transverse-averaged convention: `B̃ = I/(2|Ω|)`.
    Half,
    /// Full second moment of a uniformly distributed unit vector:
    /// `B̃ = I/(3|Ω|)`.
    Third,
}

/// `B̃` for uniformly random orientations in a domain of the given volume.
pub fn isotropic_orientation_moment(volume: f64, convention: OrientationMoment) -> Mat3 {
    let factor = match convention {
        OrientationMoment::Half => 0.5,
        OrientationMoment::Third => 1.0 / 3.0,
    };
    Mat3::identity() * (factor / volume)
}

// ---------------------------------------------------------------------------
// coupling constants
// ---------------------------------------------------------------------------

/// Leading hybridized frequencies `ω_{M,j} = v_b μ √(C11 ± C12)` of the pair
/// under the contrast scaling `δ = μ²s²`; `caps` at unit ball volumes.
pub fn hybridized_frequencies(mu: f64, caps: &CapacitanceSet, v_b: f64) -> Result<(f64, f64)> {
    if !(mu > 0.0 && mu.is_finite()) || !(v_b > 0.0 && v_b.is_finite()) {
        return Err(Error::invalid("hybridized frequencies", format!("mu = {mu}, v_b = {v_b}")));
    }
    // checked directly instead of CapacitanceSet::validate so that the
    // degenerate decoupled pair (C12 = 0) stays admissible
    let sum = caps.c11 + caps.c12;
    let diff = caps.c11 - caps.c12;
    if !(sum > 0.0 && diff > 0.0 && sum.is_finite()) {
        return Err(Error::invalid(
            "hybridized frequencies",
            format!("C11 ± C12 = {sum}, {diff} must both be positive"),
        ));
    }
    let low = v_b * mu * sum.sqrt();
    let high = v_b * mu * diff.sqrt();
    if high < low {
        return Err(Error::invalid(
            "hybridized frequencies",
            format!("ordering violated: {high} < {low} (C12 = {} > 0)", caps.c12),
        ));
    }
    Ok((low, high))
}

/// Detuned coupling constants of the dilute medium at `ω = ω_{M,2} + a s²`:
///
/// `g̃⁰ = 2(C11+C12)/(1 − ω²_{M,1}/ω²_{M,2})`,
/// `g̃¹ = μ² v_b² P² / (2 |D| ω_{M,2} (μ³η̂1 − a))`.
///
/// `caps` must carry the dipole constant `P`, both at unit ball volumes;
/// `volume` is `|D|` (both balls; 2 at that normalization); `eta_hat1` is the
/// real second-order coefficient of the antisymmetric resonance. The detuning
/// must avoid `a = μ³η̂1`, where g̃¹ diverges and flips sign.
pub fn tilde_constants(
    mu: f64,
    a: f64,
    caps: &CapacitanceSet,
    volume: f64,
    v_b: f64,
    eta_hat1: f64,
) -> Result<(f64, f64)> {
    let (low, high) = hybridized_frequencies(mu, caps, v_b)?;
    let p = caps
        .p
        .ok_or_else(|| Error::invalid("coupling constants", "capacitance set lacks the dipole constant"))?;
    if !(volume > 0.0 && volume.is_finite()) {
        return Err(Error::invalid("coupling constants", format!("volume = {volume}")));
    }
    if low == high {
        return Err(Error::invalid("coupling constants", "degenerate pair (C12 = 0)"));
    }
    let detune = mu.powi(3) * eta_hat1 - a;
    if detune == 0.0 || !detune.is_finite() {
        return Err(Error::invalid(
            "coupling constants",
            format!("detuning a = {a} sits on the pole a = μ³η̂1"),
        ));
    }
    let g0 = 2.0 * (caps.c11 + caps.c12) / (1.0 - (low / high).powi(2));
    let g1 = mu * mu * v_b * v_b * p * p / (2.0 * volume * high * detune);
    Ok((g0, g1))
}

/// Frequency-dependent coupling constants of the dilute medium:
///
/// `g̃⁰(ω) = 2(C11+C12)/(1 − ω1²/ω²)`,
/// `g̃¹(ω) = δ v_b² P² / (2(ω2² − ω²))`,
///
/// with capacitance and dipole constants of the volume-normalized pair and
/// the complex resonances `ω1, ω2` of the pair at its actual size.
#[derive(Debug, Clone, Copy)]
pub struct DispersionModel {
    monopole_sum: f64,
    dipole_constant: f64,
    pub omega1: C64,
    pub omega2: C64,
    pub delta: f64,
    pub v_b: f64,
    pub method: ResonanceMethod,
}

impl DispersionModel {
    pub fn new(caps: &CapacitanceSet, resonances: &ResonancePair, delta: f64, v_b: f64) -> Result<Self> {
        caps.validate()?;
        let p = caps
            .p
            .ok_or_else(|| Error::invalid("dispersion model", "capacitance set lacks the dipole constant"))?;
        if !(delta > 0.0 && delta.is_finite()) || !(v_b > 0.0 && v_b.is_finite()) {
            return Err(Error::invalid("dispersion model", format!("delta = {delta}, v_b = {v_b}")));
        }
        Ok(Self {
            monopole_sum: 2.0 * (caps.c11 + caps.c12),
            dipole_constant: p,
            omega1: resonances.omega1,
            omega2: resonances.omega2,
            delta,
            v_b,
            method: resonances.method,
        })
    }

    pub fn g0_at(&self, omega: C64) -> Result<C64> {
        if !(omega.is_finite() && omega.norm() > 0.0) {
            return Err(Error::invalid("frequency", format!("omega = {omega}")));
        }
        let denom = C64::new(1.0, 0.0) - self.omega1 * self.omega1 / (omega * omega);
        if denom.norm() == 0.0 {
            return Err(Error::invalid("frequency", format!("omega = {omega} sits on a pole")));
        }
        Ok(self.monopole_sum / denom)
    }

    pub fn g1_at(&self, omega: C64) -> Result<C64> {
        if !omega.is_finite() {
            return Err(Error::invalid("frequency", format!("omega = {omega}")));
        }
        let denom = self.omega2 * self.omega2 - omega * omega;
        if denom.norm() == 0.0 {
            return Err(Error::invalid("frequency", format!("omega = {omega} sits on a pole")));
        }
        Ok(self.delta * self.v_b * self.v_b * self.dipole_constant * self.dipole_constant
            / (2.0 * denom))
    }

    /// Whether a sweep point sits close enough to a resonance for the
    /// coupling constants to be pole-dominated.
    pub fn near_pole(&self, omega: C64) -> bool {
        let monopole = C64::new(1.0, 0.0) - self.omega1 * self.omega1 / (omega * omega);
        let dipole = self.omega2 * self.omega2 - omega * omega;
        monopole.norm() < MONOPOLE_POLE_TOL
            || dipole.norm() < DIPOLE_POLE_TOL * self.omega2.norm_sqr()
    }
}

// ---------------------------------------------------------------------------
// homogenized coefficients
// ---------------------------------------------------------------------------

/// Sign pattern of `(Re ρ_eff, Re κ_eff)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    DoublePositive,
    NegativeDensity,
    NegativeModulus,
    DoubleNegative,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::DoublePositive => "double-positive",
            Regime::NegativeDensity => "single-negative-density",
            Regime::NegativeModulus => "single-negative-modulus",
            Regime::DoubleNegative => "double-negative",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Coefficients of the homogenized equation inside the ensemble's domain and
/// the effective material parameters read off from them.
#[derive(Debug, Clone, Copy)]
pub struct EffectiveMedium {
    pub g0_tilde: C64,
    pub g1_tilde: C64,
    pub v_tilde: f64,
    pub b_tilde: Mat3,
    pub lambda: f64,
    pub omega: C64,
    pub k: C64,
    /// Detuning `a` of the constant-coefficient form; `None` for the
    /// frequency-dependent form.
    pub detuning: Option<f64>,
    /// `I − Λ g̃¹ B̃` inside the domain.
    pub m1: CMat3,
    /// `k² − Λ g̃⁰ Ṽ` inside the domain.
    pub m2: C64,
    /// Scalar reduction of M1: `1 − Λ g̃¹ tr(B̃)/3`.
    pub rho_eff: C64,
    /// `k²/M2`, the reciprocal of the modulus coefficient.
    pub kappa_eff: C64,
    /// `√ρ_eff √(κ_eff⁻¹)` on the passive branch (`Im ≥ 0`), taking the
    /// negative-refraction root in the double-negative regime.
    pub n_eff: C64,
    /// Whether passivity forced a conjugation of the square-root branch.
    pub branch_flipped: bool,
    pub regime: Regime,
}

impl EffectiveMedium {
    /// `M1` as a field: the homogenized value inside, identity outside.
    pub fn m1_at(&self, x: Vec3, domain: &BoxRegion) -> CMat3 {
        if domain.contains(x) {
            self.m1
        } else {
            CMat3::identity()
        }
    }

    /// `M2` as a field: the homogenized value inside, `k²` outside.
    pub fn m2_at(&self, x: Vec3, domain: &BoxRegion) -> C64 {
        if domain.contains(x) {
            self.m2
        } else {
            self.k * self.k
        }
    }
}

/// Assembles the homogenized coefficients for given coupling constants.
#[allow(clippy::too_many_arguments)]
pub fn effective_coefficients(
    lambda: f64,
    v_tilde: f64,
    b_tilde: &Mat3,
    g0: C64,
    g1: C64,
    omega: C64,
    k: C64,
    detuning: Option<f64>,
) -> EffectiveMedium {
    let m1 = CMat3::identity() - complex_mat(*b_tilde) * (g1 * lambda);
    let m2 = k * k - lambda * v_tilde * g0;
    let b_scalar = b_tilde.trace() / 3.0;
    let rho_eff = C64::new(1.0, 0.0) - lambda * b_scalar * g1;
    let kappa_eff = k * k / m2;
    let regime = match (rho_eff.re < 0.0, kappa_eff.re < 0.0) {
        (false, false) => Regime::DoublePositive,
        (true, false) => Regime::NegativeDensity,
        (false, true) => Regime::NegativeModulus,
        (true, true) => Regime::DoubleNegative,
    };
    // Principal square roots keep Re n > 0 for any ρ, κ on this model's
    // half-planes; a double-negative medium refracts on the opposite root,
    // so that regime takes the negated branch. Passivity then pins the sign
    // of the imaginary part by conjugation.
    let principal = rho_eff.sqrt() * (C64::new(1.0, 0.0) / kappa_eff).sqrt();
    let oriented = if regime == Regime::DoubleNegative { -principal } else { principal };
    let branch_flipped = oriented.im < 0.0;
    let n_eff = if branch_flipped { oriented.conj() } else { oriented };
    EffectiveMedium {
        g0_tilde: g0,
        g1_tilde: g1,
        v_tilde,
        b_tilde: *b_tilde,
        lambda,
        omega,
        k,
        detuning,
        m1,
        m2,
        rho_eff,
        kappa_eff,
        n_eff,
        branch_flipped,
        regime,
    }
}

/// Dilution threshold above which the density coefficient flips sign at
/// fixed coupling: `Λ* = 1/(Re g̃¹ · tr(B̃)/3)` when that is positive.
pub fn lambda_density_threshold(g1: C64, b_tilde: &Mat3) -> Option<f64> {
    let slope = g1.re * b_tilde.trace() / 3.0;
    (slope > 0.0).then(|| 1.0 / slope)
}

/// One row of a dispersion sweep.
#[derive(Debug, Clone, Copy)]
pub struct DispersionPoint {
    pub omega: f64,
    pub medium: EffectiveMedium,
    /// Pole-adjacent points are flagged, not dropped.
    pub near_pole: bool,
}

/// Effective parameters over a real frequency grid, using the
/// frequency-dependent coupling constants.
pub fn dispersion_sweep(
    model: &DispersionModel,
    lambda: f64,
    v_tilde: f64,
    b_tilde: &Mat3,
    wave_speed: f64,
    omegas: &[f64],
) -> Result<Vec<DispersionPoint>> {
    if !(wave_speed > 0.0 && wave_speed.is_finite()) {
        return Err(Error::invalid("dispersion sweep", format!("wave speed {wave_speed}")));
    }
    omegas
        .iter()
        .map(|&w| {
            let omega = C64::new(w, 0.0);
            let g0 = model.g0_at(omega)?;
            let g1 = model.g1_at(omega)?;
            let k = omega / wave_speed;
            let medium = effective_coefficients(lambda, v_tilde, b_tilde, g0, g1, omega, k, None);
            Ok(DispersionPoint { omega: w, medium, near_pole: model.near_pole(omega) })
        })
        .collect()
}
