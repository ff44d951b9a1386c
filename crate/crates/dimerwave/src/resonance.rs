//! Hybridized resonances of the bubble pair: closed-form expansions in the
//! density contrast and exact characteristic values of the truncated
//! boundary-integral system, located with Muller's method.
//!
//! The expansion coefficients are intrinsic to the shape of the pair. They
//! are evaluated on the volume-normalized dimer (both ball volumes equal 1)
//! and carried to other sizes through the exact law `ω(s·D) = ω(D)/s`.

use std::f64::consts::PI;

use ndarray::{s, Array1, Array2};
use ndarray_linalg::Eig;

use crate::basis::{MultipoleBasis, SurfaceDensity};
use crate::geom::DimerGeometry;
use crate::layerpot::{
    axial_cluster, build_layer_operators, build_low_freq_terms, capacitance_numeric, signed_pair,
    solve_psi12, transmission_matrix, CapacitanceSet, MediumParams,
};
use crate::{linalg, C64, Error, Result};

const MULLER_MAX_ITER: usize = 100;
const MULLER_STEP_TOL: f64 = 1e-12;
const MULLER_RESIDUAL_TOL: f64 = 1e-10;
/// Relative offset of the two Muller seed points around a guess.
const GUESS_SPREAD: f64 = 1e-4;
/// Roots closer than this (relative) are reported as a collision.
const COLLISION_TOL: f64 = 1e-8;
/// The expansions assume a small contrast; beyond this they are meaningless.
const CONTRAST_CAP: f64 = 0.1;

/// How a [`ResonancePair`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceMethod {
    /// Closed-form expansion in the contrast.
    Asymptotic,
    /// Root search on the determinant of the truncated transmission system.
    RootFound,
}

/// Phase relation of the two ball densities in a resonant mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    /// Both balls breathe in phase (lower frequency).
    Symmetric,
    /// Opposite phases: the anti-resonance.
    Antisymmetric,
}

/// Nullspace diagnostics attached to a root-found resonance.
#[derive(Debug, Clone)]
pub struct ResonanceMode {
    pub kind: ModeKind,
    /// Cosine of the interior-density block against `ψ1 ± ψ2`; near 1 for a
    /// cleanly classified mode.
    pub alignment: f64,
    /// Interior-density part of the right singular vector at `σ_min`.
    pub interior_density: SurfaceDensity,
}

/// The two hybridized resonances, ordered by increasing real part.
#[derive(Debug, Clone)]
pub struct ResonancePair {
    pub omega1: C64,
    pub omega2: C64,
    pub method: ResonanceMethod,
    /// Multipole truncation behind the values (`None` for closed forms).
    pub n_max: Option<usize>,
    /// `σ_min/σ_max` of the transmission system at each root (root-found).
    pub residuals: [Option<f64>; 2],
    /// Mode classification at each root (root-found).
    pub modes: Option<[ResonanceMode; 2]>,
}

impl ResonancePair {
    /// Orders the roots by real part and enforces the sign constraints:
    /// both real parts positive and separated, both modes decaying.
    fn checked(
        roots: [(C64, Option<f64>, Option<ResonanceMode>); 2],
        method: ResonanceMethod,
        n_max: Option<usize>,
    ) -> Result<Self> {
        let [mut lo, mut hi] = roots;
        if hi.0.re < lo.0.re {
            std::mem::swap(&mut lo, &mut hi);
        }
        for (omega, _, _) in [&lo, &hi] {
            if !(omega.re > 0.0) {
                return Err(Error::invalid(
                    "resonance pair",
                    format!("root {omega} has a non-positive real part"),
                ));
            }
            if omega.im > 1e-12 * omega.norm() {
                return Err(Error::invalid(
                    "resonance pair",
                    format!("root {omega} is not a decaying mode"),
                ));
            }
        }
        if !(hi.0.re > lo.0.re) {
            return Err(Error::invalid(
                "resonance pair",
                format!("roots {} and {} do not separate", lo.0, hi.0),
            ));
        }
        let modes = match (lo.2.take(), hi.2.take()) {
            (Some(first), Some(second)) => Some([first, second]),
            _ => None,
        };
        Ok(ResonancePair {
            omega1: lo.0,
            omega2: hi.0,
            method,
            n_max,
            residuals: [lo.1, hi.1],
            modes,
        })
    }
}

/// Shape-intrinsic expansion coefficients at unit ball volume.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticCoefficients {
    /// Radiative damping prefactor of the symmetric mode: `Im ω1 = -τ1 δ`.
    pub tau1: f64,
    /// Leading coefficient of the anti-resonance: `Re ω2 = η0 √δ + ...`.
    pub eta0: f64,
    /// Coefficient of `δ^{3/2}` in `Re ω2`.
    pub eta_hat1: f64,
    /// Coefficient of `δ²` in `Im ω2`; negative for a decaying mode.
    pub eta_hat2: f64,
}

/// Volume-normalized copy of the pair (unit ball volumes) and the factor `s`
/// such that `geom = s · reference`. Frequencies obey `ω(geom) = ω(reference)/s`.
pub fn unit_volume_shape(geom: &DimerGeometry) -> (DimerGeometry, f64) {
    let r_hat = (3.0 / (4.0 * PI)).cbrt();
    let scale = geom.ball_radius() / r_hat;
    let reference = DimerGeometry::normalized(r_hat, geom.d0 / geom.r0 * r_hat)
        .expect("a validated pair yields a valid reference shape");
    (reference, scale)
}

/// Closed-form resonance pair from the capacitance coefficients of the
/// volume-normalized dimer.
///
/// `ω1 = √(δ v_b² (C11+C12)) - i τ1 δ` and `ω2 = √(δ v_b² (C11-C12))`, with
/// the `δ^{3/2}` and `δ²` anti-resonance corrections added when `coeffs` is
/// supplied. `scale` is the size factor of the physical pair relative to the
/// volume-normalized one (see [`unit_volume_shape`]); the returned
/// frequencies are divided by it. Accuracy degrades beyond `δ ≈ 1e-2`.
pub fn asymptotic_resonances(
    params: &MediumParams,
    caps: &CapacitanceSet,
    coeffs: Option<&AsymptoticCoefficients>,
    scale: f64,
) -> Result<ResonancePair> {
    caps.validate()?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid("scale", format!("{scale} is not a positive size factor")));
    }
    let delta = params.delta();
    if delta >= CONTRAST_CAP {
        return Err(Error::invalid(
            "contrast",
            format!("delta = {delta} is outside the expansion regime (< {CONTRAST_CAP})"),
        ));
    }
    let (v, v_b) = (params.v(), params.v_b());
    let sum = caps.c11 + caps.c12;
    let diff = caps.c11 - caps.c12;
    let tau1 = v_b * v_b * sum * sum / (4.0 * PI * v);
    let omega1 = C64::new((delta * v_b * v_b * sum).sqrt(), -tau1 * delta);
    let mut omega2 = C64::new((delta * v_b * v_b * diff).sqrt(), 0.0);
    if let Some(c) = coeffs {
        omega2 += C64::new(c.eta_hat1 * delta.powf(1.5), c.eta_hat2 * delta * delta);
    }
    ResonancePair::checked(
        [(omega1 / scale, None, None), (omega2 / scale, None, None)],
        ResonanceMethod::Asymptotic,
        None,
    )
}

/// Roots of the 2×2 quasi-static dispersion system of the volume-normalized
/// pair, keeping the `O(ω³)` radiative terms: `[symmetric, antisymmetric]`.
///
/// The antisymmetric combination decouples from the radiating terms exactly,
/// leaving `ω = v_b √(δ (C11-C12))`.
pub fn quasi_static_system_roots(
    caps: &CapacitanceSet,
    params: &MediumParams,
) -> Result<[C64; 2]> {
    caps.validate()?;
    let symmetric = symmetric_mode_root(caps, params, true)?;
    let delta = params.delta();
    let antisymmetric = C64::new(params.v_b() * (delta * (caps.c11 - caps.c12)).sqrt(), 0.0);
    Ok([symmetric, antisymmetric])
}

/// In-phase root of the quasi-static system. With `radiative: false` the
/// `ω³` and `δω` terms are dropped, leaving `ω² = δ v_b² (C11+C12)` exactly.
pub(crate) fn symmetric_mode_root(
    caps: &CapacitanceSet,
    params: &MediumParams,
    radiative: bool,
) -> Result<C64> {
    let delta = params.delta();
    let (v, v_b) = (params.v(), params.v_b());
    let sum = caps.c11 + caps.c12;
    if !radiative {
        return Ok(C64::new(v_b * (delta * sum).sqrt(), 0.0));
    }
    let c3 = C64::new(0.0, -sum / (2.0 * PI * v_b.powi(3)));
    let c2 = C64::new(-1.0 / (v_b * v_b), 0.0);
    let c1 = C64::new(0.0, (1.0 / v_b - 1.0 / v) * delta * sum * sum / (2.0 * PI));
    let c0 = C64::new(delta * sum, 0.0);
    let roots = cubic_roots(c3, c2, c1, c0)?;
    // the two physical roots scale like ±√δ; the third is a spectator of the
    // cubic at |ω| ~ 2π v_b / (C11+C12)
    roots
        .into_iter()
        .filter(|w| w.re > 0.0)
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or_else(|| Error::invalid("quasi-static system", "no root with positive real part"))
}

fn cubic_roots(c3: C64, c2: C64, c1: C64, c0: C64) -> Result<Vec<C64>> {
    let one = C64::new(1.0, 0.0);
    let mut companion = Array2::<C64>::zeros((3, 3));
    companion[[0, 2]] = -c0 / c3;
    companion[[1, 0]] = one;
    companion[[1, 2]] = -c1 / c3;
    companion[[2, 1]] = one;
    companion[[2, 2]] = -c2 / c3;
    let (values, _) = companion
        .eig()
        .map_err(|source| Error::LinearSolve { context: "cubic companion matrix", source })?;
    Ok(values.to_vec())
}

/// Everything behind the anti-resonance corrections, kept for diagnostics.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct CorrectionData {
    pub coefficients: AsymptoticCoefficients,
    pub eta1: C64,
    pub eta2: C64,
    pub phi1: Array1<C64>,
    pub phi2: Array1<C64>,
    pub psi1: SurfaceDensity,
    pub psi2: SurfaceDensity,
}

/// Expansion coefficients of the two resonances for the shape of `geom`,
/// evaluated on its volume-normalized copy.
///
/// Solves the two rank-deficient interior Neumann problems for the
/// correction densities (constrained to be orthogonal to the equilibrium
/// densities) and evaluates the signed surface pairings that define the
/// `δ^{3/2}` and `δ²` coefficients of the anti-resonance.
pub fn anti_resonance_corrections(
    geom: &DimerGeometry,
    params: &MediumParams,
    n_max: usize,
) -> Result<AsymptoticCoefficients> {
    Ok(correction_data(geom, params, n_max)?.coefficients)
}

pub(crate) fn correction_data(
    geom: &DimerGeometry,
    params: &MediumParams,
    n_max: usize,
) -> Result<CorrectionData> {
    let (reference, _) = unit_volume_shape(geom);
    let cluster = axial_cluster(&reference);
    let basis = MultipoleBasis::new(2, n_max);
    let caps = capacitance_numeric(&reference, n_max)?;
    let (v, v_b) = (params.v(), params.v_b());
    let eta0 = v_b * (caps.c11 - caps.c12).sqrt();
    let tau1 = v_b * v_b * (caps.c11 + caps.c12).powi(2) / (4.0 * PI * v);

    let static_ops = build_layer_operators(&reference, C64::new(0.0, 0.0), n_max)?;
    let term2 = build_low_freq_terms(&reference, n_max, 2)?;
    let term3 = build_low_freq_terms(&reference, n_max, 3)?;
    let term4 = build_low_freq_terms(&reference, n_max, 4)?;
    let term5 = build_low_freq_terms(&reference, n_max, 5)?;
    let s0 = &static_ops.single_layer.matrix;
    let k2 = &term2.neumann_poincare.matrix;
    let k3 = &term3.neumann_poincare.matrix;

    let (psi1, psi2) = solve_psi12(&reference, n_max)?;
    let dpsi = &psi1.coeffs - &psi2.coeffs;

    // interior Neumann operator; its kernel is span{ψ1, ψ2}
    let mut interior = static_ops.neumann_poincare.matrix.clone();
    for i in 0..interior.nrows() {
        interior[[i, i]] -= 0.5;
    }
    let span = orthonormal_span(&psi1.coeffs, &psi2.coeffs);

    // ratio η0/v_b recurs in every wave-term weight
    let q = eta0 / v_b;
    let rhs1 = &dpsi - &k2.dot(&dpsi).mapv(|z| q * q * z);
    let phi1 = constrained_solve(&interior, &rhs1, &span, "first correction density")?;
    let rhs2 = k3.dot(&dpsi).mapv(|z| -q.powi(3) * z);
    let phi2 = constrained_solve(&interior, &rhs2, &span, "second correction density")?;

    let pair = |coeffs: &Array1<C64>| {
        signed_pair(&cluster, &SurfaceDensity::from_coeffs(basis, coeffs.clone()))
    };

    let s0_inv_s2 = linalg::solve(s0, &term2.single_layer.matrix.dot(&dpsi), "static solve, S2 term")?;
    let weight2 = 1.0 / (v_b * v_b) - 1.0 / (v * v);
    let a_sum = q * q * pair(&k2.dot(&phi1)) - pair(&phi1)
        + q.powi(4) * pair(&term4.neumann_poincare.matrix.dot(&dpsi))
        - eta0 * eta0 * weight2 * pair(&s0_inv_s2);
    let eta1 = v_b * v_b / (4.0 * eta0)
        * (a_sum + C64::new(2.0 * eta0 * eta0 / (v * v), 0.0));

    let s0_inv_s3 = linalg::solve(s0, &term3.single_layer.matrix.dot(&dpsi), "static solve, S3 term")?;
    let weight3 = 1.0 / v_b.powi(3) - 1.0 / v.powi(3);
    let b_sum = q * q * pair(&k2.dot(&phi2)) - pair(&phi2)
        + q.powi(3) * pair(&k3.dot(&phi1))
        + q.powi(5) * pair(&term5.neumann_poincare.matrix.dot(&dpsi))
        - eta0.powi(3) * weight3 * pair(&s0_inv_s3);
    let eta2 = v_b * v_b / (4.0 * eta0) * b_sum;

    if eta1.im.abs() > 1e-6 * eta1.norm() {
        return Err(Error::invalid(
            "anti-resonance correction",
            format!("eta1 = {eta1} is not real to 1e-6 relative"),
        ));
    }
    if eta2.re.abs() > 1e-6 * eta2.norm() {
        return Err(Error::invalid(
            "anti-resonance correction",
            format!("eta2 = {eta2} is not purely imaginary to 1e-6 relative"),
        ));
    }

    Ok(CorrectionData {
        coefficients: AsymptoticCoefficients {
            tau1,
            eta0,
            eta_hat1: eta1.re,
            eta_hat2: eta2.im,
        },
        eta1,
        eta2,
        phi1,
        phi2,
        psi1,
        psi2,
    })
}

/// Minimum-norm solve of the rank-deficient system, then projection away
/// from `span` (an orthonormal set).
fn constrained_solve(
    lhs: &Array2<C64>,
    rhs: &Array1<C64>,
    span: &[Array1<C64>],
    context: &'static str,
) -> Result<Array1<C64>> {
    let mut x = linalg::least_squares(lhs, rhs, context)?;
    for e in span {
        let overlap = vdot(e, &x);
        x = &x - &e.mapv(|z| overlap * z);
    }
    Ok(x)
}

fn vdot(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn l2_norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn orthonormal_span(psi1: &Array1<C64>, psi2: &Array1<C64>) -> Vec<Array1<C64>> {
    let e1 = psi1.mapv(|z| z / l2_norm(psi1));
    let overlap = vdot(&e1, psi2);
    let residue = psi2 - &e1.mapv(|z| overlap * z);
    let e2 = residue.mapv(|z| z / l2_norm(&residue));
    vec![e1, e2]
}

/// Truncated two-density transmission system whose characteristic values are
/// the scattering resonances. Unknowns are the stacked interior and exterior
/// densities; block rows impose continuity of the field and of the
/// contrast-weighted normal derivative across both sphere surfaces.
pub(crate) fn characteristic_matrix(
    geom: &DimerGeometry,
    params: &MediumParams,
    omega: C64,
    n_max: usize,
) -> Result<Array2<C64>> {
    transmission_matrix(&axial_cluster(geom), params, omega, n_max)
}

/// Locates the two resonances as roots of the determinant of the truncated
/// transmission system, at the actual size of `geom`.
///
/// Starting guesses default to the leading-order closed forms. The second
/// search deflates the first root; each converged root is certified by the
/// relative smallest singular value of the system and classified by the
/// symmetry of its nullspace density.
pub fn muller_resonances(
    geom: &DimerGeometry,
    params: &MediumParams,
    n_max: usize,
    guesses: Option<[C64; 2]>,
) -> Result<ResonancePair> {
    let guesses = match guesses {
        Some(g) => g,
        None => {
            let (reference, scale) = unit_volume_shape(geom);
            let caps = capacitance_numeric(&reference, n_max)?;
            let pair = asymptotic_resonances(params, &caps, None, scale)?;
            [pair.omega1, pair.omega2]
        }
    };

    // determinant rescaled by its magnitude at the first evaluation of each
    // search, so Muller iterates stay in floating range
    let det_scaled = |omega: C64, offset: &mut Option<f64>| -> Result<C64> {
        let a = characteristic_matrix(geom, params, omega, n_max)?;
        let (phase, ln_mag) = linalg::log_det(&a, "transmission determinant")?;
        let reference = *offset.get_or_insert(ln_mag);
        Ok(phase * (ln_mag - reference).exp())
    };

    let mut offset1 = None;
    let root1 = muller(|w| det_scaled(w, &mut offset1), guesses[0])?;
    let mut offset2 = None;
    let root2 = muller(|w| Ok(det_scaled(w, &mut offset2)? / (w - root1)), guesses[1])?;
    if (root2 - root1).norm() < COLLISION_TOL * root1.norm().max(root2.norm()) {
        return Err(Error::RootCollision { omega: root1, guess1: guesses[0], guess2: guesses[1] });
    }

    let (psi1, psi2) = solve_psi12(geom, n_max)?;
    let diagnose = |omega: C64| -> Result<(f64, ResonanceMode)> {
        let a = characteristic_matrix(geom, params, omega, n_max)?;
        let (sigma_min, sigma_max, null_vector) = linalg::min_singular(&a, "transmission system")?;
        let mode = classify_mode(&psi1, &psi2, &null_vector, n_max)?;
        Ok((sigma_min / sigma_max, mode))
    };
    let (residual1, mode1) = diagnose(root1)?;
    let (residual2, mode2) = diagnose(root2)?;

    ResonancePair::checked(
        [
            (root1, Some(residual1), Some(mode1)),
            (root2, Some(residual2), Some(mode2)),
        ],
        ResonanceMethod::RootFound,
        Some(n_max),
    )
}

fn classify_mode(
    psi1: &SurfaceDensity,
    psi2: &SurfaceDensity,
    null_vector: &Array1<C64>,
    n_max: usize,
) -> Result<ResonanceMode> {
    let basis = MultipoleBasis::new(2, n_max);
    let p = basis.len();
    let interior = null_vector.slice(s![..p]).to_owned();
    let scale = l2_norm(&interior);
    if scale == 0.0 {
        return Err(Error::invalid("mode classification", "interior block of the null vector vanishes"));
    }
    let in_phase = &psi1.coeffs + &psi2.coeffs;
    let out_of_phase = &psi1.coeffs - &psi2.coeffs;
    let cosine = |v: &Array1<C64>| vdot(v, &interior).norm() / (l2_norm(v) * scale);
    let (aligned_plus, aligned_minus) = (cosine(&in_phase), cosine(&out_of_phase));
    let (kind, alignment) = if aligned_plus >= aligned_minus {
        (ModeKind::Symmetric, aligned_plus)
    } else {
        (ModeKind::Antisymmetric, aligned_minus)
    };
    Ok(ResonanceMode { kind, alignment, interior_density: SurfaceDensity::from_coeffs(basis, interior) })
}

/// Muller's method with quadratic interpolation through three iterates.
fn muller<F>(mut f: F, guess: C64) -> Result<C64>
where
    F: FnMut(C64) -> Result<C64>,
{
    let spread = if guess.norm() > 0.0 { guess.norm() * GUESS_SPREAD } else { GUESS_SPREAD };
    let mut z = [guess - C64::new(spread, 0.0), guess + C64::new(spread, 0.0), guess];
    let mut fz = [f(z[0])?, f(z[1])?, f(z[2])?];
    for iteration in 0..MULLER_MAX_ITER {
        let h1 = z[1] - z[0];
        let h2 = z[2] - z[1];
        let d1 = (fz[1] - fz[0]) / h1;
        let d2 = (fz[2] - fz[1]) / h2;
        let dd = (d2 - d1) / (h2 + h1);
        let b = d2 + h2 * dd;
        let disc = (b * b - 4.0 * fz[2] * dd).sqrt();
        let denom = if (b + disc).norm() >= (b - disc).norm() { b + disc } else { b - disc };
        if denom.norm() == 0.0 || !denom.is_finite() {
            return Err(Error::RootSearch { iterations: iteration, residual: fz[2].norm() });
        }
        let step = -2.0 * fz[2] / denom;
        let next = z[2] + step;
        let f_next = f(next)?;
        z = [z[1], z[2], next];
        fz = [fz[1], fz[2], f_next];
        if step.norm() <= MULLER_STEP_TOL * next.norm() || f_next.norm() <= MULLER_RESIDUAL_TOL {
            return Ok(next);
        }
    }
    Err(Error::RootSearch { iterations: MULLER_MAX_ITER, residual: fz[2].norm() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::layerpot::capacitance_series;

    fn unit_contrast(delta: f64) -> MediumParams {
        MediumParams::unit_contrast(delta).unwrap()
    }

    fn unit_volume_geom(gap_ratio: f64) -> DimerGeometry {
        let r = (3.0 / (4.0 * PI)).cbrt();
        DimerGeometry::normalized(r, gap_ratio * r).unwrap()
    }

    fn unit_volume_caps(gap_ratio: f64) -> CapacitanceSet {
        let r = (3.0 / (4.0 * PI)).cbrt();
        let (c11, c12) = capacitance_series(r, gap_ratio * r).unwrap();
        CapacitanceSet { c11, c12, p: None }
    }

    fn rel_gap(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn quasi_static_reduces_to_leading_order() {
        let params = unit_contrast(1e-4);
        let caps = unit_volume_caps(5.0);
        let delta = params.delta();
        let v_b = params.v_b();

        let bare = symmetric_mode_root(&caps, &params, false).unwrap();
        let expected = v_b * (delta * (caps.c11 + caps.c12)).sqrt();
        assert!((bare.re - expected).abs() <= 1e-14 * expected);
        assert_eq!(bare.im, 0.0);

        let [symmetric, antisymmetric] = quasi_static_system_roots(&caps, &params).unwrap();
        let anti_expected = v_b * (delta * (caps.c11 - caps.c12)).sqrt();
        assert!((antisymmetric.re - anti_expected).abs() <= 1e-14 * anti_expected);
        assert_eq!(antisymmetric.im, 0.0);

        // radiative terms shift the real part only at O(δ^{3/2}) absolute
        assert!((symmetric.re - expected).abs() <= 100.0 * delta.powf(1.5));
        assert!(symmetric.im < 0.0);
    }

    #[test]
    fn quasi_static_damping_matches_tau1() {
        let params = unit_contrast(1e-4);
        let caps = unit_volume_caps(5.0);
        let delta = params.delta();
        let tau1 = params.v_b().powi(2) * (caps.c11 + caps.c12).powi(2) / (4.0 * PI * params.v());
        let [symmetric, _] = quasi_static_system_roots(&caps, &params).unwrap();
        let damping = -symmetric.im;
        assert!(
            (damping - tau1 * delta).abs() <= 0.02 * tau1 * delta,
            "damping {damping:.6e} vs tau1*delta {:.6e}",
            tau1 * delta
        );
    }

    #[test]
    fn asymptotic_matches_muller_roots() {
        let params = unit_contrast(1e-4);
        let geom = unit_volume_geom(5.0);
        let n_max = 6;
        let caps = capacitance_numeric(&unit_volume_shape(&geom).0, n_max).unwrap();
        let coeffs = anti_resonance_corrections(&geom, &params, n_max).unwrap();
        let asym = asymptotic_resonances(&params, &caps, Some(&coeffs), 1.0).unwrap();
        let found = muller_resonances(&geom, &params, n_max, None).unwrap();

        assert!((asym.omega1.re - found.omega1.re).abs() <= 1e-3 * found.omega1.re);
        assert!((asym.omega2.re - found.omega2.re).abs() <= 1e-3 * found.omega2.re);
        // damping of the symmetric mode tracks the closed form
        assert!((asym.omega1.im - found.omega1.im).abs() <= 0.05 * found.omega1.im.abs());

        for residual in found.residuals {
            assert!(residual.unwrap() < 1e-10);
        }
        let modes = found.modes.as_ref().unwrap();
        assert_eq!(modes[0].kind, ModeKind::Symmetric);
        assert_eq!(modes[1].kind, ModeKind::Antisymmetric);
        assert!(modes[0].alignment > 0.99 && modes[1].alignment > 0.99);

        assert!(found.omega1.im < 0.0 && found.omega2.im < 0.0);
        assert!(found.omega2.re > found.omega1.re);
        // anti-resonance damping is two orders in δ weaker
        assert!(found.omega2.im.abs() < 0.2 * found.omega1.im.abs());
    }

    #[test]
    fn muller_scaling_exactness() {
        let params = unit_contrast(1e-3);
        let geom = unit_volume_geom(5.0);
        let shrunk =
            DimerGeometry::new(geom.r0, geom.d0, 0.5, Vec3::z(), Vec3::zeros()).unwrap();
        let n_max = 4;
        let base = muller_resonances(&geom, &params, n_max, None).unwrap();
        let scaled = muller_resonances(&shrunk, &params, n_max, None).unwrap();
        assert!(rel_gap(scaled.omega1, 2.0 * base.omega1) < 1e-9);
        assert!(rel_gap(scaled.omega2, 2.0 * base.omega2) < 1e-9);
    }

    #[test]
    fn muller_truncation_self_convergence() {
        let params = unit_contrast(1e-3);
        let geom = unit_volume_geom(5.0);
        let coarse = muller_resonances(&geom, &params, 4, None).unwrap();
        let fine = muller_resonances(&geom, &params, 8, None).unwrap();
        assert!(rel_gap(coarse.omega1, fine.omega1) < 1e-6);
        assert!(rel_gap(coarse.omega2, fine.omega2) < 1e-6);
    }

    #[test]
    fn corrections_match_root_trajectories() {
        let params_ref = unit_contrast(1e-4);
        let geom = unit_volume_geom(5.0);
        let n_max = 6;
        let coeffs = anti_resonance_corrections(&geom, &params_ref, n_max).unwrap();

        let caps = capacitance_numeric(&geom, n_max).unwrap();
        let deltas = [1e-5, 3e-5, 1e-4];
        let mut re_gap = Vec::new();
        let mut im_part = Vec::new();
        let mut sym_gap = Vec::new();
        for &delta in &deltas {
            let params = unit_contrast(delta);
            let found = muller_resonances(&geom, &params, n_max, None).unwrap();
            re_gap.push(found.omega2.re - coeffs.eta0 * delta.sqrt());
            im_part.push(found.omega2.im);
            let leading = params.v_b() * (delta * (caps.c11 + caps.c12)).sqrt();
            sym_gap.push((found.omega1.re - leading).abs());
        }

        // two-coefficient fits absorb the next order of each expansion
        let fit = |values: &[f64], lo: f64, hi: f64| -> f64 {
            let mut g = [[0.0; 2]; 2];
            let mut rhs = [0.0; 2];
            for (i, &delta) in deltas.iter().enumerate() {
                let basis = [delta.powf(lo), delta.powf(hi)];
                for r in 0..2 {
                    rhs[r] += basis[r] * values[i];
                    for c in 0..2 {
                        g[r][c] += basis[r] * basis[c];
                    }
                }
            }
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            (rhs[0] * g[1][1] - rhs[1] * g[0][1]) / det
        };

        let eta_hat1_fit = fit(&re_gap, 1.5, 2.5);
        let eta_hat2_fit = fit(&im_part, 2.0, 2.5);
        assert!(
            (eta_hat1_fit - coeffs.eta_hat1).abs() < 0.05 * coeffs.eta_hat1.abs(),
            "eta_hat1 fit {eta_hat1_fit:.6} vs corrections {:.6}",
            coeffs.eta_hat1
        );
        assert!(
            (eta_hat2_fit - coeffs.eta_hat2).abs() < 0.05 * coeffs.eta_hat2.abs(),
            "eta_hat2 fit {eta_hat2_fit:.6} vs corrections {:.6}",
            coeffs.eta_hat2
        );

        // the leading-order real part is wrong by O(δ^{3/2}): slope ≥ 1.4
        let slope = (sym_gap[2] / sym_gap[0]).ln() / (deltas[2] / deltas[0]).ln();
        assert!(slope >= 1.4, "slope {slope}");
    }

    #[test]
    fn corrections_realness_and_orthogonality() {
        let params = unit_contrast(1e-4);
        let geom = unit_volume_geom(5.0);
        let data = correction_data(&geom, &params, 6).unwrap();

        assert!(data.eta1.im.abs() <= 1e-6 * data.eta1.norm());
        assert!(data.eta2.re.abs() <= 1e-6 * data.eta2.norm());
        let c = data.coefficients;
        assert!(c.tau1 > 0.0 && c.eta0 > 0.0);
        assert!(c.eta_hat2 < 0.0, "anti-resonance must decay, eta_hat2 = {}", c.eta_hat2);

        for phi in [&data.phi1, &data.phi2] {
            for psi in [&data.psi1.coeffs, &data.psi2.coeffs] {
                let overlap = vdot(psi, phi).norm() / (l2_norm(psi) * l2_norm(phi));
                assert!(overlap < 1e-10, "constraint residual {overlap:.2e}");
            }
        }

        let finer = correction_data(&geom, &params, 8).unwrap().coefficients;
        assert!((c.eta_hat1 - finer.eta_hat1).abs() < 1e-3 * finer.eta_hat1.abs());
        assert!((c.eta_hat2 - finer.eta_hat2).abs() < 1e-3 * finer.eta_hat2.abs());
    }

    #[test]
    fn asymptotic_scaling_and_guards() {
        let caps = unit_volume_caps(5.0);
        let lo = asymptotic_resonances(&unit_contrast(1e-6), &caps, None, 1.0).unwrap();
        let hi = asymptotic_resonances(&unit_contrast(1e-4), &caps, None, 1.0).unwrap();
        // leading order rises like √δ
        assert!((hi.omega1.re / lo.omega1.re - 10.0).abs() < 1e-9);
        assert!((hi.omega2.re / lo.omega2.re - 10.0).abs() < 1e-9);

        // halving the size doubles both frequencies
        let half = asymptotic_resonances(&unit_contrast(1e-4), &caps, None, 0.5).unwrap();
        assert!(rel_gap(half.omega1, 2.0 * hi.omega1) < 1e-14);

        assert!(asymptotic_resonances(&unit_contrast(0.5), &caps, None, 1.0).is_err());
        assert!(asymptotic_resonances(&unit_contrast(1e-4), &caps, None, 0.0).is_err());
        let broken = CapacitanceSet { c11: -1.0, c12: -0.5, p: None };
        assert!(asymptotic_resonances(&unit_contrast(1e-4), &broken, None, 1.0).is_err());
    }

    #[test]
    fn corrections_ignore_orientation_and_size() {
        let params = unit_contrast(1e-3);
        let upright = unit_volume_geom(5.0);
        let tilted = DimerGeometry::new(
            2.0,
            10.0,
            0.37,
            Vec3::new(1.0, 2.0, -0.5).normalize(),
            Vec3::new(4.0, 0.0, -1.0),
        )
        .unwrap();
        let a = anti_resonance_corrections(&upright, &params, 4).unwrap();
        let b = anti_resonance_corrections(&tilted, &params, 4).unwrap();
        assert!((a.eta0 - b.eta0).abs() < 1e-12 * a.eta0);
        assert!((a.eta_hat1 - b.eta_hat1).abs() < 1e-9 * a.eta_hat1.abs());
        assert!((a.eta_hat2 - b.eta_hat2).abs() < 1e-9 * a.eta_hat2.abs());
    }
}
