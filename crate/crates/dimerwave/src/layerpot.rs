//! Layer-potential operators on sphere pairs in the multipole basis, the
//! equilibrium densities of the pair, and its capacitance/dipole constants.
//!
//! Fundamental solution: `G(x, k) = -exp(ik|x|)/(4π|x|)`. The single-layer
//! value is continuous across each surface; its normal derivative jumps by
//! the density, split as `∂_ν S|± = (±½ I + K*)`.
//!
//! All `SurfaceDensity` coefficients live in the dimer's axial frame: the
//! pair axis along +z, midpoint at the origin, sphere 0 on the positive
//! side. [`DimerGeometry::frame`] maps that frame to world coordinates.

use ndarray::{s, Array2};

use crate::basis::{MultipoleBasis, SphericalWaveIndex, SurfaceDensity};
use crate::geom::{DimerGeometry, Mat3, Sphere, SphereCluster, Vec3};
use crate::linalg;
use crate::quad::{gauss_legendre_01, sphere_rule};
use crate::specfun::{
    build_static_translation, build_translation_matrix, legendre_p_all, sph_harm_row,
    spherical_bessel_j_all, spherical_deriv, spherical_hankel_h1_all, WaveKind,
};
use crate::{C64, Error, Result};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Densities and bulk moduli of the background fluid and the inclusions.
#[derive(Debug, Clone, Copy)]
pub struct MediumParams {
    pub rho: f64,
    pub kappa: f64,
    pub rho_b: f64,
    pub kappa_b: f64,
}

impl MediumParams {
    pub fn new(rho: f64, kappa: f64, rho_b: f64, kappa_b: f64) -> Result<Self> {
        for (name, v) in [("rho", rho), ("kappa", kappa), ("rho_b", rho_b), ("kappa_b", kappa_b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid("medium", format!("{name} = {v}")));
            }
        }
        Ok(Self { rho, kappa, rho_b, kappa_b })
    }

    /// Background normalized to unit density and modulus; inclusion carries
    /// the density contrast `delta` with matched wave speeds.
    pub fn unit_contrast(delta: f64) -> Result<Self> {
        Self::new(1.0, 1.0, delta, delta)
    }

    /// Background sound speed `√(κ/ρ)`.
    pub fn v(&self) -> f64 {
        (self.kappa / self.rho).sqrt()
    }

    /// Inclusion sound speed `√(κ_b/ρ_b)`.
    pub fn v_b(&self) -> f64 {
        (self.kappa_b / self.rho_b).sqrt()
    }

    /// Density contrast `ρ_b/ρ`.
    pub fn delta(&self) -> f64 {
        self.rho_b / self.rho
    }

    /// Background wavenumber at angular frequency `omega`.
    pub fn k(&self, omega: C64) -> C64 {
        omega / self.v()
    }

    /// Inclusion wavenumber at angular frequency `omega`.
    pub fn k_b(&self, omega: C64) -> C64 {
        omega / self.v_b()
    }
}

/// Capacitance coefficients of the pair, optionally with the axial dipole
/// coupling constant.
#[derive(Debug, Clone, Copy)]
pub struct CapacitanceSet {
    pub c11: f64,
    pub c12: f64,
    pub p: Option<f64>,
}

impl CapacitanceSet {
    /// The bilinear combination `a(C11+C12) + b(C21+C22)` with `C21 = C12`,
    /// `C22 = C11`.
    pub fn coupling_sum(&self, a: f64, b: f64) -> f64 {
        (a + b) * (self.c11 + self.c12)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c11 > 0.0) {
            return Err(Error::invalid("capacitance", format!("C11 = {} not positive", self.c11)));
        }
        if !(self.c12 < 0.0) {
            return Err(Error::invalid("capacitance", format!("C12 = {} not negative", self.c12)));
        }
        if self.c11 * self.c11 - self.c12 * self.c12 <= 0.0 {
            return Err(Error::invalid("capacitance", "matrix not positive definite"));
        }
        Ok(())
    }

    pub fn with_dipole(self, p: f64) -> Self {
        Self { p: Some(p), ..self }
    }
}

/// Which operator a dense block represents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorTag {
    /// `S^k`: single-layer value on the surfaces.
    SingleLayer { k: C64 },
    /// `K^{k,*}`: the adjoint double-layer (Neumann-Poincaré) operator.
    NeumannPoincare { k: C64 },
    /// Coefficient of `k^order` in the low-frequency expansion of `S^k`.
    SingleLayerTerm { order: usize },
    /// Coefficient of `k^order` in the low-frequency expansion of `K^{k,*}`.
    NeumannPoincareTerm { order: usize },
}

/// Dense matrix acting on [`SurfaceDensity`] coefficients.
#[derive(Debug, Clone)]
pub struct OperatorBlock {
    pub tag: OperatorTag,
    pub matrix: Array2<C64>,
}

impl OperatorBlock {
    pub fn apply(&self, density: &SurfaceDensity) -> SurfaceDensity {
        SurfaceDensity::from_coeffs(density.basis, self.matrix.dot(&density.coeffs))
    }
}

/// The value operator and its jump-free derivative part at one wavenumber.
pub struct LayerOperators {
    pub single_layer: OperatorBlock,
    pub neumann_poincare: OperatorBlock,
}

// ---------------------------------------------------------------------------
// cluster-level assembly (shared by the pair API, the scattering solver, and
// oracle tests on other sphere arrangements)
// ---------------------------------------------------------------------------

/// The dimer's spheres in its axial frame (axis +z, midpoint at origin,
/// sphere 0 on the positive side), at actual scale.
pub(crate) fn axial_cluster(geom: &DimerGeometry) -> SphereCluster {
    let h = geom.half_distance();
    let r = geom.ball_radius();
    SphereCluster::new(vec![
        Sphere { center: Vec3::new(0.0, 0.0, h), radius: r },
        Sphere { center: Vec3::new(0.0, 0.0, -h), radius: r },
    ])
    .expect("dimer spheres are disjoint by construction")
}

/// `σ_n(k, r) = -i k r² j_n(kr)`: strength of the outgoing wave radiated by
/// the density `Y_n^m` on a sphere of radius `r`.
pub(crate) fn sigma_factors(k: C64, r: f64, n_max: usize) -> Vec<C64> {
    let j = spherical_bessel_j_all(n_max, k * r);
    let pref = -C64::new(0.0, 1.0) * k * r * r;
    j.into_iter().map(|jn| pref * jn).collect()
}

/// Dense `S^k` and `K^{k,*}` for a cluster at (nonzero) wavenumber `k`.
pub(crate) fn build_cluster_operators(
    cluster: &SphereCluster,
    k: C64,
    n_max: usize,
) -> Result<(Array2<C64>, Array2<C64>)> {
    let basis = MultipoleBasis::new(cluster.len(), n_max);
    let per = basis.per_sphere();
    let dim = basis.len();
    let mut s_op = Array2::zeros((dim, dim));
    let mut k_op = Array2::zeros((dim, dim));
    let spheres = cluster.spheres();
    for (j, sp) in spheres.iter().enumerate() {
        let r = sp.radius;
        let z = k * r;
        let jv = spherical_bessel_j_all(n_max, z);
        let hv = spherical_hankel_h1_all(n_max, z)?;
        let jp = spherical_deriv(&jv, z);
        let hp = spherical_deriv(&hv, z);
        let sigma = sigma_factors(k, r, n_max);
        let kk_pref = -C64::new(0.0, 0.5) * k * k * r * r;
        for idx in basis.modes() {
            let p = basis.index(j, idx);
            s_op[(p, p)] = sigma[idx.n] * hv[idx.n];
            k_op[(p, p)] = kk_pref * (jv[idx.n] * hp[idx.n] + jp[idx.n] * hv[idx.n]);
        }
        // cross blocks: the outgoing field of sphere j re-expanded around i
        for (i, spi) in spheres.iter().enumerate() {
            if i == j {
                continue;
            }
            let shift = build_translation_matrix(
                k,
                spi.center - sp.center,
                n_max,
                WaveKind::Outgoing,
            )?;
            let zi = k * spi.radius;
            let ji = spherical_bessel_j_all(n_max, zi);
            let jip = spherical_deriv(&ji, zi);
            for row_idx in basis.modes() {
                let row = basis.index(i, row_idx);
                for col_idx in basis.modes() {
                    let col = basis.index(j, col_idx);
                    let a = shift.entry(row_idx.n, row_idx.m, col_idx.n, col_idx.m);
                    let src = a * sigma[col_idx.n];
                    s_op[(row, col)] = ji[row_idx.n] * src;
                    k_op[(row, col)] = k * jip[row_idx.n] * src;
                }
            }
        }
        debug_assert_eq!(per * cluster.len(), dim);
    }
    Ok((s_op, k_op))
}

/// Two-density transmission system for a cluster at frequency `omega`:
/// unknowns are the stacked interior and exterior densities; block rows
/// impose continuity of the field and of the contrast-weighted normal
/// derivative across every sphere surface.
pub(crate) fn transmission_matrix(
    cluster: &SphereCluster,
    params: &MediumParams,
    omega: C64,
    n_max: usize,
) -> Result<Array2<C64>> {
    if n_max < 2 {
        return Err(Error::invalid("basis order", format!("n_max = {n_max}; need at least 2")));
    }
    let delta = params.delta();
    let (s_in, k_in, s_out, k_out) = if omega.norm() == 0.0 {
        let (s0, k0) = build_cluster_static(cluster, n_max)?;
        (s0.clone(), k0.clone(), s0, k0)
    } else {
        let (s_in, k_in) = build_cluster_operators(cluster, params.k_b(omega), n_max)?;
        let (s_out, k_out) = build_cluster_operators(cluster, params.k(omega), n_max)?;
        (s_in, k_in, s_out, k_out)
    };
    let p = s_in.nrows();
    let mut a = Array2::<C64>::zeros((2 * p, 2 * p));
    a.slice_mut(s![..p, ..p]).assign(&s_in);
    a.slice_mut(s![..p, p..]).assign(&s_out.mapv(|z| -z));
    a.slice_mut(s![p.., ..p]).assign(&k_in);
    a.slice_mut(s![p.., p..]).assign(&k_out.mapv(|z| -delta * z));
    for i in 0..p {
        a[[p + i, i]] -= C64::new(0.5, 0.0);
        a[[p + i, p + i]] -= C64::new(0.5 * delta, 0.0);
    }
    Ok(a)
}

/// Dense `S^0` and `K^{0,*}` (static limit) for a cluster.
pub(crate) fn build_cluster_static(
    cluster: &SphereCluster,
    n_max: usize,
) -> Result<(Array2<C64>, Array2<C64>)> {
    let basis = MultipoleBasis::new(cluster.len(), n_max);
    let dim = basis.len();
    let mut s_op = Array2::zeros((dim, dim));
    let mut k_op = Array2::zeros((dim, dim));
    let spheres = cluster.spheres();
    for (j, sp) in spheres.iter().enumerate() {
        let r = sp.radius;
        for idx in basis.modes() {
            let p = basis.index(j, idx);
            let d = 2.0 * idx.n as f64 + 1.0;
            s_op[(p, p)] = C64::new(-r / d, 0.0);
            k_op[(p, p)] = C64::new(0.5 / d, 0.0);
        }
        for (i, spi) in spheres.iter().enumerate() {
            if i == j {
                continue;
            }
            let shift = build_static_translation(spi.center - sp.center, n_max)?;
            let ri = spi.radius;
            for row_idx in basis.modes() {
                let row = basis.index(i, row_idx);
                let nu = row_idx.n as i32;
                for col_idx in basis.modes() {
                    let col = basis.index(j, col_idx);
                    let n = col_idx.n;
                    let b = shift.entry(row_idx.n, row_idx.m, col_idx.n, col_idx.m);
                    let src = -r.powi(n as i32 + 2) / (2.0 * n as f64 + 1.0) * b;
                    s_op[(row, col)] = src * ri.powi(nu);
                    k_op[(row, col)] = src * nu as f64 * ri.powi(nu - 1);
                }
            }
        }
    }
    Ok((s_op, k_op))
}

/// `i^n` as a complex constant.
pub(crate) fn i_pow(n: usize) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `∫_0^1 t^order P_l(1-2t²) dt` for `l = 0..=l_max`; these carry the
/// surface-pair eigenvalues of the expansion kernels on a single sphere.
fn kernel_moments(order: usize, l_max: usize) -> Vec<f64> {
    let rule = gauss_legendre_01(l_max + order + 8);
    let mut out = vec![0.0; l_max + 1];
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        let p = legendre_p_all(l_max, 1.0 - 2.0 * t * t);
        let f = w * t.powi(order as i32);
        for (o, pl) in out.iter_mut().zip(&p) {
            *o += f * pl;
        }
    }
    out
}

/// Dense `S^order` and `K^order` expansion terms for a cluster.
///
/// Self blocks are diagonal with eigenvalues from the kernel moments above;
/// cross blocks (smooth kernels on disjoint spheres) use tensor product
/// surface quadrature projected onto the harmonic basis.
pub(crate) fn build_cluster_low_freq(
    cluster: &SphereCluster,
    n_max: usize,
    order: usize,
) -> Result<(Array2<C64>, Array2<C64>)> {
    if order > 5 {
        return Err(Error::invalid("expansion order", format!("{order} exceeds 5")));
    }
    let basis = MultipoleBasis::new(cluster.len(), n_max);
    let dim = basis.len();
    let mut s_op: Array2<C64> = Array2::zeros((dim, dim));
    let mut k_op: Array2<C64> = Array2::zeros((dim, dim));
    let c_s = -i_pow(order) / (FOUR_PI * factorial(order));
    let c_k = c_s * (order as f64 - 1.0);
    if order == 0 {
        return build_cluster_static(cluster, n_max);
    }
    let spheres = cluster.spheres();
    let moments = kernel_moments(order, n_max);
    for (j, sp) in spheres.iter().enumerate() {
        let r = sp.radius;
        let pow2 = (2.0f64).powi(order as i32);
        let lam_s: Vec<C64> = moments
            .iter()
            .map(|m| c_s * 2.0 * std::f64::consts::PI * r.powi(order as i32 + 1) * 2.0 * pow2 * m)
            .collect();
        let lam_k: Vec<C64> = moments
            .iter()
            .map(|m| c_k * 2.0 * std::f64::consts::PI * r.powi(order as i32) * pow2 * m)
            .collect();
        for idx in basis.modes() {
            let p = basis.index(j, idx);
            s_op[(p, p)] = lam_s[idx.n];
            k_op[(p, p)] = lam_k[idx.n];
        }
    }
    if cluster.len() > 1 {
        let n_polar = 2 * n_max + 12;
        let rule = sphere_rule(n_polar, 2 * n_polar);
        let npts = rule.dirs.len();
        let per = basis.per_sphere();
        // harmonic samples, shared by all spheres (same direction set)
        let mut y_plain: Array2<C64> = Array2::zeros((npts, per));
        for (p, d) in rule.dirs.iter().enumerate() {
            let row = sph_harm_row(n_max, d.z, d.y.atan2(d.x));
            for (q, v) in row.into_iter().enumerate() {
                y_plain[(p, q)] = v;
            }
        }
        let mut y_proj = y_plain.mapv(|v| v.conj()).reversed_axes().into_owned();
        for (mut col, w) in y_proj.columns_mut().into_iter().zip(&rule.weights) {
            col.mapv_inplace(|v| v * *w);
        }
        let mut y_src = y_plain.clone();
        for (mut row, w) in y_src.rows_mut().into_iter().zip(&rule.weights) {
            row.mapv_inplace(|v| v * *w);
        }
        for (i, spi) in spheres.iter().enumerate() {
            for (j, spj) in spheres.iter().enumerate() {
                if i == j {
                    continue;
                }
                let mut ker_s: Array2<C64> = Array2::zeros((npts, npts));
                let mut ker_k: Array2<C64> = Array2::zeros((npts, npts));
                for (p, dp) in rule.dirs.iter().enumerate() {
                    let x = spi.center + spi.radius * dp;
                    for (q, dq) in rule.dirs.iter().enumerate() {
                        let y = spj.center + spj.radius * dq;
                        let v = x - y;
                        let rho = v.norm();
                        ker_s[(p, q)] = C64::new(rho.powi(order as i32 - 1), 0.0);
                        ker_k[(p, q)] =
                            C64::new(v.dot(dp) * rho.powi(order as i32 - 3), 0.0);
                    }
                }
                let w = spj.radius * spj.radius;
                let es = y_proj.dot(&ker_s).dot(&y_src);
                let ek = y_proj.dot(&ker_k).dot(&y_src);
                for row_idx in basis.modes() {
                    let row = basis.index(i, row_idx);
                    for col_idx in basis.modes() {
                        let col = basis.index(j, col_idx);
                        let (rf, cf) = (row_idx.flat(), col_idx.flat());
                        s_op[(row, col)] = c_s * w * es[(rf, cf)];
                        k_op[(row, col)] = c_k * w * ek[(rf, cf)];
                    }
                }
            }
        }
    }
    Ok((s_op, k_op))
}

// ---------------------------------------------------------------------------
// public pair API
// ---------------------------------------------------------------------------

/// `S^k` and `K^{k,*}` for the pair at wavenumber `k` (static limit at k = 0).
pub fn build_layer_operators(
    geom: &DimerGeometry,
    k: C64,
    n_max: usize,
) -> Result<LayerOperators> {
    if n_max < 2 {
        return Err(Error::invalid("truncation", format!("N_max = {n_max} < 2")));
    }
    let cluster = axial_cluster(geom);
    let (s, kk) = if k.norm() == 0.0 {
        build_cluster_static(&cluster, n_max)?
    } else {
        build_cluster_operators(&cluster, k, n_max)?
    };
    Ok(LayerOperators {
        single_layer: OperatorBlock { tag: OperatorTag::SingleLayer { k }, matrix: s },
        neumann_poincare: OperatorBlock { tag: OperatorTag::NeumannPoincare { k }, matrix: kk },
    })
}

/// The `k^order` terms of the low-frequency expansions of `S^k` and `K^{k,*}`.
pub fn build_low_freq_terms(
    geom: &DimerGeometry,
    n_max: usize,
    order: usize,
) -> Result<LayerOperators> {
    let cluster = axial_cluster(geom);
    let (s, kk) = build_cluster_low_freq(&cluster, n_max, order)?;
    Ok(LayerOperators {
        single_layer: OperatorBlock { tag: OperatorTag::SingleLayerTerm { order }, matrix: s },
        neumann_poincare: OperatorBlock {
            tag: OperatorTag::NeumannPoincareTerm { order },
            matrix: kk,
        },
    })
}

/// Constant function `1` on sphere `which`, zero on the other surfaces.
fn indicator_density(basis: MultipoleBasis, which: usize) -> SurfaceDensity {
    let mut d = SurfaceDensity::zeros(basis);
    d.set(which, SphericalWaveIndex::new(0, 0), C64::new(FOUR_PI.sqrt(), 0.0));
    d
}

/// Equilibrium densities: `S^0[ψ_i] = 1` on sphere i-1, `0` on the other.
pub fn solve_psi12(
    geom: &DimerGeometry,
    n_max: usize,
) -> Result<(SurfaceDensity, SurfaceDensity)> {
    let cluster = axial_cluster(geom);
    let (s0, _) = build_cluster_static(&cluster, n_max)?;
    let basis = MultipoleBasis::new(2, n_max);
    let rhs1 = indicator_density(basis, 0);
    let rhs2 = indicator_density(basis, 1);
    let psi1 = linalg::solve(&s0, &rhs1.coeffs, "equilibrium density 1")?;
    let psi2 = linalg::solve(&s0, &rhs2.coeffs, "equilibrium density 2")?;
    Ok((
        SurfaceDensity::from_coeffs(basis, psi1),
        SurfaceDensity::from_coeffs(basis, psi2),
    ))
}

// ---------------------------------------------------------------------------
// functionals on surface densities (axial frame)
// ---------------------------------------------------------------------------

/// `∫_{∂D_j} φ dσ`.
pub fn boundary_integral(cluster: &SphereCluster, density: &SurfaceDensity, j: usize) -> C64 {
    let r = cluster.spheres()[j].radius;
    r * r * FOUR_PI.sqrt() * density.get(j, SphericalWaveIndex::new(0, 0))
}

/// The signed pairing `∫_{∂D_1} φ - ∫_{∂D_2} φ` (sphere 0 minus sphere 1).
pub fn signed_pair(cluster: &SphereCluster, density: &SurfaceDensity) -> C64 {
    boundary_integral(cluster, density, 0) - boundary_integral(cluster, density, 1)
}

/// `∫_{∂D} x_axis φ dσ` over all surfaces; `axis` is 0, 1, 2 for x, y, z.
pub fn coordinate_moment(cluster: &SphereCluster, density: &SurfaceDensity, axis: usize) -> C64 {
    let two_pi_third = (2.0 * std::f64::consts::PI / 3.0).sqrt();
    let mut acc = C64::new(0.0, 0.0);
    for (j, sp) in cluster.spheres().iter().enumerate() {
        let r = sp.radius;
        let center_part = sp.center[axis] * FOUR_PI.sqrt()
            * density.get(j, SphericalWaveIndex::new(0, 0));
        let m_minus = density.get(j, SphericalWaveIndex::new(1, -1));
        let m_plus = density.get(j, SphericalWaveIndex::new(1, 1));
        let dir_part = match axis {
            0 => two_pi_third * (m_minus - m_plus),
            1 => -C64::new(0.0, 1.0) * two_pi_third * (m_minus + m_plus),
            2 => (FOUR_PI / 3.0).sqrt() * density.get(j, SphericalWaveIndex::new(1, 0)),
            _ => panic!("axis out of range"),
        };
        acc += r * r * (center_part + r * dir_part);
    }
    acc
}

/// Coefficients of the coordinate function `x_axis` restricted to the
/// surfaces.
pub fn coordinate_restriction(
    cluster: &SphereCluster,
    n_max: usize,
    axis: usize,
) -> SurfaceDensity {
    let basis = MultipoleBasis::new(cluster.len(), n_max);
    let mut d = SurfaceDensity::zeros(basis);
    let a = (2.0 * std::f64::consts::PI / 3.0).sqrt();
    for (j, sp) in cluster.spheres().iter().enumerate() {
        let r = sp.radius;
        d.set(
            j,
            SphericalWaveIndex::new(0, 0),
            C64::new(sp.center[axis] * FOUR_PI.sqrt(), 0.0),
        );
        match axis {
            0 => {
                d.set(j, SphericalWaveIndex::new(1, -1), C64::new(r * a, 0.0));
                d.set(j, SphericalWaveIndex::new(1, 1), C64::new(-r * a, 0.0));
            }
            1 => {
                d.set(j, SphericalWaveIndex::new(1, -1), C64::new(0.0, r * a));
                d.set(j, SphericalWaveIndex::new(1, 1), C64::new(0.0, r * a));
            }
            2 => {
                d.set(j, SphericalWaveIndex::new(1, 0), C64::new(r * (FOUR_PI / 3.0).sqrt(), 0.0));
            }
            _ => panic!("axis out of range"),
        }
    }
    d
}

// ---------------------------------------------------------------------------
// field evaluation
// ---------------------------------------------------------------------------

fn local_angles(v: Vec3, rho: f64) -> (f64, f64) {
    if rho < 1e-300 {
        (1.0, 0.0)
    } else {
        ((v.z / rho).clamp(-1.0, 1.0), v.y.atan2(v.x))
    }
}

/// `S^0[φ](x)` anywhere off the surfaces (continuous across them).
pub fn eval_static_single_layer(
    cluster: &SphereCluster,
    density: &SurfaceDensity,
    x: Vec3,
) -> C64 {
    let n_max = density.basis.n_max;
    let mut acc = C64::new(0.0, 0.0);
    for (j, sp) in cluster.spheres().iter().enumerate() {
        let v = x - sp.center;
        let rho = v.norm();
        let r = sp.radius;
        let (ct, phi) = local_angles(v, rho);
        let row = sph_harm_row(n_max, ct, phi);
        for idx in density.basis.modes() {
            let c = density.get(j, idx);
            let d = 2.0 * idx.n as f64 + 1.0;
            let radial = if rho >= r {
                -r.powi(idx.n as i32 + 2) / (d * rho.powi(idx.n as i32 + 1))
            } else {
                -(r / d) * (rho / r).powi(idx.n as i32)
            };
            acc += c * radial * row[idx.flat()];
        }
    }
    acc
}

/// `S^k[φ](x)` anywhere off the surfaces (continuous across them).
pub fn eval_helmholtz_single_layer(
    cluster: &SphereCluster,
    density: &SurfaceDensity,
    k: C64,
    x: Vec3,
) -> Result<C64> {
    let n_max = density.basis.n_max;
    let mut acc = C64::new(0.0, 0.0);
    for (j, sp) in cluster.spheres().iter().enumerate() {
        let v = x - sp.center;
        let rho = v.norm();
        let r = sp.radius;
        let (ct, phi) = local_angles(v, rho);
        let row = sph_harm_row(n_max, ct, phi);
        if rho >= r {
            let sigma = sigma_factors(k, r, n_max);
            let h = spherical_hankel_h1_all(n_max, k * rho)?;
            for idx in density.basis.modes() {
                acc += density.get(j, idx) * sigma[idx.n] * h[idx.n] * row[idx.flat()];
            }
        } else {
            let h = spherical_hankel_h1_all(n_max, k * r)?;
            let jv = spherical_bessel_j_all(n_max, k * rho);
            let pref = -C64::new(0.0, 1.0) * k * r * r;
            for idx in density.basis.modes() {
                acc += density.get(j, idx) * pref * h[idx.n] * jv[idx.n] * row[idx.flat()];
            }
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// capacitance and dipole constants
// ---------------------------------------------------------------------------

/// Capacitance coefficients from the equilibrium densities:
/// `C_ij = -∫_{∂D_j} ψ_i`, symmetrized over the identical spheres.
pub fn capacitance_numeric(geom: &DimerGeometry, n_max: usize) -> Result<CapacitanceSet> {
    let cluster = axial_cluster(geom);
    let (psi1, psi2) = solve_psi12(geom, n_max)?;
    let c11 = -boundary_integral(&cluster, &psi1, 0);
    let c12 = -boundary_integral(&cluster, &psi1, 1);
    let c21 = -boundary_integral(&cluster, &psi2, 0);
    let c22 = -boundary_integral(&cluster, &psi2, 1);
    for (name, v) in [("C11", c11), ("C12", c12), ("C21", c21), ("C22", c22)] {
        if v.im.abs() > 1e-10 * v.norm().max(1.0) {
            return Err(Error::invalid("capacitance", format!("{name} has imaginary part {v}")));
        }
    }
    let set = CapacitanceSet {
        c11: 0.5 * (c11.re + c22.re),
        c12: 0.5 * (c12.re + c21.re),
        p: None,
    };
    set.validate()?;
    Ok(set)
}

const SERIES_TOL: f64 = 1e-14;
const SERIES_MAX_TERMS: usize = 200_000;

fn bipolar_params(r0: f64, d0: f64) -> (f64, f64) {
    let alpha = (d0 * (r0 + 0.25 * d0)).sqrt();
    let t = (alpha / r0).asinh();
    (alpha, t)
}

/// Capacitance coefficients `(C11, C12)` of two equal spheres of radius `r0`
/// with surface gap `d0`, by the exact bipolar-coordinate series.
pub fn capacitance_series(r0: f64, d0: f64) -> Result<(f64, f64)> {
    if !(r0 > 0.0 && d0 > 0.0) {
        return Err(Error::invalid("pair shape", format!("r0 = {r0}, d0 = {d0}")));
    }
    let (alpha, t) = bipolar_params(r0, d0);
    let mut c11 = 0.0;
    let mut c12 = 0.0;
    for n in 0..SERIES_MAX_TERMS {
        let e = ((2 * n + 1) as f64) * t;
        let t11 = e.exp() / ((2.0 * e).exp() - 1.0);
        let t12 = 1.0 / ((2.0 * e).exp() - 1.0);
        c11 += t11;
        c12 += t12;
        if t11 < SERIES_TOL * c11 && t12 < SERIES_TOL * c12.max(SERIES_TOL) {
            let f = 8.0 * std::f64::consts::PI * alpha;
            return Ok((f * c11, -f * c12));
        }
    }
    Err(Error::invalid("capacitance series", "did not converge; gap too small"))
}

/// Axial dipole coupling `P` of the pair by its explicit series.
pub fn dipole_series(r0: f64, d0: f64) -> Result<f64> {
    if !(r0 > 0.0 && d0 > 0.0) {
        return Err(Error::invalid("pair shape", format!("r0 = {r0}, d0 = {d0}")));
    }
    let (alpha, t) = bipolar_params(r0, d0);
    let lead = -FOUR_PI * r0 * (r0 + 0.5 * d0);
    let mut sum = 0.0;
    for n in 0..SERIES_MAX_TERMS {
        let odd = (2 * n + 1) as f64;
        let term = odd * (-odd * t).exp() / (0.5 * odd * t).tanh();
        sum += term;
        if term < SERIES_TOL * sum {
            return Ok(lead - 8.0 * std::f64::consts::PI * alpha * alpha * sum);
        }
    }
    Err(Error::invalid("dipole series", "did not converge; gap too small"))
}

/// Axial dipole coupling `P = ∫_{∂D} y_axis (ψ1 - ψ2) dσ`, computed both from
/// the equilibrium densities and from the explicit series; errors when the
/// two routes disagree (truncation too low). Also checks that the transverse
/// moments vanish.
pub fn dipole_coupling(geom: &DimerGeometry, n_max: usize) -> Result<f64> {
    let cluster = axial_cluster(geom);
    let (psi1, psi2) = solve_psi12(geom, n_max)?;
    let diff = SurfaceDensity::from_coeffs(psi1.basis, &psi1.coeffs - &psi2.coeffs);
    let axial = coordinate_moment(&cluster, &diff, 2);
    let scale = geom.scale;
    for axis in [0usize, 1] {
        let m = coordinate_moment(&cluster, &diff, axis);
        if m.norm() > 1e-9 * axial.norm() {
            return Err(Error::invalid(
                "dipole moment",
                format!("transverse moment {axis} = {m} should vanish"),
            ));
        }
    }
    let series = dipole_series(scale * geom.r0, scale * geom.d0)?;
    let gap = (axial.re - series).abs() / series.abs();
    if gap > 1e-4 {
        return Err(Error::RouteMismatch { context: "dipole coupling", gap });
    }
    Ok(axial.re)
}

/// Truncation for the plain static solves behind the polarizability.
const POLARIZABILITY_N_MAX: usize = 14;

pub(crate) fn cluster_polarizability(cluster: &SphereCluster, n_max: usize) -> Result<Mat3> {
    let (s0, _) = build_cluster_static(cluster, n_max)?;
    let mut out = Mat3::zeros();
    for i in 0..3 {
        let rhs = coordinate_restriction(cluster, n_max, i);
        let u = linalg::solve(&s0, &rhs.coeffs, "polarizability solve")?;
        let u = SurfaceDensity::from_coeffs(rhs.basis, u);
        for j in 0..3 {
            let m = coordinate_moment(cluster, &u, j);
            if m.im.abs() > 1e-9 * (1.0 + m.norm()) {
                return Err(Error::invalid(
                    "polarizability",
                    format!("entry ({i},{j}) has imaginary part {m}"),
                ));
            }
            out[(i, j)] = m.re;
        }
    }
    Ok(out)
}

/// Static polarizability `Π_ij = ∫_{∂D} (S^0)^{-1}[x_i](y) y_j dσ(y)` of the
/// pair, in world coordinates.
pub fn static_polarizability(geom: &DimerGeometry) -> Result<Mat3> {
    let cluster = axial_cluster(geom);
    let pi_axial = cluster_polarizability(&cluster, POLARIZABILITY_N_MAX)?;
    let rot = geom.frame().rotation;
    Ok(rot * pi_axial * rot.transpose())
}
