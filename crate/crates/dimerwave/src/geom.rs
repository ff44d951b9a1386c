//! Sphere-pair geometry, clusters of spheres, and frame changes.

use crate::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
pub type CVec3 = nalgebra::Vector3<crate::C64>;
pub type CMat3 = nalgebra::Matrix3<crate::C64>;

pub fn complex_vec(v: Vec3) -> CVec3 {
    v.map(|x| crate::C64::new(x, 0.0))
}

pub fn complex_mat(m: Mat3) -> CMat3 {
    m.map(|x| crate::C64::new(x, 0.0))
}

/// Rotation matrix taking direction `from` to direction `to`.
/// Falls back to a half-turn about a perpendicular axis when the two are
/// antiparallel (where the minimal rotation is not unique).
pub fn rotation_aligning(from: Vec3, to: Vec3) -> Mat3 {
    let f = from.normalize();
    let t = to.normalize();
    if let Some(rot) = nalgebra::Rotation3::rotation_between(&f, &t) {
        return *rot.matrix();
    }
    // antiparallel: any axis perpendicular to `f` works
    let probe = if f.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let axis = nalgebra::Unit::new_normalize(f.cross(&probe));
    *nalgebra::Rotation3::from_axis_angle(&axis, std::f64::consts::PI).matrix()
}

/// A single sphere in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

/// A finite collection of pairwise disjoint spheres.
#[derive(Debug, Clone)]
pub struct SphereCluster {
    spheres: Vec<Sphere>,
}

impl SphereCluster {
    pub fn new(spheres: Vec<Sphere>) -> Result<Self> {
        if spheres.is_empty() {
            return Err(Error::invalid("sphere cluster", "no spheres given"));
        }
        for (i, s) in spheres.iter().enumerate() {
            if !(s.radius > 0.0 && s.radius.is_finite()) {
                return Err(Error::invalid(
                    "sphere cluster",
                    format!("sphere {i} has radius {}", s.radius),
                ));
            }
        }
        for i in 0..spheres.len() {
            for j in (i + 1)..spheres.len() {
                let gap = (spheres[i].center - spheres[j].center).norm()
                    - spheres[i].radius
                    - spheres[j].radius;
                if gap <= 0.0 {
                    return Err(Error::invalid(
                        "sphere cluster",
                        format!("spheres {i} and {j} overlap (gap {gap:.3e})"),
                    ));
                }
            }
        }
        Ok(Self { spheres })
    }

    pub fn spheres(&self) -> &[Sphere] {
        &self.spheres
    }

    pub fn len(&self) -> usize {
        self.spheres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spheres.is_empty()
    }
}

/// Rigid placement of a local computation frame in the world:
/// `world = center + rotation · local`.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub rotation: Mat3,
    pub center: Vec3,
}

impl Frame {
    pub fn to_world(&self, local: Vec3) -> Vec3 {
        self.center + self.rotation * local
    }

    pub fn to_local(&self, world: Vec3) -> Vec3 {
        self.rotation.transpose() * (world - self.center)
    }

    /// Directions (covectors on gradients) transform without the offset.
    pub fn dir_to_world(&self, local: Vec3) -> Vec3 {
        self.rotation * local
    }

    pub fn dir_to_local(&self, world: Vec3) -> Vec3 {
        self.rotation.transpose() * world
    }
}

/// Two identical spheres of radius `s·r0` whose surfaces are `s·d0` apart,
/// centered on `center` and aligned with the unit vector `orientation`.
///
/// The dimensionless pair `(r0, d0)` fixes the shape; `scale` fixes the size.
/// Sphere 0 sits on the positive `orientation` side.
#[derive(Debug, Clone, Copy)]
pub struct DimerGeometry {
    pub r0: f64,
    pub d0: f64,
    pub scale: f64,
    pub orientation: Vec3,
    pub center: Vec3,
}

impl DimerGeometry {
    pub fn new(r0: f64, d0: f64, scale: f64, orientation: Vec3, center: Vec3) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::invalid("dimer", format!("radius r0 = {r0}")));
        }
        if !(d0 > 0.0 && d0.is_finite()) {
            return Err(Error::invalid("dimer", format!("gap d0 = {d0}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid("dimer", format!("scale = {scale}")));
        }
        let norm = orientation.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("dimer", "orientation must be a nonzero vector"));
        }
        Ok(Self { r0, d0, scale, orientation: orientation / norm, center })
    }

    /// Shape-only geometry: scale 1, axis along +x, centered at the origin.
    pub fn normalized(r0: f64, d0: f64) -> Result<Self> {
        Self::new(r0, d0, 1.0, Vec3::x(), Vec3::zeros())
    }

    /// The same shape stripped of scale and placement.
    pub fn to_normalized(&self) -> Self {
        Self {
            r0: self.r0,
            d0: self.d0,
            scale: 1.0,
            orientation: Vec3::x(),
            center: Vec3::zeros(),
        }
    }

    pub fn ball_radius(&self) -> f64 {
        self.scale * self.r0
    }

    /// Half the center-to-center distance.
    pub fn half_distance(&self) -> f64 {
        self.scale * (self.r0 + 0.5 * self.d0)
    }

    /// Centers in world coordinates; sphere 0 on the positive axis side.
    pub fn ball_centers(&self) -> [Vec3; 2] {
        let offset = self.half_distance() * self.orientation;
        [self.center + offset, self.center - offset]
    }

    pub fn total_volume(&self) -> f64 {
        let r = self.ball_radius();
        2.0 * (4.0 / 3.0) * std::f64::consts::PI * r * r * r
    }

    pub fn cluster(&self) -> SphereCluster {
        let r = self.ball_radius();
        let spheres = self
            .ball_centers()
            .iter()
            .map(|&center| Sphere { center, radius: r })
            .collect();
        SphereCluster::new(spheres).expect("dimer spheres are disjoint by construction")
    }

    /// Local frame with the dimer axis along local +z.
    pub fn frame(&self) -> Frame {
        Frame {
            rotation: rotation_aligning(Vec3::z(), self.orientation),
            center: self.center,
        }
    }
}
