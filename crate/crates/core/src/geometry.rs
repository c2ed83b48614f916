//! Coordinate-frame math: world, camera, pixel, virtual and panorama frames.
//!
//! Conventions used throughout the crate:
//!
//! * camera poses map world to camera, `p_c = R * p_w + t`;
//! * the virtual (station) pose maps world to virtual, `p_v = R_v * p_w + T_v`;
//! * camera frames are x right, y down, z forward;
//! * the panorama column `u` grows as the azimuth `alpha = atan2(y, x)`
//!   decreases, the row `v` grows with the polar angle `beta` measured from +z.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

const ROTATION_TOLERANCE: f64 = 1e-9;

/// Rotation plus translation, applied as `R * p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    rotation: Mat3,
    translation: Vec3,
}

impl RigidTransform {
    /// Builds a transform, rejecting rotations that are not proper
    /// (orthonormal with determinant +1).
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self> {
        let deviation = rotation_deviation(&rotation);
        if !(deviation <= ROTATION_TOLERANCE) || !translation.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidRotation { deviation });
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity() -> Self {
        Self { rotation: Mat3::identity(), translation: Vec3::zeros() }
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self { rotation: Mat3::identity(), translation }
    }

    /// Rotation by `angle` radians about the unit `axis`, no translation.
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let axis = nalgebra::Unit::new_normalize(axis);
        let rotation = *nalgebra::Rotation3::from_axis_angle(&axis, angle).matrix();
        Self { rotation, translation: Vec3::zeros() }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// `R^T (p - t)`, the inverse mapping without building the inverse.
    pub fn apply_inverse(&self, p: &Vec3) -> Vec3 {
        self.rotation.transpose() * (p - self.translation)
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self { rotation: rt, translation: -(rt * self.translation) }
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }
}

/// Max-norm of `R^T R - I` combined with `|det R - 1|`.
pub fn rotation_deviation(r: &Mat3) -> f64 {
    let ortho = (r.transpose() * r - Mat3::identity()).abs().max();
    ortho.max((r.determinant() - 1.0).abs())
}

/// Which frames a stored pose connects. Files must declare it explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameConvention {
    #[serde(rename = "camera_from_world")]
    CameraFromWorld,
    #[serde(rename = "virtual_from_world")]
    VirtualFromWorld,
}

impl fmt::Display for FrameConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameConvention::CameraFromWorld => "camera_from_world",
            FrameConvention::VirtualFromWorld => "virtual_from_world",
        })
    }
}

/// A transform tagged with the direction it maps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FramedPose {
    pub convention: FrameConvention,
    pub transform: RigidTransform,
}

impl FramedPose {
    pub fn camera_from_world(transform: RigidTransform) -> Self {
        Self { convention: FrameConvention::CameraFromWorld, transform }
    }

    pub fn virtual_from_world(transform: RigidTransform) -> Self {
        Self { convention: FrameConvention::VirtualFromWorld, transform }
    }

    /// Returns the transform if it was declared with `expected`.
    pub fn expect(&self, expected: FrameConvention) -> Result<&RigidTransform> {
        if self.convention == expected {
            Ok(&self.transform)
        } else {
            Err(Error::ConventionMismatch {
                expected: expected.to_string(),
                found: self.convention.to_string(),
            })
        }
    }
}

/// Pinhole intrinsics in pixels. `fx = f/dx`, `fy = f/dy`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub u0: f64,
    pub v0: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, u0: f64, v0: f64, width: u32, height: u32) -> Result<Self> {
        let k = Self { fx, fy, u0, v0, width, height };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0 && self.fx.is_finite() && self.fy.is_finite()) {
            return Err(Error::InvalidIntrinsics(format!(
                "focal lengths must be positive (fx = {}, fy = {})",
                self.fx, self.fy
            )));
        }
        if !(0.0..self.width as f64).contains(&self.u0) || !(0.0..self.height as f64).contains(&self.v0) {
            return Err(Error::InvalidIntrinsics(format!(
                "principal point ({}, {}) outside {}x{} sensor",
                self.u0, self.v0, self.width, self.height
            )));
        }
        Ok(())
    }

    /// True when the continuous pixel lies inside the sensor, pixel centers
    /// being at integer coordinates.
    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u <= (self.width - 1) as f64 && v <= (self.height - 1) as f64
    }
}

/// A camera of the rig: intrinsics plus its camera-from-world pose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    pub intrinsics: CameraIntrinsics,
    pub pose: FramedPose,
}

/// Azimuth `alpha` in [-pi, pi] and polar angle `beta` in [0, pi].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalDirection {
    pub alpha: f64,
    pub beta: f64,
}

impl SphericalDirection {
    pub fn unit_vector(&self) -> Vec3 {
        let (sb, cb) = self.beta.sin_cos();
        let (sa, ca) = self.alpha.sin_cos();
        Vec3::new(sb * ca, sb * sa, cb)
    }
}

/// Equirectangular raster size; `width == 2 * height`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanoGeometry {
    pub width: u32,
    pub height: u32,
}

impl PanoGeometry {
    pub const DEFAULT_WIDTH: u32 = 8192;

    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 || width != 2 * height || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
            return Err(Error::InvalidPanoGeometry { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn from_width(width: u32) -> Result<Self> {
        Self::new(width, width / 2)
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// First row of the nadir band, the bottom two tenths of the raster.
    pub fn nadir_band_start(&self) -> u32 {
        (0.8 * self.height as f64).ceil() as u32
    }

    /// Integer pixel nearest to a continuous position; columns wrap,
    /// rows clamp.
    pub fn nearest_pixel(&self, u: f64, v: f64) -> (u32, u32) {
        let w = self.width as i64;
        let col = (u.round() as i64).rem_euclid(w);
        let row = (v.round() as i64).clamp(0, self.height as i64 - 1);
        (col as u32, row as u32)
    }

    /// Spherical direction of a (continuous) pixel.
    pub fn direction(&self, u: f64, v: f64) -> SphericalDirection {
        SphericalDirection {
            alpha: PI - u * 2.0 * PI / self.width as f64,
            beta: PI * v / self.height as f64,
        }
    }
}

impl Default for PanoGeometry {
    fn default() -> Self {
        Self { width: Self::DEFAULT_WIDTH, height: Self::DEFAULT_WIDTH / 2 }
    }
}

pub fn world_to_camera(p_w: &Vec3, pose: &RigidTransform) -> Vec3 {
    pose.apply(p_w)
}

/// Pinhole projection, no bounds check.
pub fn camera_to_pixel(p_c: &Vec3, k: &CameraIntrinsics) -> Result<(f64, f64)> {
    if !(p_c.z > 0.0) {
        return Err(Error::PointBehindCamera { z: p_c.z });
    }
    Ok((k.fx * p_c.x / p_c.z + k.u0, k.fy * p_c.y / p_c.z + k.v0))
}

/// Back-projects a pixel with known camera-frame depth `Z_C` into the world.
pub fn pixel_to_world(u: f64, v: f64, depth: f64, k: &CameraIntrinsics, pose: &RigidTransform) -> Result<Vec3> {
    if !(depth > 0.0) {
        return Err(Error::NonPositiveDepth(depth));
    }
    let p_c = Vec3::new((u - k.u0) * depth / k.fx, (v - k.v0) * depth / k.fy, depth);
    Ok(pose.apply_inverse(&p_c))
}

pub fn world_to_virtual(p_w: &Vec3, rig_pose: &RigidTransform) -> Vec3 {
    rig_pose.apply(p_w)
}

/// `R_v^-1 (p_v - T_v)`.
pub fn virtual_to_world(p_v: &Vec3, rig_pose: &RigidTransform) -> Vec3 {
    rig_pose.apply_inverse(p_v)
}

/// Direction of a virtual-frame point. At the poles the azimuth is 0.
pub fn spherical_direction(p_v: &Vec3) -> Result<SphericalDirection> {
    if p_v.norm_squared() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let alpha = p_v.y.atan2(p_v.x);
    let beta = p_v.x.hypot(p_v.y).atan2(p_v.z);
    Ok(SphericalDirection { alpha, beta })
}

/// Forward spherical mapping of a virtual-frame point onto the panorama.
/// The returned column lies in `[0, U)`.
pub fn pano_forward(p_v: &Vec3, g: &PanoGeometry) -> Result<(f64, f64)> {
    let dir = spherical_direction(p_v)?;
    let width = g.width as f64;
    let mut u = width * (PI - dir.alpha) / (2.0 * PI);
    if u >= width {
        u -= width;
    }
    let v = g.height as f64 * dir.beta / PI;
    Ok((u, v))
}

/// Inverse spherical mapping: pixel plus radial depth to a virtual-frame point.
pub fn pano_inverse(u: f64, v: f64, depth: f64, g: &PanoGeometry) -> Result<Vec3> {
    if !(depth > 0.0) {
        return Err(Error::NonPositiveDepth(depth));
    }
    if !(u >= 0.0 && u < g.width as f64 && v >= 0.0 && v <= g.height as f64) {
        return Err(Error::PixelOutOfRange { u, v, width: g.width, height: g.height });
    }
    Ok(g.direction(u, v).unit_vector() * depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn k500() -> CameraIntrinsics {
        CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap()
    }

    #[test]
    fn world_to_camera_examples() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(world_to_camera(&p, &RigidTransform::identity()), p);
        let shift = RigidTransform::from_translation(Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(world_to_camera(&Vec3::zeros(), &shift), Vec3::new(1.0, 0.0, 0.0));
        let rz = RigidTransform::from_axis_angle(Vec3::z(), PI / 2.0);
        let q = world_to_camera(&Vec3::x(), &rz);
        assert!((q - Vec3::y()).norm() < 1e-15);
    }

    #[test]
    fn camera_to_pixel_examples() {
        let k = k500();
        assert_eq!(camera_to_pixel(&Vec3::new(0.0, 0.0, 5.0), &k).unwrap(), (320.0, 240.0));
        assert_eq!(camera_to_pixel(&Vec3::new(1.0, 0.0, 2.0), &k).unwrap(), (570.0, 240.0));
        assert!(matches!(
            camera_to_pixel(&Vec3::new(0.0, 0.0, -1.0), &k),
            Err(Error::PointBehindCamera { .. })
        ));
        assert!(camera_to_pixel(&Vec3::new(1.0, 1.0, 0.0), &k).is_err());
    }

    #[test]
    fn pixel_to_world_examples() {
        let k = k500();
        let id = RigidTransform::identity();
        assert_eq!(pixel_to_world(320.0, 240.0, 3.0, &k, &id).unwrap(), Vec3::new(0.0, 0.0, 3.0));
        assert_eq!(pixel_to_world(570.0, 240.0, 2.0, &k, &id).unwrap(), Vec3::new(1.0, 0.0, 2.0));
        assert!(matches!(pixel_to_world(1.0, 1.0, 0.0, &k, &id), Err(Error::NonPositiveDepth(_))));
    }

    #[test]
    fn virtual_to_world_examples() {
        let p = Vec3::new(1.0, 1.0, 1.0);
        assert_eq!(virtual_to_world(&p, &RigidTransform::identity()), p);
        let lifted = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 1.5));
        assert_eq!(virtual_to_world(&Vec3::zeros(), &lifted), Vec3::new(0.0, 0.0, -1.5));
        let pose = RigidTransform::from_axis_angle(Vec3::new(1.0, 2.0, 3.0), 0.7)
            .compose(&RigidTransform::from_translation(Vec3::new(0.3, -2.0, 1.0)));
        let back = world_to_virtual(&virtual_to_world(&p, &pose), &pose);
        assert!((back - p).norm() < 1e-9);
    }

    #[test]
    fn pano_forward_examples() {
        let g = PanoGeometry::new(8192, 4096).unwrap();
        assert_eq!(pano_forward(&Vec3::z(), &g).unwrap(), (4096.0, 0.0));
        assert_eq!(pano_forward(&Vec3::x(), &g).unwrap(), (4096.0, 2048.0));
        let (u, v) = pano_forward(&Vec3::y(), &g).unwrap();
        assert!(close(u, 2048.0, 1e-9) && close(v, 2048.0, 1e-9));
        assert!(matches!(pano_forward(&Vec3::zeros(), &g), Err(Error::ZeroVector)));
    }

    #[test]
    fn pano_inverse_examples() {
        let g = PanoGeometry::new(8192, 4096).unwrap();
        let p = pano_inverse(4096.0, 2048.0, 2.0, &g).unwrap();
        assert!((p - Vec3::new(2.0, 0.0, 0.0)).norm() < 1e-12);
        for u in [0.0, 17.5, 4000.0, 8191.0] {
            let p = pano_inverse(u, 0.0, 3.0, &g).unwrap();
            assert!((p - Vec3::new(0.0, 0.0, 3.0)).norm() < 1e-12);
        }
        assert!(pano_inverse(1.0, 1.0, -1.0, &g).is_err());
        assert!(pano_inverse(8192.0, 1.0, 1.0, &g).is_err());
        assert!(pano_inverse(1.0, 4097.0, 1.0, &g).is_err());
    }

    #[test]
    fn rejects_reflections_and_bad_intrinsics() {
        let flip = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(RigidTransform::new(flip, Vec3::zeros()).is_err());
        assert!(RigidTransform::new(Mat3::identity() * 1.01, Vec3::zeros()).is_err());
        assert!(CameraIntrinsics::new(0.0, 1.0, 1.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 4.0, 1.0, 4, 4).is_err());
        assert!(PanoGeometry::new(100, 40).is_err());
        assert!(PanoGeometry::new(6, 3).is_err());
    }

    #[test]
    fn convention_is_checked() {
        let pose = FramedPose::camera_from_world(RigidTransform::identity());
        assert!(pose.expect(FrameConvention::CameraFromWorld).is_ok());
        assert!(matches!(
            pose.expect(FrameConvention::VirtualFromWorld),
            Err(Error::ConventionMismatch { .. })
        ));
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let t = RigidTransform::from_axis_angle(Vec3::new(-1.0, 0.5, 2.0), 2.1)
            .compose(&RigidTransform::from_translation(Vec3::new(4.0, -1.0, 0.5)));
        let id = t.compose(&t.inverse());
        assert!((id.rotation() - Mat3::identity()).abs().max() < 1e-9);
        assert!(id.translation().abs().max() < 1e-9);
        assert!(rotation_deviation(t.rotation()) < 1e-12);
    }
}
