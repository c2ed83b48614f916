//! Metric distances between panorama pixels.
//!
//! Each endpoint is lifted to a virtual-frame point with its depth, then
//! taken to world coordinates. The length equals the virtual-frame
//! distance; world coordinates are kept for reporting.

use serde::{Deserialize, Serialize};

use crate::depth::DepthImage;
use crate::geometry::{pano_inverse, virtual_to_world, PanoGeometry, RigidTransform, Vec3};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredSegment {
    pub p1: (f64, f64),
    pub p2: (f64, f64),
    pub d1: f64,
    pub d2: f64,
    pub w1: [f64; 3],
    pub w2: [f64; 3],
    pub length: f64,
}

/// Lifts pano pixel `(u, v)` at radial `depth` to world coordinates.
pub fn pano_pixel_to_world(u: f64, v: f64, depth: f64, vpose: &RigidTransform, g: &PanoGeometry) -> Result<Vec3> {
    let p_v = pano_inverse(u, v, depth, g)?;
    Ok(virtual_to_world(&p_v, vpose))
}

/// Depth at the nearest pixel to `(u, v)`.
pub fn depth_at(depth: &DepthImage, u: f64, v: f64, g: &PanoGeometry) -> Result<f64> {
    if depth.dimensions() != (g.width, g.height) {
        return Err(Error::DimensionMismatch(format!(
            "depth map is {}x{}, panorama is {}x{}",
            depth.width(),
            depth.height(),
            g.width,
            g.height
        )));
    }
    if !(u.is_finite() && v.is_finite() && (0.0..g.width as f64).contains(&u) && (0.0..=g.height as f64).contains(&v)) {
        return Err(Error::PixelOutOfRange { u, v, width: g.width, height: g.height });
    }
    let (x, y) = g.nearest_pixel(u, v);
    let d = depth.get(x, y);
    if d <= 0.0 {
        return Err(Error::InvalidDepthAt { u, v });
    }
    Ok(d)
}

/// Segment between two endpoints whose depths are already known.
pub fn segment_from_depths(
    p1: (f64, f64),
    d1: f64,
    p2: (f64, f64),
    d2: f64,
    vpose: &RigidTransform,
    g: &PanoGeometry,
) -> Result<MeasuredSegment> {
    let w1 = pano_pixel_to_world(p1.0, p1.1, d1, vpose, g)?;
    let w2 = pano_pixel_to_world(p2.0, p2.1, d2, vpose, g)?;
    Ok(MeasuredSegment { p1, p2, d1, d2, w1: w1.into(), w2: w2.into(), length: (w1 - w2).norm() })
}

/// Measures the segment between two pixels of a panoramic depth map.
pub fn measure_segment(
    p1: (f64, f64),
    p2: (f64, f64),
    depth: &DepthImage,
    vpose: &RigidTransform,
    g: &PanoGeometry,
) -> Result<MeasuredSegment> {
    let d1 = depth_at(depth, p1.0, p1.1, g)?;
    let d2 = depth_at(depth, p2.0, p2.1, g)?;
    segment_from_depths(p1, d1, p2, d2, vpose, g)
}

/// Length in meters of the segment between two pixels.
pub fn measure_distance(
    p1: (f64, f64),
    p2: (f64, f64),
    depth: &DepthImage,
    vpose: &RigidTransform,
    g: &PanoGeometry,
) -> Result<f64> {
    Ok(measure_segment(p1, p2, depth, vpose, g)?.length)
}

/// Euclidean distance of two world points.
pub fn world_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    (Vec3::from(a) - Vec3::from(b)).norm()
}
