//! Synthetic box-room scenes with analytic ground truth.
//!
//! The room is axis aligned with the floor at `z = 0`. Walls carry a
//! deterministic texture: a faint checker, identifier stripes near the
//! ceiling (one stripe on the +x wall, two on +y, three on -x, four on -y)
//! and small marker discs whose centers double as measurement targets.
//! The point cloud is a regular lattice on every face, shifted by a
//! seed-dependent phase.

use std::f64::consts::PI;
use std::path::Path;

use image::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depth::{DepthImage, PointCloud};
use crate::geometry::{Camera, CameraIntrinsics, FramedPose, Mat3, PanoGeometry, RigidTransform, Vec3};
use crate::io::{create_parent, save_calibration};
use crate::pipeline::StationBundle;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigSpec {
    pub count: usize,
    pub azimuth_spacing_deg: f64,
    /// Azimuth of camera 0 in the station frame.
    pub azimuth_offset_deg: f64,
    /// Horizontal distance of camera centers from the station origin.
    pub radius: f64,
    pub intrinsics: CameraIntrinsics,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationSpec {
    /// Station origin in world coordinates; `z` is the height above the floor.
    pub position: [f64; 3],
    /// Rotation of the station frame about the vertical axis.
    pub yaw_deg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    /// Extent along x, y and z in meters.
    pub room: [f64; 3],
    pub rig: RigSpec,
    pub stations: Vec<StationSpec>,
    /// 0: checker, stripes and markers; 1: flat wall colors.
    pub texture: u32,
    /// Point-cloud samples per square meter of surface.
    pub density: f64,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        let side = 1296;
        let f = 540.0;
        Self {
            room: [4.0, 6.0, 3.0],
            rig: RigSpec {
                count: 6,
                azimuth_spacing_deg: 60.0,
                azimuth_offset_deg: 30.0,
                radius: 0.1,
                intrinsics: CameraIntrinsics {
                    fx: f,
                    fy: f,
                    u0: (side - 1) as f64 / 2.0,
                    v0: (side - 1) as f64 / 2.0,
                    width: side,
                    height: side,
                },
            },
            stations: vec![
                StationSpec { position: [0.0, -1.3, 1.5], yaw_deg: 0.0 },
                StationSpec { position: [0.0, 1.3, 1.5], yaw_deg: 0.0 },
            ],
            texture: 0,
            density: 50.0,
            seed: 7,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::DegenerateScene(m));
        if !self.room.iter().all(|&d| d > 0.0 && d.is_finite()) {
            return bad(format!("room dimensions must be positive, got {:?}", self.room));
        }
        if self.rig.count < 2 {
            return bad(format!("rig needs at least 2 cameras, got {}", self.rig.count));
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return bad(format!("density must be positive, got {}", self.density));
        }
        if self.texture > 1 {
            return bad(format!("unknown texture pattern {}", self.texture));
        }
        if self.stations.is_empty() {
            return bad("no stations".into());
        }
        self.rig.intrinsics.validate().map_err(|e| Error::DegenerateScene(e.to_string()))?;
        let room = self.room();
        for (i, st) in self.stations.iter().enumerate() {
            let p = Vec3::from(st.position);
            let r = self.rig.radius;
            let inside = p.x - r > room.min.x
                && p.x + r < room.max.x
                && p.y - r > room.min.y
                && p.y + r < room.max.y
                && p.z > room.min.z
                && p.z < room.max.z;
            if !inside {
                return bad(format!("station {i} at {:?} is not inside the room", st.position));
            }
        }
        Ok(())
    }

    pub fn room(&self) -> Room {
        let [w, l, h] = self.room;
        Room { min: Vec3::new(-w / 2.0, -l / 2.0, 0.0), max: Vec3::new(w / 2.0, l / 2.0, h) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Face {
    XMax,
    YMax,
    XMin,
    YMin,
    Floor,
    Ceiling,
}

impl Face {
    pub const ALL: [Face; 6] = [Face::XMax, Face::YMax, Face::XMin, Face::YMin, Face::Floor, Face::Ceiling];

    fn wall_index(self) -> Option<usize> {
        match self {
            Face::XMax => Some(0),
            Face::YMax => Some(1),
            Face::XMin => Some(2),
            Face::YMin => Some(3),
            Face::Floor | Face::Ceiling => None,
        }
    }
}

/// Axis-aligned box seen from the inside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Room {
    pub min: Vec3,
    pub max: Vec3,
}

impl Room {
    /// Distance along the unit ray `dir` from an interior `origin` to the
    /// face it exits through.
    pub fn ray_exit(&self, origin: &Vec3, dir: &Vec3) -> Option<(f64, Face)> {
        let mut best: Option<(f64, Face)> = None;
        let axes = [(Face::XMin, Face::XMax), (Face::YMin, Face::YMax), (Face::Floor, Face::Ceiling)];
        for (axis, (neg, pos)) in axes.into_iter().enumerate() {
            let d = dir[axis];
            if d == 0.0 {
                continue;
            }
            let (bound, face) = if d > 0.0 { (self.max[axis], pos) } else { (self.min[axis], neg) };
            let t = (bound - origin[axis]) / d;
            if t >= 0.0 && best.is_none_or(|(b, _)| t < b) {
                best = Some((t, face));
            }
        }
        best
    }

    /// In-plane coordinates of a point on `face`: `(s, z)` for walls,
    /// `(x, y)` for the floor and the ceiling.
    fn face_coords(face: Face, p: &Vec3) -> (f64, f64) {
        match face {
            Face::XMax | Face::XMin => (p.y, p.z),
            Face::YMax | Face::YMin => (p.x, p.z),
            Face::Floor | Face::Ceiling => (p.x, p.y),
        }
    }

    /// Ranges of the in-plane coordinates of `face`.
    fn face_extent(&self, face: Face) -> ((f64, f64), (f64, f64)) {
        let (lo, hi) = (self.min, self.max);
        match face {
            Face::XMax | Face::XMin => ((lo.y, hi.y), (lo.z, hi.z)),
            Face::YMax | Face::YMin => ((lo.x, hi.x), (lo.z, hi.z)),
            Face::Floor | Face::Ceiling => ((lo.x, hi.x), (lo.y, hi.y)),
        }
    }

    fn face_point(&self, face: Face, a: f64, b: f64) -> Vec3 {
        match face {
            Face::XMax => Vec3::new(self.max.x, a, b),
            Face::XMin => Vec3::new(self.min.x, a, b),
            Face::YMax => Vec3::new(a, self.max.y, b),
            Face::YMin => Vec3::new(a, self.min.y, b),
            Face::Floor => Vec3::new(a, b, self.min.z),
            Face::Ceiling => Vec3::new(a, b, self.max.z),
        }
    }
}

const WALL_COLORS: [[f64; 3]; 4] = [[196.0, 110.0, 96.0], [104.0, 128.0, 190.0], [110.0, 170.0, 112.0], [200.0, 180.0, 100.0]];
const FLOOR_COLOR: [u8; 3] = [150, 140, 128];
const CEILING_COLOR: [u8; 3] = [228, 228, 220];
const CHECKER: f64 = 0.5;
const CHECKER_GAIN: f64 = 0.97;
const MARKER_RADIUS: f64 = 0.05;
const MARKER_GAIN: f64 = 0.85;
const STRIPE_GAIN: f64 = 0.55;

/// Procedural surface texture.
#[derive(Clone, Debug, PartialEq)]
pub struct Texture {
    pattern: u32,
    room: Room,
    markers: Vec<(Face, Vec3)>,
}

impl Texture {
    pub fn color(&self, face: Face, p: &Vec3) -> [u8; 3] {
        let Some(wall) = face.wall_index() else {
            return if face == Face::Floor { FLOOR_COLOR } else { CEILING_COLOR };
        };
        let base = WALL_COLORS[wall];
        if self.pattern == 1 {
            return base.map(|c| c as u8);
        }
        let (s, z) = Room::face_coords(face, p);
        let mut gain = 1.0;
        if ((s / CHECKER).floor() as i64 + (z / CHECKER).floor() as i64).rem_euclid(2) == 1 {
            gain *= CHECKER_GAIN;
        }
        let top = self.room.max.z;
        if z > top - 0.55 && z < top - 0.25 {
            let count = wall + 1;
            for j in 0..count {
                let center = (j as f64 - (count - 1) as f64 / 2.0) * 0.2;
                if (s - center).abs() < 0.04 {
                    gain *= STRIPE_GAIN;
                }
            }
        }
        if self.markers.iter().any(|(f, m)| *f == face && (m - p).norm() < MARKER_RADIUS) {
            gain *= MARKER_GAIN;
        }
        base.map(|c| (c * gain).round() as u8)
    }
}

/// A segment with known length, in world coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnownSegment {
    pub name: String,
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub segments: Vec<KnownSegment>,
    pub markers: Vec<[f64; 3]>,
}

/// A generated scene: stations, texture and ground truth.
#[derive(Clone, Debug)]
pub struct SynthScene {
    pub spec: SceneSpec,
    pub room: Room,
    pub texture: Texture,
    pub stations: Vec<StationBundle>,
    pub truth: GroundTruth,
}

fn markers(room: &Room) -> Vec<(Face, Vec3)> {
    let (x0, x1, y0, y1) = (room.min.x, room.max.x, room.min.y, room.max.y);
    vec![
        (Face::XMax, Vec3::new(x1, -0.6, 1.0)),
        (Face::XMax, Vec3::new(x1, 0.6, 1.0)),
        (Face::XMax, Vec3::new(x1, -0.6, 2.0)),
        (Face::XMin, Vec3::new(x0, -0.8, 1.2)),
        (Face::XMin, Vec3::new(x0, 0.8, 1.2)),
        (Face::YMax, Vec3::new(-0.9, y1, 1.0)),
        (Face::YMax, Vec3::new(0.9, y1, 1.0)),
        (Face::YMax, Vec3::new(0.9, y1, 2.1)),
        (Face::YMin, Vec3::new(-1.0, y0, 1.4)),
        (Face::YMin, Vec3::new(1.0, y0, 1.4)),
        (Face::XMax, Vec3::new(x1, y1 - 0.8, 1.5)),
        (Face::YMax, Vec3::new(x1 - 0.6, y1, 1.5)),
    ]
}

fn known_segments(room: &Room, markers: &[(Face, Vec3)]) -> Vec<KnownSegment> {
    let (lo, hi) = (room.min, room.max);
    let edge = |name: &str, a: Vec3, b: Vec3| KnownSegment { name: name.into(), a: a.into(), b: b.into(), length: (a - b).norm() };
    let pair = |name: &str, i: usize, j: usize| edge(name, markers[i].1, markers[j].1);
    vec![
        edge("wall corner to corner", Vec3::new(lo.x, hi.y, lo.z), Vec3::new(hi.x, hi.y, lo.z)),
        edge("vertical corner edge", Vec3::new(hi.x, hi.y, 0.5), Vec3::new(hi.x, hi.y, hi.z - 0.5)),
        edge("ceiling edge", Vec3::new(hi.x, -1.0, hi.z), Vec3::new(hi.x, 1.0, hi.z)),
        pair("marker 0-1", 0, 1),
        pair("marker 0-2", 0, 2),
        pair("marker 3-4", 3, 4),
        pair("marker 5-6", 5, 6),
        pair("marker 6-7", 6, 7),
        pair("marker 8-9", 8, 9),
        pair("marker 10-11", 10, 11),
    ]
}

/// Regular lattice on every face with spacing `1/sqrt(density)`.
fn lattice_cloud(room: &Room, density: f64, rng: &mut ChaCha8Rng) -> PointCloud {
    let step = 1.0 / density.sqrt();
    let mut points = Vec::new();
    for face in Face::ALL {
        let ((a0, a1), (b0, b1)) = room.face_extent(face);
        let (pa, pb): (f64, f64) = (rng.random::<f64>() * step, rng.random::<f64>() * step);
        let mut a = a0 + pa;
        while a < a1 {
            let mut b = b0 + pb;
            while b < b1 {
                points.push(room.face_point(face, a, b));
                b += step;
            }
            a += step;
        }
    }
    PointCloud::new(points)
}

/// Station frame from world: translation to the station origin, then a yaw.
pub fn station_pose(st: &StationSpec) -> FramedPose {
    let yaw = RigidTransform::from_axis_angle(Vec3::z(), -st.yaw_deg.to_radians());
    let shift = RigidTransform::from_translation(-Vec3::from(st.position));
    FramedPose::virtual_from_world(yaw.compose(&shift))
}

/// Camera `i` of the rig: horizontal optical axis at its azimuth, image
/// rows pointing down.
pub fn rig_camera(rig: &RigSpec, i: usize, vpose: &RigidTransform) -> Camera {
    let theta = (rig.azimuth_offset_deg + i as f64 * rig.azimuth_spacing_deg).to_radians();
    let (s, c) = theta.sin_cos();
    let z_axis = Vec3::new(c, s, 0.0);
    let y_axis = Vec3::new(0.0, 0.0, -1.0);
    let x_axis = y_axis.cross(&z_axis);
    let r_cv = Mat3::from_rows(&[x_axis.transpose(), y_axis.transpose(), z_axis.transpose()]);
    let center_v = z_axis * rig.radius;
    let camera_from_virtual = RigidTransform::new(r_cv, -(r_cv * center_v)).expect("orthonormal rig axes");
    Camera { intrinsics: rig.intrinsics, pose: FramedPose::camera_from_world(camera_from_virtual.compose(vpose)) }
}

fn camera_ray(cam: &Camera, x: f64, y: f64) -> (Vec3, Vec3) {
    let k = &cam.intrinsics;
    let pose = &cam.pose.transform;
    let d_c = Vec3::new((x - k.u0) / k.fx, (y - k.v0) / k.fy, 1.0);
    let origin = pose.apply_inverse(&Vec3::zeros());
    let dir = pose.rotation().transpose() * d_c;
    (origin, dir)
}

/// Renders a camera image by ray casting pixel centers.
pub fn render_camera(room: &Room, texture: &Texture, cam: &Camera) -> RgbImage {
    let k = cam.intrinsics;
    let mut data = vec![0u8; 3 * k.width as usize * k.height as usize];
    data.par_chunks_mut(3 * k.width as usize).enumerate().for_each(|(y, row)| {
        for x in 0..k.width as usize {
            let (o, d) = camera_ray(cam, x as f64, y as f64);
            let d = d.normalize();
            if let Some((t, face)) = room.ray_exit(&o, &d) {
                row[3 * x..3 * x + 3].copy_from_slice(&texture.color(face, &(o + d * t)));
            }
        }
    });
    RgbImage::from_raw(k.width, k.height, data).expect("buffer size")
}

/// Analytic camera depth (`z` in the camera frame) at every pixel center.
pub fn camera_depth_truth(room: &Room, cam: &Camera) -> DepthImage {
    let k = cam.intrinsics;
    let mut values = vec![0.0; k.width as usize * k.height as usize];
    values.par_chunks_mut(k.width as usize).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            let (o, d) = camera_ray(cam, x as f64, y as f64);
            // `d` has unit z in the camera frame, so the ray parameter is z.
            if let Some((t, _)) = room.ray_exit(&o, &d) {
                *out = t;
            }
        }
    });
    DepthImage::from_values(k.width, k.height, values).expect("sizes match")
}

/// Analytic radial depth at every pixel center of a panorama.
pub fn pano_depth_truth(room: &Room, vpose: &RigidTransform, g: &PanoGeometry) -> DepthImage {
    let origin = vpose.apply_inverse(&Vec3::zeros());
    let r_t = vpose.rotation().transpose();
    let mut values = vec![0.0; g.pixel_count()];
    values.par_chunks_mut(g.width as usize).enumerate().for_each(|(v, row)| {
        for (u, out) in row.iter_mut().enumerate() {
            let dir = r_t * g.direction(u as f64, v as f64).unit_vector();
            if let Some((t, _)) = room.ray_exit(&origin, &dir) {
                *out = t;
            }
        }
    });
    DepthImage::from_values(g.width, g.height, values).expect("sizes match")
}

/// Builds the scene described by `spec`. Identical specs give identical
/// scenes.
pub fn synth_scene(spec: &SceneSpec) -> Result<SynthScene> {
    spec.validate()?;
    let room = spec.room();
    let marks = markers(&room);
    let texture = Texture { pattern: spec.texture, room, markers: marks.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let cloud = lattice_cloud(&room, spec.density, &mut rng);
    let stations = spec
        .stations
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let virtual_pose = station_pose(st);
            let cameras: Vec<Camera> =
                (0..spec.rig.count).map(|c| rig_camera(&spec.rig, c, &virtual_pose.transform)).collect();
            let images = cameras.iter().map(|cam| render_camera(&room, &texture, cam)).collect();
            StationBundle {
                station_id: format!("s{i}"),
                images,
                cameras,
                virtual_pose,
                cloud: cloud.clone(),
                h_floor: st.position[2] - room.min.z,
            }
        })
        .collect();
    let truth = GroundTruth {
        segments: known_segments(&room, &marks),
        markers: marks.iter().map(|(_, m)| (*m).into()).collect(),
    };
    Ok(SynthScene { spec: spec.clone(), room, texture, stations, truth })
}

/// Writes the calibration document, images, cloud, `scene.json` and
/// `truth.json` into `dir`. Returns the calibration path.
pub fn write_scene(scene: &SynthScene, dir: &Path) -> Result<std::path::PathBuf> {
    let calibration = save_calibration(dir, &scene.stations)?;
    for (name, text) in [
        ("scene.json", serde_json::to_string_pretty(&scene.spec)),
        ("truth.json", serde_json::to_string_pretty(&scene.truth)),
    ] {
        let path = dir.join(name);
        create_parent(&path)?;
        std::fs::write(&path, text.expect("serializable") + "\n").map_err(|e| Error::io(&path, e))?;
    }
    Ok(calibration)
}

/// Reads a scene description written by [`write_scene`].
pub fn read_scene_spec(path: &Path) -> Result<SceneSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Parse { path: path.into(), source })
}

/// Azimuth of the optical axis of rig camera `i`, radians in `(-pi, pi]`.
pub fn rig_azimuth(rig: &RigSpec, i: usize) -> f64 {
    let a = (rig.azimuth_offset_deg + i as f64 * rig.azimuth_spacing_deg).to_radians();
    (a + PI).rem_euclid(2.0 * PI) - PI
}
