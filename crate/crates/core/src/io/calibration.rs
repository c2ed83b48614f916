use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{read_point_cloud, read_rgb_png, write_ply, write_rgb_png};
use crate::depth::PointCloud;
use crate::geometry::{Camera, CameraIntrinsics, FrameConvention, FramedPose, Mat3, RigidTransform, Vec3};
use crate::pipeline::StationBundle;
use crate::{Error, Result};

/// Rotation rows plus translation, tagged with the frames it connects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRecord {
    pub convention: FrameConvention,
    /// Row-major rotation.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

impl PoseRecord {
    pub fn from_pose(pose: &FramedPose) -> Self {
        let r = pose.transform.rotation();
        Self {
            convention: pose.convention,
            rotation: [0, 1, 2].map(|i| [r[(i, 0)], r[(i, 1)], r[(i, 2)]]),
            translation: (*pose.transform.translation()).into(),
        }
    }

    /// Checks the declared convention and the rotation.
    pub fn to_pose(&self, expected: FrameConvention, context: &str) -> Result<FramedPose> {
        let invariant = |message: String| Error::Invariant { context: context.to_string(), message };
        if self.convention != expected {
            return Err(invariant(format!("pose convention is {}, expected {expected}", self.convention)));
        }
        let rotation = Mat3::from_fn(|i, j| self.rotation[i][j]);
        let transform = RigidTransform::new(rotation, Vec3::from(self.translation)).map_err(|e| invariant(e.to_string()))?;
        Ok(FramedPose { convention: expected, transform })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraRecord {
    pub intrinsics: CameraIntrinsics,
    pub pose: PoseRecord,
    /// Relative to the calibration file.
    pub image_path: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationRecord {
    pub station_id: String,
    pub virtual_pose: PoseRecord,
    pub cameras: Vec<CameraRecord>,
    /// Relative to the calibration file.
    pub cloud_path: String,
    pub h_floor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationFile {
    pub stations: Vec<StationRecord>,
}

/// Parses calibration text; `path` is only used in error messages.
pub fn parse_calibration(text: &str, path: &Path) -> Result<CalibrationFile> {
    serde_json::from_str(text).map_err(|source| Error::Parse { path: path.into(), source })
}

/// Loads a calibration document together with the images and clouds it
/// references. Every bundle is validated.
pub fn load_calibration(path: &Path) -> Result<Vec<StationBundle>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file = parse_calibration(&text, path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut clouds: HashMap<PathBuf, PointCloud> = HashMap::new();
    let mut bundles = Vec::with_capacity(file.stations.len());
    for station in &file.stations {
        let id = &station.station_id;
        let virtual_pose = station.virtual_pose.to_pose(FrameConvention::VirtualFromWorld, &format!("station {id}"))?;
        let mut cameras = Vec::with_capacity(station.cameras.len());
        for (i, cam) in station.cameras.iter().enumerate() {
            let context = format!("station {id}, camera {i}");
            cam.intrinsics
                .validate()
                .map_err(|e| Error::Invariant { context: context.clone(), message: e.to_string() })?;
            let pose = cam.pose.to_pose(FrameConvention::CameraFromWorld, &context)?;
            cameras.push(Camera { intrinsics: cam.intrinsics, pose });
        }
        let images = station
            .cameras
            .par_iter()
            .map(|cam| read_rgb_png(&base.join(&cam.image_path)))
            .collect::<Result<Vec<_>>>()?;
        let cloud_path = base.join(&station.cloud_path);
        let cloud = match clouds.get(&cloud_path) {
            Some(c) => c.clone(),
            None => {
                let c = read_point_cloud(&cloud_path)?;
                clouds.insert(cloud_path, c.clone());
                c
            }
        };
        let bundle =
            StationBundle { station_id: id.clone(), images, cameras, virtual_pose, cloud, h_floor: station.h_floor };
        bundle
            .validate()
            .map_err(|e| Error::Invariant { context: format!("station {id}"), message: e.to_string() })?;
        bundles.push(bundle);
    }
    Ok(bundles)
}

/// Writes `calibration.json`, one PNG per camera and the point clouds into
/// `dir`. Stations sharing an identical cloud share one file.
pub fn save_calibration(dir: &Path, bundles: &[StationBundle]) -> Result<PathBuf> {
    let shared = bundles.windows(2).all(|w| w[0].cloud == w[1].cloud);
    let mut stations = Vec::with_capacity(bundles.len());
    for b in bundles {
        let cloud_path = if shared { "cloud.ply".to_string() } else { format!("{}/cloud.ply", b.station_id) };
        let cameras = b
            .cameras
            .iter()
            .enumerate()
            .map(|(i, cam)| CameraRecord {
                intrinsics: cam.intrinsics,
                pose: PoseRecord::from_pose(&cam.pose),
                image_path: format!("{}/cam{i}.png", b.station_id),
            })
            .collect::<Vec<_>>();
        cameras
            .par_iter()
            .zip(b.images.par_iter())
            .try_for_each(|(rec, img)| write_rgb_png(img, &dir.join(&rec.image_path)))?;
        if !shared || stations.is_empty() {
            write_ply(&b.cloud, &dir.join(&cloud_path))?;
        }
        stations.push(StationRecord {
            station_id: b.station_id.clone(),
            virtual_pose: PoseRecord::from_pose(&b.virtual_pose),
            cameras,
            cloud_path,
            h_floor: b.h_floor,
        });
    }
    let path = dir.join("calibration.json");
    let text = serde_json::to_string_pretty(&CalibrationFile { stations }).expect("calibration serializes");
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
