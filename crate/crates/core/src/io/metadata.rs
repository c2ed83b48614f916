use std::path::Path;

use serde::{Deserialize, Serialize};

use super::calibration::PoseRecord;
use crate::{Error, Result};

/// Sidecar document describing a panorama bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanoMetadata {
    pub pano_width: u32,
    pub pano_height: u32,
    pub depth_scale_mm: f64,
    pub h_floor: f64,
    pub virtual_pose: PoseRecord,
    pub station_id: String,
    pub depth_path: String,
    pub rgb_path: String,
}

pub fn write_metadata(meta: &PanoMetadata, path: &Path) -> Result<()> {
    super::create_parent(path)?;
    let text = serde_json::to_string_pretty(meta).expect("metadata serializes");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_metadata(path: &Path) -> Result<PanoMetadata> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Parse { path: path.into(), source })
}
