//! On-disk formats: calibration documents, point clouds, depth and color
//! PNGs, and the panorama metadata read by the viewer.

mod calibration;
mod cloud;
mod depth_png;
mod metadata;

use std::path::Path;

use image::RgbImage;

use crate::{Error, Result};

pub use calibration::{
    load_calibration, parse_calibration, save_calibration, CalibrationFile, CameraRecord, PoseRecord, StationRecord,
};
pub use cloud::{parse_point_cloud, read_point_cloud, write_ply, CloudFormat};
pub use depth_png::{decode_depth_mm, encode_depth_mm, read_depth_png, write_depth_png, DEPTH_SCALE_MM};
pub use metadata::{read_metadata, write_metadata, PanoMetadata};

pub fn read_rgb_png(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|source| Error::Image { path: path.into(), source })?;
    Ok(img.into_rgb8())
}

pub fn write_rgb_png(img: &RgbImage, path: &Path) -> Result<()> {
    create_parent(path)?;
    img.save_with_format(path, image::ImageFormat::Png).map_err(|source| Error::Image { path: path.into(), source })
}

pub(crate) fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        _ => Ok(()),
    }
}
