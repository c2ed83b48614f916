use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};

use crate::depth::DepthImage;
use crate::{Error, Result};

/// Millimeters per stored unit.
pub const DEPTH_SCALE_MM: f64 = 1.0;

const MAX_DEPTH_M: f64 = u16::MAX as f64 / 1000.0;

/// Depth in meters to stored millimeters; invalid depths store 0.
pub fn encode_depth_mm(depth: f64) -> Result<u16> {
    if depth <= 0.0 {
        return Ok(0);
    }
    if !(depth < MAX_DEPTH_M) {
        return Err(Error::DepthOutOfRange(depth));
    }
    Ok((depth * 1000.0).round() as u16)
}

pub fn decode_depth_mm(stored: u16) -> f64 {
    stored as f64 / 1000.0
}

/// Writes a 16-bit grayscale PNG in millimeters, 0 marking invalid pixels.
pub fn write_depth_png(depth: &DepthImage, path: &Path) -> Result<()> {
    let data = depth.values().iter().map(|&d| encode_depth_mm(d)).collect::<Result<Vec<u16>>>()?;
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(depth.width(), depth.height(), data).expect("buffer size");
    super::create_parent(path)?;
    buf.save_with_format(path, image::ImageFormat::Png).map_err(|source| Error::Image { path: path.into(), source })
}

pub fn read_depth_png(path: &Path) -> Result<DepthImage> {
    let img = image::open(path).map_err(|source| Error::Image { path: path.into(), source })?;
    let DynamicImage::ImageLuma16(buf) = img else {
        return Err(Error::Malformed {
            path: path.into(),
            line: 0,
            message: format!("expected a 16-bit grayscale PNG, found {:?}", img.color()),
        });
    };
    let (w, h) = buf.dimensions();
    DepthImage::from_values(w, h, buf.into_raw().into_iter().map(decode_depth_mm).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantization_examples() {
        assert_eq!(encode_depth_mm(2.036).unwrap(), 2036);
        assert_eq!(encode_depth_mm(0.0).unwrap(), 0);
        assert!(matches!(encode_depth_mm(70.0), Err(Error::DepthOutOfRange(_))));
        assert!(encode_depth_mm(f64::NAN).is_err());
        assert_eq!(decode_depth_mm(5840), 5.84);
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.png");
        let mut d = DepthImage::new(5, 3);
        d.set(0, 0, 2.036);
        d.set(4, 2, 65.5);
        d.set(2, 1, 0.0004);
        write_depth_png(&d, &path).unwrap();
        let back = read_depth_png(&path).unwrap();
        assert_eq!(back.get(0, 0), 2.036);
        assert_eq!(back.get(4, 2), 65.5);
        assert!(!back.is_valid(2, 1));
        assert!(!back.is_valid(1, 1));
    }
}
