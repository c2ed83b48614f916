//! Small raster helpers shared by the depth, seam and blend stages.

use image::RgbImage;

/// Interleaved floating point RGB raster, values on a 0-255 scale.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbF {
    pub width: u32,
    pub height: u32,
    pub data: Vec<[f32; 3]>,
}

impl RgbF {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, data: vec![[0.0; 3]; width as usize * height as usize] }
    }

    pub fn from_rgb(img: &RgbImage) -> Self {
        let data = img.pixels().map(|p| [p[0] as f32, p[1] as f32, p[2] as f32]).collect();
        Self { width: img.width(), height: img.height(), data }
    }

    /// Rounds half away from zero and clamps to 0..=255.
    pub fn to_rgb(&self) -> RgbImage {
        let mut out = RgbImage::new(self.width, self.height);
        for (dst, src) in out.pixels_mut().zip(&self.data) {
            for c in 0..3 {
                dst[c] = quantize(src[c]);
            }
        }
        out
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [f32; 3] {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: [f32; 3]) {
        let w = self.width as usize;
        self.data[y as usize * w + x as usize] = value;
    }
}

#[inline]
pub fn quantize(value: f32) -> u8 {
    value.round().clamp(0.0, 255.0) as u8
}

/// Bilinear sample at a continuous position. The caller guarantees
/// `0 <= u <= width-1` and `0 <= v <= height-1`.
pub fn bilinear_rgb(img: &RgbImage, u: f64, v: f64) -> [f32; 3] {
    let (w, h) = img.dimensions();
    let x0 = (u.floor() as u32).min(w - 1);
    let y0 = (v.floor() as u32).min(h - 1);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = (u - x0 as f64) as f32;
    let fy = (v - y0 as f64) as f32;
    let p00 = img.get_pixel(x0, y0);
    let p10 = img.get_pixel(x1, y0);
    let p01 = img.get_pixel(x0, y1);
    let p11 = img.get_pixel(x1, y1);
    let mut out = [0.0f32; 3];
    for c in 0..3 {
        // Exact for flat regions: all four taps equal gives the tap value.
        let top = p00[c] as f32 + (p10[c] as f32 - p00[c] as f32) * fx;
        let bottom = p01[c] as f32 + (p11[c] as f32 - p01[c] as f32) * fx;
        out[c] = top + (bottom - top) * fy;
    }
    out
}

/// Reflect-101 border index (`-1 -> 1`, `n -> n-2`).
#[inline]
pub fn reflect101(i: i64, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as i64;
    let period = 2 * (n - 1);
    let mut i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}
