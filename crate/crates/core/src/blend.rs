//! Multi-band blending with Laplacian pyramids.
//!
//! Low frequencies are mixed over a wide transition and high frequencies
//! over a narrow one: every pyramid band is blended with a correspondingly
//! blurred copy of the selection mask, then the pyramid is collapsed.

use image::RgbImage;

use crate::raster::{reflect101, RgbF};
use crate::{Error, Result};

const KERNEL: [f32; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PyramidKind {
    Gaussian,
    Laplacian,
}

/// Level 0 is full resolution; each further level halves both sides,
/// rounding up.
#[derive(Clone, Debug, PartialEq)]
pub struct ImagePyramid {
    pub levels: Vec<RgbF>,
    pub kind: PyramidKind,
}

/// Default number of bands for a `width x height` blend region.
pub fn default_levels(width: u32, height: u32) -> usize {
    let min = width.min(height).max(1) as f64;
    ((min.log2().floor() as i64) - 4).max(1) as usize
}

/// Largest level count a `width x height` raster supports.
pub fn max_levels(width: u32, height: u32) -> usize {
    let min = width.min(height).max(1);
    (31 - min.leading_zeros()) as usize + 1
}

fn check_levels(levels: usize, width: u32, height: u32) -> Result<()> {
    if levels == 0 || levels > max_levels(width, height) {
        return Err(Error::TooManyLevels { levels, width, height });
    }
    Ok(())
}

/// Separable binomial blur with reflect-101 borders.
pub fn blur(img: &RgbF) -> RgbF {
    let (w, h) = (img.width as usize, img.height as usize);
    let mut tmp = RgbF::new(img.width, img.height);
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f32; 3];
            for (k, wk) in KERNEL.iter().enumerate() {
                let sx = reflect101(x as i64 + k as i64 - 2, w);
                let p = img.data[y * w + sx];
                for c in 0..3 {
                    acc[c] += wk * p[c];
                }
            }
            tmp.data[y * w + x] = acc;
        }
    }
    let mut out = RgbF::new(img.width, img.height);
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f32; 3];
            for (k, wk) in KERNEL.iter().enumerate() {
                let sy = reflect101(y as i64 + k as i64 - 2, h);
                let p = tmp.data[sy * w + x];
                for c in 0..3 {
                    acc[c] += wk * p[c];
                }
            }
            out.data[y * w + x] = acc;
        }
    }
    out
}

/// Blur, then keep every other row and column.
fn reduce(img: &RgbF) -> RgbF {
    let blurred = blur(img);
    let (nw, nh) = (img.width.div_ceil(2), img.height.div_ceil(2));
    let mut out = RgbF::new(nw, nh);
    for y in 0..nh {
        for x in 0..nw {
            out.set(x, y, blurred.get(2 * x, 2 * y));
        }
    }
    out
}

/// Zero-insert to `width x height`, then blur with a doubled kernel per axis.
fn expand(img: &RgbF, width: u32, height: u32) -> RgbF {
    let (w, h) = (width as usize, height as usize);
    let cw = img.width as usize;
    // Horizontal pass on coarse rows.
    let mut rows = vec![[0.0f32; 3]; w * img.height as usize];
    for y in 0..img.height as usize {
        for x in 0..w {
            let mut acc = [0.0f32; 3];
            for (k, wk) in KERNEL.iter().enumerate() {
                let sx = reflect101(x as i64 + k as i64 - 2, w);
                if sx.is_multiple_of(2) {
                    let p = img.data[y * cw + sx / 2];
                    for c in 0..3 {
                        acc[c] += 2.0 * wk * p[c];
                    }
                }
            }
            rows[y * w + x] = acc;
        }
    }
    let mut out = RgbF::new(width, height);
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f32; 3];
            for (k, wk) in KERNEL.iter().enumerate() {
                let sy = reflect101(y as i64 + k as i64 - 2, h);
                if sy.is_multiple_of(2) {
                    let p = rows[(sy / 2) * w + x];
                    for c in 0..3 {
                        acc[c] += 2.0 * wk * p[c];
                    }
                }
            }
            out.data[y * w + x] = acc;
        }
    }
    out
}

pub fn gaussian_pyramid(img: &RgbF, levels: usize) -> Result<ImagePyramid> {
    check_levels(levels, img.width, img.height)?;
    let mut out = vec![img.clone()];
    for _ in 1..levels {
        let next = reduce(out.last().expect("non-empty"));
        out.push(next);
    }
    Ok(ImagePyramid { levels: out, kind: PyramidKind::Gaussian })
}

/// Laplacian pyramid: band `i` is Gaussian level `i` minus the expanded
/// level `i+1`; the last band is the last Gaussian level.
pub fn build_pyramids(img: &RgbF, levels: usize) -> Result<ImagePyramid> {
    let gaussian = gaussian_pyramid(img, levels)?;
    let mut bands = Vec::with_capacity(levels);
    for i in 0..levels - 1 {
        let fine = &gaussian.levels[i];
        let up = expand(&gaussian.levels[i + 1], fine.width, fine.height);
        let mut band = fine.clone();
        for (b, u) in band.data.iter_mut().zip(&up.data) {
            for c in 0..3 {
                b[c] -= u[c];
            }
        }
        bands.push(band);
    }
    bands.push(gaussian.levels[levels - 1].clone());
    Ok(ImagePyramid { levels: bands, kind: PyramidKind::Laplacian })
}

/// Inverse of [`build_pyramids`].
pub fn collapse(pyramid: &ImagePyramid) -> RgbF {
    let mut levels = pyramid.levels.iter().rev();
    let mut acc = levels.next().expect("pyramid has at least one level").clone();
    for band in levels {
        let up = expand(&acc, band.width, band.height);
        acc = band.clone();
        for (a, u) in acc.data.iter_mut().zip(&up.data) {
            for c in 0..3 {
                a[c] += u[c];
            }
        }
    }
    acc
}

/// Blends `img1` (where `mask` is true) with `img2` band by band. The mask
/// weight of band `i` is the binomial-blurred level `i` of the mask's
/// Gaussian pyramid.
pub fn multiband_blend(img1: &RgbImage, img2: &RgbImage, mask: &[bool], levels: usize) -> Result<RgbImage> {
    Ok(multiband_blend_f(&RgbF::from_rgb(img1), &RgbF::from_rgb(img2), mask, levels)?.to_rgb())
}

/// Floating point variant of [`multiband_blend`]; the result is not clamped.
pub fn multiband_blend_f(img1: &RgbF, img2: &RgbF, mask: &[bool], levels: usize) -> Result<RgbF> {
    if (img1.width, img1.height) != (img2.width, img2.height) || mask.len() != img1.data.len() {
        return Err(Error::DimensionMismatch(format!(
            "blend inputs {}x{} and {}x{} with a mask of {} pixels",
            img1.width,
            img1.height,
            img2.width,
            img2.height,
            mask.len()
        )));
    }
    let l1 = build_pyramids(img1, levels)?;
    let l2 = build_pyramids(img2, levels)?;
    let mask_img = RgbF {
        width: img1.width,
        height: img1.height,
        data: mask.iter().map(|&m| if m { [1.0; 3] } else { [0.0; 3] }).collect(),
    };
    let weights = gaussian_pyramid(&mask_img, levels)?;
    let mut bands = Vec::with_capacity(levels);
    for i in 0..levels {
        let m = blur(&weights.levels[i]);
        let mut band = l1.levels[i].clone();
        for ((b, other), wm) in band.data.iter_mut().zip(&l2.levels[i].data).zip(&m.data) {
            let wm = wm[0];
            for c in 0..3 {
                b[c] = wm * b[c] + (1.0 - wm) * other[c];
            }
        }
        bands.push(band);
    }
    Ok(collapse(&ImagePyramid { levels: bands, kind: PyramidKind::Laplacian }))
}
