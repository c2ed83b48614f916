//! Depth rasters: sparse depth from the point cloud, guided densification,
//! panoramic depth assembly and directional hole filling.

use std::ops::Range;

use image::RgbImage;
use rayon::prelude::*;

use crate::geometry::{
    camera_to_pixel, pano_forward, pixel_to_world, world_to_virtual, Camera, CameraIntrinsics, FrameConvention,
    FramedPose, PanoGeometry, RigidTransform, Vec3,
};
use crate::{Error, Result};

/// Value stored for pixels without depth.
pub const INVALID_DEPTH: f64 = 0.0;

/// Row-major metric depth raster; `0` marks invalid pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthImage {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl DepthImage {
    /// All-invalid raster.
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, values: vec![INVALID_DEPTH; width as usize * height as usize] }
    }

    pub fn from_values(width: u32, height: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != width as usize * height as usize {
            return Err(Error::DimensionMismatch(format!(
                "{} depth values for a {width}x{height} raster",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(Error::NonPositiveDepth(*bad));
        }
        Ok(Self { width, height, values })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[self.index(x, y)]
    }

    /// Stores `depth`; non-positive values store the invalid sentinel.
    #[inline]
    pub fn set(&mut self, x: u32, y: u32, depth: f64) {
        let i = self.index(x, y);
        self.values[i] = if depth > 0.0 { depth } else { INVALID_DEPTH };
    }

    #[inline]
    pub fn is_valid(&self, x: u32, y: u32) -> bool {
        self.get(x, y) > 0.0
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|d| **d > 0.0).count()
    }

    /// Smallest and largest valid depth.
    pub fn valid_range(&self) -> Option<(f64, f64)> {
        self.values.iter().filter(|d| **d > 0.0).fold(None, |acc, &d| match acc {
            None => Some((d, d)),
            Some((lo, hi)) => Some((lo.min(d), hi.max(d))),
        })
    }
}

/// World-frame points in meters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Projects the cloud into one camera. Where several points land on one
/// pixel the nearest (smallest camera-frame z) wins.
pub fn project_sparse_depth(cloud: &PointCloud, k: &CameraIntrinsics, pose: &RigidTransform) -> Result<DepthImage> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut depth = DepthImage::new(k.width, k.height);
    for p in &cloud.points {
        let p_c = pose.apply(p);
        let Ok((u, v)) = camera_to_pixel(&p_c, k) else { continue };
        let (x, y) = (u.round(), v.round());
        if !(x >= 0.0 && y >= 0.0 && x < k.width as f64 && y < k.height as f64) {
            continue;
        }
        let i = depth.index(x as u32, y as u32);
        let current = depth.values[i];
        if current == INVALID_DEPTH || p_c.z < current {
            depth.values[i] = p_c.z;
        }
    }
    Ok(depth)
}

/// Parameters of the guided upsampler.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensifyParams {
    /// The spatial bandwidth at a pixel is half the distance to its
    /// `k_nearest`-th valid sample.
    pub k_nearest: usize,
    /// Samples farther than this (pixels) are ignored.
    pub max_radius: f64,
    /// Guide color distance scale, 0-255 channel units.
    pub sigma_color: f64,
    pub enhancement_iters: usize,
    pub enhancement_lambda: f64,
}

impl Default for DensifyParams {
    fn default() -> Self {
        Self { k_nearest: 8, max_radius: 30.0, sigma_color: 10.0, enhancement_iters: 3, enhancement_lambda: 0.2 }
    }
}

impl DensifyParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_nearest < 1 {
            return Err(Error::InvalidParams("k_nearest must be at least 1".into()));
        }
        if !(self.max_radius >= 1.0) {
            return Err(Error::InvalidParams("max_radius must be at least 1 pixel".into()));
        }
        if !(self.sigma_color > 0.0) {
            return Err(Error::InvalidParams("sigma_color must be positive".into()));
        }
        if !(self.enhancement_lambda > 0.0 && self.enhancement_lambda < 1.0) {
            return Err(Error::InvalidParams("enhancement_lambda must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

struct Sample {
    x: f64,
    y: f64,
    depth: f64,
    color: [f64; 3],
}

/// Buckets samples into square cells of `cell` pixels.
struct SampleGrid {
    cell: f64,
    cols: usize,
    rows: usize,
    starts: Vec<usize>,
    order: Vec<usize>,
}

impl SampleGrid {
    fn new(samples: &[Sample], width: u32, height: u32, cell: f64) -> Self {
        let cols = (width as f64 / cell).ceil().max(1.0) as usize;
        let rows = (height as f64 / cell).ceil().max(1.0) as usize;
        let cell_of = |s: &Sample| {
            let cx = ((s.x / cell) as usize).min(cols - 1);
            let cy = ((s.y / cell) as usize).min(rows - 1);
            cy * cols + cx
        };
        let mut counts = vec![0usize; cols * rows + 1];
        for s in samples {
            counts[cell_of(s) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut order = vec![0; samples.len()];
        for (i, s) in samples.iter().enumerate() {
            let c = cell_of(s);
            order[fill[c]] = i;
            fill[c] += 1;
        }
        Self { cell, cols, rows, starts, order }
    }

    /// Indices of samples in cells touching the disc of `radius` around (x, y).
    fn candidates(&self, x: f64, y: f64, radius: f64, out: &mut Vec<usize>) {
        out.clear();
        let cx0 = ((x - radius) / self.cell).floor().max(0.0) as usize;
        let cy0 = ((y - radius) / self.cell).floor().max(0.0) as usize;
        let cx1 = (((x + radius) / self.cell).floor() as usize).min(self.cols - 1);
        let cy1 = (((y + radius) / self.cell).floor() as usize).min(self.rows - 1);
        for cy in cy0..=cy1 {
            for cx in cx0..=cx1 {
                let c = cy * self.cols + cx;
                out.extend_from_slice(&self.order[self.starts[c]..self.starts[c + 1]]);
            }
        }
    }
}

fn color_at(guide: &RgbImage, x: u32, y: u32) -> [f64; 3] {
    let p = guide.get_pixel(x, y);
    [p[0] as f64, p[1] as f64, p[2] as f64]
}

fn color_dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Guided upsampling of a sparse depth map.
///
/// Every invalid pixel `q` becomes the weighted mean of the valid samples
/// `s` within `max_radius`, with
/// `w = exp(-|q-s|^2 / (2 sigma_s(q)^2)) * exp(-|guide(q)-guide(s)|^2 / (2 sigma_color^2))`
/// and `sigma_s(q)` half the distance to the `k_nearest`-th sample in range
/// (the farthest one when fewer are in range). A few sweeps of edge-aware
/// diffusion over the filled pixels follow. Valid input pixels are never
/// modified.
pub fn densify(sparse: &DepthImage, guide: &RgbImage, p: &DensifyParams) -> Result<DepthImage> {
    p.validate()?;
    let (width, height) = sparse.dimensions();
    if guide.dimensions() != (width, height) {
        return Err(Error::DimensionMismatch(format!(
            "sparse depth is {width}x{height}, guide is {}x{}",
            guide.width(),
            guide.height()
        )));
    }
    let samples: Vec<Sample> = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .filter(|&(x, y)| sparse.is_valid(x, y))
        .map(|(x, y)| Sample { x: x as f64, y: y as f64, depth: sparse.get(x, y), color: color_at(guide, x, y) })
        .collect();
    if samples.is_empty() {
        return Err(Error::NoValidSamples);
    }

    let grid = SampleGrid::new(&samples, width, height, p.max_radius.max(8.0));
    let radius2 = p.max_radius * p.max_radius;
    let inv_2sc2 = 1.0 / (2.0 * p.sigma_color * p.sigma_color);

    let mut out = sparse.clone();
    out.values.par_chunks_mut(width as usize).enumerate().for_each_init(
        || (Vec::new(), Vec::new()),
        |(candidates, in_range): &mut (Vec<usize>, Vec<(f64, usize)>), (y, row)| {
            let qy = y as f64;
            for (x, value) in row.iter_mut().enumerate() {
                if *value > 0.0 {
                    continue;
                }
                let qx = x as f64;
                grid.candidates(qx, qy, p.max_radius, candidates);
                in_range.clear();
                for &i in candidates.iter() {
                    let s = &samples[i];
                    let d2 = (s.x - qx).powi(2) + (s.y - qy).powi(2);
                    if d2 <= radius2 {
                        in_range.push((d2, i));
                    }
                }
                if in_range.is_empty() {
                    continue;
                }
                let kth = p.k_nearest.min(in_range.len()) - 1;
                let (_, &mut (dk2, _), _) = in_range.select_nth_unstable_by(kth, |a, b| a.0.total_cmp(&b.0));
                // sigma_s = sqrt(dk2) / 2, so 2 sigma_s^2 = dk2 / 2.
                let inv_2ss2 = 2.0 / dk2;
                let qc = color_at(guide, x as u32, y as u32);
                let log_w = |&(d2, i): &(f64, usize)| -d2 * inv_2ss2 - color_dist2(&qc, &samples[i].color) * inv_2sc2;
                let max_log = in_range.iter().map(log_w).fold(f64::NEG_INFINITY, f64::max);
                let (mut num, mut den) = (0.0, 0.0);
                for entry in in_range.iter() {
                    let w = (log_w(entry) - max_log).exp();
                    num += w * samples[entry.1].depth;
                    den += w;
                }
                *value = num / den;
            }
        },
    );

    enhance(&mut out, sparse, guide, p, inv_2sc2);
    Ok(out)
}

/// Edge-aware diffusion restricted to pixels that were invalid in `sparse`.
fn enhance(depth: &mut DepthImage, sparse: &DepthImage, guide: &RgbImage, p: &DensifyParams, inv_2sc2: f64) {
    let (width, height) = depth.dimensions();
    for _ in 0..p.enhancement_iters {
        let prev = depth.values.clone();
        let at = |x: u32, y: u32| prev[y as usize * width as usize + x as usize];
        depth.values.par_chunks_mut(width as usize).enumerate().for_each(|(y, row)| {
            let y = y as u32;
            for (x, value) in row.iter_mut().enumerate() {
                let x = x as u32;
                let d = at(x, y);
                if sparse.is_valid(x, y) || d <= 0.0 {
                    continue;
                }
                let qc = color_at(guide, x, y);
                let mut delta = 0.0;
                let neighbors = [
                    (x.wrapping_sub(1), y),
                    (x + 1, y),
                    (x, y.wrapping_sub(1)),
                    (x, y + 1),
                ];
                for (nx, ny) in neighbors {
                    if nx >= width || ny >= height {
                        continue;
                    }
                    let dn = at(nx, ny);
                    if dn <= 0.0 {
                        continue;
                    }
                    let w = (-color_dist2(&qc, &color_at(guide, nx, ny)) * inv_2sc2).exp();
                    delta += w * (dn - d) / 4.0;
                }
                *value = d + p.enhancement_lambda * delta;
            }
        });
    }
}

/// Lifts every valid camera depth pixel onto the panorama and averages
/// pixels hit more than once. Stored values are radial distances from the
/// virtual origin.
pub fn build_pano_depth(
    dense_maps: &[DepthImage],
    cameras: &[Camera],
    vpose: &FramedPose,
    g: &PanoGeometry,
) -> Result<DepthImage> {
    let vpose = vpose.expect(FrameConvention::VirtualFromWorld)?;
    if dense_maps.len() != cameras.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} depth maps for {} cameras",
            dense_maps.len(),
            cameras.len()
        )));
    }
    let mut sum = vec![0.0f64; g.pixel_count()];
    let mut count = vec![0u32; g.pixel_count()];
    for (dense, camera) in dense_maps.iter().zip(cameras) {
        let pose = camera.pose.expect(FrameConvention::CameraFromWorld)?;
        let k = &camera.intrinsics;
        if dense.dimensions() != (k.width, k.height) {
            return Err(Error::DimensionMismatch(format!(
                "depth map {}x{} for a {}x{} camera",
                dense.width(),
                dense.height(),
                k.width,
                k.height
            )));
        }
        let hits: Vec<(usize, f64)> = (0..dense.height())
            .into_par_iter()
            .flat_map_iter(|y| {
                (0..dense.width()).filter_map(move |x| {
                    let d = dense.get(x, y);
                    if d <= 0.0 {
                        return None;
                    }
                    let p_w = pixel_to_world(x as f64, y as f64, d, k, pose).ok()?;
                    let p_v = world_to_virtual(&p_w, vpose);
                    let (u, v) = pano_forward(&p_v, g).ok()?;
                    let (col, row) = g.nearest_pixel(u, v);
                    Some((row as usize * g.width as usize + col as usize, p_v.norm()))
                })
            })
            .collect();
        for (i, r) in hits {
            sum[i] += r;
            count[i] += 1;
        }
    }
    let values = sum.iter().zip(&count).map(|(&s, &c)| if c > 0 { s / c as f64 } else { INVALID_DEPTH }).collect();
    Ok(DepthImage { width: g.width, height: g.height, values })
}

const DIRECTIONS: [(i64, i64); 8] = [(0, -1), (0, 1), (-1, 0), (1, 0), (1, -1), (-1, -1), (1, 1), (-1, 1)];

/// Fills invalid pixels in `rows` with the smallest of the first valid
/// values met when scanning in the eight compass directions. Scans read the
/// input raster only, so the result does not depend on visiting order.
/// Scans stop at the raster border (no horizontal wrap).
pub fn fill_invalid_depth(depth: &DepthImage, rows: Range<u32>) -> DepthImage {
    let (width, height) = (depth.width as usize, depth.height as usize);
    let rows = rows.start.min(depth.height) as usize..rows.end.min(depth.height) as usize;
    let mut best = vec![f64::INFINITY; width * height];
    let mut prev = vec![INVALID_DEPTH; width];
    let mut cur = vec![INVALID_DEPTH; width];

    for (dx, dy) in DIRECTIONS {
        if dy == 0 {
            for y in rows.clone() {
                let row = &depth.values[y * width..(y + 1) * width];
                let mut seen = INVALID_DEPTH;
                let cols: Box<dyn Iterator<Item = usize>> =
                    if dx > 0 { Box::new((0..width).rev()) } else { Box::new(0..width) };
                for x in cols {
                    if seen > 0.0 && row[x] <= 0.0 {
                        let b = &mut best[y * width + x];
                        *b = b.min(seen);
                    }
                    if row[x] > 0.0 {
                        seen = row[x];
                    }
                }
            }
            continue;
        }
        // Propagate "first valid value along (dx, dy)" row by row, starting
        // from the side the scan points toward.
        let order: Vec<usize> = if dy > 0 { (0..height).rev().collect() } else { (0..height).collect() };
        prev.fill(INVALID_DEPTH);
        let mut first = true;
        for y in order {
            for x in 0..width {
                let nx = x as i64 + dx;
                cur[x] = if first || nx < 0 || nx >= width as i64 {
                    INVALID_DEPTH
                } else {
                    let ny = (y as i64 + dy) as usize;
                    let v = depth.values[ny * width + nx as usize];
                    if v > 0.0 {
                        v
                    } else {
                        prev[nx as usize]
                    }
                };
            }
            first = false;
            if rows.contains(&y) {
                for x in 0..width {
                    if cur[x] > 0.0 {
                        let b = &mut best[y * width + x];
                        *b = b.min(cur[x]);
                    }
                }
            }
            std::mem::swap(&mut prev, &mut cur);
        }
    }

    let mut out = depth.clone();
    for y in rows {
        for x in 0..width {
            let i = y * width + x;
            if out.values[i] <= 0.0 && best[i].is_finite() {
                out.values[i] = best[i];
            }
        }
    }
    out
}
