//! One-station panorama synthesis: depth, rendering, seams, blending and
//! nadir filling.
//!
//! Panorama columns wrap around, so bounding boxes of valid areas are arcs
//! of columns: the arc starts right after the widest run of empty columns.
//! Overlap rectangles are expressed in the new image's arc and may cross
//! the `u = 0` border.

use std::f64::consts::PI;

use image::{Rgb, RgbImage};
use rayon::prelude::*;

use crate::blend::{default_levels, max_levels, multiband_blend_f};
use crate::depth::{build_pano_depth, densify, fill_invalid_depth, project_sparse_depth, DensifyParams, DepthImage};
use crate::geometry::{
    Camera, FrameConvention, FramedPose, PanoGeometry, RigidTransform, Vec3,
};
use crate::raster::{bilinear_rgb, quantize, RgbF};
use crate::seam::{
    build_seam_graph_with_fallback, extract_seam, min_cut, HsvImage, Label, OverlapRegion, PixelRect, SeamLabeling,
    SeamPair, SeamParams,
};
use crate::{Error, Result};

/// Default cap on the number of neighbouring stations searched for the
/// nadir band.
pub const DEFAULT_MAX_NEIGHBORS: usize = 4;

/// Everything captured at one station.
#[derive(Clone, Debug, PartialEq)]
pub struct StationBundle {
    pub station_id: String,
    /// Undistorted pinhole images, one per camera.
    pub images: Vec<RgbImage>,
    pub cameras: Vec<Camera>,
    /// Virtual (station) frame from world.
    pub virtual_pose: FramedPose,
    pub cloud: crate::depth::PointCloud,
    /// Height of the virtual origin above the floor, meters.
    pub h_floor: f64,
}

impl StationBundle {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidBundle(format!("station {}: {msg}", self.station_id)));
        if self.cameras.is_empty() {
            return bad("no cameras".into());
        }
        if self.images.len() != self.cameras.len() {
            return bad(format!("{} images for {} cameras", self.images.len(), self.cameras.len()));
        }
        if !(self.h_floor > 0.0) {
            return bad(format!("h_floor must be positive, got {}", self.h_floor));
        }
        self.virtual_pose.expect(FrameConvention::VirtualFromWorld)?;
        for (i, (cam, img)) in self.cameras.iter().zip(&self.images).enumerate() {
            cam.pose.expect(FrameConvention::CameraFromWorld)?;
            cam.intrinsics.validate()?;
            if img.dimensions() != (cam.intrinsics.width, cam.intrinsics.height) {
                return bad(format!(
                    "camera {i}: image is {}x{}, intrinsics say {}x{}",
                    img.width(),
                    img.height(),
                    cam.intrinsics.width,
                    cam.intrinsics.height
                ));
            }
        }
        Ok(())
    }

    /// Virtual origin in world coordinates.
    pub fn origin(&self) -> Vec3 {
        self.virtual_pose.transform.apply_inverse(&Vec3::zeros())
    }

    fn camera_from_virtual(&self, cam: usize) -> RigidTransform {
        self.cameras[cam].pose.transform.compose(&self.virtual_pose.transform.inverse())
    }

    /// Azimuth of camera `cam`'s optical axis in the virtual frame.
    pub fn camera_azimuth(&self, cam: usize) -> f64 {
        let axis_w = self.cameras[cam].pose.transform.rotation().row(2).transpose();
        let axis_v = self.virtual_pose.transform.rotation() * axis_w;
        axis_v.y.atan2(axis_v.x)
    }
}

/// Origin of a composite pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coverage {
    /// Nothing was rendered here.
    None,
    /// Rendered from this station's camera.
    Camera(u16),
    /// Filled from a neighbouring station (`rank` in nearest-first order).
    Neighbor { rank: u16, camera: u16 },
    /// No depth even after filling; left black.
    NoDepth,
}

impl Coverage {
    pub fn is_covered(&self) -> bool {
        matches!(self, Coverage::Camera(_) | Coverage::Neighbor { .. })
    }
}

/// A seam found while folding one camera into the composite.
#[derive(Clone, Debug)]
pub struct SeamRecord {
    /// Camera folded in at this step (image 2; the composite is image 1).
    pub camera: usize,
    pub overlap: OverlapRegion,
    pub labeling: SeamLabeling,
    /// Seam pairs in rectangle-local coordinates.
    pub pairs: Vec<SeamPair>,
}

#[derive(Clone, Debug)]
pub struct PanoComposite {
    pub rgb: RgbImage,
    pub depth: DepthImage,
    pub coverage: Vec<Coverage>,
    pub geometry: PanoGeometry,
    pub seams: Vec<SeamRecord>,
}

impl PanoComposite {
    pub fn covered_count(&self) -> usize {
        self.coverage.iter().filter(|c| c.is_covered()).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct StitchParams {
    pub seam: SeamParams,
    /// Pyramid levels; `None` picks a default from the overlap size.
    pub blend_levels: Option<usize>,
    pub densify: DensifyParams,
}

/// Sparse then dense depth for every camera of the bundle.
pub fn camera_depth_maps(bundle: &StationBundle, params: &DensifyParams) -> Result<Vec<DepthImage>> {
    bundle
        .cameras
        .par_iter()
        .zip(bundle.images.par_iter())
        .map(|(cam, img)| {
            let pose = cam.pose.expect(FrameConvention::CameraFromWorld)?;
            let sparse = project_sparse_depth(&bundle.cloud, &cam.intrinsics, pose)?;
            densify(&sparse, img, params)
        })
        .collect()
}

/// Panoramic depth: direct mapping of the dense camera maps, overlap
/// averaging, then directional filling above the nadir band.
pub fn station_pano_depth(bundle: &StationBundle, g: &PanoGeometry, params: &DensifyParams) -> Result<DepthImage> {
    let dense = camera_depth_maps(bundle, params)?;
    let pano = build_pano_depth(&dense, &bundle.cameras, &bundle.virtual_pose, g)?;
    Ok(fill_invalid_depth(&pano, 0..g.nadir_band_start()))
}

/// Per-row (sin, cos) of the polar angle and per-column (sin, cos) of the
/// azimuth.
struct DirectionTables {
    rows: Vec<(f64, f64)>,
    cols: Vec<(f64, f64)>,
}

impl DirectionTables {
    fn new(g: &PanoGeometry) -> Self {
        let rows = (0..g.height).map(|v| (PI * v as f64 / g.height as f64).sin_cos()).collect();
        let cols = (0..g.width).map(|u| (PI - u as f64 * 2.0 * PI / g.width as f64).sin_cos()).collect();
        Self { rows, cols }
    }

    #[inline]
    fn unit(&self, u: usize, v: usize) -> Vec3 {
        let (sb, cb) = self.rows[v];
        let (sa, ca) = self.cols[u];
        Vec3::new(sb * ca, sb * sa, cb)
    }
}

/// Inverse-maps camera `cam_index` onto the panorama using `pano_depth` as
/// the sphere radius. Returns the rendering and its validity mask.
pub fn render_camera_to_pano(
    bundle: &StationBundle,
    cam_index: usize,
    pano_depth: &DepthImage,
    g: &PanoGeometry,
) -> Result<(RgbImage, Vec<bool>)> {
    if pano_depth.dimensions() != (g.width, g.height) {
        return Err(Error::DimensionMismatch("pano depth does not match the panorama geometry".into()));
    }
    if cam_index >= bundle.cameras.len() {
        return Err(Error::InvalidBundle(format!("no camera {cam_index}")));
    }
    let tables = DirectionTables::new(g);
    Ok(render_with_tables(bundle, cam_index, pano_depth, g, &tables))
}

fn render_with_tables(
    bundle: &StationBundle,
    cam: usize,
    pano_depth: &DepthImage,
    g: &PanoGeometry,
    tables: &DirectionTables,
) -> (RgbImage, Vec<bool>) {
    let width = g.width as usize;
    let k = bundle.cameras[cam].intrinsics;
    let from_virtual = bundle.camera_from_virtual(cam);
    let image = &bundle.images[cam];
    let mut rgb = vec![0u8; 3 * g.pixel_count()];
    let mut valid = vec![false; g.pixel_count()];
    rgb.par_chunks_mut(3 * width).zip(valid.par_chunks_mut(width)).enumerate().for_each(|(v, (row, mask))| {
        for u in 0..width {
            let d = pano_depth.get(u as u32, v as u32);
            if d <= 0.0 {
                continue;
            }
            let p_c = from_virtual.apply(&(tables.unit(u, v) * d));
            if p_c.z <= 0.0 {
                continue;
            }
            let (x, y) = (k.fx * p_c.x / p_c.z + k.u0, k.fy * p_c.y / p_c.z + k.v0);
            if !k.contains(x, y) {
                continue;
            }
            let c = bilinear_rgb(image, x, y);
            for (dst, src) in row[3 * u..3 * u + 3].iter_mut().zip(c) {
                *dst = quantize(src);
            }
            mask[u] = true;
        }
    });
    (RgbImage::from_raw(g.width, g.height, rgb).expect("buffer size"), valid)
}

/// Arc of columns `start, start+1, ..., start+len-1` (mod width) plus an
/// inclusive row range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Extent {
    start: u32,
    len: u32,
    row0: u32,
    row1: u32,
}

fn extent(mask: &[bool], g: &PanoGeometry) -> Option<Extent> {
    let (w, h) = (g.width as usize, g.height as usize);
    let mut cols = vec![false; w];
    let (mut row0, mut row1) = (usize::MAX, 0);
    for y in 0..h {
        let row = &mask[y * w..(y + 1) * w];
        let mut any = false;
        for (x, &m) in row.iter().enumerate() {
            if m {
                cols[x] = true;
                any = true;
            }
        }
        if any {
            row0 = row0.min(y);
            row1 = y;
        }
    }
    if row0 == usize::MAX {
        return None;
    }
    // Widest circular run of empty columns.
    let (mut best_len, mut best_end) = (0usize, 0usize);
    let first_full = cols.iter().position(|&c| c)?;
    let mut run = 0;
    for k in 1..=w {
        let x = (first_full + k) % w;
        if cols[x] {
            if run > best_len {
                best_len = run;
                best_end = x;
            }
            run = 0;
        } else {
            run += 1;
        }
    }
    let start = if best_len == 0 { 0 } else { best_end };
    Some(Extent { start: start as u32, len: (w - best_len) as u32, row0: row0 as u32, row1: row1 as u32 })
}

/// Bounding rectangle of the intersection of two extents, in `new`'s arc.
fn intersect(new: &Extent, old: &Extent, width: u32) -> Option<PixelRect> {
    let row0 = new.row0.max(old.row0);
    let row1 = new.row1.min(old.row1);
    if row0 > row1 {
        return None;
    }
    let in_old = |col: u32| (col + width - old.start) % width < old.len;
    let ks: Vec<u32> = (0..new.len).filter(|k| in_old((new.start + k) % width)).collect();
    let (&kmin, &kmax) = (ks.first()?, ks.last()?);
    Some(PixelRect { x: (new.start + kmin) % width, y: row0, width: kmax - kmin + 1, height: row1 - row0 + 1 })
}

/// Panorama index of rectangle-local pixel `i`.
#[inline]
fn pano_index(rect: &PixelRect, i: usize, g: &PanoGeometry) -> usize {
    let lx = (i % rect.width as usize) as u32;
    let ly = (i / rect.width as usize) as u32;
    let x = (rect.x + lx) % g.width;
    (rect.y + ly) as usize * g.width as usize + x as usize
}

fn sub_image(img: &RgbImage, rect: &PixelRect, g: &PanoGeometry) -> RgbImage {
    let raw = img.as_raw();
    let mut out = Vec::with_capacity(3 * rect.area());
    for i in 0..rect.area() {
        let p = pano_index(rect, i, g);
        out.extend_from_slice(&raw[3 * p..3 * p + 3]);
    }
    RgbImage::from_raw(rect.width, rect.height, out).expect("buffer size")
}

struct Fold<'a> {
    g: &'a PanoGeometry,
    params: &'a StitchParams,
    rgb: RgbImage,
    valid: Vec<bool>,
    coverage: Vec<Coverage>,
    seams: Vec<SeamRecord>,
}

impl Fold<'_> {
    fn add(&mut self, camera: usize, img: &RgbImage, mask: &[bool]) -> Result<()> {
        let rect = match (extent(&self.valid, self.g), extent(mask, self.g)) {
            (Some(old), Some(new)) => intersect(&new, &old, self.g.width),
            _ => None,
        };
        if let Some(rect) = rect {
            self.seam_and_blend(camera, img, mask, rect)?;
        }
        // Outside the overlap the new image only fills empty pixels.
        let raw = img.as_raw();
        let out = &mut *self.rgb;
        for (i, &m) in mask.iter().enumerate() {
            if m && !self.valid[i] {
                out[3 * i..3 * i + 3].copy_from_slice(&raw[3 * i..3 * i + 3]);
                self.valid[i] = true;
                self.coverage[i] = Coverage::Camera(camera as u16);
            }
        }
        Ok(())
    }

    fn seam_and_blend(&mut self, camera: usize, img: &RgbImage, mask: &[bool], rect: PixelRect) -> Result<()> {
        let g = self.g;
        let n = rect.area();
        let idx: Vec<usize> = (0..n).map(|i| pano_index(&rect, i, g)).collect();
        let valid1: Vec<bool> = idx.iter().map(|&p| self.valid[p]).collect();
        let valid2: Vec<bool> = idx.iter().map(|&p| mask[p]).collect();
        let sub1 = sub_image(&self.rgb, &rect, g);
        let sub2 = sub_image(img, &rect, g);
        let overlap = OverlapRegion::new(rect, valid1, valid2)?;
        let hsv1 = HsvImage::from_rgb(&sub1, &overlap.valid1);
        let hsv2 = HsvImage::from_rgb(&sub2, &overlap.valid2);
        let graph = build_seam_graph_with_fallback(&overlap, &hsv1, &hsv2, &self.params.seam)?;
        let labeling = min_cut(&graph)?;

        // Invalid pixels borrow the other image so the blur never pulls in black.
        let mut f1 = RgbF::from_rgb(&sub1);
        let mut f2 = RgbF::from_rgb(&sub2);
        for i in 0..n {
            match (overlap.valid1[i], overlap.valid2[i]) {
                (false, true) => f1.data[i] = f2.data[i],
                (true, false) => f2.data[i] = f1.data[i],
                _ => {}
            }
        }
        let selects_first: Vec<bool> = labeling.labels.iter().map(|l| *l == Label::First).collect();
        let levels = self
            .params
            .blend_levels
            .unwrap_or_else(|| default_levels(rect.width, rect.height))
            .clamp(1, max_levels(rect.width, rect.height));
        let blended = multiband_blend_f(&f1, &f2, &selects_first, levels)?;

        let out = &mut *self.rgb;
        for i in 0..n {
            let (v1, v2) = (overlap.valid1[i], overlap.valid2[i]);
            if !(v1 || v2) {
                continue;
            }
            let p = idx[i];
            let c = blended.data[i];
            for ch in 0..3 {
                out[3 * p + ch] = quantize(c[ch]);
            }
            if labeling.labels[i] == Label::Second && v2 {
                self.coverage[p] = Coverage::Camera(camera as u16);
            }
            self.valid[p] = true;
        }
        let pairs = extract_seam(&labeling);
        self.seams.push(SeamRecord { camera, overlap, labeling, pairs });
        Ok(())
    }
}

/// Order in which cameras are folded: ascending optical-axis azimuth.
pub fn stitch_order(bundle: &StationBundle) -> Vec<usize> {
    let mut order: Vec<usize> = (0..bundle.cameras.len()).collect();
    order.sort_by(|&a, &b| bundle.camera_azimuth(a).total_cmp(&bundle.camera_azimuth(b)).then(a.cmp(&b)));
    order
}

/// Stitches the renders of all cameras in azimuth order. Each new image is
/// seamed and blended against the composite inside the overlap rectangle.
pub fn stitch_renders(
    renders: &[(RgbImage, Vec<bool>)],
    order: &[usize],
    g: &PanoGeometry,
    params: &StitchParams,
) -> Result<(RgbImage, Vec<Coverage>, Vec<SeamRecord>)> {
    let mut fold = Fold {
        g,
        params,
        rgb: RgbImage::new(g.width, g.height),
        valid: vec![false; g.pixel_count()],
        coverage: vec![Coverage::None; g.pixel_count()],
        seams: Vec::new(),
    };
    for &cam in order {
        let (img, mask) = &renders[cam];
        fold.add(cam, img, mask)?;
    }
    Ok((fold.rgb, fold.coverage, fold.seams))
}

/// Full single-station synthesis (without the nadir fill).
pub fn stitch_station(bundle: &StationBundle, g: &PanoGeometry, params: &StitchParams) -> Result<PanoComposite> {
    bundle.validate()?;
    let depth = station_pano_depth(bundle, g, &params.densify)?;
    let tables = DirectionTables::new(g);
    let renders: Vec<(RgbImage, Vec<bool>)> =
        (0..bundle.cameras.len()).map(|cam| render_with_tables(bundle, cam, &depth, g, &tables)).collect();
    let order = stitch_order(bundle);
    let (mut rgb, mut coverage, seams) = stitch_renders(&renders, &order, g, params)?;
    drop(renders);
    for (i, c) in coverage.iter_mut().enumerate() {
        if depth.values()[i] <= 0.0 {
            *c = Coverage::NoDepth;
            rgb.as_mut()[3 * i..3 * i + 3].fill(0);
        }
    }
    Ok(PanoComposite { rgb, depth, coverage, geometry: *g, seams })
}

/// Up to `k` other stations, nearest virtual origin first.
pub fn nearest_neighbors<'a>(current: &StationBundle, candidates: &'a [StationBundle], k: usize) -> Vec<&'a StationBundle> {
    let origin = current.origin();
    let mut others: Vec<&StationBundle> =
        candidates.iter().filter(|s| s.station_id != current.station_id).collect();
    others.sort_by(|a, b| (a.origin() - origin).norm().total_cmp(&(b.origin() - origin).norm()));
    others.truncate(k);
    others
}

/// Outcome of [`fill_black_hole`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlackHoleReport {
    pub band_pixels: usize,
    pub filled: usize,
}

/// Floor distance along a nadir-band ray: `h / |cos beta|`.
pub fn floor_distance(h_floor: f64, beta: f64) -> f64 {
    h_floor / beta.cos().abs()
}

/// Fills the bottom two tenths of the composite from neighbouring
/// stations, assuming a flat floor `h_floor` below the virtual origin.
/// `neighbors` must be sorted nearest-first; the first camera that sees the
/// floor point supplies the color. Occlusion is not checked.
pub fn fill_black_hole(
    composite: &mut PanoComposite,
    current: &StationBundle,
    neighbors: &[&StationBundle],
    g: &PanoGeometry,
) -> Result<BlackHoleReport> {
    if neighbors.is_empty() {
        return Err(Error::NoNeighbors);
    }
    if composite.geometry != *g {
        return Err(Error::DimensionMismatch("composite geometry differs".into()));
    }
    let vpose = *current.virtual_pose.expect(FrameConvention::VirtualFromWorld)?;
    let width = g.width as usize;
    let band = g.nadir_band_start() as usize..g.height as usize;
    let tables = DirectionTables::new(g);
    let cameras: Vec<(u16, u16, &Camera, &RgbImage)> = neighbors
        .iter()
        .enumerate()
        .flat_map(|(rank, nb)| {
            nb.cameras.iter().zip(&nb.images).enumerate().map(move |(c, (cam, img))| (rank as u16, c as u16, cam, img))
        })
        .collect();

    struct Hit {
        color: [u8; 3],
        depth: f64,
        coverage: Coverage,
    }
    let hits: Vec<(usize, Hit)> = band
        .clone()
        .into_par_iter()
        .flat_map_iter(|v| {
            let (cameras, coverage, tables) = (&cameras, &composite.coverage, &tables);
            (0..width).filter_map(move |u| {
                let i = v * width + u;
                if matches!(coverage[i], Coverage::Camera(_)) {
                    return None;
                }
                let cos_beta = tables.rows[v].1;
                if cos_beta >= 0.0 {
                    return None;
                }
                let d = current.h_floor / cos_beta.abs();
                let p_w = vpose.apply_inverse(&(tables.unit(u, v) * d));
                cameras.iter().find_map(|&(rank, c, cam, img)| {
                    let p_c = cam.pose.transform.apply(&p_w);
                    if p_c.z <= 0.0 {
                        return None;
                    }
                    let k = &cam.intrinsics;
                    let (x, y) = (k.fx * p_c.x / p_c.z + k.u0, k.fy * p_c.y / p_c.z + k.v0);
                    if !k.contains(x, y) {
                        return None;
                    }
                    let c3 = bilinear_rgb(img, x, y);
                    Some((
                        i,
                        Hit {
                            color: [quantize(c3[0]), quantize(c3[1]), quantize(c3[2])],
                            depth: d,
                            coverage: Coverage::Neighbor { rank, camera: c },
                        },
                    ))
                })
            })
        })
        .collect();

    let filled = hits.len();
    for (i, hit) in hits {
        let (x, y) = ((i % width) as u32, (i / width) as u32);
        composite.rgb.put_pixel(x, y, Rgb(hit.color));
        composite.depth.set(x, y, hit.depth);
        composite.coverage[i] = hit.coverage;
    }
    Ok(BlackHoleReport { band_pixels: band.len() * width, filled })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometry() -> PanoGeometry {
        PanoGeometry::new(16, 8).unwrap()
    }

    fn mask_from_cols(g: &PanoGeometry, cols: &[u32], rows: std::ops::Range<u32>) -> Vec<bool> {
        let mut m = vec![false; g.pixel_count()];
        for y in rows {
            for &x in cols {
                m[(y * g.width + x) as usize] = true;
            }
        }
        m
    }

    #[test]
    fn extent_handles_wrap() {
        let g = geometry();
        let m = mask_from_cols(&g, &[14, 15, 0, 1], 2..5);
        let e = extent(&m, &g).unwrap();
        assert_eq!((e.start, e.len, e.row0, e.row1), (14, 4, 2, 4));
        let plain = mask_from_cols(&g, &[3, 4, 7], 0..1);
        let e = extent(&plain, &g).unwrap();
        assert_eq!((e.start, e.len), (3, 5));
        let full = mask_from_cols(&g, &(0..16).collect::<Vec<_>>(), 0..8);
        assert_eq!(extent(&full, &g).unwrap().len, 16);
        assert!(extent(&vec![false; g.pixel_count()], &g).is_none());
    }

    #[test]
    fn intersection_in_new_arc() {
        let g = geometry();
        let new = extent(&mask_from_cols(&g, &[14, 15, 0, 1, 2], 0..8), &g).unwrap();
        let old = extent(&mask_from_cols(&g, &[1, 2, 3, 4, 5], 1..3), &g).unwrap();
        let r = intersect(&new, &old, 16).unwrap();
        assert_eq!(r, PixelRect { x: 1, y: 1, width: 2, height: 2 });
        // Old covers both ends of the new arc: the rectangle spans it.
        let old2 = extent(&mask_from_cols(&g, &[2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14], 0..8), &g).unwrap();
        let r = intersect(&new, &old2, 16).unwrap();
        assert_eq!((r.x, r.width), (14, 5));
        let far = extent(&mask_from_cols(&g, &[7, 8], 0..8), &g).unwrap();
        assert!(intersect(&new, &far, 16).is_none());
    }

    #[test]
    fn floor_distance_examples() {
        assert_eq!(floor_distance(1.6, PI), 1.6);
        assert!((floor_distance(1.6, 2.0 * PI / 3.0) - 3.2).abs() < 1e-12);
    }
}
