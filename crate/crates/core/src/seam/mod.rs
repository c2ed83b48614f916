//! Graph-cut seamline search inside the overlap of two images.
//!
//! Each pixel of the overlap rectangle is a vertex; 4-neighbours are joined
//! by n-links whose weight is the sum of the two pixel energies when both
//! pixels are seen by both images, and a large penalty `p1` otherwise.
//! Pixels seen by only one image are tied to that image's terminal. The
//! minimum cut is the seam.

mod maxflow;

use std::fmt::Write as _;

use image::{GrayImage, Luma, RgbImage};

pub use maxflow::{Graph, Segment};

use crate::{Error, Result};

/// Which image a pixel is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    /// Image 1, the source terminal.
    First,
    /// Image 2, the sink terminal.
    Second,
}

impl Label {
    pub fn other(self) -> Self {
        match self {
            Label::First => Label::Second,
            Label::Second => Label::First,
        }
    }
}

/// Axis-aligned pixel rectangle. In panorama coordinates `x` may wrap past
/// the right border; see [`crate::pipeline`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PixelRect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl PixelRect {
    pub fn area(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }
}

/// Where a pixel of the overlap rectangle is valid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Both,
    OnlyFirst,
    OnlySecond,
    Neither,
}

/// Overlap rectangle with per-pixel validity of both images (row-major,
/// rectangle-local).
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapRegion {
    pub rect: PixelRect,
    pub valid1: Vec<bool>,
    pub valid2: Vec<bool>,
}

impl OverlapRegion {
    pub fn new(rect: PixelRect, valid1: Vec<bool>, valid2: Vec<bool>) -> Result<Self> {
        if valid1.len() != rect.area() || valid2.len() != rect.area() {
            return Err(Error::DimensionMismatch(format!(
                "masks of {} and {} pixels for a {}x{} overlap",
                valid1.len(),
                valid2.len(),
                rect.width,
                rect.height
            )));
        }
        Ok(Self { rect, valid1, valid2 })
    }

    pub fn membership(&self, i: usize) -> Membership {
        match (self.valid1[i], self.valid2[i]) {
            (true, true) => Membership::Both,
            (true, false) => Membership::OnlyFirst,
            (false, true) => Membership::OnlySecond,
            (false, false) => Membership::Neither,
        }
    }
}

/// Seam energy weights. `w` balances the V and S channel differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeamParams {
    pub w: f64,
}

impl Default for SeamParams {
    fn default() -> Self {
        Self { w: 0.5 }
    }
}

/// S and V channels of an image plus central-difference gradients of V,
/// all in [0, 1] units.
#[derive(Clone, Debug)]
pub struct HsvImage {
    pub width: u32,
    pub height: u32,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    pub valid: Vec<bool>,
}

impl HsvImage {
    pub fn from_rgb(img: &RgbImage, valid: &[bool]) -> Self {
        let (width, height) = img.dimensions();
        let mut s = Vec::with_capacity(valid.len());
        let mut v = Vec::with_capacity(valid.len());
        for p in img.pixels() {
            let max = p[0].max(p[1]).max(p[2]) as f64;
            let min = p[0].min(p[1]).min(p[2]) as f64;
            v.push(max / 255.0);
            s.push(if max > 0.0 { (max - min) / max } else { 0.0 });
        }
        Self::from_channels(width, height, s, v, valid.to_vec())
    }

    /// Builds from S and V channels directly; gradients are computed here.
    pub fn from_channels(width: u32, height: u32, s: Vec<f64>, v: Vec<f64>, valid: Vec<bool>) -> Self {
        let (w, h) = (width as usize, height as usize);
        assert_eq!(v.len(), w * h);
        let mut gx = vec![0.0; w * h];
        let mut gy = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
                let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
                gx[y * w + x] = (v[y * w + xr] - v[y * w + xl]) / 2.0;
                gy[y * w + x] = (v[yd * w + x] - v[yu * w + x]) / 2.0;
            }
        }
        Self { width, height, s, v, gx, gy, valid }
    }

    fn max_gradient(&self) -> f64 {
        (0..self.v.len())
            .filter(|&i| self.valid[i])
            .map(|i| self.gx[i].hypot(self.gy[i]))
            .fold(0.0, f64::max)
    }
}

/// Color, gradient and total energy of one pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PixelEnergy {
    pub color: f64,
    pub gradient: f64,
    pub total: f64,
}

/// Energy of pixel (x, y), which must be valid in both images.
pub fn pixel_energy(x: u32, y: u32, img1: &HsvImage, img2: &HsvImage, params: &SeamParams) -> Result<PixelEnergy> {
    if x >= img1.width || y >= img1.height || (img1.width, img1.height) != (img2.width, img2.height) {
        return Err(Error::InvalidSeamPixel { x, y });
    }
    let i = y as usize * img1.width as usize + x as usize;
    if !(img1.valid[i] && img2.valid[i]) {
        return Err(Error::InvalidSeamPixel { x, y });
    }
    Ok(energy_at(i, img1, img2, params))
}

fn energy_at(i: usize, a: &HsvImage, b: &HsvImage, params: &SeamParams) -> PixelEnergy {
    let color = params.w * (a.v[i] - b.v[i]).abs() + (1.0 - params.w) * (a.s[i] - b.s[i]).abs();
    let gradient = 0.25 * (a.gx[i].abs() + b.gx[i].abs() + a.gy[i].abs() + b.gy[i].abs())
        + (a.gx[i] - b.gx[i]).abs()
        + (a.gy[i] - b.gy[i]).abs();
    PixelEnergy { color, gradient, total: color + gradient }
}

/// Per-pixel energies over the overlap; zero where a pixel is not shared.
#[derive(Clone, Debug)]
pub struct EnergyField {
    pub width: u32,
    pub height: u32,
    pub color: Vec<f64>,
    pub gradient: Vec<f64>,
    pub total: Vec<f64>,
}

pub fn energy_field(ov: &OverlapRegion, img1: &HsvImage, img2: &HsvImage, params: &SeamParams) -> EnergyField {
    let n = ov.rect.area();
    let mut field = EnergyField {
        width: ov.rect.width,
        height: ov.rect.height,
        color: vec![0.0; n],
        gradient: vec![0.0; n],
        total: vec![0.0; n],
    };
    for i in 0..n {
        if ov.membership(i) == Membership::Both {
            let e = energy_at(i, img1, img2, params);
            field.color[i] = e.color;
            field.gradient[i] = e.gradient;
            field.total[i] = e.total;
        }
    }
    field
}

/// Penalty for cutting outside the shared area: twice the largest gradient
/// magnitude of either image, raised if needed so it exceeds every pixel
/// energy.
pub fn penalty_p1(img1: &HsvImage, img2: &HsvImage, field: &EnergyField) -> f64 {
    let grad = 2.0 * img1.max_gradient().max(img2.max_gradient());
    let energy = field.total.iter().copied().fold(0.0, f64::max);
    grad.max(2.0 * energy + 1e-6)
}

/// Grid graph over the overlap rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SeamGraph {
    pub width: u32,
    pub height: u32,
    /// Weight of the n-link to the right neighbour (last column unused).
    pub right: Vec<f64>,
    /// Weight of the n-link to the neighbour below (last row unused).
    pub down: Vec<f64>,
    /// Hard terminal assignments.
    pub forced: Vec<Option<Label>>,
    pub p1: f64,
}

impl SeamGraph {
    pub fn vertex_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Weight of the n-link between 4-adjacent pixels `a` and `b`.
    pub fn n_link(&self, a: (u32, u32), b: (u32, u32)) -> Option<f64> {
        let w = self.width as usize;
        let ((ax, ay), (bx, by)) = if (a.1, a.0) <= (b.1, b.0) { (a, b) } else { (b, a) };
        if bx >= self.width || by >= self.height {
            return None;
        }
        if ay == by && bx == ax + 1 {
            Some(self.right[ay as usize * w + ax as usize])
        } else if ax == bx && by == ay + 1 {
            Some(self.down[ay as usize * w + ax as usize])
        } else {
            None
        }
    }

    /// Sum of n-link weights between differently labeled neighbours,
    /// accumulated in row-major order (right link, then down link).
    /// Links of weight `p1` are counted and added once at the end, so two
    /// labelings that cut the same multiset of weights get the same value.
    pub fn labeling_energy(&self, labels: &[Label]) -> f64 {
        let (w, h) = (self.width as usize, self.height as usize);
        let mut energy = 0.0;
        let mut hard = 0u32;
        let mut add = |weight: f64| {
            if weight == self.p1 {
                hard += 1;
            } else {
                energy += weight;
            }
        };
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w && labels[i] != labels[i + 1] {
                    add(self.right[i]);
                }
                if y + 1 < h && labels[i] != labels[i + w] {
                    add(self.down[i]);
                }
            }
        }
        energy + hard as f64 * self.p1
    }

    fn forced_counts(&self) -> (usize, usize) {
        let first = self.forced.iter().filter(|f| **f == Some(Label::First)).count();
        let second = self.forced.iter().filter(|f| **f == Some(Label::Second)).count();
        (first, second)
    }
}

/// Builds the seam graph. Fails with [`Error::DegenerateOverlap`] when one
/// of the images has no exclusive pixels in the rectangle; see
/// [`build_seam_graph_with_fallback`].
pub fn build_seam_graph(ov: &OverlapRegion, img1: &HsvImage, img2: &HsvImage, params: &SeamParams) -> Result<SeamGraph> {
    let graph = build_unchecked(ov, img1, img2, params)?;
    match graph.forced_counts() {
        (0, _) => Err(Error::DegenerateOverlap("image 1")),
        (_, 0) => Err(Error::DegenerateOverlap("image 2")),
        _ => Ok(graph),
    }
}

/// Like [`build_seam_graph`], but seeds a border line of the rectangle for
/// an image that has no exclusive pixels: the border nearest to that
/// image's valid-area centroid, the opposite border for the other image.
pub fn build_seam_graph_with_fallback(
    ov: &OverlapRegion,
    img1: &HsvImage,
    img2: &HsvImage,
    params: &SeamParams,
) -> Result<SeamGraph> {
    let mut graph = build_unchecked(ov, img1, img2, params)?;
    let (n1, n2) = graph.forced_counts();
    if n1 > 0 && n2 > 0 {
        return Ok(graph);
    }
    let (w, h) = (ov.rect.width as usize, ov.rect.height as usize);
    let centroid = |mask: &[bool], horizontal: bool| {
        let (mut sum, mut count) = (0.0, 0usize);
        for (i, _) in mask.iter().enumerate().filter(|(_, v)| **v) {
            sum += if horizontal { (i % w) as f64 } else { (i / w) as f64 };
            count += 1;
        }
        if count == 0 {
            None
        } else {
            Some(sum / count as f64)
        }
    };
    let horizontal = w >= 2;
    if !horizontal && h < 2 {
        return Err(Error::MissingTerminals);
    }
    let c1 = centroid(&ov.valid1, horizontal).unwrap_or(0.0);
    let c2 = centroid(&ov.valid2, horizontal).unwrap_or(f64::MAX);
    // The image whose centroid lies lower along the axis owns the first border.
    let (first_border, second_border) = if c1 <= c2 { (0, 1) } else { (1, 0) };
    let line = |which: usize| -> Vec<usize> {
        if horizontal {
            let x = if which == 0 { 0 } else { w - 1 };
            (0..h).map(|y| y * w + x).collect()
        } else {
            let y = if which == 0 { 0 } else { h - 1 };
            (0..w).map(|x| y * w + x).collect()
        }
    };
    if n1 == 0 {
        for i in line(first_border) {
            if graph.forced[i].is_none() {
                graph.forced[i] = Some(Label::First);
            }
        }
    }
    if n2 == 0 {
        for i in line(second_border) {
            if graph.forced[i].is_none() {
                graph.forced[i] = Some(Label::Second);
            }
        }
    }
    match graph.forced_counts() {
        (0, _) | (_, 0) => Err(Error::MissingTerminals),
        _ => Ok(graph),
    }
}

fn build_unchecked(ov: &OverlapRegion, img1: &HsvImage, img2: &HsvImage, params: &SeamParams) -> Result<SeamGraph> {
    if ov.rect.is_empty() {
        return Err(Error::DimensionMismatch("empty overlap rectangle".into()));
    }
    let (w, h) = (ov.rect.width as usize, ov.rect.height as usize);
    for img in [img1, img2] {
        if (img.width as usize, img.height as usize) != (w, h) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} image for a {w}x{h} overlap",
                img.width, img.height
            )));
        }
    }
    let field = energy_field(ov, img1, img2, params);
    let p1 = penalty_p1(img1, img2, &field);
    let shared: Vec<bool> = (0..w * h).map(|i| ov.membership(i) == Membership::Both).collect();
    let link = |a: usize, b: usize| if shared[a] && shared[b] { field.total[a] + field.total[b] } else { p1 };
    let mut right = vec![0.0; w * h];
    let mut down = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                right[i] = link(i, i + 1);
            }
            if y + 1 < h {
                down[i] = link(i, i + w);
            }
        }
    }
    let forced = (0..w * h)
        .map(|i| match ov.membership(i) {
            Membership::OnlyFirst => Some(Label::First),
            Membership::OnlySecond => Some(Label::Second),
            _ => None,
        })
        .collect();
    Ok(SeamGraph { width: w as u32, height: h as u32, right, down, forced, p1 })
}

/// Per-pixel labels over the overlap and the energy of the cut.
#[derive(Clone, Debug, PartialEq)]
pub struct SeamLabeling {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<Label>,
    pub energy: f64,
}

/// Exact minimum-energy labeling respecting the hard constraints.
pub fn min_cut(graph: &SeamGraph) -> Result<SeamLabeling> {
    let (n1, n2) = graph.forced_counts();
    if n1 == 0 || n2 == 0 {
        return Err(Error::MissingTerminals);
    }
    let (w, h) = (graph.width as usize, graph.height as usize);
    let mut g = Graph::with_edge_capacity(w * h, 2 * w * h);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                g.add_edge(i, i + 1, graph.right[i], graph.right[i]);
            }
            if y + 1 < h {
                g.add_edge(i, i + w, graph.down[i], graph.down[i]);
            }
            match graph.forced[i] {
                Some(Label::First) => g.add_tweights(i, f64::INFINITY, 0.0),
                Some(Label::Second) => g.add_tweights(i, 0.0, f64::INFINITY),
                None => {}
            }
        }
    }
    g.maxflow();
    let labels: Vec<Label> = (0..w * h)
        .map(|i| match g.segment(i) {
            Segment::Source => Label::First,
            Segment::Sink => Label::Second,
        })
        .collect();
    let energy = graph.labeling_energy(&labels);
    Ok(SeamLabeling { width: graph.width, height: graph.height, labels, energy })
}

/// A pair of 4-adjacent pixels `(x, y)` with different labels.
pub type SeamPair = ((u32, u32), (u32, u32));

/// All differently labeled 4-adjacent pairs in row-major order.
pub fn extract_seam(labeling: &SeamLabeling) -> Vec<SeamPair> {
    let (w, h) = (labeling.width, labeling.height);
    let at = |x: u32, y: u32| labeling.labels[y as usize * w as usize + x as usize];
    let mut pairs = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w && at(x, y) != at(x + 1, y) {
                pairs.push(((x, y), (x + 1, y)));
            }
            if y + 1 < h && at(x, y) != at(x, y + 1) {
                pairs.push(((x, y), (x, y + 1)));
            }
        }
    }
    pairs
}

/// Debug image of a labeling: image 1 black, image 2 white.
pub fn labeling_image(labeling: &SeamLabeling) -> GrayImage {
    GrayImage::from_fn(labeling.width, labeling.height, |x, y| {
        let l = labeling.labels[y as usize * labeling.width as usize + x as usize];
        Luma([if l == Label::First { 0 } else { 255 }])
    })
}

/// Debug text of seam pairs, one `x1 y1 x2 y2` line per pair.
pub fn seam_pairs_text(pairs: &[SeamPair]) -> String {
    let mut out = String::new();
    for ((x1, y1), (x2, y2)) in pairs {
        let _ = writeln!(out, "{x1} {y1} {x2} {y2}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(width: u32, height: u32, v: f64, s: f64, valid: Vec<bool>) -> HsvImage {
        let n = (width * height) as usize;
        HsvImage::from_channels(width, height, vec![s; n], vec![v; n], valid)
    }

    fn graph(width: u32, height: u32, right: Vec<f64>, down: Vec<f64>, forced: Vec<Option<Label>>) -> SeamGraph {
        SeamGraph { width, height, right, down, forced, p1: 100.0 }
    }

    #[test]
    fn energy_examples() {
        let p = SeamParams { w: 0.5 };
        let a = flat(3, 3, 0.5, 0.5, vec![true; 9]);
        let e = pixel_energy(1, 1, &a, &a, &p).unwrap();
        assert_eq!((e.color, e.gradient, e.total), (0.0, 0.0, 0.0));

        let b = flat(3, 3, 0.9, 0.3, vec![true; 9]);
        let e = pixel_energy(1, 1, &a, &b, &p).unwrap();
        assert!((e.color - 0.3).abs() < 1e-12 && e.gradient == 0.0 && (e.total - 0.3).abs() < 1e-12);

        // Horizontal ramp with central-difference gradient 0.2 in both images.
        let ramp = HsvImage::from_channels(3, 1, vec![0.0; 3], vec![0.1, 0.3, 0.5], vec![true; 3]);
        let e = pixel_energy(1, 0, &ramp, &ramp, &p).unwrap();
        assert!((ramp.gx[1] - 0.2).abs() < 1e-12);
        assert!((e.gradient - 0.1).abs() < 1e-12 && (e.total - 0.1).abs() < 1e-12);

        let half = flat(3, 3, 0.5, 0.5, vec![false; 9]);
        assert!(matches!(pixel_energy(0, 0, &a, &half, &p), Err(Error::InvalidSeamPixel { .. })));
    }

    #[test]
    fn one_by_two_exclusive_pair() {
        let rect = PixelRect { x: 0, y: 0, width: 2, height: 1 };
        let ov = OverlapRegion::new(rect, vec![true, false], vec![false, true]).unwrap();
        let img1 = flat(2, 1, 0.5, 0.5, ov.valid1.clone());
        let img2 = flat(2, 1, 0.5, 0.5, ov.valid2.clone());
        let g = build_seam_graph(&ov, &img1, &img2, &SeamParams::default()).unwrap();
        assert_eq!(g.right[0], g.p1);
        assert_eq!(g.forced, vec![Some(Label::First), Some(Label::Second)]);
        let l = min_cut(&g).unwrap();
        assert_eq!(l.labels, vec![Label::First, Label::Second]);
        assert_eq!(l.energy, g.p1);
    }

    #[test]
    fn fully_shared_overlap_is_degenerate() {
        let rect = PixelRect { x: 0, y: 0, width: 3, height: 2 };
        let ov = OverlapRegion::new(rect, vec![true; 6], vec![true; 6]).unwrap();
        let img = flat(3, 2, 0.2, 0.2, vec![true; 6]);
        assert!(matches!(
            build_seam_graph(&ov, &img, &img, &SeamParams::default()),
            Err(Error::DegenerateOverlap(_))
        ));
        let g = build_seam_graph_with_fallback(&ov, &img, &img, &SeamParams::default()).unwrap();
        assert_eq!(g.forced[0], Some(Label::First));
        assert_eq!(g.forced[2], Some(Label::Second));
        assert_eq!(g.forced[1], None);
        assert!(min_cut(&g).is_ok());
    }

    #[test]
    fn three_by_three_construction() {
        let rect = PixelRect { x: 0, y: 0, width: 3, height: 3 };
        let valid1: Vec<bool> = (0..9).map(|i| i % 3 != 2).collect();
        let valid2: Vec<bool> = (0..9).map(|i| i % 3 != 0).collect();
        let ov = OverlapRegion::new(rect, valid1.clone(), valid2.clone()).unwrap();
        let v1: Vec<f64> = (0..9).map(|i| 0.1 * i as f64).collect();
        let img1 = HsvImage::from_channels(3, 3, vec![0.0; 9], v1, valid1);
        let img2 = flat(3, 3, 0.4, 0.0, valid2);
        let g = build_seam_graph(&ov, &img1, &img2, &SeamParams::default()).unwrap();
        assert_eq!(g.vertex_count(), 9);
        assert_eq!(g.forced.iter().filter(|f| f.is_some()).count(), 6);
        let field = energy_field(&ov, &img1, &img2, &SeamParams::default());
        for y in 0..2usize {
            let i = y * 3 + 1;
            assert_eq!(g.down[i], field.total[i] + field.total[i + 3]);
        }
        assert_eq!(g.right[0], g.p1);
        assert_eq!(g.right[1], g.p1);
        assert!(g.p1 > field.total.iter().copied().fold(0.0, f64::max));
    }

    #[test]
    fn uniform_grid_cut_is_one_column() {
        let (w, h) = (3u32, 3u32);
        let forced: Vec<_> = (0..9)
            .map(|i| match i % 3 {
                0 => Some(Label::First),
                2 => Some(Label::Second),
                _ => None,
            })
            .collect();
        let g = graph(w, h, vec![2.0; 9], vec![2.0; 9], forced);
        assert_eq!(min_cut(&g).unwrap().energy, 3.0 * 2.0);
    }

    #[test]
    fn zero_column_carries_the_seam() {
        // 4 columns: 0 forced First, 3 forced Second; links between columns
        // 1 and 2 are free.
        let (w, h) = (4usize, 3usize);
        let mut right = vec![5.0; w * h];
        for y in 0..h {
            right[y * w + 1] = 0.0;
        }
        let forced = (0..w * h)
            .map(|i| match i % w {
                0 => Some(Label::First),
                3 => Some(Label::Second),
                _ => None,
            })
            .collect();
        let l = min_cut(&graph(w as u32, h as u32, right, vec![5.0; w * h], forced)).unwrap();
        assert_eq!(l.energy, 0.0);
        let pairs = extract_seam(&l);
        assert!(pairs.iter().all(|((x1, _), (x2, _))| *x1 == 1 && *x2 == 2));
        assert_eq!(pairs.len(), 3);
    }

    #[test]
    fn free_pixel_follows_heavier_link() {
        let g = graph(3, 1, vec![1.0, 3.0, 0.0], vec![0.0; 3], vec![Some(Label::First), None, Some(Label::Second)]);
        let l = min_cut(&g).unwrap();
        assert_eq!(l.labels[1], Label::Second);
        assert_eq!(l.energy, 1.0);
    }

    #[test]
    fn seam_extraction_examples() {
        let uniform = SeamLabeling { width: 3, height: 3, labels: vec![Label::First; 9], energy: 0.0 };
        assert!(extract_seam(&uniform).is_empty());
        let checker = SeamLabeling {
            width: 2,
            height: 2,
            labels: vec![Label::First, Label::Second, Label::Second, Label::First],
            energy: 0.0,
        };
        assert_eq!(extract_seam(&checker).len(), 4);
        let split = SeamLabeling {
            width: 3,
            height: 3,
            labels: (0..9).map(|i| if i % 3 < 2 { Label::First } else { Label::Second }).collect(),
            energy: 0.0,
        };
        let pairs = extract_seam(&split);
        assert_eq!(pairs, vec![((1, 0), (2, 0)), ((1, 1), (2, 1)), ((1, 2), (2, 2))]);
        assert_eq!(seam_pairs_text(&pairs[..1]), "1 0 2 0\n");
        assert_eq!(labeling_image(&split).get_pixel(2, 0)[0], 255);
    }

    #[test]
    fn missing_terminals_rejected() {
        let g = graph(2, 1, vec![1.0, 0.0], vec![0.0; 2], vec![Some(Label::First), None]);
        assert!(matches!(min_cut(&g), Err(Error::MissingTerminals)));
    }
}
