use image::{Rgb, RgbImage};
use panodepth::blend::multiband_blend;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pixels farther than 2^levels from a straight seam keep their source value.
#[test]
fn blend_stays_local_to_the_seam() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for levels in 1..=6 {
        for vertical in [true, false] {
            let (w, h) = if vertical { (256, 64) } else { (64, 256) };
            let a = RgbImage::from_fn(w, h, |_, _| Rgb([rng.random(), rng.random(), rng.random()]));
            let b = RgbImage::from_fn(w, h, |_, _| Rgb([rng.random(), rng.random(), rng.random()]));
            let seam: i64 = rng.random_range(100..156);
            let pos = |x: u32, y: u32| if vertical { x as i64 } else { y as i64 };
            let mask: Vec<bool> = (0..w * h).map(|i| pos(i % w, i / w) < seam).collect();
            let out = multiband_blend(&a, &b, &mask, levels).unwrap();
            for (x, y, p) in out.enumerate_pixels() {
                let t = pos(x, y);
                let (src, dist) = if t < seam { (&a, seam - 1 - t) } else { (&b, t - seam) };
                if dist > 1 << levels {
                    let q = src.get_pixel(x, y);
                    assert!((0..3).all(|c| p[c].abs_diff(q[c]) <= 1), "levels {levels}, ({x}, {y}) at distance {dist}");
                }
            }
        }
    }
}
