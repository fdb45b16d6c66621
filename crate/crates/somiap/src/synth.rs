//! Deterministic synthetic imagery: textured scenes, a banded test face the
//! fixture cascade detects, and per-person face textures the recognizers can
//! tell apart. The test suite and the examples build every asset from here,
//! so no binary fixtures are committed.

use somiap_core::facedetect::{CascadeModel, HaarFeature, Stage, WeakClassifier, WeightedRect};
use somiap_core::{ColorImage, GrayImage, Rect};

/// Small deterministic PRNG (xorshift64*).
#[derive(Debug, Clone)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0.wrapping_mul(0x2545F4914F6CDD1D)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Standard normal via the sum of 12 uniforms.
    pub fn gauss(&mut self) -> f64 {
        (0..12).map(|_| self.uniform()).sum::<f64>() - 6.0
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Color mosaic of random 8x8 blocks; rich in corners and block-distinct
/// between seeds.
pub fn scene(seed: u64, w: u32, h: u32) -> ColorImage {
    let block = 8u32;
    let mut rng = Rng::new(seed);
    let bw = w.div_ceil(block);
    let bh = h.div_ceil(block);
    let cells: Vec<[u8; 3]> = (0..bw as usize * bh as usize)
        .map(|_| {
            [
                (rng.next_u64() >> 32) as u8,
                (rng.next_u64() >> 24) as u8,
                (rng.next_u64() >> 16) as u8,
            ]
        })
        .collect();
    let mut data = Vec::with_capacity((w * h * 3) as usize);
    for y in 0..h {
        for x in 0..w {
            let c = cells[((y / block) * bw + x / block) as usize];
            data.extend_from_slice(&c);
        }
    }
    ColorImage::new(w, h, data).expect("valid dimensions")
}

/// Adds Gaussian pixel noise of the given sigma to every channel.
pub fn noisy(img: &ColorImage, sigma: f64, seed: u64) -> ColorImage {
    let mut rng = Rng::new(seed);
    let data: Vec<u8> = img
        .data()
        .iter()
        .map(|&v| clamp_u8(v as f64 + rng.gauss() * sigma))
        .collect();
    ColorImage::new(img.width(), img.height(), data).expect("same dimensions")
}

/// Gray intensity of the banded test face at local fraction (u, v) in [0,1),
/// for `person`, before variant jitter. Bands: bright forehead, a dark eye
/// strip with a bright nose gap between the two eyes, bright cheeks, mid
/// mouth; a per-person stripe texture rides on the forehead and cheeks so
/// recognizers can separate identities.
fn face_intensity(person: usize, u: f64, v: f64) -> f64 {
    let band = if v < 1.0 / 3.0 {
        220.0
    } else if v < 0.5 {
        // eye band: dark, except the bright gap over the nose
        if (0.375..0.625).contains(&u) {
            210.0
        } else {
            40.0
        }
    } else if v < 0.75 {
        200.0
    } else {
        100.0
    };
    let textured_band = v < 1.0 / 3.0 || (0.5..0.75).contains(&v);
    if !textured_band {
        return band;
    }
    // person-specific stripe pattern in face-local units (scale invariant)
    let phase = match person {
        0 => (u * 8.0) as i64,
        1 => (v * 8.0) as i64,
        _ => ((u + v) * 6.0) as i64,
    };
    if phase % 2 == 0 {
        band
    } else {
        band - 26.0
    }
}

/// Draws the banded face for `person` into `rect` of a gray image, with a
/// small per-variant brightness offset and sparse pixel jitter.
pub fn draw_face(img: &mut [u8], width: u32, rect: Rect, person: usize, variant: u64) {
    let mut rng = Rng::new(variant.wrapping_mul(0x9E3779B9).wrapping_add(person as u64 + 1));
    let offset = (rng.below(13) as f64) - 6.0;
    for dy in 0..rect.h {
        for dx in 0..rect.w {
            let u = (dx as f64 + 0.5) / rect.w as f64;
            let v = (dy as f64 + 0.5) / rect.h as f64;
            let mut value = face_intensity(person, u, v) + offset;
            if rng.below(41) == 0 {
                value += rng.gauss() * 6.0;
            }
            let x = (rect.x + dx as i64) as usize;
            let y = (rect.y + dy as i64) as usize;
            img[y * width as usize + x] = clamp_u8(value);
        }
    }
}

/// A gray portrait: textured mosaic background with one banded face.
///
/// The background is a low-contrast mosaic so every scan window has real
/// variance (the cascade's variance normalization needs sigma >> 1).
pub fn portrait(person: usize, variant: u64, w: u32, h: u32, face: Rect) -> GrayImage {
    let mut rng = Rng::new(variant.wrapping_add(7700 + 31 * person as u64));
    // tall narrow cells: plenty of horizontal variance for the cascade's
    // sigma normalization, little vertical band structure
    let (bw_px, bh_px) = (4u32, 16u32);
    let bw = w.div_ceil(bw_px);
    let bh = h.div_ceil(bh_px);
    let cells: Vec<u8> = (0..bw as usize * bh as usize)
        .map(|_| 90 + rng.below(100) as u8)
        .collect();
    let mut data = vec![0u8; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            data[(y * w + x) as usize] = cells[((y / bh_px) * bw + x / bw_px) as usize];
        }
    }
    draw_face(&mut data, w, face, person, variant);
    GrayImage::new(w, h, data).expect("valid dimensions")
}

/// Scan parameters matched to the synthetic fixtures: faces are drawn at
/// 40px and above, so scanning starts at 32px windows, below which textured
/// backgrounds hit band-coincidence noise.
pub fn fixture_detect_params() -> somiap_core::config::DetectParams {
    somiap_core::config::DetectParams {
        scale_step: 1.1,
        min_neighbors: 3,
        min_size: 32,
    }
}

/// A color scene with one banded face composited in.
pub fn scene_with_face(scene_seed: u64, person: usize, variant: u64, face: Rect) -> ColorImage {
    let base = scene(scene_seed, 160, 120);
    let gray_face = {
        let mut data = base
            .data()
            .chunks_exact(3)
            .map(|px| px[0])
            .collect::<Vec<u8>>();
        draw_face(&mut data, base.width(), face, person, variant);
        data
    };
    let mut data = base.data().to_vec();
    for dy in 0..face.h {
        for dx in 0..face.w {
            let x = (face.x + dx as i64) as usize;
            let y = (face.y + dy as i64) as usize;
            let v = gray_face[y * base.width() as usize + x];
            let i = (y * base.width() as usize + x) * 3;
            data[i] = v;
            data[i + 1] = v;
            data[i + 2] = v;
        }
    }
    ColorImage::new(base.width(), base.height(), data).expect("same dimensions")
}

/// Random multi-stage cascade with 2- and 3-rect features whose stump
/// thresholds are calibrated against a probe image so both vote branches
/// fire; used to exercise the evaluator when no real cascade is available.
pub fn stress_cascade(seed: u64) -> CascadeModel {
    use somiap_core::imaging::integral;

    let mut rng = Rng::new(seed);
    let (w, h) = (20u32, 20u32);
    let mut features = Vec::new();
    for _ in 0..14 {
        let fx = rng.below(14) as i64;
        let fy = rng.below(14) as i64;
        let fw = (2 + rng.below(20 - fx as u64 - 1) as u32).min(w - fx as u32);
        let fh = (2 + rng.below(20 - fy as u64 - 1) as u32).min(h - fy as u32);
        let mut rects = vec![WeightedRect {
            rect: Rect::new(fx, fy, fw, fh),
            weight: -1.0,
        }];
        let parts = if rng.below(2) == 0 { 1 } else { 2 };
        for _ in 0..parts {
            let sw = 1 + rng.below(fw as u64) as u32;
            let sh = 1 + rng.below(fh as u64) as u32;
            let sx = fx + rng.below((fw - sw + 1) as u64) as i64;
            let sy = fy + rng.below((fh - sh + 1) as u64) as i64;
            rects.push(WeightedRect {
                rect: Rect::new(sx, sy, sw, sh),
                weight: if parts == 1 { 2.0 } else { 3.0 },
            });
        }
        features.push(HaarFeature { rects });
    }

    let probe = {
        let mut r = Rng::new(seed.wrapping_mul(77) + 3);
        GrayImage::from_fn(64, 64, |_, _| (r.next_u64() >> 32) as u8)
    };
    let ii = integral(&probe);
    let thresholds: Vec<f64> = features
        .iter()
        .map(|feature| {
            let mut values = Vec::new();
            while values.len() < 15 {
                let scale = 1.0 + rng.uniform() * 1.5;
                let sw = (20.0 * scale).round() as u32;
                if sw >= 64 {
                    continue;
                }
                let x = rng.below((64 - sw) as u64) as u32;
                let y = rng.below((64 - sw) as u64) as u32;
                let window = Rect::new(x as i64, y as i64, sw, sw);
                let area = (sw * sw) as f64;
                let mean = ii.rect_sum(window).unwrap() as f64 / area;
                let var = ii.rect_sum_squared(window).unwrap() as f64 / area - mean * mean;
                let sigma = if var > 1.0 { var.sqrt() } else { 1.0 };
                let mut value = 0.0;
                for wr in &feature.rects {
                    let rx = ((wr.rect.x as f64 * scale).round() as i64).min(sw as i64 - 1);
                    let ry = ((wr.rect.y as f64 * scale).round() as i64).min(sw as i64 - 1);
                    let rw = ((wr.rect.w as f64 * scale).round() as i64)
                        .max(1)
                        .min(sw as i64 - rx);
                    let rh = ((wr.rect.h as f64 * scale).round() as i64)
                        .max(1)
                        .min(sw as i64 - ry);
                    let abs = Rect::new(x as i64 + rx, y as i64 + ry, rw as u32, rh as u32);
                    value += wr.weight * ii.rect_sum(abs).unwrap() as f64;
                }
                values.push(value / (sigma * area));
            }
            values.sort_by(f64::total_cmp);
            values[values.len() / 2]
        })
        .collect();

    let mut stages = Vec::new();
    let mut fi = 0usize;
    for si in 0..5 {
        let count = 2 + (si % 2);
        let mut weak = Vec::new();
        for _ in 0..count {
            let feature = fi % features.len();
            weak.push(WeakClassifier {
                feature,
                threshold: thresholds[feature] + rng.uniform() * 0.02 - 0.01,
                left_value: -1.0,
                right_value: 1.0,
            });
            fi += 1;
        }
        stages.push(Stage {
            weak,
            stage_threshold: 0.0,
        });
    }
    let model = CascadeModel {
        window_w: w,
        window_h: h,
        stages,
        features,
    };
    model.validate().expect("generated cascade is structurally valid");
    model
}
