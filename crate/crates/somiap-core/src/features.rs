//! Oriented FAST corners with rotated binary pair-comparison descriptors and
//! a ratio-test matcher. This is the high-frequency gate of the place
//! matcher: a query image must collect enough descriptor matches against a
//! gallery entry before the hash comparison runs at all.

mod pattern;

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::config::OrbParams;
use crate::error::{contract, Result};
use crate::imaging::{integral, resize_bilinear, GrayImage, IntegralImage, Rect};

pub use pattern::SAMPLING_PATTERN;

/// Margin (in level pixels) a keypoint needs so the rotated pattern plus the
/// 5x5 smoothing box stays in bounds: ceil(15*sqrt(2)) + 2.
const DESCRIPTOR_BORDER: u32 = 24;
/// Radius of the circular patch used for the orientation moments.
const MOMENT_RADIUS: i64 = 15;
/// Orientation is discretized to 2*pi/30 steps before rotating the pattern.
const ANGLE_STEPS: u32 = 30;

/// Bresenham circle of radius 3: the 16 FAST test offsets, clockwise from
/// the top pixel.
const FAST_CIRCLE: [(i64, i64); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

/// A detected interest point in level-0 coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f32,
    pub y: f32,
    /// Pyramid level the point was detected on.
    pub level: u32,
    /// Orientation in radians, [0, 2*pi).
    pub angle: f32,
    /// Corner score; the FAST score from [`detect_fast`], the Harris score
    /// after [`orb_detect_describe`] ranking.
    pub response: f32,
}

/// 256-bit binary descriptor, MSB-first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Descriptor {
    bits: [u8; 32],
}

impl Descriptor {
    pub fn from_bytes(bits: [u8; 32]) -> Self {
        Descriptor { bits }
    }

    pub fn bytes(&self) -> &[u8; 32] {
        &self.bits
    }

    pub fn hamming(&self, other: &Descriptor) -> u32 {
        self.bits
            .iter()
            .zip(other.bits.iter())
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }
}

/// Parallel keypoint and descriptor lists.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DescriptorSet {
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<Descriptor>,
}

impl DescriptorSet {
    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }
}

/// One query descriptor paired with its nearest train descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureMatch {
    pub query: usize,
    pub train: usize,
    pub distance: u32,
}

/// All nearest-neighbor pairs plus the count that survive the ratio test.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchReport {
    pub pairs: Vec<FeatureMatch>,
    pub good_count: usize,
}

/// FAST-9 corner detection with non-maximum suppression.
///
/// A pixel is a corner iff at least 9 contiguous pixels on its radius-3
/// circle are all brighter than `p + t` or all darker than `p - t`. The
/// score is the largest `t` for which the pixel stays a corner; 3x3
/// non-maximum suppression keeps strict local maxima of that score.
pub fn detect_fast(img: &GrayImage, t: u8) -> Vec<Keypoint> {
    assert!(t >= 1, "threshold must be in 1..=255");
    let (w, h) = (img.width(), img.height());
    if w < 7 || h < 7 {
        return Vec::new();
    }
    let mut scores = vec![0i32; w as usize * h as usize];
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            let s = fast_score(img, x, y);
            if s >= t as i32 {
                scores[(y * w + x) as usize] = s;
            }
        }
    }
    let mut out = Vec::new();
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            let s = scores[(y * w + x) as usize];
            if s == 0 {
                continue;
            }
            let mut is_max = true;
            'nms: for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let nx = (x as i64 + dx) as u32;
                    let ny = (y as i64 + dy) as u32;
                    if scores[(ny * w + nx) as usize] >= s
                        && (dy < 0 || (dy == 0 && dx < 0))
                    {
                        // an earlier pixel with >= score wins the plateau
                        is_max = false;
                        break 'nms;
                    }
                    if scores[(ny * w + nx) as usize] > s {
                        is_max = false;
                        break 'nms;
                    }
                }
            }
            if is_max {
                out.push(Keypoint {
                    x: x as f32,
                    y: y as f32,
                    level: 0,
                    angle: 0.0,
                    response: s as f32,
                });
            }
        }
    }
    out
}

/// Largest threshold at which (x, y) is still a FAST-9 corner, or 0.
fn fast_score(img: &GrayImage, x: u32, y: u32) -> i32 {
    let p = img.pixel(x, y) as i32;
    let mut d = [0i32; 16];
    for (i, (dx, dy)) in FAST_CIRCLE.iter().enumerate() {
        let v = img.pixel((x as i64 + dx) as u32, (y as i64 + dy) as u32) as i32;
        d[i] = v - p;
    }
    // bright arcs need min(d) > t over 9 contiguous; dark arcs min(-d) > t
    let mut best = 0i32;
    for start in 0..16 {
        let mut min_bright = i32::MAX;
        let mut min_dark = i32::MAX;
        for k in 0..9 {
            let v = d[(start + k) % 16];
            min_bright = min_bright.min(v);
            min_dark = min_dark.min(-v);
        }
        best = best.max(min_bright - 1).max(min_dark - 1);
    }
    best.max(0)
}

/// Keypoint detection plus description with default parameters.
pub fn orb_detect_describe(img: &GrayImage, n: usize) -> Result<DescriptorSet> {
    let params = OrbParams {
        n_features: n,
        ..OrbParams::default()
    };
    orb_detect_describe_with(img, &params)
}

/// Keypoint detection plus description over an image pyramid.
///
/// FAST-9 runs on every level; candidates are ranked by Harris response
/// (k = 0.04, 7x7 window) and the top `n_features` survive. Orientation
/// comes from the intensity centroid of a radius-15 circular patch, and the
/// descriptor compares 5x5-box-smoothed intensities at 256 pattern point
/// pairs rotated by the discretized orientation.
pub fn orb_detect_describe_with(img: &GrayImage, params: &OrbParams) -> Result<DescriptorSet> {
    if img.width().min(img.height()) < 32 {
        return Err(contract("feature extraction requires min side >= 32"));
    }
    struct Candidate {
        level: u32,
        x: u32,
        y: u32,
        response: f32,
    }

    let mut levels: Vec<GrayImage> = Vec::with_capacity(params.levels as usize);
    let mut level_scales: Vec<f64> = Vec::with_capacity(params.levels as usize);
    for l in 0..params.levels {
        let scale = libm::pow(params.scale_factor, l as f64);
        let lw = libm::round(img.width() as f64 / scale) as u32;
        let lh = libm::round(img.height() as f64 / scale) as u32;
        if lw < 2 * DESCRIPTOR_BORDER + 1 || lh < 2 * DESCRIPTOR_BORDER + 1 {
            break;
        }
        levels.push(if l == 0 {
            img.clone()
        } else {
            resize_bilinear(img, lw, lh)
        });
        level_scales.push(scale);
    }

    let mut candidates: Vec<Candidate> = Vec::new();
    for (l, level_img) in levels.iter().enumerate() {
        let (lw, lh) = (level_img.width(), level_img.height());
        for kp in detect_fast(level_img, params.fast_threshold) {
            let (x, y) = (kp.x as u32, kp.y as u32);
            if x < DESCRIPTOR_BORDER
                || y < DESCRIPTOR_BORDER
                || x + DESCRIPTOR_BORDER >= lw
                || y + DESCRIPTOR_BORDER >= lh
            {
                continue;
            }
            candidates.push(Candidate {
                level: l as u32,
                x,
                y,
                response: harris_response(level_img, x, y) as f32,
            });
        }
    }

    candidates.sort_by(|a, b| {
        b.response
            .total_cmp(&a.response)
            .then(a.level.cmp(&b.level))
            .then(a.y.cmp(&b.y))
            .then(a.x.cmp(&b.x))
    });
    candidates.truncate(params.n_features);

    let mut integrals: Vec<Option<IntegralImage>> = vec![None; levels.len()];
    let mut set = DescriptorSet::default();
    for c in &candidates {
        let level_img = &levels[c.level as usize];
        let angle = orientation(level_img, c.x, c.y);
        let ii = integrals[c.level as usize].get_or_insert_with(|| integral(level_img));
        let desc = describe(ii, c.x, c.y, angle);
        let scale = level_scales[c.level as usize];
        set.keypoints.push(Keypoint {
            x: (c.x as f64 * scale) as f32,
            y: (c.y as f64 * scale) as f32,
            level: c.level,
            angle: angle as f32,
            response: c.response,
        });
        set.descriptors.push(desc);
    }
    Ok(set)
}

/// Harris corner measure with Sobel gradients summed over a 7x7 block.
fn harris_response(img: &GrayImage, x: u32, y: u32) -> f64 {
    let px = |dx: i64, dy: i64| -> f64 { img.pixel((x as i64 + dx) as u32, (y as i64 + dy) as u32) as f64 };
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for v in -3i64..=3 {
        for u in -3i64..=3 {
            let gx = px(u + 1, v - 1) + 2.0 * px(u + 1, v) + px(u + 1, v + 1)
                - px(u - 1, v - 1)
                - 2.0 * px(u - 1, v)
                - px(u - 1, v + 1);
            let gy = px(u - 1, v + 1) + 2.0 * px(u, v + 1) + px(u + 1, v + 1)
                - px(u - 1, v - 1)
                - 2.0 * px(u, v - 1)
                - px(u + 1, v - 1);
            sxx += gx * gx;
            syy += gy * gy;
            sxy += gx * gy;
        }
    }
    sxx * syy - sxy * sxy - 0.04 * (sxx + syy) * (sxx + syy)
}

/// Intensity-centroid orientation over a radius-15 circular patch.
fn orientation(img: &GrayImage, x: u32, y: u32) -> f64 {
    let mut m10 = 0i64;
    let mut m01 = 0i64;
    for dy in -MOMENT_RADIUS..=MOMENT_RADIUS {
        for dx in -MOMENT_RADIUS..=MOMENT_RADIUS {
            if dx * dx + dy * dy > MOMENT_RADIUS * MOMENT_RADIUS {
                continue;
            }
            let v = img.pixel((x as i64 + dx) as u32, (y as i64 + dy) as u32) as i64;
            m10 += dx * v;
            m01 += dy * v;
        }
    }
    if m10 == 0 && m01 == 0 {
        return 0.0;
    }
    let mut a = libm::atan2(m01 as f64, m10 as f64);
    if a < 0.0 {
        a += 2.0 * PI;
    }
    a
}

/// Smoothed-pair comparisons of the rotated sampling pattern.
fn describe(ii: &IntegralImage, x: u32, y: u32, angle: f64) -> Descriptor {
    let step = 2.0 * PI / ANGLE_STEPS as f64;
    let idx = (libm::round(angle / step) as i64).rem_euclid(ANGLE_STEPS as i64);
    let theta = idx as f64 * step;
    let (sin_t, cos_t) = (libm::sin(theta), libm::cos(theta));

    let smooth = |px: i64, py: i64| -> u64 {
        ii.rect_sum(Rect::new(px - 2, py - 2, 5, 5))
            .expect("pattern point within descriptor border")
    };

    let mut bits = [0u8; 32];
    for (i, p) in SAMPLING_PATTERN.iter().enumerate() {
        let rot = |px: f64, py: f64| -> (i64, i64) {
            (
                libm::round(cos_t * px - sin_t * py) as i64,
                libm::round(sin_t * px + cos_t * py) as i64,
            )
        };
        let (ax, ay) = rot(p[0] as f64, p[1] as f64);
        let (bx, by) = rot(p[2] as f64, p[3] as f64);
        let va = smooth(x as i64 + ax, y as i64 + ay);
        let vb = smooth(x as i64 + bx, y as i64 + by);
        if va < vb {
            bits[i / 8] |= 0x80 >> (i % 8);
        }
    }
    Descriptor { bits }
}

/// Nearest/second-nearest matching with Lowe's ratio test.
///
/// For every query descriptor the nearest and second-nearest train
/// descriptors by Hamming distance are found (ties go to the lowest train
/// index; a singleton train set uses 256 as the second distance). The pair
/// passes iff `d1 < ratio * d2`.
pub fn match_descriptors(query: &DescriptorSet, train: &DescriptorSet, ratio: f64) -> MatchReport {
    assert!(ratio > 0.0 && ratio < 1.0, "ratio must be in (0, 1)");
    let mut report = MatchReport::default();
    if train.is_empty() {
        return report;
    }
    for (qi, qd) in query.descriptors.iter().enumerate() {
        let mut best = u32::MAX;
        let mut best_idx = 0usize;
        let mut second = u32::MAX;
        for (ti, td) in train.descriptors.iter().enumerate() {
            let d = qd.hamming(td);
            if d < best {
                second = best;
                best = d;
                best_idx = ti;
            } else if d < second {
                second = d;
            }
        }
        let d2 = if train.len() == 1 { 256 } else { second };
        report.pairs.push(FeatureMatch {
            query: qi,
            train: best_idx,
            distance: best,
        });
        if (best as f64) < ratio * (d2 as f64) {
            report.good_count += 1;
        }
    }
    report
}
