//! Boosted Haar cascade evaluation: variance-normalized window scoring with
//! stage-wise early rejection, a multi-scale scan, and overlap grouping.
//! Parsing of the cascade file format lives in the companion std crate.

use alloc::vec;
use alloc::vec::Vec;

use crate::config::DetectParams;
use crate::error::{contract, Error, Result};
use crate::imaging::{integral, GrayImage, IntegralImage, Rect};

/// One weighted rectangle of a Haar feature, in base-window coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedRect {
    pub rect: Rect,
    pub weight: f64,
}

/// A Haar feature: 2 or 3 weighted rectangles.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarFeature {
    pub rects: Vec<WeightedRect>,
}

/// Decision stump over one feature value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakClassifier {
    pub feature: usize,
    pub threshold: f64,
    pub left_value: f64,
    pub right_value: f64,
}

/// One boosted stage; the window is rejected as soon as the vote sum of any
/// stage falls below its threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub weak: Vec<WeakClassifier>,
    pub stage_threshold: f64,
}

/// A parsed detection cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeModel {
    pub window_w: u32,
    pub window_h: u32,
    pub stages: Vec<Stage>,
    pub features: Vec<HaarFeature>,
}

impl CascadeModel {
    /// Structural invariants: at least one stage, window at least 4x4,
    /// stump feature indices in range, every feature with 2 or 3 rects that
    /// stay inside the base window.
    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(contract("cascade must have at least one stage"));
        }
        if self.window_w < 4 || self.window_h < 4 {
            return Err(contract("cascade base window must be at least 4x4"));
        }
        for (si, stage) in self.stages.iter().enumerate() {
            if stage.weak.is_empty() {
                return Err(contract(alloc::format!(
                    "stage {si} has no weak classifiers"
                )));
            }
            for wc in &stage.weak {
                if wc.feature >= self.features.len() {
                    return Err(contract(alloc::format!(
                        "stage {si} references feature {} of {}",
                        wc.feature,
                        self.features.len()
                    )));
                }
            }
        }
        for (fi, feature) in self.features.iter().enumerate() {
            if feature.rects.len() < 2 || feature.rects.len() > 3 {
                return Err(contract(alloc::format!(
                    "feature {fi} must have 2 or 3 rects"
                )));
            }
            for wr in &feature.rects {
                let r = wr.rect;
                let inside = r.x >= 0
                    && r.y >= 0
                    && r.w >= 1
                    && r.h >= 1
                    && r.x + r.w as i64 <= self.window_w as i64
                    && r.y + r.h as i64 <= self.window_h as i64;
                if !inside {
                    return Err(contract(alloc::format!(
                        "feature {fi} rect outside the base window"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// An accepted, grouped detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Detection {
    pub rect: Rect,
    /// Number of raw window hits merged into this detection.
    pub neighbors: usize,
}

/// Scales a base-window rect: every coordinate is independently rounded to
/// the nearest integer, then clamped so the rect stays inside the scaled
/// window (independent rounding can overshoot the far edge by one pixel).
fn scale_rect(r: Rect, scale: f64, sw: u32, sh: u32) -> Rect {
    let rx = (libm::round(r.x as f64 * scale) as i64).min(sw as i64 - 1);
    let ry = (libm::round(r.y as f64 * scale) as i64).min(sh as i64 - 1);
    let rw = (libm::round(r.w as f64 * scale) as i64).max(1).min(sw as i64 - rx);
    let rh = (libm::round(r.h as f64 * scale) as i64).max(1).min(sh as i64 - ry);
    Rect::new(rx, ry, rw as u32, rh as u32)
}

/// Evaluates the full cascade on the window whose origin is `(x, y)` and
/// whose size is the base window scaled by `scale`.
///
/// The window standard deviation (floored at 1) multiplies each stump
/// threshold along with the scaled window area, so the comparison runs on
/// raw integral sums:
/// `sum_i(weight_i * rect_sum_i)  <  node_threshold * sigma * area`.
pub fn eval_window(
    model: &CascadeModel,
    ii: &IntegralImage,
    x: u32,
    y: u32,
    scale: f64,
) -> Result<bool> {
    let sw = libm::round(model.window_w as f64 * scale) as u32;
    let sh = libm::round(model.window_h as f64 * scale) as u32;
    let window = Rect::new(x as i64, y as i64, sw.max(1), sh.max(1));
    if x as u64 + sw as u64 > ii.image_width() as u64
        || y as u64 + sh as u64 > ii.image_height() as u64
    {
        return Err(Error::OutOfBounds {
            x: x as i64,
            y: y as i64,
            w: sw,
            h: sh,
            image_w: ii.image_width(),
            image_h: ii.image_height(),
        });
    }
    let area = sw as f64 * sh as f64;
    let sum = ii.rect_sum(window)? as f64;
    let sq = ii.rect_sum_squared(window)? as f64;
    let mean = sum / area;
    let var = sq / area - mean * mean;
    let sigma = if var > 1.0 { libm::sqrt(var) } else { 1.0 };

    for stage in &model.stages {
        let mut votes = 0.0f64;
        for wc in &stage.weak {
            let feature = &model.features[wc.feature];
            let mut value = 0.0f64;
            for wr in &feature.rects {
                let sr = scale_rect(wr.rect, scale, sw, sh);
                let abs = Rect::new(x as i64 + sr.x, y as i64 + sr.y, sr.w, sr.h);
                value += wr.weight * ii.rect_sum(abs)? as f64;
            }
            votes += if value < wc.threshold * sigma * area {
                wc.left_value
            } else {
                wc.right_value
            };
        }
        if votes < stage.stage_threshold {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Multi-scale sliding-window scan followed by overlap grouping.
///
/// Scales run `1, step, step^2, ...` while the scaled window fits the image;
/// windows smaller than `min_size` on either side are skipped and the stride
/// is `max(1, round(scale))`. Output is sorted by (y, x, w, h).
pub fn detect_multiscale(
    model: &CascadeModel,
    img: &GrayImage,
    params: &DetectParams,
) -> Vec<Detection> {
    assert!(params.scale_step > 1.0, "scale_step must exceed 1");
    let ii = integral(img);
    let mut raw: Vec<Rect> = Vec::new();
    let mut scale = 1.0f64;
    loop {
        let sw = libm::round(model.window_w as f64 * scale) as u32;
        let sh = libm::round(model.window_h as f64 * scale) as u32;
        if sw > img.width() || sh > img.height() || sw == 0 || sh == 0 {
            break;
        }
        if sw.min(sh) >= params.min_size {
            let stride = libm::round(scale).max(1.0) as usize;
            let mut y = 0u32;
            while y + sh <= img.height() {
                let mut x = 0u32;
                while x + sw <= img.width() {
                    if eval_window(model, &ii, x, y, scale).unwrap_or(false) {
                        raw.push(Rect::new(x as i64, y as i64, sw, sh));
                    }
                    x += stride as u32;
                }
                y += stride as u32;
            }
        }
        scale *= params.scale_step;
    }
    let mut grouped = group_rects(&raw, params.min_neighbors);
    grouped.sort_by_key(|d| (d.rect.y, d.rect.x, d.rect.w, d.rect.h));
    grouped
}

/// Two raw hits belong together when their positions differ by at most 20%
/// of the smaller width/height and their sizes agree within 20%.
fn similar(a: &Rect, b: &Rect) -> bool {
    let tol_x = 0.2 * a.w.min(b.w) as f64;
    let tol_y = 0.2 * a.h.min(b.h) as f64;
    ((a.x - b.x).abs() as f64) <= tol_x
        && ((a.y - b.y).abs() as f64) <= tol_y
        && (a.w.max(b.w) as f64) <= 1.2 * a.w.min(b.w) as f64
        && (a.h.max(b.h) as f64) <= 1.2 * a.h.min(b.h) as f64
}

/// Transitive clustering of similar rects; clusters with at least
/// `min_neighbors + 1` members emit their coordinate-wise mean rect.
pub fn group_rects(raw: &[Rect], min_neighbors: usize) -> Vec<Detection> {
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();

    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }

    for i in 0..n {
        for j in (i + 1)..n {
            if similar(&raw[i], &raw[j]) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    let mut clusters: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = clusters.len();
            clusters.push((r, Vec::new()));
        }
        clusters[root_slot[r]].1.push(i);
    }

    let mut out = Vec::new();
    for (_, members) in clusters {
        if members.len() < min_neighbors + 1 {
            continue;
        }
        let k = members.len() as f64;
        let mean = |f: &dyn Fn(&Rect) -> f64| -> f64 {
            members.iter().map(|&i| f(&raw[i])).sum::<f64>() / k
        };
        let rect = Rect::new(
            libm::round(mean(&|r| r.x as f64)) as i64,
            libm::round(mean(&|r| r.y as f64)) as i64,
            libm::round(mean(&|r| r.w as f64)) as u32,
            libm::round(mean(&|r| r.h as f64)) as u32,
        );
        out.push(Detection {
            rect,
            neighbors: members.len(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::GrayImage;

    fn xorshift(state: &mut u64) -> u64 {
        let mut x = *state;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        *state = x;
        x
    }

    fn uniform(state: &mut u64) -> f64 {
        (xorshift(state) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn random_gray(w: u32, h: u32, seed: u64) -> GrayImage {
        let mut s = seed.max(1);
        GrayImage::from_fn(w, h, |_, _| (xorshift(&mut s) >> 32) as u8)
    }

    /// Hand fixture: one stage with a single stump whose 2-rect feature
    /// (equal-weight positive/negative halves) evaluates to exactly 0 on any
    /// constant image.
    fn fixture(stage_threshold: f64) -> CascadeModel {
        fixture_with_stump_threshold(stage_threshold, 0.5)
    }

    fn fixture_with_stump_threshold(stage_threshold: f64, stump_threshold: f64) -> CascadeModel {
        CascadeModel {
            window_w: 8,
            window_h: 8,
            stages: vec![Stage {
                weak: vec![WeakClassifier {
                    feature: 0,
                    threshold: stump_threshold,
                    left_value: -1.0,
                    right_value: 1.0,
                }],
                stage_threshold,
            }],
            features: vec![HaarFeature {
                rects: vec![
                    WeightedRect {
                        rect: Rect::new(0, 0, 8, 4),
                        weight: 1.0,
                    },
                    WeightedRect {
                        rect: Rect::new(0, 4, 8, 4),
                        weight: -1.0,
                    },
                ],
            }],
        }
    }

    /// Random multi-stage cascade exercising 2- and 3-rect features. Stump
    /// thresholds are calibrated to the median normalized feature value over
    /// probe windows so both vote branches actually fire.
    fn stress_cascade(seed: u64) -> CascadeModel {
        let mut s = seed.max(1);
        let (w, h) = (20u32, 20u32);
        let mut features = Vec::new();
        for _ in 0..12 {
            let fx = (xorshift(&mut s) % 14) as i64;
            let fy = (xorshift(&mut s) % 14) as i64;
            let fw = 2 + (xorshift(&mut s) % (20 - fx as u64 - 1)) as u32;
            let fh = 2 + (xorshift(&mut s) % (20 - fy as u64 - 1)) as u32;
            let fw = fw.min(w - fx as u32);
            let fh = fh.min(h - fy as u32);
            let mut rects = vec![WeightedRect {
                rect: Rect::new(fx, fy, fw, fh),
                weight: -1.0,
            }];
            let parts = if xorshift(&mut s) % 2 == 0 { 1 } else { 2 };
            for _ in 0..parts {
                let sw = 1 + (xorshift(&mut s) % fw as u64) as u32;
                let sh = 1 + (xorshift(&mut s) % fh as u64) as u32;
                let sx = fx + (xorshift(&mut s) % (fw - sw + 1) as u64) as i64;
                let sy = fy + (xorshift(&mut s) % (fh - sh + 1) as u64) as i64;
                rects.push(WeightedRect {
                    rect: Rect::new(sx, sy, sw, sh),
                    weight: if parts == 1 { 2.0 } else { 3.0 },
                });
            }
            features.push(HaarFeature { rects });
        }

        // median normalized value of each feature over probe windows
        let probe = random_gray(64, 64, seed.wrapping_mul(31) + 7);
        let ii = integral(&probe);
        let thresholds: Vec<f64> = features
            .iter()
            .map(|feature| {
                let mut values = Vec::new();
                for _ in 0..15 {
                    let scale = 1.0 + uniform(&mut s) * 1.5;
                    let sw = libm::round(20.0 * scale) as u32;
                    if sw >= 64 {
                        continue;
                    }
                    let x = (xorshift(&mut s) % (64 - sw) as u64) as u32;
                    let y = (xorshift(&mut s) % (64 - sw) as u64) as u32;
                    let window = Rect::new(x as i64, y as i64, sw, sw);
                    let area = (sw * sw) as f64;
                    let mean = ii.rect_sum(window).unwrap() as f64 / area;
                    let var = ii.rect_sum_squared(window).unwrap() as f64 / area - mean * mean;
                    let sigma = if var > 1.0 { libm::sqrt(var) } else { 1.0 };
                    let mut value = 0.0;
                    for wr in &feature.rects {
                        let sr = scale_rect(wr.rect, scale, sw, sw);
                        let abs = Rect::new(x as i64 + sr.x, y as i64 + sr.y, sr.w, sr.h);
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
        for si in 0..4 {
            let count = 2 + (si % 2);
            let mut weak = Vec::new();
            for _ in 0..count {
                let feature = fi % features.len();
                weak.push(WeakClassifier {
                    feature,
                    threshold: thresholds[feature] + uniform(&mut s) * 0.02 - 0.01,
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
        model.validate().unwrap();
        model
    }

    /// Direct-summation evaluator: no integral images anywhere. Mirrors the
    /// documented window contract (independent rect rounding, clamping,
    /// sigma floor, threshold scaling, stage order with early exit).
    fn eval_window_direct(
        model: &CascadeModel,
        img: &GrayImage,
        x: u32,
        y: u32,
        scale: f64,
    ) -> bool {
        let px_sum = |r: Rect| -> f64 {
            let mut acc = 0.0;
            for yy in r.y..r.y + r.h as i64 {
                for xx in r.x..r.x + r.w as i64 {
                    acc += img.pixel(xx as u32, yy as u32) as f64;
                }
            }
            acc
        };
        let sw = libm::round(model.window_w as f64 * scale) as u32;
        let sh = libm::round(model.window_h as f64 * scale) as u32;
        let window = Rect::new(x as i64, y as i64, sw, sh);
        let area = sw as f64 * sh as f64;
        let mean = px_sum(window) / area;
        let mut sq = 0.0;
        for yy in y..y + sh {
            for xx in x..x + sw {
                let v = img.pixel(xx, yy) as f64;
                sq += v * v;
            }
        }
        let var = sq / area - mean * mean;
        let sigma = if var > 1.0 { libm::sqrt(var) } else { 1.0 };
        for stage in &model.stages {
            let mut votes = 0.0;
            for wc in &stage.weak {
                let mut value = 0.0;
                for wr in &model.features[wc.feature].rects {
                    let sr = scale_rect(wr.rect, scale, sw, sh);
                    value += wr.weight
                        * px_sum(Rect::new(x as i64 + sr.x, y as i64 + sr.y, sr.w, sr.h));
                }
                votes += if value < wc.threshold * sigma * area {
                    wc.left_value
                } else {
                    wc.right_value
                };
            }
            if votes < stage.stage_threshold {
                return false;
            }
        }
        true
    }

    #[test]
    fn fixture_rejects_constant_when_threshold_high() {
        // constant image: feature value 0, sigma floors at 1, 0 < 0.5*1*64
        // so the stump votes left (-1); a stage threshold above -1 rejects
        let img = GrayImage::from_fn(16, 16, |_, _| 120);
        let ii = integral(&img);
        let model = fixture(0.0);
        assert!(!eval_window(&model, &ii, 0, 0, 1.0).unwrap());
    }

    #[test]
    fn fixture_accepts_constant_when_threshold_low() {
        let img = GrayImage::from_fn(16, 16, |_, _| 120);
        let ii = integral(&img);
        let model = fixture(-1.5);
        assert!(eval_window(&model, &ii, 0, 0, 1.0).unwrap());
    }

    #[test]
    fn eval_window_rejects_out_of_bounds() {
        let img = random_gray(16, 16, 3);
        let ii = integral(&img);
        let model = fixture(0.0);
        assert!(matches!(
            eval_window(&model, &ii, 10, 10, 1.0),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(matches!(
            eval_window(&model, &ii, 0, 0, 3.0),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn eval_window_agrees_with_direct_summation() {
        let mut s = 0xabcdefu64;
        let mut accepted = 0usize;
        let mut total = 0usize;
        for seed in 0..5u64 {
            let model = stress_cascade(100 + seed);
            let img = random_gray(64, 64, 500 + seed);
            let ii = integral(&img);
            for _ in 0..100 {
                let scale = 1.0 + uniform(&mut s) * 1.8;
                let sw = libm::round(20.0 * scale) as u32;
                if sw >= 64 {
                    continue;
                }
                let x = (xorshift(&mut s) % (64 - sw) as u64) as u32;
                let y = (xorshift(&mut s) % (64 - sw) as u64) as u32;
                let fast = eval_window(&model, &ii, x, y, scale).unwrap();
                let direct = eval_window_direct(&model, &img, x, y, scale);
                assert_eq!(fast, direct, "window ({x},{y}) scale {scale}");
                total += 1;
                accepted += fast as usize;
            }
        }
        // both branches must actually be exercised
        assert!(accepted > 0 && accepted < total, "{accepted}/{total}");
    }

    #[test]
    fn early_exit_never_changes_results() {
        // full evaluation (all stages, no early return) vs the early-exit path
        let model = stress_cascade(77);
        let img = random_gray(80, 80, 9);
        let ii = integral(&img);
        let mut s = 4242u64;
        for _ in 0..1000 {
            let scale = 1.0 + uniform(&mut s) * 2.0;
            let sw = libm::round(20.0 * scale) as u32;
            if sw >= 80 {
                continue;
            }
            let x = (xorshift(&mut s) % (80 - sw) as u64) as u32;
            let y = (xorshift(&mut s) % (80 - sw) as u64) as u32;
            let early = eval_window(&model, &ii, x, y, scale).unwrap();

            // all-stage evaluation
            let sh = sw;
            let window = Rect::new(x as i64, y as i64, sw, sh);
            let area = sw as f64 * sh as f64;
            let mean = ii.rect_sum(window).unwrap() as f64 / area;
            let var = ii.rect_sum_squared(window).unwrap() as f64 / area - mean * mean;
            let sigma = if var > 1.0 { libm::sqrt(var) } else { 1.0 };
            let mut all_pass = true;
            for stage in &model.stages {
                let mut votes = 0.0;
                for wc in &stage.weak {
                    let mut value = 0.0;
                    for wr in &model.features[wc.feature].rects {
                        let sr = scale_rect(wr.rect, scale, sw, sh);
                        let abs = Rect::new(x as i64 + sr.x, y as i64 + sr.y, sr.w, sr.h);
                        value += wr.weight * ii.rect_sum(abs).unwrap() as f64;
                    }
                    votes += if value < wc.threshold * sigma * area {
                        wc.left_value
                    } else {
                        wc.right_value
                    };
                }
                if votes < stage.stage_threshold {
                    all_pass = false;
                }
            }
            assert_eq!(early, all_pass);
        }
    }

    #[test]
    fn eval_window_scale_consistent_with_upsampled_image() {
        // nearest-neighbor 2x upsample: every pixel duplicated 4 times, so
        // window mean/variance are identical and rect geometry scales exactly
        let model = fixture(0.0);
        let img = random_gray(24, 24, 21);
        let up = GrayImage::from_fn(48, 48, |x, y| img.pixel(x / 2, y / 2));
        let ii = integral(&img);
        let ii_up = integral(&up);
        let mut s = 8u64;
        for _ in 0..50 {
            let x = (xorshift(&mut s) % 16) as u32;
            let y = (xorshift(&mut s) % 16) as u32;
            let a = eval_window(&model, &ii, x, y, 1.0).unwrap();
            let b = eval_window(&model, &ii_up, 2 * x, 2 * y, 2.0).unwrap();
            assert_eq!(a, b, "window ({x},{y})");
        }
    }

    #[test]
    fn detect_multiscale_constant_image_is_empty() {
        // a large positive stump threshold outweighs any feature-value
        // imbalance that scaled-rect rounding can introduce on a constant
        // image (sigma floors at 1), so every window votes left and rejects
        let model = fixture_with_stump_threshold(0.0, 50.0);
        let img = GrayImage::from_fn(60, 60, |_, _| 128);
        let params = DetectParams {
            scale_step: 1.1,
            min_neighbors: 0,
            min_size: 8,
        };
        assert!(detect_multiscale(&model, &img, &params).is_empty());
    }

    #[test]
    fn detect_multiscale_image_smaller_than_window() {
        let model = stress_cascade(5);
        let img = random_gray(12, 12, 2);
        assert!(detect_multiscale(&model, &img, &DetectParams::default()).is_empty());
    }

    #[test]
    fn group_rects_merges_identical_copies() {
        let r = Rect::new(10, 12, 30, 30);
        let hits = group_rects(&[r, r, r, r], 3);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].neighbors, 4);
        assert_eq!(hits[0].rect, r);
    }

    #[test]
    fn group_rects_drops_lonely_hits() {
        let a = Rect::new(0, 0, 20, 20);
        let b = Rect::new(200, 200, 20, 20);
        assert!(group_rects(&[a, b], 3).is_empty());
    }

    #[test]
    fn group_rects_matches_transitive_closure_oracle() {
        let mut s = 99u64;
        for round in 0..20u64 {
            // jittered clusters around random anchors plus stray rects
            let mut rects = Vec::new();
            let clusters = 1 + (xorshift(&mut s) % 3) as usize;
            for _ in 0..clusters {
                let cx = 30 + (xorshift(&mut s) % 200) as i64;
                let cy = 30 + (xorshift(&mut s) % 200) as i64;
                let cw = 24 + (xorshift(&mut s) % 30) as u32;
                let members = 2 + (xorshift(&mut s) % 5) as usize;
                for _ in 0..members {
                    let jx = (xorshift(&mut s) % 7) as i64 - 3;
                    let jy = (xorshift(&mut s) % 7) as i64 - 3;
                    let jw = (xorshift(&mut s) % 5) as i64 - 2;
                    rects.push(Rect::new(
                        cx + jx,
                        cy + jy,
                        (cw as i64 + jw) as u32,
                        (cw as i64 + jw) as u32,
                    ));
                }
            }
            for _ in 0..(xorshift(&mut s) % 3) {
                rects.push(Rect::new(
                    (xorshift(&mut s) % 400) as i64,
                    (xorshift(&mut s) % 400) as i64,
                    10 + (xorshift(&mut s) % 100) as u32,
                    10 + (xorshift(&mut s) % 100) as u32,
                ));
            }

            // O(n^2) closure oracle: repeated merging until fixpoint
            let n = rects.len();
            let mut label: Vec<usize> = (0..n).collect();
            let mut changed = true;
            while changed {
                changed = false;
                for i in 0..n {
                    for j in 0..n {
                        if similar(&rects[i], &rects[j]) && label[j] != label[i] {
                            let from = label[i].max(label[j]);
                            let to = label[i].min(label[j]);
                            for l in label.iter_mut() {
                                if *l == from {
                                    *l = to;
                                    changed = true;
                                }
                            }
                        }
                    }
                }
            }
            for min_neighbors in 0..3usize {
                let mut want: Vec<(Rect, usize)> = Vec::new();
                let mut seen: Vec<usize> = Vec::new();
                for &l in &label {
                    if seen.contains(&l) {
                        continue;
                    }
                    seen.push(l);
                    let members: Vec<&Rect> = label
                        .iter()
                        .zip(&rects)
                        .filter(|(&ll, _)| ll == l)
                        .map(|(_, r)| r)
                        .collect();
                    if members.len() < min_neighbors + 1 {
                        continue;
                    }
                    let k = members.len() as f64;
                    let mean_rect = Rect::new(
                        libm::round(members.iter().map(|r| r.x as f64).sum::<f64>() / k) as i64,
                        libm::round(members.iter().map(|r| r.y as f64).sum::<f64>() / k) as i64,
                        libm::round(members.iter().map(|r| r.w as f64).sum::<f64>() / k) as u32,
                        libm::round(members.iter().map(|r| r.h as f64).sum::<f64>() / k) as u32,
                    );
                    want.push((mean_rect, members.len()));
                }
                let mut got: Vec<(Rect, usize)> = group_rects(&rects, min_neighbors)
                    .iter()
                    .map(|d| (d.rect, d.neighbors))
                    .collect();
                let key = |t: &(Rect, usize)| (t.0.y, t.0.x, t.0.w, t.0.h, t.1);
                got.sort_by_key(key);
                want.sort_by_key(key);
                assert_eq!(got, want, "round {round} min_neighbors {min_neighbors}");
            }
        }
    }
}
