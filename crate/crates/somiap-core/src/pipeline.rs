//! Two-stage place matching plus the face chain: enroll known-location
//! images, gate candidates on descriptor matches, compare perceptual hashes,
//! detect and identify faces, and assemble one combined report per query.

use alloc::string::String;
use alloc::vec::Vec;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::facedetect::{detect_multiscale, CascadeModel, Detection};
use crate::facerecog::{normalize_face, FaceModel, Prediction};
use crate::features::{match_descriptors, orb_detect_describe_with, DescriptorSet};
use crate::hashing::{hamming, hash_color_image, HashAlgo, HashDigest};
use crate::imaging::{to_gray, ColorImage};

/// One enrolled known-location image.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaceEntry {
    pub id: String,
    pub name: String,
    pub descriptors: DescriptorSet,
    /// One digest per supported algorithm, in [`HashAlgo::ALL`] order.
    pub digests: Vec<HashDigest>,
    /// Content checksum of the enrolled pixels (FNV-1a 64, hex).
    pub source_hash: String,
}

impl PlaceEntry {
    pub fn digest(&self, algo: HashAlgo) -> Option<&HashDigest> {
        self.digests.iter().find(|d| d.algo() == algo)
    }
}

/// The enrolled gallery and its matching configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlaceIndex {
    pub entries: Vec<PlaceEntry>,
    pub config: PipelineConfig,
}

/// Outcome of matching a query against one enrolled entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaceMatch {
    pub entry_id: String,
    /// Ratio-test pass count from the descriptor stage.
    pub feature_matches: usize,
    /// Hamming distance from the hash stage, or -1 when the feature gate
    /// failed and the hash stage was skipped.
    pub hash_distance: i32,
    pub accepted: bool,
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageTimings {
    pub place_ms: f64,
    pub detect_ms: f64,
    pub recognize_ms: f64,
    pub total_ms: f64,
}

/// Combined place + identity answer for one query image.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub query_id: String,
    /// Best accepted match, if any.
    pub place: Option<PlaceMatch>,
    /// Every evaluated entry, ranked.
    pub candidates: Vec<PlaceMatch>,
    /// Detections with their predictions (`None` when no recognizer is loaded).
    pub faces: Vec<(Detection, Option<Prediction>)>,
    pub timings: StageTimings,
}

/// FNV-1a 64-bit checksum of the image dimensions and raw RGB bytes.
pub fn content_hash(img: &ColorImage) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |b: u8| {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    };
    for b in img.width().to_be_bytes() {
        eat(b);
    }
    for b in img.height().to_be_bytes() {
        eat(b);
    }
    for &b in img.data() {
        eat(b);
    }
    let mut s = String::with_capacity(16);
    for shift in (0..16).rev() {
        let nibble = ((h >> (shift * 4)) & 0xf) as u32;
        s.push(char::from_digit(nibble, 16).unwrap());
    }
    s
}

/// Computes descriptors and all four digests for `img` and appends a new
/// entry. Pure: the input index is untouched and a new one is returned.
pub fn enroll_place(
    index: &PlaceIndex,
    img: &ColorImage,
    id: &str,
    name: &str,
) -> Result<PlaceIndex> {
    if index.entries.iter().any(|e| e.id == id) {
        return Err(Error::DuplicateId(String::from(id)));
    }
    let gray = to_gray(img);
    let descriptors = orb_detect_describe_with(&gray, &index.config.orb)
        .map_err(|e| stage_error("enroll", e))?;
    let digests = HashAlgo::ALL
        .iter()
        .map(|&algo| hash_color_image(img, algo))
        .collect();
    let mut out = index.clone();
    out.entries.push(PlaceEntry {
        id: String::from(id),
        name: String::from(name),
        descriptors,
        digests,
        source_hash: content_hash(img),
    });
    Ok(out)
}

/// Runs the two-stage comparison against every entry and ranks the results:
/// accepted entries first, then ascending hash distance, descending feature
/// matches, ascending id.
pub fn match_place(index: &PlaceIndex, img: &ColorImage) -> Result<Vec<PlaceMatch>> {
    let gray = to_gray(img);
    let query = orb_detect_describe_with(&gray, &index.config.orb)
        .map_err(|e| stage_error("place matching", e))?;
    let digest = hash_color_image(img, index.config.primary_algo);
    Ok(match_place_prepared(index, &query, &digest))
}

/// The ranking core, reusable when descriptors/digest are already computed.
pub fn match_place_prepared(
    index: &PlaceIndex,
    query: &DescriptorSet,
    query_digest: &HashDigest,
) -> Vec<PlaceMatch> {
    let cfg = &index.config;
    let threshold = cfg.hash_thresholds.get(cfg.primary_algo);
    let mut out: Vec<PlaceMatch> = Vec::with_capacity(index.entries.len());
    for entry in &index.entries {
        let report = match_descriptors(query, &entry.descriptors, cfg.match_ratio);
        let feature_matches = report.good_count;
        if feature_matches < cfg.min_feature_matches {
            out.push(PlaceMatch {
                entry_id: entry.id.clone(),
                feature_matches,
                hash_distance: -1,
                accepted: false,
            });
            continue;
        }
        let entry_digest = entry
            .digest(cfg.primary_algo)
            .expect("entries carry all supported digests");
        let distance = hamming(query_digest, entry_digest).expect("same algorithm") as i32;
        out.push(PlaceMatch {
            entry_id: entry.id.clone(),
            feature_matches,
            hash_distance: distance,
            accepted: distance as u32 <= threshold,
        });
    }
    out.sort_by(|a, b| {
        b.accepted
            .cmp(&a.accepted)
            .then(a.hash_distance.cmp(&b.hash_distance))
            .then(b.feature_matches.cmp(&a.feature_matches))
            .then(a.entry_id.cmp(&b.entry_id))
    });
    out
}

fn stage_error(stage: &str, e: Error) -> Error {
    match e {
        Error::Contract(msg) => Error::Contract(alloc::format!("{stage}: {msg}")),
        other => other,
    }
}

/// Full query: place matching, face detection and recognition, with
/// per-stage wall-clock timings taken from `now_micros`.
///
/// Degrades gracefully: an empty index yields no place, a missing cascade
/// yields no faces, a missing recognizer yields detections without
/// predictions.
pub fn analyze(
    index: &PlaceIndex,
    cascade: Option<&CascadeModel>,
    recognizer: Option<&FaceModel>,
    img: &ColorImage,
    query_id: &str,
    now_micros: &mut dyn FnMut() -> u64,
) -> Result<AnalysisReport> {
    let t0 = now_micros();
    let candidates = match_place(index, img)?;
    let t1 = now_micros();

    let gray = to_gray(img);
    let detections: Vec<Detection> = match cascade {
        Some(model) => detect_multiscale(model, &gray, &index.config.detect),
        None => Vec::new(),
    };
    let t2 = now_micros();

    let mut faces: Vec<(Detection, Option<Prediction>)> = Vec::with_capacity(detections.len());
    for det in detections {
        let prediction = match recognizer {
            Some(model) => {
                let face = normalize_face(&gray, det.rect, model.face_size())
                    .map_err(|e| stage_error("face normalization", e))?;
                Some(
                    model
                        .predict(&face, index.config.face.unknown_cutoff)
                        .map_err(|e| stage_error("face recognition", e))?,
                )
            }
            None => None,
        };
        faces.push((det, prediction));
    }
    let t3 = now_micros();

    let place = candidates.iter().find(|c| c.accepted).cloned();
    Ok(AnalysisReport {
        query_id: String::from(query_id),
        place,
        candidates,
        faces,
        timings: StageTimings {
            place_ms: (t1 - t0) as f64 / 1000.0,
            detect_ms: (t2 - t1) as f64 / 1000.0,
            recognize_ms: (t3 - t2) as f64 / 1000.0,
            total_ms: (t3 - t0) as f64 / 1000.0,
        },
    })
}
