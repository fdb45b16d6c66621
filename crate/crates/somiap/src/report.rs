//! Wire formats for analysis output: a versioned JSON schema that round-trips
//! losslessly, plus a line-oriented text rendering.

use serde::{Deserialize, Serialize};

use somiap_core::facedetect::Detection;
use somiap_core::facerecog::Prediction;
use somiap_core::hashing::CalibrationReport;
use somiap_core::pipeline::{AnalysisReport, PlaceMatch, StageTimings};
use somiap_core::Rect;

use crate::error::{Result, ToolError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReportSchema {
    pub version: u32,
    pub query_id: String,
    pub place: Option<PlaceMatchSchema>,
    pub candidates: Vec<PlaceMatchSchema>,
    pub faces: Vec<FaceSchema>,
    pub timings: TimingsSchema,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceMatchSchema {
    pub entry_id: String,
    pub feature_matches: usize,
    /// -1 when the feature gate failed and the hash stage was skipped.
    pub hash_distance: i32,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceSchema {
    pub rect: RectSchema,
    pub neighbors: usize,
    /// `null` means UNKNOWN (or no recognizer loaded when distance is null too).
    pub label: Option<String>,
    pub distance: Option<f64>,
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectSchema {
    pub x: i64,
    pub y: i64,
    pub w: u32,
    pub h: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingsSchema {
    pub place_ms: f64,
    pub detect_ms: f64,
    pub recognize_ms: f64,
    pub total_ms: f64,
}

fn match_to_schema(m: &PlaceMatch) -> PlaceMatchSchema {
    PlaceMatchSchema {
        entry_id: m.entry_id.clone(),
        feature_matches: m.feature_matches,
        hash_distance: m.hash_distance,
        accepted: m.accepted,
    }
}

fn face_to_schema(det: &Detection, pred: &Option<Prediction>) -> FaceSchema {
    FaceSchema {
        rect: RectSchema {
            x: det.rect.x,
            y: det.rect.y,
            w: det.rect.w,
            h: det.rect.h,
        },
        neighbors: det.neighbors,
        label: pred.as_ref().and_then(|p| p.label.clone()),
        distance: pred.as_ref().map(|p| p.distance),
        cutoff: pred.as_ref().and_then(|p| p.threshold_applied),
    }
}

pub fn report_to_schema(r: &AnalysisReport) -> AnalysisReportSchema {
    AnalysisReportSchema {
        version: crate::manifest::MANIFEST_VERSION,
        query_id: r.query_id.clone(),
        place: r.place.as_ref().map(match_to_schema),
        candidates: r.candidates.iter().map(match_to_schema).collect(),
        faces: r
            .faces
            .iter()
            .map(|(det, pred)| face_to_schema(det, pred))
            .collect(),
        timings: TimingsSchema {
            place_ms: r.timings.place_ms,
            detect_ms: r.timings.detect_ms,
            recognize_ms: r.timings.recognize_ms,
            total_ms: r.timings.total_ms,
        },
    }
}

/// Rebuilds the in-memory report from its schema (predictions without a
/// distance are treated as absent, matching `face_to_schema`).
pub fn report_from_schema(s: &AnalysisReportSchema) -> AnalysisReport {
    let from_match = |m: &PlaceMatchSchema| PlaceMatch {
        entry_id: m.entry_id.clone(),
        feature_matches: m.feature_matches,
        hash_distance: m.hash_distance,
        accepted: m.accepted,
    };
    AnalysisReport {
        query_id: s.query_id.clone(),
        place: s.place.as_ref().map(from_match),
        candidates: s.candidates.iter().map(from_match).collect(),
        faces: s
            .faces
            .iter()
            .map(|f| {
                let det = Detection {
                    rect: Rect::new(f.rect.x, f.rect.y, f.rect.w, f.rect.h),
                    neighbors: f.neighbors,
                };
                let pred = f.distance.map(|distance| Prediction {
                    label: f.label.clone(),
                    distance,
                    threshold_applied: f.cutoff,
                });
                (det, pred)
            })
            .collect(),
        timings: StageTimings {
            place_ms: s.timings.place_ms,
            detect_ms: s.timings.detect_ms,
            recognize_ms: s.timings.recognize_ms,
            total_ms: s.timings.total_ms,
        },
    }
}

pub fn to_json(report: &AnalysisReport) -> String {
    let mut s =
        serde_json::to_string_pretty(&report_to_schema(report)).expect("report serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<AnalysisReportSchema> {
    serde_json::from_str(text).map_err(|e| ToolError::Contract(format!("report: {e}")))
}

/// One line per candidate and per face.
pub fn to_text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("query: {}\n", report.query_id));
    match &report.place {
        Some(p) => out.push_str(&format!(
            "place: {} (hash distance {}, {} feature matches)\n",
            p.entry_id, p.hash_distance, p.feature_matches
        )),
        None => out.push_str("place: none\n"),
    }
    for c in &report.candidates {
        out.push_str(&format!(
            "candidate: {} accepted={} feature_matches={} hash_distance={}\n",
            c.entry_id, c.accepted, c.feature_matches, c.hash_distance
        ));
    }
    for (det, pred) in &report.faces {
        let identity = match pred {
            Some(p) => match &p.label {
                Some(l) => format!("{l} (distance {:.2})", p.distance),
                None => format!("unknown (distance {:.2})", p.distance),
            },
            None => "unrecognized (no model)".to_string(),
        };
        out.push_str(&format!(
            "face: {}x{} at ({},{}) neighbors={} identity={}\n",
            det.rect.w, det.rect.h, det.rect.x, det.rect.y, det.neighbors, identity
        ));
    }
    out.push_str(&format!(
        "timings: place {:.2} ms, detect {:.2} ms, recognize {:.2} ms, total {:.2} ms\n",
        report.timings.place_ms,
        report.timings.detect_ms,
        report.timings.recognize_ms,
        report.timings.total_ms
    ));
    out
}

/// Renders calibration rows with the column set of the accuracy table:
/// weight value (similar / different), threshold, accuracy.
pub fn calibration_table(rows: &[CalibrationReport]) -> String {
    let mut out = String::new();
    out.push_str("test            weight_similar  weight_different  threshold  accuracy\n");
    for r in rows {
        out.push_str(&format!(
            "{:<15} {:>14.2}  {:>16.2}  {:>9}  {:>7.1}%\n",
            r.algo.tag(),
            r.weight_similar,
            r.weight_different,
            r.threshold,
            r.accuracy * 100.0
        ));
    }
    out
}

/// One timing row per algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algo: String,
    pub mean_ms: f64,
    pub max_ms: f64,
    pub min_ms: f64,
}

/// Speed table over a corpus; invariant min <= mean <= max per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub images: usize,
    pub rows: Vec<BenchRow>,
}

pub fn bench_table(report: &BenchReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("corpus: {} images\n", report.images));
    out.push_str("test            mean_ms     max_ms     min_ms\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{:<15} {:>7.4}  {:>9.4}  {:>9.4}\n",
            r.algo, r.mean_ms, r.max_ms, r.min_ms
        ));
    }
    out
}
