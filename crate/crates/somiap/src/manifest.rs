//! The persistent index: one versioned JSON document holding the matching
//! configuration, the enrolled places (digests as tagged hex, descriptors as
//! hex strings) and the trained face model. Writes go through a temp file
//! plus rename so a killed process never corrupts the committed manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use somiap_core::config::{
    DetectParams, FaceConfig, HashThresholds, OrbParams, PipelineConfig, RecognizerPolicy,
};
use somiap_core::facerecog::{EigenModel, FaceModel, FisherModel, LbphModel};
use somiap_core::features::{Descriptor, DescriptorSet, Keypoint};
use somiap_core::hashing::{HashAlgo, HashDigest};
use somiap_core::numerics::Matrix;
use somiap_core::pipeline::{PlaceEntry, PlaceIndex};

use crate::error::{Result, ToolError};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub config: ConfigSchema,
    pub places: Vec<PlaceSchema>,
    pub face_model: Option<FaceModelSchema>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigSchema {
    pub primary_algo: String,
    pub hash_thresholds: ThresholdsSchema,
    pub min_feature_matches: usize,
    pub match_ratio: f64,
    pub orb: OrbSchema,
    pub detect: DetectSchema,
    pub face: FaceConfigSchema,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdsSchema {
    pub dhash_gray: u32,
    pub dhash_color: u32,
    pub phash_gray: u32,
    pub phash_color: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbSchema {
    pub n_features: usize,
    pub fast_threshold: u8,
    pub levels: u32,
    pub scale_factor: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectSchema {
    pub scale_step: f64,
    pub min_neighbors: usize,
    pub min_size: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaceConfigSchema {
    pub canonical: (u32, u32),
    pub grid: (u32, u32),
    pub policy: String,
    pub unknown_cutoff: Option<f64>,
    pub illumination_std_threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaceSchema {
    pub id: String,
    pub name: String,
    pub source_hash: String,
    pub digests: Vec<String>,
    pub keypoints: Vec<KeypointSchema>,
    pub descriptors: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeypointSchema {
    pub x: f32,
    pub y: f32,
    pub level: u32,
    pub angle: f32,
    pub response: f32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "algo")]
pub enum FaceModelSchema {
    #[serde(rename = "eigen")]
    Eigen {
        width: u32,
        height: u32,
        mean: Vec<f64>,
        /// One vector per component, each of length width*height.
        components: Vec<Vec<f64>>,
        projections: Vec<Vec<f64>>,
        labels: Vec<String>,
    },
    #[serde(rename = "fisher")]
    Fisher {
        width: u32,
        height: u32,
        mean: Vec<f64>,
        columns: Vec<Vec<f64>>,
        projections: Vec<Vec<f64>>,
        labels: Vec<String>,
    },
    #[serde(rename = "lbph")]
    Lbph {
        width: u32,
        height: u32,
        grid: (u32, u32),
        histograms: Vec<Vec<u32>>,
        labels: Vec<String>,
    },
}

impl Manifest {
    pub fn new(config: &PipelineConfig) -> Self {
        Manifest {
            version: MANIFEST_VERSION,
            config: config_to_schema(config),
            places: Vec::new(),
            face_model: None,
        }
    }

    pub fn from_state(index: &PlaceIndex, face_model: Option<&FaceModel>) -> Self {
        Manifest {
            version: MANIFEST_VERSION,
            config: config_to_schema(&index.config),
            places: index.entries.iter().map(place_to_schema).collect(),
            face_model: face_model.map(model_to_schema),
        }
    }

    pub fn into_state(&self) -> Result<(PlaceIndex, Option<FaceModel>)> {
        if self.version != MANIFEST_VERSION {
            return Err(ToolError::Contract(format!(
                "unknown manifest version {} (supported: {MANIFEST_VERSION})",
                self.version
            )));
        }
        let config = config_from_schema(&self.config)?;
        let entries = self
            .places
            .iter()
            .map(place_from_schema)
            .collect::<Result<Vec<_>>>()?;
        for (i, e) in entries.iter().enumerate() {
            if entries[..i].iter().any(|other| other.id == e.id) {
                return Err(ToolError::Contract(format!(
                    "manifest holds duplicate place id `{}`",
                    e.id
                )));
            }
        }
        let model = self
            .face_model
            .as_ref()
            .map(model_from_schema)
            .transpose()?;
        Ok((PlaceIndex { entries, config }, model))
    }
}

fn config_to_schema(c: &PipelineConfig) -> ConfigSchema {
    ConfigSchema {
        primary_algo: c.primary_algo.tag().to_string(),
        hash_thresholds: ThresholdsSchema {
            dhash_gray: c.hash_thresholds.dhash_gray,
            dhash_color: c.hash_thresholds.dhash_color,
            phash_gray: c.hash_thresholds.phash_gray,
            phash_color: c.hash_thresholds.phash_color,
        },
        min_feature_matches: c.min_feature_matches,
        match_ratio: c.match_ratio,
        orb: OrbSchema {
            n_features: c.orb.n_features,
            fast_threshold: c.orb.fast_threshold,
            levels: c.orb.levels,
            scale_factor: c.orb.scale_factor,
        },
        detect: DetectSchema {
            scale_step: c.detect.scale_step,
            min_neighbors: c.detect.min_neighbors,
            min_size: c.detect.min_size,
        },
        face: FaceConfigSchema {
            canonical: c.face.canonical,
            grid: c.face.grid,
            policy: match c.face.policy {
                RecognizerPolicy::Eigen => "eigen",
                RecognizerPolicy::Fisher => "fisher",
                RecognizerPolicy::Lbph => "lbph",
                RecognizerPolicy::Auto => "auto",
            }
            .to_string(),
            unknown_cutoff: c.face.unknown_cutoff,
            illumination_std_threshold: c.face.illumination_std_threshold,
        },
    }
}

fn config_from_schema(s: &ConfigSchema) -> Result<PipelineConfig> {
    let primary_algo = HashAlgo::from_tag(&s.primary_algo).ok_or_else(|| {
        ToolError::Contract(format!("unknown hash algorithm `{}`", s.primary_algo))
    })?;
    let policy = match s.face.policy.as_str() {
        "eigen" => RecognizerPolicy::Eigen,
        "fisher" => RecognizerPolicy::Fisher,
        "lbph" => RecognizerPolicy::Lbph,
        "auto" => RecognizerPolicy::Auto,
        other => {
            return Err(ToolError::Contract(format!(
                "unknown recognizer policy `{other}`"
            )))
        }
    };
    Ok(PipelineConfig {
        primary_algo,
        hash_thresholds: HashThresholds {
            dhash_gray: s.hash_thresholds.dhash_gray,
            dhash_color: s.hash_thresholds.dhash_color,
            phash_gray: s.hash_thresholds.phash_gray,
            phash_color: s.hash_thresholds.phash_color,
        },
        min_feature_matches: s.min_feature_matches,
        match_ratio: s.match_ratio,
        orb: OrbParams {
            n_features: s.orb.n_features,
            fast_threshold: s.orb.fast_threshold,
            levels: s.orb.levels,
            scale_factor: s.orb.scale_factor,
        },
        detect: DetectParams {
            scale_step: s.detect.scale_step,
            min_neighbors: s.detect.min_neighbors,
            min_size: s.detect.min_size,
        },
        face: FaceConfig {
            canonical: s.face.canonical,
            grid: s.face.grid,
            policy,
            unknown_cutoff: s.face.unknown_cutoff,
            illumination_std_threshold: s.face.illumination_std_threshold,
        },
    })
}

fn hex_of(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn bytes_of(hex: &str, context: &str) -> Result<Vec<u8>> {
    if hex.len() % 2 != 0 {
        return Err(ToolError::Contract(format!("{context}: odd hex length")));
    }
    (0..hex.len())
        .step_by(2)
        .map(|i| {
            u8::from_str_radix(&hex[i..i + 2], 16)
                .map_err(|_| ToolError::Contract(format!("{context}: invalid hex")))
        })
        .collect()
}

fn place_to_schema(e: &PlaceEntry) -> PlaceSchema {
    PlaceSchema {
        id: e.id.clone(),
        name: e.name.clone(),
        source_hash: e.source_hash.clone(),
        digests: e.digests.iter().map(|d| d.to_hex()).collect(),
        keypoints: e
            .descriptors
            .keypoints
            .iter()
            .map(|k| KeypointSchema {
                x: k.x,
                y: k.y,
                level: k.level,
                angle: k.angle,
                response: k.response,
            })
            .collect(),
        descriptors: e
            .descriptors
            .descriptors
            .iter()
            .map(|d| hex_of(d.bytes()))
            .collect(),
    }
}

fn place_from_schema(s: &PlaceSchema) -> Result<PlaceEntry> {
    if s.keypoints.len() != s.descriptors.len() {
        return Err(ToolError::Contract(format!(
            "place `{}`: keypoint/descriptor count mismatch",
            s.id
        )));
    }
    let digests = s
        .digests
        .iter()
        .map(|d| HashDigest::parse_hex(d).map_err(ToolError::from))
        .collect::<Result<Vec<_>>>()?;
    let keypoints: Vec<Keypoint> = s
        .keypoints
        .iter()
        .map(|k| Keypoint {
            x: k.x,
            y: k.y,
            level: k.level,
            angle: k.angle,
            response: k.response,
        })
        .collect();
    let descriptors = s
        .descriptors
        .iter()
        .map(|hex| {
            let bytes = bytes_of(hex, &format!("place `{}` descriptor", s.id))?;
            let arr: [u8; 32] = bytes.try_into().map_err(|_| {
                ToolError::Contract(format!("place `{}`: descriptor must be 256 bits", s.id))
            })?;
            Ok(Descriptor::from_bytes(arr))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PlaceEntry {
        id: s.id.clone(),
        name: s.name.clone(),
        source_hash: s.source_hash.clone(),
        descriptors: DescriptorSet {
            keypoints,
            descriptors,
        },
        digests,
    })
}

fn matrix_columns(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.cols()).map(|c| m.column(c)).collect()
}

fn matrix_from_columns(cols: &[Vec<f64>], rows: usize, context: &str) -> Result<Matrix> {
    let mut m = Matrix::zeros(rows, cols.len());
    for (c, col) in cols.iter().enumerate() {
        if col.len() != rows {
            return Err(ToolError::Contract(format!(
                "{context}: column {c} has length {} (expected {rows})",
                col.len()
            )));
        }
        for (r, &v) in col.iter().enumerate() {
            m.set(r, c, v);
        }
    }
    Ok(m)
}

fn model_to_schema(m: &FaceModel) -> FaceModelSchema {
    match m {
        FaceModel::Eigen(e) => FaceModelSchema::Eigen {
            width: e.width,
            height: e.height,
            mean: e.mean.clone(),
            components: matrix_columns(&e.components),
            projections: e.projections.clone(),
            labels: e.labels.clone(),
        },
        FaceModel::Fisher(f) => FaceModelSchema::Fisher {
            width: f.width,
            height: f.height,
            mean: f.mean.clone(),
            columns: matrix_columns(&f.projection),
            projections: f.projections.clone(),
            labels: f.labels.clone(),
        },
        FaceModel::Lbph(l) => FaceModelSchema::Lbph {
            width: l.width,
            height: l.height,
            grid: l.grid,
            histograms: l.histograms.clone(),
            labels: l.labels.clone(),
        },
    }
}

fn model_from_schema(s: &FaceModelSchema) -> Result<FaceModel> {
    match s {
        FaceModelSchema::Eigen {
            width,
            height,
            mean,
            components,
            projections,
            labels,
        } => {
            let d = (*width * *height) as usize;
            check_lengths(mean.len() == d, projections.len() == labels.len(), "eigen")?;
            Ok(FaceModel::Eigen(EigenModel {
                width: *width,
                height: *height,
                mean: mean.clone(),
                components: matrix_from_columns(components, d, "eigen components")?,
                projections: projections.clone(),
                labels: labels.clone(),
            }))
        }
        FaceModelSchema::Fisher {
            width,
            height,
            mean,
            columns,
            projections,
            labels,
        } => {
            let d = (*width * *height) as usize;
            check_lengths(mean.len() == d, projections.len() == labels.len(), "fisher")?;
            Ok(FaceModel::Fisher(FisherModel {
                width: *width,
                height: *height,
                mean: mean.clone(),
                projection: matrix_from_columns(columns, d, "fisher projection")?,
                projections: projections.clone(),
                labels: labels.clone(),
            }))
        }
        FaceModelSchema::Lbph {
            width,
            height,
            grid,
            histograms,
            labels,
        } => {
            let expected = (grid.0 * grid.1) as usize * 256;
            if histograms.iter().any(|h| h.len() != expected) {
                return Err(ToolError::Contract(
                    "lbph histogram length does not match the grid".into(),
                ));
            }
            check_lengths(true, histograms.len() == labels.len(), "lbph")?;
            Ok(FaceModel::Lbph(LbphModel {
                width: *width,
                height: *height,
                grid: *grid,
                histograms: histograms.clone(),
                labels: labels.clone(),
            }))
        }
    }
}

fn check_lengths(dims_ok: bool, labels_ok: bool, which: &str) -> Result<()> {
    if !dims_ok {
        return Err(ToolError::Contract(format!(
            "{which} model: mean length does not match the face size"
        )));
    }
    if !labels_ok {
        return Err(ToolError::Contract(format!(
            "{which} model: per-sample arrays and labels disagree"
        )));
    }
    Ok(())
}

/// Serializes with a trailing newline; output is deterministic, so
/// save -> load -> save is byte-identical.
pub fn to_json(manifest: &Manifest) -> String {
    let mut s = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<Manifest> {
    serde_json::from_str(text).map_err(|e| ToolError::Contract(format!("manifest: {e}")))
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path)
        .map_err(|e| ToolError::io(format!("reading {}", path.display()), e))?;
    from_json(&text)
}

/// Atomic write: the document goes to `<path>.tmp` in the same directory and
/// is renamed over the target, so readers only ever see a complete manifest.
pub fn save_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let tmp = temp_path(path);
    let json = to_json(manifest);
    {
        let mut file = fs::File::create(&tmp)
            .map_err(|e| ToolError::io(format!("creating {}", tmp.display()), e))?;
        file.write_all(json.as_bytes())
            .map_err(|e| ToolError::io(format!("writing {}", tmp.display()), e))?;
        file.sync_all()
            .map_err(|e| ToolError::io(format!("syncing {}", tmp.display()), e))?;
    }
    // test hook: simulate a crash between the temp write and the rename
    if std::env::var_os("SOMIAP_CRASH_AFTER_TEMP_WRITE").is_some() {
        std::process::exit(86);
    }
    fs::rename(&tmp, path).map_err(|e| {
        ToolError::io(
            format!("renaming {} over {}", tmp.display(), path.display()),
            e,
        )
    })
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Advisory single-writer lock: created exclusively next to the manifest,
/// removed on drop. A stale file (crashed process) must be removed manually;
/// the error message says which file to remove.
pub struct IndexLock {
    path: PathBuf,
}

impl IndexLock {
    pub fn acquire(manifest_path: &Path) -> Result<IndexLock> {
        let mut name = manifest_path
            .file_name()
            .unwrap_or_default()
            .to_os_string();
        name.push(".lock");
        let path = manifest_path.with_file_name(name);
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(_) => Ok(IndexLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(ToolError::Contract(format!(
                    "index is locked by another command; remove {} if stale",
                    path.display()
                )))
            }
            Err(e) => Err(ToolError::io(format!("creating {}", path.display()), e)),
        }
    }
}

impl Drop for IndexLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
