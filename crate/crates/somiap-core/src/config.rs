//! Tunable parameters for the pipeline, with the shipped defaults.

use crate::hashing::HashAlgo;

/// Keypoint/descriptor extraction parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbParams {
    /// Maximum number of keypoints kept (by corner response).
    pub n_features: usize,
    /// FAST intensity threshold.
    pub fast_threshold: u8,
    /// Pyramid depth.
    pub levels: u32,
    /// Scale ratio between adjacent pyramid levels.
    pub scale_factor: f64,
}

impl Default for OrbParams {
    fn default() -> Self {
        OrbParams {
            n_features: 500,
            fast_threshold: 20,
            levels: 8,
            scale_factor: 1.2,
        }
    }
}

/// Multi-scale window scan parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectParams {
    pub scale_step: f64,
    pub min_neighbors: usize,
    pub min_size: u32,
}

impl Default for DetectParams {
    fn default() -> Self {
        DetectParams {
            scale_step: 1.1,
            min_neighbors: 3,
            min_size: 24,
        }
    }
}

/// Which recognizer to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecognizerPolicy {
    Eigen,
    Fisher,
    Lbph,
    /// Fisher when per-class illumination varies strongly, LBPH otherwise.
    Auto,
}

/// Face normalization and recognition parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceConfig {
    /// Canonical face size after normalization (width, height).
    pub canonical: (u32, u32),
    /// LBPH cell grid.
    pub grid: (u32, u32),
    pub policy: RecognizerPolicy,
    /// Distance above which a prediction becomes UNKNOWN; `None` is infinity
    /// (always answer).
    pub unknown_cutoff: Option<f64>,
    /// Per-class mean-intensity standard deviation (gray levels) beyond which
    /// the `Auto` policy picks Fisher.
    pub illumination_std_threshold: f64,
}

impl Default for FaceConfig {
    fn default() -> Self {
        FaceConfig {
            canonical: (64, 64),
            grid: (8, 8),
            policy: RecognizerPolicy::Lbph,
            unknown_cutoff: None,
            illumination_std_threshold: 25.0,
        }
    }
}

/// Everything the two-stage place matcher and the face chain need.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Digest algorithm used for the stage-2 comparison.
    pub primary_algo: HashAlgo,
    /// Operating thresholds, indexed per algorithm.
    pub hash_thresholds: HashThresholds,
    /// Stage-1 gate: ratio-test matches needed to consult the hash stage.
    pub min_feature_matches: usize,
    /// Lowe ratio for descriptor matching.
    pub match_ratio: f64,
    pub orb: OrbParams,
    pub detect: DetectParams,
    pub face: FaceConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            primary_algo: HashAlgo::PhashColor,
            hash_thresholds: HashThresholds::default(),
            min_feature_matches: 25,
            match_ratio: 0.75,
            orb: OrbParams::default(),
            detect: DetectParams::default(),
            face: FaceConfig::default(),
        }
    }
}

/// Per-algorithm Hamming cutoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct HashThresholds {
    pub dhash_gray: u32,
    pub dhash_color: u32,
    pub phash_gray: u32,
    pub phash_color: u32,
}

impl HashThresholds {
    pub fn get(&self, algo: HashAlgo) -> u32 {
        match algo {
            HashAlgo::DhashGray => self.dhash_gray,
            HashAlgo::DhashColor => self.dhash_color,
            HashAlgo::PhashGray => self.phash_gray,
            HashAlgo::PhashColor => self.phash_color,
        }
    }
}

impl Default for HashThresholds {
    fn default() -> Self {
        HashThresholds {
            dhash_gray: HashAlgo::DhashGray.default_threshold(),
            dhash_color: HashAlgo::DhashColor.default_threshold(),
            phash_gray: HashAlgo::PhashGray.default_threshold(),
            phash_color: HashAlgo::PhashColor.default_threshold(),
        }
    }
}
