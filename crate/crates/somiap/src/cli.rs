//! Command-line surface: enroll-place, train-faces, analyze, calibrate,
//! bench and cascade-fetch. Exit codes: 0 success, 1 usage, 2 IO/decode,
//! 3 model/contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use somiap_core::facedetect::{detect_multiscale, CascadeModel};
use somiap_core::facerecog::{normalize_face, select_recognizer, train_model, FaceSample, Gallery};
use somiap_core::hashing::HashAlgo;
use somiap_core::imaging::to_gray;
use somiap_core::pipeline::{analyze, enroll_place};
use somiap_core::ColorImage;

use crate::cascade_xml::parse_cascade;
use crate::decode::decode_image;
use crate::error::{Result, ToolError};
use crate::fetch::{fetch_cascade, DEFAULT_CASCADE_FILE, FRONTAL_CASCADE_URL};
use crate::harness::{bench_corpus, calibrate_pairs, parse_pairs_file};
use crate::manifest::{load_manifest, save_manifest, IndexLock, Manifest};
use crate::report;

/// Environment variable overriding the cascade model path.
pub const CASCADE_ENV: &str = "SOMIAP_CASCADE";

#[derive(Parser, Debug)]
#[command(
    name = "somiap",
    version,
    about = "Predict the place shown in a photo and identify the people in it"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Add a known-location image to the index (creates the index if absent).
    EnrollPlace {
        /// Index manifest path.
        index: PathBuf,
        /// Image to enroll (PNG, JPEG, PPM or PGM).
        image: PathBuf,
        /// Stable identifier for the place.
        #[arg(long)]
        id: String,
        /// Human-readable location name.
        #[arg(long)]
        name: String,
    },
    /// Train the face recognizer from a directory of labeled face images.
    ///
    /// Layout: one subdirectory per person label, images inside. The largest
    /// detected face per image is used.
    TrainFaces {
        index: PathBuf,
        faces_dir: PathBuf,
        /// Recognizer algorithm; `auto` picks by per-class illumination spread.
        #[arg(long, value_enum)]
        algo: Option<AlgoArg>,
        /// Cascade model path (falls back to SOMIAP_CASCADE, then the
        /// default fetched file).
        #[arg(long)]
        cascade: Option<PathBuf>,
        #[command(flatten)]
        detect: DetectArgs,
    },
    /// Run the full place + face analysis on one image.
    Analyze {
        index: PathBuf,
        image: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        #[arg(long)]
        cascade: Option<PathBuf>,
        #[command(flatten)]
        detect: DetectArgs,
    },
    /// Calibrate decision thresholds from a labeled pairs file
    /// (`pathA,pathB,label` with label similar|different).
    Calibrate {
        pairs: PathBuf,
        #[arg(long, value_enum, default_value_t = BenchAlgoArg::All)]
        algo: BenchAlgoArg,
    },
    /// Time the hash algorithms over an image corpus directory.
    Bench {
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = BenchAlgoArg::All)]
        algo: BenchAlgoArg,
    },
    /// Download the stock frontal-face cascade with checksum verification.
    CascadeFetch {
        #[arg(long, default_value = FRONTAL_CASCADE_URL)]
        url: String,
        #[arg(long, default_value = DEFAULT_CASCADE_FILE)]
        output: PathBuf,
        /// Expected SHA-256 (hex). When omitted, the downloaded file is
        /// still structurally validated and its digest printed for pinning.
        #[arg(long)]
        sha256: Option<String>,
    },
}

/// Detection-scan overrides; unset flags keep the index's configured values.
#[derive(clap::Args, Clone, Copy, Debug)]
pub struct DetectArgs {
    /// Scale ratio between successive window sizes (> 1).
    #[arg(long)]
    pub scale_step: Option<f64>,
    /// Raw hits required around a detection minus one.
    #[arg(long)]
    pub min_neighbors: Option<usize>,
    /// Smallest window side scanned, in pixels.
    #[arg(long)]
    pub min_size: Option<u32>,
}

impl DetectArgs {
    fn apply(&self, detect: &mut somiap_core::config::DetectParams) {
        if let Some(v) = self.scale_step {
            detect.scale_step = v;
        }
        if let Some(v) = self.min_neighbors {
            detect.min_neighbors = v;
        }
        if let Some(v) = self.min_size {
            detect.min_size = v;
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum AlgoArg {
    Eigen,
    Fisher,
    Lbph,
    Auto,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum FormatArg {
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum BenchAlgoArg {
    All,
    DhashGray,
    DhashColor,
    PhashGray,
    PhashColor,
}

impl BenchAlgoArg {
    fn algos(self) -> Vec<HashAlgo> {
        match self {
            BenchAlgoArg::All => HashAlgo::ALL.to_vec(),
            BenchAlgoArg::DhashGray => vec![HashAlgo::DhashGray],
            BenchAlgoArg::DhashColor => vec![HashAlgo::DhashColor],
            BenchAlgoArg::PhashGray => vec![HashAlgo::PhashGray],
            BenchAlgoArg::PhashColor => vec![HashAlgo::PhashColor],
        }
    }
}

fn read_image(path: &Path) -> Result<ColorImage> {
    let bytes =
        fs::read(path).map_err(|e| ToolError::io(format!("reading {}", path.display()), e))?;
    decode_image(&bytes)
}

/// Resolution order: --cascade flag, SOMIAP_CASCADE, the default fetched
/// file in the working directory.
fn resolve_cascade_path(flag: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = flag {
        return Some(p.to_path_buf());
    }
    if let Some(env) = std::env::var_os(CASCADE_ENV) {
        return Some(PathBuf::from(env));
    }
    let default = PathBuf::from(DEFAULT_CASCADE_FILE);
    default.exists().then_some(default)
}

fn load_cascade(path: &Path) -> Result<CascadeModel> {
    let text = fs::read_to_string(path)
        .map_err(|e| ToolError::io(format!("reading {}", path.display()), e))?;
    parse_cascade(&text)
}

/// Executes a parsed command, returning the text to print on stdout.
pub fn run(command: Command) -> Result<String> {
    match command {
        Command::EnrollPlace {
            index,
            image,
            id,
            name,
        } => cmd_enroll_place(&index, &image, &id, &name),
        Command::TrainFaces {
            index,
            faces_dir,
            algo,
            cascade,
            detect,
        } => cmd_train_faces(&index, &faces_dir, algo, cascade.as_deref(), detect),
        Command::Analyze {
            index,
            image,
            format,
            cascade,
            detect,
        } => cmd_analyze(&index, &image, format, cascade.as_deref(), detect),
        Command::Calibrate { pairs, algo } => cmd_calibrate(&pairs, algo),
        Command::Bench { corpus, algo } => cmd_bench(&corpus, algo),
        Command::CascadeFetch {
            url,
            output,
            sha256,
        } => cmd_cascade_fetch(&url, &output, sha256.as_deref()),
    }
}

fn cmd_enroll_place(index_path: &Path, image_path: &Path, id: &str, name: &str) -> Result<String> {
    let _lock = IndexLock::acquire(index_path)?;
    let manifest = if index_path.exists() {
        load_manifest(index_path)?
    } else {
        Manifest::new(&somiap_core::config::PipelineConfig::default())
    };
    let (index, model) = manifest.into_state()?;
    let image = read_image(image_path)?;
    let index = enroll_place(&index, &image, id, name)?;
    save_manifest(index_path, &Manifest::from_state(&index, model.as_ref()))?;
    Ok(format!(
        "enrolled {id} ({name}); index now holds {} places\n",
        index.entries.len()
    ))
}

fn cmd_train_faces(
    index_path: &Path,
    faces_dir: &Path,
    algo: Option<AlgoArg>,
    cascade_flag: Option<&Path>,
    detect_args: DetectArgs,
) -> Result<String> {
    let _lock = IndexLock::acquire(index_path)?;
    let manifest = if index_path.exists() {
        load_manifest(index_path)?
    } else {
        Manifest::new(&somiap_core::config::PipelineConfig::default())
    };
    let (index, _) = manifest.into_state()?;
    // the override applies to this run's detection only; the saved manifest
    // keeps its configured parameters
    let mut detect_params = index.config.detect.clone();
    detect_args.apply(&mut detect_params);

    let cascade_path = resolve_cascade_path(cascade_flag).ok_or_else(|| {
        ToolError::Usage(format!(
            "no cascade model: pass --cascade, set {CASCADE_ENV}, or run cascade-fetch"
        ))
    })?;
    let cascade = load_cascade(&cascade_path)?;

    let policy = match algo {
        Some(AlgoArg::Eigen) => somiap_core::config::RecognizerPolicy::Eigen,
        Some(AlgoArg::Fisher) => somiap_core::config::RecognizerPolicy::Fisher,
        Some(AlgoArg::Lbph) => somiap_core::config::RecognizerPolicy::Lbph,
        Some(AlgoArg::Auto) => somiap_core::config::RecognizerPolicy::Auto,
        None => index.config.face.policy,
    };

    let mut label_dirs: Vec<PathBuf> = fs::read_dir(faces_dir)
        .map_err(|e| ToolError::io(format!("reading {}", faces_dir.display()), e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    label_dirs.sort();
    if label_dirs.is_empty() {
        return Err(ToolError::Contract(format!(
            "{}: no label subdirectories found",
            faces_dir.display()
        )));
    }

    let mut samples: Vec<FaceSample> = Vec::new();
    let mut skipped: Vec<String> = Vec::new();
    for label_dir in &label_dirs {
        let label = label_dir
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let mut files: Vec<PathBuf> = fs::read_dir(label_dir)
            .map_err(|e| ToolError::io(format!("reading {}", label_dir.display()), e))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        let mut found = 0usize;
        for file in &files {
            let image = read_image(file)?;
            let gray = to_gray(&image);
            let detections = detect_multiscale(&cascade, &gray, &detect_params);
            // largest face wins
            let best = detections.iter().max_by_key(|d| d.rect.area());
            match best {
                Some(det) => {
                    let face = normalize_face(&gray, det.rect, index.config.face.canonical)?;
                    samples.push(FaceSample {
                        label: label.clone(),
                        image: face,
                    });
                    found += 1;
                }
                None => skipped.push(file.display().to_string()),
            }
        }
        if found == 0 {
            return Err(ToolError::Contract(format!(
                "label `{label}`: no detectable faces; offending files: {}",
                if files.is_empty() {
                    "(directory is empty)".to_string()
                } else {
                    files
                        .iter()
                        .map(|f| f.display().to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                }
            )));
        }
    }

    let gallery = Gallery::new(samples)?;
    let resolved = select_recognizer(
        &gallery,
        policy,
        index.config.face.illumination_std_threshold,
    );
    let model = train_model(&gallery, resolved, index.config.face.grid)?;
    save_manifest(index_path, &Manifest::from_state(&index, Some(&model)))?;

    let mut out = format!(
        "trained {} recognizer over {} samples, {} labels\n",
        resolved.tag(),
        gallery.samples().len(),
        gallery.labels().len()
    );
    for file in skipped {
        out.push_str(&format!("skipped (no face found): {file}\n"));
    }
    Ok(out)
}

fn cmd_analyze(
    index_path: &Path,
    image_path: &Path,
    format: FormatArg,
    cascade_flag: Option<&Path>,
    detect_args: DetectArgs,
) -> Result<String> {
    let manifest = load_manifest(index_path)?;
    let (mut index, model) = manifest.into_state()?;
    detect_args.apply(&mut index.config.detect);
    let image = read_image(image_path)?;

    let cascade = match resolve_cascade_path(cascade_flag) {
        Some(path) => Some(load_cascade(&path)?),
        None => None,
    };

    let start = Instant::now();
    let mut clock = move || start.elapsed().as_micros() as u64;
    let result = analyze(
        &index,
        cascade.as_ref(),
        model.as_ref(),
        &image,
        &image_path.display().to_string(),
        &mut clock,
    )?;
    Ok(match format {
        FormatArg::Json => report::to_json(&result),
        FormatArg::Text => report::to_text(&result),
    })
}

fn cmd_calibrate(pairs_path: &Path, algo: BenchAlgoArg) -> Result<String> {
    let text = fs::read_to_string(pairs_path)
        .map_err(|e| ToolError::io(format!("reading {}", pairs_path.display()), e))?;
    let pairs = parse_pairs_file(&text)?;
    let rows = calibrate_pairs(&pairs, &algo.algos())?;
    Ok(report::calibration_table(&rows))
}

fn cmd_bench(corpus: &Path, algo: BenchAlgoArg) -> Result<String> {
    let mut bench = bench_corpus(corpus)?;
    let keep: Vec<String> = algo.algos().iter().map(|a| a.tag().to_string()).collect();
    bench.rows.retain(|r| keep.contains(&r.algo));
    Ok(report::bench_table(&bench))
}

fn cmd_cascade_fetch(url: &str, output: &Path, sha256: Option<&str>) -> Result<String> {
    let outcome = fetch_cascade(url, output, sha256)?;
    Ok(format!(
        "wrote {} ({} bytes, {} stages)\nsha256: {}\n",
        output.display(),
        outcome.bytes_written,
        outcome.stages,
        outcome.sha256
    ))
}
