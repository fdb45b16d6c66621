//! Calibration and speed harnesses behind the `calibrate` and `bench`
//! commands.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use somiap_core::hashing::{
    calibrate_distances, dhash_gray, hamming, hash_color_image, phash_gray, CalibrationReport,
    HashAlgo,
};
use somiap_core::imaging::{to_gray, GrayImage};
use somiap_core::ColorImage;

use crate::decode::decode_image;
use crate::error::{Result, ToolError};
use crate::report::{BenchReport, BenchRow};

/// One labeled image pair from a pairs file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairRecord {
    pub path_a: PathBuf,
    pub path_b: PathBuf,
    pub similar: bool,
}

/// Parses a `pathA,pathB,label` CSV with labels `similar` or `different`.
/// Any malformed row fails the whole file, naming its 1-based line number.
pub fn parse_pairs_file(text: &str) -> Result<Vec<PairRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(ToolError::Contract(format!(
                "pairs file line {line_no}: expected `pathA,pathB,label`"
            )));
        }
        let similar = match fields[2] {
            "similar" => true,
            "different" => false,
            other => {
                return Err(ToolError::Contract(format!(
                    "pairs file line {line_no}: unknown label `{other}`"
                )))
            }
        };
        out.push(PairRecord {
            path_a: PathBuf::from(fields[0]),
            path_b: PathBuf::from(fields[1]),
            similar,
        });
    }
    Ok(out)
}

fn load(path: &Path) -> Result<ColorImage> {
    let bytes =
        fs::read(path).map_err(|e| ToolError::io(format!("reading {}", path.display()), e))?;
    decode_image(&bytes)
}

/// Runs threshold calibration for each requested algorithm over the decoded
/// pair set.
pub fn calibrate_pairs(
    pairs: &[PairRecord],
    algos: &[HashAlgo],
) -> Result<Vec<CalibrationReport>> {
    let mut images: Vec<(ColorImage, ColorImage, bool)> = Vec::with_capacity(pairs.len());
    for p in pairs {
        images.push((load(&p.path_a)?, load(&p.path_b)?, p.similar));
    }
    let mut rows = Vec::with_capacity(algos.len());
    for &algo in algos {
        let mut sim = Vec::new();
        let mut diff = Vec::new();
        for (a, b, similar) in &images {
            let d = hamming(&hash_color_image(a, algo), &hash_color_image(b, algo))
                .expect("same algorithm");
            if *similar {
                sim.push(d);
            } else {
                diff.push(d);
            }
        }
        if sim.is_empty() && diff.is_empty() {
            return Err(ToolError::Contract("pairs file contains no pairs".into()));
        }
        rows.push(calibrate_distances(&sim, &diff, algo));
    }
    Ok(rows)
}

/// Lists decodable images in a corpus directory (by extension), sorted.
pub fn corpus_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries =
        fs::read_dir(dir).map_err(|e| ToolError::io(format!("reading {}", dir.display()), e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            matches!(
                p.extension().and_then(|s| s.to_str()),
                Some("png" | "jpg" | "jpeg" | "ppm" | "pgm")
            )
        })
        .collect();
    paths.sort();
    Ok(paths)
}

const MIN_BENCH_IMAGES: usize = 10;

/// Times the hash computation per algorithm over a corpus.
///
/// Decoding and plane preparation (gray conversion, channel extraction)
/// happen before the clock; the timed region is the hash algorithm proper
/// (its internal downsample, transform and bit extraction), run once per
/// plane. Color variants therefore time three plane hashes against the gray
/// variant's one.
pub fn bench_corpus(dir: &Path) -> Result<BenchReport> {
    let paths = corpus_paths(dir)?;
    if paths.len() < MIN_BENCH_IMAGES {
        return Err(ToolError::Contract(format!(
            "bench requires a corpus of at least {MIN_BENCH_IMAGES} images, found {}",
            paths.len()
        )));
    }
    struct Prepared {
        gray: GrayImage,
        planes: [GrayImage; 3],
    }
    let mut prepared = Vec::with_capacity(paths.len());
    for path in &paths {
        let img = load(path)?;
        prepared.push(Prepared {
            gray: to_gray(&img),
            planes: [
                img.channel_plane(0),
                img.channel_plane(1),
                img.channel_plane(2),
            ],
        });
    }

    let algos = HashAlgo::ALL;
    let mut rows = Vec::with_capacity(algos.len());
    for algo in algos {
        let mut per_image_ms = Vec::with_capacity(prepared.len());
        for p in &prepared {
            let run = || match algo {
                HashAlgo::DhashGray => {
                    std::hint::black_box(dhash_gray(&p.gray));
                }
                HashAlgo::PhashGray => {
                    std::hint::black_box(phash_gray(&p.gray));
                }
                HashAlgo::DhashColor => {
                    for plane in &p.planes {
                        std::hint::black_box(dhash_gray(plane));
                    }
                }
                HashAlgo::PhashColor => {
                    for plane in &p.planes {
                        std::hint::black_box(phash_gray(plane));
                    }
                }
            };
            // grow the repetition count until one round is long enough to
            // time, then keep the fastest of several rounds (robust against
            // scheduler noise from concurrent load)
            let mut reps = 1u32;
            loop {
                let start = Instant::now();
                for _ in 0..reps {
                    run();
                }
                if start.elapsed().as_micros() >= 300 || reps >= 4096 {
                    break;
                }
                reps *= 4;
            }
            let mut best = f64::MAX;
            for _ in 0..3 {
                let start = Instant::now();
                for _ in 0..reps {
                    run();
                }
                best = best.min(start.elapsed().as_secs_f64() * 1000.0 / reps as f64);
            }
            per_image_ms.push(best);
        }
        let mean = per_image_ms.iter().sum::<f64>() / per_image_ms.len() as f64;
        let max = per_image_ms.iter().cloned().fold(f64::MIN, f64::max);
        let min = per_image_ms.iter().cloned().fold(f64::MAX, f64::min);
        rows.push(BenchRow {
            algo: algo.tag().to_string(),
            mean_ms: mean,
            max_ms: max,
            min_ms: min,
        });
    }
    Ok(BenchReport {
        images: prepared.len(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::encode_ppm;
    use crate::synth::{noisy, scene};

    #[test]
    fn pairs_file_parses_and_reports_bad_lines() {
        let good = "a.png, b.png, similar\n# comment\n\nc.ppm,d.ppm,different\n";
        let pairs = parse_pairs_file(good).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!(pairs[0].similar);
        assert!(!pairs[1].similar);

        let err = parse_pairs_file("a,b,similar\nx,y,sameish\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = parse_pairs_file("only,two\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn calibrate_pairs_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let mut lines = String::new();
        for i in 0..6u64 {
            let base = scene(i, 64, 48);
            let close = noisy(&base, 3.0, 900 + i);
            let far = scene(100 + i, 64, 48);
            let a = dir.path().join(format!("a{i}.ppm"));
            let b = dir.path().join(format!("b{i}.ppm"));
            let c = dir.path().join(format!("c{i}.ppm"));
            fs::write(&a, encode_ppm(&base)).unwrap();
            fs::write(&b, encode_ppm(&close)).unwrap();
            fs::write(&c, encode_ppm(&far)).unwrap();
            lines.push_str(&format!("{},{},similar\n", a.display(), b.display()));
            lines.push_str(&format!("{},{},different\n", a.display(), c.display()));
        }
        let pairs = parse_pairs_file(&lines).unwrap();
        let rows = calibrate_pairs(&pairs, &HashAlgo::ALL).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            assert!(row.accuracy >= 0.9, "{}: {}", row.algo, row.accuracy);
            assert!(row.weight_similar < row.weight_different);
        }
    }

    #[test]
    fn bench_rejects_small_corpora() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..3 {
            let path = dir.path().join(format!("img{i}.ppm"));
            fs::write(&path, encode_ppm(&scene(i, 32, 32))).unwrap();
        }
        assert!(bench_corpus(dir.path()).is_err());
        let empty = tempfile::tempdir().unwrap();
        assert!(bench_corpus(empty.path()).is_err());
    }

    #[test]
    fn bench_orderings_hold() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..12u64 {
            let path = dir.path().join(format!("img{i:03}.ppm"));
            fs::write(&path, encode_ppm(&scene(i, 120, 90))).unwrap();
        }
        let report = bench_corpus(dir.path()).unwrap();
        assert_eq!(report.images, 12);
        let row = |tag: &str| {
            report
                .rows
                .iter()
                .find(|r| r.algo == tag)
                .unwrap_or_else(|| panic!("row {tag}"))
        };
        for r in &report.rows {
            assert!(r.min_ms <= r.mean_ms && r.mean_ms <= r.max_ms);
        }
        assert!(row("dhash_gray").mean_ms < row("phash_gray").mean_ms);
        assert!(row("dhash_gray").mean_ms <= row("dhash_color").mean_ms);
        assert!(row("phash_gray").mean_ms <= row("phash_color").mean_ms);
    }
}
