//! End-to-end tests of the `somiap` binary: exit codes, on-disk effects and
//! output shapes of every subcommand.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use somiap::decode::{encode_pgm, encode_ppm};
use somiap::manifest::{load_manifest, save_manifest, Manifest};
use somiap::synth;
use somiap_core::config::PipelineConfig;
use somiap_core::Rect;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_somiap"))
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn fixture_cascade_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/cascade_fixture.xml")
}

/// Fresh manifest whose detection scan matches the synthetic fixtures.
fn seed_manifest(path: &Path) {
    let config = PipelineConfig {
        detect: synth::fixture_detect_params(),
        ..PipelineConfig::default()
    };
    save_manifest(path, &Manifest::new(&config)).unwrap();
}

fn write_scene(dir: &Path, name: &str, seed: u64) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, encode_ppm(&synth::scene(seed, 128, 96))).unwrap();
    path
}

#[test]
fn enroll_place_creates_and_extends_the_index() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    let image = write_scene(dir.path(), "pier.ppm", 11);

    let out = run(
        &[
            "enroll-place",
            index.to_str().unwrap(),
            image.to_str().unwrap(),
            "--id",
            "pier",
            "--name",
            "North Pier",
        ],
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest = load_manifest(&index).unwrap();
    assert_eq!(manifest.places.len(), 1);
    assert_eq!(manifest.places[0].id, "pier");
    assert_eq!(manifest.places[0].digests.len(), 4);
}

#[test]
fn enroll_duplicate_id_fails_and_leaves_manifest_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    let image = write_scene(dir.path(), "a.ppm", 3);
    let other = write_scene(dir.path(), "b.ppm", 4);

    let args = |img: &PathBuf| {
        vec![
            "enroll-place".to_string(),
            index.display().to_string(),
            img.display().to_string(),
            "--id".into(),
            "spot".into(),
            "--name".into(),
            "Spot".into(),
        ]
    };
    let first = bin().args(args(&image)).output().unwrap();
    assert!(first.status.success());
    let before = fs::read(&index).unwrap();

    let second = bin().args(args(&other)).output().unwrap();
    assert_eq!(second.status.code(), Some(3), "{}", stderr(&second));
    assert!(stderr(&second).contains("duplicate id"));
    assert_eq!(fs::read(&index).unwrap(), before, "manifest must be unchanged");
}

#[test]
fn enroll_unreadable_path_exits_two_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    let out = run(
        &[
            "enroll-place",
            index.to_str().unwrap(),
            "no-such-file.ppm",
            "--id",
            "x",
            "--name",
            "X",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no-such-file.ppm"));
    assert!(!index.exists(), "failed command must not create the index");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["enroll-place", "--bogus"], &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("enroll-place"));
}

fn write_faces_dir(dir: &Path, labels: &[&str], variants: u64) -> PathBuf {
    let faces = dir.join("faces");
    for (person, label) in labels.iter().enumerate() {
        let label_dir = faces.join(label);
        fs::create_dir_all(&label_dir).unwrap();
        for v in 0..variants {
            let img = synth::portrait(person, v + 1, 128, 128, Rect::new(40, 36, 48, 48));
            fs::write(label_dir.join(format!("{v}.pgm")), encode_pgm(&img)).unwrap();
        }
    }
    faces
}

#[test]
fn train_faces_stores_a_model_with_all_labels() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    seed_manifest(&index);
    let faces = write_faces_dir(dir.path(), &["cai", "shi", "yuan"], 5);

    let out = run(
        &[
            "train-faces",
            index.to_str().unwrap(),
            faces.to_str().unwrap(),
            "--cascade",
            fixture_cascade_path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("3 labels"));
    let manifest = load_manifest(&index).unwrap();
    let (_, model) = manifest.into_state().unwrap();
    let model = model.expect("model stored");
    let mut labels: Vec<String> = model.sample_labels().to_vec();
    labels.sort();
    labels.dedup();
    assert_eq!(labels, vec!["cai", "shi", "yuan"]);
}

#[test]
fn train_faces_respects_cascade_env_var() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    seed_manifest(&index);
    let faces = write_faces_dir(dir.path(), &["ann", "bob"], 3);

    let out = run(
        &[
            "train-faces",
            index.to_str().unwrap(),
            faces.to_str().unwrap(),
        ],
        &[("SOMIAP_CASCADE", fixture_cascade_path().to_str().unwrap())],
    );
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn train_faces_empty_dir_fails() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    seed_manifest(&index);
    let faces = dir.path().join("faces");
    fs::create_dir_all(&faces).unwrap();
    let out = run(
        &[
            "train-faces",
            index.to_str().unwrap(),
            faces.to_str().unwrap(),
            "--cascade",
            fixture_cascade_path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn train_faces_fisher_needs_two_labels() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    seed_manifest(&index);
    let faces = write_faces_dir(dir.path(), &["solo"], 4);
    let out = run(
        &[
            "train-faces",
            index.to_str().unwrap(),
            faces.to_str().unwrap(),
            "--algo",
            "fisher",
            "--cascade",
            fixture_cascade_path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn train_faces_lists_files_without_detectable_faces() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    seed_manifest(&index);
    let faces = dir.path().join("faces");
    let label_dir = faces.join("ghost");
    fs::create_dir_all(&label_dir).unwrap();
    // a plain scene contains no face
    fs::write(
        label_dir.join("empty.ppm"),
        encode_ppm(&synth::scene(5, 128, 96)),
    )
    .unwrap();
    let out = run(
        &[
            "train-faces",
            index.to_str().unwrap(),
            faces.to_str().unwrap(),
            "--cascade",
            fixture_cascade_path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.contains("ghost") && err.contains("empty.ppm"), "{err}");
}

#[test]
fn analyze_enrolled_image_reports_zero_distance_place() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    seed_manifest(&index);
    let image = write_scene(dir.path(), "q.ppm", 77);
    for (i, seed) in [77u64, 78, 79].iter().enumerate() {
        let img = write_scene(dir.path(), &format!("s{i}.ppm"), *seed);
        let out = run(
            &[
                "enroll-place",
                index.to_str().unwrap(),
                img.to_str().unwrap(),
                "--id",
                &format!("s{i}"),
                "--name",
                &format!("Scene {i}"),
            ],
            &[],
        );
        assert!(out.status.success(), "{}", stderr(&out));
    }

    let out = run(
        &[
            "analyze",
            index.to_str().unwrap(),
            image.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report = somiap::report::from_json(&stdout(&out)).unwrap();
    let place = report.place.expect("place found");
    assert_eq!(place.entry_id, "s0");
    assert_eq!(place.hash_distance, 0);
    assert_eq!(report.candidates.len(), 3);
}

#[test]
fn analyze_blank_query_succeeds_with_no_place_and_no_faces() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    seed_manifest(&index);
    let blank_img =
        somiap_core::ColorImage::new(64, 64, vec![128u8; 64 * 64 * 3]).unwrap();
    let blank = dir.path().join("blank.ppm");
    fs::write(&blank, encode_ppm(&blank_img)).unwrap();

    let out = run(
        &["analyze", index.to_str().unwrap(), blank.to_str().unwrap()],
        &[],
    );
    assert!(
        out.status.success(),
        "absence of a place is a valid answer: {}",
        stderr(&out)
    );
    let report = somiap::report::from_json(&stdout(&out)).unwrap();
    assert!(report.place.is_none());
    assert!(report.faces.is_empty());
}

#[test]
fn analyze_text_format_renders_candidate_and_face_lines() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    seed_manifest(&index);
    let face = Rect::new(72, 40, 48, 48);
    let composite = synth::scene_with_face(900, 1, 5, face);
    let img_path = dir.path().join("composite.ppm");
    fs::write(&img_path, encode_ppm(&composite)).unwrap();

    let out = run(
        &[
            "enroll-place",
            index.to_str().unwrap(),
            img_path.to_str().unwrap(),
            "--id",
            "spot",
            "--name",
            "Spot",
        ],
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));

    let faces = write_faces_dir(dir.path(), &["ann", "bob"], 3);
    let out = run(
        &[
            "train-faces",
            index.to_str().unwrap(),
            faces.to_str().unwrap(),
            "--cascade",
            fixture_cascade_path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));

    let out = run(
        &[
            "analyze",
            index.to_str().unwrap(),
            img_path.to_str().unwrap(),
            "--format",
            "text",
            "--cascade",
            fixture_cascade_path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("place: spot"), "{text}");
    assert_eq!(text.matches("candidate:").count(), 1, "{text}");
    assert_eq!(text.matches("face:").count(), 1, "{text}");
}

#[test]
fn calibrate_reports_four_rows_and_flags_bad_lines() {
    let dir = tempfile::tempdir().unwrap();
    let mut lines = String::new();
    for i in 0..5u64 {
        let base = dir.path().join(format!("b{i}.ppm"));
        let near = dir.path().join(format!("n{i}.ppm"));
        let far = dir.path().join(format!("f{i}.ppm"));
        let img = synth::scene(i, 64, 48);
        fs::write(&base, encode_ppm(&img)).unwrap();
        fs::write(&near, encode_ppm(&synth::noisy(&img, 3.0, 70 + i))).unwrap();
        fs::write(&far, encode_ppm(&synth::scene(50 + i, 64, 48))).unwrap();
        lines.push_str(&format!("{},{},similar\n", base.display(), near.display()));
        lines.push_str(&format!("{},{},different\n", base.display(), far.display()));
    }
    let pairs = dir.path().join("pairs.csv");
    fs::write(&pairs, &lines).unwrap();

    let out = run(&["calibrate", pairs.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    for tag in ["dhash_gray", "dhash_color", "phash_gray", "phash_color"] {
        assert!(table.contains(tag), "{table}");
    }

    // label typo: nonzero exit naming the line
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "a.ppm,b.ppm,similar\nx.ppm,y.ppm,dfferent\n").unwrap();
    let out = run(&["calibrate", bad.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn calibrate_single_identical_pair() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("one.ppm");
    fs::write(&img, encode_ppm(&synth::scene(4, 64, 48))).unwrap();
    let pairs = dir.path().join("pairs.csv");
    fs::write(
        &pairs,
        format!("{},{},similar\n", img.display(), img.display()),
    )
    .unwrap();
    let out = run(
        &[
            "calibrate",
            pairs.to_str().unwrap(),
            "--algo",
            "phash-gray",
        ],
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    let row = table.lines().find(|l| l.contains("phash_gray")).unwrap();
    assert!(row.contains("100.0%"), "{row}");
    let fields: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(fields[1], "0.00", "weight_similar");
    assert_eq!(fields[3], "0", "threshold");
}

#[test]
fn bench_empty_corpus_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["bench", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn kill_during_write_leaves_previous_manifest_intact() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    let img1 = write_scene(dir.path(), "one.ppm", 21);
    let img2 = write_scene(dir.path(), "two.ppm", 22);

    let out = run(
        &[
            "enroll-place",
            index.to_str().unwrap(),
            img1.to_str().unwrap(),
            "--id",
            "one",
            "--name",
            "One",
        ],
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let committed = fs::read(&index).unwrap();

    // the crash hook exits between the temp write and the rename
    let out = run(
        &[
            "enroll-place",
            index.to_str().unwrap(),
            img2.to_str().unwrap(),
            "--id",
            "two",
            "--name",
            "Two",
        ],
        &[("SOMIAP_CRASH_AFTER_TEMP_WRITE", "1")],
    );
    assert_eq!(out.status.code(), Some(86));
    assert_eq!(
        fs::read(&index).unwrap(),
        committed,
        "the committed manifest must be untouched"
    );
    assert_eq!(load_manifest(&index).unwrap().places.len(), 1);

    // the crashed process leaked its lock file; the message says so
    let locked = run(
        &[
            "enroll-place",
            index.to_str().unwrap(),
            img2.to_str().unwrap(),
            "--id",
            "two",
            "--name",
            "Two",
        ],
        &[],
    );
    assert_eq!(locked.status.code(), Some(3));
    assert!(stderr(&locked).contains("index.json.lock"), "{}", stderr(&locked));
    fs::remove_file(dir.path().join("index.json.lock")).unwrap();

    // recovery: a clean rerun succeeds over the stale temp file
    let out = run(
        &[
            "enroll-place",
            index.to_str().unwrap(),
            img2.to_str().unwrap(),
            "--id",
            "two",
            "--name",
            "Two",
        ],
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(load_manifest(&index).unwrap().places.len(), 2);
}
