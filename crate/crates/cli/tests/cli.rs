use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tigaug_core::dataset::{
    read_annotations, write_canonical, write_detections, Dataset, Detection, DetectionFile,
    DetectionSet,
};
use tigaug_core::model::{ImageLabels, LabeledImage, LightBox, LightState, RasterImage};
use tigaug_core::synth::mini_dataset;

fn tigaug(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tigaug"))
        .args(args)
        .env_remove("TIGAUG_JOBS")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

/// Relative path -> bytes for every file under `dir` except timings.
fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else if path.file_name().unwrap() != "timings.json" {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn mini(dir: &Path, n: usize) -> PathBuf {
    let path = dir.join("mini");
    write_canonical(&mini_dataset(n, 160, 90, 2), &path, None).unwrap();
    path
}

fn detections(path: &Path, sets: Vec<DetectionSet>) {
    write_detections(
        path,
        &DetectionFile {
            model: "sim".into(),
            results: sets,
        },
    )
    .unwrap();
}

fn perfect(labels: &[ImageLabels]) -> Vec<DetectionSet> {
    labels.iter().map(DetectionSet::from_labels).collect()
}

#[test]
fn ingest_bosch_and_rerun_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let yaml = fixtures().join("bosch/train.yaml");
    let out = tmp.path().join("bosch");
    let args = ["ingest", "--format", "bosch", "--input", s(&yaml), "--out", s(&out), "--dedup"];
    let first = tigaug(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let stats: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(stats["images"], 3);
    assert_eq!(stats["dropped_off"], 1);
    assert_eq!(read_annotations(&out).unwrap().images.len(), 3);
    let before = tree(&out);
    assert!(tigaug(&args).status.success());
    assert_eq!(tree(&out), before);
}

#[test]
fn ingest_lisa_with_split() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("lisa");
    let r = tigaug(&[
        "ingest",
        "--format",
        "lisa",
        "--input",
        s(&fixtures().join("lisa")),
        "--out",
        s(&out),
        "--split-seed",
        "3",
    ]);
    // three images are too few for a 4:1:1 split
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("at least 6"));

    let r = tigaug(&["ingest", "--format", "lisa", "--input", s(&fixtures().join("lisa")), "--out", s(&out)]);
    assert!(r.status.success());
    let expected = fs::read_to_string(fixtures().join("lisa_expected.json")).unwrap();
    assert_eq!(fs::read_to_string(out.join("annotations.json")).unwrap(), expected);
}

#[test]
fn ingest_missing_input_exits_2_naming_path() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.yaml");
    let r = tigaug(&["ingest", "--format", "bosch", "--input", s(&missing), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("nope.yaml"));
}

#[test]
fn ingest_canonical_dedups_and_splits() {
    let tmp = tempfile::tempdir().unwrap();
    let mut d = mini_dataset(8, 96, 54, 1);
    let mut copy = d.images[0].clone();
    copy.id = "copy".into();
    d.images.push(copy);
    let gray = LabeledImage {
        id: "gray".into(),
        pixels: RasterImage::filled(96, 54, [9, 9, 9]).unwrap(),
        lights: vec![],
    };
    d.images.push(gray);
    let src = tmp.path().join("src");
    write_canonical(&d, &src, None).unwrap();
    let out = tmp.path().join("out");
    let r = tigaug(&[
        "ingest", "--format", "canonical", "--input", s(&src), "--out", s(&out), "--dedup", "--drop-monochrome",
        "--split-seed", "5",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let stats: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!((stats["duplicates"].as_u64(), stats["monochrome"].as_u64()), (Some(1), Some(1)));
    assert_eq!(read_annotations(&out).unwrap().images.len(), 8);
    let split: serde_json::Value = serde_json::from_slice(&fs::read(out.join("split.json")).unwrap()).unwrap();
    assert_eq!(split["seed"], 5);
    assert_eq!(split["assignments"].as_object().unwrap().len(), 8);
}

#[test]
fn augment_fg_keeps_annotations_byte_equal() {
    let tmp = tempfile::tempdir().unwrap();
    let data = mini(tmp.path(), 10);
    let out = tmp.path().join("aug");
    let r = tigaug(&["augment", "--dataset", s(&data), "--transform", "FG", "--seed", "4", "--out", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let fg = out.join("FG+");
    assert_eq!(fs::read(fg.join("annotations.json")).unwrap(), fs::read(data.join("annotations.json")).unwrap());
    assert_eq!(fs::read_dir(fg.join("images")).unwrap().count(), 10);
    assert!(fg.join("manifest.json").is_file() && fg.join("timings.json").is_file());
}

#[test]
fn augment_cc_without_lights_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let images = (0..4)
        .map(|i| LabeledImage {
            id: format!("dark{i}"),
            pixels: RasterImage::filled(32, 24, [i as u8 * 20, 40, 60]).unwrap(),
            lights: vec![],
        })
        .collect();
    let data = tmp.path().join("dark");
    write_canonical(&Dataset::new("dark", images), &data, None).unwrap();
    let out = tmp.path().join("aug");
    let r = tigaug(&["augment", "--dataset", s(&data), "--transform", "cc", "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stderr).contains("warning"));
    assert!(read_annotations(&out.join("CC+")).unwrap().images.is_empty());
    assert_eq!(fs::read_dir(out.join("CC+/images")).unwrap().count(), 0);
}

#[test]
fn augment_rejects_bad_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let data = mini(tmp.path(), 6);
    let out = tmp.path().join("aug");
    let r = tigaug(&["augment", "--dataset", s(&data), "--transform", "XX", "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));
    let params = tmp.path().join("p.json");
    fs::write(&params, r#"{"mb_kernel": 4}"#).unwrap();
    let r = tigaug(&["augment", "--dataset", s(&data), "--transform", "MB", "--params", s(&params), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("mb_kernel"));
    fs::write(&params, r#"{"mb_kernel": 5, "bogus": 1}"#).unwrap();
    let r = tigaug(&["augment", "--dataset", s(&data), "--transform", "MB", "--params", s(&params), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));
    let r = tigaug(&["augment", "--transform", "MB", "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn params_file_is_honored_and_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let data = mini(tmp.path(), 6);
    let out = tmp.path().join("aug");
    let params = tmp.path().join("p.json");
    fs::write(&params, r#"{"sc_fixed_center": true}"#).unwrap();
    let r = tigaug(&["augment", "--dataset", s(&data), "--transform", "SC", "--params", s(&params), "--out", s(&out)]);
    assert!(r.status.success());
    let m: serde_json::Value = serde_json::from_slice(&fs::read(out.join("SC+/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["params"]["sc_fixed_center"], true);
    assert_eq!(m["label_policy"]["sc_box_map"], "fixed_center");
}

#[test]
fn jobs_env_and_flag_give_identical_trees() {
    let tmp = tempfile::tempdir().unwrap();
    let data = mini(tmp.path(), 8);
    let one = tmp.path().join("one");
    let many = tmp.path().join("many");
    let r = tigaug(&["augment", "--dataset", s(&data), "--transform", "all", "--seed", "9", "--out", s(&one), "--jobs", "1"]);
    assert!(r.status.success());
    let r = Command::new(env!("CARGO_BIN_EXE_tigaug"))
        .args(["augment", "--dataset", s(&data), "--transform", "all", "--seed", "9", "--out", s(&many)])
        .env("TIGAUG_JOBS", "5")
        .output()
        .unwrap();
    assert!(r.status.success());
    assert_eq!(tree(&one), tree(&many));
    let t: serde_json::Value = serde_json::from_slice(&fs::read(many.join("MP+/timings.json")).unwrap()).unwrap();
    assert_eq!(t["jobs"], 5);
    assert_eq!(fs::read_dir(&many).unwrap().count(), 12);
}

fn single_box_gt(dir: &Path) -> PathBuf {
    let gt = dir.join("gt");
    let img = LabeledImage {
        id: "a".into(),
        pixels: RasterImage::filled(20, 20, [0, 0, 0]).unwrap(),
        lights: vec![LightBox::new(0.0, 0.0, 10.0, 10.0, LightState::Stop).unwrap()],
    };
    write_canonical(&Dataset::new("one", vec![img]), &gt, None).unwrap();
    gt
}

fn evaluate(gt: &Path, det: &Path) -> (Option<i32>, serde_json::Value) {
    let r = tigaug(&["evaluate", "--ground-truth", s(gt), "--detections", s(det)]);
    let v = serde_json::from_slice(&r.stdout).unwrap_or(serde_json::Value::Null);
    (r.status.code(), v)
}

#[test]
fn evaluate_fixtures() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = single_box_gt(tmp.path());
    let det = tmp.path().join("det.json");
    let labels = read_annotations(&gt).unwrap().images;

    detections(&det, perfect(&labels));
    assert_eq!(evaluate(&gt, &det), (Some(0), evaluate(&gt, &det).1));
    assert_eq!(evaluate(&gt, &det).1["map"], 1.0);

    detections(&det, vec![]);
    assert_eq!(evaluate(&gt, &det).1["map"], 0.0);

    detections(
        &det,
        vec![DetectionSet {
            image_id: "a".into(),
            detections: vec![Detection {
                bbox: LightBox::new(0.0, 0.0, 10.0, 5.0, LightState::Stop).unwrap(),
                score: 0.8,
            }],
        }],
    );
    let (code, v) = evaluate(&gt, &det);
    assert_eq!(code, Some(0));
    assert!((v["map"].as_f64().unwrap() - 0.1).abs() < 1e-9);
    assert_eq!(v["per_class"]["stop"]["0.50"], 1.0);
    assert_eq!(v["per_class"]["stop"]["0.55"], 0.0);

    detections(&det, vec![DetectionSet::empty("zzz")]);
    assert_eq!(evaluate(&gt, &det).0, Some(3));

    fs::write(&det, r#"{"model":"m","results":[{"id":"a","detections":[{"x1":0,"y1":0,"x2":1,"y2":1,"state":"go","score":1.2}]}]}"#).unwrap();
    let r = tigaug(&["evaluate", "--ground-truth", s(&gt), "--detections", s(&det)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("/results/0/detections/0/score"));
}

#[test]
fn check_mr_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = mini(tmp.path(), 10);
    let out = tmp.path().join("aug");
    assert!(tigaug(&["augment", "--dataset", s(&data), "--transform", "FG", "--out", s(&out)]).status.success());
    let fg = out.join("FG+");
    let original = read_annotations(&data).unwrap().images;
    let augmented = read_annotations(&fg).unwrap().images;
    let det_o = tmp.path().join("det_o.json");
    let det_a = tmp.path().join("det_a.json");
    detections(&det_o, perfect(&original));
    detections(&det_a, perfect(&augmented));
    let report = tmp.path().join("report.json");
    let args = |det_a: &Path| {
        vec![
            "check-mr".to_string(),
            "--original".into(),
            s(&data).into(),
            "--augmented".into(),
            s(&fg).into(),
            "--det-original".into(),
            s(&det_o).into(),
            "--det-augmented".into(),
            s(det_a).into(),
            "--report".into(),
            s(&report).into(),
        ]
    };
    let run = |a: Vec<String>| {
        Command::new(env!("CARGO_BIN_EXE_tigaug")).args(a).output().unwrap()
    };

    let r = run(args(&det_a));
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stdout));
    let rep: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(rep["violations"].as_array().unwrap().len(), 0);
    assert_eq!(rep["map_augmented"], 1.0);

    let mut sets = perfect(&augmented);
    let victim = sets.iter_mut().find(|s| !s.detections.is_empty()).unwrap();
    victim.detections.pop();
    detections(&det_a, sets);
    let r = run(args(&det_a));
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stdout).contains("missed_light"));
    let rep: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    let v = rep["violations"].as_array().unwrap();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0]["category"], "missed_light");

    fs::remove_file(fg.join("manifest.json")).unwrap();
    let r = run(args(&det_a));
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("manifest.json"));
}

#[test]
fn check_mr_rejects_foreign_original() {
    let tmp = tempfile::tempdir().unwrap();
    let data = mini(tmp.path(), 6);
    let other = tmp.path().join("other");
    write_canonical(&mini_dataset(6, 160, 90, 99), &other, None).unwrap();
    let out = tmp.path().join("aug");
    assert!(tigaug(&["augment", "--dataset", s(&data), "--transform", "RT", "--out", s(&out)]).status.success());
    let det = tmp.path().join("d.json");
    detections(&det, vec![]);
    let r = tigaug(&[
        "check-mr", "--original", s(&other), "--augmented", s(&out.join("RT+")), "--det-original", s(&det),
        "--det-augmented", s(&det), "--format", "json",
    ]);
    assert_eq!(r.status.code(), Some(3));
}
