//! Canonical on-disk layout:
//!
//! ```text
//! DIR/annotations.json   {"dataset", "images": [{"id", "width", "height", "lights"}]}
//! DIR/images/<id>.png    one lossless PNG per image (id extension replaced)
//! DIR/split.json         optional {"seed", "assignments": {id: split}}
//! ```
//!
//! Detections live in a separate file per model run:
//! `{"model", "results": [{"id", "detections": [{x1, y1, x2, y2, state, score}]}]}`.
//! All JSON is strict: unknown fields are rejected.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Cursor;
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Dataset, DatasetError, Detection, DetectionFile, DetectionSet, Split};
use crate::model::{ImageLabels, LabeledImage, LightBox, LightState, RasterImage};

pub const ANNOTATIONS_FILE: &str = "annotations.json";
pub const SPLIT_FILE: &str = "split.json";
pub const IMAGES_DIR: &str = "images";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotations {
    pub dataset: String,
    pub images: Vec<ImageLabels>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFile {
    pub seed: u64,
    pub assignments: BTreeMap<String, Split>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireDetectionFile {
    model: String,
    results: Vec<WireResult>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireResult {
    id: String,
    detections: Vec<WireDetection>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireDetection {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
    state: LightState,
    score: f64,
}

/// Relative path of an image's PNG under `images/`.
pub fn image_file_name(id: &str) -> Result<PathBuf, DatasetError> {
    let path = Path::new(id);
    let safe = !id.is_empty()
        && !id.contains('\\')
        && path
            .components()
            .all(|c| matches!(c, Component::Normal(_)));
    if !safe {
        return Err(DatasetError::UnsafeId(id.to_string()));
    }
    Ok(path.with_extension("png"))
}

/// Writes `bytes` to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), DatasetError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| DatasetError::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| DatasetError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| DatasetError::io(path, e))
}

/// Pretty JSON with a trailing newline, the layout of every file this crate writes.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable value");
    bytes.push(b'\n');
    bytes
}

pub fn encode_png(img: &RasterImage) -> Vec<u8> {
    let buffer = image::RgbImage::from_raw(img.width(), img.height(), img.data().to_vec())
        .expect("raster size invariant");
    let mut out = Cursor::new(Vec::new());
    buffer
        .write_to(&mut out, image::ImageFormat::Png)
        .expect("in-memory PNG encoding");
    out.into_inner()
}

pub fn write_image_png(path: &Path, img: &RasterImage) -> Result<(), DatasetError> {
    write_atomic(path, &encode_png(img))
}

/// Decodes any supported raster file (PNG, JPEG) to RGB8.
pub fn read_image_png(path: &Path) -> Result<RasterImage, DatasetError> {
    let decoded = image::open(path).map_err(|e| DatasetError::Image {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = rgb.dimensions();
    RasterImage::from_raw(w, h, rgb.into_raw()).map_err(|e| DatasetError::Image {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn write_annotations(path: &Path, annotations: &Annotations) -> Result<(), DatasetError> {
    write_atomic(path, &to_json_bytes(annotations))
}

fn parse_strict<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, DatasetError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| DatasetError::Schema {
        path: path.to_path_buf(),
        pointer: json_pointer(e.path()),
        reason: e.inner().to_string(),
    })?;
    de.end().map_err(|e| DatasetError::Schema {
        path: path.to_path_buf(),
        pointer: String::new(),
        reason: e.to_string(),
    })?;
    Ok(value)
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn schema(path: &Path, pointer: String, reason: impl Into<String>) -> DatasetError {
    DatasetError::Schema {
        path: path.to_path_buf(),
        pointer,
        reason: reason.into(),
    }
}

/// Reads and validates `annotations.json` from a canonical dataset directory.
pub fn read_annotations(dir: &Path) -> Result<Annotations, DatasetError> {
    let path = dir.join(ANNOTATIONS_FILE);
    let text = fs::read_to_string(&path).map_err(|e| DatasetError::io(&path, e))?;
    let annotations: Annotations = parse_strict(&path, &text)?;
    let mut seen = HashSet::new();
    for (i, img) in annotations.images.iter().enumerate() {
        if !seen.insert(img.id.as_str()) {
            return Err(schema(&path, format!("/images/{i}/id"), format!("duplicate id `{}`", img.id)));
        }
        image_file_name(&img.id)
            .map_err(|e| schema(&path, format!("/images/{i}/id"), e.to_string()))?;
        if img.width == 0 || img.height == 0 {
            return Err(schema(&path, format!("/images/{i}/width"), "image dimensions must be >= 1"));
        }
        for (j, light) in img.lights.iter().enumerate() {
            if !light.is_valid() {
                return Err(schema(&path, format!("/images/{i}/lights/{j}"), "degenerate box"));
            }
            if !light.within(img.width, img.height) {
                return Err(schema(&path, format!("/images/{i}/lights/{j}"), "box outside image"));
            }
        }
    }
    Ok(annotations)
}

pub fn read_splits(dir: &Path) -> Result<Option<SplitFile>, DatasetError> {
    let path = dir.join(SPLIT_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| DatasetError::io(&path, e))?;
    parse_strict(&path, &text).map(Some)
}

/// Loads a canonical dataset including pixels.
pub fn read_canonical(dir: &Path) -> Result<Dataset, DatasetError> {
    let annotations = read_annotations(dir)?;
    let mut images = Vec::with_capacity(annotations.images.len());
    for labels in annotations.images {
        let path = dir.join(IMAGES_DIR).join(image_file_name(&labels.id)?);
        let pixels = read_image_png(&path)?;
        if (pixels.width(), pixels.height()) != (labels.width, labels.height) {
            return Err(DatasetError::Image {
                path,
                reason: format!(
                    "decoded {}x{} but annotations say {}x{}",
                    pixels.width(),
                    pixels.height(),
                    labels.width,
                    labels.height
                ),
            });
        }
        images.push(LabeledImage {
            id: labels.id,
            pixels,
            lights: labels.lights,
        });
    }
    let splits = read_splits(dir)?.map(|s| s.assignments);
    Ok(Dataset {
        name: annotations.dataset,
        images,
        splits,
    })
}

/// Writes annotations, PNGs and (when assigned) the split file. The split
/// seed is recorded as given.
pub fn write_canonical(dataset: &Dataset, dir: &Path, split_seed: Option<u64>) -> Result<(), DatasetError> {
    let mut names = HashSet::new();
    for img in &dataset.images {
        let name = image_file_name(&img.id)?;
        if !names.insert(name) {
            return Err(DatasetError::DuplicateId(img.id.clone()));
        }
    }
    for img in &dataset.images {
        let path = dir.join(IMAGES_DIR).join(image_file_name(&img.id)?);
        write_image_png(&path, &img.pixels)?;
    }
    write_annotations(&dir.join(ANNOTATIONS_FILE), &dataset.annotations())?;
    if let Some(assignments) = &dataset.splits {
        let file = SplitFile {
            seed: split_seed.unwrap_or_default(),
            assignments: assignments.clone(),
        };
        write_atomic(&dir.join(SPLIT_FILE), &to_json_bytes(&file))?;
    }
    Ok(())
}

pub fn read_detections(path: &Path) -> Result<DetectionFile, DatasetError> {
    let text = fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    let wire: WireDetectionFile = parse_strict(path, &text)?;
    let mut results = Vec::with_capacity(wire.results.len());
    for (i, result) in wire.results.into_iter().enumerate() {
        let mut detections = Vec::with_capacity(result.detections.len());
        for (j, d) in result.detections.into_iter().enumerate() {
            let at = |field: &str| format!("/results/{i}/detections/{j}/{field}");
            if !(d.score.is_finite() && (0.0..=1.0).contains(&d.score)) {
                return Err(schema(path, at("score"), format!("score {} outside [0, 1]", d.score)));
            }
            let bbox = LightBox::new(d.x1, d.y1, d.x2, d.y2, d.state)
                .map_err(|e| schema(path, at("x2"), e.to_string()))?;
            detections.push(Detection {
                bbox,
                score: d.score,
            });
        }
        results.push(DetectionSet {
            image_id: result.id,
            detections,
        });
    }
    Ok(DetectionFile {
        model: wire.model,
        results,
    })
}

pub fn write_detections(path: &Path, file: &DetectionFile) -> Result<(), DatasetError> {
    let wire = WireDetectionFile {
        model: file.model.clone(),
        results: file
            .results
            .iter()
            .map(|set| WireResult {
                id: set.image_id.clone(),
                detections: set
                    .detections
                    .iter()
                    .map(|d| WireDetection {
                        x1: d.bbox.x1,
                        y1: d.bbox.y1,
                        x2: d.bbox.x2,
                        y2: d.bbox.y2,
                        state: d.bbox.state,
                        score: d.score,
                    })
                    .collect(),
            })
            .collect(),
    };
    write_atomic(path, &to_json_bytes(&wire))
}

/// SHA-256 over `annotations.json` and every image file, in id order.
pub fn dataset_digest(dir: &Path) -> Result<String, DatasetError> {
    let annotations_path = dir.join(ANNOTATIONS_FILE);
    let mut hasher = Sha256::new();
    let bytes = fs::read(&annotations_path).map_err(|e| DatasetError::io(&annotations_path, e))?;
    hasher.update(&bytes);
    let annotations = read_annotations(dir)?;
    let mut ids: Vec<&str> = annotations.images.iter().map(|i| i.id.as_str()).collect();
    ids.sort_unstable();
    for id in ids {
        let path = dir.join(IMAGES_DIR).join(image_file_name(id)?);
        let bytes = fs::read(&path).map_err(|e| DatasetError::io(&path, e))?;
        hasher.update((id.len() as u64).to_le_bytes());
        hasher.update(id.as_bytes());
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hex(&hasher.finalize()))
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
