//! Dataset ingestion (LISA CSV, Bosch YAML), preprocessing, the 4:1:1 split
//! and the canonical JSON/PNG formats for annotations and detections.

mod bosch;
mod canonical;
mod lisa;
mod preprocess;
pub mod tags;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ImageLabels, LabeledImage, LightBox};

pub use bosch::parse_bosch;
pub use canonical::{
    dataset_digest, image_file_name, read_annotations, read_canonical, read_detections,
    read_image_png, read_splits, to_json_bytes, write_annotations, write_atomic, write_canonical,
    write_detections, write_image_png, Annotations, SplitFile, ANNOTATIONS_FILE, IMAGES_DIR,
    SPLIT_FILE,
};
pub use lisa::parse_lisa;
pub use preprocess::{preprocess, preprocess_with, split_441, PreprocessStats};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: malformed row: {reason}", path.display())]
    MalformedRow {
        path: PathBuf,
        line: u64,
        reason: String,
    },
    #[error("entry {index}: malformed entry: {reason}")]
    MalformedEntry { index: usize, reason: String },
    #[error("{location}: unknown light tag `{tag}`")]
    UnknownTag { tag: String, location: String },
    #[error("{}: schema error at `{pointer}`: {reason}", path.display())]
    Schema {
        path: PathBuf,
        pointer: String,
        reason: String,
    },
    #[error("{}: image error: {reason}", path.display())]
    Image { path: PathBuf, reason: String },
    #[error("dataset has {count} images; the 4:1:1 split needs at least 6")]
    TooSmall { count: usize },
    #[error("duplicate image id `{0}`")]
    DuplicateId(String),
    #[error("image id `{0}` is not a safe relative path")]
    UnsafeId(String),
}

impl DatasetError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub images: Vec<LabeledImage>,
    /// Split tag per image id; when present it covers every image.
    pub splits: Option<BTreeMap<String, Split>>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, images: Vec<LabeledImage>) -> Self {
        Dataset {
            name: name.into(),
            images,
            splits: None,
        }
    }

    pub fn annotations(&self) -> Annotations {
        Annotations {
            dataset: self.name.clone(),
            images: self.images.iter().map(LabeledImage::labels).collect(),
        }
    }

    pub fn get(&self, id: &str) -> Option<&LabeledImage> {
        self.images.iter().find(|img| img.id == id)
    }

    pub fn light_count(&self) -> usize {
        self.images.iter().map(|img| img.lights.len()).sum()
    }
}

/// Result of ingesting a raw dataset: the parsed images plus diagnostics
/// that did not stop the parse.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
    /// Lights dropped because the source tagged them as switched off.
    pub dropped_off: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: LightBox,
    pub score: f64,
}

/// One model's output on one image.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionSet {
    pub image_id: String,
    pub detections: Vec<Detection>,
}

impl DetectionSet {
    pub fn empty(image_id: impl Into<String>) -> Self {
        DetectionSet {
            image_id: image_id.into(),
            detections: Vec::new(),
        }
    }

    /// Ground truth reported as detections with full confidence.
    pub fn from_labels(labels: &ImageLabels) -> Self {
        DetectionSet {
            image_id: labels.id.clone(),
            detections: labels
                .lights
                .iter()
                .map(|&bbox| Detection { bbox, score: 1.0 })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionFile {
    pub model: String,
    pub results: Vec<DetectionSet>,
}

/// Normalizes a dataset-relative path into an image id: forward slashes,
/// no leading `./`.
pub fn normalize_id(relative: &std::path::Path) -> String {
    let parts: Vec<String> = relative
        .components()
        .filter_map(|c| match c {
            std::path::Component::Normal(s) => Some(s.to_string_lossy().into_owned()),
            _ => None,
        })
        .collect();
    parts.join("/")
}
