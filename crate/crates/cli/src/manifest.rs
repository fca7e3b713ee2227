//! Run metadata written next to every output dataset.
//!
//! `manifest.json` holds everything that determines the output bytes and is
//! itself deterministic. Wall-clock timings vary run to run, so they live in
//! `timings.json` beside it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tigaug_core::dataset::{to_json_bytes, write_atomic, PreprocessStats};
use tigaug_core::model::{TransformKind, TransformParams};
use tigaug_core::transforms::LightNote;

use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.json";
pub const TOOL: &str = "tigaug";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageStatus {
    Augmented,
    /// Traffic-light transform on an image without lights.
    Skipped,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRecord {
    pub id: String,
    pub seed: u64,
    pub status: ImageStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<LightNote>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunCounts {
    pub augmented: usize,
    pub skipped: usize,
    pub failed: usize,
}

/// Label policies in force for the run, spelled out for anyone comparing
/// against other implementations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelPolicy {
    pub sc_box_map: String,
    pub off_frame: String,
    pub collision: String,
    pub mp_rt_subset: String,
}

impl LabelPolicy {
    pub fn for_params(params: &TransformParams) -> Self {
        LabelPolicy {
            sc_box_map: if params.sc_fixed_center {
                "fixed_center".into()
            } else {
                "affine".into()
            },
            off_frame: "clamp; skip the light if the clamped box is empty".into(),
            collision: "a placement overlapping any other light (IoU > 0) is blocked; try +x, then -x".into(),
            mp_rt_subset: "each light with p = 0.5, redrawn while empty".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    pub tool: String,
    pub version: String,
    pub kind: TransformKind,
    pub seed: u64,
    pub params: TransformParams,
    pub label_policy: LabelPolicy,
    /// `dataset_digest` of the input directory.
    pub input_digest: String,
    pub counts: RunCounts,
    pub images: Vec<ImageRecord>,
    pub timings_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageTiming {
    pub synth_ms: f64,
    pub write_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timings {
    pub kind: TransformKind,
    pub jobs: usize,
    pub load_ms: f64,
    pub transform_ms: f64,
    pub write_ms: f64,
    pub total_ms: f64,
    /// Mean and max of per-image synthesis time over augmented images.
    pub mean_synth_ms: f64,
    pub max_synth_ms: f64,
    pub per_image: BTreeMap<String, ImageTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestManifest {
    pub command: String,
    pub tool: String,
    pub version: String,
    pub format: String,
    pub input: String,
    pub dedup: bool,
    pub drop_monochrome: bool,
    pub split_seed: Option<u64>,
    pub images: usize,
    pub lights: usize,
    pub dropped_off: usize,
    pub stats: PreprocessStats,
    pub warnings: Vec<String>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_atomic(path, &to_json_bytes(value)).map_err(CliError::from)
}

/// Reads the manifest of an augmented dataset directory. Absence or a
/// foreign manifest is a data mismatch, not an input error.
pub fn read_run_manifest(dir: &Path) -> Result<RunManifest, CliError> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| {
        CliError::Mismatch(format!(
            "{}: {e}; the augmented directory must be produced by `tigaug augment`",
            path.display()
        ))
    })?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Mismatch(format!("{}: not an augmentation manifest: {e}", path.display()))
    })
}
