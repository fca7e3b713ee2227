use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use tigaug_core::dataset::{
    image_file_name, write_annotations, write_image_png, Annotations, Dataset, ANNOTATIONS_FILE,
    IMAGES_DIR,
};
use tigaug_core::model::{ImageLabels, TransformKind, TransformParams};
use tigaug_core::transforms::{apply, TransformError};

use crate::manifest::{
    write_json, ImageRecord, ImageStatus, ImageTiming, LabelPolicy, RunCounts, RunManifest, Timings,
    MANIFEST_FILE, TIMINGS_FILE, TOOL,
};
use crate::{commit_dir, image_seed, staging_dir, CliError};

#[derive(Debug, Clone)]
pub struct AugmentSummary {
    pub kind: TransformKind,
    pub dir: PathBuf,
    pub counts: RunCounts,
    pub timings: Timings,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

struct ImageResult {
    record: ImageRecord,
    labels: Option<ImageLabels>,
    timing: Option<ImageTiming>,
}

fn process(
    kind: TransformKind,
    img: &tigaug_core::model::LabeledImage,
    params: &TransformParams,
    global_seed: u64,
    images_dir: &Path,
) -> ImageResult {
    let seed = image_seed(global_seed, &img.id);
    let record = |status, message: Option<String>| ImageRecord {
        id: img.id.clone(),
        seed,
        status,
        message,
        notes: Vec::new(),
    };
    let started = Instant::now();
    let outcome = match apply(kind, img, params, seed) {
        Ok(o) => o,
        Err(TransformError::NoLights) => {
            return ImageResult {
                record: record(ImageStatus::Skipped, Some("no traffic lights".into())),
                labels: None,
                timing: None,
            }
        }
        Err(e) => {
            return ImageResult {
                record: record(ImageStatus::Failed, Some(e.to_string())),
                labels: None,
                timing: None,
            }
        }
    };
    let synth_ms = ms(started);
    let written = Instant::now();
    let stored = image_file_name(&img.id)
        .and_then(|name| write_image_png(&images_dir.join(name), &outcome.image.pixels));
    if let Err(e) = stored {
        return ImageResult {
            record: record(ImageStatus::Failed, Some(e.to_string())),
            labels: None,
            timing: None,
        };
    }
    ImageResult {
        record: ImageRecord {
            notes: outcome.notes.clone(),
            ..record(ImageStatus::Augmented, None)
        },
        labels: Some(outcome.image.labels()),
        timing: Some(ImageTiming {
            synth_ms,
            write_ms: ms(written),
        }),
    }
}

/// Augments every image of `dataset` with `kind` and writes the result to
/// `out_root/KIND+`, replacing any previous run there.
#[allow(clippy::too_many_arguments)]
pub fn augment_kind(
    dataset: &Dataset,
    input_digest: &str,
    kind: TransformKind,
    seed: u64,
    params: &TransformParams,
    jobs: usize,
    out_root: &Path,
    load_ms: f64,
) -> Result<AugmentSummary, CliError> {
    let started = Instant::now();
    let target = out_root.join(kind.dataset_name());
    let staging = staging_dir(&target)?;
    let io = |p: &Path, e: std::io::Error| CliError::Input(format!("{}: {e}", p.display()));
    if staging.exists() {
        std::fs::remove_dir_all(&staging).map_err(|e| io(&staging, e))?;
    }
    let images_dir = staging.join(IMAGES_DIR);
    std::fs::create_dir_all(&images_dir).map_err(|e| io(&images_dir, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Input(format!("cannot start {jobs} workers: {e}")))?;
    let transform_started = Instant::now();
    let results: Vec<ImageResult> = pool.install(|| {
        dataset
            .images
            .par_iter()
            .map(|img| process(kind, img, params, seed, &images_dir))
            .collect()
    });
    let transform_ms = ms(transform_started);

    let mut counts = RunCounts::default();
    let mut labels = Vec::new();
    let mut records = Vec::with_capacity(results.len());
    let mut per_image = BTreeMap::new();
    for r in results {
        match r.record.status {
            ImageStatus::Augmented => counts.augmented += 1,
            ImageStatus::Skipped => counts.skipped += 1,
            ImageStatus::Failed => {
                counts.failed += 1;
                eprintln!(
                    "error: {} {}: {}",
                    kind.dataset_name(),
                    r.record.id,
                    r.record.message.as_deref().unwrap_or("failed")
                );
            }
        }
        labels.extend(r.labels);
        if let Some(t) = r.timing {
            per_image.insert(r.record.id.clone(), t);
        }
        records.push(r.record);
    }
    if counts.failed > 0 && counts.failed == records.len() {
        let _ = std::fs::remove_dir_all(&staging);
        return Err(CliError::Input(format!(
            "{}: all {} images failed",
            kind.dataset_name(),
            counts.failed
        )));
    }
    if counts.augmented == 0 {
        eprintln!(
            "warning: {}: no images augmented ({} skipped without traffic lights)",
            kind.dataset_name(),
            counts.skipped
        );
    }

    let write_started = Instant::now();
    write_annotations(
        &staging.join(ANNOTATIONS_FILE),
        &Annotations {
            dataset: dataset.name.clone(),
            images: labels,
        },
    )?;
    let manifest = RunManifest {
        command: "augment".into(),
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        kind,
        seed,
        params: params.clone(),
        label_policy: LabelPolicy::for_params(params),
        input_digest: input_digest.to_string(),
        counts,
        images: records,
        timings_file: TIMINGS_FILE.into(),
    };
    write_json(&staging.join(MANIFEST_FILE), &manifest)?;
    let synth: Vec<f64> = per_image.values().map(|t: &ImageTiming| t.synth_ms).collect();
    let mut timings = Timings {
        kind,
        jobs,
        load_ms,
        transform_ms,
        write_ms: 0.0,
        total_ms: 0.0,
        mean_synth_ms: if synth.is_empty() {
            0.0
        } else {
            synth.iter().sum::<f64>() / synth.len() as f64
        },
        max_synth_ms: synth.iter().copied().fold(0.0, f64::max),
        per_image,
    };
    timings.write_ms = ms(write_started);
    timings.total_ms = load_ms + ms(started);
    write_json(&staging.join(TIMINGS_FILE), &timings)?;
    commit_dir(&staging, &target)?;

    Ok(AugmentSummary {
        kind,
        dir: target,
        counts,
        timings,
    })
}
