use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

use tigaug_core::dataset::{
    dataset_digest, parse_bosch, parse_lisa, preprocess_with, read_annotations, read_canonical,
    read_detections, read_splits, split_441, write_canonical, Ingested,
};
use tigaug_core::metrics::{map_5095, EvalConfig, MetricsError};
use tigaug_core::model::{TransformKind, TransformParams};
use tigaug_core::oracle::{check_mr, AugmentedLabels, MrReport, OracleError};
use tigaug_core::synth::mini_dataset;

use crate::args::{
    AugmentArgs, CheckMrArgs, Cli, Command, EvaluateArgs, IngestArgs, ReportFormat, SourceFormat,
    SynthArgs,
};
use crate::augment::augment_kind;
use crate::manifest::{read_run_manifest, write_json, ImageStatus, IngestManifest, MANIFEST_FILE, TOOL};
use crate::{commit_dir, staging_dir, CliError, EXIT_OK, EXIT_VIOLATIONS};

/// Runs one command and returns the process exit code. Errors are reported
/// on stderr.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Augment(a) => augment(a),
        Command::Evaluate(a) => evaluate(a),
        Command::CheckMr(a) => check(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn require_exists(path: &Path) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Input(format!("{}: no such file or directory", path.display())))
    }
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn ingest(a: &IngestArgs) -> Result<i32, CliError> {
    require_exists(&a.input)?;
    let mut split_seed = a.split_seed;
    let ingested = match a.format {
        SourceFormat::Lisa => parse_lisa(&a.input)?,
        SourceFormat::Bosch => parse_bosch(&a.input)?,
        SourceFormat::Canonical => {
            if split_seed.is_none() {
                split_seed = read_splits(&a.input)?.map(|s| s.seed);
            }
            Ingested {
                dataset: read_canonical(&a.input)?,
                warnings: Vec::new(),
                dropped_off: 0,
            }
        }
    };
    for w in &ingested.warnings {
        eprintln!("warning: {w}");
    }
    let (mut dataset, stats) = preprocess_with(ingested.dataset, a.dedup, a.drop_monochrome);
    if let Some(seed) = a.split_seed {
        dataset = split_441(dataset, seed)?;
    }

    let staging = staging_dir(&a.out)?;
    if staging.exists() {
        std::fs::remove_dir_all(&staging)
            .map_err(|e| CliError::Input(format!("{}: {e}", staging.display())))?;
    }
    write_canonical(&dataset, &staging, split_seed)?;
    let manifest = IngestManifest {
        command: "ingest".into(),
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        format: format!("{:?}", a.format).to_lowercase(),
        input: a.input.display().to_string(),
        dedup: a.dedup,
        drop_monochrome: a.drop_monochrome,
        split_seed,
        images: dataset.images.len(),
        lights: dataset.light_count(),
        dropped_off: ingested.dropped_off,
        stats,
        warnings: ingested.warnings,
    };
    write_json(&staging.join(MANIFEST_FILE), &manifest)?;
    commit_dir(&staging, &a.out)?;

    print_json(&serde_json::json!({
        "images": manifest.images,
        "lights": manifest.lights,
        "duplicates": stats.duplicates,
        "monochrome": stats.monochrome,
        "dropped_off": manifest.dropped_off,
        "warnings": manifest.warnings.len(),
    }));
    Ok(EXIT_OK)
}

fn read_params(path: Option<&Path>) -> Result<TransformParams, CliError> {
    let params = match path {
        None => TransformParams::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
        }
    };
    params
        .validate()
        .map_err(|e| CliError::Input(format!("invalid parameters: {e}")))?;
    Ok(params)
}

fn parse_kinds(spec: &str) -> Result<Vec<TransformKind>, CliError> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(TransformKind::ALL.to_vec());
    }
    spec.parse::<TransformKind>()
        .map(|k| vec![k])
        .map_err(|e| CliError::Input(e.to_string()))
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn augment(a: &AugmentArgs) -> Result<i32, CliError> {
    let kinds = parse_kinds(&a.transform)?;
    let params = read_params(a.params.as_deref())?;
    require_exists(&a.dataset)?;
    let jobs = match a.jobs {
        Some(0) => return Err(CliError::Input("--jobs must be at least 1".into())),
        Some(j) => j,
        None => default_jobs(),
    };
    let loaded = Instant::now();
    let dataset = read_canonical(&a.dataset)?;
    let digest = dataset_digest(&a.dataset)?;
    let load_ms = loaded.elapsed().as_secs_f64() * 1000.0;
    std::fs::create_dir_all(&a.out)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.out.display())))?;

    for kind in kinds {
        let s = augment_kind(&dataset, &digest, kind, a.seed, &params, jobs, &a.out, load_ms)?;
        eprintln!(
            "{}: {} augmented, {} skipped, {} failed, mean {:.1} ms/image -> {}",
            kind.dataset_name(),
            s.counts.augmented,
            s.counts.skipped,
            s.counts.failed,
            s.timings.mean_synth_ms,
            s.dir.display()
        );
    }
    Ok(EXIT_OK)
}

fn evaluate(a: &EvaluateArgs) -> Result<i32, CliError> {
    require_exists(&a.ground_truth)?;
    require_exists(&a.detections)?;
    let gt = read_annotations(&a.ground_truth)?;
    let dets = read_detections(&a.detections)?;
    let cfg = EvalConfig::with_protocol(a.protocol.into());
    let result = map_5095(&gt.images, &dets.results, &cfg).map_err(|e| match e {
        MetricsError::UnknownImageId(_) => CliError::Mismatch(e.to_string()),
        other => CliError::Input(other.to_string()),
    })?;
    print_json(&result.to_json());
    Ok(EXIT_OK)
}

/// Loads both datasets, the augmentation manifest and both detection files,
/// and runs the metamorphic check.
pub fn check_mr_dirs(a: &CheckMrArgs) -> Result<MrReport, CliError> {
    for p in [&a.original, &a.augmented, &a.det_original, &a.det_augmented] {
        require_exists(p)?;
    }
    let manifest = read_run_manifest(&a.augmented)?;
    let digest = dataset_digest(&a.original)?;
    if digest != manifest.input_digest {
        return Err(CliError::Mismatch(format!(
            "{} is not the dataset {} was augmented from (digest {} vs {})",
            a.original.display(),
            a.augmented.display(),
            digest,
            manifest.input_digest
        )));
    }
    let original = read_annotations(&a.original)?;
    let augmented = read_annotations(&a.augmented)?;
    let mut records: HashMap<&str, _> =
        manifest.images.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut aug = Vec::with_capacity(augmented.images.len());
    for labels in augmented.images {
        let record = records
            .remove(labels.id.as_str())
            .filter(|r| r.status == ImageStatus::Augmented)
            .ok_or_else(|| {
                CliError::Mismatch(format!("image `{}` is not recorded as augmented in the manifest", labels.id))
            })?;
        aug.push(AugmentedLabels {
            notes: record.notes.clone(),
            labels,
        });
    }
    let det_orig = read_detections(&a.det_original)?;
    let det_aug = read_detections(&a.det_augmented)?;
    let cfg = EvalConfig::with_protocol(a.protocol.into());
    check_mr(
        manifest.kind,
        &original.images,
        &aug,
        &manifest.params,
        &det_orig.results,
        &det_aug.results,
        &cfg,
    )
    .map_err(|e| match e {
        OracleError::Metrics(m) => CliError::Input(m.to_string()),
        other => CliError::Mismatch(other.to_string()),
    })
}

fn check(a: &CheckMrArgs) -> Result<i32, CliError> {
    let report = check_mr_dirs(a)?;
    if let Some(path) = &a.report {
        write_json(path, &report)?;
    }
    match a.format {
        ReportFormat::Table => print!("{}", report.to_table()),
        ReportFormat::Json => print_json(&report),
    }
    Ok(if report.violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    })
}

fn synth(a: &SynthArgs) -> Result<i32, CliError> {
    if a.width < 64 || a.height < 36 {
        return Err(CliError::Input("synthetic scenes need at least 64x36 pixels".into()));
    }
    let dataset = mini_dataset(a.count, a.width, a.height, a.seed);
    let staging = staging_dir(&a.out)?;
    write_canonical(&dataset, &staging, None)?;
    commit_dir(&staging, &a.out)?;
    eprintln!(
        "wrote {} images with {} lights to {}",
        dataset.images.len(),
        dataset.light_count(),
        a.out.display()
    );
    Ok(EXIT_OK)
}
