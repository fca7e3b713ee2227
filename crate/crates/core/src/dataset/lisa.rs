//! LISA-style annotation CSVs: semicolon separated rows of
//! `filename;tag;x1;y1;x2;y2;...`, an optional `Filename;...` header, and
//! frames stored next to the CSV (directly, under `frames/`) or relative to
//! the dataset root. Bulb-level CSVs (`*BULB*.csv`) are ignored; only box
//! annotations describe whole lights.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use super::canonical::read_image_png;
use super::{normalize_id, tags, Dataset, DatasetError, Ingested};
use crate::model::{clamp_box, LabeledImage, LightBox};

pub fn parse_lisa(root: &Path) -> Result<Ingested, DatasetError> {
    if !root.is_dir() {
        return Err(DatasetError::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset root not found"),
        ));
    }
    let mut csv_files: Vec<PathBuf> = WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_map(Result::ok)
        .map(|e| e.into_path())
        .filter(|p| {
            p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
                && !p
                    .file_name()
                    .is_some_and(|n| n.to_string_lossy().contains("BULB"))
        })
        .collect();
    csv_files.sort();

    let mut warnings = Vec::new();
    // image path -> lights, in id order
    let mut frames: BTreeMap<String, (PathBuf, Vec<LightBox>)> = BTreeMap::new();

    for csv_path in &csv_files {
        let csv_dir = csv_path.parent().unwrap_or(root);
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(b';')
            .has_headers(false)
            .flexible(true)
            .from_path(csv_path)
            .map_err(|e| DatasetError::io(csv_path, std::io::Error::other(e.to_string())))?;
        for record in reader.records() {
            let record = record.map_err(|e| DatasetError::MalformedRow {
                path: csv_path.clone(),
                line: e.position().map(|p| p.line()).unwrap_or(0),
                reason: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let malformed = |reason: String| DatasetError::MalformedRow {
                path: csv_path.clone(),
                line,
                reason,
            };
            if record.iter().all(|f| f.trim().is_empty()) {
                continue;
            }
            if record.get(0).is_some_and(|f| f.trim() == "Filename") {
                continue;
            }
            if record.len() < 6 {
                return Err(malformed(format!("expected at least 6 fields, got {}", record.len())));
            }
            let filename = record[0].trim();
            let tag = record[1].trim();
            let state = tags::lisa_state(tag).ok_or_else(|| DatasetError::UnknownTag {
                tag: tag.to_string(),
                location: format!("{}:{line}", csv_path.display()),
            })?;
            let mut coords = [0.0f64; 4];
            for (k, slot) in coords.iter_mut().enumerate() {
                let field = record[2 + k].trim();
                *slot = field
                    .parse()
                    .map_err(|_| malformed(format!("coordinate `{field}` is not a number")))?;
            }
            let [x1, y1, x2, y2] = coords;
            let bbox = LightBox::new(x1, y1, x2, y2, state).map_err(|e| malformed(e.to_string()))?;

            let Some(image_path) = resolve_frame(root, csv_dir, filename) else {
                warnings.push(format!(
                    "{}:{line}: frame `{filename}` not found, skipped",
                    csv_path.display()
                ));
                continue;
            };
            let id = normalize_id(image_path.strip_prefix(root).unwrap_or(&image_path));
            frames
                .entry(id)
                .or_insert_with(|| (image_path, Vec::new()))
                .1
                .push(bbox);
        }
    }

    let mut images = Vec::with_capacity(frames.len());
    for (id, (path, lights)) in frames {
        let pixels = read_image_png(&path)?;
        let mut kept = Vec::with_capacity(lights.len());
        for b in lights {
            match clamp_box(&b, pixels.width(), pixels.height()) {
                Some(c) => kept.push(c),
                None => warnings.push(format!("{id}: box outside the frame dropped")),
            }
        }
        images.push(LabeledImage {
            id,
            pixels,
            lights: kept,
        });
    }
    let name = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "lisa".to_string());
    Ok(Ingested {
        dataset: Dataset::new(name, images),
        warnings,
        dropped_off: 0,
    })
}

fn resolve_frame(root: &Path, csv_dir: &Path, filename: &str) -> Option<PathBuf> {
    let rel = Path::new(filename);
    let base = rel.file_name()?;
    [
        csv_dir.join(rel),
        root.join(rel),
        csv_dir.join("frames").join(base),
    ]
    .into_iter()
    .find(|p| p.is_file())
}
