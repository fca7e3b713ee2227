//! Bosch-style YAML: a list of `{path, boxes: [{label, x_min, y_min, x_max,
//! y_max, occluded}]}` entries, image paths relative to the YAML file.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::canonical::read_image_png;
use super::tags::{self, TagMeaning};
use super::{normalize_id, Dataset, DatasetError, Ingested};
use crate::model::{clamp_box, LabeledImage, LightBox};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    path: String,
    #[serde(default)]
    boxes: Vec<RawBox>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    label: String,
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
    #[serde(default)]
    #[allow(dead_code)]
    occluded: bool,
}

pub fn parse_bosch(yaml_path: &Path) -> Result<Ingested, DatasetError> {
    let text = fs::read_to_string(yaml_path).map_err(|e| DatasetError::io(yaml_path, e))?;
    let entries: Vec<serde_yaml::Value> =
        serde_yaml::from_str(&text).map_err(|e| DatasetError::MalformedEntry {
            index: 0,
            reason: format!("top level is not a list of entries: {e}"),
        })?;
    let base = yaml_path.parent().unwrap_or(Path::new("."));

    let mut warnings = Vec::new();
    let mut dropped_off = 0;
    let mut seen = HashSet::new();
    let mut images = Vec::with_capacity(entries.len());
    for (index, value) in entries.into_iter().enumerate() {
        let entry: Entry = serde_yaml::from_value(value).map_err(|e| DatasetError::MalformedEntry {
            index,
            reason: e.to_string(),
        })?;
        let mut lights = Vec::with_capacity(entry.boxes.len());
        for (k, raw) in entry.boxes.iter().enumerate() {
            let state = match tags::bosch_meaning(&raw.label) {
                Some(TagMeaning::Light(state)) => state,
                Some(TagMeaning::Off) => {
                    dropped_off += 1;
                    continue;
                }
                None => {
                    return Err(DatasetError::UnknownTag {
                        tag: raw.label.clone(),
                        location: format!("entry {index}, box {k}"),
                    })
                }
            };
            let bbox = LightBox::new(raw.x_min, raw.y_min, raw.x_max, raw.y_max, state).map_err(
                |e| DatasetError::MalformedEntry {
                    index,
                    reason: format!("box {k}: {e}"),
                },
            )?;
            lights.push(bbox);
        }

        let image_path = base.join(&entry.path);
        if !image_path.is_file() {
            warnings.push(format!("entry {index}: image `{}` not found, skipped", entry.path));
            continue;
        }
        let id = normalize_id(Path::new(&entry.path));
        if !seen.insert(id.clone()) {
            return Err(DatasetError::DuplicateId(id));
        }
        let pixels = read_image_png(&image_path)?;
        let lights = lights
            .into_iter()
            .filter_map(|b| {
                let clamped = clamp_box(&b, pixels.width(), pixels.height());
                if clamped.is_none() {
                    warnings.push(format!("entry {index}: box outside the frame dropped"));
                }
                clamped
            })
            .collect();
        images.push(LabeledImage { id, pixels, lights });
    }
    let name = yaml_path
        .file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "bosch".to_string());
    Ok(Ingested {
        dataset: Dataset::new(name, images),
        warnings,
        dropped_off,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::write_image_png;
    use crate::model::{LightState, RasterImage};

    fn setup(yaml: &str) -> tempfile::TempDir {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(tmp.path().join("train.yaml"), yaml).unwrap();
        write_image_png(
            &tmp.path().join("rgb/a.png"),
            &RasterImage::filled(40, 30, [9, 9, 9]).unwrap(),
        )
        .unwrap();
        tmp
    }

    #[test]
    fn labels_map_and_off_is_dropped() {
        let tmp = setup(
            "- path: ./rgb/a.png\n  boxes:\n\
             \x20 - {label: Red, x_min: 3, y_min: 4, x_max: 7, y_max: 20, occluded: false}\n\
             \x20 - {label: GreenLeft, x_min: 10, y_min: 4, x_max: 14, y_max: 20, occluded: true}\n\
             \x20 - {label: 'off', x_min: 20, y_min: 4, x_max: 24, y_max: 20, occluded: false}\n",
        );
        let ingested = parse_bosch(&tmp.path().join("train.yaml")).unwrap();
        let img = &ingested.dataset.images[0];
        assert_eq!(img.id, "rgb/a.png");
        assert_eq!(img.lights[0], LightBox::new(3.0, 4.0, 7.0, 20.0, LightState::Stop).unwrap());
        assert_eq!(img.lights[1].state, LightState::GoLeft);
        assert_eq!(img.lights.len(), 2);
        assert_eq!(ingested.dropped_off, 1);
    }

    #[test]
    fn zero_width_box_is_malformed() {
        let tmp = setup(
            "- path: rgb/a.png\n  boxes:\n\
             \x20 - {label: Red, x_min: 3, y_min: 4, x_max: 3, y_max: 20, occluded: false}\n",
        );
        assert!(matches!(
            parse_bosch(&tmp.path().join("train.yaml")),
            Err(DatasetError::MalformedEntry { index: 0, .. })
        ));
    }

    #[test]
    fn unknown_label_is_reported() {
        let tmp = setup(
            "- path: rgb/a.png\n  boxes:\n\
             \x20 - {label: Purple, x_min: 3, y_min: 4, x_max: 5, y_max: 20, occluded: false}\n",
        );
        match parse_bosch(&tmp.path().join("train.yaml")) {
            Err(DatasetError::UnknownTag { tag, .. }) => assert_eq!(tag, "Purple"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn entry_missing_path_is_malformed() {
        let tmp = setup("- path: rgb/a.png\n  boxes: []\n- boxes: []\n");
        assert!(matches!(
            parse_bosch(&tmp.path().join("train.yaml")),
            Err(DatasetError::MalformedEntry { index: 1, .. })
        ));
    }
}
