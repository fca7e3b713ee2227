//! Metamorphic-relation checks. Weather and camera transforms must not change
//! what a detector reports; traffic-light transforms must change it exactly
//! as they changed the ground truth.
//!
//! Detections on an augmented image are compared against the transformed
//! ground truth rather than against the transformed detections on the
//! original. The two agree whenever the model was right on the original;
//! original-image mistakes are reported on their own so the difference is
//! visible.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::dataset::{Detection, DetectionSet};
use crate::metrics::{iou, map_5095, match_detections, EvalConfig, MetricsError};
use crate::model::{ImageLabels, LightBox, TransformKind, TransformParams};
use crate::transforms::{label_transform, LightNote, TransformOutcome};

/// IoU used for per-light violation evidence.
pub const VIOLATION_IOU: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("image ids do not line up: {0}")]
    MismatchedIds(String),
    #[error("image `{id}`: augmented labels are not the transform of the original labels: {reason}")]
    InconsistentLabels { id: String, reason: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationCategory {
    MissedLight,
    WrongState,
    PhantomLight,
    MissedTransformedLight,
    BrokenUnchangedLight,
    DriftedBox,
}

impl ViolationCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCategory::MissedLight => "missed_light",
            ViolationCategory::WrongState => "wrong_state",
            ViolationCategory::PhantomLight => "phantom_light",
            ViolationCategory::MissedTransformedLight => "missed_transformed_light",
            ViolationCategory::BrokenUnchangedLight => "broken_unchanged_light",
            ViolationCategory::DriftedBox => "drifted_box",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MrViolation {
    pub image_id: String,
    pub category: ViolationCategory,
    /// Index into the image's expected lights, for violations about a light.
    pub expected_index: Option<usize>,
    pub expected: Option<LightBox>,
    pub detection: Option<Detection>,
    /// IoU between `expected` (or the closest expected light) and `detection`.
    pub iou: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OriginalErrors {
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Images where the model already erred before augmentation.
    pub images: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MrReport {
    pub kind: TransformKind,
    pub images: usize,
    pub map_original: f64,
    pub map_augmented: f64,
    /// Relative drop; `None` when the original mAP is zero.
    pub map_drop: Option<f64>,
    pub original_errors: OriginalErrors,
    pub violations: Vec<MrViolation>,
}

/// Labels of one augmented image plus the notes of the transform that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedLabels {
    pub labels: ImageLabels,
    pub notes: Vec<LightNote>,
}

impl From<&TransformOutcome> for AugmentedLabels {
    fn from(o: &TransformOutcome) -> Self {
        AugmentedLabels {
            labels: o.image.labels(),
            notes: o.notes.clone(),
        }
    }
}

/// What a sound detector should report on the augmented image.
pub fn expected_labels(kind: TransformKind, outcome: &TransformOutcome) -> Vec<LightBox> {
    debug_assert!(kind == outcome.kind);
    outcome.image.lights.clone()
}

fn group_detections<'a>(
    sets: &'a [DetectionSet],
    known: &BTreeMap<&str, usize>,
    side: &str,
) -> Result<HashMap<&'a str, Vec<Detection>>, OracleError> {
    let mut out: HashMap<&str, Vec<Detection>> = HashMap::new();
    for set in sets {
        if !known.contains_key(set.image_id.as_str()) {
            return Err(OracleError::MismatchedIds(format!(
                "{side} detections name unknown image `{}`",
                set.image_id
            )));
        }
        out.entry(set.image_id.as_str()).or_default().extend(set.detections.iter().copied());
    }
    Ok(out)
}

/// Compares detections on original and augmented images.
///
/// `original` may hold more images than `augmented` (images skipped by the
/// transform); only the augmented ids are scored on both sides. Images with
/// no detection entry are treated as having no detections.
pub fn check_mr(
    kind: TransformKind,
    original: &[ImageLabels],
    augmented: &[AugmentedLabels],
    params: &TransformParams,
    det_orig: &[DetectionSet],
    det_aug: &[DetectionSet],
    cfg: &EvalConfig,
) -> Result<MrReport, OracleError> {
    let by_id: HashMap<&str, &ImageLabels> = original.iter().map(|l| (l.id.as_str(), l)).collect();
    let mut aug_index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut originals = Vec::with_capacity(augmented.len());
    for (i, aug) in augmented.iter().enumerate() {
        let id = aug.labels.id.as_str();
        let orig = *by_id.get(id).ok_or_else(|| {
            OracleError::MismatchedIds(format!("augmented image `{id}` is not in the original dataset"))
        })?;
        if aug_index.insert(id, i).is_some() {
            return Err(OracleError::MismatchedIds(format!("augmented image `{id}` listed twice")));
        }
        if (orig.width, orig.height) != (aug.labels.width, aug.labels.height) {
            return Err(OracleError::InconsistentLabels {
                id: id.to_string(),
                reason: "image size changed".into(),
            });
        }
        let recomputed = label_transform(kind, &orig.lights, &aug.notes, params, orig.width, orig.height)
            .map_err(|e| OracleError::InconsistentLabels {
                id: id.to_string(),
                reason: e.to_string(),
            })?;
        if recomputed != aug.labels.lights {
            return Err(OracleError::InconsistentLabels {
                id: id.to_string(),
                reason: "stored labels differ from the recomputed ones".into(),
            });
        }
        originals.push(orig.clone());
    }

    let all_original: BTreeMap<&str, usize> =
        original.iter().enumerate().map(|(i, l)| (l.id.as_str(), i)).collect();
    let orig_dets = group_detections(det_orig, &all_original, "original")?;
    let aug_dets = group_detections(det_aug, &aug_index, "augmented")?;

    let scored_orig: Vec<DetectionSet> = originals
        .iter()
        .filter_map(|l| {
            orig_dets.get(l.id.as_str()).map(|d| DetectionSet {
                image_id: l.id.clone(),
                detections: d.clone(),
            })
        })
        .collect();
    let scored_aug: Vec<DetectionSet> = aug_dets
        .iter()
        .map(|(id, d)| DetectionSet {
            image_id: id.to_string(),
            detections: d.clone(),
        })
        .collect();
    let aug_labels: Vec<ImageLabels> = augmented.iter().map(|a| a.labels.clone()).collect();
    let map_original = map_5095(&originals, &scored_orig, cfg)?.map;
    let map_augmented = map_5095(&aug_labels, &scored_aug, cfg)?.map;
    let map_drop = (map_original > 0.0).then(|| (map_original - map_augmented) / map_original);

    let mut original_errors = OriginalErrors::default();
    for l in &originals {
        let dets = orig_dets.get(l.id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        let m = match_detections(&l.lights, dets, VIOLATION_IOU);
        let (fp, fn_) = (m.false_positives().count(), m.false_negatives().count());
        if fp + fn_ > 0 {
            original_errors.false_positives += fp;
            original_errors.false_negatives += fn_;
            original_errors.images.push(l.id.clone());
        }
    }
    original_errors.images.sort();

    let mut violations = Vec::new();
    for (&id, &i) in &aug_index {
        let aug = &augmented[i];
        let dets = aug_dets.get(id).map(Vec::as_slice).unwrap_or(&[]);
        let touched: BTreeSet<usize> = aug
            .notes
            .iter()
            .filter(|n| n.action.touched())
            .filter_map(|n| n.output)
            .collect();
        violations.extend(classify(kind, &aug.labels, dets, &touched));
    }

    Ok(MrReport {
        kind,
        images: augmented.len(),
        map_original,
        map_augmented,
        map_drop,
        original_errors,
        violations,
    })
}

/// Turns one image's FP/FN evidence at `VIOLATION_IOU` into violations.
/// Every false negative and every false positive ends up in exactly one
/// violation.
pub fn classify(
    kind: TransformKind,
    expected: &ImageLabels,
    dets: &[Detection],
    touched: &BTreeSet<usize>,
) -> Vec<MrViolation> {
    use ViolationCategory::*;
    let lights = &expected.lights;
    let m = match_detections(lights, dets, VIOLATION_IOU);
    let mut free_fp: Vec<usize> = m.false_positives().collect();
    let untouched_light = |g: usize| kind.is_light() && !touched.contains(&g);
    let violation = |category, g: Option<usize>, d: Option<usize>| {
        let iou = match (g, d) {
            (Some(g), Some(d)) => Some(iou(&lights[g], &dets[d].bbox)),
            _ => None,
        };
        MrViolation {
            image_id: expected.id.clone(),
            category,
            expected_index: g,
            expected: g.map(|g| lights[g]),
            detection: d.map(|d| dets[d]),
            iou,
        }
    };
    let mut out = Vec::new();

    for g in m.false_negatives() {
        let truth = &lights[g];
        let wrong_state = free_fp.iter().position(|&d| {
            dets[d].bbox.state != truth.state && iou(truth, &dets[d].bbox) >= VIOLATION_IOU
        });
        if let Some(k) = wrong_state {
            let d = free_fp.remove(k);
            out.push(violation(WrongState, Some(g), Some(d)));
            continue;
        }
        let drifted = free_fp
            .iter()
            .enumerate()
            .map(|(k, &d)| (k, iou(truth, &dets[d].bbox)))
            .filter(|&(_, v)| v > 0.0)
            .fold(None, |best: Option<(usize, f64)>, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            });
        if let Some((k, _)) = drifted {
            let d = free_fp.remove(k);
            let category = if untouched_light(g) { BrokenUnchangedLight } else { DriftedBox };
            out.push(violation(category, Some(g), Some(d)));
            continue;
        }
        let category = if touched.contains(&g) {
            MissedTransformedLight
        } else if untouched_light(g) {
            BrokenUnchangedLight
        } else {
            MissedLight
        };
        out.push(violation(category, Some(g), None));
    }

    for d in free_fp {
        let closest = lights
            .iter()
            .enumerate()
            .map(|(g, l)| (g, iou(l, &dets[d].bbox)))
            .fold(None, |best: Option<(usize, f64)>, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            });
        match closest {
            Some((g, v)) if v > 0.0 && v < VIOLATION_IOU => {
                let category = if untouched_light(g) { BrokenUnchangedLight } else { DriftedBox };
                out.push(violation(category, Some(g), Some(d)));
            }
            // overlaps nothing, or duplicates an already matched light
            _ => out.push(MrViolation {
                iou: closest.map(|c| c.1),
                ..violation(PhantomLight, None, Some(d))
            }),
        }
    }
    out
}

fn fmt_box(b: &LightBox) -> String {
    format!("{} ({:.1},{:.1})-({:.1},{:.1})", b.state, b.x1, b.y1, b.x2, b.y2)
}

impl MrReport {
    pub fn count(&self, category: ViolationCategory) -> usize {
        self.violations.iter().filter(|v| v.category == category).count()
    }

    /// Plain-text summary followed by one row per violation.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let drop = match self.map_drop {
            Some(d) => format!("{:.2}%", d * 100.0),
            None => "undefined (original mAP is 0)".into(),
        };
        let _ = writeln!(s, "transform        {}", self.kind.dataset_name());
        let _ = writeln!(s, "images           {}", self.images);
        let _ = writeln!(s, "mAP original     {:.4}", self.map_original);
        let _ = writeln!(s, "mAP augmented    {:.4}", self.map_augmented);
        let _ = writeln!(s, "mAP drop         {drop}");
        let _ = writeln!(
            s,
            "original errors  fp={} fn={} in {} images",
            self.original_errors.false_positives,
            self.original_errors.false_negatives,
            self.original_errors.images.len()
        );
        let _ = writeln!(s, "violations       {}", self.violations.len());
        if self.violations.is_empty() {
            return s;
        }
        let mut per_category: BTreeMap<ViolationCategory, usize> = BTreeMap::new();
        for v in &self.violations {
            *per_category.entry(v.category).or_default() += 1;
        }
        for (c, n) in per_category {
            let _ = writeln!(s, "  {:<26}{n}", c.as_str());
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<24} {:<26} {:<36} {:<44} iou", "image", "category", "expected", "detection");
        for v in &self.violations {
            let expected = v.expected.as_ref().map(fmt_box).unwrap_or_else(|| "-".into());
            let detection = v
                .detection
                .as_ref()
                .map(|d| format!("{} @{:.2}", fmt_box(&d.bbox), d.score))
                .unwrap_or_else(|| "-".into());
            let iou = v.iou.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{:<24} {:<26} {:<36} {:<44} {iou}",
                v.image_id,
                v.category.as_str(),
                expected,
                detection
            );
        }
        s
    }
}
