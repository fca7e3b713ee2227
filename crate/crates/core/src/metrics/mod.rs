//! Detection quality metrics: IoU, greedy matching, per-class average
//! precision and mAP averaged over IoU thresholds 0.50:0.05:0.95.
//!
//! Conventions:
//! - a detection matches at threshold `t` when IoU `>= t`;
//! - classes without ground truth in the evaluated set are left out of the
//!   class mean instead of counting as zero;
//! - equal scores are ordered by image id, then by position in the image's
//!   detection list, so results never depend on the order images arrive in.

mod ap;
mod matching;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::dataset::{Detection, DetectionSet};
use crate::model::{ImageLabels, LightState};

pub use ap::{average_precision, ApProtocol};
pub use matching::{iou, match_detections, score_order, Matching, Verdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("class has no ground truth in the evaluated set")]
    NoGroundTruth,
    #[error("detections reference unknown image id `{0}`")]
    UnknownImageId(String),
    #[error("IoU thresholds must be strictly increasing values in (0, 1]")]
    BadThresholds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub iou_thresholds: Vec<f64>,
    /// Detections scoring below this are ignored.
    pub score_floor: f64,
    pub protocol: ApProtocol,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            iou_thresholds: coco_thresholds(),
            score_floor: 0.0,
            protocol: ApProtocol::Coco101,
        }
    }
}

impl EvalConfig {
    pub fn with_protocol(protocol: ApProtocol) -> Self {
        EvalConfig {
            protocol,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<(), MetricsError> {
        let in_range = self.iou_thresholds.iter().all(|&t| t > 0.0 && t <= 1.0);
        let increasing = self.iou_thresholds.windows(2).all(|w| w[0] < w[1]);
        if self.iou_thresholds.is_empty() || !in_range || !increasing {
            return Err(MetricsError::BadThresholds);
        }
        Ok(())
    }
}

/// 0.50, 0.55, ..., 0.95 computed as `k / 100` so each value is the
/// correctly rounded decimal.
pub fn coco_thresholds() -> Vec<f64> {
    (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchRecord {
    pub detection: Detection,
    pub gt: Option<usize>,
    pub iou: f64,
    pub verdict: Verdict,
}

impl Serialize for Detection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Detection", 6)?;
        st.serialize_field("x1", &self.bbox.x1)?;
        st.serialize_field("y1", &self.bbox.y1)?;
        st.serialize_field("x2", &self.bbox.x2)?;
        st.serialize_field("y2", &self.bbox.y2)?;
        st.serialize_field("state", &self.bbox.state)?;
        st.serialize_field("score", &self.score)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageMatches {
    pub image_id: String,
    /// Detections in evaluation order.
    pub detections: Vec<MatchRecord>,
    /// Ground-truth indices left unmatched (false negatives).
    pub unmatched_gt: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub map: f64,
    pub thresholds: Vec<f64>,
    /// AP per class, one value per threshold, for classes with ground truth.
    pub per_class_ap: BTreeMap<LightState, Vec<f64>>,
    /// Matching evidence at the first (loosest) threshold.
    pub matches: Vec<ImageMatches>,
    pub false_positives: usize,
    pub false_negatives: usize,
}

#[derive(Serialize)]
struct ErrorCounts {
    fp: usize,
    #[serde(rename = "fn")]
    fn_: usize,
}

#[derive(Serialize)]
struct EvalSummary<'a> {
    map: f64,
    per_class: BTreeMap<&'a str, BTreeMap<String, f64>>,
    errors: ErrorCounts,
}

impl EvalResult {
    /// `{"map", "per_class": {state: {"0.50": ap, ...}}, "errors": {"fp", "fn"}}`
    pub fn to_json(&self) -> serde_json::Value {
        let per_class = self
            .per_class_ap
            .iter()
            .map(|(state, aps)| {
                let by_threshold = self
                    .thresholds
                    .iter()
                    .zip(aps)
                    .map(|(t, ap)| (format!("{t:.2}"), *ap))
                    .collect();
                (state.as_str(), by_threshold)
            })
            .collect();
        serde_json::to_value(EvalSummary {
            map: self.map,
            per_class,
            errors: ErrorCounts {
                fp: self.false_positives,
                fn_: self.false_negatives,
            },
        })
        .expect("plain data serializes")
    }
}

/// mAP over `cfg.iou_thresholds`: per threshold, the mean AP over classes
/// with ground truth; then the mean over thresholds.
pub fn map_5095(
    gt: &[ImageLabels],
    detections: &[DetectionSet],
    cfg: &EvalConfig,
) -> Result<EvalResult, MetricsError> {
    cfg.validate()?;
    let index: HashMap<&str, usize> = gt
        .iter()
        .enumerate()
        .map(|(i, img)| (img.id.as_str(), i))
        .collect();
    let mut per_image: Vec<Vec<Detection>> = vec![Vec::new(); gt.len()];
    for set in detections {
        let &i = index
            .get(set.image_id.as_str())
            .ok_or_else(|| MetricsError::UnknownImageId(set.image_id.clone()))?;
        per_image[i].extend(
            set.detections
                .iter()
                .filter(|d| d.score >= cfg.score_floor)
                .copied(),
        );
    }

    let mut gt_counts: BTreeMap<LightState, usize> = BTreeMap::new();
    for img in gt {
        for light in &img.lights {
            *gt_counts.entry(light.state).or_default() += 1;
        }
    }

    let mut image_order: Vec<usize> = (0..gt.len()).collect();
    image_order.sort_by(|&a, &b| gt[a].id.cmp(&gt[b].id));

    let mut per_class_ap: BTreeMap<LightState, Vec<f64>> =
        gt_counts.keys().map(|&s| (s, Vec::new())).collect();
    let mut matches = Vec::new();
    let (mut fp_total, mut fn_total) = (0, 0);

    for (ti, &theta) in cfg.iou_thresholds.iter().enumerate() {
        // (score, image rank, detection index, tp) per class
        let mut records: BTreeMap<LightState, Vec<(f64, usize, usize, bool)>> = BTreeMap::new();
        for (rank, &i) in image_order.iter().enumerate() {
            let dets = &per_image[i];
            let m = match_detections(&gt[i].lights, dets, theta);
            for (d, det) in dets.iter().enumerate() {
                records.entry(det.bbox.state).or_default().push((
                    det.score,
                    rank,
                    d,
                    m.det_to_gt[d].is_some(),
                ));
            }
            if ti == 0 {
                fp_total += m.false_positives().count();
                fn_total += m.false_negatives().count();
                matches.push(ImageMatches {
                    image_id: gt[i].id.clone(),
                    detections: m
                        .order
                        .iter()
                        .map(|&d| MatchRecord {
                            detection: dets[d],
                            gt: m.det_to_gt[d],
                            iou: m.det_iou[d],
                            verdict: m.verdict(d),
                        })
                        .collect(),
                    unmatched_gt: m.false_negatives().collect(),
                });
            }
        }
        for (&state, &count) in &gt_counts {
            let mut recs = records.remove(&state).unwrap_or_default();
            recs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            let verdicts: Vec<bool> = recs.iter().map(|r| r.3).collect();
            let ap = average_precision(&verdicts, count, cfg.protocol)?;
            per_class_ap.get_mut(&state).expect("class seeded").push(ap);
        }
    }

    let map = if per_class_ap.is_empty() {
        0.0
    } else {
        let per_threshold: Vec<f64> = (0..cfg.iou_thresholds.len())
            .map(|t| {
                per_class_ap.values().map(|aps| aps[t]).sum::<f64>() / per_class_ap.len() as f64
            })
            .collect();
        per_threshold.iter().sum::<f64>() / per_threshold.len() as f64
    };

    Ok(EvalResult {
        map,
        thresholds: cfg.iou_thresholds.clone(),
        per_class_ap,
        matches,
        false_positives: fp_total,
        false_negatives: fn_total,
    })
}
