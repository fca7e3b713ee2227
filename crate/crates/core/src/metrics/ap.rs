use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApProtocol {
    /// COCO-style: interpolated precision sampled at recall 0.00..=1.00.
    #[default]
    Coco101,
    /// Area under the interpolated curve at every recall step.
    AllPoint,
}

/// Average precision of one class at one IoU threshold.
///
/// `verdicts` lists detections already sorted by descending score (with the
/// caller's tie order), `true` for a true positive. `gt_count` is the number
/// of ground-truth boxes of the class.
pub fn average_precision(
    verdicts: &[bool],
    gt_count: usize,
    protocol: ApProtocol,
) -> Result<f64, MetricsError> {
    if gt_count == 0 {
        return Err(MetricsError::NoGroundTruth);
    }
    if verdicts.is_empty() {
        return Ok(0.0);
    }
    let mut recall = Vec::with_capacity(verdicts.len());
    let mut precision = Vec::with_capacity(verdicts.len());
    let mut tp = 0usize;
    for (i, &hit) in verdicts.iter().enumerate() {
        tp += hit as usize;
        recall.push(tp as f64 / gt_count as f64);
        precision.push(tp as f64 / (i + 1) as f64);
    }
    // precision envelope: best precision at this recall or beyond
    for i in (0..precision.len() - 1).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let ap = match protocol {
        ApProtocol::Coco101 => {
            let sum: f64 = (0..=100)
                .map(|k| {
                    let r = k as f64 / 100.0;
                    let i = recall.partition_point(|&rc| rc < r);
                    precision.get(i).copied().unwrap_or(0.0)
                })
                .sum();
            sum / 101.0
        }
        ApProtocol::AllPoint => {
            let mut area = 0.0;
            let mut prev = 0.0;
            for (i, &r) in recall.iter().enumerate() {
                if r > prev {
                    area += (r - prev) * precision[i];
                    prev = r;
                }
            }
            area
        }
    };
    Ok(ap)
}
