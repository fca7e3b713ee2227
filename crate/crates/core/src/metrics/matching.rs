use crate::dataset::Detection;
use crate::model::LightBox;

/// Intersection over union of two boxes; states are ignored.
pub fn iou(a: &LightBox, b: &LightBox) -> f64 {
    let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Tp,
    Fp,
}

/// Greedy assignment of one image's detections to its ground truth at one
/// IoU threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Detection indices in evaluation order: score descending, ties by
    /// input position.
    pub order: Vec<usize>,
    /// Matched ground-truth index per detection (input indexing).
    pub det_to_gt: Vec<Option<usize>>,
    /// IoU with the matched ground truth, 0 for false positives.
    pub det_iou: Vec<f64>,
    /// Matched detection index per ground truth.
    pub gt_to_det: Vec<Option<usize>>,
}

impl Matching {
    pub fn verdict(&self, det: usize) -> Verdict {
        if self.det_to_gt[det].is_some() {
            Verdict::Tp
        } else {
            Verdict::Fp
        }
    }

    pub fn false_positives(&self) -> impl Iterator<Item = usize> + '_ {
        self.order
            .iter()
            .copied()
            .filter(|&d| self.det_to_gt[d].is_none())
    }

    pub fn false_negatives(&self) -> impl Iterator<Item = usize> + '_ {
        self.gt_to_det
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_none())
            .map(|(g, _)| g)
    }

    pub fn tp_count(&self) -> usize {
        self.det_to_gt.iter().filter(|m| m.is_some()).count()
    }
}

/// Stable score-descending order; equal scores keep input order.
pub fn score_order(det: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..det.len()).collect();
    order.sort_by(|&a, &b| det[b].score.total_cmp(&det[a].score).then(a.cmp(&b)));
    order
}

/// Each detection, in score order, claims the unmatched same-state ground
/// truth with the highest IoU (lowest index on ties) provided that IoU is at
/// least `theta`; otherwise it is a false positive.
pub fn match_detections(gt: &[LightBox], det: &[Detection], theta: f64) -> Matching {
    let order = score_order(det);
    let mut det_to_gt = vec![None; det.len()];
    let mut det_iou = vec![0.0; det.len()];
    let mut gt_to_det = vec![None; gt.len()];
    for &d in &order {
        let mut best: Option<(usize, f64)> = None;
        for (g, truth) in gt.iter().enumerate() {
            if gt_to_det[g].is_some() || truth.state != det[d].bbox.state {
                continue;
            }
            let overlap = iou(truth, &det[d].bbox);
            if overlap >= theta && best.is_none_or(|(_, b)| overlap > b) {
                best = Some((g, overlap));
            }
        }
        if let Some((g, overlap)) = best {
            det_to_gt[d] = Some(g);
            det_iou[d] = overlap;
            gt_to_det[g] = Some(d);
        }
    }
    Matching {
        order,
        det_to_gt,
        det_iou,
        gt_to_det,
    }
}
