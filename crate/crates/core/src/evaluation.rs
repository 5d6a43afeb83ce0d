//! ICDAR-style detection scoring: one-to-one IoU matching with don't-care
//! regions, precision/recall/F, and angle histograms.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::Serialize;

use crate::geometry::{intersection_area, rotated_iou};
use crate::pipeline::Detection;
use crate::sampling::{AnnotatedImage, LabeledInstance};

pub const DEFAULT_MATCH_IOU: f64 = 0.5;

/// How a detection is tested against a don't-care ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum IgnoreRule {
    /// IoU with the don't-care box reaches the match threshold.
    #[default]
    Iou,
    /// Intersection over the detection's own area reaches the given level.
    IntersectionOverDetection(f64),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchSet {
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_gt: Vec<usize>,
    pub unmatched_det: Vec<usize>,
    pub ignored_det: Vec<usize>,
}

impl MatchSet {
    pub fn counts(&self) -> EvalCounts {
        EvalCounts {
            n_gt: self.pairs.len() + self.unmatched_gt.len(),
            n_det: self.pairs.len() + self.unmatched_det.len() + self.ignored_det.len(),
            n_matched: self.pairs.len(),
            n_ignored: self.ignored_det.len(),
        }
    }
}

/// Tallies behind a report. `n_gt` counts only care instances; `n_det`
/// counts every detection including those absorbed by don't-care regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EvalCounts {
    pub n_gt: usize,
    pub n_det: usize,
    pub n_matched: usize,
    pub n_ignored: usize,
}

impl std::ops::Add for EvalCounts {
    type Output = EvalCounts;
    fn add(self, o: EvalCounts) -> EvalCounts {
        EvalCounts {
            n_gt: self.n_gt + o.n_gt,
            n_det: self.n_det + o.n_det,
            n_matched: self.n_matched + o.n_matched,
            n_ignored: self.n_ignored + o.n_ignored,
        }
    }
}

impl std::iter::Sum for EvalCounts {
    fn sum<I: Iterator<Item = EvalCounts>>(iter: I) -> Self {
        iter.fold(EvalCounts::default(), |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub recall: f64,
    pub precision: f64,
    pub f_score: f64,
    pub counts: EvalCounts,
}

impl EvalReport {
    /// An empty denominator means nothing could be missed (or nothing was
    /// wrong), so the corresponding metric is 1.
    pub fn from_counts(counts: EvalCounts) -> Self {
        let care_det = counts.n_det - counts.n_ignored;
        let recall = if counts.n_gt == 0 { 1.0 } else { counts.n_matched as f64 / counts.n_gt as f64 };
        let precision = if care_det == 0 { 1.0 } else { counts.n_matched as f64 / care_det as f64 };
        let f_score = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Self { recall, precision, f_score, counts }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.counts;
        writeln!(f, "{:<10} {:>9}", "metric", "value")?;
        writeln!(f, "{:<10} {:>9.4}", "recall", self.recall)?;
        writeln!(f, "{:<10} {:>9.4}", "precision", self.precision)?;
        writeln!(f, "{:<10} {:>9.4}", "f_score", self.f_score)?;
        writeln!(f, "{:<10} {:>9}", "n_gt", c.n_gt)?;
        writeln!(f, "{:<10} {:>9}", "n_det", c.n_det)?;
        writeln!(f, "{:<10} {:>9}", "n_matched", c.n_matched)?;
        write!(f, "{:<10} {:>9}", "n_ignored", c.n_ignored)
    }
}

pub fn match_detections(gt: &[LabeledInstance], det: &[Detection], iou_thresh: f64) -> MatchSet {
    match_detections_with(gt, det, iou_thresh, IgnoreRule::Iou)
}

pub fn match_detections_with(gt: &[LabeledInstance], det: &[Detection], iou_thresh: f64, rule: IgnoreRule) -> MatchSet {
    let mut m = MatchSet::default();
    let mut live_det = Vec::with_capacity(det.len());
    for (j, d) in det.iter().enumerate() {
        let absorbed = gt.iter().filter(|g| g.ignore).any(|g| match rule {
            IgnoreRule::Iou => rotated_iou(&g.bbox, &d.bbox) >= iou_thresh,
            IgnoreRule::IntersectionOverDetection(level) => {
                intersection_area(&g.bbox, &d.bbox) / d.bbox.area() >= level
            }
        });
        if absorbed {
            m.ignored_det.push(j);
        } else {
            live_det.push(j);
        }
    }
    let care_gt: Vec<usize> = gt.iter().enumerate().filter(|(_, g)| !g.ignore).map(|(i, _)| i).collect();
    let mut candidates = Vec::new();
    for &i in &care_gt {
        for &j in &live_det {
            let iou = rotated_iou(&gt[i].bbox, &det[j].bbox);
            if iou >= iou_thresh {
                candidates.push((i, j, iou));
            }
        }
    }
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut gt_used = vec![false; gt.len()];
    let mut det_used = vec![false; det.len()];
    for (i, j, iou) in candidates {
        if !gt_used[i] && !det_used[j] {
            gt_used[i] = true;
            det_used[j] = true;
            m.pairs.push((i, j, iou));
        }
    }
    m.unmatched_gt = care_gt.into_iter().filter(|&i| !gt_used[i]).collect();
    m.unmatched_det = live_det.into_iter().filter(|&j| !det_used[j]).collect();
    m
}

pub fn prf(m: &MatchSet) -> EvalReport {
    EvalReport::from_counts(m.counts())
}

/// Counts of care-instance angles over `n_bins` equal bins of `[-pi/2, pi/2)`.
pub fn angle_histogram(data: &[AnnotatedImage], n_bins: usize) -> Vec<usize> {
    assert!(n_bins >= 1, "need at least one bin");
    let mut counts = vec![0; n_bins];
    for inst in data.iter().flat_map(|img| &img.instances).filter(|i| !i.ignore) {
        let k = ((inst.bbox.theta() + FRAC_PI_2) / PI * n_bins as f64).floor() as usize;
        counts[k.min(n_bins - 1)] += 1;
    }
    counts
}

/// `bin_lo,bin_hi,count` rows (radians) with a header line.
pub fn histogram_csv(counts: &[usize]) -> String {
    let n = counts.len() as f64;
    let mut s = String::from("bin_lo,bin_hi,count\n");
    for (k, c) in counts.iter().enumerate() {
        let lo = -FRAC_PI_2 + PI * k as f64 / n;
        let hi = -FRAC_PI_2 + PI * (k + 1) as f64 / n;
        s.push_str(&format!("{lo:.6},{hi:.6},{c}\n"));
    }
    s
}
