//! Simulated detection: a capacity-limited oracle detector and the
//! multi-branch inference path (transform, detect, back-project, discard,
//! merge).

use crate::error::{Error, Result};
use crate::geometry::{rotated_iou, RotatedBox};
use crate::gnm::GnmConfig;
use crate::range::{in_feasible, GeometryRange};
use crate::rng::Rng;
use crate::sampling::{AnnotatedImage, LabeledInstance};

pub const DEFAULT_NMS_IOU: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub bbox: RotatedBox,
    pub score: f64,
    pub branch_index: usize,
}

/// A detector that "sees" ground truth. Instances inside `competence` are
/// found with probability `p_in`, others with `p_out`; found boxes are
/// jittered by Gaussian noise on center and angle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleDetectorConfig {
    pub competence: GeometryRange,
    pub p_in: f64,
    pub p_out: f64,
    pub loc_sigma: f64,
    pub angle_sigma: f64,
    pub score_in: f64,
    pub score_out: f64,
    /// Spread of the score around `score_in`/`score_out`.
    pub score_sigma: f64,
}

impl OracleDetectorConfig {
    /// Noiseless detector that finds exactly the instances in `competence`.
    pub fn perfect(competence: GeometryRange) -> Self {
        Self {
            competence,
            p_in: 1.0,
            p_out: 0.0,
            loc_sigma: 0.0,
            angle_sigma: 0.0,
            score_in: 0.9,
            score_out: 0.3,
            score_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        if !(prob(self.p_in) && prob(self.p_out) && self.p_out <= self.p_in) {
            return Err(Error::Config(format!(
                "need 0 <= p_out <= p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        for (v, name) in
            [(self.loc_sigma, "loc_sigma"), (self.angle_sigma, "angle_sigma"), (self.score_sigma, "score_sigma")]
        {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be a non-negative number, got {v}")));
            }
        }
        if !(prob(self.score_in) && prob(self.score_out)) {
            return Err(Error::Config("scores must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

pub fn oracle_detect(cfg: &OracleDetectorConfig, img: &AnnotatedImage, rng: &mut Rng) -> Vec<Detection> {
    let mut out = Vec::new();
    for inst in img.instances.iter().filter(|i| !i.ignore) {
        let inside = in_feasible(&cfg.competence, &inst.bbox);
        let (p, score) = if inside { (cfg.p_in, cfg.score_in) } else { (cfg.p_out, cfg.score_out) };
        if !rng.bernoulli(p) {
            continue;
        }
        let b = &inst.bbox;
        let cx = rng.normal(b.cx(), cfg.loc_sigma);
        let cy = rng.normal(b.cy(), cfg.loc_sigma);
        let theta = rng.normal(b.theta(), cfg.angle_sigma);
        let bbox = b.with_center(cx, cy).with_theta(theta);
        let score = rng.normal(score, cfg.score_sigma).clamp(0.0, 1.0);
        out.push(Detection { bbox, score, branch_index: 0 });
    }
    out
}

/// Greedy rotated NMS. Candidates are visited by score (ties: lower branch,
/// then input order) and kept while their IoU with every kept box stays
/// below `iou_thresh`.
pub fn nms(dets: &[Detection], iou_thresh: f64) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| {
        dets[b].score.total_cmp(&dets[a].score).then(dets[a].branch_index.cmp(&dets[b].branch_index))
    });
    let mut kept: Vec<Detection> = Vec::new();
    for i in order {
        let d = &dets[i];
        if kept.iter().all(|k| rotated_iou(&k.bbox, &d.bbox) < iou_thresh) {
            kept.push(d.clone());
        }
    }
    kept
}

/// Frame in which a branch's detections are checked against its range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiscardFrame {
    /// Back-projected box against the branch's feasible range.
    #[default]
    Original,
    /// Branch-frame box against the image of the feasible range.
    Branch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub gnm: GnmConfig,
    pub detector: OracleDetectorConfig,
    pub nms_iou: f64,
    pub discard: DiscardFrame,
}

impl PipelineConfig {
    pub fn new(gnm: GnmConfig, detector: OracleDetectorConfig) -> Self {
        Self { gnm, detector, nms_iou: DEFAULT_NMS_IOU, discard: DiscardFrame::Original }
    }

    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        if !(self.nms_iou > 0.0 && self.nms_iou < 1.0) {
            return Err(Error::Config(format!("nms_iou must lie in (0, 1), got {}", self.nms_iou)));
        }
        Ok(())
    }
}

pub fn run_pipeline(cfg: &PipelineConfig, img: &AnnotatedImage, rng: &mut Rng) -> Vec<Detection> {
    let mut all = Vec::new();
    for (i, branch) in cfg.gnm.branches().iter().enumerate() {
        let mut r = rng.split();
        let (bh, bw) = branch.canvas(img.height, img.width);
        let view = AnnotatedImage {
            id: img.id.clone(),
            width: bw,
            height: bh,
            instances: img
                .instances
                .iter()
                .map(|inst| LabeledInstance {
                    bbox: branch.forward_box(&inst.bbox, img.height, img.width),
                    ..inst.clone()
                })
                .collect(),
        };
        let image_range = (cfg.discard == DiscardFrame::Branch).then(|| branch.canonical_image());
        for det in oracle_detect(&cfg.detector, &view, &mut r) {
            let back = branch.backward_box(&det.bbox, img.height, img.width);
            let keep = match &image_range {
                None => branch.accepts(&back),
                Some(range) => in_feasible(range, &det.bbox),
            };
            if keep {
                all.push(Detection { bbox: back, score: det.score, branch_index: i });
            }
        }
    }
    nms(&all, cfg.nms_iou)
}
