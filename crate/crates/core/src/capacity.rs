//! A stand-in for training a detector with limited capacity.
//!
//! The learner looks at the training instances it is allowed to use and
//! turns them into an [`OracleDetectorConfig`]: the detector is competent
//! on the geometry span it saw, and how reliably it fires there depends on
//! how many instances it saw and on how wide that span is compared with its
//! capacity. Spreading a fixed capacity over a wide span, or learning from
//! few instances, both lower the detection rate.

use std::f64::consts::PI;

use crate::evaluation::{match_detections, EvalCounts, EvalReport, DEFAULT_MATCH_IOU};
use crate::pipeline::{oracle_detect, OracleDetectorConfig};
use crate::range::{in_feasible, GeometryRange};
use crate::rng::Rng;
use crate::sampling::{sample_dataset, AnnotatedImage, SamplingMode};

/// One geometry unit: one octave of short side times pi/6 of angle.
const ANGLE_UNIT: f64 = PI / 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityLearner {
    /// Geometry span (in units) the detector can absorb without dilution.
    pub capacity: f64,
    /// Training-set size at which the detection rate reaches half its cap.
    pub half_saturation: f64,
}

impl Default for CapacityLearner {
    fn default() -> Self {
        Self { capacity: 4.0, half_saturation: 50.0 }
    }
}

/// Octaves of short side times pi/6-units of angle spanned by `boxes`,
/// each factor floored at one unit.
pub fn geometry_spread(h_min: f64, h_max: f64, a_min: f64, a_max: f64) -> f64 {
    let octaves = (h_max / h_min).log2().max(1.0);
    let angle_units = ((a_max - a_min) / ANGLE_UNIT).max(1.0);
    octaves * angle_units
}

impl CapacityLearner {
    /// Trains on the care instances of `train` that fall in `train_range`;
    /// everything else is treated as don't-care.
    pub fn fit(&self, train: &[AnnotatedImage], train_range: &GeometryRange) -> OracleDetectorConfig {
        let used: Vec<_> = train
            .iter()
            .flat_map(|img| &img.instances)
            .filter(|i| !i.ignore && in_feasible(train_range, &i.bbox))
            .map(|i| (i.bbox.h(), i.bbox.theta()))
            .collect();
        if used.is_empty() {
            let mut cfg = OracleDetectorConfig::perfect(train_range.clone());
            cfg.p_in = 0.0;
            return cfg;
        }
        let fold =
            |f: fn(f64, f64) -> f64, init: f64, pick: fn(&(f64, f64)) -> f64| used.iter().map(pick).fold(init, f);
        let h_min = fold(f64::min, f64::MAX, |u| u.0);
        let h_max = fold(f64::max, f64::MIN, |u| u.0);
        let a_min = fold(f64::min, f64::MAX, |u| u.1);
        let a_max = fold(f64::max, f64::MIN, |u| u.1);
        let n = used.len() as f64;
        let data = n / (n + self.half_saturation);
        let dilution = (self.capacity / geometry_spread(h_min, h_max, a_min, a_max)).min(1.0).sqrt();
        let competence =
            GeometryRange::new(h_min, h_max, vec![(a_min, a_max)]).expect("observed span is a valid range");
        let mut cfg = OracleDetectorConfig::perfect(competence);
        cfg.p_in = data * dilution;
        cfg
    }
}

/// Scores a single-header detector on a corpus.
pub fn evaluate_detector(cfg: &OracleDetectorConfig, test: &[AnnotatedImage], rng: &mut Rng) -> EvalReport {
    let counts: EvalCounts = test
        .iter()
        .map(|img| {
            let dets = oracle_detect(cfg, img, rng);
            match_detections(&img.instances, &dets, DEFAULT_MATCH_IOU).counts()
        })
        .sum();
    EvalReport::from_counts(counts)
}

/// Outcome of training on one sampled corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub mode: SamplingMode,
    pub train_instances: usize,
    pub detector: OracleDetectorConfig,
    pub report: EvalReport,
}

/// Builds the GSS, GVS and LGSS training corpora from `train`, fits the
/// learner on each (GSS and LGSS restricted to `eval_range`, GVS to
/// `wide_range`), and evaluates every fitted detector on `test`.
pub fn sampling_study(
    learner: &CapacityLearner,
    train: &[AnnotatedImage],
    test: &[AnnotatedImage],
    eval_range: &GeometryRange,
    wide_range: &GeometryRange,
    rng: &mut Rng,
) -> crate::Result<Vec<StudyRow>> {
    let mut rows = Vec::with_capacity(3);
    for mode in [SamplingMode::Gss, SamplingMode::Gvs, SamplingMode::Lgss] {
        let corpus = sample_dataset(mode, train, eval_range, wide_range, &mut rng.split())?;
        let range = if mode == SamplingMode::Gvs { wide_range } else { eval_range };
        let detector = learner.fit(&corpus, range);
        let train_instances =
            corpus.iter().flat_map(|i| &i.instances).filter(|i| !i.ignore && in_feasible(range, &i.bbox)).count();
        let report = evaluate_detector(&detector, test, &mut rng.split());
        rows.push(StudyRow { mode, train_instances, detector, report });
    }
    Ok(rows)
}
