//! JSON configuration.
//!
//! Angles may be given as radians or as `pi` expressions such as `"pi/4"`,
//! `"-pi/2"` or `"3pi/8"`. Every section is optional; the defaults are the
//! eight-branch module over short sides [10, 200] with a noiseless detector
//! competent on that module's canonical range.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "gnm": {
//!     "global_domain": { "scale": [10, 200], "angles": [["-pi/2", "pi/2"]] },
//!     "branches": [
//!       { "snu": "s",    "onu": "o", "feasible": { "scale": [10, 80],  "angles": [["-pi/2", "pi/2"]] } },
//!       { "snu": "s1/2", "onu": "o", "feasible": { "scale": [60, 200], "angles": [["-pi/2", "pi/2"]] } }
//!     ]
//!   }
//! }
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::evaluation::DEFAULT_MATCH_IOU;
use crate::gnm::{canonical_range_of, BranchConfig, GnmConfig, OnuKind, SnuKind};
use crate::io::corpus::DEFAULT_CANVAS;
use crate::pipeline::{DiscardFrame, OracleDetectorConfig, PipelineConfig, DEFAULT_NMS_IOU};
use crate::range::GeometryRange;
use crate::sampling::{default_eval_range, default_wide_range, DEFAULT_AUGMENTATIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AugmentMode {
    #[default]
    PerBranch,
    Random,
}

/// Fully validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub seed: u64,
    pub pipeline: PipelineConfig,
    pub iou_thresh: f64,
    pub augment_k: usize,
    pub augment_mode: AugmentMode,
    pub eval_range: GeometryRange,
    pub wide_range: GeometryRange,
    pub synth_domain: GeometryRange,
    pub canvas: (f64, f64),
    pub train_dir: Option<PathBuf>,
    pub test_dir: Option<PathBuf>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        parse_config("{}").expect("empty config is valid")
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawAngle {
    Radians(f64),
    Expr(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    scale: [f64; 2],
    angles: Vec<[RawAngle; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBranch {
    snu: SnuKind,
    onu: OnuKind,
    feasible: RawRange,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGnm {
    branches: Vec<RawBranch>,
    global_domain: Option<RawRange>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetector {
    competence: Option<RawRange>,
    p_in: Option<f64>,
    p_out: Option<f64>,
    loc_sigma: Option<f64>,
    angle_sigma: Option<f64>,
    score_in: Option<f64>,
    score_out: Option<f64>,
    score_sigma: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    eval_range: Option<RawRange>,
    wide_range: Option<RawRange>,
    augment_k: Option<usize>,
    augment_mode: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSynth {
    domain: Option<RawRange>,
    canvas: Option<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDatasets {
    train: Option<PathBuf>,
    test: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    nms_iou: Option<f64>,
    iou_thresh: Option<f64>,
    discard_frame: Option<String>,
    gnm: Option<RawGnm>,
    detector: Option<RawDetector>,
    sampling: Option<RawSampling>,
    synth: Option<RawSynth>,
    datasets: Option<RawDatasets>,
}

/// `[-][k][*]pi[/n]` or a plain number.
fn parse_angle_expr(s: &str) -> Option<f64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(v) = t.parse::<f64>() {
        return Some(v);
    }
    let (sign, rest) = match t.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, t.as_str()),
    };
    let pos = rest.find("pi")?;
    let coef = rest[..pos].trim_end_matches('*');
    let k = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().ok()? };
    let tail = &rest[pos + 2..];
    let n = match tail.strip_prefix('/') {
        Some(d) => d.parse::<f64>().ok().filter(|d| *d != 0.0)?,
        None if tail.is_empty() => 1.0,
        None => return None,
    };
    Some(sign * k * PI / n)
}

fn angle(a: &RawAngle, key: &str) -> Result<f64> {
    match a {
        RawAngle::Radians(v) => Ok(*v),
        RawAngle::Expr(s) => {
            parse_angle_expr(s).ok_or_else(|| Error::Config(format!("{key}: cannot read angle `{s}`")))
        }
    }
}

fn range(r: &RawRange, key: &str) -> Result<GeometryRange> {
    let angles = r.angles.iter().map(|[lo, hi]| Ok((angle(lo, key)?, angle(hi, key)?))).collect::<Result<Vec<_>>>()?;
    GeometryRange::new(r.scale[0], r.scale[1], angles).map_err(|e| Error::Config(format!("{key}: {e}")))
}

fn opt_range(r: Option<&RawRange>, key: &str, default: GeometryRange) -> Result<GeometryRange> {
    r.map_or(Ok(default), |r| range(r, key))
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;

    let gnm = match &raw.gnm {
        None => GnmConfig::paper_default(),
        Some(g) => {
            let branches = g
                .branches
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    Ok(BranchConfig::new(b.snu, b.onu, range(&b.feasible, &format!("gnm.branches[{i}].feasible"))?))
                })
                .collect::<Result<Vec<_>>>()?;
            let domain = opt_range(
                g.global_domain.as_ref(),
                "gnm.global_domain",
                GnmConfig::paper_default().global_domain().clone(),
            )?;
            // coverage failures keep their own error variant
            GnmConfig::new(branches, domain)?
        }
    };

    let mut detector = OracleDetectorConfig::perfect(canonical_range_of(&gnm));
    if let Some(d) = &raw.detector {
        if let Some(c) = &d.competence {
            detector.competence = range(c, "detector.competence")?;
        }
        let fields = [
            (&mut detector.p_in, d.p_in),
            (&mut detector.p_out, d.p_out),
            (&mut detector.loc_sigma, d.loc_sigma),
            (&mut detector.angle_sigma, d.angle_sigma),
            (&mut detector.score_in, d.score_in),
            (&mut detector.score_out, d.score_out),
            (&mut detector.score_sigma, d.score_sigma),
        ];
        for (slot, value) in fields {
            if let Some(v) = value {
                *slot = v;
            }
        }
    }
    detector.validate().map_err(|e| Error::Config(format!("detector: {e}")))?;

    let discard = match raw.discard_frame.as_deref() {
        None | Some("original") => DiscardFrame::Original,
        Some("branch") => DiscardFrame::Branch,
        Some(other) => {
            return Err(Error::Config(format!("discard_frame: expected `original` or `branch`, got `{other}`")))
        }
    };
    let mut pipeline = PipelineConfig::new(gnm, detector);
    pipeline.nms_iou = raw.nms_iou.unwrap_or(DEFAULT_NMS_IOU);
    pipeline.discard = discard;
    pipeline.validate().map_err(|e| Error::Config(format!("nms_iou: {e}")))?;

    let iou_thresh = raw.iou_thresh.unwrap_or(DEFAULT_MATCH_IOU);
    if !(iou_thresh > 0.0 && iou_thresh < 1.0) {
        return Err(Error::Config(format!("iou_thresh: must lie in (0, 1), got {iou_thresh}")));
    }

    let sampling = raw.sampling.as_ref();
    let augment_mode = match sampling.and_then(|s| s.augment_mode.as_deref()) {
        None | Some("per_branch") => AugmentMode::PerBranch,
        Some("random") => AugmentMode::Random,
        Some(other) => {
            return Err(Error::Config(format!(
                "sampling.augment_mode: expected `per_branch` or `random`, got `{other}`"
            )))
        }
    };
    let eval_range =
        opt_range(sampling.and_then(|s| s.eval_range.as_ref()), "sampling.eval_range", default_eval_range())?;
    let wide_range =
        opt_range(sampling.and_then(|s| s.wide_range.as_ref()), "sampling.wide_range", default_wide_range())?;
    let augment_k = sampling.and_then(|s| s.augment_k).unwrap_or(DEFAULT_AUGMENTATIONS);

    let synth = raw.synth.as_ref();
    let synth_domain =
        opt_range(synth.and_then(|s| s.domain.as_ref()), "synth.domain", pipeline.gnm.global_domain().clone())?;
    let canvas = synth.and_then(|s| s.canvas).map(|[w, h]| (w, h)).unwrap_or(DEFAULT_CANVAS);
    if !(canvas.0 > 0.0 && canvas.1 > 0.0) {
        return Err(Error::Config("synth.canvas: width and height must be positive".into()));
    }

    Ok(ConfigFile {
        seed: raw.seed.unwrap_or(0),
        pipeline,
        iou_thresh,
        augment_k,
        augment_mode,
        eval_range,
        wide_range,
        synth_domain,
        canvas,
        train_dir: raw.datasets.as_ref().and_then(|d| d.train.clone()),
        test_dir: raw.datasets.as_ref().and_then(|d| d.test.clone()),
    })
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = crate::error::at(path, std::fs::read_to_string(path))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn angle_expressions() {
        assert_eq!(parse_angle_expr("pi/4"), Some(FRAC_PI_4));
        assert_eq!(parse_angle_expr("-pi/2"), Some(-FRAC_PI_2));
        assert_eq!(parse_angle_expr("3pi/8"), Some(3.0 * PI / 8.0));
        assert_eq!(parse_angle_expr("-3*pi/8"), Some(-3.0 * PI / 8.0));
        assert_eq!(parse_angle_expr("pi"), Some(PI));
        assert_eq!(parse_angle_expr("0.25"), Some(0.25));
        assert_eq!(parse_angle_expr("pi/0"), None);
        assert_eq!(parse_angle_expr("tau"), None);
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(
            r#"{"gnm": {"branches": [
                {"snu": "s", "onu": "o", "feasible": {"scale": [10, 80], "angles": [["-pi/2", "pi/2"]]}},
                {"snu": "s1/2", "onu": "o", "feasible": {"scale": [60, 200], "angles": [["-pi/2", "pi/2"]]}}
            ]}}"#,
        )
        .unwrap();
        assert_eq!(c.pipeline.nms_iou, 0.2);
        assert_eq!(c.augment_k, 7);
        assert_eq!(c.iou_thresh, 0.5);
        assert_eq!(c.pipeline.gnm.branches().len(), 2);
        assert_eq!(c.pipeline.detector.competence.scale_max(), 100.0);
        assert_eq!(c.augment_mode, AugmentMode::PerBranch);
    }

    #[test]
    fn coverage_violation_is_dedicated() {
        let err = parse_config(
            r#"{"gnm": {"branches": [
                {"snu": "s", "onu": "o", "feasible": {"scale": [10, 80], "angles": [["-pi/2", "pi/2"]]}}
            ]}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Coverage { .. }), "{err}");
    }

    #[test]
    fn unknown_and_bad_keys_are_named() {
        let err = parse_config(r#"{"sede": 1}"#).unwrap_err().to_string();
        assert!(err.contains("sede"), "{err}");
        let err = parse_config(r#"{"detector": {"p_in": 0.1, "p_out": 0.5}}"#).unwrap_err().to_string();
        assert!(err.contains("detector"), "{err}");
        let err = parse_config(
            r#"{"gnm": {"branches": [{"snu": "s3", "onu": "o", "feasible": {"scale": [1, 2], "angles": [[0, 1]]}}]}}"#,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("s3"), "{err}");
        assert!(parse_config(r#"{"nms_iou": 1.5}"#).is_err());
        assert!(parse_config(r#"{"discard_frame": "sideways"}"#).is_err());
    }

    #[test]
    fn empty_config_is_paper_default() {
        let c = ConfigFile::default();
        assert_eq!(c.pipeline.gnm, GnmConfig::paper_default());
        assert_eq!(c.seed, 0);
    }
}
