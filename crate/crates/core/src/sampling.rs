//! Geometry-aware sampling of annotated images.
//!
//! Everything here works on annotations only: an "image" is a canvas size
//! plus its instances, and transforming it means mapping every box through
//! one similarity while growing the canvas to hold the rotated content.

use std::f64::consts::FRAC_PI_2;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{apply_affine_box, box_corners, rotated_iou, wrap_angle, AffineTransform, Point, RotatedBox};
use crate::gnm::GnmConfig;
use crate::range::{in_feasible, GeometryRange};
use crate::rng::Rng;

/// Long-side/short-side ratios drawn for synthetic boxes.
pub const SYNTH_ASPECT: (f64, f64) = (1.0, 4.0);
/// Maximum pairwise IoU between synthetic boxes of one image.
pub const SYNTH_MAX_IOU: f64 = 0.05;
const SYNTH_TRIES: usize = 500;

/// Default number of augmented copies per image.
pub const DEFAULT_AUGMENTATIONS: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledInstance {
    pub bbox: RotatedBox,
    pub text: String,
    pub ignore: bool,
}

impl LabeledInstance {
    pub fn new(bbox: RotatedBox, text: impl Into<String>) -> Self {
        let text = text.into();
        let ignore = text == "###";
        Self { bbox, text, ignore }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedImage {
    pub id: String,
    pub width: f64,
    pub height: f64,
    pub instances: Vec<LabeledInstance>,
}

impl AnnotatedImage {
    pub fn new(id: impl Into<String>, width: f64, height: f64, instances: Vec<LabeledInstance>) -> Result<Self> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(Error::InvalidBox(format!("image size must be positive, got {width}x{height}")));
        }
        Ok(Self { id: id.into(), width, height, instances })
    }

    pub fn care_indices(&self) -> Vec<usize> {
        self.instances.iter().enumerate().filter(|(_, i)| !i.ignore).map(|(k, _)| k).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleTarget {
    pub scale: f64,
    pub angle: f64,
}

/// Draws a short side uniformly from the scale interval and an angle
/// uniformly from the union of angle intervals.
pub fn target_geometry(rng: &mut Rng, domain: &GeometryRange) -> SampleTarget {
    let scale = rng.uniform(domain.scale_min(), domain.scale_max());
    let ivs = domain.angle_intervals();
    let total: f64 = ivs.iter().map(|(lo, hi)| hi - lo).sum();
    let angle = if total <= 0.0 {
        ivs[rng.index(ivs.len())].0
    } else {
        let mut u = rng.uniform(0.0, total);
        let mut pick = ivs[ivs.len() - 1];
        for &(lo, hi) in ivs {
            if u < hi - lo {
                pick = (lo, hi);
                break;
            }
            u -= hi - lo;
        }
        (pick.0 + u.min(pick.1 - pick.0)).clamp(pick.0, pick.1)
    };
    SampleTarget { scale, angle: wrap_angle(angle) }
}

/// A similarity together with the canvas it maps into.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanvasTransform {
    pub affine: AffineTransform,
    pub width: f64,
    pub height: f64,
}

impl CanvasTransform {
    /// Scale and rotate about the image center, growing the canvas to the
    /// bounding extent of the rotated image.
    pub fn about_center(width: f64, height: f64, scale: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let (s, c) = (s.abs(), c.abs());
        let new_w = scale * (width * c + height * s);
        let new_h = scale * (width * s + height * c);
        let affine = AffineTransform::similarity_about(
            scale,
            angle,
            Point::new(0.5 * width, 0.5 * height),
            Point::new(0.5 * new_w, 0.5 * new_h),
        );
        Self { affine, width: new_w, height: new_h }
    }

    pub fn apply(&self, img: &AnnotatedImage) -> AnnotatedImage {
        let instances = img
            .instances
            .iter()
            .map(|inst| LabeledInstance {
                bbox: apply_affine_box(&self.affine, &inst.bbox).expect("similarity by construction"),
                ..inst.clone()
            })
            .collect();
        AnnotatedImage { id: img.id.clone(), width: self.width, height: self.height, instances }
    }
}

/// Transform that brings `inst` to the target short side and angle.
pub fn fit_transform(inst: &LabeledInstance, target: SampleTarget, img: &AnnotatedImage) -> CanvasTransform {
    let scale = target.scale / inst.bbox.h();
    let mut angle = target.angle - inst.bbox.theta();
    // same box either way; keep the rotation small
    if angle > FRAC_PI_2 {
        angle -= std::f64::consts::PI;
    } else if angle < -FRAC_PI_2 {
        angle += std::f64::consts::PI;
    }
    CanvasTransform::about_center(img.width, img.height, scale, angle)
}

/// How augmentation targets are chosen.
#[derive(Debug, Clone)]
pub enum AugmentTargets<'a> {
    /// Every copy draws its target uniformly from the domain.
    Random(&'a GeometryRange),
    /// Copies cycle through the branches, drawing each target inside one
    /// branch's feasible range; branches the original image already feeds
    /// are served last.
    PerBranch(&'a GnmConfig),
}

/// `k` rotated/resized copies of `img`, each fitting one randomly chosen
/// non-ignore instance to a fresh target. Returns nothing when the image
/// has no usable instance.
pub fn geometry_aware_augment(
    img: &AnnotatedImage,
    rng: &mut Rng,
    targets: &AugmentTargets,
    k: usize,
) -> Vec<AnnotatedImage> {
    let care = img.care_indices();
    if care.is_empty() || k == 0 {
        return Vec::new();
    }
    let branch_order: Vec<usize> = match targets {
        AugmentTargets::Random(_) => Vec::new(),
        AugmentTargets::PerBranch(gnm) => {
            let fed = |b: usize| {
                let br = &gnm.branches()[b];
                img.instances.iter().any(|i| !i.ignore && br.accepts(&i.bbox))
            };
            let n = gnm.branches().len();
            (0..n).filter(|&b| !fed(b)).chain((0..n).filter(|&b| fed(b))).collect()
        }
    };
    (0..k)
        .map(|j| {
            let chosen = &img.instances[care[rng.index(care.len())]];
            let target = match targets {
                AugmentTargets::Random(domain) => target_geometry(rng, domain),
                AugmentTargets::PerBranch(gnm) => {
                    let b = branch_order[j % branch_order.len()];
                    target_geometry(rng, &gnm.branches()[b].feasible)
                }
            };
            let mut out = fit_transform(chosen, target, img).apply(img);
            out.id = format!("{}_aug{}", img.id, j + 1);
            out
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Fit one instance per image into the evaluation range.
    Gss,
    /// Fit one instance per image into the wide range.
    Gvs,
    /// Keep only images that already have an instance in the evaluation range.
    Lgss,
}

impl FromStr for SamplingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gss" => Ok(Self::Gss),
            "gvs" => Ok(Self::Gvs),
            "lgss" => Ok(Self::Lgss),
            _ => Err(Error::UnknownKind { what: "sampling mode", value: s.to_string() }),
        }
    }
}

/// Short sides in [20, 40] px, angles within pi/12 of horizontal.
pub fn default_eval_range() -> GeometryRange {
    let a = std::f64::consts::PI / 12.0;
    GeometryRange::new(20.0, 40.0, vec![(-a, a)]).expect("static range")
}

/// Short sides up to 90 px (floored at 1 px), any angle.
pub fn default_wide_range() -> GeometryRange {
    GeometryRange::all_angles(1.0, 90.0).expect("static range")
}

/// One sampled image and, for the fitting modes, the index of the instance
/// that was fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledImage {
    pub image: AnnotatedImage,
    pub chosen: Option<usize>,
}

pub fn sample_dataset_detailed(
    mode: SamplingMode,
    data: &[AnnotatedImage],
    eval_range: &GeometryRange,
    wide_range: &GeometryRange,
    rng: &mut Rng,
) -> Result<Vec<SampledImage>> {
    if data.is_empty() {
        return Err(Error::Config("sampling needs a non-empty corpus".into()));
    }
    let mut out = Vec::with_capacity(data.len());
    for img in data {
        let mut r = rng.split();
        match mode {
            SamplingMode::Gss | SamplingMode::Gvs => {
                let care = img.care_indices();
                if care.is_empty() {
                    continue;
                }
                let range = if mode == SamplingMode::Gss { eval_range } else { wide_range };
                let idx = care[r.index(care.len())];
                let target = target_geometry(&mut r, range);
                let image = fit_transform(&img.instances[idx], target, img).apply(img);
                out.push(SampledImage { image, chosen: Some(idx) });
            }
            SamplingMode::Lgss => {
                if !img.instances.iter().any(|i| !i.ignore && in_feasible(eval_range, &i.bbox)) {
                    continue;
                }
                let mut image = img.clone();
                for inst in &mut image.instances {
                    if !in_feasible(eval_range, &inst.bbox) {
                        inst.ignore = true;
                    }
                }
                out.push(SampledImage { image, chosen: None });
            }
        }
    }
    Ok(out)
}

pub fn sample_dataset(
    mode: SamplingMode,
    data: &[AnnotatedImage],
    eval_range: &GeometryRange,
    wide_range: &GeometryRange,
    rng: &mut Rng,
) -> Result<Vec<AnnotatedImage>> {
    Ok(sample_dataset_detailed(mode, data, eval_range, wide_range, rng)?.into_iter().map(|s| s.image).collect())
}

/// Rotates every image by its own uniform angle in `[-pi/2, pi/2)`.
pub fn gen_rotated_benchmark(data: &[AnnotatedImage], rng: &mut Rng) -> Vec<AnnotatedImage> {
    data.iter()
        .map(|img| {
            let angle = rng.uniform(-FRAC_PI_2, FRAC_PI_2);
            CanvasTransform::about_center(img.width, img.height, 1.0, angle).apply(img)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub images: Vec<AnnotatedImage>,
    /// Boxes that could not be placed within the retry budget.
    pub shortfall: usize,
}

/// Synthetic images whose boxes have short side and angle uniform over
/// `domain`, lie fully inside the canvas and barely overlap each other.
pub fn gen_synthetic(
    rng: &mut Rng,
    n_images: usize,
    per_image: usize,
    domain: &GeometryRange,
    canvas: (f64, f64),
) -> Result<SynthCorpus> {
    if n_images == 0 || per_image == 0 {
        return Err(Error::Config("image and box counts must be positive".into()));
    }
    let (cw, ch) = canvas;
    if !(cw > 0.0 && ch > 0.0) {
        return Err(Error::Config(format!("canvas must be positive, got {cw}x{ch}")));
    }
    let mut shortfall = 0;
    let mut images = Vec::with_capacity(n_images);
    for n in 0..n_images {
        let mut r = rng.split();
        let mut boxes: Vec<RotatedBox> = Vec::with_capacity(per_image);
        for _ in 0..per_image {
            let placed = (0..SYNTH_TRIES).find_map(|_| {
                let t = target_geometry(&mut r, domain);
                let w = t.scale * r.uniform(SYNTH_ASPECT.0, SYNTH_ASPECT.1);
                let proto = RotatedBox::new(0.0, 0.0, t.scale, w, t.angle).ok()?;
                let corners = box_corners(&proto);
                let ex = corners.iter().map(|p| p.x.abs()).fold(0.0, f64::max);
                let ey = corners.iter().map(|p| p.y.abs()).fold(0.0, f64::max);
                if 2.0 * ex > cw || 2.0 * ey > ch {
                    return None;
                }
                let b = proto.with_center(r.uniform(ex, cw - ex), r.uniform(ey, ch - ey));
                boxes.iter().all(|o| rotated_iou(o, &b) < SYNTH_MAX_IOU).then_some(b)
            });
            match placed {
                Some(b) => boxes.push(b),
                None => shortfall += 1,
            }
        }
        let instances =
            boxes.into_iter().enumerate().map(|(k, b)| LabeledInstance::new(b, format!("word{k}"))).collect();
        images.push(AnnotatedImage::new(format!("synth_{n:05}"), cw, ch, instances)?);
    }
    Ok(SynthCorpus { images, shortfall })
}
