//! ICDAR 2015 style annotation lines: `x1,y1,x2,y2,x3,y3,x4,y4,text` for
//! ground truth and `x1,...,y4,score` for detections. A transcription of
//! `###` marks a don't-care region.

use crate::error::{Error, Result};
use crate::geometry::{box_corners, quad_to_rbox, Point, Quad, RotatedBox};
use crate::pipeline::Detection;
use crate::sampling::LabeledInstance;

pub const DONT_CARE: &str = "###";

fn parse_quad(fields: &[&str], line: usize) -> Result<(RotatedBox, usize)> {
    let numeric = fields.iter().take_while(|f| f.trim().parse::<f64>().is_ok()).count();
    if numeric < 8 {
        let msg = if numeric % 2 == 1 {
            format!("odd coordinate count ({numeric})")
        } else {
            format!("expected 8 coordinates, found {numeric}")
        };
        return Err(Error::Parse { line, msg });
    }
    let v: Vec<f64> = fields[..8].iter().map(|f| f.trim().parse().expect("checked above")).collect();
    let pts = [0, 2, 4, 6].map(|k| Point::new(v[k], v[k + 1]));
    let quad = Quad::new(pts).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
    let bbox = quad_to_rbox(&quad).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
    Ok((bbox, numeric))
}

/// Lines of the file, BOM stripped, paired with 1-based numbers; blank
/// lines dropped.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    text.lines().enumerate().map(|(k, l)| (k + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}

pub fn parse_icdar(text: &str) -> Result<Vec<LabeledInstance>> {
    lines(text)
        .map(|(n, l)| {
            let fields: Vec<&str> = l.split(',').collect();
            let (bbox, _) = parse_quad(&fields, n)?;
            let transcription = if fields.len() > 8 { fields[8..].join(",") } else { String::new() };
            Ok(LabeledInstance::new(bbox, transcription))
        })
        .collect()
}

/// Detection lines; a missing score reads as 1.
pub fn parse_detections(text: &str) -> Result<Vec<Detection>> {
    lines(text)
        .map(|(n, l)| {
            let fields: Vec<&str> = l.split(',').collect();
            let (bbox, numeric) = parse_quad(&fields, n)?;
            let score = match (numeric, fields.len()) {
                (8, 8) => 1.0,
                (9, 9) => fields[8].trim().parse::<f64>().expect("numeric"),
                _ => return Err(Error::Parse { line: n, msg: "expected 8 coordinates and an optional score".into() }),
            };
            if !(0.0..=1.0).contains(&score) {
                return Err(Error::Parse { line: n, msg: format!("score {score} outside [0, 1]") });
            }
            Ok(Detection { bbox, score, branch_index: 0 })
        })
        .collect()
}

fn fmt_coord(v: f64) -> String {
    let r = (v * 10.0).round() / 10.0;
    // avoid "-0.0"
    format!("{:.1}", if r == 0.0 { 0.0 } else { r })
}

/// Corners clockwise on screen, starting from the top-left-most one
/// (smallest `x + y`, then smallest `y`).
fn ordered_corners(b: &RotatedBox) -> [Point; 4] {
    let c = box_corners(b);
    let start = (0..4)
        .min_by(|&i, &j| (c[i].x + c[i].y).total_cmp(&(c[j].x + c[j].y)).then(c[i].y.total_cmp(&c[j].y)))
        .expect("four corners");
    [0, 1, 2, 3].map(|k| c[(start + k) % 4])
}

fn quad_fields(b: &RotatedBox) -> String {
    ordered_corners(b).iter().map(|p| format!("{},{}", fmt_coord(p.x), fmt_coord(p.y))).collect::<Vec<_>>().join(",")
}

pub fn write_icdar(instances: &[LabeledInstance]) -> String {
    instances
        .iter()
        .map(|i| format!("{},{}\n", quad_fields(&i.bbox), if i.ignore { DONT_CARE } else { &i.text }))
        .collect()
}

pub fn write_detections(dets: &[Detection]) -> String {
    dets.iter().map(|d| format!("{},{:.4}\n", quad_fields(&d.bbox), d.score)).collect()
}
