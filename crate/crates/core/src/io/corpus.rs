//! Corpus directories: one `gt_<id>.txt` (or `res_<id>.txt`) per image plus
//! an optional `manifest.json` carrying canvas sizes, since the annotation
//! files themselves do not record them.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{at, Error, Result};
use crate::io::icdar::{parse_detections, parse_icdar, write_detections, write_icdar};
use crate::pipeline::Detection;
use crate::sampling::AnnotatedImage;

pub const GT_PREFIX: &str = "gt_";
pub const DET_PREFIX: &str = "res_";
pub const MANIFEST: &str = "manifest.json";
/// Canvas assumed for images missing from the manifest (ICDAR 2015 frames).
pub const DEFAULT_CANVAS: (f64, f64) = (1280.0, 720.0);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    id: String,
    width: f64,
    height: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct Manifest {
    images: Vec<ManifestEntry>,
}

/// `(id, path)` of every `<prefix><id>.txt` file in `dir`, sorted by id.
fn list(dir: &Path, prefix: &str) -> Result<Vec<(String, std::path::PathBuf)>> {
    let mut out = Vec::new();
    for entry in at(dir, fs::read_dir(dir))? {
        let path = at(dir, entry)?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        if let Some(id) = name.strip_prefix(prefix).and_then(|r| r.strip_suffix(".txt")) {
            out.push((id.to_string(), path.clone()));
        }
    }
    out.sort();
    Ok(out)
}

fn with_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", path.display()) },
        other => other,
    })
}

pub fn read_corpus(dir: &Path, default_canvas: (f64, f64)) -> Result<Vec<AnnotatedImage>> {
    let manifest = dir.join(MANIFEST);
    let sizes: BTreeMap<String, (f64, f64)> = match fs::read_to_string(&manifest) {
        Ok(text) => {
            let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{MANIFEST}: {e}")))?;
            m.images.into_iter().map(|e| (e.id, (e.width, e.height))).collect()
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
        Err(e) => return Err(Error::IoAt { path: manifest, source: e }),
    };
    list(dir, GT_PREFIX)?
        .into_iter()
        .map(|(id, path)| {
            let text = at(&path, fs::read_to_string(&path))?;
            let instances = with_file(&path, parse_icdar(&text))?;
            let (w, h) = sizes.get(&id).copied().unwrap_or(default_canvas);
            AnnotatedImage::new(id, w, h, instances)
        })
        .collect()
}

pub fn write_corpus(dir: &Path, images: &[AnnotatedImage]) -> Result<()> {
    at(dir, fs::create_dir_all(dir))?;
    let mut sorted: Vec<&AnnotatedImage> = images.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    for img in &sorted {
        let path = dir.join(format!("{GT_PREFIX}{}.txt", img.id));
        at(&path, fs::write(&path, write_icdar(&img.instances)))?;
    }
    let manifest = Manifest {
        images: sorted.iter().map(|i| ManifestEntry { id: i.id.clone(), width: i.width, height: i.height }).collect(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("plain data serializes");
    let path = dir.join(MANIFEST);
    at(&path, fs::write(&path, text + "\n"))?;
    Ok(())
}

pub fn read_detections(dir: &Path) -> Result<BTreeMap<String, Vec<Detection>>> {
    list(dir, DET_PREFIX)?
        .into_iter()
        .map(|(id, path)| {
            let text = at(&path, fs::read_to_string(&path))?;
            Ok((id, with_file(&path, parse_detections(&text))?))
        })
        .collect()
}

pub fn write_detection_file(dir: &Path, id: &str, dets: &[Detection]) -> Result<()> {
    at(dir, fs::create_dir_all(dir))?;
    let path = dir.join(format!("{DET_PREFIX}{id}.txt"));
    at(&path, fs::write(&path, write_detections(dets)))?;
    Ok(())
}
