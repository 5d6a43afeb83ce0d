//! Multi-branch geometry normalization.
//!
//! Each branch pairs a scale unit (identity, 1/2 or 1/4 resolution) with an
//! orientation unit (identity, clockwise quarter turn, row flip, or both).
//! Boxes move through a branch with exactly the same map as the feature
//! grid, which is what makes the transformed annotation usable as a proxy
//! target and lets detections be projected back without loss.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RotatedBox;
use crate::range::{in_feasible, GeometryRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SnuKind {
    Identity,
    Half,
    Quarter,
}

impl SnuKind {
    pub const ALL: [SnuKind; 3] = [SnuKind::Identity, SnuKind::Half, SnuKind::Quarter];

    pub fn factor(self) -> f64 {
        match self {
            SnuKind::Identity => 1.0,
            SnuKind::Half => 0.5,
            SnuKind::Quarter => 0.25,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SnuKind::Identity => "s",
            SnuKind::Half => "s1/2",
            SnuKind::Quarter => "s1/4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum OnuKind {
    Id,
    Rot,
    Flip,
    RotFlip,
}

impl OnuKind {
    pub const ALL: [OnuKind; 4] = [OnuKind::Id, OnuKind::Rot, OnuKind::Flip, OnuKind::RotFlip];

    pub fn as_str(self) -> &'static str {
        match self {
            OnuKind::Id => "o",
            OnuKind::Rot => "o_r",
            OnuKind::Flip => "o_f",
            OnuKind::RotFlip => "o_rf",
        }
    }

    pub fn swaps_axes(self) -> bool {
        matches!(self, OnuKind::Rot | OnuKind::RotFlip)
    }

    /// Angle sub-range this unit brings into `[0, pi/4]`.
    pub fn source_interval(self) -> (f64, f64) {
        use std::f64::consts::FRAC_PI_4;
        match self {
            OnuKind::Id => (0.0, FRAC_PI_4),
            OnuKind::Rot => (-FRAC_PI_2, -FRAC_PI_4),
            OnuKind::Flip => (-FRAC_PI_4, 0.0),
            OnuKind::RotFlip => (FRAC_PI_4, FRAC_PI_2),
        }
    }

    /// Box angle after the unit, before canonicalization. Each of these maps
    /// is an involution modulo pi.
    fn map_angle(self, theta: f64) -> f64 {
        match self {
            OnuKind::Id => theta,
            OnuKind::Rot => {
                if theta >= 0.0 {
                    theta - FRAC_PI_2
                } else {
                    theta + FRAC_PI_2
                }
            }
            OnuKind::Flip => -theta,
            OnuKind::RotFlip => {
                if theta >= 0.0 {
                    -theta + FRAC_PI_2
                } else {
                    -theta - FRAC_PI_2
                }
            }
        }
    }

    /// Image of a closed angle interval, as closed pieces within `[-pi/2, pi/2]`.
    fn map_interval(self, (lo, hi): (f64, f64)) -> Vec<(f64, f64)> {
        let piece = |a: f64, b: f64| {
            let (x, y) = (self.map_angle(a), self.map_angle(b));
            (x.min(y), x.max(y))
        };
        match self {
            OnuKind::Id | OnuKind::Flip => vec![piece(lo, hi)],
            OnuKind::Rot | OnuKind::RotFlip => {
                let mut out = Vec::with_capacity(2);
                if lo < 0.0 {
                    // the negative half maps continuously up to its limit at 0-
                    let end = hi.min(0.0);
                    let a = self.map_angle(lo);
                    let b = if hi < 0.0 {
                        self.map_angle(end)
                    } else if self == OnuKind::Rot {
                        FRAC_PI_2
                    } else {
                        -FRAC_PI_2
                    };
                    out.push((a.min(b), a.max(b)));
                }
                if hi >= 0.0 {
                    out.push(piece(lo.max(0.0), hi));
                }
                out
            }
        }
    }
}

macro_rules! string_kind {
    ($ty:ty, $what:literal) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                Self::ALL
                    .into_iter()
                    .find(|k| k.as_str() == s.trim())
                    .ok_or_else(|| Error::UnknownKind { what: $what, value: s.to_string() })
            }
        }
        impl TryFrom<String> for $ty {
            type Error = Error;
            fn try_from(s: String) -> Result<Self> {
                s.parse()
            }
        }
        impl From<$ty> for String {
            fn from(k: $ty) -> String {
                k.as_str().to_string()
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

string_kind!(SnuKind, "scale unit");
string_kind!(OnuKind, "orientation unit");

/// One normalization branch and the geometry it is responsible for.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchConfig {
    pub snu: SnuKind,
    pub onu: OnuKind,
    pub feasible: GeometryRange,
}

impl BranchConfig {
    pub fn new(snu: SnuKind, onu: OnuKind, feasible: GeometryRange) -> Self {
        Self { snu, onu, feasible }
    }

    /// Canvas `(height, width)` seen by the shared header on this branch.
    pub fn canvas(&self, height: f64, width: f64) -> (f64, f64) {
        let f = self.snu.factor();
        let (h, w) = (height * f, width * f);
        if self.onu.swaps_axes() {
            (w, h)
        } else {
            (h, w)
        }
    }

    /// Proxy ground truth: the box as it appears on this branch's feature map.
    /// `height`/`width` are the original canvas dimensions.
    pub fn forward_box(&self, b: &RotatedBox, height: f64, width: f64) -> RotatedBox {
        let f = self.snu.factor();
        let (hs, ws) = (height * f, width * f);
        let (x, y) = (b.cx() * f, b.cy() * f);
        let (nx, ny) = match self.onu {
            OnuKind::Id => (x, y),
            OnuKind::Rot => (hs - y, x),
            OnuKind::Flip => (x, hs - y),
            OnuKind::RotFlip => (hs - y, ws - x),
        };
        RotatedBox::from_parts(nx, ny, b.h() * f, b.w() * f, self.onu.map_angle(b.theta()))
    }

    /// Back-projection of a branch-frame box to the original canvas.
    pub fn backward_box(&self, b: &RotatedBox, height: f64, width: f64) -> RotatedBox {
        let f = self.snu.factor();
        let (hs, ws) = (height * f, width * f);
        let (px, py) = (b.cx(), b.cy());
        let (x, y) = match self.onu {
            OnuKind::Id => (px, py),
            OnuKind::Rot => (py, hs - px),
            OnuKind::Flip => (px, hs - py),
            OnuKind::RotFlip => (ws - py, hs - px),
        };
        RotatedBox::from_parts(x / f, y / f, b.h() / f, b.w() / f, self.onu.map_angle(b.theta()))
    }

    /// Image of the feasible range on the branch's feature map.
    pub fn canonical_image(&self) -> GeometryRange {
        let f = self.snu.factor();
        let angles = self.feasible.angle_intervals().iter().flat_map(|&iv| self.onu.map_interval(iv)).collect();
        GeometryRange::merged(self.feasible.scale_min() * f, self.feasible.scale_max() * f, angles)
            .expect("image of a valid range is valid")
    }

    pub fn accepts(&self, b: &RotatedBox) -> bool {
        in_feasible(&self.feasible, b)
    }
}

/// A full module: a non-empty set of branches whose feasible ranges jointly
/// cover `global_domain`.
#[derive(Debug, Clone, PartialEq)]
pub struct GnmConfig {
    branches: Vec<BranchConfig>,
    global_domain: GeometryRange,
}

impl GnmConfig {
    pub fn new(branches: Vec<BranchConfig>, global_domain: GeometryRange) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::Config("a GNM needs at least one branch".into()));
        }
        check_coverage(&branches, &global_domain)?;
        Ok(Self { branches, global_domain })
    }

    /// Two scale units crossed with four orientation units: `s` on short
    /// sides [10, 80], `s1/2` on [60, 200], each orientation unit on its own
    /// quarter of the angle domain.
    pub fn paper_default() -> Self {
        let scales = [(SnuKind::Identity, 10.0, 80.0), (SnuKind::Half, 60.0, 200.0)];
        let mut branches = Vec::with_capacity(8);
        for (snu, lo, hi) in scales {
            for onu in OnuKind::ALL {
                let range = GeometryRange::new(lo, hi, vec![onu.source_interval()]).expect("static range");
                branches.push(BranchConfig::new(snu, onu, range));
            }
        }
        let domain = GeometryRange::all_angles(10.0, 200.0).expect("static range");
        Self::new(branches, domain).expect("default config covers its domain")
    }

    pub fn branches(&self) -> &[BranchConfig] {
        &self.branches
    }

    pub fn global_domain(&self) -> &GeometryRange {
        &self.global_domain
    }
}

/// Exact coverage test for unions of (scale interval x angle union) cells:
/// probing every breakpoint and every gap midpoint on both axes decides it.
fn check_coverage(branches: &[BranchConfig], domain: &GeometryRange) -> Result<()> {
    let probes = |lo: f64, hi: f64, cuts: &mut dyn Iterator<Item = f64>| -> Vec<f64> {
        let mut pts: Vec<f64> = cuts.filter(|v| *v > lo && *v < hi).collect();
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mids: Vec<f64> = pts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        pts.extend(mids);
        pts
    };
    let scales = probes(
        domain.scale_min(),
        domain.scale_max(),
        &mut branches.iter().flat_map(|b| [b.feasible.scale_min(), b.feasible.scale_max()]),
    );
    for &(alo, ahi) in domain.angle_intervals() {
        let angles = probes(
            alo,
            ahi,
            &mut branches.iter().flat_map(|b| b.feasible.angle_intervals().iter().flat_map(|&(a, b)| [a, b])),
        );
        for &s in &scales {
            for &a in &angles {
                if !branches.iter().any(|b| b.feasible.contains(s, a)) {
                    return Err(Error::Coverage { scale: s, angle: a });
                }
            }
        }
    }
    Ok(())
}

/// Collapsed image of every branch's feasible range: the scale and angle
/// extent that the shared header has to handle.
pub fn canonical_range_of(cfg: &GnmConfig) -> GeometryRange {
    let images: Vec<GeometryRange> = cfg.branches.iter().map(BranchConfig::canonical_image).collect();
    let smin = images.iter().map(GeometryRange::scale_min).fold(f64::MAX, f64::min);
    let smax = images.iter().map(GeometryRange::scale_max).fold(f64::MIN, f64::max);
    let amin = images.iter().map(|r| r.angle_hull().0).fold(f64::MAX, f64::min);
    let amax = images.iter().map(|r| r.angle_hull().1).fold(f64::MIN, f64::max);
    GeometryRange::new(smin, smax, vec![(amin, amax)]).expect("hull of valid ranges is valid")
}
