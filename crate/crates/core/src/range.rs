//! Scale/orientation ranges that a branch is responsible for.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::geometry::RotatedBox;

/// Endpoint slack for closed angle intervals.
pub const ANGLE_EPS: f64 = 1e-12;

/// A closed scale interval on the short side `h` crossed with a union of
/// closed angle intervals inside `[-pi/2, pi/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryRange {
    scale_min: f64,
    scale_max: f64,
    angles: Vec<(f64, f64)>,
}

impl GeometryRange {
    pub fn new(scale_min: f64, scale_max: f64, mut angles: Vec<(f64, f64)>) -> Result<Self> {
        if !scale_min.is_finite() || !scale_max.is_finite() {
            return Err(Error::InvalidRange("scale bounds must be finite".into()));
        }
        if scale_min <= 0.0 || scale_min > scale_max {
            return Err(Error::InvalidRange(format!(
                "need 0 < scale_min <= scale_max, got [{scale_min}, {scale_max}]"
            )));
        }
        if angles.is_empty() {
            return Err(Error::InvalidRange("at least one angle interval is required".into()));
        }
        for &(lo, hi) in &angles {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidRange("angle bounds must be finite".into()));
            }
            if lo > hi {
                return Err(Error::InvalidRange(format!("angle interval [{lo}, {hi}] is reversed")));
            }
            if lo < -FRAC_PI_2 - ANGLE_EPS || hi > FRAC_PI_2 + ANGLE_EPS {
                return Err(Error::InvalidRange(format!("angle interval [{lo}, {hi}] leaves [-pi/2, pi/2]")));
            }
        }
        angles.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in angles.windows(2) {
            if pair[1].0 < pair[0].1 {
                return Err(Error::InvalidRange(format!(
                    "angle intervals [{}, {}] and [{}, {}] overlap",
                    pair[0].0, pair[0].1, pair[1].0, pair[1].1
                )));
            }
        }
        Ok(Self { scale_min, scale_max, angles })
    }

    /// Like [`GeometryRange::new`] but merges overlapping angle intervals
    /// instead of rejecting them.
    pub(crate) fn merged(scale_min: f64, scale_max: f64, mut angles: Vec<(f64, f64)>) -> Result<Self> {
        angles.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(angles.len());
        for (lo, hi) in angles {
            match out.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        Self::new(scale_min, scale_max, out)
    }

    /// All angles `[-pi/2, pi/2]` for scales in `[scale_min, scale_max]`.
    pub fn all_angles(scale_min: f64, scale_max: f64) -> Result<Self> {
        Self::new(scale_min, scale_max, vec![(-FRAC_PI_2, FRAC_PI_2)])
    }

    pub fn scale_min(&self) -> f64 {
        self.scale_min
    }
    pub fn scale_max(&self) -> f64 {
        self.scale_max
    }
    pub fn angle_intervals(&self) -> &[(f64, f64)] {
        &self.angles
    }

    /// Smallest and largest angle covered.
    pub fn angle_hull(&self) -> (f64, f64) {
        (self.angles[0].0, self.angles.iter().map(|a| a.1).fold(f64::MIN, f64::max))
    }

    pub fn contains_scale(&self, h: f64) -> bool {
        self.scale_min <= h && h <= self.scale_max
    }

    /// Angle membership modulo pi, so `-pi/2` also counts as `pi/2`.
    pub fn contains_angle(&self, theta: f64) -> bool {
        [theta, theta + PI, theta - PI]
            .into_iter()
            .any(|t| self.angles.iter().any(|&(lo, hi)| lo - ANGLE_EPS <= t && t <= hi + ANGLE_EPS))
    }

    pub fn contains(&self, h: f64, theta: f64) -> bool {
        self.contains_scale(h) && self.contains_angle(theta)
    }
}

/// Whether the box's short side and angle fall inside the range.
pub fn in_feasible(range: &GeometryRange, b: &RotatedBox) -> bool {
    range.contains(b.h(), b.theta())
}
