//! C x H x W value grids standing in for detector feature maps, and the
//! resolution/rotation/flip operations a normalization branch applies to them.

use crate::error::{Error, Result};
use crate::gnm::{OnuKind, SnuKind};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    channels: usize,
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl FeatureGrid {
    pub fn new(channels: usize, height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != channels * height * width {
            return Err(Error::InvalidGrid(format!(
                "expected {} values for {channels}x{height}x{width}, got {}",
                channels * height * width,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid value"));
        }
        Ok(Self { channels, height, width, values })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self { channels, height, width, values: vec![0.0; channels * height * width] }
    }

    fn from_fn(channels: usize, height: usize, width: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for i in 0..height {
                for j in 0..width {
                    values.push(f(c, i, j));
                }
            }
        }
        Self { channels, height, width, values }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, c: usize, i: usize, j: usize) -> f64 {
        self.values[(c * self.height + i) * self.width + j]
    }

    pub fn set(&mut self, c: usize, i: usize, j: usize, v: f64) {
        assert!(v.is_finite(), "grid values must be finite");
        self.values[(c * self.height + i) * self.width + j] = v;
    }

    /// `(row, col)` of the largest value in channel `c` (first on ties).
    pub fn argmax(&self, c: usize) -> (usize, usize) {
        let plane = &self.values[c * self.height * self.width..(c + 1) * self.height * self.width];
        let mut best = 0;
        for (k, v) in plane.iter().enumerate() {
            if *v > plane[best] {
                best = k;
            }
        }
        (best / self.width, best % self.width)
    }

    /// 2x2 max-pool with stride 2; an odd trailing row/column is dropped.
    fn max_pool_2x2(&self) -> Result<Self> {
        if self.height < 2 || self.width < 2 {
            return Err(Error::GridTooSmall { height: self.height, width: self.width });
        }
        Ok(Self::from_fn(self.channels, self.height / 2, self.width / 2, |c, i, j| {
            let (r, k) = (2 * i, 2 * j);
            self.get(c, r, k).max(self.get(c, r, k + 1)).max(self.get(c, r + 1, k)).max(self.get(c, r + 1, k + 1))
        }))
    }

    /// Quarter turn clockwise on screen: `out[i][j] = in[H-1-j][i]`.
    fn rotate_cw(&self) -> Self {
        let h = self.height;
        Self::from_fn(self.channels, self.width, self.height, |c, i, j| self.get(c, h - 1 - j, i))
    }

    /// Mirror the row index: `out[i][j] = in[H-1-i][j]`.
    fn flip_rows(&self) -> Self {
        let h = self.height;
        Self::from_fn(self.channels, self.height, self.width, |c, i, j| self.get(c, h - 1 - i, j))
    }
}

pub fn snu_grid(kind: SnuKind, g: &FeatureGrid) -> Result<FeatureGrid> {
    match kind {
        SnuKind::Identity => Ok(g.clone()),
        SnuKind::Half => g.max_pool_2x2(),
        SnuKind::Quarter => g.max_pool_2x2()?.max_pool_2x2(),
    }
}

pub fn onu_grid(kind: OnuKind, g: &FeatureGrid) -> FeatureGrid {
    match kind {
        OnuKind::Id => g.clone(),
        OnuKind::Rot => g.rotate_cw(),
        OnuKind::Flip => g.flip_rows(),
        OnuKind::RotFlip => g.rotate_cw().flip_rows(),
    }
}
