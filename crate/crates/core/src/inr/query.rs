use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::Real;

/// Space-time query points: `xy ∈ [-1, 1]²` (x along columns, y along rows)
/// and `t ∈ [0, 1]` between the first and second input slice.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryBatch {
    pub xy: Vec<[f64; 2]>,
    pub t: Vec<f64>,
}

impl QueryBatch {
    pub fn new(xy: Vec<[f64; 2]>, t: Vec<f64>) -> Result<Self> {
        if xy.is_empty() {
            return Err(Error::arg("query batch must not be empty"));
        }
        if xy.len() != t.len() {
            return Err(Error::shape("query times", xy.len(), t.len()));
        }
        if let Some(p) = xy.iter().find(|p| !(p[0].abs() <= 1.0 && p[1].abs() <= 1.0)) {
            return Err(Error::arg(alloc::format!("query coordinate {p:?} outside [-1, 1]²")));
        }
        if let Some(v) = t.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::arg(alloc::format!("query time {v} outside [0, 1]")));
        }
        Ok(Self { xy, t })
    }

    /// Same spatial points, all at time `t`.
    pub fn at_time(xy: Vec<[f64; 2]>, t: f64) -> Result<Self> {
        let n = xy.len();
        Self::new(xy, alloc::vec![t; n])
    }

    pub fn len(&self) -> usize {
        self.xy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xy.is_empty()
    }

    /// Rows `range` as a new batch.
    pub fn slice(&self, range: core::ops::Range<usize>) -> Self {
        Self { xy: self.xy[range.clone()].to_vec(), t: self.t[range].to_vec() }
    }
}

/// Continuous spatial features, `N × C_f` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialFeature<T> {
    pub feats: Vec<T>,
    pub channels: usize,
}

/// Per-query displacement in low-res cell units along x and y, `N × 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionFlow<T> {
    pub flow: Vec<[T; 2]>,
}

/// `x* = clamp(x + m, -1, 1)` componentwise.
pub fn warp<T: Real>(xy: &[[T; 2]], m: &MotionFlow<T>, (height, width): (usize, usize)) -> Result<Vec<[T; 2]>> {
    if xy.len() != m.flow.len() {
        return Err(Error::shape("motion flow", xy.len(), m.flow.len()));
    }
    let scale = cell_scale(height, width);
    let one = T::one();
    Ok(xy
        .iter()
        .zip(&m.flow)
        .map(|(p, d)| [(p[0] + d[0] * scale[0]).max(-one).min(one), (p[1] + d[1] * scale[1]).max(-one).min(one)])
        .collect())
}

/// Normalized width of one grid cell along x and y.
pub(crate) fn cell_scale<T: Real>(height: usize, width: usize) -> [T; 2] {
    [T::from_f64(2.0 / width as f64), T::from_f64(2.0 / height as f64)]
}
