use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Physical bounding box of the grid nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extents {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Extents {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    fn is_valid(&self) -> bool {
        [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite())
            && self.x_max > self.x_min
            && self.y_max > self.y_min
    }
}

/// Dense time-varying field sampled on a uniform lattice.
///
/// Values are stored in `(t, row, col, channel)` order; row 0 sits at
/// `y_min`, column 0 at `x_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    values: Vec<f32>,
    dims: [usize; 4],
    extents: Extents,
    dt: f64,
    channel_names: Vec<String>,
}

impl FlowField {
    pub fn new(
        dims: [usize; 4],
        values: Vec<f32>,
        extents: Extents,
        dt: f64,
        channel_names: Vec<String>,
    ) -> Result<Self> {
        let [t, h, w, c] = dims;
        if t < 1 || h < 2 || w < 2 || c < 1 {
            return Err(Error::arg(alloc::format!(
                "field dims must satisfy T>=1, H>=2, W>=2, C>=1; got {dims:?}"
            )));
        }
        let n = t
            .checked_mul(h)
            .and_then(|v| v.checked_mul(w))
            .and_then(|v| v.checked_mul(c))
            .ok_or_else(|| Error::arg("field dims overflow"))?;
        if values.len() != n {
            return Err(Error::shape("field payload", n, values.len()));
        }
        if !extents.is_valid() {
            return Err(Error::Data(alloc::format!("degenerate extents {extents:?}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Data(alloc::format!("dt must be positive, got {dt}")));
        }
        if channel_names.len() != c {
            return Err(Error::shape("channel names", c, channel_names.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(alloc::format!("non-finite value at flat index {i}")));
        }
        Ok(Self { values, dims, extents, dt, channel_names })
    }

    /// Builds a field with default `u_x, u_y, ...` channel names.
    pub fn from_values(dims: [usize; 4], values: Vec<f32>, extents: Extents, dt: f64) -> Result<Self> {
        let names = default_channel_names(dims[3]);
        Self::new(dims, values, extents, dt, names)
    }

    pub fn zeros(dims: [usize; 4], extents: Extents, dt: f64) -> Result<Self> {
        let n = dims.iter().product();
        Self::from_values(dims, alloc::vec![0.0; n], extents, dt)
    }

    /// Same metadata, new values; used internally where invariants are already known to hold.
    pub(crate) fn with_values(&self, dims: [usize; 4], values: Vec<f32>, extents: Extents, dt: f64) -> Self {
        debug_assert_eq!(values.len(), dims.iter().product::<usize>());
        Self { values, dims, extents, dt, channel_names: self.channel_names.clone() }
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }
    pub fn frames(&self) -> usize {
        self.dims[0]
    }
    pub fn height(&self) -> usize {
        self.dims[1]
    }
    pub fn width(&self) -> usize {
        self.dims[2]
    }
    pub fn channels(&self) -> usize {
        self.dims[3]
    }
    pub fn extents(&self) -> Extents {
        self.extents
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }
    pub fn values(&self) -> &[f32] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn frame_len(&self) -> usize {
        self.dims[1] * self.dims[2] * self.dims[3]
    }

    #[inline]
    pub fn index(&self, t: usize, row: usize, col: usize, ch: usize) -> usize {
        ((t * self.dims[1] + row) * self.dims[2] + col) * self.dims[3] + ch
    }

    #[inline]
    pub fn get(&self, t: usize, row: usize, col: usize, ch: usize) -> f32 {
        self.values[self.index(t, row, col, ch)]
    }

    /// One time slice, `(H, W, C)` row-major.
    pub fn frame(&self, t: usize) -> &[f32] {
        let n = self.frame_len();
        &self.values[t * n..(t + 1) * n]
    }

    /// Physical x coordinate of column `col`.
    pub fn x_at(&self, col: usize) -> f64 {
        self.extents.x_min + self.extents.width() * col as f64 / (self.dims[2] - 1) as f64
    }

    /// Physical y coordinate of row `row`.
    pub fn y_at(&self, row: usize) -> f64 {
        self.extents.y_min + self.extents.height() * row as f64 / (self.dims[1] - 1) as f64
    }

    /// Frames `[start, end)` as a new field.
    pub fn slice_frames(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.frames() {
            return Err(Error::arg(alloc::format!(
                "frame range {start}..{end} invalid for {} frames",
                self.frames()
            )));
        }
        let n = self.frame_len();
        let values = self.values[start * n..end * n].to_vec();
        let mut dims = self.dims;
        dims[0] = end - start;
        Ok(self.with_values(dims, values, self.extents, self.dt))
    }

    /// The listed frames, in order, as a new field. `dt` is kept.
    pub fn select_frames(&self, frames: &[usize]) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::arg("no frames selected"));
        }
        let n = self.frame_len();
        let mut values = Vec::with_capacity(frames.len() * n);
        for &t in frames {
            if t >= self.frames() {
                return Err(Error::arg(alloc::format!("frame {t} out of range for {} frames", self.frames())));
            }
            values.extend_from_slice(self.frame(t));
        }
        let mut dims = self.dims;
        dims[0] = frames.len();
        Ok(self.with_values(dims, values, self.extents, self.dt))
    }

    /// Keeps only the leading `rows × cols` nodes of every frame.
    pub fn crop_spatial(&self, rows: usize, cols: usize) -> Result<Self> {
        let [t, h, w, c] = self.dims;
        if rows < 2 || cols < 2 || rows > h || cols > w {
            return Err(Error::arg(alloc::format!("cannot crop {h}x{w} to {rows}x{cols}")));
        }
        let mut values = Vec::with_capacity(t * rows * cols * c);
        for ti in 0..t {
            for r in 0..rows {
                let start = self.index(ti, r, 0, 0);
                values.extend_from_slice(&self.values[start..start + cols * c]);
            }
        }
        let ext = Extents::new(self.extents.x_min, self.x_at(cols - 1), self.extents.y_min, self.y_at(rows - 1));
        Ok(self.with_values([t, rows, cols, c], values, ext, self.dt))
    }

    /// Two consecutive frames as an encoder input.
    pub fn slice_pair(&self, t0: usize) -> Result<SlicePair> {
        if t0 + 1 >= self.frames() {
            return Err(Error::arg(alloc::format!(
                "slice pair at {t0} needs frame {} but field has {}",
                t0 + 1,
                self.frames()
            )));
        }
        Ok(SlicePair {
            frames: [self.frame(t0).to_vec(), self.frame(t0 + 1).to_vec()],
            height: self.height(),
            width: self.width(),
            channels: self.channels(),
            t0_index: t0,
            t1_index: t0 + 1,
        })
    }
}

pub(crate) fn default_channel_names(c: usize) -> Vec<String> {
    const AXES: [&str; 3] = ["u_x", "u_y", "u_z"];
    (0..c)
        .map(|i| match AXES.get(i) {
            Some(s) if c <= 3 => String::from(*s),
            _ => alloc::format!("c{i}"),
        })
        .collect()
}

/// Two consecutive low-resolution frames, each `(H, W, C)` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicePair {
    pub frames: [Vec<f32>; 2],
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub t0_index: usize,
    pub t1_index: usize,
}

impl SlicePair {
    pub fn new(frames: [Vec<f32>; 2], height: usize, width: usize, channels: usize, t0_index: usize) -> Result<Self> {
        let n = height * width * channels;
        for f in &frames {
            if f.len() != n {
                return Err(Error::shape("slice pair frame", n, f.len()));
            }
        }
        Ok(Self { frames, height, width, channels, t0_index, t1_index: t0_index + 1 })
    }
}

/// Strided point sampling. Keeps spatial nodes `0, s, 2s, ...` and frames
/// `0, t, 2t, ...`, so low-res node `k` is high-res node `k·s`.
///
/// Extents shrink to the last kept node when `(H-1)` or `(W-1)` is not a
/// multiple of `s`; `dt` scales by the time factor.
pub fn downsample(field: &FlowField, s_factor: usize, t_factor: usize) -> Result<FlowField> {
    if s_factor < 1 || t_factor < 1 {
        return Err(Error::arg(alloc::format!(
            "downsample factors must be >= 1, got s={s_factor} t={t_factor}"
        )));
    }
    let [t, h, w, c] = field.dims();
    let (lt, lh, lw) = ((t - 1) / t_factor + 1, (h - 1) / s_factor + 1, (w - 1) / s_factor + 1);
    if lh < 2 || lw < 2 {
        return Err(Error::arg(alloc::format!(
            "spatial factor {s_factor} leaves fewer than 2 nodes on a {h}x{w} grid"
        )));
    }
    let mut values = Vec::with_capacity(lt * lh * lw * c);
    for ti in 0..lt {
        for r in 0..lh {
            for col in 0..lw {
                let start = field.index(ti * t_factor, r * s_factor, col * s_factor, 0);
                values.extend_from_slice(&field.values()[start..start + c]);
            }
        }
    }
    let ext = Extents::new(
        field.extents().x_min,
        field.x_at((lw - 1) * s_factor),
        field.extents().y_min,
        field.y_at((lh - 1) * s_factor),
    );
    Ok(field.with_values([lt, lh, lw, c], values, ext, field.dt() * t_factor as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(dims: [usize; 4]) -> FlowField {
        let n: usize = dims.iter().product();
        FlowField::from_values(dims, (0..n).map(|i| i as f32).collect(), Extents::new(0.0, 1.0, 0.0, 1.0), 0.5)
            .unwrap()
    }

    #[test]
    fn rejects_invalid_fields() {
        let ext = Extents::new(0.0, 1.0, 0.0, 1.0);
        assert!(FlowField::from_values([1, 1, 2, 1], alloc::vec![0.0; 2], ext, 1.0).is_err());
        assert!(FlowField::from_values([1, 2, 2, 1], alloc::vec![0.0; 3], ext, 1.0).is_err());
        assert!(FlowField::from_values([1, 2, 2, 1], alloc::vec![0.0; 4], ext, 0.0).is_err());
        assert!(FlowField::from_values([1, 2, 2, 1], alloc::vec![0.0; 4], Extents::new(1.0, 1.0, 0.0, 1.0), 1.0).is_err());
        let mut v = alloc::vec![0.0; 4];
        v[2] = f32::NAN;
        assert!(matches!(FlowField::from_values([1, 2, 2, 1], v, ext, 1.0), Err(Error::Data(_))));
        assert!(FlowField::new([1, 2, 2, 2], alloc::vec![0.0; 8], ext, 1.0, alloc::vec![String::from("a")]).is_err());
    }

    #[test]
    fn unit_factors_are_identity() {
        let f = ramp([3, 4, 5, 2]);
        assert_eq!(downsample(&f, 1, 1).unwrap(), f);
    }

    #[test]
    fn strided_selection_keeps_anchored_indices() {
        let f = ramp([9, 9, 9, 2]);
        let d = downsample(&f, 4, 2).unwrap();
        assert_eq!(d.dims(), [5, 3, 3, 2]);
        for (ti, &st) in [0usize, 2, 4, 6, 8].iter().enumerate() {
            for (ri, &sr) in [0usize, 4, 8].iter().enumerate() {
                for (ci, &sc) in [0usize, 4, 8].iter().enumerate() {
                    for ch in 0..2 {
                        assert_eq!(d.get(ti, ri, ci, ch), f.get(st, sr, sc, ch));
                    }
                }
            }
        }
        assert_eq!(d.dt(), 1.0);
        assert_eq!(d.extents(), f.extents());
    }

    #[test]
    fn cylinder_sized_grid_keeps_160_by_20() {
        // Only spatial layout matters here, so use a single frame.
        let f = FlowField::zeros([1, 80, 640, 2], Extents::new(-0.5, 7.5, -0.5, 0.5), 0.01).unwrap();
        let d = downsample(&f, 4, 2).unwrap();
        assert_eq!(d.dims(), [1, 20, 160, 2]);
        // last kept column is 636, last kept row 76
        assert!((d.extents().x_max - f.x_at(636)).abs() < 1e-12);
        assert!((d.extents().y_max - f.y_at(76)).abs() < 1e-12);
    }

    #[test]
    fn zero_factor_is_rejected() {
        let f = ramp([2, 4, 4, 1]);
        assert!(matches!(downsample(&f, 0, 1), Err(Error::Argument(_))));
        assert!(matches!(downsample(&f, 1, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn slice_pair_requires_successor_frame() {
        let f = ramp([2, 3, 3, 1]);
        let p = f.slice_pair(0).unwrap();
        assert_eq!((p.t0_index, p.t1_index), (0, 1));
        assert_eq!(p.frames[1], f.frame(1));
        assert!(f.slice_pair(1).is_err());
    }
}
