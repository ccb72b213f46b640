use alloc::vec::Vec;

use super::colormap::Colormap;
use crate::error::{Error, Result};
use crate::flow::FlowField;

/// Row-major RGB pixels; row 0 is the first grid row. `min`/`max` record the
/// value range the colors were scaled to.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
    pub min: f64,
    pub max: f64,
}

impl RgbImage {
    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let i = 3 * (row * self.width + col);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

fn magnitudes(field: &FlowField, t: usize) -> Result<Vec<f64>> {
    if t >= field.frames() {
        return Err(Error::arg(alloc::format!("frame {t} out of range for {} frames", field.frames())));
    }
    let c = field.channels();
    Ok(field
        .frame(t)
        .chunks_exact(c)
        .map(|v| if c == 1 { v[0] as f64 } else { libm::sqrt(v[0] as f64 * v[0] as f64 + v[1] as f64 * v[1] as f64) })
        .collect())
}

fn paint(map: &Colormap, vals: &[f64], height: usize, width: usize, lo: f64, hi: f64) -> RgbImage {
    let data = vals.iter().flat_map(|&v| map.color(v, lo, hi)).collect();
    RgbImage { width, height, data, min: lo, max: hi }
}

/// Velocity magnitude (or the scalar when there is one channel) of frame `t`
/// through the sequential colormap, scaled to the frame's own range.
pub fn render_magnitude_map(field: &FlowField, t: usize) -> Result<RgbImage> {
    let m = magnitudes(field, t)?;
    let lo = m.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(paint(&Colormap::magnitude(), &m, field.height(), field.width(), lo, hi))
}

/// Per-pixel error magnitude of each `(pred, gt)` panel at frame `t`, all on
/// one shared scale `[0, max error over every panel]`.
pub fn render_error_maps(panels: &[(&FlowField, &FlowField)], t: usize) -> Result<Vec<RgbImage>> {
    if panels.is_empty() {
        return Err(Error::arg("no panels to render"));
    }
    let mut errs = Vec::with_capacity(panels.len());
    for (pred, gt) in panels {
        if pred.dims() != gt.dims() {
            return Err(Error::shape("prediction", gt.dims(), pred.dims()));
        }
        if t >= gt.frames() {
            return Err(Error::arg(alloc::format!("frame {t} out of range for {} frames", gt.frames())));
        }
        let c = gt.channels();
        let e: Vec<f64> = pred
            .frame(t)
            .chunks_exact(c)
            .zip(gt.frame(t).chunks_exact(c))
            .map(|(a, b)| libm::sqrt(a.iter().zip(b).map(|(x, y)| { let d = *x as f64 - *y as f64; d * d }).sum()))
            .collect();
        errs.push(e);
    }
    let hi = errs.iter().flatten().copied().fold(0.0f64, f64::max);
    let map = Colormap::error();
    Ok(errs
        .iter()
        .zip(panels)
        .map(|(e, (_, gt))| paint(&map, e, gt.height(), gt.width(), 0.0, hi))
        .collect())
}
