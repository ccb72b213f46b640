use alloc::vec::Vec;

use super::{training_pairs, Checkpoint};
use crate::error::{Error, Result};
use crate::flow::{downsample, lattice_coords, FlowField};
use crate::inr::QueryBatch;
use crate::metrics::{axis_map, trilinear_upsample, MetricReport};

/// Model and trilinear reports for one factor pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub factor: (usize, usize),
    pub model: MetricReport,
    pub trilinear: MetricReport,
}

/// Dimensions `(T, H, W)` of the high-res lattice spanned by a low-res field
/// at factors `(s, t)`.
pub fn hull_dims(low: &FlowField, (s, t): (usize, usize)) -> (usize, usize, usize) {
    ((low.frames() - 1) * t + 1, (low.height() - 1) * s + 1, (low.width() - 1) * s + 1)
}

/// Hull frames lying strictly between low-res anchors inside the held-out
/// tail of the sequence.
pub fn heldout_intermediate_frames(low_frames: usize, st: usize, holdout_fraction: f64) -> Vec<usize> {
    if low_frames < 2 {
        return Vec::new();
    }
    let split = training_pairs(low_frames - 1, holdout_fraction) * st;
    let last = (low_frames - 1) * st;
    (split + 1..last).filter(|j| j % st != 0).collect()
}

/// Dense reconstruction of every output frame onto a `(T, H, W)` lattice
/// spanning the extents of `low` (physical units in and out).
pub fn reconstruct(ckpt: &Checkpoint, low: &FlowField, dims: (usize, usize, usize)) -> Result<FlowField> {
    let frames: Vec<usize> = (0..dims.0).collect();
    reconstruct_frames(ckpt, low, dims, &frames)
}

/// As [`reconstruct`] but only for the listed output frames.
pub fn reconstruct_frames(
    ckpt: &Checkpoint,
    low: &FlowField,
    (tt, th, tw): (usize, usize, usize),
    frames: &[usize],
) -> Result<FlowField> {
    let [lt, lh, lw, c] = low.dims();
    if c != ckpt.model.channels() || c != ckpt.norm.channels() {
        return Err(Error::shape("channels", ckpt.model.channels(), c));
    }
    if lt < 2 || lh < 2 || lw < 2 {
        return Err(Error::arg("reconstruction needs at least two low-res nodes per axis"));
    }
    if tt < lt || th < lh || tw < lw {
        return Err(Error::arg(alloc::format!("target ({tt}, {th}, {tw}) is smaller than source ({lt}, {lh}, {lw})")));
    }
    if let Some(&bad) = frames.iter().find(|&&j| j >= tt) {
        return Err(Error::arg(alloc::format!("frame {bad} out of range for {tt} frames")));
    }
    let low_n = ckpt.norm.normalize_field(low);
    let xy = lattice_coords(th, tw);
    let mut grids: Vec<Option<_>> = (0..lt - 1).map(|_| None).collect();
    let mut values = Vec::with_capacity(frames.len() * th * tw * c);
    for &j in frames {
        let (i0, i1, frac) = axis_map(j, tt, lt);
        let (pair, t) = if i0 != i1 {
            (i0, frac)
        } else if i0 + 1 < lt {
            (i0, 0.0)
        } else {
            (i0 - 1, 1.0)
        };
        if grids[pair].is_none() {
            grids[pair] = Some(ckpt.model.encode(&low_n.slice_pair(pair)?)?);
        }
        let query = QueryBatch::new(xy.clone(), alloc::vec![t; xy.len()])?;
        let out = ckpt.model.query_grid(grids[pair].as_ref().unwrap(), &query)?;
        values.extend(out);
    }
    ckpt.norm.invert(&mut values);
    let dt = low.dt() * (lt - 1) as f64 / (tt - 1) as f64;
    FlowField::new([frames.len(), th, tw, c], values, low.extents(), dt, low.channel_names().to_vec())
}

/// Downsamples `high` by each factor pair, reconstructs with the model and
/// with trilinear interpolation, and scores both against `high` on the
/// spanned lattice.
pub fn evaluate(ckpt: &Checkpoint, high: &FlowField, factors: &[(usize, usize)]) -> Result<Vec<EvalResult>> {
    factors.iter().map(|&f| evaluate_frames(ckpt, high, f, None)).collect()
}

/// One factor pair, optionally restricted to a subset of lattice frames.
pub fn evaluate_frames(
    ckpt: &Checkpoint,
    high: &FlowField,
    (s, t): (usize, usize),
    frames: Option<&[usize]>,
) -> Result<EvalResult> {
    let low = downsample(high, s, t)?;
    if low.frames() < 2 || low.height() < 2 || low.width() < 2 {
        return Err(Error::arg(alloc::format!(
            "factors ({s}, {t}) leave fewer than two nodes per axis of {:?}",
            high.dims()
        )));
    }
    let dims = hull_dims(&low, (s, t));
    let all: Vec<usize> = (0..dims.0).collect();
    let frames = frames.unwrap_or(&all);
    let gt = high.slice_frames(0, dims.0)?.crop_spatial(dims.1, dims.2)?.select_frames(frames)?;
    let pred = reconstruct_frames(ckpt, &low, dims, frames)?;
    let tri = trilinear_upsample(&low, dims)?.select_frames(frames)?;
    Ok(EvalResult {
        factor: (s, t),
        model: MetricReport::compute("ffeinr", (s, t), &pred, &gt)?,
        trilinear: MetricReport::compute("trilinear", (s, t), &tri, &gt)?,
    })
}
