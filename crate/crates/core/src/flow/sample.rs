use alloc::vec::Vec;
use rand::Rng;

use super::{FlowField, SlicePair};
use crate::error::{Error, Result};
use crate::inr::QueryBatch;

/// One supervised example: a low-res patch pair plus the aligned high-res
/// target lattice at a single query time.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub input: SlicePair,
    /// `(rows, cols, C)` row-major target values.
    pub target: Vec<f32>,
    pub target_rows: usize,
    pub target_cols: usize,
    /// Lattice coordinates in patch-normalized `[-1, 1]²`, all at the same `t`.
    pub coords: QueryBatch,
    /// High-res frame index of the target.
    pub target_frame: usize,
}

/// Normalized coordinates of a `rows × cols` node lattice spanning `[-1, 1]²`,
/// row-major, `x` along columns.
pub fn lattice_coords(rows: usize, cols: usize) -> Vec<[f64; 2]> {
    let axis = |i: usize, n: usize| if n <= 1 { 0.0 } else { -1.0 + 2.0 * i as f64 / (n - 1) as f64 };
    let mut xy = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            xy.push([axis(c, cols), axis(r, rows)]);
        }
    }
    xy
}

/// Draws a random patch from any slice pair of `low`.
pub fn crop_patch<R: Rng + ?Sized>(
    low: &FlowField,
    high: &FlowField,
    factors: (usize, usize),
    patch: usize,
    rng: &mut R,
) -> Result<TrainingSample> {
    let pairs: Vec<usize> = (0..low.frames().saturating_sub(1)).collect();
    crop_patch_from(low, high, factors, patch, &pairs, rng)
}

/// Draws a random patch from one of the listed slice pairs (`pairs[i]` is the
/// index of the first low-res frame). The target time is uniform over the
/// `st + 1` high-res steps spanning the interval, endpoints included.
pub fn crop_patch_from<R: Rng + ?Sized>(
    low: &FlowField,
    high: &FlowField,
    (sx, st): (usize, usize),
    patch: usize,
    pairs: &[usize],
    rng: &mut R,
) -> Result<TrainingSample> {
    if sx < 1 || st < 1 {
        return Err(Error::arg("scale factors must be >= 1"));
    }
    if patch < 2 || patch > low.height() || patch > low.width() {
        return Err(Error::arg(alloc::format!(
            "patch {patch} does not fit low-res grid {}x{}",
            low.height(),
            low.width()
        )));
    }
    if pairs.is_empty() {
        return Err(Error::arg("no slice pairs to sample from"));
    }
    let span = (patch - 1) * sx + 1;
    let c = low.channels();
    if high.channels() != c
        || (low.height() - 1) * sx >= high.height()
        || (low.width() - 1) * sx >= high.width()
        || (low.frames() - 1) * st >= high.frames()
    {
        return Err(Error::shape(
            "high-res field for factors",
            [(low.frames() - 1) * st + 1, (low.height() - 1) * sx + 1, (low.width() - 1) * sx + 1, c],
            high.dims(),
        ));
    }

    let k = pairs[rng.gen_range(0..pairs.len())];
    if k + 1 >= low.frames() {
        return Err(Error::arg(alloc::format!("pair index {k} out of range")));
    }
    let r0 = rng.gen_range(0..=low.height() - patch);
    let c0 = rng.gen_range(0..=low.width() - patch);
    let step = rng.gen_range(0..=st);

    let mut frames = [Vec::with_capacity(patch * patch * c), Vec::with_capacity(patch * patch * c)];
    for (slot, frame) in frames.iter_mut().enumerate() {
        for r in r0..r0 + patch {
            let start = low.index(k + slot, r, c0, 0);
            frame.extend_from_slice(&low.values()[start..start + patch * c]);
        }
    }
    let input = SlicePair::new(frames, patch, patch, c, k)?;

    let target_frame = k * st + step;
    let mut target = Vec::with_capacity(span * span * c);
    for r in 0..span {
        let start = high.index(target_frame, r0 * sx + r, c0 * sx, 0);
        target.extend_from_slice(&high.values()[start..start + span * c]);
    }
    let xy = lattice_coords(span, span);
    let t = alloc::vec![step as f64 / st as f64; xy.len()];
    Ok(TrainingSample {
        input,
        target,
        target_rows: span,
        target_cols: span,
        coords: QueryBatch::new(xy, t)?,
        target_frame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{downsample, gen_taylor_green};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn full_grid_patch_covers_unit_square() {
        let high = gen_taylor_green(9, 5, 0.1).unwrap();
        let low = downsample(&high, 4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = crop_patch(&low, &high, (4, 2), 3, &mut rng).unwrap();
        assert_eq!((s.target_rows, s.target_cols), (9, 9));
        assert_eq!(s.coords.xy[0], [-1.0, -1.0]);
        assert_eq!(s.coords.xy[80], [1.0, 1.0]);
        assert!(s.coords.xy.iter().all(|p| p[0].abs() <= 1.0 && p[1].abs() <= 1.0));
        // anchored alignment: target corners are the low-res nodes at t in {0,1}
        if s.target_frame % 2 == 0 {
            let lt = s.target_frame / 2;
            assert_eq!(&s.target[..2], &low.frame(lt)[..2]);
        }
    }

    #[test]
    fn equal_seeds_give_equal_samples() {
        let high = gen_taylor_green(17, 9, 0.1).unwrap();
        let low = downsample(&high, 2, 2).unwrap();
        let a = crop_patch(&low, &high, (2, 2), 4, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = crop_patch(&low, &high, (2, 2), 4, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn target_time_enumerates_intermediate_steps() {
        let high = gen_taylor_green(9, 9, 0.1).unwrap();
        let low = downsample(&high, 4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut seen = alloc::collections::BTreeSet::new();
        for _ in 0..200 {
            let s = crop_patch(&low, &high, (4, 2), 3, &mut rng).unwrap();
            seen.insert((s.coords.t[0] * 2.0) as u32);
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), [0, 1, 2]);
    }

    #[test]
    fn oversized_patch_is_rejected() {
        let high = gen_taylor_green(9, 3, 0.1).unwrap();
        let low = downsample(&high, 4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(crop_patch(&low, &high, (4, 2), 4, &mut rng), Err(Error::Argument(_))));
    }
}
