use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flow::FlowField;

/// Maps output node `j` of an axis with `out` nodes onto the input axis with
/// `inp` nodes, endpoints aligned. Returns `(i0, i1, frac)`; the fraction is
/// computed from exact integer arithmetic so nodes that coincide with input
/// nodes get `frac == 0`.
pub fn axis_map(j: usize, out: usize, inp: usize) -> (usize, usize, f64) {
    if out <= 1 || inp <= 1 {
        return (0, 0, 0.0);
    }
    let num = j * (inp - 1);
    let den = out - 1;
    let i0 = num / den;
    let rem = num % den;
    if rem == 0 || i0 + 1 >= inp {
        (i0.min(inp - 1), i0.min(inp - 1), 0.0)
    } else {
        (i0, i0 + 1, rem as f64 / den as f64)
    }
}

/// Separable linear interpolation in `t`, `y` and `x` onto a
/// `(T, H, W)` lattice spanning the same extents. With
/// `D = (L - 1)·s + 1` nodes per axis, low node `k` lands on output node `k·s`.
pub fn trilinear_upsample(low: &FlowField, target: (usize, usize, usize)) -> Result<FlowField> {
    let [lt, lh, lw, c] = low.dims();
    let (tt, th, tw) = target;
    if tt < lt || th < lh || tw < lw {
        return Err(Error::arg(alloc::format!(
            "target {target:?} is smaller than source ({lt}, {lh}, {lw})"
        )));
    }
    let ts: Vec<_> = (0..tt).map(|j| axis_map(j, tt, lt)).collect();
    let ys: Vec<_> = (0..th).map(|j| axis_map(j, th, lh)).collect();
    let xs: Vec<_> = (0..tw).map(|j| axis_map(j, tw, lw)).collect();
    let v = low.values();
    let mut out = Vec::with_capacity(tt * th * tw * c);
    let mut acc = alloc::vec![0.0f64; c];
    for &(t0, t1, ft) in &ts {
        for &(y0, y1, fy) in &ys {
            for &(x0, x1, fx) in &xs {
                acc.iter_mut().for_each(|a| *a = 0.0);
                for (ti, wt) in [(t0, 1.0 - ft), (t1, ft)] {
                    if wt == 0.0 {
                        continue;
                    }
                    for (yi, wy) in [(y0, 1.0 - fy), (y1, fy)] {
                        if wy == 0.0 {
                            continue;
                        }
                        for (xi, wx) in [(x0, 1.0 - fx), (x1, fx)] {
                            if wx == 0.0 {
                                continue;
                            }
                            let w = wt * wy * wx;
                            let base = low.index(ti, yi, xi, 0);
                            for (a, s) in acc.iter_mut().zip(&v[base..base + c]) {
                                *a += w * *s as f64;
                            }
                        }
                    }
                }
                out.extend(acc.iter().map(|a| *a as f32));
            }
        }
    }
    let dt = if tt > 1 && lt > 1 { low.dt() * (lt - 1) as f64 / (tt - 1) as f64 } else { low.dt() };
    Ok(low.with_values([tt, th, tw, c], out, low.extents(), dt))
}
