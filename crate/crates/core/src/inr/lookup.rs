//! Coordinate → feature-grid lookup producing the spatial network input
//! `[offset_x, offset_y, feature...]`.
//!
//! Cells tile `[-1, 1]` uniformly (`W_l` cells across x); a query belongs to
//! cell `floor((x + 1)/2 · W_l)`, with `x = 1` clamped into the last cell.
//! The offset is the query position relative to the cell centre in
//! half-cell units, so it lies in `[-1, 1]`.

use alloc::vec::Vec;

use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureLookup {
    /// Feature vector of the containing cell.
    #[default]
    Nearest,
    /// Bilinear blend of the four surrounding cell centres (border-clamped).
    Bilinear,
}

impl FeatureLookup {
    pub fn name(&self) -> &'static str {
        match self {
            FeatureLookup::Nearest => "nearest",
            FeatureLookup::Bilinear => "bilinear",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "nearest" => Some(FeatureLookup::Nearest),
            "bilinear" => Some(FeatureLookup::Bilinear),
            _ => None,
        }
    }
}

/// Grid in pixel-major layout, shared by every query that refers to it.
pub(crate) struct GridView<'a, T> {
    pub hwc: &'a [T],
    pub height: usize,
    pub width: usize,
}

struct Entry<T> {
    grid: u32,
    px: [u32; 4],
    w: [T; 4],
    /// d w / d x, d w / d y
    dw: [[T; 4]; 2],
    /// d offset / d coordinate (zero when the offset was clamped)
    doff: [T; 2],
}

pub(crate) struct LookupCache<T> {
    entries: Vec<Entry<T>>,
    channels: usize,
}

/// Cell index and in-cell offset along one axis.
#[inline]
fn cell<T: Real>(x: T, n: usize) -> (usize, T, T) {
    let one = T::one();
    let nf = T::from_f64(n as f64);
    let two = one + one;
    let pos = (x + one) / two * nf;
    let idx = pos.floor().as_f64();
    let i = if idx < 0.0 { 0 } else { (idx as usize).min(n - 1) };
    let centre = -one + (two * T::from_f64(i as f64) + one) / nf;
    let raw = (x - centre) * nf;
    if raw > one {
        (i, one, T::zero())
    } else if raw < -one {
        (i, -one, T::zero())
    } else {
        (i, raw, nf)
    }
}

/// Left neighbour, fraction and d fraction / d x for bilinear sampling.
#[inline]
fn bilinear_axis<T: Real>(x: T, n: usize) -> (usize, usize, T, T) {
    let one = T::one();
    let half = T::from_f64(0.5);
    let nf = T::from_f64(n as f64);
    if n == 1 {
        return (0, 0, T::zero(), T::zero());
    }
    let u = (x + one) * half * nf - half;
    let hi = T::from_f64((n - 1) as f64);
    let (u, du) = if u < T::zero() {
        (T::zero(), T::zero())
    } else if u > hi {
        (hi, T::zero())
    } else {
        (u, half * nf)
    };
    let i0 = (u.floor().as_f64() as usize).min(n - 2);
    let f = u - T::from_f64(i0 as f64);
    (i0, i0 + 1, f, du)
}

/// Builds the `N × (2 + C)` spatial-network input for queries `xy`,
/// each addressed to grid `owner[q]`.
pub(crate) fn gather<T: Real>(
    mode: FeatureLookup,
    grids: &[GridView<'_, T>],
    channels: usize,
    owner: &[u32],
    xy: &[[T; 2]],
) -> (Vec<T>, LookupCache<T>) {
    let n = xy.len();
    let width = 2 + channels;
    let mut input = alloc::vec![T::zero(); n * width];
    let mut entries = Vec::with_capacity(n);
    let zero4 = [T::zero(); 4];
    for (q, (&g, p)) in owner.iter().zip(xy).enumerate() {
        let grid = &grids[g as usize];
        let (cx, ox, dox) = cell(p[0], grid.width);
        let (cy, oy, doy) = cell(p[1], grid.height);
        let row = &mut input[q * width..(q + 1) * width];
        row[0] = ox;
        row[1] = oy;
        let entry = match mode {
            FeatureLookup::Nearest => {
                let pix = cy * grid.width + cx;
                row[2..].copy_from_slice(&grid.hwc[pix * channels..(pix + 1) * channels]);
                Entry {
                    grid: g,
                    px: [pix as u32, 0, 0, 0],
                    w: [T::one(), T::zero(), T::zero(), T::zero()],
                    dw: [zero4, zero4],
                    doff: [dox, doy],
                }
            }
            FeatureLookup::Bilinear => {
                let one = T::one();
                let (x0, x1, fx, dfx) = bilinear_axis(p[0], grid.width);
                let (y0, y1, fy, dfy) = bilinear_axis(p[1], grid.height);
                let px = [y0 * grid.width + x0, y0 * grid.width + x1, y1 * grid.width + x0, y1 * grid.width + x1];
                let w = [(one - fx) * (one - fy), fx * (one - fy), (one - fx) * fy, fx * fy];
                let dwx = [-(one - fy) * dfx, (one - fy) * dfx, -fy * dfx, fy * dfx];
                let dwy = [-(one - fx) * dfy, -fx * dfy, (one - fx) * dfy, fx * dfy];
                let feats = &mut row[2..];
                for (k, &pix) in px.iter().enumerate() {
                    let src = &grid.hwc[pix * channels..(pix + 1) * channels];
                    for (d, s) in feats.iter_mut().zip(src) {
                        *d += w[k] * *s;
                    }
                }
                Entry {
                    grid: g,
                    px: px.map(|p| p as u32),
                    w,
                    dw: [dwx, dwy],
                    doff: [dox, doy],
                }
            }
        };
        entries.push(entry);
    }
    (input, LookupCache { entries, channels })
}

/// Scatters `d input` back onto the grids (pixel-major gradients) and
/// returns `dL/d xy` when `need_dxy` is set.
pub(crate) fn scatter<T: Real>(
    cache: &LookupCache<T>,
    grids: &[GridView<'_, T>],
    dinput: &[T],
    dgrids: &mut [Vec<T>],
    need_dxy: bool,
) -> Vec<[T; 2]> {
    let c = cache.channels;
    let width = 2 + c;
    let mut dxy = if need_dxy { Vec::with_capacity(cache.entries.len()) } else { Vec::new() };
    for (q, e) in cache.entries.iter().enumerate() {
        let row = &dinput[q * width..(q + 1) * width];
        let dfeat = &row[2..];
        let dg = &mut dgrids[e.grid as usize];
        let mut dpos = [row[0] * e.doff[0], row[1] * e.doff[1]];
        for k in 0..4 {
            if e.w[k] == T::zero() && e.dw[0][k] == T::zero() && e.dw[1][k] == T::zero() {
                continue;
            }
            let pix = e.px[k] as usize;
            let dst = &mut dg[pix * c..(pix + 1) * c];
            for (d, s) in dst.iter_mut().zip(dfeat) {
                *d += e.w[k] * *s;
            }
            if need_dxy && (e.dw[0][k] != T::zero() || e.dw[1][k] != T::zero()) {
                let src = &grids[e.grid as usize].hwc[pix * c..(pix + 1) * c];
                let dot: T = src.iter().zip(dfeat).map(|(a, b)| *a * *b).sum();
                dpos[0] += e.dw[0][k] * dot;
                dpos[1] += e.dw[1][k] * dot;
            }
        }
        if need_dxy {
            dxy.push(dpos);
        }
    }
    dxy
}
