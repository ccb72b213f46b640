use alloc::vec::Vec;
use rand::Rng;

use crate::error::{Error, Result};
use crate::flow::{Extents, FlowField};

/// Speeds below this end a streamline.
pub const STAGNATION_SPEED: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Streamline {
    pub seed: [f64; 2],
    pub points: Vec<[f64; 2]>,
}

/// Bilinear sample of the first two channels of frame `t` at a physical
/// point, or `None` outside the extents.
pub fn sample_bilinear(field: &FlowField, t: usize, p: [f64; 2]) -> Option<[f64; 2]> {
    let e = field.extents();
    if !e.contains(p[0], p[1]) {
        return None;
    }
    let (h, w) = (field.height(), field.width());
    let gx = (p[0] - e.x_min) / e.width() * (w - 1) as f64;
    let gy = (p[1] - e.y_min) / e.height() * (h - 1) as f64;
    let x0 = (gx as usize).min(w - 2);
    let y0 = (gy as usize).min(h - 2);
    let fx = gx - x0 as f64;
    let fy = gy - y0 as f64;
    let mut out = [0.0; 2];
    for (yi, wy) in [(y0, 1.0 - fy), (y0 + 1, fy)] {
        for (xi, wx) in [(x0, 1.0 - fx), (x0 + 1, fx)] {
            let base = field.index(t, yi, xi, 0);
            for (k, o) in out.iter_mut().enumerate() {
                *o += wy * wx * field.values()[base + k] as f64;
            }
        }
    }
    Some(out)
}

fn rk4(field: &FlowField, t: usize, p: [f64; 2], h: f64) -> Option<[f64; 2]> {
    let at = |q: [f64; 2], k: [f64; 2], s: f64| [q[0] + s * k[0], q[1] + s * k[1]];
    let k1 = sample_bilinear(field, t, p)?;
    let k2 = sample_bilinear(field, t, at(p, k1, h / 2.0))?;
    let k3 = sample_bilinear(field, t, at(p, k2, h / 2.0))?;
    let k4 = sample_bilinear(field, t, at(p, k3, h))?;
    Some([
        p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

/// Classical RK4 integration of `dx/ds = u(x)` on frame `t` from every seed.
/// A line stops when a step would leave the domain, after `max_steps`, or
/// when the local speed drops below [`STAGNATION_SPEED`].
pub fn trace_streamlines(
    field: &FlowField,
    t: usize,
    seeds: &[[f64; 2]],
    step: f64,
    max_steps: usize,
) -> Result<Vec<Streamline>> {
    if field.channels() < 2 {
        return Err(Error::arg("streamlines need a vector field"));
    }
    if t >= field.frames() {
        return Err(Error::arg(alloc::format!("frame {t} out of range for {} frames", field.frames())));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::arg(alloc::format!("step must be positive, got {step}")));
    }
    let e = field.extents();
    if let Some(s) = seeds.iter().find(|s| !e.contains(s[0], s[1])) {
        return Err(Error::arg(alloc::format!("seed {s:?} lies outside the domain")));
    }
    Ok(seeds
        .iter()
        .map(|&seed| {
            let mut points = alloc::vec![seed];
            let mut p = seed;
            for _ in 0..max_steps {
                match sample_bilinear(field, t, p) {
                    Some(u) if libm::hypot(u[0], u[1]) >= STAGNATION_SPEED => {}
                    _ => break,
                }
                match rk4(field, t, p, step) {
                    Some(q) if e.contains(q[0], q[1]) => {
                        points.push(q);
                        p = q;
                    }
                    _ => break,
                }
            }
            Streamline { seed, points }
        })
        .collect())
}

/// `n` seeds uniform over the extents shrunk by 5% on every side.
pub fn random_seeds<R: Rng + ?Sized>(extents: Extents, n: usize, rng: &mut R) -> Vec<[f64; 2]> {
    let ix = 0.05 * extents.width();
    let iy = 0.05 * extents.height();
    (0..n)
        .map(|_| {
            [
                extents.x_min + ix + rng.gen::<f64>() * (extents.width() - 2.0 * ix),
                extents.y_min + iy + rng.gen::<f64>() * (extents.height() - 2.0 * iy),
            ]
        })
        .collect()
}
