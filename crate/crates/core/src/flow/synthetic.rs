use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{Extents, FlowField};
use crate::error::{Error, Result};

/// Decaying Taylor–Green vortex on `[0, 2π]²`:
/// `u = sin x cos y e^{-2νt}`, `v = -cos x sin y e^{-2νt}`.
///
/// Nodes include both domain endpoints. Time spans `[0, 1]`, so
/// `dt = 1 / (frames - 1)`.
pub fn gen_taylor_green(n: usize, frames: usize, nu: f64) -> Result<FlowField> {
    if n < 4 {
        return Err(Error::arg(alloc::format!("grid size must be >= 4, got {n}")));
    }
    if frames < 2 {
        return Err(Error::arg(alloc::format!("need at least 2 frames, got {frames}")));
    }
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(Error::arg(alloc::format!("viscosity must be >= 0, got {nu}")));
    }
    let dt = 1.0 / (frames - 1) as f64;
    let coord = |i: usize| 2.0 * PI * i as f64 / (n - 1) as f64;
    let mut values = Vec::with_capacity(frames * n * n * 2);
    for ti in 0..frames {
        let decay = libm::exp(-2.0 * nu * ti as f64 * dt);
        for row in 0..n {
            let y = coord(row);
            let (sy, cy) = (libm::sin(y), libm::cos(y));
            for col in 0..n {
                let x = coord(col);
                let (sx, cx) = (libm::sin(x), libm::cos(x));
                values.push((sx * cy * decay) as f32);
                values.push((-cx * sy * decay) as f32);
            }
        }
    }
    FlowField::from_values([frames, n, n, 2], values, Extents::new(0.0, 2.0 * PI, 0.0, 2.0 * PI), dt)
}
