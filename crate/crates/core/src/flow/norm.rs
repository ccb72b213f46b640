use alloc::vec::Vec;

use super::FlowField;

/// Per-channel affine map `normalized = (value - offset) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl NormStats {
    pub fn identity(channels: usize) -> Self {
        Self { offset: alloc::vec![0.0; channels], scale: alloc::vec![1.0; channels] }
    }

    pub fn channels(&self) -> usize {
        self.offset.len()
    }

    /// Normalizes an interleaved `(..., C)` buffer in place.
    pub fn apply(&self, values: &mut [f32]) {
        let c = self.channels();
        for (i, v) in values.iter_mut().enumerate() {
            *v = ((*v as f64 - self.offset[i % c]) / self.scale[i % c]) as f32;
        }
    }

    /// Inverse of [`NormStats::apply`].
    pub fn invert(&self, values: &mut [f32]) {
        let c = self.channels();
        for (i, v) in values.iter_mut().enumerate() {
            *v = (*v as f64 * self.scale[i % c] + self.offset[i % c]) as f32;
        }
    }

    pub fn denormalize(&self, field: &FlowField) -> FlowField {
        let mut values = field.values().to_vec();
        self.invert(&mut values);
        field.with_values(field.dims(), values, field.extents(), field.dt())
    }

    pub fn normalize_field(&self, field: &FlowField) -> FlowField {
        let mut values = field.values().to_vec();
        self.apply(&mut values);
        field.with_values(field.dims(), values, field.extents(), field.dt())
    }
}

/// Maps every channel onto `[-1, 1]` using its own min/max.
///
/// A constant channel gets `scale = 1` (its values shift to zero instead of
/// dividing by zero).
pub fn normalize(field: &FlowField) -> (FlowField, NormStats) {
    let c = field.channels();
    let mut lo = alloc::vec![f64::INFINITY; c];
    let mut hi = alloc::vec![f64::NEG_INFINITY; c];
    for (i, &v) in field.values().iter().enumerate() {
        let ch = i % c;
        lo[ch] = lo[ch].min(v as f64);
        hi[ch] = hi[ch].max(v as f64);
    }
    let offset: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (a + b) / 2.0).collect();
    let scale = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| {
            let s = (b - a) / 2.0;
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let stats = NormStats { offset, scale };
    (stats.normalize_field(field), stats)
}
