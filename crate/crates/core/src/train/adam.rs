use alloc::vec::Vec;

use crate::nn::Parameters;
use crate::Real;

/// Adam with bias correction; moment buffers follow parameter visit order.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Real> Adam<T> {
    pub fn new(beta1: f64, beta2: f64) -> Self {
        Self { beta1, beta2, eps: 1e-8, step: 0, m: Vec::new(), v: Vec::new() }
    }

    pub fn update<P: Parameters<T>>(&mut self, model: &mut P, lr: f64) {
        self.step += 1;
        let (b1, b2) = (T::from_f64(self.beta1), T::from_f64(self.beta2));
        let (one_b1, one_b2) = (T::one() - b1, T::one() - b2);
        let c1 = 1.0 - libm::pow(self.beta1, self.step as f64);
        let c2 = 1.0 - libm::pow(self.beta2, self.step as f64);
        let step_size = T::from_f64(lr / c1);
        let inv_c2 = T::from_f64(1.0 / c2);
        let eps = T::from_f64(self.eps);
        let (m, v) = (&mut self.m, &mut self.v);
        let mut idx = 0;
        model.visit_mut("", &mut |_, p| {
            if m.len() <= idx {
                m.push(alloc::vec![T::zero(); p.len()]);
                v.push(alloc::vec![T::zero(); p.len()]);
            }
            let (mi, vi) = (&mut m[idx], &mut v[idx]);
            for j in 0..p.len() {
                let g = p.grad[j];
                mi[j] = b1 * mi[j] + one_b1 * g;
                vi[j] = b2 * vi[j] + one_b2 * g * g;
                p.value[j] -= step_size * mi[j] / ((vi[j] * inv_c2).sqrt() + eps);
            }
            idx += 1;
        });
    }
}
