use alloc::vec::Vec;

use super::param::{join, Param, Parameters};
use crate::real::{gemm, Op};
use crate::Real;

/// Fully connected layer `y = x·W + b`, weights stored `(fan_in, fan_out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear<T> {
    pub weight: Param<T>,
    pub bias: Param<T>,
}

impl<T: Real> Linear<T> {
    pub fn from_parts(fan_in: usize, fan_out: usize, weight: Vec<T>, bias: Vec<T>) -> Self {
        Self { weight: Param::new(&[fan_in, fan_out], weight), bias: Param::new(&[fan_out], bias) }
    }

    pub fn fan_in(&self) -> usize {
        self.weight.shape[0]
    }

    pub fn fan_out(&self) -> usize {
        self.weight.shape[1]
    }

    pub fn forward(&self, x: &[T], n: usize) -> Vec<T> {
        let (fi, fo) = (self.fan_in(), self.fan_out());
        debug_assert_eq!(x.len(), n * fi);
        let mut y = Vec::with_capacity(n * fo);
        for _ in 0..n {
            y.extend_from_slice(&self.bias.value);
        }
        gemm(n, fi, fo, x, Op::N, &self.weight.value, Op::N, T::one(), &mut y);
        y
    }

    /// Accumulates weight/bias gradients; returns `dL/dx` when requested.
    pub fn backward(&mut self, x: &[T], dy: &[T], n: usize, need_dx: bool) -> Option<Vec<T>> {
        let (fi, fo) = (self.fan_in(), self.fan_out());
        gemm(fi, n, fo, x, Op::T, dy, Op::N, T::one(), &mut self.weight.grad);
        for row in dy.chunks_exact(fo) {
            for (g, d) in self.bias.grad.iter_mut().zip(row) {
                *g += *d;
            }
        }
        need_dx.then(|| {
            let mut dx = alloc::vec![T::zero(); n * fi];
            gemm(n, fo, fi, dy, Op::N, &self.weight.value, Op::T, T::zero(), &mut dx);
            dx
        })
    }
}

impl<T: Real> Parameters<T> for Linear<T> {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &Param<T>)) {
        f(&join(prefix, "weight"), &self.weight);
        f(&join(prefix, "bias"), &self.bias);
    }
    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut Param<T>)) {
        f(&join(prefix, "weight"), &mut self.weight);
        f(&join(prefix, "bias"), &mut self.bias);
    }
}
