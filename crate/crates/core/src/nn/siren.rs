//! Sine-activated MLPs with the frequency-aware uniform initialization.

use alloc::vec::Vec;
use rand::Rng;

use super::linear::Linear;
use super::param::{join, Param, Parameters};
use crate::error::{Error, Result};
use crate::Real;

pub const DEFAULT_OMEGA0: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirenLayerSpec {
    pub fan_in: usize,
    pub fan_out: usize,
    pub omega0: f64,
    pub is_first: bool,
}

impl SirenLayerSpec {
    /// Half-width of the uniform weight distribution: `1/fan_in` for the
    /// first layer, `sqrt(6/fan_in)/omega0` afterwards.
    pub fn bound(&self) -> f64 {
        if self.is_first {
            1.0 / self.fan_in as f64
        } else {
            libm::sqrt(6.0 / self.fan_in as f64) / self.omega0
        }
    }
}

/// Weights `(fan_in, fan_out)` row-major plus bias, both drawn from
/// `U(-bound, bound)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights<T> {
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

pub fn siren_init<T: Real, R: Rng + ?Sized>(spec: &SirenLayerSpec, rng: &mut R) -> LayerWeights<T> {
    let b = spec.bound();
    let mut draw = |n: usize| (0..n).map(|_| T::from_f64(rng.gen_range(-b..=b))).collect::<Vec<T>>();
    let weight = draw(spec.fan_in * spec.fan_out);
    let bias = draw(spec.fan_out);
    LayerWeights { weight, bias }
}

/// `sin(ω₀(xW + b))` on every layer but the last, which is affine.
#[derive(Debug, Clone, PartialEq)]
pub struct Siren<T> {
    pub layers: Vec<Linear<T>>,
    pub omega0: T,
}

pub struct SirenCache<T> {
    /// Input of every layer.
    inputs: Vec<Vec<T>>,
    /// `ω₀·cos(ω₀ z)` for every hidden layer.
    dact: Vec<Vec<T>>,
    n: usize,
}

impl<T: Real> Siren<T> {
    /// `widths = [in, hidden..., out]`; needs at least one hidden layer.
    pub fn new<R: Rng + ?Sized>(widths: &[usize], omega0: f64, rng: &mut R) -> Self {
        assert!(widths.len() >= 3, "siren needs input, >=1 hidden and output widths");
        assert!(omega0 > 0.0);
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let spec = SirenLayerSpec { fan_in: w[0], fan_out: w[1], omega0, is_first: i == 0 };
                let lw = siren_init::<T, R>(&spec, rng);
                Linear::from_parts(w[0], w[1], lw.weight, lw.bias)
            })
            .collect();
        Self { layers, omega0: T::from_f64(omega0) }
    }

    pub fn in_width(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn out_width(&self) -> usize {
        self.layers.last().map(Linear::fan_out).unwrap_or(0)
    }

    /// Sets every weight and bias to zero.
    pub fn zero_weights(&mut self) {
        self.visit_mut("", &mut |_, p| p.value.iter_mut().for_each(|v| *v = T::zero()));
    }

    fn check(&self, x: &[T], n: usize) -> Result<()> {
        if x.len() != n * self.in_width() {
            return Err(Error::shape("siren input", (n, self.in_width()), x.len()));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[T], n: usize) -> Result<Vec<T>> {
        self.check(x, n)?;
        let last = self.layers.len() - 1;
        let mut a = self.layers[0].forward(x, n);
        for v in a.iter_mut() {
            *v = (self.omega0 * *v).sin();
        }
        for (i, layer) in self.layers.iter().enumerate().skip(1) {
            a = layer.forward(&a, n);
            if i < last {
                for v in a.iter_mut() {
                    *v = (self.omega0 * *v).sin();
                }
            }
        }
        Ok(a)
    }

    pub fn forward_cached(&self, x: Vec<T>, n: usize) -> Result<(Vec<T>, SirenCache<T>)> {
        self.check(&x, n)?;
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut dact = Vec::with_capacity(last);
        let mut a = x;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.forward(&a, n);
            inputs.push(a);
            if i < last {
                let mut d = Vec::with_capacity(z.len());
                for v in z.iter_mut() {
                    let (s, c) = (self.omega0 * *v).sin_cos();
                    *v = s;
                    d.push(self.omega0 * c);
                }
                dact.push(d);
            }
            a = z;
        }
        Ok((a, SirenCache { inputs, dact, n }))
    }

    /// Returns `dL/dx` for the network input.
    pub fn backward(&mut self, cache: SirenCache<T>, dy: Vec<T>) -> Vec<T> {
        let n = cache.n;
        let mut grad = dy;
        for (i, x) in cache.inputs.iter().enumerate().rev() {
            if i < cache.dact.len() {
                for (g, d) in grad.iter_mut().zip(&cache.dact[i]) {
                    *g *= *d;
                }
            }
            grad = self.layers[i].backward(x, &grad, n, true).expect("dx requested");
        }
        grad
    }

    pub fn cast<U: Real>(&self) -> Siren<U> {
        Siren {
            layers: self
                .layers
                .iter()
                .map(|l| Linear { weight: l.weight.cast(), bias: l.bias.cast() })
                .collect(),
            omega0: U::from_f64(self.omega0.as_f64()),
        }
    }
}

impl<T: Real> Parameters<T> for Siren<T> {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &Param<T>)) {
        for (i, l) in self.layers.iter().enumerate() {
            l.visit(&join(prefix, &alloc::format!("{i}")), f);
        }
    }
    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut Param<T>)) {
        for (i, l) in self.layers.iter_mut().enumerate() {
            l.visit_mut(&join(prefix, &alloc::format!("{i}")), f);
        }
    }
}
