use alloc::vec::Vec;
use rand::Rng;

use super::param::{join, Param, Parameters};
use crate::real::{gemm, Op};
use crate::Real;

/// Stride-1, zero-padded ("same") 2D convolution over `(C, H, W)` maps.
/// Weights are stored `(out, in·k·k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d<T> {
    pub weight: Param<T>,
    pub bias: Param<T>,
    pub c_in: usize,
    pub c_out: usize,
    pub kernel: usize,
}

impl<T: Real> Conv2d<T> {
    /// Uniform init with bound `1/sqrt(fan_in)` for weights and bias.
    pub fn new<R: Rng + ?Sized>(c_in: usize, c_out: usize, kernel: usize, rng: &mut R) -> Self {
        assert!(kernel % 2 == 1, "kernel must be odd");
        let fan_in = c_in * kernel * kernel;
        let b = 1.0 / libm::sqrt(fan_in as f64);
        let w = (0..c_out * fan_in).map(|_| T::from_f64(rng.gen_range(-b..=b))).collect();
        let bias = (0..c_out).map(|_| T::from_f64(rng.gen_range(-b..=b))).collect();
        Self {
            weight: Param::new(&[c_out, c_in, kernel, kernel], w),
            bias: Param::new(&[c_out], bias),
            c_in,
            c_out,
            kernel,
        }
    }

    /// Identity map (`c_in == c_out`): centre tap 1 on the diagonal, zero bias.
    pub fn identity(channels: usize, kernel: usize) -> Self {
        assert!(kernel % 2 == 1, "kernel must be odd");
        let kk = kernel * kernel;
        let mut w = alloc::vec![T::zero(); channels * channels * kk];
        let centre = kk / 2;
        for c in 0..channels {
            w[(c * channels + c) * kk + centre] = T::one();
        }
        Self {
            weight: Param::new(&[channels, channels, kernel, kernel], w),
            bias: Param::zeros(&[channels]),
            c_in: channels,
            c_out: channels,
            kernel,
        }
    }

    fn patch_len(&self) -> usize {
        self.c_in * self.kernel * self.kernel
    }

    fn im2col(&self, x: &[T], h: usize, w: usize) -> Vec<T> {
        let k = self.kernel;
        if k == 1 {
            return x.to_vec();
        }
        let p = k / 2;
        let hw = h * w;
        let mut col = alloc::vec![T::zero(); self.patch_len() * hw];
        for ci in 0..self.c_in {
            let plane = &x[ci * hw..(ci + 1) * hw];
            for ky in 0..k {
                for kx in 0..k {
                    let row = &mut col[((ci * k + ky) * k + kx) * hw..][..hw];
                    for y in 0..h {
                        let sy = y as isize + ky as isize - p as isize;
                        if sy < 0 || sy >= h as isize {
                            continue;
                        }
                        let src = &plane[sy as usize * w..(sy as usize + 1) * w];
                        let dst = &mut row[y * w..(y + 1) * w];
                        let shift = kx as isize - p as isize;
                        let (lo, hi) = ((-shift).max(0) as usize, (w as isize - shift).min(w as isize) as usize);
                        for xx in lo..hi {
                            dst[xx] = src[(xx as isize + shift) as usize];
                        }
                    }
                }
            }
        }
        col
    }

    fn col2im(&self, col: &[T], h: usize, w: usize) -> Vec<T> {
        let k = self.kernel;
        if k == 1 {
            return col.to_vec();
        }
        let p = k / 2;
        let hw = h * w;
        let mut x = alloc::vec![T::zero(); self.c_in * hw];
        for ci in 0..self.c_in {
            let plane = &mut x[ci * hw..(ci + 1) * hw];
            for ky in 0..k {
                for kx in 0..k {
                    let row = &col[((ci * k + ky) * k + kx) * hw..][..hw];
                    for y in 0..h {
                        let sy = y as isize + ky as isize - p as isize;
                        if sy < 0 || sy >= h as isize {
                            continue;
                        }
                        let dst = &mut plane[sy as usize * w..(sy as usize + 1) * w];
                        let src = &row[y * w..(y + 1) * w];
                        let shift = kx as isize - p as isize;
                        let (lo, hi) = ((-shift).max(0) as usize, (w as isize - shift).min(w as isize) as usize);
                        for xx in lo..hi {
                            dst[(xx as isize + shift) as usize] += src[xx];
                        }
                    }
                }
            }
        }
        x
    }

    /// Returns the output map and the im2col buffer needed by `backward`.
    pub fn forward(&self, x: &[T], h: usize, w: usize) -> (Vec<T>, Vec<T>) {
        debug_assert_eq!(x.len(), self.c_in * h * w);
        let hw = h * w;
        let col = self.im2col(x, h, w);
        let mut out = Vec::with_capacity(self.c_out * hw);
        for &b in &self.bias.value {
            out.extend(core::iter::repeat(b).take(hw));
        }
        gemm(self.c_out, self.patch_len(), hw, &self.weight.value, Op::N, &col, Op::N, T::one(), &mut out);
        (out, col)
    }

    pub fn backward(&mut self, col: &[T], dout: &[T], h: usize, w: usize, need_dx: bool) -> Option<Vec<T>> {
        let hw = h * w;
        let pl = self.patch_len();
        gemm(self.c_out, hw, pl, dout, Op::N, col, Op::T, T::one(), &mut self.weight.grad);
        for (g, plane) in self.bias.grad.iter_mut().zip(dout.chunks_exact(hw)) {
            *g += plane.iter().copied().sum::<T>();
        }
        need_dx.then(|| {
            let mut dcol = alloc::vec![T::zero(); pl * hw];
            gemm(pl, self.c_out, hw, &self.weight.value, Op::T, dout, Op::N, T::zero(), &mut dcol);
            self.col2im(&dcol, h, w)
        })
    }

    pub fn cast<U: Real>(&self) -> Conv2d<U> {
        Conv2d {
            weight: self.weight.cast(),
            bias: self.bias.cast(),
            c_in: self.c_in,
            c_out: self.c_out,
            kernel: self.kernel,
        }
    }
}

impl<T: Real> Parameters<T> for Conv2d<T> {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &Param<T>)) {
        f(&join(prefix, "weight"), &self.weight);
        f(&join(prefix, "bias"), &self.bias);
    }
    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut Param<T>)) {
        f(&join(prefix, "weight"), &mut self.weight);
        f(&join(prefix, "bias"), &mut self.bias);
    }
}
