//! Input encoder: shared per-frame residual feature extractor, a gated
//! two-branch temporal feature blend, and bidirectional ConvLSTM fusion over
//! `[f0, f_mid, f1]`.

use alloc::vec::Vec;
use rand::Rng;

use super::conv::Conv2d;
use super::convlstm::{BiConvLstm, FuseCache};
use super::param::{join, Param, Parameters};
use super::leaky;
use crate::error::{Error, Result};
use crate::flow::SlicePair;
use crate::Real;

pub const LEAKY_SLOPE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderConfig {
    /// Feature channels of the output grid.
    pub c_f: usize,
    pub n_blocks: usize,
    pub lstm_hidden: usize,
    /// Odd spatial kernel size.
    pub kernel: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self { c_f: 64, n_blocks: 3, lstm_hidden: 64, kernel: 3 }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_f == 0 || self.lstm_hidden == 0 || self.kernel == 0 {
            return Err(Error::arg("encoder widths and kernel must be positive"));
        }
        if self.kernel % 2 == 0 {
            return Err(Error::arg(alloc::format!("encoder kernel must be odd, got {}", self.kernel)));
        }
        Ok(())
    }
}

/// Encoder output `(C_f, H_l, W_l)`, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid<T> {
    pub features: Vec<T>,
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl<T: Real> FeatureGrid<T> {
    pub fn source_shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Pixel-major copy `(H, W, C)` for per-query gathers.
    pub(crate) fn to_hwc(&self) -> Vec<T> {
        let hw = self.height * self.width;
        let mut out = alloc::vec![T::zero(); self.features.len()];
        for c in 0..self.channels {
            for p in 0..hw {
                out[p * self.channels + c] = self.features[c * hw + p];
            }
        }
        out
    }
}

/// `out = g0 ⊙ B0(f0) + g1 ⊙ B1(f1)` with per-channel gates
/// `g_k ∝ w_k(α)·exp(λ_k)`, `w = (1-α, α)`, normalized to sum to one.
/// Branches start as identity convolutions and the logits at zero, so the
/// initial blend at `α = 0.5` is the plain mean.
#[derive(Debug, Clone, PartialEq)]
pub struct GatedBlend<T> {
    pub branch0: Conv2d<T>,
    pub branch1: Conv2d<T>,
    /// `(2, C_f)` gate logits.
    pub logits: Param<T>,
}

struct BlendCache<T> {
    col0: Vec<T>,
    col1: Vec<T>,
    b0: Vec<T>,
    b1: Vec<T>,
    gates: Vec<(T, T)>,
}

impl<T: Real> GatedBlend<T> {
    pub fn new(channels: usize, kernel: usize) -> Self {
        Self {
            branch0: Conv2d::identity(channels, kernel),
            branch1: Conv2d::identity(channels, kernel),
            logits: Param::zeros(&[2, channels]),
        }
    }

    fn channels(&self) -> usize {
        self.branch0.c_out
    }

    /// Per-channel `(g0, g1)`.
    pub fn gates(&self, alpha: T) -> Vec<(T, T)> {
        let c = self.channels();
        (0..c)
            .map(|ch| {
                let (l0, l1) = (self.logits.value[ch], self.logits.value[c + ch]);
                let m = l0.max(l1);
                let w0 = (T::one() - alpha) * (l0 - m).exp();
                let w1 = alpha * (l1 - m).exp();
                let s = w0 + w1;
                (w0 / s, w1 / s)
            })
            .collect()
    }

    fn forward_cached(&self, f0: &[T], f1: &[T], alpha: T, h: usize, w: usize) -> (Vec<T>, BlendCache<T>) {
        let hw = h * w;
        let (b0, col0) = self.branch0.forward(f0, h, w);
        let (b1, col1) = self.branch1.forward(f1, h, w);
        let gates = self.gates(alpha);
        let mut out = Vec::with_capacity(b0.len());
        for (ch, &(g0, g1)) in gates.iter().enumerate() {
            let r = ch * hw..(ch + 1) * hw;
            out.extend(b0[r.clone()].iter().zip(&b1[r]).map(|(a, b)| g0 * *a + g1 * *b));
        }
        (out, BlendCache { col0, col1, b0, b1, gates })
    }

    fn backward(&mut self, cache: BlendCache<T>, dout: &[T], h: usize, w: usize) -> (Vec<T>, Vec<T>) {
        let hw = h * w;
        let c = self.channels();
        let mut db0 = Vec::with_capacity(dout.len());
        let mut db1 = Vec::with_capacity(dout.len());
        for (ch, &(g0, g1)) in cache.gates.iter().enumerate() {
            let r = ch * hw..(ch + 1) * hw;
            let (mut dg0, mut dg1) = (T::zero(), T::zero());
            for ((d, a), b) in dout[r.clone()].iter().zip(&cache.b0[r.clone()]).zip(&cache.b1[r]) {
                dg0 += *d * *a;
                dg1 += *d * *b;
                db0.push(*d * g0);
                db1.push(*d * g1);
            }
            let mean = g0 * dg0 + g1 * dg1;
            self.logits.grad[ch] += g0 * (dg0 - mean);
            self.logits.grad[c + ch] += g1 * (dg1 - mean);
        }
        let df0 = self.branch0.backward(&cache.col0, &db0, h, w, true).expect("dx requested");
        let df1 = self.branch1.backward(&cache.col1, &db1, h, w, true).expect("dx requested");
        (df0, df1)
    }

    pub fn cast<U: Real>(&self) -> GatedBlend<U> {
        GatedBlend { branch0: self.branch0.cast(), branch1: self.branch1.cast(), logits: self.logits.cast() }
    }
}

impl<T: Real> Parameters<T> for GatedBlend<T> {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &Param<T>)) {
        self.branch0.visit(&join(prefix, "branch0"), f);
        self.branch1.visit(&join(prefix, "branch1"), f);
        f(&join(prefix, "logits"), &self.logits);
    }
    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut Param<T>)) {
        self.branch0.visit_mut(&join(prefix, "branch0"), f);
        self.branch1.visit_mut(&join(prefix, "branch1"), f);
        f(&join(prefix, "logits"), &mut self.logits);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResBlock<T> {
    pub conv1: Conv2d<T>,
    pub conv2: Conv2d<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Encoder<T> {
    pub config: EncoderConfig,
    pub c_in: usize,
    pub input: Conv2d<T>,
    pub blocks: Vec<ResBlock<T>>,
    pub blend: GatedBlend<T>,
    pub fusion: BiConvLstm<T>,
}

struct ExtractCache<T> {
    in_col: Vec<T>,
    in_pre: Vec<T>,
    blocks: Vec<(Vec<T>, Vec<T>, Vec<T>)>,
}

pub struct EncoderCache<T> {
    extract: [ExtractCache<T>; 2],
    blend: BlendCache<T>,
    fuse: FuseCache<T>,
    h: usize,
    w: usize,
}

impl<T: Real> Encoder<T> {
    pub fn new<R: Rng + ?Sized>(c_in: usize, config: EncoderConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        if c_in == 0 {
            return Err(Error::arg("encoder needs at least one input channel"));
        }
        let k = config.kernel;
        let input = Conv2d::new(c_in, config.c_f, k, rng);
        let blocks = (0..config.n_blocks)
            .map(|_| ResBlock { conv1: Conv2d::new(config.c_f, config.c_f, k, rng), conv2: Conv2d::new(config.c_f, config.c_f, k, rng) })
            .collect();
        let blend = GatedBlend::new(config.c_f, k);
        let fusion = BiConvLstm::new(config.c_f, config.lstm_hidden, config.c_f, k, rng);
        Ok(Self { config, c_in, input, blocks, blend, fusion })
    }

    fn check_pair(&self, pair: &SlicePair) -> Result<()> {
        if pair.channels != self.c_in {
            return Err(Error::shape("encoder input channels", self.c_in, pair.channels));
        }
        let n = pair.height * pair.width * pair.channels;
        if pair.frames.iter().any(|f| f.len() != n) {
            return Err(Error::shape("slice pair frames", n, [pair.frames[0].len(), pair.frames[1].len()]));
        }
        Ok(())
    }

    fn to_chw(frame: &[f32], h: usize, w: usize, c: usize) -> Vec<T> {
        let hw = h * w;
        let mut out = alloc::vec![T::zero(); frame.len()];
        for p in 0..hw {
            for ch in 0..c {
                out[ch * hw + p] = T::from_f64(frame[p * c + ch] as f64);
            }
        }
        out
    }

    fn extract_one(&self, x: &[T], h: usize, w: usize) -> (Vec<T>, ExtractCache<T>) {
        let slope = T::from_f64(LEAKY_SLOPE);
        let (in_pre, in_col) = self.input.forward(x, h, w);
        let mut feat: Vec<T> = in_pre.iter().map(|&v| leaky(v, slope)).collect();
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let (pre1, col1) = b.conv1.forward(&feat, h, w);
            let act: Vec<T> = pre1.iter().map(|&v| leaky(v, slope)).collect();
            let (res, col2) = b.conv2.forward(&act, h, w);
            for (f, r) in feat.iter_mut().zip(&res) {
                *f += *r;
            }
            blocks.push((col1, pre1, col2));
        }
        (feat, ExtractCache { in_col, in_pre, blocks })
    }

    fn extract_backward(&mut self, cache: ExtractCache<T>, dfeat: Vec<T>, h: usize, w: usize) {
        let slope = T::from_f64(LEAKY_SLOPE);
        let mut d = dfeat;
        for (b, (col1, pre1, col2)) in self.blocks.iter_mut().zip(cache.blocks).rev() {
            let mut dact = b.conv2.backward(&col2, &d, h, w, true).expect("dx requested");
            for (g, p) in dact.iter_mut().zip(&pre1) {
                if *p <= T::zero() {
                    *g *= slope;
                }
            }
            let dres_in = b.conv1.backward(&col1, &dact, h, w, true).expect("dx requested");
            for (a, b) in d.iter_mut().zip(&dres_in) {
                *a += *b;
            }
        }
        for (g, p) in d.iter_mut().zip(&cache.in_pre) {
            if *p <= T::zero() {
                *g *= slope;
            }
        }
        self.input.backward(&cache.in_col, &d, h, w, false);
    }

    /// Per-frame feature maps `(C_f, H_l, W_l)` from the shared extractor.
    pub fn extract_features(&self, pair: &SlicePair) -> Result<[Vec<T>; 2]> {
        self.check_pair(pair)?;
        let (h, w, c) = (pair.height, pair.width, pair.channels);
        let f0 = self.extract_one(&Self::to_chw(&pair.frames[0], h, w, c), h, w).0;
        let f1 = self.extract_one(&Self::to_chw(&pair.frames[1], h, w, c), h, w).0;
        Ok([f0, f1])
    }

    pub fn interpolate_features(&self, f0: &[T], f1: &[T], alpha: f64, h: usize, w: usize) -> Result<Vec<T>> {
        let n = self.config.c_f * h * w;
        if f0.len() != n || f1.len() != n {
            return Err(Error::shape("interpolated feature maps", n, [f0.len(), f1.len()]));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::arg(alloc::format!("blend weight must lie in [0, 1], got {alpha}")));
        }
        Ok(self.blend.forward_cached(f0, f1, T::from_f64(alpha), h, w).0)
    }

    pub fn fuse_convlstm(&self, seq: &[&[T]], h: usize, w: usize) -> Result<FeatureGrid<T>> {
        let (features, _) = self.fusion.fuse(seq, h, w)?;
        Ok(FeatureGrid { features, channels: self.config.c_f, height: h, width: w })
    }

    pub fn encode(&self, pair: &SlicePair) -> Result<FeatureGrid<T>> {
        Ok(self.encode_cached(pair)?.0)
    }

    pub fn encode_cached(&self, pair: &SlicePair) -> Result<(FeatureGrid<T>, EncoderCache<T>)> {
        self.check_pair(pair)?;
        let (h, w, c) = (pair.height, pair.width, pair.channels);
        let (f0, e0) = self.extract_one(&Self::to_chw(&pair.frames[0], h, w, c), h, w);
        let (f1, e1) = self.extract_one(&Self::to_chw(&pair.frames[1], h, w, c), h, w);
        let (fm, blend) = self.blend.forward_cached(&f0, &f1, T::from_f64(0.5), h, w);
        let (features, fuse) = self.fusion.fuse(&[&f0, &fm, &f1], h, w)?;
        let grid = FeatureGrid { features, channels: self.config.c_f, height: h, width: w };
        Ok((grid, EncoderCache { extract: [e0, e1], blend, fuse, h, w }))
    }

    /// Accumulates parameter gradients given `dL/d grid` (channel-major).
    pub fn backward(&mut self, cache: EncoderCache<T>, dgrid: &[T]) {
        let (h, w) = (cache.h, cache.w);
        let mut dseq = self.fusion.fuse_backward(cache.fuse, dgrid, h, w).into_iter();
        let (mut d0, dm, mut d1) = (dseq.next().unwrap(), dseq.next().unwrap(), dseq.next().unwrap());
        let (b0, b1) = self.blend.backward(cache.blend, &dm, h, w);
        for (a, b) in d0.iter_mut().zip(&b0) {
            *a += *b;
        }
        for (a, b) in d1.iter_mut().zip(&b1) {
            *a += *b;
        }
        let [e0, e1] = cache.extract;
        self.extract_backward(e0, d0, h, w);
        self.extract_backward(e1, d1, h, w);
    }

    /// Sets every bias in the encoder to zero.
    pub fn zero_biases(&mut self) {
        self.visit_mut("", &mut |name, p| {
            if name.ends_with("bias") {
                p.value.iter_mut().for_each(|v| *v = T::zero());
            }
        });
    }

    pub fn cast<U: Real>(&self) -> Encoder<U> {
        Encoder {
            config: self.config,
            c_in: self.c_in,
            input: self.input.cast(),
            blocks: self.blocks.iter().map(|b| ResBlock { conv1: b.conv1.cast(), conv2: b.conv2.cast() }).collect(),
            blend: self.blend.cast(),
            fusion: self.fusion.cast(),
        }
    }
}

impl<T: Real> Parameters<T> for Encoder<T> {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &Param<T>)) {
        self.input.visit(&join(prefix, "input"), f);
        for (i, b) in self.blocks.iter().enumerate() {
            let p = join(prefix, &alloc::format!("block{i}"));
            b.conv1.visit(&join(&p, "conv1"), f);
            b.conv2.visit(&join(&p, "conv2"), f);
        }
        self.blend.visit(&join(prefix, "blend"), f);
        self.fusion.visit(&join(prefix, "fusion"), f);
    }
    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut Param<T>)) {
        self.input.visit_mut(&join(prefix, "input"), f);
        for (i, b) in self.blocks.iter_mut().enumerate() {
            let p = join(prefix, &alloc::format!("block{i}"));
            b.conv1.visit_mut(&join(&p, "conv1"), f);
            b.conv2.visit_mut(&join(&p, "conv2"), f);
        }
        self.blend.visit_mut(&join(prefix, "blend"), f);
        self.fusion.visit_mut(&join(prefix, "fusion"), f);
    }
}
