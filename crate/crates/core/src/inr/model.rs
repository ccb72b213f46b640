use alloc::vec::Vec;
use rand::Rng;

use super::lookup::{gather, scatter, FeatureLookup, GridView, LookupCache};
use super::query::{cell_scale, warp, MotionFlow, QueryBatch, SpatialFeature};
use crate::error::{Error, Result};
use crate::flow::SlicePair;
use crate::nn::encoder::{Encoder, EncoderCache, EncoderConfig, FeatureGrid};
use crate::nn::param::{join, Param, Parameters};
use crate::nn::siren::{Siren, SirenCache, DEFAULT_OMEGA0};
use crate::Real;

/// Architecture of the full model. Depths count sine layers; every network
/// ends with one affine output layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    /// Data channels `C`.
    pub channels: usize,
    pub encoder: EncoderConfig,
    pub spatial_width: usize,
    pub spatial_depth: usize,
    pub temporal_width: usize,
    pub temporal_depth: usize,
    pub decoder_width: usize,
    pub decoder_depth: usize,
    pub omega0: f64,
    pub lookup: FeatureLookup,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            channels: 2,
            encoder: EncoderConfig::default(),
            spatial_width: 256,
            spatial_depth: 3,
            temporal_width: 256,
            temporal_depth: 3,
            decoder_width: 256,
            decoder_depth: 2,
            omega0: DEFAULT_OMEGA0,
            lookup: FeatureLookup::Nearest,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        self.encoder.validate()?;
        if self.channels == 0 {
            return Err(Error::arg("model needs at least one data channel"));
        }
        let dims = [
            self.spatial_width,
            self.spatial_depth,
            self.temporal_width,
            self.temporal_depth,
            self.decoder_width,
            self.decoder_depth,
        ];
        if dims.contains(&0) {
            return Err(Error::arg("network widths and depths must be positive"));
        }
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(Error::arg(alloc::format!("omega0 must be positive, got {}", self.omega0)));
        }
        Ok(())
    }

    fn widths(input: usize, width: usize, depth: usize, output: usize) -> Vec<usize> {
        let mut w = alloc::vec![input];
        w.extend(core::iter::repeat(width).take(depth));
        w.push(output);
        w
    }
}

/// Encoder + SpatialINR + TemporalINR + decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    pub config: ModelConfig,
    pub encoder: Encoder<T>,
    /// `[offset (2), feature (C_f)] → C_f`; called twice per query.
    pub spatial: Siren<T>,
    /// `[t, f_s] → motion flow (2)`.
    pub temporal: Siren<T>,
    /// `f_st → C` values.
    pub decoder: Siren<T>,
}

/// One encoder input and the queries answered from it.
#[derive(Debug, Clone, Copy)]
pub struct BatchItem<'a> {
    pub pair: &'a SlicePair,
    pub query: &'a QueryBatch,
}

pub struct ForwardCache<T> {
    encoders: Vec<EncoderCache<T>>,
    grids: Vec<(Vec<T>, usize, usize)>,
    owner: Vec<u32>,
    first: LookupCache<T>,
    spatial1: SirenCache<T>,
    temporal: SirenCache<T>,
    /// Per query: whether each warped component escaped the clamp.
    live: Vec<[bool; 2]>,
    second: LookupCache<T>,
    spatial2: SirenCache<T>,
    decoder: SirenCache<T>,
}

/// Intermediate values of one uncached pass.
struct Trace<T> {
    out: Vec<T>,
}

impl<T: Real> Model<T> {
    pub fn new<R: Rng + ?Sized>(config: ModelConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let cf = config.encoder.c_f;
        let encoder = Encoder::new(config.channels, config.encoder, rng)?;
        let spatial = Siren::new(
            &ModelConfig::widths(2 + cf, config.spatial_width, config.spatial_depth, cf),
            config.omega0,
            rng,
        );
        let temporal = Siren::new(
            &ModelConfig::widths(1 + cf, config.temporal_width, config.temporal_depth, 2),
            config.omega0,
            rng,
        );
        let decoder = Siren::new(
            &ModelConfig::widths(cf, config.decoder_width, config.decoder_depth, config.channels),
            config.omega0,
            rng,
        );
        Ok(Self { config, encoder, spatial, temporal, decoder })
    }

    pub fn channels(&self) -> usize {
        self.config.channels
    }

    pub fn feature_channels(&self) -> usize {
        self.config.encoder.c_f
    }

    pub fn encode(&self, pair: &SlicePair) -> Result<FeatureGrid<T>> {
        self.encoder.encode(pair)
    }

    fn to_t(xy: &[[f64; 2]]) -> Vec<[T; 2]> {
        xy.iter().map(|p| [T::from_f64(p[0]), T::from_f64(p[1])]).collect()
    }

    fn check_grid(&self, grid: &FeatureGrid<T>) -> Result<()> {
        if grid.channels != self.feature_channels() {
            return Err(Error::shape("feature grid channels", self.feature_channels(), grid.channels));
        }
        Ok(())
    }

    /// SpatialINR on a single grid: `f_s = F_s(x, f_i)`.
    pub fn spatial_query(&self, xy: &[[f64; 2]], grid: &FeatureGrid<T>) -> Result<SpatialFeature<T>> {
        self.check_grid(grid)?;
        if let Some(p) = xy.iter().find(|p| !(p[0].abs() <= 1.0 && p[1].abs() <= 1.0)) {
            return Err(Error::arg(alloc::format!("query coordinate {p:?} outside [-1, 1]²")));
        }
        let hwc = grid.to_hwc();
        let views = [GridView { hwc: &hwc, height: grid.height, width: grid.width }];
        let owner = alloc::vec![0u32; xy.len()];
        let (input, _) = gather(self.config.lookup, &views, grid.channels, &owner, &Self::to_t(xy));
        let feats = self.spatial.forward(&input, xy.len())?;
        Ok(SpatialFeature { feats, channels: grid.channels })
    }

    /// TemporalINR: `m_t = F_t(t, f_s)`.
    pub fn temporal_query(&self, t: &[f64], fs: &SpatialFeature<T>) -> Result<MotionFlow<T>> {
        let n = t.len();
        if fs.channels != self.feature_channels() || fs.feats.len() != n * fs.channels {
            return Err(Error::shape("spatial features", (n, self.feature_channels()), fs.feats.len()));
        }
        let input = Self::temporal_input(t.iter().map(|&v| T::from_f64(v)), &fs.feats, fs.channels);
        let out = self.temporal.forward(&input, n)?;
        Ok(MotionFlow { flow: out.chunks_exact(2).map(|c| [c[0], c[1]]).collect() })
    }

    fn temporal_input(t: impl Iterator<Item = T>, feats: &[T], c: usize) -> Vec<T> {
        let mut input = Vec::with_capacity(feats.len() + feats.len() / c.max(1));
        for (tv, f) in t.zip(feats.chunks_exact(c)) {
            input.push(tv);
            input.extend_from_slice(f);
        }
        input
    }

    /// Full pipeline for one slice pair: `O^H = F_st(x, t, I^L)`, in
    /// normalized units, `N × C` row-major.
    pub fn forward(&self, query: &QueryBatch, pair: &SlicePair) -> Result<Vec<T>> {
        let grid = self.encode(pair)?;
        self.query_grid(&grid, query)
    }

    /// Decodes queries against an already encoded grid.
    pub fn query_grid(&self, grid: &FeatureGrid<T>, query: &QueryBatch) -> Result<Vec<T>> {
        self.check_grid(grid)?;
        let hwc = grid.to_hwc();
        let views = [GridView { hwc: &hwc, height: grid.height, width: grid.width }];
        let owner = alloc::vec![0u32; query.len()];
        let t: Vec<T> = query.t.iter().map(|&v| T::from_f64(v)).collect();
        Ok(self.decode_uncached(&views, &owner, &Self::to_t(&query.xy), &t)?.out)
    }

    fn decode_uncached(&self, views: &[GridView<'_, T>], owner: &[u32], xy: &[[T; 2]], t: &[T]) -> Result<Trace<T>> {
        let n = xy.len();
        let c = self.feature_channels();
        let lookup = self.config.lookup;
        let (in1, _) = gather(lookup, views, c, owner, xy);
        let fs = self.spatial.forward(&in1, n)?;
        let tin = Self::temporal_input(t.iter().copied(), &fs, c);
        let m = self.temporal.forward(&tin, n)?;
        let flow = MotionFlow { flow: m.chunks_exact(2).map(|v| [v[0], v[1]]).collect() };
        let warped = warp(xy, &flow, (views[0].height, views[0].width))?;
        let (in2, _) = gather(lookup, views, c, owner, &warped);
        let fst = self.spatial.forward(&in2, n)?;
        Ok(Trace { out: self.decoder.forward(&fst, n)? })
    }

    /// Training forward over several encoder inputs; outputs are the
    /// concatenation of every item's `N_i × C` block.
    pub fn forward_batch(&self, items: &[BatchItem<'_>]) -> Result<(Vec<T>, ForwardCache<T>)> {
        if items.is_empty() {
            return Err(Error::arg("empty batch"));
        }
        let c = self.feature_channels();
        let mut encoders = Vec::with_capacity(items.len());
        let mut grids = Vec::with_capacity(items.len());
        let mut owner = Vec::new();
        let mut xy = Vec::new();
        let mut t = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let (grid, cache) = self.encoder.encode_cached(item.pair)?;
            grids.push((grid.to_hwc(), grid.height, grid.width));
            encoders.push(cache);
            owner.extend(core::iter::repeat(i as u32).take(item.query.len()));
            xy.extend(Self::to_t(&item.query.xy));
            t.extend(item.query.t.iter().map(|&v| T::from_f64(v)));
        }
        let n = xy.len();
        let views: Vec<GridView<'_, T>> =
            grids.iter().map(|(g, h, w)| GridView { hwc: g, height: *h, width: *w }).collect();
        let lookup = self.config.lookup;

        let (in1, first) = gather(lookup, &views, c, &owner, &xy);
        let (fs, spatial1) = self.spatial.forward_cached(in1, n)?;
        let tin = Self::temporal_input(t.iter().copied(), &fs, c);
        let (m, temporal) = self.temporal.forward_cached(tin, n)?;
        let one = T::one();
        let scales: Vec<[T; 2]> = views.iter().map(|v| cell_scale(v.height, v.width)).collect();
        let mut live = Vec::with_capacity(n);
        let mut warped = Vec::with_capacity(n);
        for ((p, d), &o) in xy.iter().zip(m.chunks_exact(2)).zip(&owner) {
            let k = scales[o as usize];
            let raw = [p[0] + d[0] * k[0], p[1] + d[1] * k[1]];
            live.push([raw[0].abs() <= one, raw[1].abs() <= one]);
            warped.push([raw[0].max(-one).min(one), raw[1].max(-one).min(one)]);
        }
        let (in2, second) = gather(lookup, &views, c, &owner, &warped);
        let (fst, spatial2) = self.spatial.forward_cached(in2, n)?;
        let (out, decoder) = self.decoder.forward_cached(fst, n)?;
        drop(views);
        Ok((out, ForwardCache { encoders, grids, owner, first, spatial1, temporal, live, second, spatial2, decoder }))
    }

    /// Accumulates gradients of every parameter given `dL/d output`.
    pub fn backward(&mut self, cache: ForwardCache<T>, d_out: Vec<T>) {
        let c = self.feature_channels();
        let ForwardCache { encoders, grids, owner, first, spatial1, temporal, live, second, spatial2, decoder } = cache;
        let views: Vec<GridView<'_, T>> =
            grids.iter().map(|(g, h, w)| GridView { hwc: g, height: *h, width: *w }).collect();
        let mut dgrids: Vec<Vec<T>> = grids.iter().map(|(g, _, _)| alloc::vec![T::zero(); g.len()]).collect();

        let d_fst = self.decoder.backward(decoder, d_out);
        let d_in2 = self.spatial.backward(spatial2, d_fst);
        let d_warped = scatter(&second, &views, &d_in2, &mut dgrids, true);
        let mut d_m = Vec::with_capacity(d_warped.len() * 2);
        for ((d, l), &o) in d_warped.iter().zip(&live).zip(&owner) {
            let k = cell_scale::<T>(views[o as usize].height, views[o as usize].width);
            d_m.push(if l[0] { d[0] * k[0] } else { T::zero() });
            d_m.push(if l[1] { d[1] * k[1] } else { T::zero() });
        }
        let d_tin = self.temporal.backward(temporal, d_m);
        let mut d_fs = Vec::with_capacity(d_tin.len() / (c + 1) * c);
        for row in d_tin.chunks_exact(c + 1) {
            d_fs.extend_from_slice(&row[1..]);
        }
        let d_in1 = self.spatial.backward(spatial1, d_fs);
        scatter(&first, &views, &d_in1, &mut dgrids, false);
        drop(views);

        for ((cache, dg), (_, h, w)) in encoders.into_iter().zip(dgrids).zip(&grids) {
            let hw = h * w;
            let mut chw = alloc::vec![T::zero(); dg.len()];
            for p in 0..hw {
                for ch in 0..c {
                    chw[ch * hw + p] = dg[p * c + ch];
                }
            }
            self.encoder.backward(cache, &chw);
        }
    }

    pub fn cast<U: Real>(&self) -> Model<U> {
        Model {
            config: self.config,
            encoder: self.encoder.cast(),
            spatial: self.spatial.cast(),
            temporal: self.temporal.cast(),
            decoder: self.decoder.cast(),
        }
    }

    /// Copies parameter values from `other` by name; both models must share a layout.
    pub fn load_params(&mut self, mut lookup: impl FnMut(&str, &Param<T>) -> Option<Vec<T>>) -> Result<()> {
        let mut err = None;
        self.visit_mut("", &mut |name, p| {
            if err.is_some() {
                return;
            }
            match lookup(name, p) {
                Some(v) if v.len() == p.len() => p.value = v,
                Some(v) => err = Some(Error::shape("parameter", p.len(), (name.len(), v.len()))),
                None => err = Some(Error::arg(alloc::format!("missing parameter {name}"))),
            }
        });
        err.map_or(Ok(()), Err)
    }
}

impl<T: Real> Parameters<T> for Model<T> {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &Param<T>)) {
        self.encoder.visit(&join(prefix, "encoder"), f);
        self.spatial.visit(&join(prefix, "spatial"), f);
        self.temporal.visit(&join(prefix, "temporal"), f);
        self.decoder.visit(&join(prefix, "decoder"), f);
    }
    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut Param<T>)) {
        self.encoder.visit_mut(&join(prefix, "encoder"), f);
        self.spatial.visit_mut(&join(prefix, "spatial"), f);
        self.temporal.visit_mut(&join(prefix, "temporal"), f);
        self.decoder.visit_mut(&join(prefix, "decoder"), f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::lattice_coords;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> ModelConfig {
        ModelConfig {
            channels: 2,
            encoder: EncoderConfig { c_f: 8, n_blocks: 1, lstm_hidden: 8, kernel: 3 },
            spatial_width: 16,
            spatial_depth: 2,
            temporal_width: 16,
            temporal_depth: 2,
            decoder_width: 16,
            decoder_depth: 2,
            ..ModelConfig::default()
        }
    }

    fn pair(h: usize, w: usize, seed: u64) -> SlicePair {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = h * w * 2;
        let f0 = (0..n).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
        let f1 = (0..n).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
        SlicePair::new([f0, f1], h, w, 2, 0).unwrap()
    }

    #[test]
    fn lattice_query_shape() {
        let cfg = ModelConfig {
            encoder: EncoderConfig { c_f: 16, n_blocks: 1, lstm_hidden: 16, kernel: 3 },
            spatial_width: 32,
            temporal_width: 32,
            decoder_width: 32,
            ..ModelConfig::default()
        };
        let model: Model<f32> = Model::new(cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let q = QueryBatch::at_time(lattice_coords(16, 16), 0.5).unwrap();
        let out = model.forward(&q, &pair(16, 16, 1)).unwrap();
        assert_eq!(out.len(), 256 * 2);
        assert!(out.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn zero_temporal_network_gives_zero_flow() {
        let mut model: Model<f64> = Model::new(small(), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        model.temporal.zero_weights();
        let grid = model.encode(&pair(4, 4, 3)).unwrap();
        let xy = alloc::vec![[0.1, 0.2], [-0.9, 0.7]];
        let fs = model.spatial_query(&xy, &grid).unwrap();
        let m = model.temporal_query(&[0.0, 0.6], &fs).unwrap();
        assert!(m.flow.iter().all(|f| f[0] == 0.0 && f[1] == 0.0));
    }

    #[test]
    fn spatial_query_rejects_out_of_range() {
        let model: Model<f64> = Model::new(small(), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let grid = model.encode(&pair(4, 4, 3)).unwrap();
        assert!(model.spatial_query(&[[1.01, 0.0]], &grid).is_err());
    }

    #[test]
    fn same_cell_same_offset_same_feature() {
        let model: Model<f64> = Model::new(small(), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let grid = model.encode(&pair(4, 4, 3)).unwrap();
        let fs = model.spatial_query(&[[0.3, -0.3], [0.3, -0.3]], &grid).unwrap();
        assert_eq!(fs.feats[..8], fs.feats[8..]);
    }

    #[test]
    fn batch_forward_matches_single_forward() {
        let model: Model<f64> = Model::new(small(), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let (p0, p1) = (pair(4, 4, 1), pair(4, 4, 2));
        let q0 = QueryBatch::new(alloc::vec![[0.1, 0.3], [-0.5, 0.9]], alloc::vec![0.2, 0.7]).unwrap();
        let q1 = QueryBatch::new(alloc::vec![[0.6, -0.2]], alloc::vec![1.0]).unwrap();
        let items = [BatchItem { pair: &p0, query: &q0 }, BatchItem { pair: &p1, query: &q1 }];
        let (out, _) = model.forward_batch(&items).unwrap();
        let mut expect = model.forward(&q0, &p0).unwrap();
        expect.extend(model.forward(&q1, &p1).unwrap());
        assert_eq!(out, expect);
    }
}
