//! One-stage and two-stage training, checkpoints and evaluation.

mod adam;
mod config;
mod eval;
mod loss;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use adam::Adam;
pub use config::TrainConfig;
pub use eval::{evaluate, evaluate_frames, heldout_intermediate_frames, hull_dims, reconstruct, reconstruct_frames, EvalResult};
pub use loss::{charbonnier, charbonnier_with_grad};

use crate::error::{Error, Result};
use crate::flow::{crop_patch_from, downsample, normalize, FlowField, NormStats, TrainingSample};
use crate::inr::{BatchItem, Model, QueryBatch};
use crate::nn::Parameters;

/// A trained model with everything needed to reuse it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model<f32>,
    pub config: TrainConfig,
    pub norm: NormStats,
    pub iteration: u64,
    /// Mean Charbonnier loss of every step.
    pub loss_history: Vec<f32>,
    /// Factors drawn by the second stage, one per step.
    pub stage2_factors: Vec<(usize, usize)>,
}

/// Number of leading slice pairs used for training; the rest are held out.
pub fn training_pairs(n_pairs: usize, holdout_fraction: f64) -> usize {
    if n_pairs <= 1 {
        return n_pairs;
    }
    let held = libm::ceil(n_pairs as f64 * holdout_fraction) as usize;
    n_pairs - held.min(n_pairs - 1)
}

/// Uniform integer factor pairs from inclusive ranges, on its own stream so
/// the sequence depends only on the seed.
#[derive(Debug, Clone)]
pub struct FactorSampler {
    rng: ChaCha8Rng,
    sx: (usize, usize),
    st: (usize, usize),
}

impl FactorSampler {
    pub fn new(seed: u64, sx: (usize, usize), st: (usize, usize)) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_fac7_0000_0002), sx, st }
    }

    pub fn next_pair(&mut self) -> (usize, usize) {
        (self.rng.gen_range(self.sx.0..=self.sx.1), self.rng.gen_range(self.st.0..=self.st.1))
    }
}

/// Normalized training data at one factor pair.
struct Level {
    low: FlowField,
    factors: (usize, usize),
    pairs: Vec<usize>,
}

struct Trainer<'a> {
    cfg: &'a TrainConfig,
    high: FlowField,
    model: Model<f32>,
    opt: Adam<f32>,
    rng: ChaCha8Rng,
    iteration: u64,
    history: Vec<f32>,
}

impl Trainer<'_> {
    fn sample(&mut self, level: &Level) -> Result<TrainingSample> {
        let patch = self.cfg.patch.min(level.low.height()).min(level.low.width());
        let mut s = crop_patch_from(&level.low, &self.high, level.factors, patch, &level.pairs, &mut self.rng)?;
        let lattice = s.coords.len();
        let q = self.cfg.queries_per_sample;
        if q > 0 && q < lattice {
            let mut idx = sample(&mut self.rng, lattice, q).into_vec();
            idx.sort_unstable();
            let c = level.low.channels();
            let mut target = Vec::with_capacity(q * c);
            for &i in &idx {
                target.extend_from_slice(&s.target[i * c..(i + 1) * c]);
            }
            let xy = idx.iter().map(|&i| s.coords.xy[i]).collect();
            let t = idx.iter().map(|&i| s.coords.t[i]).collect();
            s.coords = QueryBatch::new(xy, t)?;
            s.target = target;
        }
        Ok(s)
    }

    fn step(&mut self, level: &Level) -> Result<f32> {
        let lr = self.cfg.lr_at(self.iteration);
        let samples = (0..self.cfg.batch).map(|_| self.sample(level)).collect::<Result<Vec<_>>>()?;
        let items: Vec<BatchItem<'_>> =
            samples.iter().map(|s| BatchItem { pair: &s.input, query: &s.coords }).collect();
        let target: Vec<f32> = samples.iter().flat_map(|s| s.target.iter().copied()).collect();
        let (out, cache) = self.model.forward_batch(&items)?;
        let (loss, grad) = charbonnier_with_grad(&out, &target, self.cfg.charbonnier_eps)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite { iteration: self.iteration, lr, seed: self.cfg.seed });
        }
        self.model.zero_grad();
        self.model.backward(cache, grad);
        self.opt.update(&mut self.model, lr);
        let mut finite = true;
        self.model.visit("", &mut |_, p| finite &= p.value.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::NonFinite { iteration: self.iteration, lr, seed: self.cfg.seed });
        }
        self.iteration += 1;
        self.history.push(loss as f32);
        Ok(loss as f32)
    }
}

/// Validates inputs and sets up the stage-1 trainer. Returns the trainer,
/// the stage-1 level, the normalization and the first held-out high-res frame.
fn prepare<'a>(low: &FlowField, high: &FlowField, cfg: &'a TrainConfig) -> Result<(Trainer<'a>, Level, NormStats, usize)> {
    cfg.validate()?;
    if high.channels() != cfg.model.channels {
        return Err(Error::shape("data channels", cfg.model.channels, high.channels()));
    }
    let expect = downsample(high, cfg.sx, cfg.st)?;
    if expect.dims() != low.dims() {
        return Err(Error::shape("low-res field", expect.dims(), low.dims()));
    }
    if expect.values() != low.values() {
        return Err(Error::arg("low-res field is not the strided downsample of the high-res field"));
    }
    if low.frames() < 2 || low.height() < 2 || low.width() < 2 {
        return Err(Error::arg("training needs at least two low-res nodes per axis"));
    }
    let (high_n, norm) = normalize(high);
    let low_n = norm.normalize_field(low);
    let n_train = training_pairs(low.frames() - 1, cfg.holdout_fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let model = Model::new(cfg.model, &mut rng)?;
    let trainer = Trainer {
        cfg,
        high: high_n,
        model,
        opt: Adam::new(cfg.beta1, cfg.beta2),
        rng,
        iteration: 0,
        history: Vec::with_capacity((cfg.iters + cfg.stage2_iters) as usize),
    };
    let level = Level { low: low_n, factors: (cfg.sx, cfg.st), pairs: (0..n_train).collect() };
    Ok((trainer, level, norm, n_train * cfg.st))
}

/// Trains at the fixed factors `(cfg.sx, cfg.st)`. `low` must be the strided
/// downsample of `high`; the last `holdout_fraction` of slice pairs is never
/// sampled.
pub fn train_one_stage(low: &FlowField, high: &FlowField, cfg: &TrainConfig) -> Result<Checkpoint> {
    train_one_stage_with(low, high, cfg, &mut |_, _| {})
}

/// [`train_one_stage`] reporting `(iteration, loss)` after every step.
pub fn train_one_stage_with(
    low: &FlowField,
    high: &FlowField,
    cfg: &TrainConfig,
    on_step: &mut dyn FnMut(u64, f32),
) -> Result<Checkpoint> {
    let (mut tr, level, norm, _) = prepare(low, high, cfg)?;
    for _ in 0..cfg.iters {
        let loss = tr.step(&level)?;
        on_step(tr.iteration, loss);
    }
    tr.model.zero_grad();
    Ok(Checkpoint {
        model: tr.model,
        config: cfg.clone(),
        norm,
        iteration: tr.iteration,
        loss_history: tr.history,
        stage2_factors: Vec::new(),
    })
}

/// Stage 1 as in [`train_one_stage`], then `stage2_iters` steps whose factor
/// pair is redrawn uniformly from the stage-2 ranges for every batch. Only
/// slice pairs lying entirely before the held-out frames are used.
pub fn train_two_stage(low: &FlowField, high: &FlowField, cfg: &TrainConfig) -> Result<Checkpoint> {
    train_two_stage_with(low, high, cfg, &mut |_, _| {})
}

/// [`train_two_stage`] reporting `(iteration, loss)` after every step.
pub fn train_two_stage_with(
    low: &FlowField,
    high: &FlowField,
    cfg: &TrainConfig,
    on_step: &mut dyn FnMut(u64, f32),
) -> Result<Checkpoint> {
    Ok(run_stages(low, high, cfg, on_step, false)?.1)
}

/// Runs the two-stage schedule once and also returns the state at the end
/// of stage 1, which is exactly what [`train_one_stage`] produces.
pub fn train_paired(
    low: &FlowField,
    high: &FlowField,
    cfg: &TrainConfig,
    on_step: &mut dyn FnMut(u64, f32),
) -> Result<(Checkpoint, Checkpoint)> {
    let (one, two) = run_stages(low, high, cfg, on_step, true)?;
    Ok((one.expect("snapshot requested"), two))
}

fn run_stages(
    low: &FlowField,
    high: &FlowField,
    cfg: &TrainConfig,
    on_step: &mut dyn FnMut(u64, f32),
    snapshot: bool,
) -> Result<(Option<Checkpoint>, Checkpoint)> {
    if !cfg.two_stage {
        return Err(Error::arg("two_stage is not set in the configuration"));
    }
    let (mut tr, level, norm, split_frame) = prepare(low, high, cfg)?;
    for _ in 0..cfg.iters {
        let loss = tr.step(&level)?;
        on_step(tr.iteration, loss);
    }
    let first = snapshot.then(|| {
        let mut model = tr.model.clone();
        model.zero_grad();
        Checkpoint {
            model,
            config: TrainConfig { two_stage: false, ..cfg.clone() },
            norm: norm.clone(),
            iteration: tr.iteration,
            loss_history: tr.history.clone(),
            stage2_factors: Vec::new(),
        }
    });
    let mut sampler = FactorSampler::new(cfg.seed, cfg.stage2_sx, cfg.stage2_st);
    let mut levels: BTreeMap<(usize, usize), Level> = BTreeMap::new();
    let mut drawn = Vec::with_capacity(cfg.stage2_iters as usize);
    for _ in 0..cfg.stage2_iters {
        let f = sampler.next_pair();
        if !levels.contains_key(&f) {
            levels.insert(f, stage2_level(&tr.high, f, split_frame)?);
        }
        let loss = tr.step(&levels[&f])?;
        drawn.push(f);
        on_step(tr.iteration, loss);
    }
    tr.model.zero_grad();
    Ok((
        first,
        Checkpoint {
            model: tr.model,
            config: cfg.clone(),
            norm,
            iteration: tr.iteration,
            loss_history: tr.history,
            stage2_factors: drawn,
        },
    ))
}

fn stage2_level(high_n: &FlowField, (sx, st): (usize, usize), split_frame: usize) -> Result<Level> {
    let low = downsample(high_n, sx, st)?;
    if low.frames() < 2 || low.height() < 2 || low.width() < 2 {
        return Err(Error::arg(alloc::format!("stage-2 factors ({sx}, {st}) leave fewer than two nodes per axis")));
    }
    let pairs: Vec<usize> = (0..low.frames() - 1).filter(|k| (k + 1) * st <= split_frame).collect();
    if pairs.is_empty() {
        return Err(Error::arg(alloc::format!("no training slice pair fits temporal factor {st}")));
    }
    Ok(Level { low, factors: (sx, st), pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::gen_taylor_green;
    use crate::inr::ModelConfig;
    use crate::nn::encoder::EncoderConfig;

    fn tiny_cfg() -> TrainConfig {
        TrainConfig {
            iters: 3,
            batch: 2,
            patch: 4,
            queries_per_sample: 20,
            lr: 1e-3,
            model: ModelConfig {
                encoder: EncoderConfig { c_f: 4, n_blocks: 1, lstm_hidden: 4, kernel: 3 },
                spatial_width: 8,
                spatial_depth: 2,
                temporal_width: 8,
                temporal_depth: 2,
                decoder_width: 8,
                decoder_depth: 2,
                ..ModelConfig::default()
            },
            ..TrainConfig::default()
        }
    }

    #[test]
    fn holdout_split() {
        assert_eq!(training_pairs(16, 0.1), 14);
        assert_eq!(training_pairs(10, 0.1), 9);
        assert_eq!(training_pairs(10, 0.0), 10);
        assert_eq!(training_pairs(1, 0.5), 1);
        assert_eq!(training_pairs(2, 0.9), 1);
    }

    #[test]
    fn one_stage_is_deterministic() {
        let high = gen_taylor_green(17, 9, 0.1).unwrap();
        let cfg = tiny_cfg();
        let low = downsample(&high, cfg.sx, cfg.st).unwrap();
        let a = train_one_stage(&low, &high, &cfg).unwrap();
        let b = train_one_stage(&low, &high, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.loss_history.len(), 3);
        assert_eq!(a.iteration, 3);
    }

    #[test]
    fn empty_second_stage_matches_one_stage() {
        let high = gen_taylor_green(17, 9, 0.1).unwrap();
        let mut cfg = tiny_cfg();
        cfg.two_stage = true;
        cfg.stage2_iters = 0;
        let low = downsample(&high, cfg.sx, cfg.st).unwrap();
        let a = train_one_stage(&low, &high, &cfg).unwrap();
        let b = train_two_stage(&low, &high, &cfg).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.loss_history, b.loss_history);
    }

    #[test]
    fn second_stage_draws_from_ranges() {
        let high = gen_taylor_green(17, 17, 0.1).unwrap();
        let mut cfg = tiny_cfg();
        cfg.two_stage = true;
        cfg.stage2_iters = 4;
        cfg.stage2_sx = (2, 4);
        cfg.stage2_st = (1, 2);
        let low = downsample(&high, cfg.sx, cfg.st).unwrap();
        let ck = train_two_stage(&low, &high, &cfg).unwrap();
        assert_eq!(ck.stage2_factors.len(), 4);
        assert!(ck.stage2_factors.iter().all(|&(s, t)| (2..=4).contains(&s) && (1..=2).contains(&t)));
        assert_eq!(ck.loss_history.len(), 7);
    }

    #[test]
    fn paired_snapshot_equals_one_stage() {
        let high = gen_taylor_green(17, 17, 0.1).unwrap();
        let mut cfg = tiny_cfg();
        let low = downsample(&high, cfg.sx, cfg.st).unwrap();
        let one = train_one_stage(&low, &high, &cfg).unwrap();
        cfg.two_stage = true;
        cfg.stage2_iters = 2;
        cfg.stage2_st = (1, 2);
        let (snap, two) = train_paired(&low, &high, &cfg, &mut |_, _| {}).unwrap();
        assert_eq!(snap.model, one.model);
        assert_eq!(snap.loss_history, one.loss_history);
        assert_eq!(two, train_two_stage(&low, &high, &cfg).unwrap());
    }

    #[test]
    fn rejects_mismatched_low_res() {
        let high = gen_taylor_green(17, 9, 0.1).unwrap();
        let cfg = tiny_cfg();
        let low = downsample(&high, 2, 2).unwrap();
        assert!(train_one_stage(&low, &high, &cfg).is_err());
    }

    #[test]
    fn factor_sampler_replays() {
        let mut a = FactorSampler::new(7, (2, 4), (2, 8));
        let mut b = FactorSampler::new(7, (2, 4), (2, 8));
        for _ in 0..50 {
            let p = a.next_pair();
            assert_eq!(p, b.next_pair());
            assert!((2..=4).contains(&p.0) && (2..=8).contains(&p.1));
        }
    }
}
