use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::inr::ModelConfig;

/// Everything that controls a training run, including the architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Spatial scale factor of the training data.
    pub sx: usize,
    /// Temporal scale factor of the training data.
    pub st: usize,
    pub iters: u64,
    /// Samples (patches) per optimizer step.
    pub batch: usize,
    /// Low-res patch side; clamped to the grid when larger.
    pub patch: usize,
    /// Target lattice nodes supervised per sample; 0 means the whole lattice.
    pub queries_per_sample: usize,
    pub lr: f64,
    /// Iterations at which the learning rate is multiplied by `lr_decay`.
    pub lr_milestones: Vec<u64>,
    pub lr_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub charbonnier_eps: f64,
    pub seed: u64,
    /// Fraction of trailing low-res slice pairs held out for validation.
    pub holdout_fraction: f64,
    pub two_stage: bool,
    pub stage2_iters: u64,
    /// Inclusive ranges the second stage draws factors from.
    pub stage2_sx: (usize, usize),
    pub stage2_st: (usize, usize),
    pub model: ModelConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            sx: 4,
            st: 2,
            iters: 7500,
            batch: 16,
            patch: 16,
            queries_per_sample: 0,
            lr: 1e-4,
            lr_milestones: alloc::vec![4000, 6000],
            lr_decay: 0.5,
            beta1: 0.9,
            beta2: 0.99,
            charbonnier_eps: 1e-3,
            seed: 0,
            holdout_fraction: 0.1,
            two_stage: false,
            stage2_iters: 0,
            stage2_sx: (2, 4),
            stage2_st: (2, 8),
            model: ModelConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sx < 1 || self.st < 1 {
            return Err(Error::arg("scale factors must be >= 1"));
        }
        if self.iters < 1 {
            return Err(Error::arg("iters must be >= 1"));
        }
        if self.batch < 1 || self.patch < 2 {
            return Err(Error::arg("batch must be >= 1 and patch >= 2"));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::arg(alloc::format!("{name} must lie in (0, 1), got {b}")));
            }
        }
        if !(self.charbonnier_eps > 0.0) {
            return Err(Error::arg("charbonnier_eps must be positive"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) || !(self.lr_decay > 0.0) {
            return Err(Error::arg("learning rate and decay must be positive"));
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return Err(Error::arg("holdout_fraction must lie in [0, 1)"));
        }
        let (a, b) = self.stage2_sx;
        let (c, d) = self.stage2_st;
        if self.two_stage && (a < 1 || a > b || c < 1 || c > d) {
            return Err(Error::arg(alloc::format!(
                "invalid stage-2 factor ranges S{:?} T{:?}",
                self.stage2_sx,
                self.stage2_st
            )));
        }
        self.model.validate()
    }

    /// Learning rate in effect at (0-based) iteration `it`.
    pub fn lr_at(&self, it: u64) -> f64 {
        let drops = self.lr_milestones.iter().filter(|&&m| it >= m).count();
        self.lr * libm::pow(self.lr_decay, drops as f64)
    }
}
