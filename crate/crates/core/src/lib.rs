//! Feature-enhanced implicit neural representation (FFEINR) for
//! spatio-temporal super-resolution of 2D flow fields.
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature. Everything touching files, images or the command line lives in
//! the companion `ffeinr` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod flow;
pub mod inr;
pub mod metrics;
pub mod nn;
pub mod real;
pub mod train;
pub mod viz;

pub use error::{Error, Result};
pub use flow::{
    crop_patch, crop_patch_from, downsample, gen_taylor_green, normalize, Extents, FlowField,
    NormStats, SlicePair, TrainingSample,
};
pub use inr::{warp, FeatureLookup, Model, ModelConfig, MotionFlow, QueryBatch, SpatialFeature};
pub use metrics::{psnr, rmse_per_channel, ssim, trilinear_upsample, MetricReport, PSNR_CAP_DB};
pub use nn::encoder::{EncoderConfig, FeatureGrid};
pub use real::Real;
pub use train::{
    charbonnier, evaluate, reconstruct, train_one_stage, train_two_stage, Checkpoint, EvalResult,
    TrainConfig,
};
