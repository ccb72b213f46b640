//! Trilinear space-time baseline and reconstruction-quality metrics.

mod quality;
mod trilinear;

pub use quality::{psnr, psnr_per_frame, rmse_per_channel, ssim, MetricReport, PSNR_CAP_DB};
pub use trilinear::{axis_map, trilinear_upsample};
