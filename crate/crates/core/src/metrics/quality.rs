use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flow::FlowField;

/// PSNR reported when prediction and ground truth are identical.
pub const PSNR_CAP_DB: f64 = 99.0;

fn check(pred: &FlowField, gt: &FlowField) -> Result<()> {
    if pred.dims() != gt.dims() {
        return Err(Error::shape("prediction", gt.dims(), pred.dims()));
    }
    Ok(())
}

fn max_abs(gt: &FlowField) -> f64 {
    gt.values().iter().fold(0.0f64, |m, v| m.max((*v as f64).abs()))
}

fn psnr_from(max: f64, mse: f64) -> f64 {
    if mse == 0.0 {
        PSNR_CAP_DB
    } else {
        10.0 * libm::log10(max * max / mse)
    }
}

/// `10·log10(MAX² / MSE)` with `MAX = max |gt|` over the whole field and the
/// MSE over every element.
pub fn psnr(pred: &FlowField, gt: &FlowField) -> Result<f64> {
    check(pred, gt)?;
    let sse: f64 = pred
        .values()
        .iter()
        .zip(gt.values())
        .map(|(a, b)| {
            let d = *a as f64 - *b as f64;
            d * d
        })
        .sum();
    Ok(psnr_from(max_abs(gt), sse / gt.values().len() as f64))
}

/// PSNR of every frame, all against the global `MAX`.
pub fn psnr_per_frame(pred: &FlowField, gt: &FlowField) -> Result<Vec<f64>> {
    check(pred, gt)?;
    let max = max_abs(gt);
    let n = gt.frame_len();
    Ok((0..gt.frames())
        .map(|t| {
            let sse: f64 = pred
                .frame(t)
                .iter()
                .zip(gt.frame(t))
                .map(|(a, b)| {
                    let d = *a as f64 - *b as f64;
                    d * d
                })
                .sum();
            psnr_from(max, sse / n as f64)
        })
        .collect())
}

/// Global-statistics SSIM of every `(frame, channel)` slice, averaged.
/// `c1 = (0.01 L)²`, `c2 = (0.03 L)²` with `L = max(gt) - min(gt)` over the
/// whole field (1 when the field is constant).
pub fn ssim(pred: &FlowField, gt: &FlowField) -> Result<f64> {
    check(pred, gt)?;
    let (lo, hi) = gt
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v as f64), h.max(*v as f64)));
    let range = if hi > lo { hi - lo } else { 1.0 };
    let c1 = (0.01 * range) * (0.01 * range);
    let c2 = (0.03 * range) * (0.03 * range);
    let [t, h, w, c] = gt.dims();
    let n = (h * w) as f64;
    let mut total = 0.0;
    for ti in 0..t {
        let (ps, gs) = (pred.frame(ti), gt.frame(ti));
        for ch in 0..c {
            let sel = |f: &[f32]| f.iter().skip(ch).step_by(c).map(|v| *v as f64).collect::<Vec<f64>>();
            let (a, b) = (sel(ps), sel(gs));
            let mu_a = a.iter().sum::<f64>() / n;
            let mu_b = b.iter().sum::<f64>() / n;
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for (x, y) in a.iter().zip(&b) {
                let (dx, dy) = (x - mu_a, y - mu_b);
                va += dx * dx;
                vb += dy * dy;
                cov += dx * dy;
            }
            let (va, vb, cov) = (va / n, vb / n, cov / n);
            total += (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2) / ((mu_a * mu_a + mu_b * mu_b + c1) * (va + vb + c2));
        }
    }
    Ok(total / (t * c) as f64)
}

/// Root-mean-square error of each channel.
pub fn rmse_per_channel(pred: &FlowField, gt: &FlowField) -> Result<Vec<f64>> {
    check(pred, gt)?;
    let c = gt.channels();
    let mut sse = alloc::vec![0.0f64; c];
    for (i, (a, b)) in pred.values().iter().zip(gt.values()).enumerate() {
        let d = *a as f64 - *b as f64;
        sse[i % c] += d * d;
    }
    let n = (gt.values().len() / c) as f64;
    Ok(sse.into_iter().map(|s| libm::sqrt(s / n)).collect())
}

/// Quality of one reconstruction at one `(S×s, T×t)` factor pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub factor: (usize, usize),
    pub method: String,
    pub psnr_db: f64,
    pub ssim: f64,
    pub rmse: Vec<f64>,
    pub psnr_series: Vec<f64>,
}

impl MetricReport {
    pub fn compute(method: &str, factor: (usize, usize), pred: &FlowField, gt: &FlowField) -> Result<Self> {
        Ok(Self {
            factor,
            method: String::from(method),
            psnr_db: psnr(pred, gt)?,
            ssim: ssim(pred, gt)?,
            rmse: rmse_per_channel(pred, gt)?,
            psnr_series: psnr_per_frame(pred, gt)?,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.psnr_db.is_finite()
            && self.ssim.is_finite()
            && self.rmse.iter().all(|v| v.is_finite())
            && self.psnr_series.iter().all(|v| v.is_finite())
    }
}
