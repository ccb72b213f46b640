//! Data reduction: keep the low-res field plus a trained model, and rebuild
//! any resolution on demand.

use std::fmt::Write;
use std::path::Path;

use ffeinr_core::train::{reconstruct, train_one_stage_with, Checkpoint};
use ffeinr_core::{downsample, FlowField, TrainConfig};

use crate::archive::{overhead, read_sections, write_sections, Section, TAG_CKPT, TAG_LOWRES, TAG_META};
use crate::config::parse_pairs;
use crate::error::{FfError, Result};
use crate::{ckpt, raw};

/// Facts recorded alongside the payloads.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveMeta {
    pub factors: (usize, usize),
    pub original_dims: [usize; 4],
    pub iterations: u64,
    pub seed: u64,
}

impl ArchiveMeta {
    pub fn to_text(&self) -> String {
        let d = self.original_dims;
        let mut s = String::new();
        writeln!(s, "factor_s = {}", self.factors.0).unwrap();
        writeln!(s, "factor_t = {}", self.factors.1).unwrap();
        writeln!(s, "original_dims = {}, {}, {}, {}", d[0], d[1], d[2], d[3]).unwrap();
        writeln!(s, "iterations = {}", self.iterations).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = ArchiveMeta { factors: (0, 0), original_dims: [0; 4], iterations: 0, seed: 0 };
        for (line, k, v) in parse_pairs(text)? {
            let bad = || FfError::Config { line, msg: format!("invalid value {v:?} for {k}") };
            match k.as_str() {
                "factor_s" => m.factors.0 = v.parse().map_err(|_| bad())?,
                "factor_t" => m.factors.1 = v.parse().map_err(|_| bad())?,
                "original_dims" => {
                    let d: Vec<usize> = v.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
                    m.original_dims = d.try_into().map_err(|_| bad())?;
                }
                "iterations" => m.iterations = v.parse().map_err(|_| bad())?,
                "seed" => m.seed = v.parse().map_err(|_| bad())?,
                _ => return Err(FfError::Config { line, msg: format!("unknown key {k:?}") }),
            }
        }
        Ok(m)
    }
}

/// A loaded archive.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub low: FlowField,
    pub checkpoint: Checkpoint,
    pub meta: ArchiveMeta,
}

/// Byte accounting of one archive against its source field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionRate {
    pub ratio: f64,
    pub original_bytes: usize,
    pub archive_bytes: usize,
    pub header_bytes: usize,
    pub lowres_bytes: usize,
    pub model_bytes: usize,
    pub meta_bytes: usize,
}

impl Archive {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        write_sections(&[
            Section { tag: TAG_LOWRES, data: raw::to_bytes(&self.low)? },
            Section { tag: TAG_CKPT, data: ckpt::to_bytes(&self.checkpoint)? },
            Section { tag: TAG_META, data: self.meta.to_text().into_bytes() },
        ])
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let sections = read_sections(buf)?;
        let find = |tag| {
            sections
                .iter()
                .find(|s| s.tag == tag)
                .ok_or_else(|| FfError::format(format!("archive lacks section {tag}")))
        };
        let low = raw::from_bytes(&find(TAG_LOWRES)?.data)?;
        let checkpoint = ckpt::from_bytes(&find(TAG_CKPT)?.data)?;
        let meta_text =
            String::from_utf8(find(TAG_META)?.data.clone()).map_err(|_| FfError::format("metadata is not UTF-8"))?;
        let meta = ArchiveMeta::parse(&meta_text)?;
        let (s, t) = meta.factors;
        let [ot, oh, ow, oc] = meta.original_dims;
        if s < 1 || t < 1 || low.dims() != [(ot - 1) / t + 1, (oh - 1) / s + 1, (ow - 1) / s + 1, oc] {
            return Err(FfError::format(format!(
                "low-res dims {:?} inconsistent with original {:?} at factors {:?}",
                low.dims(),
                meta.original_dims,
                meta.factors
            )));
        }
        Ok(Self { low, checkpoint, meta })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }
}

/// Downsamples at `(cfg.sx, cfg.st)`, trains one stage and bundles the result.
pub fn compress(high: &FlowField, cfg: &TrainConfig, on_step: &mut dyn FnMut(u64, f32)) -> Result<Archive> {
    let low = downsample(high, cfg.sx, cfg.st)?;
    let checkpoint = train_one_stage_with(&low, high, cfg, on_step)?;
    let meta = ArchiveMeta {
        factors: (cfg.sx, cfg.st),
        original_dims: high.dims(),
        iterations: checkpoint.iteration,
        seed: cfg.seed,
    };
    Ok(Archive { low, checkpoint, meta })
}

/// [`compress`] written to `path`; nothing is left behind on failure.
pub fn compress_to(
    high: &FlowField,
    cfg: &TrainConfig,
    path: &Path,
    on_step: &mut dyn FnMut(u64, f32),
) -> Result<Archive> {
    let partial = path.with_extension("partial");
    let result = compress(high, cfg, on_step).and_then(|a| {
        a.save(&partial)?;
        std::fs::rename(&partial, path)?;
        Ok(a)
    });
    if result.is_err() {
        let _ = std::fs::remove_file(&partial);
    }
    result
}

/// Dense reconstruction onto a `(T, H, W)` lattice over the stored extents.
pub fn decompress(a: &Archive, dims: (usize, usize, usize)) -> Result<FlowField> {
    Ok(reconstruct(&a.checkpoint, &a.low, dims)?)
}

/// Original payload bytes over total archive bytes, with the archive split
/// into its parts. The parts sum to `archive_bytes` exactly.
pub fn compression_rate(a: &Archive, original: &FlowField) -> Result<CompressionRate> {
    let lowres_bytes = raw::to_bytes(&a.low)?.len();
    let model_bytes = ckpt::to_bytes(&a.checkpoint)?.len();
    let meta_bytes = a.meta.to_text().len();
    let header_bytes = overhead(3);
    let archive_bytes = header_bytes + lowres_bytes + model_bytes + meta_bytes;
    let original_bytes = original.values().len() * 4;
    Ok(CompressionRate {
        ratio: original_bytes as f64 / archive_bytes as f64,
        original_bytes,
        archive_bytes,
        header_bytes,
        lowres_bytes,
        model_bytes,
        meta_bytes,
    })
}
