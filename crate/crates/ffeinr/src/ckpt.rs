//! The FFNRCKPT checkpoint container.
//!
//! Layout (little-endian): magic `FFNRCKPT`, version `u32`, config length
//! `u32` and UTF-8 `key = value` text, tensor count `u32`, then per tensor:
//! name length `u32` + UTF-8 name, rank `u32`, `rank` dims as `u32`, and the
//! `f32` payload.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use ffeinr_core::nn::Parameters;
use ffeinr_core::train::Checkpoint;
use ffeinr_core::{Model, NormStats};
use rand::SeedableRng;

use crate::bytes::{put_f32s, put_u32, to_u32, Reader};
use crate::config::{apply, parse_pairs, write_config};
use crate::error::{FfError, Result};

pub const MAGIC: &[u8; 8] = b"FFNRCKPT";
pub const VERSION: u32 = 1;

const LOSS: &str = "train.loss_history";
const FACTORS: &str = "train.stage2_factors";

/// A named tensor as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub dims: Vec<usize>,
    pub data: Vec<f32>,
}

fn f64_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

fn parse_f64_list(line: usize, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| FfError::Config { line, msg: format!("invalid number {p:?}") }))
        .collect()
}

fn tensors(ck: &Checkpoint) -> Vec<Tensor> {
    let mut out = Vec::new();
    ck.model.visit("", &mut |name, p| {
        out.push(Tensor { name: name.to_string(), dims: p.shape.clone(), data: p.value.clone() })
    });
    out.push(Tensor { name: LOSS.into(), dims: vec![ck.loss_history.len()], data: ck.loss_history.clone() });
    out.push(Tensor {
        name: FACTORS.into(),
        dims: vec![ck.stage2_factors.len(), 2],
        data: ck.stage2_factors.iter().flat_map(|&(s, t)| [s as f32, t as f32]).collect(),
    });
    out
}

pub fn to_bytes(ck: &Checkpoint) -> Result<Vec<u8>> {
    let mut text = write_config(&ck.config);
    writeln!(text, "iteration = {}", ck.iteration).unwrap();
    writeln!(text, "norm_offset = {}", f64_list(&ck.norm.offset)).unwrap();
    writeln!(text, "norm_scale = {}", f64_list(&ck.norm.scale)).unwrap();

    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    put_u32(&mut out, to_u32(text.len(), "config length")?);
    out.extend_from_slice(text.as_bytes());
    let ts = tensors(ck);
    put_u32(&mut out, to_u32(ts.len(), "tensor count")?);
    for t in &ts {
        put_u32(&mut out, to_u32(t.name.len(), "name length")?);
        out.extend_from_slice(t.name.as_bytes());
        put_u32(&mut out, to_u32(t.dims.len(), "rank")?);
        for &d in &t.dims {
            put_u32(&mut out, to_u32(d, "dimension")?);
        }
        put_f32s(&mut out, &t.data);
    }
    Ok(out)
}

/// Reads the raw sections without interpreting them.
pub fn read_container(buf: &[u8]) -> Result<(String, Vec<Tensor>)> {
    let mut r = Reader::new(buf);
    if buf.len() < MAGIC.len() || r.take(MAGIC.len())? != MAGIC {
        return Err(FfError::format("missing FFNRCKPT magic"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(FfError::format(format!("unsupported checkpoint version {version}")));
    }
    let len = r.u32()? as usize;
    let text = String::from_utf8(r.take(len)?.to_vec()).map_err(|_| FfError::format("config is not UTF-8"))?;
    let count = r.u32()? as usize;
    let mut ts = Vec::with_capacity(count.min(4096));
    for _ in 0..count {
        let n = r.u32()? as usize;
        let name = String::from_utf8(r.take(n)?.to_vec()).map_err(|_| FfError::format("tensor name is not UTF-8"))?;
        let rank = r.u32()? as usize;
        let dims = (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let numel = dims
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or_else(|| FfError::format("tensor size overflows"))?;
        let data = r.f32s(numel)?;
        ts.push(Tensor { name, dims, data });
    }
    if r.remaining() != 0 {
        return Err(FfError::format(format!("{} trailing bytes after tensors", r.remaining())));
    }
    Ok((text, ts))
}

pub fn from_bytes(buf: &[u8]) -> Result<Checkpoint> {
    let (text, ts) = read_container(buf)?;
    let mut config = ffeinr_core::TrainConfig::default();
    let (mut iteration, mut offset, mut scale) = (None, None, None);
    for (line, k, v) in parse_pairs(&text)? {
        match k.as_str() {
            "iteration" => {
                iteration = Some(v.parse().map_err(|_| FfError::Config { line, msg: "invalid iteration".into() })?)
            }
            "norm_offset" => offset = Some(parse_f64_list(line, &v)?),
            "norm_scale" => scale = Some(parse_f64_list(line, &v)?),
            _ => apply(&mut config, line, &k, &v)?,
        }
    }
    config.validate()?;
    let missing = |k: &str| FfError::format(format!("checkpoint config lacks {k}"));
    let norm = NormStats { offset: offset.ok_or_else(|| missing("norm_offset"))?, scale: scale.ok_or_else(|| missing("norm_scale"))? };
    if norm.offset.len() != config.model.channels || norm.scale.len() != config.model.channels {
        return Err(FfError::format("normalization does not match channel count"));
    }

    let mut by_name: BTreeMap<&str, &Tensor> = BTreeMap::new();
    for t in &ts {
        if by_name.insert(&t.name, t).is_some() {
            return Err(FfError::format(format!("duplicate tensor {}", t.name)));
        }
    }
    // weights are overwritten below, so the init stream is irrelevant
    let mut model: Model<f32> = Model::new(config.model, &mut rand_chacha::ChaCha8Rng::seed_from_u64(0))?;
    let mut used = 0;
    let mut shape_err = None;
    model.load_params(|name, p| {
        let t = by_name.get(name)?;
        if t.dims != p.shape {
            shape_err.get_or_insert_with(|| format!("tensor {name} has dims {:?}, model expects {:?}", t.dims, p.shape));
        }
        used += 1;
        Some(t.data.clone())
    })?;
    if let Some(msg) = shape_err {
        return Err(FfError::format(msg));
    }
    let loss = by_name.get(LOSS).ok_or_else(|| missing(LOSS))?;
    let factors = by_name.get(FACTORS).ok_or_else(|| missing(FACTORS))?;
    if used + 2 != ts.len() {
        return Err(FfError::format("checkpoint holds tensors the model does not use"));
    }
    Ok(Checkpoint {
        model,
        config,
        norm,
        iteration: iteration.ok_or_else(|| missing("iteration"))?,
        loss_history: loss.data.clone(),
        stage2_factors: factors.data.chunks_exact(2).map(|p| (p[0] as usize, p[1] as usize)).collect(),
    })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    from_bytes(&std::fs::read(path)?)
}

pub fn save_checkpoint(ck: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_bytes(ck)?)?;
    Ok(())
}
