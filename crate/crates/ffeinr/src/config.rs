//! Flat `key = value` configuration text for [`TrainConfig`].

use std::fmt::Write;

use ffeinr_core::{FeatureLookup, TrainConfig};

use crate::error::{FfError, Result};

/// Every recognized key, in the order [`write_config`] emits them.
pub const KEYS: &[&str] = &[
    "sx",
    "st",
    "iters",
    "batch",
    "patch",
    "queries_per_sample",
    "lr",
    "lr_milestones",
    "lr_decay",
    "beta1",
    "beta2",
    "charbonnier_eps",
    "seed",
    "holdout_fraction",
    "two_stage",
    "stage2_iters",
    "stage2_sx",
    "stage2_st",
    "channels",
    "c_f",
    "n_blocks",
    "lstm_hidden",
    "kernel",
    "spatial_width",
    "spatial_depth",
    "temporal_width",
    "temporal_depth",
    "decoder_width",
    "decoder_depth",
    "omega0",
    "lookup",
];

/// Splits text into `(line number, key, value)` triples, skipping blanks and
/// `#` comments.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| FfError::Config { line: i + 1, msg: format!("expected `key = value`, got {line:?}") })?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| FfError::Config { line, msg: format!("invalid value {v:?} for {key}") })
}

fn range(line: usize, key: &str, v: &str) -> Result<(usize, usize)> {
    let (a, b) = v
        .split_once(',')
        .ok_or_else(|| FfError::Config { line, msg: format!("{key} expects `lo, hi`") })?;
    Ok((num(line, key, a.trim())?, num(line, key, b.trim())?))
}

/// Applies one setting. Unknown keys are errors.
pub fn apply(cfg: &mut TrainConfig, line: usize, key: &str, v: &str) -> Result<()> {
    let m = &mut cfg.model;
    match key {
        "sx" => cfg.sx = num(line, key, v)?,
        "st" => cfg.st = num(line, key, v)?,
        "iters" => cfg.iters = num(line, key, v)?,
        "batch" => cfg.batch = num(line, key, v)?,
        "patch" => cfg.patch = num(line, key, v)?,
        "queries_per_sample" => cfg.queries_per_sample = num(line, key, v)?,
        "lr" => cfg.lr = num(line, key, v)?,
        "lr_milestones" => {
            cfg.lr_milestones = v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| num(line, key, s))
                .collect::<Result<_>>()?
        }
        "lr_decay" => cfg.lr_decay = num(line, key, v)?,
        "beta1" => cfg.beta1 = num(line, key, v)?,
        "beta2" => cfg.beta2 = num(line, key, v)?,
        "charbonnier_eps" => cfg.charbonnier_eps = num(line, key, v)?,
        "seed" => cfg.seed = num(line, key, v)?,
        "holdout_fraction" => cfg.holdout_fraction = num(line, key, v)?,
        "two_stage" => cfg.two_stage = num(line, key, v)?,
        "stage2_iters" => cfg.stage2_iters = num(line, key, v)?,
        "stage2_sx" => cfg.stage2_sx = range(line, key, v)?,
        "stage2_st" => cfg.stage2_st = range(line, key, v)?,
        "channels" => m.channels = num(line, key, v)?,
        "c_f" => m.encoder.c_f = num(line, key, v)?,
        "n_blocks" => m.encoder.n_blocks = num(line, key, v)?,
        "lstm_hidden" => m.encoder.lstm_hidden = num(line, key, v)?,
        "kernel" => m.encoder.kernel = num(line, key, v)?,
        "spatial_width" => m.spatial_width = num(line, key, v)?,
        "spatial_depth" => m.spatial_depth = num(line, key, v)?,
        "temporal_width" => m.temporal_width = num(line, key, v)?,
        "temporal_depth" => m.temporal_depth = num(line, key, v)?,
        "decoder_width" => m.decoder_width = num(line, key, v)?,
        "decoder_depth" => m.decoder_depth = num(line, key, v)?,
        "omega0" => m.omega0 = num(line, key, v)?,
        "lookup" => {
            m.lookup = FeatureLookup::parse(v)
                .ok_or_else(|| FfError::Config { line, msg: format!("unknown lookup {v:?}") })?
        }
        _ => return Err(FfError::Config { line, msg: format!("unknown key {key:?}") }),
    }
    Ok(())
}

/// Parses a full config over the defaults.
pub fn parse_config(text: &str) -> Result<TrainConfig> {
    let mut cfg = TrainConfig::default();
    for (line, k, v) in parse_pairs(text)? {
        apply(&mut cfg, line, &k, &v)?;
    }
    Ok(cfg)
}

/// Text that [`parse_config`] maps back to an identical config. Floats use
/// the shortest exact decimal form.
pub fn write_config(cfg: &TrainConfig) -> String {
    let m = &cfg.model;
    let e = &m.encoder;
    let ms: Vec<String> = cfg.lr_milestones.iter().map(u64::to_string).collect();
    let mut s = String::new();
    let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
    kv("sx", cfg.sx.to_string());
    kv("st", cfg.st.to_string());
    kv("iters", cfg.iters.to_string());
    kv("batch", cfg.batch.to_string());
    kv("patch", cfg.patch.to_string());
    kv("queries_per_sample", cfg.queries_per_sample.to_string());
    kv("lr", format!("{:?}", cfg.lr));
    kv("lr_milestones", ms.join(", "));
    kv("lr_decay", format!("{:?}", cfg.lr_decay));
    kv("beta1", format!("{:?}", cfg.beta1));
    kv("beta2", format!("{:?}", cfg.beta2));
    kv("charbonnier_eps", format!("{:?}", cfg.charbonnier_eps));
    kv("seed", cfg.seed.to_string());
    kv("holdout_fraction", format!("{:?}", cfg.holdout_fraction));
    kv("two_stage", cfg.two_stage.to_string());
    kv("stage2_iters", cfg.stage2_iters.to_string());
    kv("stage2_sx", format!("{}, {}", cfg.stage2_sx.0, cfg.stage2_sx.1));
    kv("stage2_st", format!("{}, {}", cfg.stage2_st.0, cfg.stage2_st.1));
    kv("channels", m.channels.to_string());
    kv("c_f", e.c_f.to_string());
    kv("n_blocks", e.n_blocks.to_string());
    kv("lstm_hidden", e.lstm_hidden.to_string());
    kv("kernel", e.kernel.to_string());
    kv("spatial_width", m.spatial_width.to_string());
    kv("spatial_depth", m.spatial_depth.to_string());
    kv("temporal_width", m.temporal_width.to_string());
    kv("temporal_depth", m.temporal_depth.to_string());
    kv("decoder_width", m.decoder_width.to_string());
    kv("decoder_depth", m.decoder_depth.to_string());
    kv("omega0", format!("{:?}", m.omega0));
    kv("lookup", m.lookup.name().to_string());
    s
}
