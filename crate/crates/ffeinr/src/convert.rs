//! Importers from external layouts into [`FlowField`].

use std::path::Path;

use ffeinr_core::{Extents, FlowField};

use crate::error::{FfError, Result};

/// Headerless little-endian `f32` values in `(t, row, col, channel)` order.
pub fn from_raw_f32(buf: &[u8], dims: [usize; 4], extents: Extents, dt: f64) -> Result<FlowField> {
    let n: usize = dims.iter().product();
    if buf.len() != n * 4 {
        return Err(FfError::Truncated { expected: n * 4, found: buf.len() });
    }
    let values = buf.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
    Ok(FlowField::from_values(dims, values, extents, dt)?)
}

/// One time step of an AmiraMesh binary lattice file: dims `(H, W)`,
/// channel count, extents from `BoundingBox`, and `H·W·C` values with `x`
/// varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct AmiraFrame {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub extents: Option<Extents>,
    pub values: Vec<f32>,
}

pub fn parse_amira(buf: &[u8]) -> Result<AmiraFrame> {
    let marker = b"\n@1\n";
    let split = buf
        .windows(marker.len())
        .position(|w| w == marker)
        .ok_or_else(|| FfError::format("AmiraMesh data marker @1 not found"))?;
    let header = std::str::from_utf8(&buf[..split]).map_err(|_| FfError::format("AmiraMesh header is not UTF-8"))?;
    let first = header.lines().next().unwrap_or("");
    if !first.starts_with("# AmiraMesh") {
        return Err(FfError::format("not an AmiraMesh file"));
    }
    let big_endian = if first.contains("BINARY-LITTLE-ENDIAN") {
        false
    } else if first.contains("BINARY") {
        true
    } else {
        return Err(FfError::format("only binary AmiraMesh files are supported"));
    };
    let (mut dims, mut channels, mut extents) = (None, None, None);
    for line in header.lines().map(str::trim) {
        let words: Vec<&str> = line.split_whitespace().collect();
        if line.starts_with("define Lattice") {
            let d: Vec<usize> = words[2..].iter().filter_map(|w| w.parse().ok()).collect();
            if d.len() < 2 || d[2..].iter().any(|&z| z != 1) {
                return Err(FfError::format(format!("unsupported lattice {line:?}")));
            }
            dims = Some((d[1], d[0]));
        } else if line.starts_with("BoundingBox") {
            let b: Vec<f64> = words[1..].iter().filter_map(|w| w.trim_end_matches(',').parse().ok()).collect();
            if b.len() >= 4 {
                extents = Some(Extents::new(b[0], b[1], b[2], b[3]));
            }
        } else if line.starts_with("Lattice {") && line.ends_with("@1") {
            channels = Some(match line.find("float[") {
                Some(i) => line[i + 6..]
                    .split(']')
                    .next()
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| FfError::format(format!("bad data line {line:?}")))?,
                None if line.contains("float ") => 1,
                None => return Err(FfError::format(format!("only float lattices are supported: {line:?}"))),
            });
        }
    }
    let (height, width) = dims.ok_or_else(|| FfError::format("missing `define Lattice`"))?;
    let channels = channels.ok_or_else(|| FfError::format("missing `Lattice { float[N] ... } @1`"))?;
    let n = height * width * channels;
    let data = &buf[split + marker.len()..];
    if data.len() < n * 4 {
        return Err(FfError::Truncated { expected: split + marker.len() + n * 4, found: buf.len() });
    }
    let values = data[..n * 4]
        .chunks_exact(4)
        .map(|b| {
            let b: [u8; 4] = b.try_into().unwrap();
            if big_endian {
                f32::from_be_bytes(b)
            } else {
                f32::from_le_bytes(b)
            }
        })
        .collect();
    Ok(AmiraFrame { height, width, channels, extents, values })
}

/// Stacks AmiraMesh files (one per time step, in order) into a field. The
/// first two channels are kept when `keep` is given.
pub fn from_amira_files(paths: &[impl AsRef<Path>], dt: f64, keep: Option<usize>) -> Result<FlowField> {
    let mut frames = Vec::with_capacity(paths.len());
    for p in paths {
        frames.push(parse_amira(&std::fs::read(p)?)?);
    }
    let first = frames.first().ok_or_else(|| FfError::format("no input files"))?;
    let (h, w, c) = (first.height, first.width, first.channels);
    let keep = keep.unwrap_or(c).min(c);
    let extents = first.extents.unwrap_or(Extents::new(0.0, (w - 1) as f64, 0.0, (h - 1) as f64));
    let mut values = Vec::with_capacity(frames.len() * h * w * keep);
    for f in &frames {
        if (f.height, f.width, f.channels) != (h, w, c) {
            return Err(FfError::format("AmiraMesh frames differ in shape"));
        }
        for px in f.values.chunks_exact(c) {
            values.extend_from_slice(&px[..keep]);
        }
    }
    Ok(FlowField::from_values([frames.len(), h, w, keep], values, extents, dt)?)
}
