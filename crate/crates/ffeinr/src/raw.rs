//! The FFNR raw field format.
//!
//! Layout (little-endian): magic `FFNR`, version `u32`, dims `T H W C` as
//! `u32`, extents `x_min x_max y_min y_max` as `f64`, `dt` as `f64`, the
//! 64-byte header is followed by `T·H·W·C` `f32` values in
//! `(t, row, col, channel)` order and then `C` NUL-terminated channel names.

use std::path::Path;

use ffeinr_core::{Extents, FlowField};

use crate::bytes::{put_f32s, put_f64, put_u32, to_u32, Reader};
use crate::error::{FfError, Result};

pub const MAGIC: &[u8; 4] = b"FFNR";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

pub fn header_bytes(field: &FlowField) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    for d in field.dims() {
        put_u32(&mut out, to_u32(d, "dimension")?);
    }
    let e = field.extents();
    for v in [e.x_min, e.x_max, e.y_min, e.y_max, field.dt()] {
        put_f64(&mut out, v);
    }
    debug_assert_eq!(out.len(), HEADER_LEN);
    Ok(out)
}

pub fn to_bytes(field: &FlowField) -> Result<Vec<u8>> {
    let mut out = header_bytes(field)?;
    put_f32s(&mut out, field.values());
    for name in field.channel_names() {
        if name.as_bytes().contains(&0) {
            return Err(FfError::format(format!("channel name {name:?} contains NUL")));
        }
        out.extend_from_slice(name.as_bytes());
        out.push(0);
    }
    Ok(out)
}

pub fn from_bytes(buf: &[u8]) -> Result<FlowField> {
    let mut r = Reader::new(buf);
    if buf.len() < 4 || r.take(4)? != MAGIC {
        return Err(FfError::format("missing FFNR magic"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(FfError::format(format!("unsupported FFNR version {version}")));
    }
    let mut dims = [0usize; 4];
    for d in dims.iter_mut() {
        *d = r.u32()? as usize;
    }
    let ext = Extents::new(r.f64()?, r.f64()?, r.f64()?, r.f64()?);
    let dt = r.f64()?;
    let n = dims
        .iter()
        .try_fold(1usize, |a, &d| a.checked_mul(d))
        .ok_or_else(|| FfError::format("dimension product overflows"))?;
    let values = r.f32s(n)?;
    let mut names = Vec::with_capacity(dims[3]);
    let rest = r.take(r.remaining())?;
    let mut parts = rest.split(|&b| b == 0);
    for _ in 0..dims[3] {
        let part = parts.next().ok_or(FfError::Truncated { expected: buf.len() + 1, found: buf.len() })?;
        names.push(String::from_utf8(part.to_vec()).map_err(|_| FfError::format("channel name is not UTF-8"))?);
    }
    let used: usize = names.iter().map(|s| s.len() + 1).sum();
    if used > rest.len() {
        return Err(FfError::Truncated { expected: HEADER_LEN + n * 4 + used, found: buf.len() });
    }
    if used != rest.len() {
        return Err(FfError::format(format!("{} trailing bytes after channel names", rest.len() - used)));
    }
    Ok(FlowField::new(dims, values, ext, dt, names)?)
}

pub fn load_raw(path: impl AsRef<Path>) -> Result<FlowField> {
    from_bytes(&std::fs::read(path)?)
}

pub fn save_raw(field: &FlowField, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_bytes(field)?)?;
    Ok(())
}
