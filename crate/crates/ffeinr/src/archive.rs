//! The FFNRARCH single-file archive.
//!
//! Layout (little-endian): magic `FFNRARCH`, version `u32`, section count
//! `u32` (16 bytes), then one 24-byte entry per section (tag `u32`, offset
//! `u64`, length `u64`, CRC32 `u32`), then the section payloads in order.

use crate::bytes::{put_u32, put_u64, to_u32, Reader};
use crate::error::{FfError, Result};

pub const MAGIC: &[u8; 8] = b"FFNRARCH";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;
pub const ENTRY_LEN: usize = 24;

pub const TAG_LOWRES: u32 = 1;
pub const TAG_CKPT: u32 = 2;
pub const TAG_META: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub tag: u32,
    pub data: Vec<u8>,
}

/// Bytes taken by the header and section table for `n` sections.
pub fn overhead(n: usize) -> usize {
    HEADER_LEN + n * ENTRY_LEN
}

pub fn write_sections(sections: &[Section]) -> Result<Vec<u8>> {
    let total = overhead(sections.len()) + sections.iter().map(|s| s.data.len()).sum::<usize>();
    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    put_u32(&mut out, to_u32(sections.len(), "section count")?);
    let mut offset = overhead(sections.len()) as u64;
    for s in sections {
        put_u32(&mut out, s.tag);
        put_u64(&mut out, offset);
        put_u64(&mut out, s.data.len() as u64);
        put_u32(&mut out, crc32fast::hash(&s.data));
        offset += s.data.len() as u64;
    }
    for s in sections {
        out.extend_from_slice(&s.data);
    }
    Ok(out)
}

/// Parses and checksums every section.
pub fn read_sections(buf: &[u8]) -> Result<Vec<Section>> {
    let mut r = Reader::new(buf);
    if buf.len() < MAGIC.len() || r.take(MAGIC.len())? != MAGIC {
        return Err(FfError::format("missing FFNRARCH magic"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(FfError::format(format!("unsupported archive version {version}")));
    }
    let count = r.u32()? as usize;
    let mut entries = Vec::with_capacity(count.min(64));
    for _ in 0..count {
        entries.push((r.u32()?, r.u64()?, r.u64()?, r.u32()?));
    }
    let mut out = Vec::with_capacity(entries.len());
    for (tag, offset, len, crc) in entries {
        let end = offset.checked_add(len).ok_or_else(|| FfError::format("section bounds overflow"))?;
        if end > buf.len() as u64 || offset < r.pos() as u64 {
            return Err(FfError::Truncated { expected: end as usize, found: buf.len() });
        }
        let data = &buf[offset as usize..end as usize];
        let computed = crc32fast::hash(data);
        if computed != crc {
            return Err(FfError::Checksum { section: tag, stored: crc, computed });
        }
        out.push(Section { tag, data: data.to_vec() });
    }
    Ok(out)
}
