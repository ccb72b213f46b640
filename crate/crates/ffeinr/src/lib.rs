//! File formats, data reduction and the command line on top of
//! [`ffeinr_core`].

mod bytes;

pub mod archive;
pub mod ckpt;
pub mod cli;
pub mod config;
pub mod convert;
pub mod error;
pub mod image;
pub mod raw;
pub mod reduction;

pub use ffeinr_core as core;

pub use ckpt::{load_checkpoint, save_checkpoint};
pub use error::{FfError, Result};
pub use raw::{load_raw, save_raw};
pub use reduction::{compress, compression_rate, decompress, Archive, ArchiveMeta, CompressionRate};
