//! Flow-field data model: dense `(T, H, W, C)` grids, strided downsampling,
//! per-channel normalization, synthetic generators and training patches.

mod field;
mod norm;
mod sample;
mod synthetic;

pub use field::{downsample, Extents, FlowField, SlicePair};
pub use norm::{normalize, NormStats};
pub use sample::{crop_patch, crop_patch_from, lattice_coords, TrainingSample};
pub use synthetic::gen_taylor_green;
