//! Color-mapped images and streamline tracing.

mod colormap;
mod render;
mod streamline;

pub use colormap::{Colormap, ERROR_ANCHORS, MAGNITUDE_ANCHORS};
pub use render::{render_error_maps, render_magnitude_map, RgbImage};
pub use streamline::{random_seeds, sample_bilinear, trace_streamlines, Streamline, STAGNATION_SPEED};
