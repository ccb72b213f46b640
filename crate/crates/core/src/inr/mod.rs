//! The feature-enhanced implicit representation: spatial feature queries,
//! motion-flow prediction, coordinate warping, re-query and decoding.

mod lookup;
mod model;
mod query;

pub use lookup::FeatureLookup;
pub use model::{BatchItem, ForwardCache, Model, ModelConfig};
pub use query::{warp, MotionFlow, QueryBatch, SpatialFeature};
