//! Layers with hand-written reverse-mode gradients.
//!
//! Every layer keeps its parameters in [`Param`]s (value + accumulated
//! gradient). `forward*` methods take `&self` and return whatever the
//! matching `backward` needs; `backward` takes `&mut self` and accumulates
//! into the parameter gradients.

pub mod conv;
pub mod convlstm;
pub mod encoder;
pub mod linear;
pub mod param;
pub mod siren;

pub use param::{Param, Parameters};

#[inline]
pub(crate) fn leaky<T: crate::Real>(x: T, slope: T) -> T {
    if x > T::zero() {
        x
    } else {
        x * slope
    }
}

#[inline]
pub(crate) fn sigmoid<T: crate::Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}
