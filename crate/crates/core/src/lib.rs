pub mod agreement;
pub mod bands;
pub mod demo;
pub mod dsp;
pub mod error;
pub mod fdtd;
pub mod ism;
pub mod metrics;
pub mod pipeline;
pub mod raytrace;
pub mod rir;
pub mod scene;
pub mod wpe;

pub use error::{Error, Result};
