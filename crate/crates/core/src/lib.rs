//! Rosenblatt distribution: spectrum, characteristic function, density,
//! sampling, and the long-memory simulations whose limits it describes.

pub mod charfn;
pub mod dist;
pub mod error;
pub mod fbm;
pub mod lrdmix;
pub mod mc;
pub mod quad;
pub mod rng;
pub mod specfn;
pub mod spectrum;

pub use error::{Error, Result};
