//! Pseudo-differential operators on the flat torus: discrete symbols, toroidal
//! quantization, kernel estimates, maximal functions, function-space norms and
//! a numerical harness that checks boundedness statements across resolutions.

pub mod dump;
pub mod error;
mod fft;
pub mod harness;
pub mod kernel;
pub mod maximal;
pub mod probe;
pub mod quantize;
pub mod spaces;
pub mod stats;
pub mod symbol;
pub mod torus;

pub use error::{Error, Result};
