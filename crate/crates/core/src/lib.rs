//! Multi-family wavelet scattering for 1-D signals.

pub mod error;
pub mod fft;
pub mod filterbank;
pub mod scattering;
pub mod thresholding;
pub mod transform;
pub mod wavelets;

pub use error::{Result, SmfError};
pub use filterbank::{FilterBank, FrameConfig};
pub use scattering::{PathKey, ScatterOptions, ScatteringNetwork, ScatteringTree};
pub use thresholding::{CorrelationKernels, ThresholdReport};
pub use transform::CoeffTensor;
pub use wavelets::{WaveletFamily, WaveletKind};
