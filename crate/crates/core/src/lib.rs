//! Finite-section laboratory for Toeplitz extensions, Schatten-class
//! summability, Stinespring dilations and deformed compressions.

pub mod cli;
pub mod deformation;
pub mod dilation;
pub mod error;
pub mod extension;
pub mod hardy;
pub mod linalg;
pub mod report;
pub mod spectral;

pub use error::{OilError, Result};
pub use hardy::{GuardBand, Symbol, Window, WindowedOperator};
pub use linalg::{Mat, C64};
pub use report::Report;
pub use spectral::{IdealSpec, SingularSpectrum, SummabilityVerdict, Verdict};
