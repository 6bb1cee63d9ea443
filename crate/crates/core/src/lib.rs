//! Triple correlation, full and selective G-bispectra on finite groups.

pub mod bench;
pub mod clebsch_gordan;
pub mod context;
pub mod error;
pub mod fourier;
pub mod group;
pub mod inversion;
pub mod io;
pub mod linalg;
pub mod recovery;
pub mod representations;
pub mod spectra;

pub use context::GroupContext;
pub use error::{Error, Result};
pub use fourier::FourierCoefficients;
pub use group::{act, orbit_distance, FiniteGroup, GroupKind, GroupSignal};
pub use spectra::{BispectrumCoefficients, SelectionPlan, SpectrumMode};
