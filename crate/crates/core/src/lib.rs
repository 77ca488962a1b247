//! Reaction-diffusion in periodic two-patch landscapes with interface
//! conditions: well-posed evolution, principal eigenvalues, persistence,
//! and spreading speeds.

pub mod banded;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod landscape;
pub mod pde;
pub mod scalar;
pub mod steady;

pub use error::{Error, Result};
pub use landscape::{
    continuous_to_physical, rescale_physical_to_continuous, validate_hypotheses, HypothesisReport, InterfaceKind,
    InterfaceSet, Landscape, NodeDensity, NodeTag, PatchType, Reaction, ReactionKind,
};
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
