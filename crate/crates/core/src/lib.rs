//! Models of a single 87Rb atom in an optical dipole trap: light shifts, trap
//! mechanics, loading statistics, photon correlations, coherent dark-state
//! dynamics and atom-photon entanglement analysis.

pub mod angular;
pub mod constants;
pub mod error;
pub mod lightshift;
pub mod ode;

pub use angular::{AngMom, Polarization, ReducedME};
pub use error::{Error, Result};
pub use lightshift::{HyperfineLevel, LaserField, Line, LineTable};
pub mod analysis;
pub mod bloch;
pub mod coherent;
pub mod entanglement;
pub mod loading;
pub mod optimize;
pub mod trapgeometry;
