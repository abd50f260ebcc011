//! Hyperbolic mapping schemes and their models.

pub mod blaschke;
pub mod census;
pub mod cli;
pub mod dynamics;
pub mod hubbard;
pub mod moduli;
pub mod parallel;
pub mod poly;
pub mod render;
pub mod symmetry;
pub mod scheme;
pub mod window;

pub use scheme::{MappingScheme, RawVertex, SchemeError};
