pub mod arith;
pub mod ceresa;
pub mod error;
pub mod exterior;
pub mod fixtures;
pub mod graph;
pub mod johnson;
pub mod lattice;
pub mod matrix;
pub mod symplectic;

pub use error::{Error, Result};
