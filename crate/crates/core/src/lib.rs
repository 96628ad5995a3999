pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod multiqubit_analysis;
pub mod hamiltonians;
pub mod scl_generator;
pub mod spectral_bath;
pub mod sqa_eb;
pub mod wcl_generator;

pub use error::{Error, Result};
