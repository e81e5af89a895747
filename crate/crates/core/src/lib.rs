pub mod analytic;
pub mod decoupling;
pub mod discrimination;
pub mod error;
pub mod model;
pub mod numerics;
pub mod oracle;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, C64};
