pub mod algebra;
pub mod efa;
mod error;
pub mod fixtures;
pub mod model;
pub mod observer;
pub mod opacity;
pub mod oracle;

pub use error::{Error, Result};
