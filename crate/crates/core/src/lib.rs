pub mod energy;
pub mod error;
pub mod exactgeom;
pub mod igusa;
pub mod pairstab;
pub mod polyrep;
pub mod polyspec;
pub mod stats;
pub mod varieties;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
