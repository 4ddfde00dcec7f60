pub mod attacks;
pub mod defenses;
pub mod error;
pub mod federation;
pub mod numerics;
pub mod secure_check;
pub mod sharing;

pub use error::{Error, Result};
