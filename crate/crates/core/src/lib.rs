//! Explicit reciprocity laws for Honda formal groups, computed with
//! truncated `p`-adic series.
//!
//! The crate is organised bottom-up: [`padic`] arithmetic in unramified
//! extensions, truncated [`series`], linear algebra over `Z/p^N`, formal
//! groups, the Herr complex, and the symbol brackets.

pub mod error;
pub mod padic;
pub mod linalg;
pub mod series;
pub mod shadow;
pub mod formal_group;
pub mod herr;
pub mod reciprocity;

pub use error::{Error, Result};
