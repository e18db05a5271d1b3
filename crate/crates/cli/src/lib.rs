//! Document format and rendering helpers backing the `strand` binary.

pub mod doc;
pub mod render;
