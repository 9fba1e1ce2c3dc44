//! Documents, the built-in fixture and report rendering.

pub mod document;
pub mod fixture;
pub mod render;
