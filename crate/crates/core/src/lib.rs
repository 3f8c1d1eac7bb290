pub mod brackets;
pub mod cli;
pub mod connections;
pub mod deformations;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod models;
pub mod parastructure;
pub mod sampling;

pub use error::{Error, Result};
