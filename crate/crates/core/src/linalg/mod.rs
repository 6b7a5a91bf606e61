pub mod dense;
pub mod elimination;
mod matrix;

pub use matrix::{dot, Matrix};
