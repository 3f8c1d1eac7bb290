//! Charts, tensor fields and the coordinate differential operators.

mod chart;
pub mod ops;
pub mod tensor;

pub use chart::{Chart, Point};
pub use ops::{
    directional, exterior_derivative, flat, interior, lie_bracket, lie_derivative, musical, sharp, Musical,
};
pub use tensor::{
    apply, compose, contract, eval_form, metric_inverse, multi_indices, pair, EvaluatedTensor, Procedure,
    Source, Symmetry, TensorField, SINGULAR_DET,
};
