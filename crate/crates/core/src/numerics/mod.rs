//! Dense `f64` tensors and a reverse-mode tape.

mod gradcheck;
mod tape;
mod tensor;

pub use gradcheck::{grad_check, grad_check_many, GradCheckReport, DEFAULT_STEP};
pub use tape::{Binary, Gradients, Tape, Unary, Var};
pub use tensor::{log_sum_exp, sigmoid, softmax_slice, Tensor};

use thiserror::Error;

/// Floor applied to probabilities before every `ln`.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("{op}: shape mismatch between {left:?} and {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("invalid shape {0:?}")]
    InvalidShape(Vec<usize>),
    #[error("shape {shape:?} needs {} elements, got {len}", shape.iter().product::<usize>())]
    DataLength { shape: Vec<usize>, len: usize },
    #[error("{0}: empty input")]
    Empty(&'static str),
    #[error("index {label} out of range for length {len}")]
    LabelOutOfRange { label: usize, len: usize },
    #[error("expected a scalar, got shape {0:?}")]
    NotScalar(Vec<usize>),
    #[error("variable {0} is not on this tape")]
    UnknownVar(usize),
}
