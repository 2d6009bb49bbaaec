pub mod checkpoint;
pub mod eval;
pub mod inference;
pub mod probe;
pub mod synthetic;
pub mod numerics;
pub mod seq2seq;
pub mod training;
