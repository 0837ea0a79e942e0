pub mod compare;
pub mod eval;
pub mod gallery;
pub mod post;
pub mod segment;
pub mod stats;
pub mod synth;
