//! The effect families, one module per higher-order functor instance.

pub mod algebraic;
pub mod bracket;
pub mod latent;
pub mod parallel;
pub mod scoped;
pub mod writer;
