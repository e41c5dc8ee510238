//! Möbius inversion and Shapley values on edge- and root-weighted directed
//! acyclic multigraphs.
//!
//! A [`Damg`] carries a certified topological order; value functions, path
//! algebra elements and kernels are all indexed by positions in that order.
//! Exact [`Rational`] arithmetic is the default, so every identity in the
//! theory can be checked as an equality.

pub mod algebra;
pub mod builders;
pub mod error;
pub mod generate;
pub mod graph;
pub mod projection;
pub mod scalar;
pub mod shapley;

pub use algebra::{moebius_function, PathAlgebraElement, ValueFunction};
pub use error::{Error, Result};
pub use graph::{Damg, EdgeWeights, ProjectionKernel, RootWeights};
pub use scalar::{rat, ModuleValue, Rational, Scalar, Shape};
pub use shapley::{Attribution, Engine};
