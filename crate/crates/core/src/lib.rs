//! Exact intersection-theory engine for family blowup formulas.
//!
//! The crate computes in finitely presented graded-commutative cohomology
//! rings with arbitrary-precision rational coefficients: surface and torus
//! models, projective bundles with their pushforwards, Chern/Segre/Todd
//! calculus, obstruction bundles for multiple covers of an exceptional
//! sphere, localized evaluations over projectivized families, and the
//! enumerative applications built from them. Every value is exact; no
//! floating point enters any computation.

pub mod applications;
pub mod blowup;
pub mod bundles;
pub mod error;
pub mod expr;
pub mod kuranishi;
pub mod rational;
pub mod ring;
pub mod schema;
pub mod selftest;
pub mod surfaces;

pub mod guide;

pub use error::Error;
pub use rational::Rat;
pub use ring::{GradedClass, Parity, Space, SpaceBuilder, SpaceModel};
