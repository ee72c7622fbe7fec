//! The user guide, one module per book chapter. Each chapter is pulled
//! in verbatim from `book/src`, so its code blocks compile and run with
//! the library's doc-tests and the rendered book can never drift from
//! the crate it documents.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/rings.md")]
pub mod rings {}

#[doc = include_str!("../../../book/src/bundles.md")]
pub mod bundles {}

#[doc = include_str!("../../../book/src/projective.md")]
pub mod projective {}

#[doc = include_str!("../../../book/src/blowup.md")]
pub mod blowup {}

#[doc = include_str!("../../../book/src/dimensions.md")]
pub mod dimensions {}

#[doc = include_str!("../../../book/src/evaluator.md")]
pub mod evaluator {}

#[doc = include_str!("../../../book/src/applications.md")]
pub mod applications {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
