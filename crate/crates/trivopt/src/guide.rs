//! The user guide, compiled from the `book/` sources so every code
//! listing runs under `cargo test --doc`. One module per chapter keeps
//! doc-test failures attributable to their page.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/exponential-kernel.md")]
pub mod exponential_kernel {}

#[doc = include_str!("../../../book/src/manifolds.md")]
pub mod manifolds {}

#[doc = include_str!("../../../book/src/curvature.md")]
pub mod curvature {}

#[doc = include_str!("../../../book/src/engine.md")]
pub mod engine {}

#[doc = include_str!("../../../book/src/problems.md")]
pub mod problems {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
