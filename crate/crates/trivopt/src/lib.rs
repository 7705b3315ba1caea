//! Manifold optimisation through static and dynamic trivialisations.
//!
//! The crate pulls optimisation problems on matrix manifolds back to flat
//! parameter spaces along closed-form Riemannian exponential maps, so any
//! Euclidean update rule applies unchanged. It ships:
//!
//! - a small dense linear-algebra kernel ([`dense`]),
//! - a machine-precision matrix exponential with its Fréchet derivative and
//!   adjoint ([`expm`]),
//! - generalised trigonometric functions and curvature-derived first- and
//!   second-order bounds on the exponential map, usable as step-size
//!   providers ([`curvature`]),
//! - closed-form exponential maps, frames, and gradient pullbacks for the
//!   special orthogonal group, Stiefel and Grassmannian manifolds, symmetric
//!   positive-definite matrices, spheres, and products ([`manifolds`]),
//! - the dynamic-trivialisation engine with pluggable stopping rules
//!   ([`trivialize`]) and Euclidean optimisers ([`optimizers`]),
//! - a finite-difference verification harness for the geometric bounds
//!   ([`verify`]),
//! - benchmark problems with analytic gradients and independent optimum
//!   oracles ([`problems`]).

pub mod curvature;
pub mod dense;
pub mod expm;
pub mod guide;
pub mod manifolds;
pub mod optimizers;
pub mod problems;
pub mod trivialize;
pub mod verify;
