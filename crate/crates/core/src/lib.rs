//! Exterior calculus over `ℂⁿ` with Wirtinger derivatives, polynomial
//! automorphisms and their deformations, and numerical certification of
//! locally conformal Kähler structures on Hopf manifolds.

// `!(x < tol)` is used on purpose so NaN fails checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cjson;
pub mod cli;
pub mod expr;
pub mod forms;
pub mod hopf;
pub mod maps;
pub mod sampling;
pub mod verify;
