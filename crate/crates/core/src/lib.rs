//! Deterministic simulation of LEO satellite coverage for an aircraft in
//! flight, plus shooting-and-bouncing-rays propagation inside the cabin.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antenna;
pub mod cabin;
pub mod constellation;
pub mod flight;
pub mod orbit;
pub mod registry;
pub mod scenario;
pub mod visibility;
