//! Fractional susceptibility functions of piecewise expanding unimodal maps.
//!
//! Families of tent-like maps `f_t`, their invariant densities `ρ_t`, Marchaud
//! fractional derivatives of the response `t ↦ ∫ φ ρ_t` and the power series
//! `Ψ_φ(η, z)` that resums them. See `examples/` for one program per capability.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cohomology;
pub mod density;
pub mod error;
pub mod experiment;
pub mod io;
pub mod maps;
pub mod marchaud;
pub mod observable;
pub mod quad;
pub mod response;
pub mod special;
pub mod stepfn;
pub mod susceptibility;
pub mod verify;

pub use error::{Error, Result};
