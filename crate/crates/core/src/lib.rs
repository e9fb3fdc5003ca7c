//! A small finite element form compiler.
//!
//! Multilinear forms written in an embedded expression language (or parsed
//! from form files) are lowered to a canonical sum of monomials, compiled to a
//! contraction `A^K = A0 : G_K` between a precomputed reference tensor and a
//! per-cell geometry tensor, optionally optimized into a straight-line
//! schedule, and assembled into global sparse systems on simplicial meshes.
//!
//! Module map:
//! - [`fiat`]: reference cells, orthogonal prime bases, nodal bases, quadrature
//! - [`form`]: expression language, canonical form, form-file parser
//! - [`tensor`]: reference/geometry tensors, flattened kernels, quadrature path
//! - [`opt`]: complexity-reducing relations, spanning tree, schedules
//! - [`assembly`]: meshes, dofmaps, sparse assembly, boundary conditions, CG
//! - [`artifact`]: serialized compiled forms and the signature-keyed cache

#![allow(clippy::needless_range_loop)]

pub mod artifact;
pub mod assembly;
pub mod error;
pub mod fiat;
pub mod form;
pub mod opt;
pub mod par;
pub mod tensor;

pub use error::{Error, Result};
pub use par::ExecPolicy;
