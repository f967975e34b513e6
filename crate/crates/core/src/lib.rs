//! Source-free Maxwell fields on homogeneous spacetimes of Bianchi type IX.
//!
//! A field is given by the time dependence of six amplitudes α_a, β_a; the
//! metric follows by solving a linear system for the scaled metric n_ab along
//! a time grid. [`verify`] checks the result against the field equations by
//! finite differences, independently of the solver.

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::large_enum_variant)]

pub mod algebra;
pub mod config;
pub mod curve;
pub mod fd;
pub mod frame;
pub mod maxwell_system;
pub mod pipeline;
pub mod smallmat;
pub mod spacetime;
pub mod timefunc;
pub mod verify;
