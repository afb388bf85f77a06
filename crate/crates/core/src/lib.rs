//! Exact and numerical tools for mutually unbiased bases: cyclotomic
//! arithmetic, torus classification, Hadamard families and their
//! constructions, Delsarte witnesses, and the pseudo-MUB linear program.

pub mod constructions;
pub mod cyclo;
pub mod hadamard;
pub mod lp;
pub mod lp_format;
pub mod numfmt;
pub mod simplex;
pub mod torus;
pub mod witness;
