//! Exact-arithmetic machinery for adelic pairings on split tori and punctured
//! projective lines: local invariants of Dirichlet characters, S-unit
//! equations, integral models with dilatations, congruence sieves, and the
//! certificate formats the CLI serializes. Everything is exact; operations
//! that would need more local precision than stored fail loudly instead of
//! guessing.

pub mod ffield;
pub mod jsonio;
pub mod fq;
pub mod padic;
pub mod models;
pub mod place;
pub mod poly;
pub mod qmodz;
pub mod rat;
pub mod reciprocity;
pub mod selftest;
pub mod curves;
pub mod sieve;
pub mod sunits;
pub mod toruslab;
