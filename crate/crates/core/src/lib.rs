//! Descending ladder epochs of negative-drift random walks with heavy-tailed
//! increments.
//!
//! The crate certifies growth functions `g`, builds the dominating increment
//! chain `xi <=_st xi_tilde <=_st xi_hat` from a tail majorant, simulates
//! ladder epochs and estimates moment functionals such as
//! `E exp((1-eps) g((a-delta) tau))`.

pub mod dist;
pub mod estimate;
pub mod growth;
pub mod quad;
pub mod rng;
pub mod walk;
