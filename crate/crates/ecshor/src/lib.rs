//! Simulation and cost accounting of the reversible machinery behind Shor's
//! discrete-logarithm algorithm for elliptic curves over GF(p).

pub mod dlp_sim;
pub mod ec_group;
pub mod euclid_machine;
pub mod group_shift;
pub mod numtheory;
pub mod resource_model;
pub mod reversible_core;
pub mod rng;
