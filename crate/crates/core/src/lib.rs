pub mod entanglement;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod lattice;
pub mod lightcone;
pub mod linalg;
pub mod model;
pub mod velocity;
