pub mod decoder;
pub mod ensemble;
pub mod evolution;
pub mod gf2;
pub mod graph;
pub mod scaling;
