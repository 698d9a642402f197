//! Numerical laboratory for the Pearcey, tacnode and critical kernels.

pub mod acceptance;
pub mod brownian_sim;
pub mod curve;
pub mod lambda;
pub mod local0;
pub mod numerics;
pub mod pearcey;
pub mod phase;
pub mod rh_chain;
