pub mod cli;
pub mod constitutive;
pub mod diagnostics;
pub mod error;
pub mod fixedgrid;
pub mod integrator;
pub mod mechanics;
