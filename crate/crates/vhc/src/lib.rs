pub mod expr;
pub mod function;
pub mod interp;
pub mod ode;
pub mod quad;
pub mod reduction;
pub mod analysis;
pub mod lagrangian;
pub mod dynamics;
pub mod xform;
pub mod model;
pub mod fixtures;
pub mod cli;
