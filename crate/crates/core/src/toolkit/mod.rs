//! Support code for the command-line front end: synthetic databases,
//! benchmark matrices and memory readings.

pub mod bench;
pub mod generator;
pub mod memory;
