//! Executable model of a family of S-machines, the group presentation they
//! compile to, and the combinatorics used to verify simulations.

pub mod bands;
pub mod derive;
pub mod h2;
pub mod hardware;
pub mod presentation;
pub mod smachine;
pub mod symbol;
pub mod words;
