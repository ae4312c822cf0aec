//! Finite-scale constructions around well-founded trees, Borel codes and
//! set-move Ehrenfeucht-Fraisse games.

pub mod borelcode;
pub mod corpus;
pub mod efgame;
pub mod error;
pub mod scott;
pub mod structures;
pub mod trees;

pub use error::{Error, Result};
