//! Discrete differential forms on triangulated spheres, sampled k-dilation
//! estimates, and generalized Hopf invariants for maps S³ → S² ⊂ R³.

pub mod audit;
pub mod construction;
pub mod dilation;
pub mod error;
pub mod forms;
pub mod hopf;
pub mod maps;
pub mod mesh;
pub mod solver;

pub use error::{Error, Result};
