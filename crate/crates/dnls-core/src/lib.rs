//! Numerical laboratory for the derivative nonlinear Schrödinger equation
//! (DNLS) on the truncated line and the Dirichlet half-line.
//!
//! The crate provides the gauge-transformation algebra, the conserved
//! quantities and weighted virial functionals with their exact rate
//! formulas, the sech-profile ground state and the sharp Gagliardo-Nirenberg
//! functional, pseudospectral and method-of-lines time integrators, a
//! half-line blow-up certificate, the rescaling/fitting machinery that
//! detects proximity to the ground-state orbit, and a scripted experiment
//! harness with machine-checkable verdicts.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod evolve;
pub mod fixtures;
pub mod gauge;
pub mod grid;
pub mod ground_state;
pub mod modulation;
pub mod output;

pub use error::{DnlsError, Result};
pub use grid::{ComplexField, GridKind, GridSpec};
