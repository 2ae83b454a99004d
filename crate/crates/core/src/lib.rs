//! Non-adiabatic holonomic gates on the four-level tripod system.
//!
//! The crate covers the closed-system propagator of a loop in the
//! `(ϑ, φ)` parameter sphere, the fidelity revivals it exhibits, and the
//! Markovian master equation describing the gate under a bosonic bath that
//! couples the `|0⟩ ↔ |e⟩` transition.
//!
//! Units: every energy is measured in units of the bright-state gap `Ω` and
//! every time in `1/Ω`. Functions still take `omega` explicitly so that the
//! dimensionless product `Ωτ` can be varied either way.
//!
//! Basis ordering for 4×4 operators in the dark/bright frame is
//! `(D₀, D₁, D₊, D₋)`; in the bare basis it is `(|0⟩, |1⟩, |a⟩, |e⟩)`.

pub mod bath;
pub mod closed_form;
pub mod error;
pub mod lindblad;
pub mod linalg;
pub mod path;
pub mod propagator;
pub mod quadrature;
pub mod revivals;
pub mod sampling;
pub mod tripod;

pub use error::{Error, Result};
pub use linalg::{expm_generator, state_fidelity, ComplexMatrix, DensityMatrix, StateVector};
pub use path::{PathSegment, PathSpec};
pub use tripod::{Level, SpherePoint, TripodFrame};
