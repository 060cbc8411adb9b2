//! Truncated Möbius vertex algebras and the Wightman fields they define on
//! the circle.
//!
//! A model (Heisenberg, Virasoro vacuum module, or its simple quotient) is
//! realized on `⊕_{n≤N} V(n)` with exact rational-complex arithmetic. Fields
//! are smeared against band-limited test functions, the Möbius group acts by
//! `U(γ)`, and the vertex algebra can be reconstructed from the smeared
//! fields alone. Invariant forms on both sides are compared numerically.

pub mod circle;
pub mod error;
pub mod forms;
pub mod graded;
pub mod linalg;
pub mod scalar;
pub mod vertex;
pub mod wightman;

pub use circle::{LieElement, MoebiusElement, TestFunction};
pub use error::{Error, Result};
pub use graded::{BlockOperator, Covector, GradedSpace, GradedVector};
pub use scalar::{Qc, Rational};
pub use vertex::{Field, Model};
