//! Minimal induced drag span loads for a finite wing under lift and
//! bending-moment constraints.
//!
//! Circulation is written as `Gamma(xi) = f(xi) sqrt(1 - xi^2)` on the
//! normalised span `xi = 2x/b`, with `f` expanded in even Chebyshev
//! polynomials of the second kind. In that basis the downwash is diagonal
//! and the induced drag is a weighted sum of squares, so the optimisation
//! reduces to finding the point of a constraint region closest to the origin
//! in the metric `a_0^2 + 3 a_2^2 + 5 a_4^2 + ...`.
//!
//! Two bending-moment models are provided: the lift-only moment and the
//! self-weight model, where the wing's own weight (proportional to the moment
//! it must carry) relieves the lift moment.

pub mod chebyshev;
pub mod circulation;
pub mod error;
pub mod feasibility;
pub mod moments;
pub mod optimizer;
pub mod quadrature;
pub mod selftest;

pub use error::{Error, Result};
