//! Exact computer algebra for rational quantum tori and the toroidal Lie
//! algebras they coordinate.
//!
//! The crate builds, over cyclotomic scalars with no floating point
//! anywhere:
//!
//! * the quantum torus `C_q` with its cocycle multiplication, commutator
//!   structure and center decomposition;
//! * its degree-1 cyclic homology, the kernel of the universal central
//!   extension, with a brute-force dimension oracle;
//! * the toroidal Lie algebra `sl_d(C_q) + HC1(C_q) + D` with its full
//!   bracket, root data and Weyl reflections;
//! * finite-dimensional fiber quotients with explicit irreducible matrix
//!   representations and the pullback homomorphism;
//! * a graded-module engine for highest-weight spaces, integrability
//!   checks and windowed decomposition into shift-equivalent components.
//!
//! With the default `parallel` feature the embarrassingly parallel parts
//! (the dimension oracle grid, per-point fiber decompositions, randomized
//! verification suites) fan out over rayon; disabling the feature yields
//! the identical sequential results.

pub mod cyclotomic;
pub mod fiber;
pub mod graded;
pub mod hc1;
pub mod linalg;
pub mod roots;
mod intmat;
pub mod quantum_torus;
pub mod sample;
pub mod toroidal;
pub mod torus;

pub use cyclotomic::{Cyclotomic, Rat, ScalarError};
pub use quantum_torus::TorusElement;
pub use toroidal::ToroidalElement;
pub use hc1::HC1Element;
pub use roots::{Root, Weight};
pub use torus::{Degree, QMatrix, Sublattice, Torus, TorusError};
