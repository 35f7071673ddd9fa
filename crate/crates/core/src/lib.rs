//! Parser, proof kernel and trace-semantics oracle for a dynamic logic of
//! hybrid programs with a time-almost-everywhere safety modality.
//!
//! The crate is organised bottom-up:
//!
//! * [`syntax`]: terms, programs, formulas, parser, printer, substitution.
//! * [`poly`]: exact polynomial arithmetic, root isolation, normal forms,
//!   Fourier–Motzkin elimination, closure and validity checking.
//! * [`ode`]: polynomial solutions of ODE systems and an RK4 fallback.
//! * [`kernel`]: sequents, the rule registry and proof-script replay.
//! * [`sim`]: the executable trace semantics used as a test oracle.

pub mod kernel;
pub mod ode;
pub mod poly;
pub mod sim;
pub mod syntax;

pub use num_rational::BigRational as Rational;
