//! Numerical laboratory for dyadic weighted harmonic analysis on `[0, 1)`.
//!
//! Everything lives on a finite dyadic tree of depth `D`. Functions are
//! constant on the `2^D` leaves ([`StepFunction`]); weights are strictly
//! positive step functions ([`Weight`]). On top of that the crate provides
//!
//! * the Haar and weighted Haar systems ([`dyadic`]),
//! * dyadic `A_p`, `RH_p`, `C_s`, doubling and BMO characteristics plus the
//!   weighted dyadic maximal function ([`weights`]),
//! * Carleson sequences, their intensities and the standard sequence
//!   families built from a weight ([`carleson`]),
//! * the stopping-time construction used to lift Carleson sequences
//!   ([`stopping`]),
//! * paraproducts, Haar shifts and t-Haar multipliers of complexity
//!   `(m, n)`, applied matrix-free, with adjoints and weighted norm
//!   estimation ([`operators`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carleson;
pub mod dyadic;
pub mod error;
pub mod operators;
pub mod stopping;
pub mod weights;

pub use carleson::{IndexedSequence, IntensityReport};
pub use dyadic::{DyadicGrid, HaarSpectrum, IntervalId, StepFunction, WeightedHaarDecomposition};
pub use error::{Error, Result};
pub use operators::{CoefficientFamily, NormEstimate, OperatorFamily, OperatorSpec};
pub use stopping::{Criterion, StoppingFamily};
pub use weights::{CharacteristicReport, Weight, WeightFamilySpec};
