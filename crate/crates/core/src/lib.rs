//! sclforge: an exact laboratory for circle-action quasimorphisms.
//!
//! The crate builds piecewise-linear circle representations of one-relator
//! groups with torsion, evaluates invariant quasimorphisms on products of
//! mixed commutators through certified translation-number intervals, and
//! emits machine-checkable certificates that stable commutator length and
//! its mixed-subgroup refinement grow at genuinely different rates.
//!
//! Modules:
//! - [`word`]: free-group words, reduction, parsing, the explicit families;
//! - [`nilpotent`]: degree-2 Magnus calculus and `[G, G']` membership;
//! - [`circle`]: exact rational PL lifts, translation-number intervals;
//! - [`ehn`]: commutators realizing translations, representation building;
//! - [`qm`]: quasimorphism evaluation, growth reports, certificates;
//! - [`fuchsian`]: floating-point hyperbolic shadow of the surface action;
//! - [`cli`]: the batch command-line front end.

pub mod circle;
pub mod cli;
pub mod ehn;
pub mod fuchsian;
pub mod nilpotent;
pub mod qm;
pub mod ratio;
pub mod word;
