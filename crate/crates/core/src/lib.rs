//! Finite quantitative algebras over extended metric spaces.
//!
//! Distances are exact non-negative rationals or infinity. The crate covers
//! metric and pseudometric spaces with their basic constructions, free-algebra
//! term metrics, quantitative algebras and homomorphisms, subcongruences with
//! their colimits, generated congruences, and quantitative equations.

pub mod algebra;
pub mod closure;
pub mod dist;
pub mod doc;
pub mod error;
pub mod random;
pub mod space;
pub mod subcongruence;
pub mod term;
pub mod variety;

pub use algebra::{Algebra, Homomorphism, QuantAlgebra};
pub use closure::{CongruenceOnAlgebra, Constraint};
pub use dist::ExtDist;
pub use error::{Error, Limits, Result};
pub use space::{DistMatrix, MetricSpace, NonexpandingMap, PseudoSpace, QuotientMap};
pub use subcongruence::Subcongruence;
pub use term::{Signature, Symbol, Term};
pub use variety::{QuantEquation, VarietyPresentation};
