//! Finite digraph calculus and computational universal algebra around
//! congruence permutability.
//!
//! The crate is organised in layers:
//!
//! * [`digraph`]: finite digraphs with complements, products, exponentials,
//!   components and induced subgraphs.
//! * [`iso`]: isomorphism testing with explicit witnesses.
//! * [`algebra`]: finite algebras, compatibility, subpower closure and the two
//!   Maltsev-term decision procedures.
//! * [`power`]: trace sets of power vertices and the swapped-power quotient
//!   isomorphism.
//! * [`chain`]: the `G0 -> G1 -> G2 -> G3` construction pipeline and Maltsev
//!   obstruction extraction.
//! * [`text`]: the line-oriented digraph and algebra file formats.
//!
//! Exhaustive scans run on rayon when the `parallel` feature is enabled (the
//! default). Every scan has a sequential path selected through [`Exec`], and
//! results never depend on the schedule.

pub mod algebra;
pub mod chain;
mod config;
pub mod digraph;
mod error;
mod exec;
pub mod iso;
pub mod power;
pub mod text;

pub use algebra::{CpVerdict, FiniteAlgebra, Operation, SubpowerElement, Term};
pub use chain::{ChainReport, ObstructionWitness};
pub use config::Config;
pub use digraph::{ComponentPartition, Digraph, PropertyFlags};
pub use error::{Error, Result};
pub use exec::Exec;
pub use iso::IsoWitness;
pub use power::{PowerContext, TraceQuotient, TraceSet};
