//! Cartan projections and translation lengths on the Bruhat-Tits tree of
//! SL2(Q_p), stretch factors between marked metric graphs, and
//! admissibility tests for representations of free groups acting on trees.
//!
//! All arithmetic is exact over the rationals.

pub mod admissibility;
pub mod bruhat_tits;
pub mod gen;
pub mod graph;
pub mod io;
pub mod padic;
pub mod rational;
pub mod stretch;
