//! Spanning subdivisions and subdivision tilings in dense digraphs.

pub mod absorb;
pub mod bitset;
pub mod classify;
pub mod cover;
pub mod digraph;
pub mod embed;
pub mod error;
pub mod extremal;
pub mod gen;
pub mod hampath;
pub mod harness;
pub mod matching;
pub mod nonextremal;
pub mod oracle;
pub mod params;
pub mod rng;
pub mod solve;
pub mod pattern;
pub mod stability;
pub mod trace;

pub use bitset::BitSet;
pub use digraph::{Digraph, DigraphBuilder, VertexSet};
pub use error::{Error, Result};
pub use pattern::{Pattern, SubdivisionCert, TilingCert, Verdict, Violation};
