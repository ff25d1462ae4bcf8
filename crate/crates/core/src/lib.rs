//! Weakly distance-regular digraphs: construction, intersection numbers,
//! arc-type analysis, the quasi-thin Cayley families and a census over small
//! abelian Cayley digraphs.

pub mod arcs;
pub mod census;
pub mod digraph;
pub mod error;
pub mod families;
pub mod group;
pub mod iso;
pub mod par;
pub mod scheme;

pub use digraph::{two_way, Digraph, DistanceTable, TwoWayDistance};
pub use error::{Error, Result};
pub use group::{generates_group, AbelianGroup, GroupElement};
pub use par::Execution;
