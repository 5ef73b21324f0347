//! Dynamic (1+o(1))-approximate global minimum cut for unweighted
//! multigraphs: a ladder of uniformly sparsified instances, each maintaining
//! a hierarchy of boundary-sparse cluster decompositions whose mirror
//! clusters track every small local cut.

pub mod clusters;
pub mod error;
pub mod expander;
pub mod families;
pub mod graph;
pub mod hierarchy;
pub mod io;
pub mod localkcut;
pub mod master;
pub mod mirror;
pub mod ops;
pub mod oracle;
pub mod params;
pub mod rng;
pub mod sparsify;

pub use error::{Error, Result};
pub use graph::{Cut, DynamicGraph, VertexSet};
pub use hierarchy::{Hierarchy, InstanceAnswer};
pub use master::{MasterState, QueryResult};
pub use params::{Mode, Params};
pub use sparsify::EdgeOp;
