//! Coverage verification for planar sensor networks from pairwise
//! communication data, using relative persistent homology of Rips complexes.

pub mod field;
pub mod geometry;
pub mod metric;
pub mod oracle;
pub mod rips;
pub mod scenario;
pub mod homology;
pub mod optcycle;
pub mod criteria;
pub mod cli;
