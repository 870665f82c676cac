//! Construction and exhaustive certification of distance-regular graphs
//! arising from dual polar geometry: the explicit graph `Z` over GF(q), the
//! dual polar graphs of types B3(q) and D4(q), their subgraphs far from a
//! vertex or an edge, and the (extended) bipartite double transforms.

pub mod certify;
pub mod error;
pub mod exactlin;
pub mod gf;
pub mod graph;
pub mod quadgeom;
pub mod zgraph;

pub use error::{Error, Result};
pub use gf::{Elem, Field, FieldElement};
pub use graph::{DistancePartition, Graph, Side};
