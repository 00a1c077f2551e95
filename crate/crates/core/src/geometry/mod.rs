//! Spatial discretization: Delaunay triangulation of the measurement
//! positions and the neighbor graph derived from its edges.

mod delaunay;
mod graph;
mod points;
pub mod predicates;

pub use delaunay::{delaunay, Triangulation};
pub use graph::{build_graph, Graph};
pub use points::{Point, PointSet, DUPLICATE_DISTANCE};
