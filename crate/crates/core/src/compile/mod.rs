//! From a diagram to an initialized junction tree: requisite reduction,
//! moralization, min-fill triangulation, clique tree, function assignment.

mod graph;
mod junction;
mod reduce;

pub use graph::{moralize, triangulate, UndirectedGraph};
pub use junction::{assign_functions, build_junction_tree, CliqueAssignment, JtEdge, JunctionTree};
pub use reduce::{check_soluble, d_separated, descendants, reduce};

use crate::error::Result;
use crate::model::Limid;

/// Junction tree of `limid` as given (callers reduce first when they want
/// the minimal diagram).
pub fn compile(limid: &Limid) -> Result<JunctionTree> {
    let moral = moralize(limid);
    let (chordal, order) = triangulate(&moral);
    let jt = build_junction_tree(&chordal, &order, &limid.cardinalities())?;
    assign_functions(limid, jt)
}
