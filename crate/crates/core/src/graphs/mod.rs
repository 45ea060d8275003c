//! Half-edge graphs, marked metric points, graph maps, folds, gates and the
//! marking action.

pub mod automorphism;
pub mod fold;
pub mod generate;
pub mod graph;
pub mod iso;
pub mod map;
pub mod point;

pub use automorphism::{AutLetter, AutomorphismWord, FreeWord};
pub use fold::{combinatorial_fold, FoldKind};
pub use graph::{Graph, HalfEdge, Path, Turn};
pub use map::GraphMap;
pub use point::{Marking, Point};
