//! Rose-to-graph and graph-to-rose fold lines, full rose-to-rose lines,
//! change-of-metric matrices and retargeting.

pub mod graph_rose;
pub mod line;
pub mod rose_graph;

pub use rose_graph::{lengths_from_params, recover_rose, rose_to_graph, rose_turns, RoseRecovery, RoseToGraphLine, TypeForms};
pub use graph_rose::{graph_to_rose, GraphToRose};
pub use line::{rationalize, retarget, retarget_lengths, rose_to_rose, RoseToRoseLine};
