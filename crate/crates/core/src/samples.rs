//! Small reference systems used across tests, docs and the CLI examples.
//!
//! Two systems recur everywhere:
//!
//! - a four-variable feedback system `x0 -> x1 <-> x2 <- x3` where the middle
//!   pair forms a two-cycle (`x1 -> x2` and `x2 -> x1`), all observed;
//! - a five-observable system with one latent confounder and the feedback
//!   loop `o1 -> o3 -> o2 -> o1`, exercising every discovery step.

use crate::graph::{DirectedSystem, EndpointMark, MixedGraph, VertexClass};

use EndpointMark::{Arrow, Circle, Tail};

/// Four observed variables: `0 -> 1`, `1 -> 2`, `2 -> 1`, `3 -> 2`.
///
/// With unit-variance errors and all coefficients 0.5 this is the classic
/// smallest linear feedback system.
pub fn four_var_feedback() -> DirectedSystem {
    DirectedSystem::new(4, &[(0, 1), (1, 2), (2, 1), (3, 2)]).expect("static graph")
}

/// The ground-truth MAAG of [`four_var_feedback`]:
/// `0 -> 1`, `0 -> 2`, `3 -> 1`, `3 -> 2`, `1 - 2`.
pub fn four_var_feedback_maag() -> MixedGraph {
    let mut m = MixedGraph::new(4);
    m.add_edge(0, 1, Tail, Arrow).unwrap();
    m.add_edge(0, 2, Tail, Arrow).unwrap();
    m.add_edge(3, 1, Tail, Arrow).unwrap();
    m.add_edge(3, 2, Tail, Arrow).unwrap();
    m.add_edge(1, 2, Tail, Tail).unwrap();
    m
}

/// Five observables `o0..o4` plus one latent confounder (vertex 5):
/// `L -> o0`, `L -> o1`, `o2 -> o1`, `o3 -> o2`, `o1 -> o3`, `o4 -> o3`.
///
/// Observed indices o0..o4 are vertices 0..4; the latent is vertex 5.
pub fn five_var_latent_feedback() -> DirectedSystem {
    let mut g = DirectedSystem::new(
        6,
        &[(5, 0), (5, 1), (2, 1), (3, 2), (1, 3), (4, 3)],
    )
    .expect("static graph");
    g.set_label(5, VertexClass::Latent).unwrap();
    g
}

/// Ground-truth MAAG of [`five_var_latent_feedback`] over `o0..o4`:
/// `o0 <-> o1`, `o0 <-> o2`, `o4 -> o1`, `o4 -> o3`, `o1 - o2`, `o2 - o3`,
/// `o1 - o3`.
pub fn five_var_reference_maag() -> MixedGraph {
    let mut m = MixedGraph::new(5);
    m.add_edge(0, 1, Arrow, Arrow).unwrap();
    m.add_edge(0, 2, Arrow, Arrow).unwrap();
    m.add_edge(4, 1, Tail, Arrow).unwrap();
    m.add_edge(4, 3, Tail, Arrow).unwrap();
    m.add_edge(1, 2, Tail, Tail).unwrap();
    m.add_edge(2, 3, Tail, Tail).unwrap();
    m.add_edge(1, 3, Tail, Tail).unwrap();
    m
}

/// Skeleton of the reference MAAG with all endpoints left as circles: the
/// expected state after skeleton discovery.
pub fn five_var_reference_skeleton() -> MixedGraph {
    let mut m = MixedGraph::new(5);
    for (a, b) in [(0, 1), (0, 2), (4, 1), (4, 3), (1, 2), (2, 3), (1, 3)] {
        m.add_edge(a, b, Circle, Circle).unwrap();
    }
    m
}

/// The skeleton after v-structure orientation: arrowheads at `o1` on the
/// edges from `o0` and `o4`, everything else circles.
pub fn five_var_reference_after_v_structures() -> MixedGraph {
    let mut m = MixedGraph::new(5);
    m.add_edge(0, 1, Circle, Arrow).unwrap();
    m.add_edge(4, 1, Circle, Arrow).unwrap();
    for (a, b) in [(0, 2), (4, 3), (1, 2), (2, 3), (1, 3)] {
        m.add_edge(a, b, Circle, Circle).unwrap();
    }
    m
}

/// Final discovery output on [`five_var_latent_feedback`] with an exact
/// oracle: `o0 o-> o1`, `o4 o-> o1`, `o0 o-> o2`, `o4 o-> o3`, and the
/// undirected triangle `o1 - o2`, `o2 - o3`, `o1 - o3`.
pub fn five_var_reference_output() -> MixedGraph {
    let mut m = MixedGraph::new(5);
    m.add_edge(0, 1, Circle, Arrow).unwrap();
    m.add_edge(4, 1, Circle, Arrow).unwrap();
    m.add_edge(0, 2, Circle, Arrow).unwrap();
    m.add_edge(4, 3, Circle, Arrow).unwrap();
    m.add_edge(1, 2, Tail, Tail).unwrap();
    m.add_edge(2, 3, Tail, Tail).unwrap();
    m.add_edge(1, 3, Tail, Tail).unwrap();
    m
}

/// Output of a cycle-aware discovery run that assumes no latent variables
/// (the CCD-style baseline) on the same system: the tail at `o0` on
/// `(o0, o1)` is its one ancestral error.
pub fn five_var_ccd_style_output() -> MixedGraph {
    let mut m = MixedGraph::new(5);
    m.add_edge(0, 1, Tail, Arrow).unwrap();
    m.add_edge(4, 1, Tail, Arrow).unwrap();
    m.add_edge(0, 2, Circle, Circle).unwrap();
    m.add_edge(4, 3, Circle, Circle).unwrap();
    m.add_edge(1, 2, Circle, Circle).unwrap();
    m.add_edge(2, 3, Circle, Circle).unwrap();
    m.add_edge(1, 3, Circle, Circle).unwrap();
    m
}
