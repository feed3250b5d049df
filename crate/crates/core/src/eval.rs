//! Evaluation machinery: RFCI-style v-structure orientation, corrected
//! oracle graphs, structural Hamming distance, and endpoint-orientation
//! comparison.

use std::collections::BTreeSet;

use crate::cci::{
    self, format_set, CciOptions, DiscoveryState, TraceAction, TraceEvent,
};
use crate::ci::CiProvider;
use crate::error::Error;
use crate::graph::{DirectedSystem, EndpointMark, MixedGraph, VertexId};
use crate::Result;

use EndpointMark::{Arrow, Circle, Tail};

/// One endpoint correction made by [`corrected_oracle_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkFix {
    pub edge: (VertexId, VertexId),
    pub at: VertexId,
    pub from: EndpointMark,
    pub to: EndpointMark,
}

/// An output graph with every ancestrally wrong arrowhead and tail flipped.
#[derive(Debug, Clone)]
pub struct CorrectionReport {
    pub corrected: MixedGraph,
    pub fixes: Vec<MarkFix>,
}

impl CorrectionReport {
    pub fn n_arrow_fixed(&self) -> usize {
        self.fixes.iter().filter(|f| f.from == Arrow).count()
    }

    pub fn n_tail_fixed(&self) -> usize {
        self.fixes.iter().filter(|f| f.from == Tail).count()
    }
}

/// Replaces arrowheads at ancestors with tails and tails at non-ancestors
/// with arrowheads, judged against the true system's ancestry (selection
/// included). Circles and adjacencies are untouched.
///
/// `observed` binds the mixed graph's indices to vertices of `truth`.
pub fn corrected_oracle_graph(
    out: &MixedGraph,
    truth: &DirectedSystem,
    observed: &[VertexId],
) -> Result<CorrectionReport> {
    if out.p() != observed.len() {
        return Err(Error::invalid(format!(
            "graph has {} vertices, binding has {}",
            out.p(),
            observed.len()
        )));
    }
    let selection = truth.selection_set();
    let mut anc_with_sel = Vec::with_capacity(observed.len());
    for &v in observed {
        let mut seed = BTreeSet::from([v]);
        seed.extend(selection.iter().copied());
        anc_with_sel.push(truth.ancestors(&seed)?);
    }
    let mut corrected = MixedGraph::new(out.p());
    let mut fixes = Vec::new();
    for (a, b) in out.edges() {
        let (ma, mb) = out.marks(a, b).expect("edge");
        let mut fix_end = |at: VertexId, other: VertexId, mark: EndpointMark| {
            // True iff `at` is an ancestor of {other} u S.
            let ancestral = anc_with_sel[other as usize].contains(&observed[at as usize]);
            let want = match (mark, ancestral) {
                (Arrow, true) => Tail,
                (Tail, false) => Arrow,
                (m, _) => m,
            };
            if want != mark {
                fixes.push(MarkFix {
                    edge: (a, b),
                    at,
                    from: mark,
                    to: want,
                });
            }
            want
        };
        let na = fix_end(a, b, ma);
        let nb = fix_end(b, a, mb);
        corrected.add_edge(a, b, na, nb)?;
    }
    Ok(CorrectionReport { corrected, fixes })
}

/// Structural Hamming distance between two mixed graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShdResult {
    /// Edges present in exactly one graph.
    pub adjacency_diffs: usize,
    /// Endpoint positions on shared edges whose marks differ.
    pub mark_diffs: usize,
}

impl ShdResult {
    pub fn total(&self) -> usize {
        self.adjacency_diffs + self.mark_diffs
    }
}

/// SHD: each adjacency mismatch counts one, each differing endpoint mark on
/// a shared edge counts one (circle-vs-tail and circle-vs-arrow included).
pub fn shd(a: &MixedGraph, b: &MixedGraph) -> Result<ShdResult> {
    if a.p() != b.p() {
        return Err(Error::invalid("graphs have different vertex counts"));
    }
    let mut adjacency_diffs = 0;
    let mut mark_diffs = 0;
    let edges: BTreeSet<(VertexId, VertexId)> = a.edges().chain(b.edges()).collect();
    for (x, y) in edges {
        match (a.marks(x, y), b.marks(x, y)) {
            (Some((ma_x, ma_y)), Some((mb_x, mb_y))) => {
                if ma_x != mb_x {
                    mark_diffs += 1;
                }
                if ma_y != mb_y {
                    mark_diffs += 1;
                }
            }
            (None, None) => unreachable!("edge came from one of the graphs"),
            _ => adjacency_diffs += 1,
        }
    }
    Ok(ShdResult {
        adjacency_diffs,
        mark_diffs,
    })
}

/// Among endpoints oriented (non-circle) in `reference`, the fraction also
/// oriented in `candidate`; 1.0 when the reference orients nothing.
/// Both graphs must share a skeleton.
pub fn endpoint_orientation_fraction(
    candidate: &MixedGraph,
    reference: &MixedGraph,
) -> Result<f64> {
    if candidate.p() != reference.p() {
        return Err(Error::invalid("graphs have different vertex counts"));
    }
    let edges_c: Vec<_> = candidate.edges().collect();
    let edges_r: Vec<_> = reference.edges().collect();
    if edges_c != edges_r {
        return Err(Error::invalid("graphs have different skeletons"));
    }
    let mut oriented_ref = 0usize;
    let mut matched = 0usize;
    for (x, y) in edges_r {
        let (rx, ry) = reference.marks(x, y).expect("edge");
        let (cx, cy) = candidate.marks(x, y).expect("edge");
        for (r, c) in [(rx, cx), (ry, cy)] {
            if r != Circle {
                oriented_ref += 1;
                if c != Circle {
                    matched += 1;
                }
            }
        }
    }
    if oriented_ref == 0 {
        Ok(1.0)
    } else {
        Ok(matched as f64 / oriented_ref as f64)
    }
}

/// RFCI-style v-structure orientation on a PC skeleton: every unshielded
/// triple's flanking pairs are re-tested against the recorded separator of
/// its endpoints; an independent flank exposes a spurious edge, which is
/// deleted with a minimal sub-separator, updating the triple lists. The
/// surviving triples with `j` outside `Sep(i, k)` are oriented.
pub fn rfci_v_structures(state: &mut DiscoveryState, ci: &dyn CiProvider) -> Result<()> {
    let mut pending: Vec<(VertexId, VertexId, VertexId)> = state.triples.clone();
    let mut accepted: Vec<(VertexId, VertexId, VertexId)> = Vec::new();
    while let Some((i, j, k)) = pending.first().copied() {
        pending.remove(0);
        if !state.graph.is_adjacent(i, j) || !state.graph.is_adjacent(j, k) {
            continue;
        }
        let Some(sep_ik) = state.seps.sep(i, k).cloned() else {
            continue;
        };
        let mut base = sep_ik.clone();
        base.remove(&j);
        let dep_ij = !ci.independent(i, j, &base)?;
        let dep_jk = !ci.independent(j, k, &base)?;
        if dep_ij && dep_jk {
            accepted.push((i, j, k));
            continue;
        }
        for (r, dependent) in [(i, dep_ij), (k, dep_jk)] {
            if dependent || !state.graph.is_adjacent(r, j) {
                continue;
            }
            // (r, j) is separable inside Sep(i, k): find a minimal subset.
            let pool: Vec<VertexId> = base.iter().copied().filter(|&v| v != r).collect();
            let mut found: Option<BTreeSet<VertexId>> = None;
            'sizes: for size in 0..=pool.len() {
                for w in subsets_of(&pool, size) {
                    if ci.independent(r, j, &w)? {
                        found = Some(w);
                        break 'sizes;
                    }
                }
            }
            let Some(w) = found else {
                continue;
            };
            state.seps.set_sep(r, j, w.clone());
            state.graph.remove_edge(r, j);
            state.log.push(TraceEvent {
                step: 2,
                rule: "rfci-vstruc".to_string(),
                edge: Some((r.min(j), r.max(j))),
                action: TraceAction::DropEdge,
                because: format!("sep({r},{j})={}", format_set(&w)),
            });
            let (lo, hi) = (r.min(j), r.max(j));
            // Newly unshielded triples: former triangles over the pair.
            let mids: Vec<VertexId> = state
                .graph
                .neighbors(lo)
                .intersection(state.graph.neighbors(hi))
                .copied()
                .collect();
            for mid in mids {
                pending.push((lo, mid, hi));
            }
            let involves = |t: &(VertexId, VertexId, VertexId)| {
                let (a, b, c) = *t;
                (a == r && b == j) || (b == r && a == j) || (b == r && c == j) || (b == j && c == r)
            };
            pending.retain(|t| !involves(t));
            accepted.retain(|t| !involves(t));
        }
    }
    for (i, j, k) in accepted {
        if !state.graph.is_adjacent(i, j) || !state.graph.is_adjacent(j, k) {
            continue;
        }
        let Some(sep) = state.seps.sep(i, k).cloned() else {
            continue;
        };
        if sep.contains(&j) {
            continue;
        }
        let because = format!("sep({i},{k})={}", format_set(&sep));
        state.orient(2, "rfci-vstruc", i, j, j, Arrow, because.clone())?;
        state.orient(2, "rfci-vstruc", j, k, j, Arrow, because)?;
    }
    Ok(())
}

/// Lexicographic subsets of a fixed size (order only matters for
/// determinism here).
fn subsets_of(items: &[VertexId], k: usize) -> Vec<BTreeSet<VertexId>> {
    let mut out = Vec::new();
    if k > items.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        if k == 0 {
            break;
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] + 1 <= items.len() - (k - pos) {
                idx[pos] += 1;
                for later in pos + 1..k {
                    idx[later] = idx[later - 1] + 1;
                }
                break;
            }
        }
    }
    out
}

/// The acyclic-case baseline: skeleton discovery plus v-structure
/// orientation only (the fragment CCI shares with FCI).
pub fn fci_fragment_run(
    ci: &dyn CiProvider,
    p_obs: usize,
    opts: &CciOptions,
) -> Result<DiscoveryState> {
    let mut state = cci::pc_skeleton(ci, p_obs, opts)?;
    cci::orient_v_structures(&mut state, 1)?;
    cci::fci_final_skeleton(&mut state, ci, opts)?;
    cci::orient_v_structures(&mut state, 2)?;
    Ok(state)
}
