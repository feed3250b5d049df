//! The cyclic causal inference (CCI) discovery algorithm.
//!
//! Discovery runs in seven steps against a CI provider:
//!
//! 1. skeleton discovery: PC-style level-wise edge removal, a first round of
//!    v-structure orientation, then re-testing every adjacency against
//!    subsets of possible-d-separating sets, and a reset of all endpoint
//!    marks to circles;
//! 2. v-structure orientation on the final skeleton;
//! 3. long-range non-ancestral orientation from stored minimal separators;
//! 4. discovery of non-minimal separating sets that contain a collider
//!    (only possible under cycles), recorded as `SupSep(i, j, k)`;
//! 5. orientations implied by the recorded (non-)minimal separators;
//! 6. long-range ancestral orientation by probing recorded separators;
//! 7. orientation rules 1-7 to a fixpoint.
//!
//! After step 2, endpoint marks only ever refine circles into tails or
//! arrowheads; the mixed graph enforces this on every mutation.

pub mod rules;
pub mod trace;

use std::collections::{BTreeMap, BTreeSet};

use crate::ci::CiProvider;
use crate::error::Error;
use crate::graph::{EndpointMark, MixedGraph, VertexId};
use crate::Result;

pub use rules::{
    apply_orientation_rules, is_potentially_2_triangulated, potential_2_triangulation_witnesses,
};
pub use trace::{format_set, parse_trace, replay_trace, write_trace, TraceAction, TraceEvent};

/// Stored separating sets: one minimal set per unordered pair, plus
/// triple-indexed non-minimal sets containing the middle collider.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SepStore {
    sep: BTreeMap<(VertexId, VertexId), BTreeSet<VertexId>>,
    supsep: BTreeMap<(VertexId, VertexId, VertexId), BTreeSet<VertexId>>,
}

impl SepStore {
    fn pair(i: VertexId, j: VertexId) -> (VertexId, VertexId) {
        if i < j {
            (i, j)
        } else {
            (j, i)
        }
    }

    pub fn sep(&self, i: VertexId, j: VertexId) -> Option<&BTreeSet<VertexId>> {
        self.sep.get(&Self::pair(i, j))
    }

    pub fn set_sep(&mut self, i: VertexId, j: VertexId, w: BTreeSet<VertexId>) {
        debug_assert!(!w.contains(&i) && !w.contains(&j));
        self.sep.insert(Self::pair(i, j), w);
    }

    pub fn supsep(&self, i: VertexId, j: VertexId, k: VertexId) -> Option<&BTreeSet<VertexId>> {
        self.supsep.get(&(i, j, k))
    }

    pub fn set_supsep(&mut self, i: VertexId, j: VertexId, k: VertexId, t: BTreeSet<VertexId>) {
        debug_assert!(t.contains(&j) && !t.contains(&i) && !t.contains(&k));
        self.supsep.insert((i, j, k), t);
    }

    /// Minimal separators, keyed by unordered pair.
    pub fn iter_sep(
        &self,
    ) -> impl Iterator<Item = (&(VertexId, VertexId), &BTreeSet<VertexId>)> {
        self.sep.iter()
    }

    /// Non-minimal separators, keyed by ordered triple.
    pub fn iter_supsep(
        &self,
    ) -> impl Iterator<Item = (&(VertexId, VertexId, VertexId), &BTreeSet<VertexId>)> {
        self.supsep.iter()
    }

    pub fn supsep_count(&self) -> usize {
        self.supsep.len()
    }
}

/// Mutable state threaded through the discovery steps.
#[derive(Debug, Clone)]
pub struct DiscoveryState {
    pub graph: MixedGraph,
    pub seps: SepStore,
    /// Pending unshielded triples `(i, j, k)` with `i < k`.
    pub triples: Vec<(VertexId, VertexId, VertexId)>,
    pub log: Vec<TraceEvent>,
}

impl DiscoveryState {
    fn log_drop(&mut self, step: u8, rule: &str, i: VertexId, j: VertexId, because: String) {
        self.log.push(TraceEvent {
            step,
            rule: rule.to_string(),
            edge: Some((i.min(j), i.max(j))),
            action: TraceAction::DropEdge,
            because,
        });
    }

    /// Orients the mark at `at` on edge `{a,b}` and logs the change.
    /// No-op when already equal; contradicting an oriented mark is an error.
    pub(crate) fn orient(
        &mut self,
        step: u8,
        rule: &str,
        a: VertexId,
        b: VertexId,
        at: VertexId,
        mark: EndpointMark,
        because: String,
    ) -> Result<bool> {
        let changed = self.graph.set_mark(a, b, at, mark)?;
        if changed {
            self.log.push(TraceEvent {
                step,
                rule: rule.to_string(),
                edge: Some((a.min(b), a.max(b))),
                action: TraceAction::Orient { at, mark },
                because,
            });
        }
        Ok(changed)
    }
}

/// Options for a discovery run.
#[derive(Debug, Clone, Default)]
pub struct CciOptions {
    /// Cap on conditioning-set size for finite-sample runs. Oracle runs
    /// should leave this unset.
    pub max_cond_size: Option<usize>,
}

impl CciOptions {
    fn cap(&self, limit: usize) -> usize {
        match self.max_cond_size {
            Some(cap) => cap.min(limit),
            None => limit,
        }
    }
}

/// Enumerates the `k`-subsets of `items` in colexicographic order.
fn subsets_colex(items: &[VertexId], k: usize) -> ColexSubsets<'_> {
    ColexSubsets {
        items,
        idx: (0..k).collect(),
        done: k > items.len(),
    }
}

struct ColexSubsets<'a> {
    items: &'a [VertexId],
    idx: Vec<usize>,
    done: bool,
}

impl Iterator for ColexSubsets<'_> {
    type Item = BTreeSet<VertexId>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let out: BTreeSet<VertexId> = self.idx.iter().map(|&i| self.items[i]).collect();
        // Colex successor: bump the smallest index that can move without
        // passing the next one; reset everything below it.
        let k = self.idx.len();
        if k == 0 {
            self.done = true;
            return Some(out);
        }
        let mut moved = false;
        for pos in 0..k {
            let limit = if pos + 1 < k {
                self.idx[pos + 1]
            } else {
                self.items.len()
            };
            if self.idx[pos] + 1 < limit {
                self.idx[pos] += 1;
                for (lower, slot) in self.idx.iter_mut().take(pos).enumerate() {
                    *slot = lower;
                }
                moved = true;
                break;
            }
        }
        if !moved {
            self.done = true;
        }
        Some(out)
    }
}

/// PC-style skeleton discovery: level-wise removal testing subsets of each
/// endpoint's adjacency set, recording one minimal separator per removed
/// pair, and emitting the unshielded-triple list.
pub fn pc_skeleton(
    ci: &dyn CiProvider,
    p_obs: usize,
    opts: &CciOptions,
) -> Result<DiscoveryState> {
    if p_obs < 2 {
        return Err(Error::invalid("need at least two observed variables"));
    }
    if ci.n_vars() < p_obs {
        return Err(Error::invalid("provider covers fewer variables"));
    }
    let mut state = DiscoveryState {
        graph: MixedGraph::complete_circles(p_obs),
        seps: SepStore::default(),
        triples: Vec::new(),
        log: Vec::new(),
    };
    let p = p_obs as VertexId;
    let mut level = 0usize;
    loop {
        for i in 0..p {
            for j in 0..p {
                if i == j || !state.graph.is_adjacent(i, j) {
                    continue;
                }
                let pool: Vec<VertexId> = state
                    .graph
                    .neighbors(i)
                    .iter()
                    .copied()
                    .filter(|&v| v != j)
                    .collect();
                if pool.len() < level {
                    continue;
                }
                for w in subsets_colex(&pool, level) {
                    if ci
                        .independent(i, j, &w)
                        .map_err(|e| Error::invalid(format!("CI query ({i},{j}|{w:?}): {e}")))?
                    {
                        state.graph.remove_edge(i, j);
                        let because = format!("sep({i},{j})={}", format_set(&w));
                        state.log_drop(1, "pc-skel", i, j, because);
                        state.seps.set_sep(i, j, w);
                        break;
                    }
                }
            }
        }
        // Stop once no adjacent ordered pair offers a larger pool.
        let exhausted = (0..p).all(|i| {
            state
                .graph
                .neighbors(i)
                .iter()
                .all(|_| state.graph.neighbors(i).len().saturating_sub(1) <= level)
        });
        if exhausted || level >= opts.cap(p_obs) {
            break;
        }
        level += 1;
    }
    state.triples = state.graph.unshielded_triples();
    Ok(state)
}

/// Orients every pending unshielded triple `(i, j, k)` with
/// `j not in Sep(i, k)` as a v-structure (arrowheads at `j`).
pub fn orient_v_structures(state: &mut DiscoveryState, step: u8) -> Result<()> {
    let triples = state.triples.clone();
    for (i, j, k) in triples {
        if !state.graph.is_adjacent(i, j)
            || !state.graph.is_adjacent(j, k)
            || state.graph.is_adjacent(i, k)
        {
            continue;
        }
        let Some(sep) = state.seps.sep(i, k) else {
            continue;
        };
        if sep.contains(&j) {
            continue;
        }
        let because = format!("sep({i},{k})={}", format_set(sep));
        state.orient(step, "vstruc", i, j, j, EndpointMark::Arrow, because.clone())?;
        state.orient(step, "vstruc", j, k, j, EndpointMark::Arrow, because)?;
    }
    Ok(())
}

/// Possible-d-separating set of `oi`: vertices reachable by a path whose
/// every internal triple is a collider (both marks at the middle are
/// arrowheads) or a triangle.
pub fn pd_sep(graph: &MixedGraph, oi: VertexId) -> BTreeSet<VertexId> {
    let mut reached = BTreeSet::new();
    let mut seen: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    let mut stack: Vec<(VertexId, VertexId)> = Vec::new();
    for &w in graph.neighbors(oi) {
        reached.insert(w);
        seen.insert((oi, w));
        stack.push((oi, w));
    }
    while let Some((prev, cur)) = stack.pop() {
        for &next in graph.neighbors(cur) {
            if next == prev || next == oi || seen.contains(&(cur, next)) {
                continue;
            }
            let collider = graph.mark_at(prev, cur, cur) == Some(EndpointMark::Arrow)
                && graph.mark_at(cur, next, cur) == Some(EndpointMark::Arrow);
            if collider || graph.is_triangle(prev, cur, next) {
                seen.insert((cur, next));
                reached.insert(next);
                stack.push((cur, next));
            }
        }
    }
    reached
}

/// Re-tests every adjacency against growing subsets of the endpoint's
/// possible-d-separating set, then resets all marks to circles and rebuilds
/// the unshielded-triple list.
pub fn fci_final_skeleton(
    state: &mut DiscoveryState,
    ci: &dyn CiProvider,
    opts: &CciOptions,
) -> Result<()> {
    let p = state.graph.p() as VertexId;
    for i in 0..p {
        let pds = pd_sep(&state.graph, i);
        let neighbors: Vec<VertexId> = state.graph.neighbors(i).iter().copied().collect();
        for j in neighbors {
            if !state.graph.is_adjacent(i, j) {
                continue;
            }
            let pool: Vec<VertexId> = pds.iter().copied().filter(|&v| v != j).collect();
            let max_level = opts.cap(pool.len());
            'levels: for level in 0..=max_level {
                for w in subsets_colex(&pool, level) {
                    if ci.independent(i, j, &w)? {
                        state.graph.remove_edge(i, j);
                        let because = format!("sep({i},{j})={}", format_set(&w));
                        state.log_drop(1, "fci-final", i, j, because);
                        state.seps.set_sep(i, j, w);
                        break 'levels;
                    }
                }
            }
        }
    }
    state.graph.reset_all_marks_to_circles();
    state.log.push(TraceEvent {
        step: 1,
        rule: "reorient".to_string(),
        edge: None,
        action: TraceAction::ReorientAll,
        because: "final-skeleton".to_string(),
    });
    state.triples = state.graph.unshielded_triples();
    Ok(())
}

/// Step 3: for stored separators `Sep(i, j)` and path triples `<i, k, j>`
/// (`k` adjacent to both ends, circle at `k` toward `i`), a vertex `k`
/// outside the separator that stays dependent on both `i` and `j` given it
/// cannot be an ancestor of either: orient an arrowhead at `k` on `(k, i)`.
pub fn orient_long_range_nonancestral(
    state: &mut DiscoveryState,
    ci: &dyn CiProvider,
) -> Result<()> {
    let pairs: Vec<((VertexId, VertexId), BTreeSet<VertexId>)> = state
        .seps
        .iter_sep()
        .map(|(&(a, b), w)| ((a, b), w.clone()))
        .collect();
    let p = state.graph.p() as VertexId;
    for ((a, b), sep) in pairs {
        for (i, j) in [(a, b), (b, a)] {
            for k in 0..p {
                if k == i
                    || k == j
                    || sep.contains(&k)
                    || !state.graph.is_adjacent(k, i)
                    || !state.graph.is_adjacent(k, j)
                    || state.graph.mark_at(k, i, k) != Some(EndpointMark::Circle)
                {
                    continue;
                }
                if !ci.independent(i, k, &sep)? && !ci.independent(j, k, &sep)? {
                    let because =
                        format!("dep({i},{k}|{s})&dep({j},{k}|{s})", s = format_set(&sep));
                    state.orient(3, "long-range-v", k, i, k, EndpointMark::Arrow, because)?;
                }
            }
        }
    }
    Ok(())
}

/// Ordered v-structure triples `(i, j, k)`: arrowheads at `j` from both
/// sides, endpoints non-adjacent.
fn ordered_v_structures(graph: &MixedGraph) -> Vec<(VertexId, VertexId, VertexId)> {
    let mut out = Vec::new();
    let p = graph.p() as VertexId;
    for j in 0..p {
        let nbrs: Vec<VertexId> = graph.neighbors(j).iter().copied().collect();
        for &i in &nbrs {
            for &k in &nbrs {
                if i == k || graph.is_adjacent(i, k) {
                    continue;
                }
                if graph.mark_at(i, j, j) == Some(EndpointMark::Arrow)
                    && graph.mark_at(k, j, j) == Some(EndpointMark::Arrow)
                {
                    out.push((i, j, k));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Step 4: for each ordered v-structure `<i, j, k>`, search supersets
/// `T = W u Sep(i, k) u {j}` with `W` drawn from `PD-SEP(i)` in increasing
/// size; record the first `T` that separates `i` and `k`.
pub fn discover_sup_seps(
    state: &mut DiscoveryState,
    ci: &dyn CiProvider,
    opts: &CciOptions,
) -> Result<()> {
    let vstructs = ordered_v_structures(&state.graph);
    let mut pds_cache: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
    for (i, j, k) in vstructs {
        if state.seps.supsep(i, j, k).is_some() {
            continue;
        }
        let Some(sep_ik) = state.seps.sep(i, k).cloned() else {
            continue;
        };
        let pds = pds_cache
            .entry(i)
            .or_insert_with(|| pd_sep(&state.graph, i))
            .clone();
        let pool: Vec<VertexId> = pds
            .iter()
            .copied()
            .filter(|v| !sep_ik.contains(v) && *v != j && *v != k)
            .collect();
        let max_size = opts.cap(pool.len());
        'sizes: for m in 0..=max_size {
            for w in subsets_colex(&pool, m) {
                let mut t: BTreeSet<VertexId> = w;
                t.extend(sep_ik.iter().copied());
                t.insert(j);
                if ci.independent(i, k, &t)? {
                    state.log.push(TraceEvent {
                        step: 4,
                        rule: "supsep".to_string(),
                        edge: Some((i.min(k), i.max(k))),
                        action: TraceAction::RecordSet,
                        because: format!("supsep({i},{j},{k})={}", format_set(&t)),
                    });
                    state.seps.set_supsep(i, j, k, t);
                    break 'sizes;
                }
            }
        }
    }
    Ok(())
}

/// Step 5: quadruples `<i, j, k, l>` with `i, k` non-adjacent and arrowheads
/// at `l` from both. When `j` sits in the minimal separator of `(i, k)` and
/// `l` does not, the circle at `l` on `(j, l)` becomes an arrowhead; when
/// `<i, j, k>` is itself a v-structure and `l` sits in `SupSep(i, j, k)`,
/// it becomes a tail.
pub fn orient_with_sup_seps(state: &mut DiscoveryState) -> Result<()> {
    let p = state.graph.p() as VertexId;
    for l in 0..p {
        let nbrs: Vec<VertexId> = state.graph.neighbors(l).iter().copied().collect();
        for &i in &nbrs {
            for &k in &nbrs {
                if i == k || state.graph.is_adjacent(i, k) {
                    continue;
                }
                if state.graph.mark_at(i, l, l) != Some(EndpointMark::Arrow)
                    || state.graph.mark_at(k, l, l) != Some(EndpointMark::Arrow)
                {
                    continue;
                }
                // Minimal separator: j in Sep(i,k), l outside it.
                if let Some(w) = state.seps.sep(i, k).cloned() {
                    if !w.contains(&l) {
                        for &j in &w {
                            if j != l
                                && state.graph.mark_at(j, l, l) == Some(EndpointMark::Circle)
                            {
                                let because = format!(
                                    "{j} in sep({i},{k})={}, {l} outside",
                                    format_set(&w)
                                );
                                state.orient(
                                    5,
                                    "supsep-arrow",
                                    j,
                                    l,
                                    l,
                                    EndpointMark::Arrow,
                                    because,
                                )?;
                            }
                        }
                    }
                }
                // Non-minimal separator at a sibling v-structure collider j.
                for j in 0..p {
                    if j == i || j == k || j == l {
                        continue;
                    }
                    if state.graph.mark_at(i, j, j) != Some(EndpointMark::Arrow)
                        || state.graph.mark_at(k, j, j) != Some(EndpointMark::Arrow)
                    {
                        continue;
                    }
                    let Some(t) = state.seps.supsep(i, j, k).cloned() else {
                        continue;
                    };
                    if t.contains(&l)
                        && state.graph.mark_at(j, l, l) == Some(EndpointMark::Circle)
                    {
                        let because =
                            format!("{l} in supsep({i},{j},{k})={}", format_set(&t));
                        state.orient(5, "supsep-tail", j, l, l, EndpointMark::Tail, because)?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Step 6: for every recorded separator `W` of a pair `(i, k)` and every
/// `j in W`, a vertex `l` whose addition to `W` re-connects `i` and `k`
/// cannot be an ancestor of `j`: orient an arrowhead at `l` on `(l, j)`.
pub fn orient_long_range_ancestral(
    state: &mut DiscoveryState,
    ci: &dyn CiProvider,
) -> Result<()> {
    let mut records: Vec<(VertexId, VertexId, BTreeSet<VertexId>)> = Vec::new();
    for (&(a, b), w) in state.seps.iter_sep() {
        records.push((a, b, w.clone()));
    }
    for (&(i, _j, k), t) in state.seps.iter_supsep() {
        records.push((i, k, t.clone()));
    }
    let p = state.graph.p() as VertexId;
    for (i, k, w) in records {
        for &j in &w {
            for l in 0..p {
                if l == i || l == k || l == j || w.contains(&l) {
                    continue;
                }
                if state.graph.mark_at(l, j, l) != Some(EndpointMark::Circle) {
                    continue;
                }
                let mut probe = w.clone();
                probe.insert(l);
                if !ci.independent(i, k, &probe)? {
                    let because = format!(
                        "dep({i},{k}|{}) though indep given {}",
                        format_set(&probe),
                        format_set(&w)
                    );
                    state.orient(6, "long-range-anc", l, j, l, EndpointMark::Arrow, because)?;
                }
            }
        }
    }
    Ok(())
}

/// Runs the full seven-step discovery.
pub fn cci_run(
    ci: &dyn CiProvider,
    p_obs: usize,
    opts: &CciOptions,
) -> Result<DiscoveryState> {
    let mut state = pc_skeleton(ci, p_obs, opts)?;
    orient_v_structures(&mut state, 1)?;
    fci_final_skeleton(&mut state, ci, opts)?;
    orient_v_structures(&mut state, 2)?;
    orient_long_range_nonancestral(&mut state, ci)?;
    discover_sup_seps(&mut state, ci, opts)?;
    orient_with_sup_seps(&mut state)?;
    orient_long_range_ancestral(&mut state, ci)?;
    apply_orientation_rules(&mut state)?;
    Ok(state)
}
