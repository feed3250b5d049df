//! Orientation rules 1-7, applied to a fixpoint.
//!
//! Central notion: an edge `(p, q)` is *potentially 2-triangulated* w.r.t. a
//! target `t` when a witness `d` completes a triangle with `p` and `q` such
//! that `(q, d)` carries no arrowhead, the mark at `d` on `(p, d)` is an
//! arrowhead or circle, and a potentially undirected path joins `d` to `t`
//! without passing `q`. The condition marks exactly the triangle structure a
//! cycle can hide in, and blocks the arrowhead-propagating halves of the
//! rules.

use std::collections::BTreeSet;

use crate::graph::{EndpointMark, MixedGraph, VertexId};
use crate::Result;

use super::DiscoveryState;

use EndpointMark::{Arrow, Circle, Tail};

/// Witnesses `d` making edge `(p, q)` potentially 2-triangulated w.r.t. `t`.
pub fn potential_2_triangulation_witnesses(
    graph: &MixedGraph,
    p: VertexId,
    q: VertexId,
    t: VertexId,
) -> Vec<VertexId> {
    let mut out = Vec::new();
    if t == p || t == q || !graph.is_adjacent(p, q) {
        return out;
    }
    let excluded = BTreeSet::from([q]);
    for &d in graph.neighbors(p) {
        if d == q || d == t || !graph.is_adjacent(d, q) {
            continue;
        }
        if !graph.edge_arrow_free(q, d) {
            continue;
        }
        if graph.mark_at(p, d, d) == Some(Tail) {
            continue;
        }
        if !graph.potentially_undirected_path_exists(d, t, &excluded) {
            continue;
        }
        out.push(d);
    }
    out
}

/// Whether edge `(p, q)` is potentially 2-triangulated w.r.t. `t`.
pub fn is_potentially_2_triangulated(
    graph: &MixedGraph,
    p: VertexId,
    q: VertexId,
    t: VertexId,
) -> bool {
    !potential_2_triangulation_witnesses(graph, p, q, t).is_empty()
}

/// Rule 1: `i *-> j o-* k` with `i, k` non-adjacent puts a tail at `j`
/// toward `k`; if additionally `(i, j)` is not potentially 2-triangulated
/// w.r.t. `k`, the far endpoint becomes an arrowhead.
fn rule1(state: &mut DiscoveryState) -> Result<bool> {
    let mut changed = false;
    let p = state.graph.p() as VertexId;
    for i in 0..p {
        let js: Vec<VertexId> = state.graph.neighbors(i).iter().copied().collect();
        for j in js {
            if state.graph.mark_at(i, j, j) != Some(Arrow) {
                continue;
            }
            let ks: Vec<VertexId> = state.graph.neighbors(j).iter().copied().collect();
            for k in ks {
                if k == i || state.graph.is_adjacent(i, k) {
                    continue;
                }
                if state.graph.mark_at(j, k, j) == Some(Circle) {
                    changed |= state.orient(
                        7,
                        "r1",
                        j,
                        k,
                        j,
                        Tail,
                        format!("{i}*>{j} and {i},{k} non-adjacent"),
                    )?;
                }
                if state.graph.mark_at(j, k, j) == Some(Tail)
                    && state.graph.mark_at(j, k, k) == Some(Circle)
                    && !is_potentially_2_triangulated(&state.graph, i, j, k)
                {
                    changed |= state.orient(
                        7,
                        "r1",
                        j,
                        k,
                        k,
                        Arrow,
                        format!("({i},{j}) not 2-triangulated wrt {k}"),
                    )?;
                }
            }
        }
    }
    Ok(changed)
}

/// Rule 2: `i -* j o-* k` with `i, k` non-adjacent and `(j, k)` not
/// potentially 2-triangulated w.r.t. `i` puts a tail at `j` toward `k`.
fn rule2(state: &mut DiscoveryState) -> Result<bool> {
    let mut changed = false;
    let p = state.graph.p() as VertexId;
    for i in 0..p {
        let js: Vec<VertexId> = state.graph.neighbors(i).iter().copied().collect();
        for j in js {
            if state.graph.mark_at(i, j, i) != Some(Tail) {
                continue;
            }
            let ks: Vec<VertexId> = state.graph.neighbors(j).iter().copied().collect();
            for k in ks {
                if k == i
                    || state.graph.is_adjacent(i, k)
                    || state.graph.mark_at(j, k, j) != Some(Circle)
                {
                    continue;
                }
                if !is_potentially_2_triangulated(&state.graph, j, k, i) {
                    changed |= state.orient(
                        7,
                        "r2",
                        j,
                        k,
                        j,
                        Tail,
                        format!("{i}-*{j}, ({j},{k}) not 2-triangulated wrt {i}"),
                    )?;
                }
            }
        }
    }
    Ok(changed)
}

/// Rule 3: `i *-> j - k` (undirected `j - k`), `i, k` non-adjacent, and the
/// potential 2-triangulation of `(i, j)` w.r.t. `k` holds through a unique
/// witness `l`: orient `(i, l)` into `l`, put tails on `(j, l)`, and when a
/// unique potentially undirected path joins `l` to `k` (avoiding `j`), turn
/// all its circles into tails.
fn rule3(state: &mut DiscoveryState) -> Result<bool> {
    let mut changed = false;
    let p = state.graph.p() as VertexId;
    for i in 0..p {
        let js: Vec<VertexId> = state.graph.neighbors(i).iter().copied().collect();
        for j in js {
            if state.graph.mark_at(i, j, j) != Some(Arrow) {
                continue;
            }
            let ks: Vec<VertexId> = state.graph.neighbors(j).iter().copied().collect();
            for k in ks {
                if k == i
                    || state.graph.is_adjacent(i, k)
                    || state.graph.marks(j, k) != Some((Tail, Tail))
                {
                    continue;
                }
                let witnesses =
                    potential_2_triangulation_witnesses(&state.graph, i, j, k);
                if witnesses.len() != 1 {
                    continue;
                }
                let l = witnesses[0];
                let because = format!("unique 2-triangulation witness {l} for ({i},{j}) wrt {k}");
                if state.graph.mark_at(i, l, l) == Some(Circle) {
                    changed |= state.orient(7, "r3", i, l, l, Arrow, because.clone())?;
                }
                if state.graph.mark_at(j, l, j) == Some(Circle) {
                    changed |= state.orient(7, "r3", j, l, j, Tail, because.clone())?;
                }
                if state.graph.mark_at(j, l, l) == Some(Circle) {
                    changed |= state.orient(7, "r3", j, l, l, Tail, because.clone())?;
                }
                let paths = state.graph.potentially_undirected_paths(
                    l,
                    k,
                    &BTreeSet::from([j]),
                    2,
                );
                if paths.len() == 1 {
                    let path = &paths[0];
                    for step in path.windows(2) {
                        let (u, v) = (step[0], step[1]);
                        let because =
                            format!("unique undirected route {l}~{k} avoiding {j}");
                        if state.graph.mark_at(u, v, u) == Some(Circle) {
                            changed |= state.orient(7, "r3", u, v, u, Tail, because.clone())?;
                        }
                        if state.graph.mark_at(u, v, v) == Some(Circle) {
                            changed |= state.orient(7, "r3", u, v, v, Tail, because)?;
                        }
                    }
                }
            }
        }
    }
    Ok(changed)
}

/// Rule 4: with `i *-> j`, a chain `j, v2, ..., i` whose links all carry a
/// tail at the earlier vertex except exactly one circle (not on the first
/// link) forces that circle into an arrowhead: were it a tail, `j` would be
/// an ancestor of `i` by tail transitivity, contradicting the arrowhead.
fn rule4(state: &mut DiscoveryState) -> Result<bool> {
    let mut changed = false;
    let p = state.graph.p() as VertexId;
    for i in 0..p {
        let js: Vec<VertexId> = state.graph.neighbors(i).iter().copied().collect();
        for j in js {
            if state.graph.mark_at(i, j, j) != Some(Arrow) {
                continue;
            }
            let mut fires: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
            let mut on_path = BTreeSet::from([j]);
            rule4_dfs(&state.graph, j, i, j, None, &mut on_path, &mut fires);
            for (u, v) in fires {
                changed |= state.orient(
                    7,
                    "r4",
                    u,
                    v,
                    u,
                    Arrow,
                    format!("tail chain {j}~{i} against {i}*>{j}"),
                )?;
            }
        }
    }
    Ok(changed)
}

/// Enumerates tail chains from `start` (= the arrowhead vertex `j`) to
/// `target` (= `i`) and records each admissible circle position.
fn rule4_dfs(
    graph: &MixedGraph,
    cur: VertexId,
    target: VertexId,
    start: VertexId,
    circle: Option<(VertexId, VertexId)>,
    on_path: &mut BTreeSet<VertexId>,
    fires: &mut BTreeSet<(VertexId, VertexId)>,
) {
    let nbrs: Vec<VertexId> = graph.neighbors(cur).iter().copied().collect();
    for next in nbrs {
        if on_path.contains(&next) {
            continue;
        }
        let mark = graph.mark_at(cur, next, cur);
        let link_circle = match mark {
            Some(Tail) => None,
            // The first link out of `start` must be a tail.
            Some(Circle) if circle.is_none() && cur != start => Some((cur, next)),
            _ => continue,
        };
        let circle_after = circle.or(link_circle);
        if next == target {
            // Chain needs at least two links and exactly one circle.
            if on_path.len() >= 2 {
                if let Some(pos) = circle_after {
                    fires.insert(pos);
                }
            }
            continue;
        }
        on_path.insert(next);
        rule4_dfs(graph, next, target, start, circle_after, on_path, fires);
        on_path.remove(&next);
    }
}

/// Rule 5: a chain of tail-marked links from `a` to `b` plus an edge
/// `a o-* b` makes `a` an ancestor of `b`: the circle at `a` becomes a tail.
fn rule5(state: &mut DiscoveryState) -> Result<bool> {
    let mut changed = false;
    let edges: Vec<(VertexId, VertexId)> = state.graph.edges().collect();
    for (x, y) in edges {
        for (a, b) in [(x, y), (y, x)] {
            if state.graph.mark_at(a, b, a) != Some(Circle) {
                continue;
            }
            let mut on_path = BTreeSet::from([a]);
            if tail_chain_exists(&state.graph, a, b, &mut on_path) {
                changed |= state.orient(
                    7,
                    "r5",
                    a,
                    b,
                    a,
                    Tail,
                    format!("tail chain {a}~{b}"),
                )?;
            }
        }
    }
    Ok(changed)
}

/// Whether a simple chain of at least two links joins `a` to `b`, each link
/// carrying a tail at its earlier vertex.
fn tail_chain_exists(
    graph: &MixedGraph,
    cur: VertexId,
    target: VertexId,
    on_path: &mut BTreeSet<VertexId>,
) -> bool {
    let nbrs: Vec<VertexId> = graph.neighbors(cur).iter().copied().collect();
    for next in nbrs {
        if on_path.contains(&next) || graph.mark_at(cur, next, cur) != Some(Tail) {
            continue;
        }
        if next == target {
            if on_path.len() >= 2 {
                return true;
            }
            continue;
        }
        on_path.insert(next);
        if tail_chain_exists(graph, next, target, on_path) {
            on_path.remove(&next);
            return true;
        }
        on_path.remove(&next);
    }
    false
}

/// Checks a prospective path triple `(u, v, w)` for the non-potentially-
/// 2-triangulated path conditions that do not depend on later vertices:
/// outer pair non-adjacent and `v` not a collider on the triple.
fn path_triple_ok(graph: &MixedGraph, u: VertexId, v: VertexId, w: VertexId) -> bool {
    if graph.is_adjacent(u, w) {
        return false;
    }
    !(graph.mark_at(u, v, v) == Some(Arrow) && graph.mark_at(v, w, v) == Some(Arrow))
}

/// DFS for a non-potentially-2-triangulated path from the fixed prefix to
/// `target` with at least `min_len` vertices, avoiding `forbidden`.
///
/// The edge-level condition `(v_h, v_{h+1})` not potentially 2-triangulated
/// w.r.t. `v_{h+2}` applies to every triple except the final one, so it is
/// checked for the previously-last triple whenever the path grows.
fn non_p2t_path_dfs(
    graph: &MixedGraph,
    path: &mut Vec<VertexId>,
    on_path: &mut BTreeSet<VertexId>,
    target: VertexId,
    min_len: usize,
    forbidden: &BTreeSet<VertexId>,
) -> bool {
    let cur = *path.last().expect("non-empty path");
    let nbrs: Vec<VertexId> = graph.neighbors(cur).iter().copied().collect();
    for next in nbrs {
        if on_path.contains(&next) || forbidden.contains(&next) {
            continue;
        }
        let n = path.len();
        if n >= 2 {
            // New last triple (path[n-2], cur, next).
            if !path_triple_ok(graph, path[n - 2], cur, next) {
                continue;
            }
        }
        if n >= 3 {
            // The previously-last triple stops being final: its edge-level
            // condition must now hold.
            if is_potentially_2_triangulated(graph, path[n - 3], path[n - 2], cur) {
                continue;
            }
        }
        if next == target {
            if n + 1 >= min_len {
                return true;
            }
            continue;
        }
        path.push(next);
        on_path.insert(next);
        let found = non_p2t_path_dfs(graph, path, on_path, target, min_len, forbidden);
        path.pop();
        on_path.remove(&next);
        if found {
            return true;
        }
    }
    false
}

/// Whether a non-potentially-2-triangulated path `<from, second, ..., to>`
/// with at least `min_len` vertices exists, avoiding `forbidden`.
fn non_p2t_path_exists(
    graph: &MixedGraph,
    from: VertexId,
    second: VertexId,
    to: VertexId,
    min_len: usize,
    forbidden: &BTreeSet<VertexId>,
) -> bool {
    if !graph.is_adjacent(from, second) || forbidden.contains(&second) {
        return false;
    }
    if second == to {
        return min_len <= 2;
    }
    let mut path = vec![from, second];
    let mut on_path = BTreeSet::from([from, second]);
    non_p2t_path_dfs(graph, &mut path, &mut on_path, to, min_len, forbidden)
}

/// Rule 6: `k *-o i` with a non-potentially-2-triangulated path
/// `<i, j, l, ..., k>`, the `(k, i)` edge not potentially 2-triangulated
/// w.r.t. `j`, and `<j, i, k>` an unshielded non-collider: tail at `i`.
fn rule6(state: &mut DiscoveryState) -> Result<bool> {
    let mut changed = false;
    let edges: Vec<(VertexId, VertexId)> = state.graph.edges().collect();
    for (x, y) in edges {
        for (k, i) in [(x, y), (y, x)] {
            if state.graph.mark_at(k, i, i) != Some(Circle) {
                continue;
            }
            let js: Vec<VertexId> = state.graph.neighbors(i).iter().copied().collect();
            for j in js {
                if j == k || state.graph.is_adjacent(j, k) {
                    continue;
                }
                if state.graph.mark_at(i, j, i) == Some(Arrow)
                    && state.graph.mark_at(i, k, i) == Some(Arrow)
                {
                    continue;
                }
                if is_potentially_2_triangulated(&state.graph, k, i, j) {
                    continue;
                }
                if non_p2t_path_exists(&state.graph, i, j, k, 4, &BTreeSet::new()) {
                    changed |= state.orient(
                        7,
                        "r6",
                        k,
                        i,
                        i,
                        Tail,
                        format!("non-2-triangulated route {i}~{k} via {j}"),
                    )?;
                    break;
                }
            }
        }
    }
    Ok(changed)
}

/// Second vertices of non-potentially-2-triangulated paths from `from` to
/// `to` avoiding `forbidden` (direct edges allowed).
fn non_p2t_second_vertices(
    graph: &MixedGraph,
    from: VertexId,
    to: VertexId,
    forbidden: &BTreeSet<VertexId>,
) -> BTreeSet<VertexId> {
    let mut out = BTreeSet::new();
    for &second in graph.neighbors(from) {
        if non_p2t_path_exists(graph, from, second, to, 2, forbidden) {
            out.insert(second);
        }
    }
    out
}

/// Rule 7: `i o-* k` flanked by tails `j -* k *- l`, with non-potentially-
/// 2-triangulated paths from `i` to `j` and from `i` to `l` (avoiding `k`)
/// whose entry vertices `m`, `n` form an unshielded non-collider at `i` and
/// leave `(k, i)` not potentially 2-triangulated: tail at `i`.
fn rule7(state: &mut DiscoveryState) -> Result<bool> {
    let mut changed = false;
    let edges: Vec<(VertexId, VertexId)> = state.graph.edges().collect();
    'edges: for (x, y) in edges {
        for (i, k) in [(x, y), (y, x)] {
            if state.graph.mark_at(i, k, i) != Some(Circle) {
                continue;
            }
            let tails: Vec<VertexId> = state
                .graph
                .neighbors(k)
                .iter()
                .copied()
                .filter(|&v| v != i && state.graph.mark_at(v, k, v) == Some(Tail))
                .collect();
            if tails.len() < 2 {
                continue;
            }
            let forbidden = BTreeSet::from([k]);
            for &j in &tails {
                let seconds_j = non_p2t_second_vertices(&state.graph, i, j, &forbidden);
                if seconds_j.is_empty() {
                    continue;
                }
                for &l in &tails {
                    if l == j {
                        continue;
                    }
                    let seconds_l = non_p2t_second_vertices(&state.graph, i, l, &forbidden);
                    for &m in &seconds_j {
                        for &n in &seconds_l {
                            if m == n
                                || state.graph.is_adjacent(m, n)
                                || (state.graph.mark_at(m, i, i) == Some(Arrow)
                                    && state.graph.mark_at(n, i, i) == Some(Arrow))
                            {
                                continue;
                            }
                            if is_potentially_2_triangulated(&state.graph, k, i, m)
                                || is_potentially_2_triangulated(&state.graph, k, i, n)
                            {
                                continue;
                            }
                            changed |= state.orient(
                                7,
                                "r7",
                                i,
                                k,
                                i,
                                Tail,
                                format!("routes {i}~{j} and {i}~{l} via {m},{n}"),
                            )?;
                            continue 'edges;
                        }
                    }
                }
            }
        }
    }
    Ok(changed)
}

/// Applies rules 1-7 in order, repeatedly, until none changes a mark.
pub fn apply_orientation_rules(state: &mut DiscoveryState) -> Result<()> {
    loop {
        let mut changed = false;
        changed |= rule1(state)?;
        changed |= rule2(state)?;
        changed |= rule3(state)?;
        changed |= rule4(state)?;
        changed |= rule5(state)?;
        changed |= rule6(state)?;
        changed |= rule7(state)?;
        if !changed {
            return Ok(());
        }
    }
}
