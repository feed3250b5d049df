//! Directed systems and partially oriented mixed graphs.
//!
//! A [`DirectedSystem`] is a directed graph without self-loops (cycles are
//! allowed) whose vertices are partitioned into observed, latent and
//! selection classes, optionally carrying a linear coefficient matrix `B`
//! with `B[j][i] != 0` exactly when the edge `i -> j` is present.
//!
//! A [`MixedGraph`] holds at most one edge per unordered vertex pair, with an
//! endpoint mark (tail, arrowhead or circle) at each end.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Error;
use crate::Result;

/// Dense vertex index, stable within one graph.
pub type VertexId = u32;

/// Class of a vertex in a directed system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexClass {
    Observed,
    Latent,
    Selection,
}

impl VertexClass {
    pub fn letter(self) -> char {
        match self {
            VertexClass::Observed => 'O',
            VertexClass::Latent => 'L',
            VertexClass::Selection => 'S',
        }
    }
}

/// Endpoint mark of a mixed-graph edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EndpointMark {
    Tail,
    Arrow,
    Circle,
}

impl EndpointMark {
    pub fn symbol(self) -> char {
        match self {
            EndpointMark::Tail => '-',
            EndpointMark::Arrow => '>',
            EndpointMark::Circle => 'o',
        }
    }

    pub fn from_symbol(c: &str) -> Option<Self> {
        match c {
            "-" => Some(EndpointMark::Tail),
            ">" => Some(EndpointMark::Arrow),
            "o" => Some(EndpointMark::Circle),
            _ => None,
        }
    }
}

/// A directed graph over `0..p` without self-loops, with a vertex partition
/// and an optional linear coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedSystem {
    p: usize,
    children: Vec<BTreeSet<VertexId>>,
    parents: Vec<BTreeSet<VertexId>>,
    labels: Vec<VertexClass>,
    /// Row-major `p x p`; `coeffs[j * p + i]` is the coefficient on `i -> j`.
    coeffs: Option<Vec<f64>>,
}

impl DirectedSystem {
    /// Builds a system from an edge list. Every vertex defaults to observed.
    pub fn new(p: usize, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut g = DirectedSystem {
            p,
            children: vec![BTreeSet::new(); p],
            parents: vec![BTreeSet::new(); p],
            labels: vec![VertexClass::Observed; p],
            coeffs: None,
        };
        for &(i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, i: VertexId, j: VertexId) -> Result<()> {
        self.check_vertex(i)?;
        self.check_vertex(j)?;
        if i == j {
            return Err(Error::invalid(format!("self-loop at vertex {i}")));
        }
        self.children[i as usize].insert(j);
        self.parents[j as usize].insert(i);
        Ok(())
    }

    pub fn set_labels(&mut self, labels: Vec<VertexClass>) -> Result<()> {
        if labels.len() != self.p {
            return Err(Error::invalid(format!(
                "expected {} labels, got {}",
                self.p,
                labels.len()
            )));
        }
        self.labels = labels;
        Ok(())
    }

    pub fn set_label(&mut self, v: VertexId, class: VertexClass) -> Result<()> {
        self.check_vertex(v)?;
        self.labels[v as usize] = class;
        Ok(())
    }

    /// Attaches a coefficient matrix; its support must match the edge set.
    pub fn set_coeffs(&mut self, coeffs: Vec<f64>) -> Result<()> {
        if coeffs.len() != self.p * self.p {
            return Err(Error::invalid("coefficient matrix has wrong size"));
        }
        for j in 0..self.p {
            for i in 0..self.p {
                let nonzero = coeffs[j * self.p + i] != 0.0;
                let edge = self.has_edge(i as VertexId, j as VertexId);
                if nonzero != edge {
                    return Err(Error::invalid(format!(
                        "coefficient support mismatch at ({i},{j})"
                    )));
                }
            }
        }
        self.coeffs = Some(coeffs);
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn has_edge(&self, i: VertexId, j: VertexId) -> bool {
        (i as usize) < self.p && self.children[i as usize].contains(&j)
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(i, cs)| cs.iter().map(move |&j| (i as VertexId, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(|c| c.len()).sum()
    }

    pub fn children_of(&self, v: VertexId) -> &BTreeSet<VertexId> {
        &self.children[v as usize]
    }

    pub fn parents_of(&self, v: VertexId) -> &BTreeSet<VertexId> {
        &self.parents[v as usize]
    }

    pub fn label(&self, v: VertexId) -> VertexClass {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[VertexClass] {
        &self.labels
    }

    pub fn coeffs(&self) -> Option<&[f64]> {
        self.coeffs.as_deref()
    }

    /// Coefficient on edge `i -> j` (zero when absent).
    pub fn coeff(&self, i: VertexId, j: VertexId) -> f64 {
        self.coeffs
            .as_ref()
            .map(|b| b[j as usize * self.p + i as usize])
            .unwrap_or(0.0)
    }

    /// Vertices of a given class, ascending.
    pub fn vertices_of_class(&self, class: VertexClass) -> Vec<VertexId> {
        (0..self.p as VertexId)
            .filter(|&v| self.labels[v as usize] == class)
            .collect()
    }

    pub fn observed(&self) -> Vec<VertexId> {
        self.vertices_of_class(VertexClass::Observed)
    }

    pub fn selection_set(&self) -> BTreeSet<VertexId> {
        self.vertices_of_class(VertexClass::Selection)
            .into_iter()
            .collect()
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if (v as usize) < self.p {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange(v, self.p))
        }
    }

    fn check_seed(&self, seed: &BTreeSet<VertexId>) -> Result<()> {
        for &v in seed {
            self.check_vertex(v)?;
        }
        Ok(())
    }

    /// All vertices with a directed path into some member of `seed`, plus the
    /// seed itself. Ancestry is reflexive and well defined under cycles.
    pub fn ancestors(&self, seed: &BTreeSet<VertexId>) -> Result<BTreeSet<VertexId>> {
        self.check_seed(seed)?;
        Ok(self.reach(seed, &self.parents))
    }

    /// Dual of [`DirectedSystem::ancestors`].
    pub fn descendants(&self, seed: &BTreeSet<VertexId>) -> Result<BTreeSet<VertexId>> {
        self.check_seed(seed)?;
        Ok(self.reach(seed, &self.children))
    }

    fn reach(&self, seed: &BTreeSet<VertexId>, step: &[BTreeSet<VertexId>]) -> BTreeSet<VertexId> {
        let mut out = seed.clone();
        let mut stack: Vec<VertexId> = seed.iter().copied().collect();
        while let Some(v) = stack.pop() {
            for &w in &step[v as usize] {
                if out.insert(w) {
                    stack.push(w);
                }
            }
        }
        out
    }

    /// Whether the graph contains a directed cycle.
    pub fn has_cycle(&self) -> bool {
        // Colors: 0 unvisited, 1 on stack, 2 done.
        let mut color = vec![0u8; self.p];
        for s in 0..self.p as VertexId {
            if color[s as usize] != 0 {
                continue;
            }
            // Iterative DFS with explicit stack of (vertex, child iterator index).
            let mut stack = vec![(s, Vec::from_iter(self.children[s as usize].iter().copied()), 0usize)];
            color[s as usize] = 1;
            while let Some((v, kids, idx)) = stack.last_mut() {
                if *idx >= kids.len() {
                    color[*v as usize] = 2;
                    stack.pop();
                    continue;
                }
                let w = kids[*idx];
                *idx += 1;
                match color[w as usize] {
                    0 => {
                        color[w as usize] = 1;
                        let kw = Vec::from_iter(self.children[w as usize].iter().copied());
                        stack.push((w, kw, 0));
                    }
                    1 => return true,
                    _ => {}
                }
            }
        }
        false
    }

    /// Graph with every edge reversed (labels kept, coefficients dropped).
    pub fn reversed(&self) -> DirectedSystem {
        let mut g = DirectedSystem {
            p: self.p,
            children: self.parents.clone(),
            parents: self.children.clone(),
            labels: self.labels.clone(),
            coeffs: None,
        };
        g.coeffs = None;
        g
    }
}

/// A partially oriented mixed graph over `0..p` observed vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedGraph {
    p: usize,
    /// Keyed by ordered pair `(min, max)`; value is `(mark at min, mark at max)`.
    marks: BTreeMap<(VertexId, VertexId), (EndpointMark, EndpointMark)>,
    adj: Vec<BTreeSet<VertexId>>,
}

impl MixedGraph {
    pub fn new(p: usize) -> Self {
        MixedGraph {
            p,
            marks: BTreeMap::new(),
            adj: vec![BTreeSet::new(); p],
        }
    }

    /// Complete graph with circle marks everywhere.
    pub fn complete_circles(p: usize) -> Self {
        let mut g = MixedGraph::new(p);
        for i in 0..p as VertexId {
            for j in (i + 1)..p as VertexId {
                g.add_edge(i, j, EndpointMark::Circle, EndpointMark::Circle)
                    .expect("in range");
            }
        }
        g
    }

    pub fn p(&self) -> usize {
        self.p
    }

    fn key(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
        if a < b {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn add_edge(
        &mut self,
        a: VertexId,
        b: VertexId,
        mark_a: EndpointMark,
        mark_b: EndpointMark,
    ) -> Result<()> {
        if (a as usize) >= self.p {
            return Err(Error::VertexOutOfRange(a, self.p));
        }
        if (b as usize) >= self.p {
            return Err(Error::VertexOutOfRange(b, self.p));
        }
        if a == b {
            return Err(Error::invalid(format!("self-loop at vertex {a}")));
        }
        let key = Self::key(a, b);
        let value = if a < b { (mark_a, mark_b) } else { (mark_b, mark_a) };
        if self.marks.insert(key, value).is_some() {
            return Err(Error::invalid(format!("duplicate edge ({a},{b})")));
        }
        self.adj[a as usize].insert(b);
        self.adj[b as usize].insert(a);
        Ok(())
    }

    pub fn remove_edge(&mut self, a: VertexId, b: VertexId) -> bool {
        let existed = self.marks.remove(&Self::key(a, b)).is_some();
        if existed {
            self.adj[a as usize].remove(&b);
            self.adj[b as usize].remove(&a);
        }
        existed
    }

    pub fn is_adjacent(&self, a: VertexId, b: VertexId) -> bool {
        self.marks.contains_key(&Self::key(a, b))
    }

    pub fn neighbors(&self, v: VertexId) -> &BTreeSet<VertexId> {
        &self.adj[v as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.marks.len()
    }

    /// Edges as ordered pairs `(min, max)`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.marks.keys().copied()
    }

    /// Marks of the edge `{a,b}` reported as `(mark at a, mark at b)`;
    /// symmetric in the query order.
    pub fn marks(&self, a: VertexId, b: VertexId) -> Option<(EndpointMark, EndpointMark)> {
        self.marks.get(&Self::key(a, b)).map(|&(m_lo, m_hi)| {
            if a < b {
                (m_lo, m_hi)
            } else {
                (m_hi, m_lo)
            }
        })
    }

    /// Mark at the `at` end of edge `{a,b}`.
    pub fn mark_at(&self, a: VertexId, b: VertexId, at: VertexId) -> Option<EndpointMark> {
        let (ma, mb) = self.marks(a, b)?;
        if at == a {
            Some(ma)
        } else if at == b {
            Some(mb)
        } else {
            None
        }
    }

    /// Sets the mark at the `at` end of edge `{a,b}`.
    ///
    /// Returns `Ok(true)` when the mark changed, `Ok(false)` on a no-op
    /// (already equal). Refines circles only: rewriting a tail as an
    /// arrowhead or vice versa is a contradiction error, as is reintroducing
    /// a circle.
    pub fn set_mark(
        &mut self,
        a: VertexId,
        b: VertexId,
        at: VertexId,
        mark: EndpointMark,
    ) -> Result<bool> {
        let key = Self::key(a, b);
        let other = if at == a { b } else { a };
        let entry = self
            .marks
            .get_mut(&key)
            .ok_or_else(|| Error::invalid(format!("no edge ({a},{b})")))?;
        let slot = if at == key.0 {
            &mut entry.0
        } else if at == key.1 {
            &mut entry.1
        } else {
            return Err(Error::invalid(format!("{at} is not an endpoint of ({a},{b})")));
        };
        if *slot == mark {
            return Ok(false);
        }
        if *slot != EndpointMark::Circle {
            return Err(Error::Contradiction(
                at,
                other,
                format!("{:?} already oriented, refusing {:?}", *slot, mark),
            ));
        }
        *slot = mark;
        Ok(true)
    }

    /// Resets every endpoint mark to a circle, keeping the adjacencies.
    pub fn reset_all_marks_to_circles(&mut self) {
        for v in self.marks.values_mut() {
            *v = (EndpointMark::Circle, EndpointMark::Circle);
        }
    }

    /// All `(i, j, k)` with `i ~ j`, `j ~ k` adjacent and `i, k` non-adjacent,
    /// with `i < k`, in lexicographic `(i, j, k)` order.
    pub fn unshielded_triples(&self) -> Vec<(VertexId, VertexId, VertexId)> {
        let mut out = Vec::new();
        for i in 0..self.p as VertexId {
            for j in 0..self.p as VertexId {
                if j == i || !self.is_adjacent(i, j) {
                    continue;
                }
                for &k in self.adj[j as usize].iter() {
                    if k > i && k != j && !self.is_adjacent(i, k) {
                        out.push((i, j, k));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Whether `{a, b, c}` are pairwise adjacent.
    pub fn is_triangle(&self, a: VertexId, b: VertexId, c: VertexId) -> bool {
        self.is_adjacent(a, b) && self.is_adjacent(b, c) && self.is_adjacent(a, c)
    }

    /// Whether an edge carries no arrowhead at either end.
    pub fn edge_arrow_free(&self, a: VertexId, b: VertexId) -> bool {
        matches!(
            self.marks(a, b),
            Some((ma, mb)) if ma != EndpointMark::Arrow && mb != EndpointMark::Arrow
        )
    }

    /// True iff a path from `a` to `b` avoiding `excluded` exists on which
    /// every endpoint mark of every edge is a tail or a circle.
    pub fn potentially_undirected_path_exists(
        &self,
        a: VertexId,
        b: VertexId,
        excluded: &BTreeSet<VertexId>,
    ) -> bool {
        if a == b || excluded.contains(&a) || excluded.contains(&b) {
            return false;
        }
        let mut seen = BTreeSet::new();
        seen.insert(a);
        let mut stack = vec![a];
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v as usize] {
                if excluded.contains(&w) || seen.contains(&w) || !self.edge_arrow_free(v, w) {
                    continue;
                }
                if w == b {
                    return true;
                }
                seen.insert(w);
                stack.push(w);
            }
        }
        false
    }

    /// Enumerates simple arrow-free paths from `a` to `b` avoiding `excluded`,
    /// stopping once `limit` paths have been found.
    pub fn potentially_undirected_paths(
        &self,
        a: VertexId,
        b: VertexId,
        excluded: &BTreeSet<VertexId>,
        limit: usize,
    ) -> Vec<Vec<VertexId>> {
        let mut out = Vec::new();
        if a == b || excluded.contains(&a) || excluded.contains(&b) || limit == 0 {
            return out;
        }
        let mut path = vec![a];
        let mut on_path: BTreeSet<VertexId> = BTreeSet::from([a]);
        self.pup_dfs(a, b, excluded, limit, &mut path, &mut on_path, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn pup_dfs(
        &self,
        v: VertexId,
        b: VertexId,
        excluded: &BTreeSet<VertexId>,
        limit: usize,
        path: &mut Vec<VertexId>,
        on_path: &mut BTreeSet<VertexId>,
        out: &mut Vec<Vec<VertexId>>,
    ) {
        if out.len() >= limit {
            return;
        }
        for &w in &self.adj[v as usize] {
            if out.len() >= limit {
                return;
            }
            if excluded.contains(&w) || on_path.contains(&w) || !self.edge_arrow_free(v, w) {
                continue;
            }
            if w == b {
                let mut full = path.clone();
                full.push(b);
                out.push(full);
                continue;
            }
            path.push(w);
            on_path.insert(w);
            self.pup_dfs(w, b, excluded, limit, path, on_path, out);
            path.pop();
            on_path.remove(&w);
        }
    }
}
