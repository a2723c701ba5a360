//! Hypergraphs, primal graphs, S-connectedness, exact treewidth, and
//! elimination orderings with a distinguished first edge.
//!
//! Treewidth is computed exactly as the minimum over elimination orderings of
//! the maximum lower degree, by dynamic programming over vertex subsets. The
//! instances arising from formulas are small (a handful of variables), so
//! exactness is cheap; a configurable vertex limit guards against misuse.

use std::collections::BTreeSet;
use std::fmt::Debug;

use crate::{Error, Result};

/// Default cap on vertex count for the exact treewidth search.
pub const DEFAULT_TREEWIDTH_LIMIT: usize = 20;

/// A hypergraph given by a vertex set and a set of edges (vertex subsets).
/// The empty edge is allowed and contributes no vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph<V: Ord + Clone> {
    vertices: BTreeSet<V>,
    edges: BTreeSet<BTreeSet<V>>,
}

/// A simple undirected graph; edges are stored as normalized pairs `(a, b)`
/// with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph<V: Ord + Clone> {
    vertices: BTreeSet<V>,
    edges: BTreeSet<(V, V)>,
}

/// An elimination ordering `((v1, ..., vn), E')`: `E'` extends the primal
/// edges so that any two distinct lower neighbors of a vertex are adjacent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationOrdering<V: Ord + Clone> {
    order: Vec<V>,
    fill: BTreeSet<(V, V)>,
}

fn norm_pair<V: Ord + Clone>(a: &V, b: &V) -> (V, V) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

impl<V: Ord + Clone + Debug> Hypergraph<V> {
    pub fn new(vertices: BTreeSet<V>, edges: BTreeSet<BTreeSet<V>>) -> Result<Self> {
        for e in &edges {
            for v in e {
                if !vertices.contains(v) {
                    return Err(Error::Precondition(format!(
                        "edge vertex {v:?} not in vertex set"
                    )));
                }
            }
        }
        Ok(Hypergraph { vertices, edges })
    }

    /// Builds a hypergraph from its edge set alone; the vertex set is the
    /// union of the edges.
    pub fn from_edges<I, E>(edges: I) -> Self
    where
        I: IntoIterator<Item = E>,
        E: IntoIterator<Item = V>,
    {
        let edges: BTreeSet<BTreeSet<V>> =
            edges.into_iter().map(|e| e.into_iter().collect()).collect();
        let vertices = edges.iter().flatten().cloned().collect();
        Hypergraph { vertices, edges }
    }

    pub fn vertices(&self) -> &BTreeSet<V> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<BTreeSet<V>> {
        &self.edges
    }

    /// The primal graph: each hyperedge completed into a clique.
    pub fn primal_graph(&self) -> Graph<V> {
        let mut g = Graph {
            vertices: self.vertices.clone(),
            edges: BTreeSet::new(),
        };
        for e in &self.edges {
            let elems: Vec<&V> = e.iter().collect();
            for i in 0..elems.len() {
                for j in i + 1..elems.len() {
                    g.edges.insert(norm_pair(elems[i], elems[j]));
                }
            }
        }
        g
    }

    /// S-connectedness: the auxiliary graph on the edge set, with an edge
    /// between `e_i` and `e_j` iff `S ∩ e_i ∩ e_j` is nonempty, is connected.
    /// An empty or singleton edge set is trivially S-connected.
    pub fn is_s_connected(&self, s: &BTreeSet<V>) -> bool {
        let edges: Vec<&BTreeSet<V>> = self.edges.iter().collect();
        if edges.len() <= 1 {
            return true;
        }
        let mut reached = vec![false; edges.len()];
        let mut stack = vec![0usize];
        reached[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..edges.len() {
                if !reached[j]
                    && edges[i]
                        .intersection(edges[j])
                        .any(|v| s.contains(v))
                {
                    reached[j] = true;
                    stack.push(j);
                }
            }
        }
        reached.into_iter().all(|r| r)
    }

    pub fn treewidth(&self) -> Result<usize> {
        self.treewidth_with_limit(DEFAULT_TREEWIDTH_LIMIT)
    }

    /// Exact treewidth of the primal graph: the minimum over elimination
    /// orderings of the maximum lower degree. The empty and edgeless
    /// hypergraphs have treewidth 0.
    pub fn treewidth_with_limit(&self, limit: usize) -> Result<usize> {
        let solver = Solver::new(self, limit)?;
        Ok(solver.solve(&BTreeSet::new())?.0)
    }

    pub fn elimination_ordering_with_prefix(
        &self,
        f: &BTreeSet<V>,
    ) -> Result<EliminationOrdering<V>> {
        self.elimination_ordering_with_prefix_limit(f, DEFAULT_TREEWIDTH_LIMIT)
    }

    /// An elimination ordering whose first `|f|` vertices are exactly `f` and
    /// whose maximum lower degree equals the treewidth. When `f` is an edge
    /// of the hypergraph this always exists; for other vertex subsets the
    /// constrained optimum can exceed the treewidth, in which case this
    /// raises instead of approximating.
    pub fn elimination_ordering_with_prefix_limit(
        &self,
        f: &BTreeSet<V>,
        limit: usize,
    ) -> Result<EliminationOrdering<V>> {
        for v in f {
            if !self.vertices.contains(v) {
                return Err(Error::Precondition(format!(
                    "distinguished vertex {v:?} not in hypergraph"
                )));
            }
        }
        let solver = Solver::new(self, limit)?;
        let tw = solver.solve(&BTreeSet::new())?.0;
        let (constrained, order) = solver.solve(f)?;
        if constrained != tw {
            return Err(Error::Precondition(format!(
                "no ordering starting with {f:?} achieves lower degree {tw} (best is {constrained})"
            )));
        }
        let ordering = EliminationOrdering::fill_for_order(self, order);
        debug_assert_eq!(ordering.lowerdeg(), tw);
        debug_assert!(ordering.validate_for(self).is_ok());
        Ok(ordering)
    }
}

impl<V: Ord + Clone + Debug> Graph<V> {
    pub fn from_edges<I>(edges: I) -> Self
    where
        I: IntoIterator<Item = (V, V)>,
    {
        let mut g = Graph {
            vertices: BTreeSet::new(),
            edges: BTreeSet::new(),
        };
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn add_vertex(&mut self, v: V) {
        self.vertices.insert(v);
    }

    pub fn add_edge(&mut self, a: V, b: V) {
        if a == b {
            self.vertices.insert(a);
            return; // no self-loops
        }
        let pair = norm_pair(&a, &b);
        self.vertices.insert(a);
        self.vertices.insert(b);
        self.edges.insert(pair);
    }

    pub fn vertices(&self) -> &BTreeSet<V> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(V, V)> {
        &self.edges
    }

    pub fn has_edge(&self, a: &V, b: &V) -> bool {
        a != b && self.edges.contains(&norm_pair(a, b))
    }

    /// Exhaustive check for a clique of size `k`.
    pub fn has_k_clique(&self, k: usize) -> bool {
        self.find_k_clique(k).is_some()
    }

    /// The lexicographically least clique of size `k`, if any.
    pub fn find_k_clique(&self, k: usize) -> Option<Vec<V>> {
        if k == 0 {
            return Some(vec![]);
        }
        let vs: Vec<&V> = self.vertices.iter().collect();
        let mut chosen: Vec<usize> = Vec::new();
        if self.extend_clique(&vs, &mut chosen, 0, k) {
            Some(chosen.into_iter().map(|i| vs[i].clone()).collect())
        } else {
            None
        }
    }

    fn extend_clique(&self, vs: &[&V], chosen: &mut Vec<usize>, start: usize, k: usize) -> bool {
        if chosen.len() == k {
            return true;
        }
        for i in start..vs.len() {
            if chosen.iter().all(|&j| self.has_edge(vs[j], vs[i])) {
                chosen.push(i);
                if self.extend_clique(vs, chosen, i + 1, k) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    /// The hypergraph whose edges are this graph's edges.
    pub fn to_hypergraph(&self) -> Hypergraph<V> {
        let edges: BTreeSet<BTreeSet<V>> = self
            .edges
            .iter()
            .map(|(a, b)| BTreeSet::from([a.clone(), b.clone()]))
            .collect();
        Hypergraph {
            vertices: self.vertices.clone(),
            edges,
        }
    }
}

impl<V: Ord + Clone + Debug + std::fmt::Display> Graph<V> {
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph {\n");
        for v in &self.vertices {
            out.push_str(&format!("  \"{v}\";\n"));
        }
        for (a, b) in &self.edges {
            out.push_str(&format!("  \"{a}\" -- \"{b}\";\n"));
        }
        out.push_str("}\n");
        out
    }
}

impl<V: Ord + Clone + Debug> EliminationOrdering<V> {
    pub fn new(order: Vec<V>, fill: BTreeSet<(V, V)>) -> Self {
        EliminationOrdering { order, fill }
    }

    /// Builds the ordering for `order` over `h` by closing the primal edges
    /// under the fill rule: processing vertices from last to first, the lower
    /// neighbors of each vertex are completed into a clique.
    pub fn fill_for_order(h: &Hypergraph<V>, order: Vec<V>) -> Self {
        let mut fill: BTreeSet<(V, V)> = h.primal_graph().edges.clone();
        let pos: std::collections::BTreeMap<&V, usize> =
            order.iter().enumerate().map(|(i, v)| (v, i)).collect();
        for k in (0..order.len()).rev() {
            let vk = &order[k];
            let lower: Vec<&V> = order[..k]
                .iter()
                .filter(|u| fill.contains(&norm_pair(u, vk)))
                .collect();
            for i in 0..lower.len() {
                for j in i + 1..lower.len() {
                    fill.insert(norm_pair(lower[i], lower[j]));
                }
            }
        }
        // restrict to pairs inside the ordering
        fill.retain(|(a, b)| pos.contains_key(a) && pos.contains_key(b));
        EliminationOrdering { order, fill }
    }

    pub fn order(&self) -> &[V] {
        &self.order
    }

    pub fn fill(&self) -> &BTreeSet<(V, V)> {
        &self.fill
    }

    pub fn lower_neighbors(&self, v: &V) -> Result<Vec<&V>> {
        let k = self
            .order
            .iter()
            .position(|u| u == v)
            .ok_or_else(|| Error::Precondition(format!("vertex {v:?} not in ordering")))?;
        Ok(self.order[..k]
            .iter()
            .filter(|u| self.fill.contains(&norm_pair(u, v)))
            .collect())
    }

    pub fn lower_degree(&self, v: &V) -> Result<usize> {
        Ok(self.lower_neighbors(v)?.len())
    }

    /// Maximum lower degree over all vertices.
    pub fn lowerdeg(&self) -> usize {
        self.order
            .iter()
            .map(|v| self.lower_degree(v).expect("vertex is in ordering"))
            .max()
            .unwrap_or(0)
    }

    /// Checks the defining property against `h`: the order is a permutation
    /// of the vertices, the fill contains every primal edge, and any two
    /// distinct lower neighbors of a vertex are adjacent in the fill.
    pub fn validate_for(&self, h: &Hypergraph<V>) -> Result<()> {
        let in_order: BTreeSet<&V> = self.order.iter().collect();
        if in_order.len() != self.order.len() {
            return Err(Error::Precondition("ordering repeats a vertex".into()));
        }
        if in_order.len() != h.vertices().len()
            || !h.vertices().iter().all(|v| in_order.contains(v))
        {
            return Err(Error::Precondition(
                "ordering is not a permutation of the vertex set".into(),
            ));
        }
        for (a, b) in h.primal_graph().edges() {
            if !self.fill.contains(&norm_pair(a, b)) {
                return Err(Error::Precondition(format!(
                    "fill is missing primal edge ({a:?}, {b:?})"
                )));
            }
        }
        for v in &self.order {
            let lower = self.lower_neighbors(v)?;
            for i in 0..lower.len() {
                for j in i + 1..lower.len() {
                    if !self.fill.contains(&norm_pair(lower[i], lower[j])) {
                        return Err(Error::Precondition(format!(
                            "lower neighbors {:?} and {:?} of {:?} are not adjacent",
                            lower[i], lower[j], v
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Drops the last vertex, restricting the fill to the remaining pairs.
    pub fn restrict_dropping_last(&self) -> Self {
        let mut order = self.order.clone();
        let dropped = order.pop();
        let fill = match dropped {
            Some(d) => self
                .fill
                .iter()
                .filter(|(a, b)| a != &d && b != &d)
                .cloned()
                .collect(),
            None => BTreeSet::new(),
        };
        EliminationOrdering { order, fill }
    }
}

impl<V: Ord + Clone + Debug + std::fmt::Display> EliminationOrdering<V> {
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph {\n");
        for (i, v) in self.order.iter().enumerate() {
            out.push_str(&format!("  \"{v}\" [label=\"{v} ({i})\"];\n"));
        }
        for (a, b) in &self.fill {
            out.push_str(&format!("  \"{a}\" -- \"{b}\";\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Subset DP for the minimum over elimination orderings of the maximum lower
/// degree, optionally constrained to keep a distinguished vertex set first.
/// An ordering is processed back to front: eliminating a vertex `v` after a
/// set `S` costs the number of vertices outside `S` reachable from `v`
/// through `S`.
struct Solver<'a, V: Ord + Clone + Debug> {
    h: &'a Hypergraph<V>,
    verts: Vec<V>,
    adj: Vec<u32>,
}

impl<'a, V: Ord + Clone + Debug> Solver<'a, V> {
    fn new(h: &'a Hypergraph<V>, limit: usize) -> Result<Self> {
        let n = h.vertices().len();
        if n > limit.min(32) {
            return Err(Error::SizeLimit(format!(
                "treewidth search over {n} vertices exceeds the limit {limit}"
            )));
        }
        let verts: Vec<V> = h.vertices().iter().cloned().collect();
        let index = |v: &V| verts.binary_search(v).expect("vertex present");
        let mut adj = vec![0u32; n];
        for (a, b) in h.primal_graph().edges() {
            let (i, j) = (index(a), index(b));
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
        Ok(Solver { h, verts, adj })
    }

    /// Number of vertices outside `eliminated | {v}` reachable from `v` via
    /// paths whose internal vertices lie in `eliminated`.
    fn elim_degree(&self, eliminated: u32, v: usize) -> u32 {
        let mut seen = (1u32 << v) | self.adj[v];
        let mut inside = self.adj[v] & eliminated;
        let mut outside = self.adj[v] & !eliminated & !(1 << v);
        while inside != 0 {
            let mut next = 0u32;
            let mut rest = inside;
            while rest != 0 {
                let u = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                next |= self.adj[u];
            }
            next &= !seen;
            seen |= next;
            outside |= next & !eliminated;
            inside = next & eliminated;
        }
        outside.count_ones()
    }

    /// Returns the optimum width and a witnessing elimination ordering
    /// (front-of-ordering last) with the vertices of `first` in the leading
    /// positions, sorted. Ties break toward the lexicographically least
    /// vertex, making the result deterministic.
    fn solve(&self, first: &BTreeSet<V>) -> Result<(usize, Vec<V>)> {
        let n = self.verts.len();
        if n == 0 {
            return Ok((0, vec![]));
        }
        let first_mask: u32 = self
            .verts
            .iter()
            .enumerate()
            .filter(|(_, v)| first.contains(v))
            .fold(0, |m, (i, _)| m | (1 << i));
        let rest: Vec<usize> = (0..n).filter(|i| first_mask & (1 << i) == 0).collect();
        let m = rest.len();

        // best[s] = optimal max elimination degree over orders that
        // eliminate exactly the rest-subset s first.
        let mut best = vec![0u8; 1usize << m];
        for s in 1usize..(1 << m) {
            let mut b = u8::MAX;
            let mut bits = s;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let prev = s & !(1 << i);
                let prev_mask = self.expand(prev, &rest);
                let deg = self.elim_degree(prev_mask, rest[i]) as u8;
                b = b.min(best[prev].max(deg));
            }
            best[s] = b;
        }

        // Second phase: eliminate the distinguished vertices, all of the
        // rest already gone.
        let firsts: Vec<usize> = (0..n).filter(|i| first_mask & (1 << i) != 0).collect();
        let fm = firsts.len();
        let rest_full_mask = self.expand((1usize << m) - 1, &rest);
        let mut fbest = vec![0u8; 1usize << fm];
        for t in 1usize..(1 << fm) {
            let mut b = u8::MAX;
            let mut bits = t;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let prev = t & !(1 << i);
                let prev_mask = rest_full_mask | self.expand(prev, &firsts);
                let deg = self.elim_degree(prev_mask, firsts[i]) as u8;
                b = b.min(fbest[prev].max(deg));
            }
            fbest[t] = b;
        }
        let opt = best[(1 << m) - 1].max(fbest[(1 << fm) - 1]) as usize;

        // Reconstruct each phase from its table, walking from the full
        // subset down and peeling off the last-eliminated vertex. The first
        // matching bit is the lexicographically least vertex, which fixes
        // the tie-break.
        let peel = |table: &[u8], map: &[usize], extra: u32| -> Vec<usize> {
            let mut s = table.len() - 1;
            let mut rev = Vec::new(); // last eliminated first
            while s != 0 {
                let mut pick = None;
                let mut bits = s;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let prev = s & !(1 << i);
                    let prev_mask = extra | self.expand(prev, map);
                    let deg = self.elim_degree(prev_mask, map[i]) as u8;
                    if table[prev].max(deg) == table[s] {
                        pick = Some(i);
                        break;
                    }
                }
                let i = pick.expect("dp is consistent");
                rev.push(map[i]);
                s &= !(1 << i);
            }
            rev
        };
        let rest_rev = peel(&best, &rest, 0);
        let first_rev = peel(&fbest, &firsts, rest_full_mask);

        // The ordering is the reverse of the elimination sequence, so the
        // last-eliminated-first lists concatenate directly.
        let mut order: Vec<V> = first_rev.iter().map(|&i| self.verts[i].clone()).collect();
        order.extend(rest_rev.iter().map(|&i| self.verts[i].clone()));
        debug_assert_eq!(order.len(), self.h.vertices().len());
        Ok((opt, order))
    }

    fn expand(&self, compact: usize, map: &[usize]) -> u32 {
        let mut mask = 0u32;
        let mut bits = compact;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            mask |= 1 << map[i];
        }
        mask
    }
}
