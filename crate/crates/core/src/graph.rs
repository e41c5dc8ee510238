//! Directed acyclic multigraphs, edge and root weight systems, path counts,
//! and projection kernels.
//!
//! Vertices are addressed by their position in the graph's topological order,
//! so every `usize` vertex handle doubles as a matrix index and every edge
//! satisfies `tail < head`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;

use crate::algebra::{pairwise_recursion, row_recursion, PathAlgebraElement};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Separator for composed edge ids produced by projection.
pub const COMPOSE_SEP: char = '*';

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
}

/// An immutable directed acyclic multigraph with a certified topological order.
///
/// Cloning is cheap; clones share storage.
#[derive(Clone)]
pub struct Damg {
    inner: Arc<Inner>,
}

struct Inner {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    edge_index: HashMap<String, usize>,
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
    parents: Vec<Vec<(usize, usize)>>,
    children: Vec<Vec<(usize, usize)>>,
    roots: Vec<usize>,
    leaves: Vec<usize>,
    ancestors: OnceLock<Vec<FixedBitSet>>,
    descendants: OnceLock<Vec<FixedBitSet>>,
}

/// Label-level view of one vertex's neighbourhood. Sets are listed in
/// topological order; ancestor and descendant sets contain the vertex itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relations {
    pub parents: Vec<String>,
    pub children: Vec<String>,
    pub ancestors: Vec<String>,
    pub descendants: Vec<String>,
}

impl Damg {
    /// Builds a graph from vertex labels and `(id, tail, head)` triples.
    ///
    /// The topological order is Kahn's algorithm with ties broken by label,
    /// so it depends only on the vertex and edge sets.
    pub fn build<V, E>(vertices: &[V], edges: &[(E, E, E)]) -> Result<Damg>
    where
        V: AsRef<str>,
        E: AsRef<str>,
    {
        let edges: Vec<(String, String, String)> = edges
            .iter()
            .map(|(id, t, h)| (id.as_ref().to_string(), t.as_ref().to_string(), h.as_ref().to_string()))
            .collect();
        for (id, _, _) in &edges {
            if id.contains(COMPOSE_SEP) {
                return Err(Error::InvalidLabel { label: id.clone(), reason: "'*' is reserved for composed edge ids" });
            }
        }
        let vertices: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        Damg::build_unchecked_ids(vertices, edges)
    }

    /// Like [`Damg::build`] but also accepts composed ids such as `ad*df`, as
    /// written by projection. Every `*`-separated segment must be non-empty.
    pub fn build_composed<V, E>(vertices: &[V], edges: &[(E, E, E)]) -> Result<Damg>
    where
        V: AsRef<str>,
        E: AsRef<str>,
    {
        let edges: Vec<(String, String, String)> = edges
            .iter()
            .map(|(id, t, h)| (id.as_ref().to_string(), t.as_ref().to_string(), h.as_ref().to_string()))
            .collect();
        for (id, _, _) in &edges {
            if id.contains(COMPOSE_SEP) && id.split(COMPOSE_SEP).any(str::is_empty) {
                return Err(Error::InvalidLabel { label: id.clone(), reason: "empty segment in composed edge id" });
            }
        }
        let vertices: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        Damg::build_unchecked_ids(vertices, edges)
    }

    /// Like [`Damg::build`] but accepts any edge id.
    pub(crate) fn build_unchecked_ids(vertices: Vec<String>, edges: Vec<(String, String, String)>) -> Result<Damg> {
        let mut input_index: HashMap<&str, usize> = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if v.is_empty() {
                return Err(Error::InvalidLabel { label: v.clone(), reason: "empty label" });
            }
            if input_index.insert(v.as_str(), i).is_some() {
                return Err(Error::DuplicateVertex(v.clone()));
            }
        }
        let mut seen_ids: HashSet<&str> = HashSet::with_capacity(edges.len());
        let mut raw: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (id, t, h) in &edges {
            if id.is_empty() {
                return Err(Error::InvalidLabel { label: id.clone(), reason: "empty edge id" });
            }
            if !seen_ids.insert(id.as_str()) {
                return Err(Error::DuplicateEdge(id.clone()));
            }
            let lookup = |v: &String| {
                input_index
                    .get(v.as_str())
                    .copied()
                    .ok_or_else(|| Error::DanglingEndpoint { edge: id.clone(), vertex: v.clone() })
            };
            let (ti, hi) = (lookup(t)?, lookup(h)?);
            if ti == hi {
                return Err(Error::Cycle(vec![t.clone(), t.clone()]));
            }
            raw.push((ti, hi));
        }

        let n = vertices.len();
        let mut indeg = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(t, h) in &raw {
            indeg[h] += 1;
            out[t].push(h);
        }
        let mut heap: BinaryHeap<Reverse<(&str, usize)>> =
            (0..n).filter(|&i| indeg[i] == 0).map(|i| Reverse((vertices[i].as_str(), i))).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse((_, i))) = heap.pop() {
            order.push(i);
            for &h in &out[i] {
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    heap.push(Reverse((vertices[h].as_str(), h)));
                }
            }
        }
        if order.len() < n {
            return Err(Error::Cycle(find_cycle(&vertices, &raw, &indeg)));
        }

        let mut position = vec![0usize; n];
        for (pos, &i) in order.iter().enumerate() {
            position[i] = pos;
        }
        let labels: Vec<String> = order.iter().map(|&i| vertices[i].clone()).collect();
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let edges: Vec<Edge> = edges
            .into_iter()
            .zip(&raw)
            .map(|((id, _, _), &(t, h))| Edge { id, tail: position[t], head: position[h] })
            .collect();
        Ok(Damg::assemble(labels, index, edges))
    }

    fn assemble(labels: Vec<String>, index: HashMap<String, usize>, edges: Vec<Edge>) -> Damg {
        let n = labels.len();
        let mut in_edges = vec![Vec::new(); n];
        let mut out_edges = vec![Vec::new(); n];
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (k, e) in edges.iter().enumerate() {
            debug_assert!(e.tail < e.head);
            in_edges[e.head].push(k);
            out_edges[e.tail].push(k);
            edge_index.insert(e.id.clone(), k);
        }
        let group = |list: &Vec<usize>, pick: fn(&Edge) -> usize| {
            let mut m: Vec<(usize, usize)> = Vec::new();
            let mut ends: Vec<usize> = list.iter().map(|&k| pick(&edges[k])).collect();
            ends.sort_unstable();
            for v in ends {
                match m.last_mut() {
                    Some((u, c)) if *u == v => *c += 1,
                    _ => m.push((v, 1)),
                }
            }
            m
        };
        let parents: Vec<_> = in_edges.iter().map(|l| group(l, |e| e.tail)).collect();
        let children: Vec<_> = out_edges.iter().map(|l| group(l, |e| e.head)).collect();
        let roots = (0..n).filter(|&i| in_edges[i].is_empty()).collect();
        let leaves = (0..n).filter(|&i| out_edges[i].is_empty()).collect();
        Damg {
            inner: Arc::new(Inner {
                labels,
                index,
                edges,
                edge_index,
                in_edges,
                out_edges,
                parents,
                children,
                roots,
                leaves,
                ancestors: OnceLock::new(),
                descendants: OnceLock::new(),
            }),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.inner.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.inner.edges.len()
    }

    /// Labels in topological order.
    pub fn labels(&self) -> &[String] {
        &self.inner.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.inner.labels[v]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.inner.index.get(label).copied().ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    pub fn indices_of<L: AsRef<str>>(&self, labels: &[L]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.index_of(l.as_ref())).collect()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.inner.edges
    }

    pub fn edge(&self, k: usize) -> &Edge {
        &self.inner.edges[k]
    }

    pub fn edge_index(&self, id: &str) -> Result<usize> {
        self.inner.edge_index.get(id).copied().ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.inner.in_edges[v]
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.inner.out_edges[v]
    }

    /// Distinct parents with edge multiplicities, sorted by index.
    pub fn parents(&self, v: usize) -> &[(usize, usize)] {
        &self.inner.parents[v]
    }

    /// Distinct children with edge multiplicities, sorted by index.
    pub fn children(&self, v: usize) -> &[(usize, usize)] {
        &self.inner.children[v]
    }

    /// |E(x, y)|
    pub fn multiplicity(&self, x: usize, y: usize) -> usize {
        self.parents(y).binary_search_by_key(&x, |&(p, _)| p).map(|i| self.parents(y)[i].1).unwrap_or(0)
    }

    pub fn roots(&self) -> &[usize] {
        &self.inner.roots
    }

    pub fn leaves(&self) -> &[usize] {
        &self.inner.leaves
    }

    pub fn is_root(&self, v: usize) -> bool {
        self.inner.in_edges[v].is_empty()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.inner.out_edges[v].is_empty()
    }

    /// Ancestor sets, each containing the vertex itself. Computed on first use.
    pub fn ancestor_sets(&self) -> &[FixedBitSet] {
        self.inner.ancestors.get_or_init(|| {
            let n = self.vertex_count();
            let mut sets: Vec<FixedBitSet> = Vec::with_capacity(n);
            for y in 0..n {
                let mut s = FixedBitSet::with_capacity(n);
                s.insert(y);
                for &(p, _) in self.parents(y) {
                    s.union_with(&sets[p]);
                }
                sets.push(s);
            }
            sets
        })
    }

    /// Descendant sets, each containing the vertex itself. Computed on first use.
    pub fn descendant_sets(&self) -> &[FixedBitSet] {
        self.inner.descendants.get_or_init(|| {
            let n = self.vertex_count();
            let mut sets: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(n); n];
            for x in (0..n).rev() {
                let mut s = FixedBitSet::with_capacity(n);
                s.insert(x);
                for &(c, _) in self.children(x) {
                    s.union_with(&sets[c]);
                }
                sets[x] = s;
            }
            sets
        })
    }

    pub fn ancestors(&self, v: usize) -> &FixedBitSet {
        &self.ancestor_sets()[v]
    }

    pub fn descendants(&self, v: usize) -> &FixedBitSet {
        &self.descendant_sets()[v]
    }

    pub fn is_ancestor(&self, x: usize, y: usize) -> bool {
        x <= y && self.ancestors(y).contains(x)
    }

    pub fn relations(&self, label: &str) -> Result<Relations> {
        let x = self.index_of(label)?;
        let names = |it: &mut dyn Iterator<Item = usize>| it.map(|i| self.label(i).to_string()).collect();
        Ok(Relations {
            parents: names(&mut self.parents(x).iter().map(|&(p, _)| p)),
            children: names(&mut self.children(x).iter().map(|&(c, _)| c)),
            ancestors: names(&mut self.ancestors(x).ones()),
            descendants: names(&mut self.descendants(x).ones()),
        })
    }

    /// Subgraph on `keep` with every edge whose endpoints both survive.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Damg {
        let mut kept = vec![false; self.vertex_count()];
        for &v in keep {
            kept[v] = true;
        }
        let vertices = (0..self.vertex_count()).filter(|&v| kept[v]).map(|v| self.label(v).to_string()).collect();
        let edges = self
            .edges()
            .iter()
            .filter(|e| kept[e.tail] && kept[e.head])
            .map(|e| (e.id.clone(), self.label(e.tail).to_string(), self.label(e.head).to_string()))
            .collect();
        Damg::build_unchecked_ids(vertices, edges).expect("subgraph of a valid graph is valid")
    }

    pub(crate) fn same_as(&self, other: &Damg) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self == other
    }

    pub(crate) fn check_same(&self, other: &Damg) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::BaseMismatch)
        }
    }
}

/// Walks backwards through vertices that Kahn's algorithm could not place;
/// every such vertex has an unplaced parent, so the walk must revisit a vertex.
fn find_cycle(vertices: &[String], raw: &[(usize, usize)], indeg: &[usize]) -> Vec<String> {
    let n = vertices.len();
    let mut parent_of = vec![usize::MAX; n];
    for &(t, h) in raw {
        if indeg[t] > 0 && indeg[h] > 0 && parent_of[h] == usize::MAX {
            parent_of[h] = t;
        }
    }
    let start = (0..n).find(|&i| indeg[i] > 0).expect("cycle exists");
    let mut seen = vec![usize::MAX; n];
    let mut walk = Vec::new();
    let mut cur = start;
    while seen[cur] == usize::MAX {
        seen[cur] = walk.len();
        walk.push(cur);
        cur = parent_of[cur];
    }
    let mut cycle: Vec<String> = walk[seen[cur]..].iter().rev().map(|&i| vertices[i].clone()).collect();
    cycle.push(cycle[0].clone());
    cycle
}

impl PartialEq for Damg {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.labels == other.inner.labels && self.inner.edges == other.inner.edges)
    }
}

impl Eq for Damg {}

impl fmt::Debug for Damg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> =
            self.edges().iter().map(|e| format!("{}:{}->{}", e.id, self.label(e.tail), self.label(e.head))).collect();
        f.debug_struct("Damg").field("vertices", &self.labels()).field("edges", &edges).finish()
    }
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

/// Pairwise path counts π(x, y) together with the root path counts π(y).
#[derive(Debug, Clone)]
pub struct PathCounts {
    pub pairwise: PathAlgebraElement<Rational>,
    pub per_vertex: Vec<Rational>,
}

pub fn path_counts(g: &Damg) -> PathCounts {
    PathCounts { pairwise: pairwise_recursion(g, |_| Rational::one()), per_vertex: root_path_counts(g) }
}

/// π(y): number of directed paths from any root to y.
pub fn root_path_counts(g: &Damg) -> Vec<Rational> {
    let mut pi: Vec<Rational> = Vec::with_capacity(g.vertex_count());
    for y in 0..g.vertex_count() {
        if g.is_root(y) {
            pi.push(Rational::one());
        } else {
            let mut acc = Rational::zero();
            for &(z, m) in g.parents(y) {
                acc.add_assign_ref(&pi[z].mul_ref(&Rational::from(m)));
            }
            pi.push(acc);
        }
    }
    pi
}

/// π(x, ·) for a fixed source x.
pub fn path_count_row(g: &Damg, x: usize) -> Vec<Rational> {
    row_recursion(g, x, |_| Rational::one())
}

/// Lists Π(x, y) as edge-id sequences. The trivial path is the empty sequence.
pub fn enumerate_paths(g: &Damg, x: &str, y: &str, cap: usize) -> Result<Vec<Vec<String>>> {
    let (x, y) = (g.index_of(x)?, g.index_of(y)?);
    let count = &path_count_row(g, x)[y];
    if *count > Rational::from(cap) {
        return Err(Error::CapExceeded { cap });
    }
    let anc = g.ancestors(y);
    let mut out = Vec::new();
    let mut stack: Vec<String> = Vec::new();
    fn walk(
        g: &Damg,
        cur: usize,
        target: usize,
        anc: &FixedBitSet,
        stack: &mut Vec<String>,
        out: &mut Vec<Vec<String>>,
    ) {
        if cur == target {
            out.push(stack.clone());
            return;
        }
        for &k in g.out_edges(cur) {
            let e = g.edge(k);
            if anc.contains(e.head) {
                stack.push(e.id.clone());
                walk(g, e.head, target, anc, stack, out);
                stack.pop();
            }
        }
    }
    if anc.contains(x) {
        walk(g, x, y, anc, &mut stack, &mut out);
    }
    Ok(out)
}

/// True iff every root-to-leaf path meets `set` exactly once.
pub fn is_horizontal_subset(g: &Damg, set: &[usize]) -> bool {
    let n = g.vertex_count();
    let mut member = vec![false; n];
    for &v in set {
        member[v] = true;
    }
    let mut lo = vec![0usize; n];
    let mut hi = vec![0usize; n];
    for y in 0..n {
        let own = usize::from(member[y]);
        let ps = g.parents(y);
        let (min_p, max_p) = if ps.is_empty() {
            (0, 0)
        } else {
            let min_p = ps.iter().map(|&(p, _)| lo[p]).min().unwrap_or(0);
            let max_p = ps.iter().map(|&(p, _)| hi[p]).max().unwrap_or(0);
            (min_p, max_p)
        };
        // Saturate at 2: anything above one hit already fails.
        lo[y] = (min_p + own).min(2);
        hi[y] = (max_p + own).min(2);
    }
    g.leaves().iter().all(|&l| lo[l] == 1 && hi[l] == 1)
}

// ---------------------------------------------------------------------------
// Weight systems
// ---------------------------------------------------------------------------

/// Edge weights ς, indexed by edge position.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights<S> {
    graph: Damg,
    per_edge: Vec<S>,
}

impl<S: Scalar> EdgeWeights<S> {
    pub fn constant(g: &Damg, c: S) -> Self {
        EdgeWeights { graph: g.clone(), per_edge: vec![c; g.edge_count()] }
    }

    pub fn from_vec(g: &Damg, per_edge: Vec<S>) -> Result<Self> {
        if per_edge.len() != g.edge_count() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} edge weights", g.edge_count()),
                found: format!("{}", per_edge.len()),
            });
        }
        Ok(EdgeWeights { graph: g.clone(), per_edge })
    }

    /// Every edge must be assigned exactly once.
    pub fn from_map<K: AsRef<str>>(g: &Damg, entries: impl IntoIterator<Item = (K, S)>) -> Result<Self> {
        Ok(EdgeWeights { graph: g.clone(), per_edge: collect_per_edge(g, entries)? })
    }

    pub fn graph(&self) -> &Damg {
        &self.graph
    }

    pub fn get(&self, edge: usize) -> &S {
        &self.per_edge[edge]
    }

    pub fn per_edge(&self) -> &[S] {
        &self.per_edge
    }

    /// ς(x, y): sum over the parallel edges from x to y.
    pub fn pairwise(&self, x: usize, y: usize) -> S {
        pairwise_sum(&self.graph, &self.per_edge, x, y)
    }
}

fn collect_per_edge<K: AsRef<str>, S: Scalar>(g: &Damg, entries: impl IntoIterator<Item = (K, S)>) -> Result<Vec<S>> {
    let mut slots: Vec<Option<S>> = vec![None; g.edge_count()];
    for (id, val) in entries {
        let k = g.edge_index(id.as_ref())?;
        if slots[k].is_some() {
            return Err(Error::DuplicateEdge(id.as_ref().to_string()));
        }
        slots[k] = Some(val);
    }
    slots.into_iter().enumerate().map(|(k, s)| s.ok_or_else(|| Error::MissingWeight(g.edge(k).id.clone()))).collect()
}

fn pairwise_sum<S: Scalar>(g: &Damg, per_edge: &[S], x: usize, y: usize) -> S {
    let mut acc = S::zero();
    for &k in g.in_edges(y) {
        if g.edge(k).tail == x {
            acc.add_assign_ref(&per_edge[k]);
        }
    }
    acc
}

/// Root weights τ. Values on non-roots are zero until extended by
/// [`extend_root_weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct RootWeights<S> {
    graph: Damg,
    values: Vec<S>,
}

impl<S: Scalar> RootWeights<S> {
    pub fn constant(g: &Damg, c: S) -> Self {
        let values = (0..g.vertex_count()).map(|v| if g.is_root(v) { c.clone() } else { S::zero() }).collect();
        RootWeights { graph: g.clone(), values }
    }

    /// Every root must be assigned exactly once; non-roots are rejected.
    pub fn from_map<K: AsRef<str>>(g: &Damg, entries: impl IntoIterator<Item = (K, S)>) -> Result<Self> {
        let mut slots: Vec<Option<S>> = vec![None; g.vertex_count()];
        for (label, val) in entries {
            let v = g.index_of(label.as_ref())?;
            if !g.is_root(v) {
                return Err(Error::NotARoot(label.as_ref().to_string()));
            }
            if slots[v].is_some() {
                return Err(Error::DuplicateVertex(label.as_ref().to_string()));
            }
            slots[v] = Some(val);
        }
        let mut values = Vec::with_capacity(slots.len());
        for (v, s) in slots.into_iter().enumerate() {
            match s {
                Some(s) => values.push(s),
                None if g.is_root(v) => return Err(Error::MissingWeight(g.label(v).to_string())),
                None => values.push(S::zero()),
            }
        }
        Ok(RootWeights { graph: g.clone(), values })
    }

    pub fn graph(&self) -> &Damg {
        &self.graph
    }

    pub fn get(&self, v: usize) -> &S {
        &self.values[v]
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }
}

/// Extends τ from the roots to every vertex by τ(y) = Σ_{z∈Pa(y)} τ(z)·ς(z, y).
pub fn extend_root_weights<S: Scalar>(sigma: &EdgeWeights<S>, tau: &RootWeights<S>) -> Result<RootWeights<S>> {
    let g = &tau.graph;
    g.check_same(&sigma.graph)?;
    let mut values: Vec<S> = Vec::with_capacity(g.vertex_count());
    for y in 0..g.vertex_count() {
        if g.is_root(y) {
            values.push(tau.values[y].clone());
        } else {
            let mut acc = S::zero();
            for &k in g.in_edges(y) {
                acc.add_assign_ref(&values[g.edge(k).tail].mul_ref(&sigma.per_edge[k]));
            }
            values.push(acc);
        }
    }
    Ok(RootWeights { graph: g.clone(), values })
}

/// σ(x, y): sum over directed paths of the product of edge weights.
pub fn total_path_weights<S: Scalar>(sigma: &EdgeWeights<S>) -> PathAlgebraElement<S> {
    pairwise_recursion(&sigma.graph, |k| sigma.per_edge[k].clone())
}

/// σ(x, ·) for a fixed source x.
pub fn total_path_weight_row<S: Scalar>(sigma: &EdgeWeights<S>, x: usize) -> Vec<S> {
    row_recursion(&sigma.graph, x, |k| sigma.per_edge[k].clone())
}

// ---------------------------------------------------------------------------
// Projection kernels
// ---------------------------------------------------------------------------

/// Per-edge projection weights q with a normalization flag.
///
/// The flag is always computed from the weights, never asserted by callers.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionKernel<S> {
    graph: Damg,
    per_edge: Vec<S>,
    normalized: bool,
    provenance: String,
}

impl ProjectionKernel<Rational> {
    /// q(x→y) = π(x)/π(y).
    pub fn path_uniform(g: &Damg) -> Self {
        let pi = root_path_counts(g);
        let per_edge =
            g.edges().iter().map(|e| pi[e.tail].checked_div(&pi[e.head]).expect("path counts are positive")).collect();
        ProjectionKernel::with_flag(g, per_edge, "path-uniform")
    }

    /// q(x→y) = 1/|E(y)|.
    pub fn edge_uniform(g: &Damg) -> Self {
        let per_edge = g.edges().iter().map(|e| Rational::new(1, g.in_edges(e.head).len() as i64)).collect();
        ProjectionKernel::with_flag(g, per_edge, "edge-uniform")
    }

    /// q(x→y) = τ(x)·ς(e)/τ(y) with τ extended to all vertices.
    pub fn induced(sigma: &EdgeWeights<Rational>, tau: &RootWeights<Rational>) -> Result<Self> {
        let g = tau.graph().clone();
        let strength = extend_root_weights(sigma, tau)?;
        let mut per_edge = Vec::with_capacity(g.edge_count());
        for (k, e) in g.edges().iter().enumerate() {
            let num = strength.values[e.tail].mul_ref(&sigma.per_edge[k]);
            let q = num
                .checked_div(&strength.values[e.head])
                .ok_or_else(|| Error::ZeroStrength(g.label(e.head).to_string()))?;
            per_edge.push(q);
        }
        Ok(ProjectionKernel::with_flag(&g, per_edge, "induced"))
    }

    /// Decimal copy for use with float-valued games.
    pub fn to_float(&self) -> ProjectionKernel<f64> {
        ProjectionKernel {
            graph: self.graph.clone(),
            per_edge: self.per_edge.iter().map(Rational::to_f64).collect(),
            normalized: self.normalized,
            provenance: self.provenance.clone(),
        }
    }
}

impl<S: Scalar> ProjectionKernel<S> {
    pub fn from_map<K: AsRef<str>>(g: &Damg, entries: impl IntoIterator<Item = (K, S)>) -> Result<Self> {
        let per_edge = collect_per_edge(g, entries)?;
        Ok(ProjectionKernel::with_flag(g, per_edge, "custom"))
    }

    pub fn from_vec(g: &Damg, per_edge: Vec<S>, provenance: &str) -> Result<Self> {
        if per_edge.len() != g.edge_count() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} kernel weights", g.edge_count()),
                found: format!("{}", per_edge.len()),
            });
        }
        Ok(ProjectionKernel::with_flag(g, per_edge, provenance))
    }

    pub(crate) fn with_flag(g: &Damg, per_edge: Vec<S>, provenance: &str) -> Self {
        let normalized = first_unnormalized(g, &per_edge).is_none();
        ProjectionKernel { graph: g.clone(), per_edge, normalized, provenance: provenance.to_string() }
    }

    pub fn graph(&self) -> &Damg {
        &self.graph
    }

    pub fn get(&self, edge: usize) -> &S {
        &self.per_edge[edge]
    }

    pub fn per_edge(&self) -> &[S] {
        &self.per_edge
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// q(x|y): sum over the parallel edges from x to y.
    pub fn pairwise(&self, x: usize, y: usize) -> S {
        pairwise_sum(&self.graph, &self.per_edge, x, y)
    }

    pub fn check_normalized(&self) -> Result<()> {
        match first_unnormalized(&self.graph, &self.per_edge) {
            None => Ok(()),
            Some(y) => Err(Error::KernelNotNormalized(self.graph.label(y).to_string())),
        }
    }
}

fn first_unnormalized<S: Scalar>(g: &Damg, per_edge: &[S]) -> Option<usize> {
    (0..g.vertex_count()).filter(|&y| !g.is_root(y)).find(|&y| {
        let mut acc = S::zero();
        for &k in g.in_edges(y) {
            acc.add_assign_ref(&per_edge[k]);
        }
        !acc.is_one()
    })
}

/// s(x|y): sum over directed paths of the product of kernel weights.
pub fn kernel_total_weights<S: Scalar>(q: &ProjectionKernel<S>) -> PathAlgebraElement<S> {
    pairwise_recursion(&q.graph, |k| q.per_edge[k].clone())
}

/// s(x|·) for a fixed source x.
pub fn kernel_total_weight_row<S: Scalar>(q: &ProjectionKernel<S>, x: usize) -> Vec<S> {
    row_recursion(&q.graph, x, |k| q.per_edge[k].clone())
}

// ---------------------------------------------------------------------------
// Automorphisms
// ---------------------------------------------------------------------------

/// Weight systems an automorphism must preserve. Absent systems are not checked.
pub struct PreservedWeights<'a, S> {
    pub edge_weights: Option<&'a EdgeWeights<S>>,
    pub root_weights: Option<&'a RootWeights<S>>,
    pub kernel: Option<&'a ProjectionKernel<S>>,
}

impl<S> Default for PreservedWeights<'_, S> {
    fn default() -> Self {
        PreservedWeights { edge_weights: None, root_weights: None, kernel: None }
    }
}

fn as_bijection(
    n: usize,
    map: &HashMap<String, String>,
    lookup: impl Fn(&str) -> Result<usize>,
    name: impl Fn(usize) -> String,
    what: &str,
) -> Result<Vec<usize>> {
    let mut image = vec![usize::MAX; n];
    let mut hit = vec![false; n];
    for (from, to) in map {
        let (a, b) = (lookup(from)?, lookup(to)?);
        image[a] = b;
        if std::mem::replace(&mut hit[b], true) {
            return Err(Error::NotABijection(format!("{what} {to:?} is hit twice")));
        }
    }
    if let Some(a) = image.iter().position(|&b| b == usize::MAX) {
        return Err(Error::NotABijection(format!("{what} {:?} has no image", name(a))));
    }
    Ok(image)
}

/// Checks that the vertex and edge maps form an automorphism: endpoints commute
/// with the maps and every supplied weight system is preserved.
pub fn verify_automorphism<S: Scalar>(
    g: &Damg,
    vertex_map: &HashMap<String, String>,
    edge_map: &HashMap<String, String>,
    weights: PreservedWeights<'_, S>,
) -> Result<bool> {
    let av = as_bijection(g.vertex_count(), vertex_map, |l| g.index_of(l), |i| g.label(i).to_string(), "vertex")?;
    let ae = as_bijection(g.edge_count(), edge_map, |l| g.edge_index(l), |k| g.edge(k).id.clone(), "edge")?;
    for (k, e) in g.edges().iter().enumerate() {
        let img = g.edge(ae[k]);
        if img.tail != av[e.tail] || img.head != av[e.head] {
            return Ok(false);
        }
    }
    if let Some(w) = weights.edge_weights {
        g.check_same(w.graph())?;
        if (0..g.edge_count()).any(|k| !w.get(ae[k]).approx_eq(w.get(k))) {
            return Ok(false);
        }
    }
    if let Some(q) = weights.kernel {
        g.check_same(q.graph())?;
        if (0..g.edge_count()).any(|k| !q.get(ae[k]).approx_eq(q.get(k))) {
            return Ok(false);
        }
    }
    if let Some(t) = weights.root_weights {
        g.check_same(t.graph())?;
        if g.roots().iter().any(|&r| !t.get(av[r]).approx_eq(t.get(r))) {
            return Ok(false);
        }
    }
    Ok(true)
}
