//! Projection of graphs, kernels and synergy functions onto the complement of
//! a vertex set, plus weak/null detection and admissibility predicates.

use crate::algebra::ValueFunction;
use crate::error::{Error, Result};
use crate::graph::{Damg, EdgeWeights, ProjectionKernel, COMPOSE_SEP};
use crate::scalar::{ModuleValue, Scalar};

/// Projection aborts once the working graph would hold more edges than this.
pub const DEFAULT_EDGE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult<S> {
    pub graph: Damg,
    pub kernel: ProjectionKernel<S>,
    pub synergy: ValueFunction<S>,
    /// Inverse Möbius transform of `synergy` on `graph`.
    pub value: ValueFunction<S>,
    /// Removed labels in the source graph's topological order.
    pub removed: Vec<String>,
}

struct WorkEdge<S> {
    id: String,
    tail: usize,
    head: usize,
    weights: Vec<S>,
    alive: bool,
}

/// In-place vertex contraction. Edges carry any number of weight maps, each
/// composed multiplicatively through removed vertices.
struct Contraction<S> {
    edges: Vec<WorkEdge<S>>,
    ins: Vec<Vec<usize>>,
    outs: Vec<Vec<usize>>,
    removed: Vec<bool>,
    live: usize,
    cap: usize,
}

impl<S: Scalar> Contraction<S> {
    fn new(g: &Damg, maps: &[&[S]], cap: usize) -> Self {
        let n = g.vertex_count();
        let edges = g
            .edges()
            .iter()
            .enumerate()
            .map(|(k, e)| WorkEdge {
                id: e.id.clone(),
                tail: e.tail,
                head: e.head,
                weights: maps.iter().map(|m| m[k].clone()).collect(),
                alive: true,
            })
            .collect();
        Contraction {
            edges,
            ins: (0..n).map(|v| g.in_edges(v).to_vec()).collect(),
            outs: (0..n).map(|v| g.out_edges(v).to_vec()).collect(),
            removed: vec![false; n],
            live: g.edge_count(),
            cap,
        }
    }

    fn live_in(&self, z: usize) -> Vec<usize> {
        self.ins[z].iter().copied().filter(|&k| self.edges[k].alive).collect()
    }

    fn live_out(&self, z: usize) -> Vec<usize> {
        self.outs[z].iter().copied().filter(|&k| self.edges[k].alive).collect()
    }

    /// Sum of map `m` over live edges x→z, keyed by x.
    fn incoming(&self, z: usize, m: usize) -> Vec<(usize, S)> {
        let mut acc: Vec<(usize, S)> = Vec::new();
        for k in self.live_in(z) {
            let e = &self.edges[k];
            match acc.iter_mut().find(|(x, _)| *x == e.tail) {
                Some((_, s)) => s.add_assign_ref(&e.weights[m]),
                None => acc.push((e.tail, e.weights[m].clone())),
            }
        }
        acc
    }

    fn remove(&mut self, z: usize) -> Result<()> {
        let ins = self.live_in(z);
        let outs = self.live_out(z);
        let next = self.live - ins.len() - outs.len() + ins.len() * outs.len();
        if next > self.cap {
            return Err(Error::ProjectionBlowup { cap: self.cap });
        }
        for &i in &ins {
            for &o in &outs {
                let (a, b) = (&self.edges[i], &self.edges[o]);
                let edge = WorkEdge {
                    id: format!("{}{}{}", a.id, COMPOSE_SEP, b.id),
                    tail: a.tail,
                    head: b.head,
                    weights: a.weights.iter().zip(&b.weights).map(|(p, q)| p.mul_ref(q)).collect(),
                    alive: true,
                };
                let k = self.edges.len();
                self.outs[edge.tail].push(k);
                self.ins[edge.head].push(k);
                self.edges.push(edge);
            }
        }
        for k in ins.into_iter().chain(outs) {
            self.edges[k].alive = false;
        }
        self.removed[z] = true;
        self.live = next;
        Ok(())
    }

    /// Builds the surviving graph with edges in canonical (tail, head, id)
    /// order, and the weight maps aligned to it. An empty removal returns
    /// the input graph untouched.
    fn finish(self, g: &Damg) -> (Damg, Vec<Vec<S>>) {
        if !self.removed.contains(&true) {
            let maps_len = self.edges.first().map_or(0, |e| e.weights.len());
            let maps = (0..maps_len).map(|m| self.edges.iter().map(|e| e.weights[m].clone()).collect()).collect();
            return (g.clone(), maps);
        }
        let mut live: Vec<WorkEdge<S>> = self.edges.into_iter().filter(|e| e.alive).collect();
        live.sort_by(|a, b| (a.tail, a.head, &a.id).cmp(&(b.tail, b.head, &b.id)));
        let vertices = (0..g.vertex_count()).filter(|&v| !self.removed[v]).map(|v| g.label(v).to_string()).collect();
        let maps_len = live.first().map_or(0, |e| e.weights.len());
        let mut maps: Vec<Vec<S>> = vec![Vec::with_capacity(live.len()); maps_len];
        let mut edges = Vec::with_capacity(live.len());
        for e in live {
            for (m, w) in e.weights.into_iter().enumerate() {
                maps[m].push(w);
            }
            edges.push((e.id, g.label(e.tail).to_string(), g.label(e.head).to_string()));
        }
        let out = Damg::build_unchecked_ids(vertices, edges).expect("projection of a valid graph is valid");
        (out, maps)
    }
}

/// Reverse topological order keeps intermediate parallel-edge counts low.
fn removal_order(set: &[usize]) -> Vec<usize> {
    let mut order = set.to_vec();
    order.sort_unstable();
    order.dedup();
    order.reverse();
    order
}

pub fn project_vertex<S: Scalar>(
    q: &ProjectionKernel<S>,
    w: &ValueFunction<S>,
    z: &str,
) -> Result<ProjectionResult<S>> {
    project_subset(q, w, &[z])
}

pub fn project_subset<S: Scalar, L: AsRef<str>>(
    q: &ProjectionKernel<S>,
    w: &ValueFunction<S>,
    set: &[L],
) -> Result<ProjectionResult<S>> {
    project_subset_with_cap(q, w, set, DEFAULT_EDGE_CAP)
}

/// Projects onto `keep`, removing everything else.
pub fn project_onto<S: Scalar, L: AsRef<str>>(
    q: &ProjectionKernel<S>,
    w: &ValueFunction<S>,
    keep: &[L],
) -> Result<ProjectionResult<S>> {
    let g = q.graph();
    let keep = g.indices_of(keep)?;
    let mut kept = vec![false; g.vertex_count()];
    for v in keep {
        kept[v] = true;
    }
    let remove: Vec<&str> = (0..g.vertex_count()).filter(|&v| !kept[v]).map(|v| g.label(v)).collect();
    project_subset(q, w, &remove)
}

/// Removes `set` leaves-first. At each step the removed vertex's synergy is
/// passed to its current parents: w(x) += q(x|z)·w(z).
pub fn project_subset_with_cap<S: Scalar, L: AsRef<str>>(
    q: &ProjectionKernel<S>,
    w: &ValueFunction<S>,
    set: &[L],
    cap: usize,
) -> Result<ProjectionResult<S>> {
    let g = q.graph();
    g.check_same(w.graph())?;
    let order = removal_order(&g.indices_of(set)?);
    let mut work = Contraction::new(g, &[q.per_edge()], cap);
    let mut synergy: Vec<ModuleValue<S>> = w.values().to_vec();
    for &z in &order {
        let wz = synergy[z].clone();
        for (x, qxz) in work.incoming(z, 0) {
            synergy[x].add_scaled(&qxz, &wz);
        }
        work.remove(z)?;
    }
    let (graph, mut maps) = work.finish(g);
    let per_edge = maps.pop().unwrap_or_default();
    let kernel = ProjectionKernel::with_flag(&graph, per_edge, q.provenance());
    let kept: Vec<ModuleValue<S>> =
        graph.labels().iter().map(|l| g.index_of(l).map(|v| synergy[v].clone())).collect::<Result<_>>()?;
    let synergy = if kept.is_empty() {
        ValueFunction::zero(&graph, w.shape())
    } else {
        ValueFunction::from_values(&graph, kept)?
    };
    let value = synergy.inverse_moebius();
    let mut removed: Vec<usize> = order;
    removed.sort_unstable();
    Ok(ProjectionResult {
        graph,
        kernel,
        synergy,
        value,
        removed: removed.into_iter().map(|v| g.label(v).to_string()).collect(),
    })
}

/// Projects edge weights ς through `set` by the same composition rule as kernels.
pub fn project_edge_weights<S: Scalar, L: AsRef<str>>(
    sigma: &EdgeWeights<S>,
    set: &[L],
    cap: usize,
) -> Result<EdgeWeights<S>> {
    let g = sigma.graph();
    let order = removal_order(&g.indices_of(set)?);
    let mut work = Contraction::new(g, &[sigma.per_edge()], cap);
    for &z in &order {
        work.remove(z)?;
    }
    let (graph, mut maps) = work.finish(g);
    EdgeWeights::from_vec(&graph, maps.pop().unwrap_or_default())
}

/// Parents of every vertex after removing `t`, i.e. nearest non-`t`
/// ancestors reachable through `t`-only interior vertices.
fn parents_after_removal(g: &Damg, t: &[bool]) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    // through[v]: non-t vertices that reach v via t-only interior paths, for v in t.
    let mut through: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut result: Vec<Vec<usize>> = vec![Vec::new(); n];
    for y in 0..n {
        let mut ps: Vec<usize> = Vec::new();
        for &(p, _) in g.parents(y) {
            if t[p] {
                ps.extend_from_slice(&through[p]);
            } else {
                ps.push(p);
            }
        }
        ps.sort_unstable();
        ps.dedup();
        if t[y] {
            through[y] = ps;
        } else {
            result[y] = ps;
        }
    }
    result
}

/// With T = S∖Rt and U = S∩Rt: for every y outside T, if a parent of y in
/// G∖T lies in U then all of them do.
pub fn is_admissible(g: &Damg, set: &[usize]) -> bool {
    let n = g.vertex_count();
    let mut t = vec![false; n];
    let mut u = vec![false; n];
    for &v in set {
        if g.is_root(v) {
            u[v] = true;
        } else {
            t[v] = true;
        }
    }
    let pa = parents_after_removal(g, &t);
    (0..n).filter(|&y| !t[y]).all(|y| {
        let ps = &pa[y];
        !ps.iter().any(|&p| u[p]) || ps.iter().all(|&p| u[p])
    })
}

/// Admissible and containing no complete root-to-leaf path.
pub fn is_restricted_admissible(g: &Damg, set: &[usize]) -> bool {
    if !is_admissible(g, set) {
        return false;
    }
    let n = g.vertex_count();
    let mut member = vec![false; n];
    for &v in set {
        member[v] = true;
    }
    // inside[y]: some root-to-y path lies entirely in the set.
    let mut inside = vec![false; n];
    for y in 0..n {
        inside[y] = member[y] && (g.is_root(y) || g.parents(y).iter().any(|&(p, _)| inside[p]));
    }
    !g.leaves().iter().any(|&l| inside[l])
}

/// Vertices with zero synergy.
pub fn weak_elements<S: Scalar>(v: &ValueFunction<S>) -> Vec<usize> {
    let w = v.moebius_transform();
    (0..w.values().len()).filter(|&x| w.get(x).is_zero()).collect()
}

/// Vertices all of whose descendants are weak.
pub fn null_elements<S: Scalar>(v: &ValueFunction<S>) -> Vec<usize> {
    let g = v.graph();
    let w = v.moebius_transform();
    let n = g.vertex_count();
    let mut null = vec![false; n];
    for x in (0..n).rev() {
        null[x] = w.get(x).is_zero() && g.children(x).iter().all(|&(c, _)| null[c]);
    }
    (0..n).filter(|&x| null[x]).collect()
}

/// Projects weak non-roots out of the graph and kernel while restricting,
/// not projecting, the value function.
pub fn drop_weak<S: Scalar, L: AsRef<str>>(
    q: &ProjectionKernel<S>,
    v: &ValueFunction<S>,
    set: &[L],
) -> Result<(Damg, ProjectionKernel<S>, ValueFunction<S>)> {
    let g = q.graph();
    g.check_same(v.graph())?;
    let idx = g.indices_of(set)?;
    let w = v.moebius_transform();
    for &x in &idx {
        if g.is_root(x) {
            return Err(Error::RootInSet(g.label(x).to_string()));
        }
        if !w.get(x).is_zero() {
            return Err(Error::NotWeak(g.label(x).to_string()));
        }
    }
    let order = removal_order(&idx);
    let mut work = Contraction::new(g, &[q.per_edge()], DEFAULT_EDGE_CAP);
    for &z in &order {
        work.remove(z)?;
    }
    let (graph, mut maps) = work.finish(g);
    let kernel = ProjectionKernel::with_flag(&graph, maps.pop().unwrap_or_default(), q.provenance());
    let restricted = v.restrict_to(&graph)?;
    Ok((graph, kernel, restricted))
}
