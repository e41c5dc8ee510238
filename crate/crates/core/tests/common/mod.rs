#![allow(dead_code)]

use rand::Rng;
use shapdag::generate::{positive_rational, random_damg};
use shapdag::graph::{EdgeWeights, RootWeights};
use shapdag::{Damg, ProjectionKernel, Rational, Scalar};

/// Which kernel a random instance is paired with.
#[derive(Debug, Clone, Copy)]
pub enum KernelKind {
    PathUniform,
    EdgeUniform,
    Induced,
    Random,
}

impl KernelKind {
    pub fn pick(i: usize) -> Self {
        [KernelKind::PathUniform, KernelKind::EdgeUniform, KernelKind::Induced, KernelKind::Random][i % 4]
    }
}

pub struct WeightedInstance {
    pub graph: Damg,
    pub sigma: EdgeWeights<Rational>,
    pub tau: RootWeights<Rational>,
    pub kernel: ProjectionKernel<Rational>,
}

pub fn random_graph<R: Rng>(rng: &mut R, max_vertices: usize) -> Damg {
    let n = rng.random_range(1..=max_vertices);
    let density = rng.random_range(0.1..0.6);
    random_damg(rng, n, density, 3)
}

pub fn random_sigma<R: Rng>(rng: &mut R, g: &Damg) -> EdgeWeights<Rational> {
    let per_edge = (0..g.edge_count()).map(|_| positive_rational(rng)).collect();
    EdgeWeights::from_vec(g, per_edge).unwrap()
}

pub fn random_tau<R: Rng>(rng: &mut R, g: &Damg) -> RootWeights<Rational> {
    let entries: Vec<(String, Rational)> =
        g.roots().iter().map(|&r| (g.label(r).to_string(), positive_rational(rng))).collect();
    RootWeights::from_map(g, entries).unwrap()
}

/// Positive weights normalized over each vertex's in-edges.
pub fn random_normalized_kernel<R: Rng>(rng: &mut R, g: &Damg) -> ProjectionKernel<Rational> {
    let mut per_edge = vec![Rational::zero(); g.edge_count()];
    for y in 0..g.vertex_count() {
        let ins = g.in_edges(y);
        let raw: Vec<Rational> = ins.iter().map(|_| positive_rational(rng)).collect();
        let total = raw.iter().fold(Rational::zero(), |a, b| a + b);
        for (&k, r) in ins.iter().zip(raw) {
            per_edge[k] = r.checked_div(&total).unwrap();
        }
    }
    ProjectionKernel::from_vec(g, per_edge, "random").unwrap()
}

pub fn weighted_instance<R: Rng>(rng: &mut R, g: Damg, kind: KernelKind) -> WeightedInstance {
    let sigma = random_sigma(rng, &g);
    let tau = random_tau(rng, &g);
    let kernel = match kind {
        KernelKind::PathUniform => ProjectionKernel::path_uniform(&g),
        KernelKind::EdgeUniform => ProjectionKernel::edge_uniform(&g),
        KernelKind::Induced => ProjectionKernel::induced(&sigma, &tau).unwrap(),
        KernelKind::Random => random_normalized_kernel(rng, &g),
    };
    WeightedInstance { graph: g, sigma, tau, kernel }
}

/// A random subset of the non-roots, as labels.
pub fn random_non_roots<R: Rng>(rng: &mut R, g: &Damg) -> Vec<String> {
    (0..g.vertex_count()).filter(|&v| !g.is_root(v) && rng.random_bool(0.4)).map(|v| g.label(v).to_string()).collect()
}
