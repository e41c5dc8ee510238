//! Seeded random instances for property tests, demos and benchmarks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::ValueFunction;
use crate::graph::Damg;
use crate::scalar::{ModuleValue, Rational, Shape};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Numerator in [-20, 20], denominator in [1, 6].
pub fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    Rational::new(rng.random_range(-20..=20), rng.random_range(1..=6))
}

/// Strictly positive variant of [`small_rational`].
pub fn positive_rational<R: Rng>(rng: &mut R) -> Rational {
    Rational::new(rng.random_range(1..=20), rng.random_range(1..=6))
}

fn vertex_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i:02}")).collect()
}

/// `n` vertices; each forward pair gets an edge bundle with probability
/// `density`, of multiplicity 1 to `max_multiplicity`.
pub fn random_damg<R: Rng>(rng: &mut R, n: usize, density: f64, max_multiplicity: usize) -> Damg {
    let labels = vertex_labels(n);
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..j {
            if rng.random_bool(density) {
                for _ in 0..rng.random_range(1..=max_multiplicity) {
                    edges.push((format!("e{}", edges.len()), labels[i].clone(), labels[j].clone()));
                }
            }
        }
    }
    Damg::build(&labels, &edges).expect("forward edges are acyclic")
}

/// Bipartite graph from `roots` roots to `leaves` leaves with multiplicities
/// 0 to 3; every leaf receives at least one edge.
pub fn random_flat_damg<R: Rng>(rng: &mut R, roots: usize, leaves: usize) -> Damg {
    let r: Vec<String> = (0..roots).map(|i| format!("r{i:02}")).collect();
    let l: Vec<String> = (0..leaves).map(|i| format!("l{i:02}")).collect();
    let mut edges = Vec::new();
    for leaf in &l {
        let mut any = false;
        for root in &r {
            let m = rng.random_range(0..=3);
            for _ in 0..m {
                edges.push((format!("e{}", edges.len()), root.clone(), leaf.clone()));
                any = true;
            }
        }
        if !any {
            let root = &r[rng.random_range(0..roots)];
            edges.push((format!("e{}", edges.len()), root.clone(), leaf.clone()));
        }
    }
    let vertices: Vec<String> = r.into_iter().chain(l).collect();
    Damg::build(&vertices, &edges).expect("bipartite graphs are acyclic")
}

pub fn random_game<R: Rng>(rng: &mut R, g: &Damg, shape: Shape) -> ValueFunction<Rational> {
    let values = (0..g.vertex_count())
        .map(|_| match shape {
            Shape::Scalar => ModuleValue::Scalar(small_rational(rng)),
            Shape::Vector(k) => ModuleValue::Vector((0..k).map(|_| small_rational(rng)).collect()),
        })
        .collect();
    ValueFunction::from_values(g, values).expect("one value per vertex")
}

/// Path x₀ → x₁ → … → x_{n−1}.
pub fn chain_damg(n: usize) -> Damg {
    let labels: Vec<String> = (0..n).map(|i| format!("x{i:05}")).collect();
    let edges: Vec<(String, String, String)> =
        (1..n).map(|i| (format!("e{i}"), labels[i - 1].clone(), labels[i].clone())).collect();
    Damg::build(&labels, &edges).expect("a path is acyclic")
}

/// `width` roots followed by layers of `width` vertices until `total`
/// vertices exist. Vertex `i` of a layer has parents `i` and `i + 1 (mod
/// width)` in the previous layer.
pub fn layered_damg(width: usize, total: usize) -> Damg {
    let label = |layer: usize, i: usize| format!("L{layer:04}_{i:03}");
    let mut vertices = Vec::with_capacity(total);
    let mut edges = Vec::new();
    let mut layer = 0;
    while vertices.len() < total {
        for i in 0..width {
            if vertices.len() == total {
                break;
            }
            vertices.push(label(layer, i));
            if layer > 0 {
                for p in [i, (i + 1) % width] {
                    edges.push((format!("e{}", edges.len()), label(layer - 1, p), label(layer, i)));
                }
            }
        }
        layer += 1;
    }
    Damg::build(&vertices, &edges).expect("layered graphs are acyclic")
}
