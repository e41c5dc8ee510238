//! The path algebra of a DAMG and Möbius inversion of value functions.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Damg;
use crate::scalar::{ModuleValue, Rational, Scalar, Shape};

/// Above this many vertices, path algebra elements switch to sparse rows.
pub const DENSE_LIMIT: usize = 2048;

/// A scalar function on ancestor pairs `(x, y)` with `x ∈ Anc(y)`.
///
/// Dense storage packs the lower triangle row by row: entry `(x, y)` lives at
/// `y * (y + 1) / 2 + x`. Sparse storage keeps one ordered map per `y`.
#[derive(Clone)]
pub struct PathAlgebraElement<S> {
    graph: Damg,
    storage: Storage<S>,
}

#[derive(Clone)]
enum Storage<S> {
    Dense(Vec<S>),
    Sparse(Vec<BTreeMap<usize, S>>),
}

fn tri(x: usize, y: usize) -> usize {
    y * (y + 1) / 2 + x
}

impl<S: Scalar> PathAlgebraElement<S> {
    pub fn zero(g: &Damg) -> Self {
        let n = g.vertex_count();
        let storage = if n <= DENSE_LIMIT {
            Storage::Dense(vec![S::zero(); n * (n + 1) / 2])
        } else {
            Storage::Sparse(vec![BTreeMap::new(); n])
        };
        PathAlgebraElement { graph: g.clone(), storage }
    }

    /// δ: one on the diagonal.
    pub fn delta(g: &Damg) -> Self {
        let mut d = Self::zero(g);
        for y in 0..g.vertex_count() {
            d.set(y, y, S::one());
        }
        d
    }

    /// ζ: one on every ancestor pair.
    pub fn zeta(g: &Damg) -> Self {
        Self::from_fn(g, |_, _| S::one())
    }

    /// μ, the convolution inverse of ζ. Parallel edges play no role.
    pub fn moebius(g: &Damg) -> Self {
        let n = g.vertex_count();
        let mut mu = Self::zero(g);
        for x in 0..n {
            mu.set(x, x, S::one());
            let desc = g.descendants(x);
            for y in desc.ones().filter(|&y| y != x) {
                let mut between = desc.clone();
                between.intersect_with(g.ancestors(y));
                let mut acc = S::zero();
                for z in between.ones().filter(|&z| z != y) {
                    acc.add_assign_ref(&mu.get_ref(x, z));
                }
                mu.set(x, y, acc.neg_ref());
            }
        }
        mu
    }

    /// Fills every ancestor pair from `f`.
    pub fn from_fn(g: &Damg, f: impl Fn(usize, usize) -> S) -> Self {
        let mut out = Self::zero(g);
        for y in 0..g.vertex_count() {
            for x in g.ancestors(y).ones() {
                let v = f(x, y);
                if !v.is_zero() {
                    out.set(x, y, v);
                }
            }
        }
        out
    }

    pub fn graph(&self) -> &Damg {
        &self.graph
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// Entry `(x, y)`; zero off the support.
    pub fn get(&self, x: usize, y: usize) -> S {
        self.get_ref(x, y)
    }

    fn get_ref(&self, x: usize, y: usize) -> S {
        if x > y {
            return S::zero();
        }
        match &self.storage {
            Storage::Dense(v) => v[tri(x, y)].clone(),
            Storage::Sparse(rows) => rows[y].get(&x).cloned().unwrap_or_else(S::zero),
        }
    }

    pub(crate) fn set(&mut self, x: usize, y: usize, val: S) {
        debug_assert!(self.graph.is_ancestor(x, y), "entry outside the support");
        match &mut self.storage {
            Storage::Dense(v) => v[tri(x, y)] = val,
            Storage::Sparse(rows) => {
                if val.is_zero() {
                    rows[y].remove(&x);
                } else {
                    rows[y].insert(x, val);
                }
            }
        }
    }

    fn add_to(&mut self, x: usize, y: usize, val: &S) {
        if val.is_zero() {
            return;
        }
        let cur = self.get_ref(x, y);
        self.set(x, y, cur.add_ref(val));
    }

    /// Non-zero entries as `(x, y, value)`, ordered by `y` then `x`.
    pub fn entries(&self) -> Vec<(usize, usize, S)> {
        let mut out = Vec::new();
        for y in 0..self.graph.vertex_count() {
            for x in self.graph.ancestors(y).ones() {
                let v = self.get_ref(x, y);
                if !v.is_zero() {
                    out.push((x, y, v));
                }
            }
        }
        out
    }

    /// (f ⋆ g)(x, y) = Σ_z f(x, z)·g(z, y).
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.graph.check_same(&other.graph)?;
        let g = &self.graph;
        let mut out = Self::zero(g);
        for y in 0..g.vertex_count() {
            let anc_y = g.ancestors(y);
            for x in anc_y.ones() {
                let mut acc = S::zero();
                for z in anc_y.ones().filter(|&z| z >= x && g.descendants(x).contains(z)) {
                    let a = self.get_ref(x, z);
                    if !a.is_zero() {
                        acc.add_assign_ref(&a.mul_ref(&other.get_ref(z, y)));
                    }
                }
                if !acc.is_zero() {
                    out.set(x, y, acc);
                }
            }
        }
        Ok(out)
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.graph.same_as(&other.graph)
            && (0..self.graph.vertex_count())
                .all(|y| self.graph.ancestors(y).ones().all(|x| self.get_ref(x, y).approx_eq(&other.get_ref(x, y))))
    }
}

impl<S: Scalar> PartialEq for PathAlgebraElement<S> {
    fn eq(&self, other: &Self) -> bool {
        self.graph.same_as(&other.graph)
            && (0..self.graph.vertex_count())
                .all(|y| self.graph.ancestors(y).ones().all(|x| self.get_ref(x, y) == other.get_ref(x, y)))
    }
}

impl<S: Scalar> fmt::Debug for PathAlgebraElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (x, y, v) in self.entries() {
            m.entry(&format!("({},{})", self.graph.label(x), self.graph.label(y)), &v.to_string());
        }
        m.finish()
    }
}

pub fn moebius_function(g: &Damg) -> PathAlgebraElement<Rational> {
    PathAlgebraElement::moebius(g)
}

/// Solves `e(x, y) = Σ_{k ∈ E(·, y)} e(x, tail k)·weight(k)` with `e(x, x) = 1`.
pub(crate) fn pairwise_recursion<S: Scalar>(g: &Damg, weight: impl Fn(usize) -> S) -> PathAlgebraElement<S> {
    let mut out = PathAlgebraElement::zero(g);
    for y in 0..g.vertex_count() {
        out.set(y, y, S::one());
        for &k in g.in_edges(y) {
            let z = g.edge(k).tail;
            let w = weight(k);
            if w.is_zero() {
                continue;
            }
            for x in g.ancestors(z).ones() {
                let contrib = out.get_ref(x, z).mul_ref(&w);
                out.add_to(x, y, &contrib);
            }
        }
    }
    out
}

/// One row `e(x, ·)` of [`pairwise_recursion`], in O(|E|).
pub(crate) fn row_recursion<S: Scalar>(g: &Damg, x: usize, weight: impl Fn(usize) -> S) -> Vec<S> {
    let n = g.vertex_count();
    let mut row = vec![S::zero(); n];
    row[x] = S::one();
    for y in x + 1..n {
        let mut acc = S::zero();
        for &k in g.in_edges(y) {
            let t = g.edge(k).tail;
            if !row[t].is_zero() {
                acc.add_assign_ref(&row[t].mul_ref(&weight(k)));
            }
        }
        row[y] = acc;
    }
    row
}

// ---------------------------------------------------------------------------
// Value functions
// ---------------------------------------------------------------------------

/// A module-valued function on the vertices of a graph, stored in
/// topological order.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction<S> {
    graph: Damg,
    values: Vec<ModuleValue<S>>,
    shape: Shape,
}

impl<S: Scalar> ValueFunction<S> {
    /// `values[i]` belongs to the vertex at topological position `i`.
    pub fn from_values(g: &Damg, values: Vec<ModuleValue<S>>) -> Result<Self> {
        if values.len() != g.vertex_count() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} values", g.vertex_count()),
                found: format!("{}", values.len()),
            });
        }
        let shape = values.first().map_or(Shape::Scalar, ModuleValue::shape);
        if let Some(bad) = values.iter().find(|v| v.shape() != shape) {
            return Err(Error::ShapeMismatch { expected: shape.to_string(), found: bad.shape().to_string() });
        }
        Ok(ValueFunction { graph: g.clone(), values, shape })
    }

    pub fn from_scalars(g: &Damg, values: Vec<S>) -> Result<Self> {
        Self::from_values(g, values.into_iter().map(ModuleValue::Scalar).collect())
    }

    /// Label-keyed construction; every vertex must be assigned exactly once.
    pub fn from_map<K: AsRef<str>>(g: &Damg, entries: impl IntoIterator<Item = (K, ModuleValue<S>)>) -> Result<Self> {
        let mut slots: Vec<Option<ModuleValue<S>>> = vec![None; g.vertex_count()];
        for (label, val) in entries {
            let v = g.index_of(label.as_ref())?;
            if slots[v].replace(val).is_some() {
                return Err(Error::DuplicateVertex(label.as_ref().to_string()));
            }
        }
        let values = slots
            .into_iter()
            .enumerate()
            .map(|(v, s)| s.ok_or_else(|| Error::MissingValue(g.label(v).to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(g, values)
    }

    pub fn zero(g: &Damg, shape: Shape) -> Self {
        ValueFunction { graph: g.clone(), values: vec![ModuleValue::zero(shape); g.vertex_count()], shape }
    }

    /// ζ_y: one on Desc(y), zero elsewhere.
    pub fn unanimity(g: &Damg, y: &str) -> Result<Self> {
        let y = g.index_of(y)?;
        let desc = g.descendants(y);
        let values = (0..g.vertex_count())
            .map(|x| ModuleValue::Scalar(if desc.contains(x) { S::one() } else { S::zero() }))
            .collect();
        Ok(ValueFunction { graph: g.clone(), values, shape: Shape::Scalar })
    }

    /// δ_y: one at y, zero elsewhere.
    pub fn delta(g: &Damg, y: &str) -> Result<Self> {
        let y = g.index_of(y)?;
        let values =
            (0..g.vertex_count()).map(|x| ModuleValue::Scalar(if x == y { S::one() } else { S::zero() })).collect();
        Ok(ValueFunction { graph: g.clone(), values, shape: Shape::Scalar })
    }

    pub fn graph(&self) -> &Damg {
        &self.graph
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn values(&self) -> &[ModuleValue<S>] {
        &self.values
    }

    pub fn get(&self, v: usize) -> &ModuleValue<S> {
        &self.values[v]
    }

    pub fn get_label(&self, label: &str) -> Result<&ModuleValue<S>> {
        Ok(&self.values[self.graph.index_of(label)?])
    }

    /// Σ over all vertices.
    pub fn total(&self) -> ModuleValue<S> {
        let mut acc = ModuleValue::zero(self.shape);
        for v in &self.values {
            acc.add_assign(v);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(ModuleValue::is_zero)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        self.graph.check_same(&other.graph)?;
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch { expected: self.shape.to_string(), found: other.shape.to_string() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.added(b)).collect();
        Ok(ValueFunction { graph: self.graph.clone(), values, shape: self.shape })
    }

    pub fn scale(&self, c: &S) -> Self {
        let values = self.values.iter().map(|v| v.scaled(c)).collect();
        ValueFunction { graph: self.graph.clone(), values, shape: self.shape }
    }

    /// Scalar game times a fixed module element: x ↦ v(x)·a.
    pub fn tensor(&self, a: &ModuleValue<S>) -> Result<Self> {
        if self.shape != Shape::Scalar {
            return Err(Error::ShapeMismatch { expected: "scalar".into(), found: self.shape.to_string() });
        }
        let values = self.values.iter().map(|v| a.scaled(v.as_scalar().expect("scalar shape"))).collect();
        Ok(ValueFunction { graph: self.graph.clone(), values, shape: a.shape() })
    }

    /// Componentwise scalar conversion, for instance to `f64`.
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ValueFunction<T> {
        ValueFunction {
            graph: self.graph.clone(),
            values: self.values.iter().map(|v| v.map(&f)).collect(),
            shape: self.shape,
        }
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.graph.same_as(&other.graph) && self.values.iter().zip(&other.values).all(|(a, b)| a.approx_eq(b))
    }

    /// The synergy function w(x) = v(x) − Σ_{y ∈ Anc(x)∖x} w(y).
    pub fn moebius_transform(&self) -> Self {
        let g = &self.graph;
        let mut w: Vec<ModuleValue<S>> = Vec::with_capacity(g.vertex_count());
        for x in 0..g.vertex_count() {
            let mut wx = self.values[x].clone();
            match g.parents(x) {
                [] => {}
                // With one parent p, Anc(x)∖x = Anc(p), whose synergies sum to v(p).
                [(p, _)] => wx.sub_assign(&self.values[*p]),
                _ => {
                    let mut acc = ModuleValue::zero(self.shape);
                    for y in g.ancestors(x).ones().filter(|&y| y != x) {
                        acc.add_assign(&w[y]);
                    }
                    wx.sub_assign(&acc);
                }
            }
            w.push(wx);
        }
        ValueFunction { graph: g.clone(), values: w, shape: self.shape }
    }

    /// The value function v(x) = Σ_{y ∈ Anc(x)} w(y).
    pub fn inverse_moebius(&self) -> Self {
        let g = &self.graph;
        let mut v: Vec<ModuleValue<S>> = Vec::with_capacity(g.vertex_count());
        for x in 0..g.vertex_count() {
            let mut vx = self.values[x].clone();
            match g.parents(x) {
                [] => {}
                [(p, _)] => vx.add_assign(&v[*p]),
                _ => {
                    for y in g.ancestors(x).ones().filter(|&y| y != x) {
                        vx.add_assign(&self.values[y]);
                    }
                }
            }
            v.push(vx);
        }
        ValueFunction { graph: g.clone(), values: v, shape: self.shape }
    }

    /// (v ⋆ e)(y) = Σ_{x ∈ Anc(y)} v(x)·e(x, y).
    #[cfg(test)]
    pub(crate) fn apply(&self, e: &PathAlgebraElement<S>) -> Result<Self> {
        self.graph.check_same(&e.graph)?;
        let g = &self.graph;
        let values = (0..g.vertex_count())
            .map(|y| {
                let mut acc = ModuleValue::zero(self.shape);
                for x in g.ancestors(y).ones() {
                    acc.add_scaled(&e.get_ref(x, y), &self.values[x]);
                }
                acc
            })
            .collect();
        Ok(ValueFunction { graph: g.clone(), values, shape: self.shape })
    }

    /// Restriction to an ancestrally closed vertex set, together with the
    /// induced subgraph it lives on.
    pub fn restrict_to_ancestrally_closed<L: AsRef<str>>(&self, keep: &[L]) -> Result<(Damg, Self)> {
        let g = &self.graph;
        let idx = g.indices_of(keep)?;
        let mut member = vec![false; g.vertex_count()];
        for &v in &idx {
            member[v] = true;
        }
        for &v in &idx {
            if g.parents(v).iter().any(|&(p, _)| !member[p]) {
                return Err(Error::NotAncestrallyClosed(g.label(v).to_string()));
            }
        }
        let sub = g.induced_subgraph(&idx);
        let restricted = self.restrict_to(&sub)?;
        Ok((sub, restricted))
    }

    /// Reads this function's values at the vertices of `sub`, matched by label.
    pub fn restrict_to(&self, sub: &Damg) -> Result<Self> {
        let values = sub.labels().iter().map(|l| self.get_label(l).cloned()).collect::<Result<Vec<_>>>()?;
        Ok(ValueFunction { graph: sub.clone(), values, shape: self.shape })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Damg;
    use crate::scalar::rat;

    fn weak_middle() -> Damg {
        Damg::build(
            &["a", "b", "c", "d", "e", "f", "g", "h"],
            &[
                ("ad", "a", "d"),
                ("bd", "b", "d"),
                ("be", "b", "e"),
                ("ce", "c", "e"),
                ("df", "d", "f"),
                ("dg", "d", "g"),
                ("eg", "e", "g"),
                ("eh", "e", "h"),
            ],
        )
        .unwrap()
    }

    fn ints(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| Rational::from(x)).collect()
    }

    fn weak_middle_v() -> ValueFunction<Rational> {
        ValueFunction::from_scalars(&weak_middle(), ints(&[1, 2, 3, 3, 5, 5, 14, 9])).unwrap()
    }

    fn scalars(v: &ValueFunction<Rational>) -> Vec<Rational> {
        v.values().iter().map(|m| m.as_scalar().unwrap().clone()).collect()
    }

    #[test]
    fn weak_middle_transform_and_inverse() {
        let v = weak_middle_v();
        assert_eq!(v.graph().labels(), ["a", "b", "c", "d", "e", "f", "g", "h"]);
        let w = v.moebius_transform();
        assert_eq!(scalars(&w), ints(&[1, 2, 3, 0, 0, 2, 8, 4]));
        assert_eq!(w.inverse_moebius(), v);
    }

    #[test]
    fn reverse_tree_transform() {
        let g = Damg::build(
            &["a", "b", "c", "d", "e"],
            &[("ad", "a", "d"), ("bd", "b", "d"), ("de", "d", "e"), ("ce", "c", "e")],
        )
        .unwrap();
        let v = ValueFunction::from_scalars(&g, ints(&[1, 1, 1, 2, 7])).unwrap();
        assert_eq!(scalars(&v.moebius_transform()), ints(&[1, 1, 1, 0, 4]));
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = weak_middle();
        let z = ValueFunction::<Rational>::zero(&g, Shape::Vector(2));
        assert!(z.moebius_transform().is_zero());
        assert!(z.inverse_moebius().is_zero());
    }

    #[test]
    fn transform_agrees_with_moebius_product() {
        let v = weak_middle_v();
        let mu = moebius_function(v.graph());
        assert_eq!(v.apply(&mu).unwrap(), v.moebius_transform());
        let zeta = PathAlgebraElement::zeta(v.graph());
        assert_eq!(v.moebius_transform().apply(&zeta).unwrap(), v);
    }

    #[test]
    fn poset_moebius_values() {
        let g = Damg::build(
            &["a", "b", "c", "d"],
            &[("ac", "a", "c"), ("ad", "a", "d"), ("bc", "b", "c"), ("bd", "b", "d")],
        )
        .unwrap();
        let mu = moebius_function(&g);
        for (x, y) in [("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")] {
            assert_eq!(mu.get(g.index_of(x).unwrap(), g.index_of(y).unwrap()), rat(-1, 1));
        }
        for x in 0..4 {
            assert_eq!(mu.get(x, x), Rational::one());
        }
    }

    #[test]
    fn zeta_moebius_identity() {
        let g = weak_middle();
        let zeta = PathAlgebraElement::<Rational>::zeta(&g);
        let mu = moebius_function(&g);
        let delta = PathAlgebraElement::delta(&g);
        assert_eq!(zeta.convolve(&mu).unwrap(), delta);
        assert_eq!(mu.convolve(&zeta).unwrap(), delta);
        assert_eq!(zeta.convolve(&delta).unwrap(), zeta);
    }

    #[test]
    fn chain_adjacency_square() {
        let g = Damg::build(&["x", "y", "z"], &[("1", "x", "y"), ("2", "y", "z")]).unwrap();
        let adj = PathAlgebraElement::from_fn(&g, |a, b| Rational::from(g.multiplicity(a, b)));
        let sq = adj.convolve(&adj).unwrap();
        assert_eq!(sq.get(0, 2), Rational::one());
        assert_eq!(sq.get(0, 1), Rational::zero());
    }

    #[test]
    fn convolve_rejects_other_graph() {
        let a = PathAlgebraElement::<Rational>::delta(&weak_middle());
        let b = PathAlgebraElement::<Rational>::delta(&Damg::build::<_, &str>(&["x"], &[]).unwrap());
        assert_eq!(a.convolve(&b).unwrap_err(), Error::BaseMismatch);
    }

    #[test]
    fn sparse_storage_matches_dense_semantics() {
        let n = DENSE_LIMIT + 3;
        let labels: Vec<String> = (0..n).map(|i| format!("v{i:05}")).collect();
        let edges: Vec<(String, String, String)> =
            (1..n).map(|i| (format!("e{i}"), labels[i - 1].clone(), labels[i].clone())).collect();
        let g = Damg::build(&labels, &edges).unwrap();
        let pi = crate::graph::path_counts(&g).pairwise;
        assert!(!pi.is_dense());
        assert_eq!(pi.get(0, n - 1), Rational::one());
        assert_eq!(pi.get(n - 1, 0), Rational::zero());
    }

    #[test]
    fn unanimity_and_delta() {
        let g = weak_middle();
        let u = ValueFunction::<Rational>::unanimity(&g, "e").unwrap();
        let ones: Vec<&str> = (0..8).filter(|&i| !u.get(i).is_zero()).map(|i| g.label(i)).collect();
        assert_eq!(ones, ["e", "g", "h"]);
        assert_eq!(u.moebius_transform(), ValueFunction::delta(&g, "e").unwrap());
        let leaf = ValueFunction::<Rational>::unanimity(&g, "h").unwrap();
        assert_eq!(leaf.total(), ModuleValue::Scalar(Rational::one()));
        assert!(ValueFunction::<Rational>::unanimity(&g, "q").is_err());
    }

    #[test]
    fn restriction_to_ancestral_sets() {
        let v = weak_middle_v();
        let (sub, r) = v.restrict_to_ancestrally_closed(&["a", "b", "d"]).unwrap();
        assert_eq!(sub.edge_count(), 2);
        assert_eq!(scalars(&r.moebius_transform()), ints(&[1, 2, 0]));
        assert_eq!(v.restrict_to_ancestrally_closed(&["a", "d"]).unwrap_err(), Error::NotAncestrallyClosed("d".into()));
        let all = v.graph().labels().to_vec();
        let (same, rv) = v.restrict_to_ancestrally_closed(&all).unwrap();
        assert_eq!(&same, v.graph());
        assert_eq!(rv, v);
    }

    #[test]
    fn value_function_construction_errors() {
        let g = weak_middle();
        assert!(matches!(
            ValueFunction::from_map(&g, [("a", ModuleValue::Scalar(rat(1, 1)))]),
            Err(Error::MissingValue(_))
        ));
        assert!(matches!(
            ValueFunction::from_values(
                &g,
                (0..8)
                    .map(|i| if i == 3 { ModuleValue::Vector(vec![rat(1, 1)]) } else { ModuleValue::Scalar(rat(1, 1)) })
                    .collect()
            ),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
