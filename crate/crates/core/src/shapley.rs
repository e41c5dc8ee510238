//! Shapley values on projectable DAMGs, by every available engine, plus two
//! independent oracles: the classic Boolean-lattice formulas and the
//! maximal-chain average on lattices.

use std::fmt;

use crate::algebra::ValueFunction;
use crate::error::{Error, Result};
use crate::graph::{
    extend_root_weights, kernel_total_weight_row, path_count_row, root_path_counts, total_path_weight_row, Damg,
    EdgeWeights, ProjectionKernel, RootWeights,
};
use crate::scalar::{ModuleValue, Rational, Scalar, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    TotalWeights,
    RecursiveProjection,
    PathUniform,
    Weighted,
    ClassicOracle,
    ChainComparator,
}

impl Engine {
    pub fn tag(self) -> &'static str {
        match self {
            Engine::TotalWeights => "total-weights",
            Engine::RecursiveProjection => "recursive-projection",
            Engine::PathUniform => "path-uniform",
            Engine::Weighted => "weighted",
            Engine::ClassicOracle => "classic-oracle",
            Engine::ChainComparator => "chain-comparator",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Root-indexed attributions, sorted by root label.
#[derive(Debug, Clone, PartialEq)]
pub struct Attribution<S> {
    pub graph: Damg,
    pub per_root: Vec<(String, ModuleValue<S>)>,
    pub engine: Engine,
    pub kernel_provenance: String,
}

impl<S: Scalar> Attribution<S> {
    fn from_buffer(g: &Damg, buf: &[ModuleValue<S>], engine: Engine, provenance: &str) -> Self {
        let mut per_root: Vec<(String, ModuleValue<S>)> =
            g.roots().iter().map(|&r| (g.label(r).to_string(), buf[r].clone())).collect();
        per_root.sort_by(|a, b| a.0.cmp(&b.0));
        Attribution { graph: g.clone(), per_root, engine, kernel_provenance: provenance.to_string() }
    }

    pub fn get(&self, root: &str) -> Option<&ModuleValue<S>> {
        self.per_root.iter().find(|(l, _)| l == root).map(|(_, v)| v)
    }

    pub fn scalar(&self, root: &str) -> Option<&S> {
        self.get(root).and_then(ModuleValue::as_scalar)
    }

    pub fn total(&self) -> ModuleValue<S> {
        let shape = self.per_root.first().map_or(Shape::Scalar, |(_, v)| v.shape());
        let mut acc = ModuleValue::zero(shape);
        for (_, v) in &self.per_root {
            acc.add_assign(v);
        }
        acc
    }

    /// Same roots and values, ignoring engine and provenance.
    pub fn same_values(&self, other: &Self) -> bool {
        self.per_root.len() == other.per_root.len()
            && self.per_root.iter().zip(&other.per_root).all(|((a, x), (b, y))| a == b && x.approx_eq(y))
    }
}

fn check_inputs<S: Scalar>(q: &ProjectionKernel<S>, v: &ValueFunction<S>) -> Result<()> {
    q.graph().check_same(v.graph())?;
    q.check_normalized()
}

/// Shapley values with the total path weights s(r|·) precomputed once, for
/// evaluating many games on one weighted graph.
pub struct TotalWeightsEngine<S> {
    kernel: ProjectionKernel<S>,
    rows: Vec<(usize, Vec<S>)>,
}

impl<S: Scalar> TotalWeightsEngine<S> {
    pub fn new(q: &ProjectionKernel<S>) -> Result<Self> {
        q.check_normalized()?;
        let g = q.graph();
        let rows = g.roots().iter().map(|&r| (r, kernel_total_weight_row(q, r))).collect();
        Ok(TotalWeightsEngine { kernel: q.clone(), rows })
    }

    /// s(r|y) for a root r.
    pub fn coefficient(&self, r: usize, y: usize) -> Option<&S> {
        self.rows.iter().find(|(root, _)| *root == r).map(|(_, row)| &row[y])
    }

    /// Sh_r = Σ_y s(r|y)·w(y).
    pub fn attribute(&self, v: &ValueFunction<S>) -> Result<Attribution<S>> {
        let g = self.kernel.graph();
        g.check_same(v.graph())?;
        let w = v.moebius_transform();
        let mut buf = vec![ModuleValue::zero(v.shape()); g.vertex_count()];
        for (r, row) in &self.rows {
            for (y, s) in row.iter().enumerate() {
                buf[*r].add_scaled(s, w.get(y));
            }
        }
        Ok(Attribution::from_buffer(g, &buf, Engine::TotalWeights, self.kernel.provenance()))
    }
}

pub fn shapley_total_weights<S: Scalar>(q: &ProjectionKernel<S>, v: &ValueFunction<S>) -> Result<Attribution<S>> {
    check_inputs(q, v)?;
    TotalWeightsEngine::new(q)?.attribute(v)
}

/// Projects every non-root away, leaves first, passing synergy to parents
/// through the kernel. Uses O(|V|) working memory and O(|E|) time after the
/// Möbius transform.
pub fn shapley_recursive<S: Scalar>(q: &ProjectionKernel<S>, v: &ValueFunction<S>) -> Result<Attribution<S>> {
    check_inputs(q, v)?;
    let g = q.graph();
    let mut buf: Vec<ModuleValue<S>> = v.moebius_transform().values().to_vec();
    for z in (0..g.vertex_count()).rev() {
        if g.is_root(z) || buf[z].is_zero() {
            continue;
        }
        let wz = std::mem::replace(&mut buf[z], ModuleValue::zero(v.shape()));
        for &k in g.in_edges(z) {
            buf[g.edge(k).tail].add_scaled(q.get(k), &wz);
        }
    }
    Ok(Attribution::from_buffer(g, &buf, Engine::RecursiveProjection, q.provenance()))
}

/// Sh_r = Σ_y π(r, y)/π(y)·w(y), without building a kernel.
pub fn shapley_path_uniform<S: Scalar>(v: &ValueFunction<S>) -> Result<Attribution<S>> {
    let g = v.graph();
    let w = v.moebius_transform();
    let pi = root_path_counts(g);
    let mut buf = vec![ModuleValue::zero(v.shape()); g.vertex_count()];
    for &r in g.roots() {
        let row = path_count_row(g, r);
        for (y, count) in row.iter().enumerate() {
            if count.is_zero() {
                continue;
            }
            let coef = count.checked_div(&pi[y]).expect("path counts are positive");
            buf[r].add_scaled(&S::from_rational(&coef), w.get(y));
        }
    }
    Ok(Attribution::from_buffer(g, &buf, Engine::PathUniform, "path-uniform"))
}

/// Sh_r = Σ_y τ(r)·σ(r, y)/τ(y)·w(y) with τ extended by the strength recursion.
pub fn shapley_weighted<S: Scalar>(
    sigma: &EdgeWeights<Rational>,
    tau: &RootWeights<Rational>,
    v: &ValueFunction<S>,
) -> Result<Attribution<S>> {
    let g = v.graph();
    g.check_same(sigma.graph())?;
    let strength = extend_root_weights(sigma, tau)?;
    if let Some(y) = (0..g.vertex_count()).find(|&y| strength.get(y).is_zero()) {
        return Err(Error::ZeroStrength(g.label(y).to_string()));
    }
    let w = v.moebius_transform();
    let mut buf = vec![ModuleValue::zero(v.shape()); g.vertex_count()];
    for &r in g.roots() {
        let row = total_path_weight_row(sigma, r);
        for (y, s) in row.iter().enumerate() {
            if s.is_zero() {
                continue;
            }
            let coef = strength.get(r).mul_ref(s).checked_div(strength.get(y)).expect("strengths checked non-zero");
            buf[r].add_scaled(&S::from_rational(&coef), w.get(y));
        }
    }
    Ok(Attribution::from_buffer(g, &buf, Engine::Weighted, "induced"))
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

pub const MAX_ORACLE_PLAYERS: usize = 10;

/// Reads a power-set graph as a table indexed by player bitmask. Players are
/// the roots in label order; each vertex label lists its members joined by `|`.
fn power_set_table<S: Scalar>(n: usize, v: &ValueFunction<S>) -> Result<(Vec<String>, Vec<ModuleValue<S>>)> {
    let g = v.graph();
    if n > MAX_ORACLE_PLAYERS {
        return Err(Error::TooManyPlayers { n, max: MAX_ORACLE_PLAYERS });
    }
    let mut players: Vec<String> = g.roots().iter().map(|&r| g.label(r).to_string()).collect();
    players.sort();
    if players.len() != n || g.vertex_count() != (1usize << n) - 1 {
        return Err(Error::NotAPowerSet);
    }
    let mut table: Vec<Option<ModuleValue<S>>> = vec![None; 1 << n];
    table[0] = Some(ModuleValue::zero(v.shape()));
    for y in 0..g.vertex_count() {
        let mut mask = 0usize;
        for member in g.label(y).split('|') {
            let i = players.binary_search_by(|p| p.as_str().cmp(member)).map_err(|_| Error::NotAPowerSet)?;
            mask |= 1 << i;
        }
        if table[mask].replace(v.get(y).clone()).is_some() {
            return Err(Error::NotAPowerSet);
        }
    }
    let table = table.into_iter().collect::<Option<Vec<_>>>().ok_or(Error::NotAPowerSet)?;
    Ok((players, table))
}

/// Σ_{i ∈ y} w(y)/|y| with w from the subset Möbius formula.
fn classic_synergy_form<S: Scalar>(n: usize, table: &[ModuleValue<S>]) -> Vec<ModuleValue<S>> {
    let shape = table[0].shape();
    let full = 1usize << n;
    let mut out = vec![ModuleValue::zero(shape); n];
    for y in 1..full {
        let mut w = ModuleValue::zero(shape);
        // Enumerate subsets t of y, including the empty set.
        let mut t = y;
        loop {
            let sign_negative = (y & !t).count_ones() % 2 == 1;
            if sign_negative {
                w.sub_assign(&table[t]);
            } else {
                w.add_assign(&table[t]);
            }
            if t == 0 {
                break;
            }
            t = (t - 1) & y;
        }
        let share = w.scaled(&S::from_rational(&Rational::new(1, y.count_ones() as i64)));
        for (i, slot) in out.iter_mut().enumerate() {
            if y & (1 << i) != 0 {
                slot.add_assign(&share);
            }
        }
    }
    out
}

/// Average marginal contribution over all n! orderings.
fn classic_permutation_form<S: Scalar>(n: usize, table: &[ModuleValue<S>]) -> Vec<ModuleValue<S>> {
    let shape = table[0].shape();
    let mut sums = vec![ModuleValue::zero(shape); n];
    let mut perm: Vec<usize> = (0..n).collect();
    let mut visit = |perm: &[usize]| {
        let mut s = 0usize;
        for &p in perm {
            let next = s | (1 << p);
            sums[p].add_assign(&table[next]);
            sums[p].sub_assign(&table[s]);
            s = next;
        }
    };
    // Heap's algorithm.
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let factorial: i64 = (1..=n as i64).product();
    let inv = S::from_rational(&Rational::new(1, factorial));
    sums.iter().map(|s| s.scaled(&inv)).collect()
}

/// Classic Shapley values of a game on the power-set graph over `n` players.
///
/// Computes both the synergy form and the permutation form independently of
/// the graph machinery and fails unless they agree.
pub fn classic_shapley_oracle<S: Scalar>(n: usize, v: &ValueFunction<S>) -> Result<Attribution<S>> {
    let (players, table) = power_set_table(n, v)?;
    let synergy = classic_synergy_form(n, &table);
    let permutation = classic_permutation_form(n, &table);
    for (i, (a, b)) in synergy.iter().zip(&permutation).enumerate() {
        if !a.approx_eq(b) {
            return Err(Error::OracleDisagreement(players[i].clone()));
        }
    }
    let g = v.graph();
    let per_root = players.into_iter().zip(synergy).collect();
    Ok(Attribution { graph: g.clone(), per_root, engine: Engine::ClassicOracle, kernel_provenance: "none".to_string() })
}

pub const DEFAULT_CHAIN_CAP: usize = 1_000_000;

/// Average over maximal chains ⊥ < c₁ < … < c_k of the marginal contribution
/// (v(S) − v(T))/|S∖T|, where S is the first chain element above root i and
/// T its predecessor. ⊥ is added internally with v(⊥) = 0, and |S∖T| counts
/// the roots below S but not below T.
///
/// A root that lies below no element of a chain contributes zero for it.
pub fn chain_shapley_comparator<S: Scalar>(v: &ValueFunction<S>, cap: usize) -> Result<Attribution<S>> {
    let g = v.graph();
    let n = g.vertex_count();
    // Chains are distinct-vertex paths: parallel edges do not create new chains.
    let mut count = vec![0u128; n];
    for x in (0..n).rev() {
        count[x] = if g.is_leaf(x) {
            1
        } else {
            g.children(x).iter().map(|&(c, _)| count[c]).fold(0u128, u128::saturating_add)
        };
    }
    let total = g.roots().iter().map(|&r| count[r]).fold(0u128, u128::saturating_add);
    if total > cap as u128 {
        return Err(Error::ChainExplosion { cap });
    }
    let roots_below: Vec<usize> = (0..n).map(|x| g.ancestors(x).ones().filter(|&a| g.is_root(a)).count()).collect();
    let shape = v.shape();
    let zero = ModuleValue::zero(shape);
    let mut sums = vec![ModuleValue::zero(shape); n];

    let mut chain: Vec<usize> = Vec::new();
    let mut visit = |chain: &[usize]| {
        for &i in g.roots() {
            let Some(j) = chain.iter().position(|&c| g.ancestors(c).contains(i)) else {
                continue;
            };
            let s = chain[j];
            let (vt, below_t) = if j == 0 { (&zero, 0) } else { (v.get(chain[j - 1]), roots_below[chain[j - 1]]) };
            let mut diff = v.get(s).clone();
            diff.sub_assign(vt);
            let size = (roots_below[s] - below_t) as i64;
            sums[i].add_scaled(&S::from_rational(&Rational::new(1, size)), &diff);
        }
    };
    fn walk(g: &Damg, x: usize, chain: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        chain.push(x);
        if g.is_leaf(x) {
            visit(chain);
        } else {
            for &(c, _) in g.children(x) {
                walk(g, c, chain, visit);
            }
        }
        chain.pop();
    }
    for &r in g.roots() {
        walk(g, r, &mut chain, &mut visit);
    }
    let inv = S::from_rational(&Rational::new(1, total as i64));
    let buf: Vec<ModuleValue<S>> = sums.iter().map(|s| s.scaled(&inv)).collect();
    Ok(Attribution::from_buffer(g, &buf, Engine::ChainComparator, "maximal-chains"))
}
