//! Standard mereologies and the worked instances used across tests and demos.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::algebra::ValueFunction;
use crate::error::{Error, Result};
use crate::graph::Damg;
use crate::scalar::{Rational, Scalar};

/// Separator between member labels in subset vertex names.
pub const SUBSET_SEP: char = '|';

pub const MAX_POWER_SET_PLAYERS: usize = 20;
pub const MAX_COALITION_BLOCKS: usize = 20;
pub const MAX_ISING_SPINS: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosetSpec {
    pub elements: Vec<String>,
    /// `(lower, upper)` covering pairs.
    pub cover_pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalitionPartition {
    pub players: Vec<String>,
    pub blocks: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsingSpec {
    pub spins: Vec<String>,
    pub interactions: Vec<(Vec<String>, Rational)>,
    pub beta: Rational,
}

/// Canonical subset name: members sorted and joined by `|`.
pub fn subset_label<S: AsRef<str>>(members: &[S]) -> String {
    let mut m: Vec<&str> = members.iter().map(AsRef::as_ref).collect();
    m.sort_unstable();
    m.join(&SUBSET_SEP.to_string())
}

fn edge_id(tail: &str, head: &str) -> String {
    format!("{tail}->{head}")
}

fn check_atoms<S: AsRef<str>>(labels: &[S]) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        let l = l.as_ref();
        if l.is_empty() || l.contains(SUBSET_SEP) {
            return Err(Error::InvalidLabel {
                label: l.to_string(),
                reason: "player labels must be non-empty and free of '|'",
            });
        }
        if !seen.insert(l) {
            return Err(Error::DuplicateVertex(l.to_string()));
        }
    }
    Ok(())
}

/// Boolean algebra over `k` atoms minus the bottom, where atom `i` is named by
/// `names[i]` (already a subset label) and a union is named by its members.
fn boolean_hasse(members: &[Vec<String>]) -> Result<Damg> {
    let k = members.len();
    let full = 1usize << k;
    let names: Vec<String> = (0..full)
        .map(|mask| {
            let set: Vec<&str> =
                (0..k).filter(|i| mask & (1 << i) != 0).flat_map(|i| members[i].iter().map(String::as_str)).collect();
            subset_label(&set)
        })
        .collect();
    let vertices: Vec<&str> = names[1..].iter().map(String::as_str).collect();
    let mut edges = Vec::with_capacity(k * (full / 2));
    for mask in 1..full {
        for i in 0..k {
            if mask & (1 << i) == 0 {
                let up = mask | (1 << i);
                edges.push((edge_id(&names[mask], &names[up]), names[mask].clone(), names[up].clone()));
            }
        }
    }
    Damg::build(&vertices, &edges)
}

/// Non-empty subsets of `players` ordered by covering inclusion.
pub fn power_set_damg<S: AsRef<str>>(players: &[S]) -> Result<Damg> {
    let n = players.len();
    if n == 0 || n > MAX_POWER_SET_PLAYERS {
        return Err(Error::TooLarge { what: "player set", n, max: MAX_POWER_SET_PLAYERS });
    }
    check_atoms(players)?;
    let atoms: Vec<Vec<String>> = players.iter().map(|p| vec![p.as_ref().to_string()]).collect();
    boolean_hasse(&atoms)
}

/// Hasse diagram of a poset given by its covering pairs.
pub fn hasse_damg(spec: &PosetSpec) -> Result<Damg> {
    let edges: Vec<(String, String, String)> =
        spec.cover_pairs.iter().map(|(a, b)| (edge_id(a, b), a.clone(), b.clone())).collect();
    let g = Damg::build(&spec.elements, &edges)?;
    for e in g.edges() {
        let implied = g.children(e.tail).iter().any(|&(c, _)| c != e.head && g.descendants(c).contains(e.head));
        if implied {
            return Err(Error::NotACoverRelation(g.label(e.tail).to_string(), g.label(e.head).to_string()));
        }
    }
    Ok(g)
}

/// Hasse diagram of a lattice with its bottom removed; the atoms become roots.
pub fn lattice_damg(spec: &PosetSpec, bottom: &str) -> Result<Damg> {
    let g = hasse_damg(spec)?;
    let b = g.index_of(bottom)?;
    if g.roots() != [b] {
        return Err(Error::NoUniqueBottom(bottom.to_string()));
    }
    let keep: Vec<usize> = (0..g.vertex_count()).filter(|&v| v != b).collect();
    Ok(g.induced_subgraph(&keep))
}

/// Unions of blocks ordered by covering inclusion; the blocks become roots.
pub fn coalition_damg(part: &CoalitionPartition) -> Result<Damg> {
    check_atoms(&part.players)?;
    let k = part.blocks.len();
    if k == 0 || k > MAX_COALITION_BLOCKS {
        return Err(Error::TooLarge { what: "block count", n: k, max: MAX_COALITION_BLOCKS });
    }
    let players: HashSet<&str> = part.players.iter().map(String::as_str).collect();
    let mut covered: HashSet<&str> = HashSet::new();
    for block in &part.blocks {
        if block.is_empty() {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        for m in block {
            if !players.contains(m.as_str()) {
                return Err(Error::InvalidPartition(format!("{m:?} is not a player")));
            }
            if !covered.insert(m.as_str()) {
                return Err(Error::InvalidPartition(format!("{m:?} is in two blocks")));
            }
        }
    }
    if covered.len() != players.len() {
        return Err(Error::InvalidPartition("blocks do not cover every player".into()));
    }
    boolean_hasse(&part.blocks)
}

/// Power-set graph over the spins with v(y) = β·Σ_{T ⊆ y} J_T, the energy of
/// the configuration with exactly the spins in y set to one.
pub fn ising_game(spec: &IsingSpec) -> Result<(Damg, ValueFunction<Rational>)> {
    let n = spec.spins.len();
    if n > MAX_ISING_SPINS {
        return Err(Error::TooLarge { what: "spin set", n, max: MAX_ISING_SPINS });
    }
    let g = power_set_damg(&spec.spins)?;
    let bit: HashMap<&str, usize> = spec.spins.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut terms: Vec<(usize, &Rational)> = Vec::with_capacity(spec.interactions.len());
    for (subset, j) in &spec.interactions {
        if subset.is_empty() {
            return Err(Error::InvalidLabel { label: String::new(), reason: "interaction over an empty set" });
        }
        let mut mask = 0usize;
        for s in subset {
            mask |= 1 << bit.get(s.as_str()).ok_or_else(|| Error::UnknownVertex(s.clone()))?;
        }
        terms.push((mask, j));
    }
    let values = g
        .labels()
        .iter()
        .map(|label| {
            let mask = label.split(SUBSET_SEP).fold(0usize, |m, s| m | (1 << bit[s]));
            let mut energy = Rational::zero();
            for &(t, j) in &terms {
                if t & !mask == 0 {
                    energy.add_assign_ref(j);
                }
            }
            spec.beta.mul_ref(&energy)
        })
        .collect();
    let v = ValueFunction::from_scalars(&g, values)?;
    Ok((g, v))
}

/// The worked instances with their values.
pub mod instances {
    use super::*;

    fn ints(g: &Damg, xs: &[i64]) -> ValueFunction<Rational> {
        ValueFunction::from_scalars(g, xs.iter().map(|&x| Rational::from(x)).collect()).expect("sizes match")
    }

    /// Three roots, two middle vertices and three leaves; d and e are weak.
    pub fn weak_middle() -> (Damg, ValueFunction<Rational>) {
        let g = Damg::build(
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
        .expect("valid graph");
        let v = ints(&g, &[1, 2, 3, 3, 5, 5, 14, 9]);
        (g, v)
    }

    /// a, b → d; d, c → e.
    pub fn reverse_tree() -> (Damg, ValueFunction<Rational>) {
        let g = Damg::build(
            &["a", "b", "c", "d", "e"],
            &[("ad", "a", "d"), ("bd", "b", "d"), ("de", "d", "e"), ("ce", "c", "e")],
        )
        .expect("valid graph");
        let v = ints(&g, &[1, 1, 1, 2, 7]);
        (g, v)
    }

    /// The reverse tree as a lattice: ⊥ < a, b, c; a, b < ab; ab, c < abc.
    pub fn reverse_tree_lattice() -> (PosetSpec, &'static str) {
        let pairs = [("bot", "a"), ("bot", "b"), ("bot", "c"), ("a", "d"), ("b", "d"), ("d", "e"), ("c", "e")];
        let spec = PosetSpec {
            elements: ["bot", "a", "b", "c", "d", "e"].map(String::from).to_vec(),
            cover_pairs: pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        };
        (spec, "bot")
    }

    /// Two minimal and two maximal elements, every lower below every upper.
    pub fn poset_game() -> (Damg, ValueFunction<Rational>) {
        let spec = PosetSpec {
            elements: ["a", "b", "c", "d"].map(String::from).to_vec(),
            cover_pairs: [("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")]
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        };
        let g = hasse_damg(&spec).expect("valid poset");
        let v = ints(&g, &[2, 1, 4, 5]);
        (g, v)
    }

    /// J_ab = J_ac = J_ad = 1 and J_bcd = `x`.
    pub fn ising_four_spins(x: Rational, beta: Rational) -> IsingSpec {
        let pair = |a: &str, b: &str| vec![a.to_string(), b.to_string()];
        IsingSpec {
            spins: ["a", "b", "c", "d"].map(String::from).to_vec(),
            interactions: vec![
                (pair("a", "b"), Rational::one()),
                (pair("a", "c"), Rational::one()),
                (pair("a", "d"), Rational::one()),
                (vec!["b".into(), "c".into(), "d".into()], x),
            ],
            beta,
        }
    }
}

/// Label-level edge multiset, handy for comparing graphs up to edge ids.
pub fn edge_pairs(g: &Damg) -> Vec<(String, String)> {
    let mut pairs: Vec<(String, String)> =
        g.edges().iter().map(|e| (g.label(e.tail).to_string(), g.label(e.head).to_string())).collect();
    pairs.sort();
    pairs
}

/// Members of a subset vertex name.
pub fn members(label: &str) -> BTreeSet<&str> {
    label.split(SUBSET_SEP).collect()
}
