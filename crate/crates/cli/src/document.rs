//! The JSON graph document: vertices, edges with optional weights, root
//! weights, values and an optional kernel. Rationals travel as strings.

use std::fmt;
use std::marker::PhantomData;

use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use shapdag::{Damg, EdgeWeights, ModuleValue, ProjectionKernel, Rational, RootWeights, Scalar, Shape, ValueFunction};

use crate::error::CliError;

/// A rational carried as a `"p/q"` or integer string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatStr(pub Rational);

impl Serialize for RatStr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for RatStr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = RatStr;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational string such as \"3/4\" or \"-2\"")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<RatStr, E> {
                s.parse().map(RatStr).map_err(|_| E::custom(format!("invalid rational {s:?}")))
            }
        }
        d.deserialize_str(V)
    }
}

/// A JSON object kept in document order, rejecting duplicate keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap<T>(pub Vec<(String, T)>);

impl<T> Default for LabelMap<T> {
    fn default() -> Self {
        LabelMap(Vec::new())
    }
}

impl<T: Serialize> Serialize for LabelMap<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for LabelMap<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V<T>(PhantomData<T>);
        impl<'de, T: Deserialize<'de>> Visitor<'de> for V<T> {
            type Value = LabelMap<T>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object keyed by label")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<LabelMap<T>, A::Error> {
                let mut out: Vec<(String, T)> = Vec::new();
                while let Some(k) = map.next_key::<String>()? {
                    if out.iter().any(|(seen, _)| *seen == k) {
                        return Err(de::Error::custom(format!("duplicate key {k:?}")));
                    }
                    out.push((k, map.next_value()?));
                }
                Ok(LabelMap(out))
            }
        }
        d.deserialize_map(V(PhantomData))
    }
}

/// A scalar string or a list of strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueEntry {
    Scalar(Rational),
    Vector(Vec<Rational>),
}

impl ValueEntry {
    pub fn from_module(m: &ModuleValue<Rational>) -> Self {
        match m {
            ModuleValue::Scalar(x) => ValueEntry::Scalar(x.clone()),
            ModuleValue::Vector(xs) => ValueEntry::Vector(xs.clone()),
        }
    }

    fn into_module(self) -> ModuleValue<Rational> {
        match self {
            ValueEntry::Scalar(x) => ModuleValue::Scalar(x),
            ValueEntry::Vector(xs) => ModuleValue::Vector(xs),
        }
    }
}

impl Serialize for ValueEntry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ValueEntry::Scalar(x) => s.collect_str(x),
            ValueEntry::Vector(xs) => s.collect_seq(xs.iter().map(|x| RatStr(x.clone()))),
        }
    }
}

impl<'de> Deserialize<'de> for ValueEntry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ValueEntry;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational string or a list of rational strings")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<ValueEntry, E> {
                RatStr::deserialize(de::value::StrDeserializer::<E>::new(s)).map(|r| ValueEntry::Scalar(r.0))
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<ValueEntry, A::Error> {
                let mut xs = Vec::new();
                while let Some(RatStr(x)) = seq.next_element()? {
                    xs.push(x);
                }
                Ok(ValueEntry::Vector(xs))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KernelSpec {
    PathUniform,
    EdgeUniform,
    Induced,
    Explicit(LabelMap<RatStr>),
}

impl KernelSpec {
    pub const NAMES: [&'static str; 3] = ["path-uniform", "edge-uniform", "induced"];

    pub fn named(name: &str) -> Option<Self> {
        match name {
            "path-uniform" => Some(KernelSpec::PathUniform),
            "edge-uniform" => Some(KernelSpec::EdgeUniform),
            "induced" => Some(KernelSpec::Induced),
            _ => None,
        }
    }

    pub fn explicit(q: &ProjectionKernel<Rational>) -> Self {
        let g = q.graph();
        KernelSpec::Explicit(LabelMap(
            g.edges().iter().enumerate().map(|(k, e)| (e.id.clone(), RatStr(q.get(k).clone()))).collect(),
        ))
    }
}

impl Serialize for KernelSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            KernelSpec::PathUniform => s.serialize_str("path-uniform"),
            KernelSpec::EdgeUniform => s.serialize_str("edge-uniform"),
            KernelSpec::Induced => s.serialize_str("induced"),
            KernelSpec::Explicit(m) => m.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for KernelSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = KernelSpec;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"path-uniform\", \"edge-uniform\", \"induced\" or an object of edge weights")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<KernelSpec, E> {
                KernelSpec::named(s).ok_or_else(|| E::unknown_variant(s, &KernelSpec::NAMES))
            }
            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<KernelSpec, A::Error> {
                LabelMap::deserialize(de::value::MapAccessDeserializer::new(map)).map(KernelSpec::Explicit)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub id: String,
    pub tail: String,
    pub head: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<RatStr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<EdgeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_weights: Option<LabelMap<RatStr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<LabelMap<ValueEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
}

/// A document checked against the graph it describes.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub graph: Damg,
    pub edge_weights: Option<EdgeWeights<Rational>>,
    pub root_weights: Option<RootWeights<Rational>>,
    pub values: Option<ValueFunction<Rational>>,
    pub kernel: Option<KernelSpec>,
}

impl Loaded {
    pub fn require_values(&self) -> Result<&ValueFunction<Rational>, CliError> {
        self.values.as_ref().ok_or(CliError::Missing("values"))
    }

    /// ς, defaulting to one on every edge.
    pub fn sigma(&self) -> EdgeWeights<Rational> {
        self.edge_weights.clone().unwrap_or_else(|| EdgeWeights::constant(&self.graph, Rational::one()))
    }

    /// τ on the roots, defaulting to one.
    pub fn tau(&self) -> RootWeights<Rational> {
        self.root_weights.clone().unwrap_or_else(|| RootWeights::constant(&self.graph, Rational::one()))
    }
}

pub fn parse_document(text: &str) -> Result<GraphDocument, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::parse(&e))
}

impl GraphDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn load(&self) -> Result<Loaded, CliError> {
        let edges: Vec<(&str, &str, &str)> =
            self.edges.iter().map(|e| (e.id.as_str(), e.tail.as_str(), e.head.as_str())).collect();
        let graph = Damg::build_composed(&self.vertices, &edges)?;
        let edge_weights = if self.edges.iter().any(|e| e.weight.is_some()) {
            let entries = self
                .edges
                .iter()
                .map(|e| (e.id.as_str(), e.weight.as_ref().map_or_else(Rational::one, |w| w.0.clone())));
            Some(EdgeWeights::from_map(&graph, entries)?)
        } else {
            None
        };
        let root_weights = match &self.root_weights {
            Some(m) => Some(RootWeights::from_map(&graph, m.0.iter().map(|(k, v)| (k.as_str(), v.0.clone())))?),
            None => None,
        };
        let values = match &self.values {
            Some(m) => {
                let entries = m.0.iter().map(|(k, v)| (k.as_str(), v.clone().into_module()));
                if graph.vertex_count() == 0 {
                    Some(ValueFunction::zero(&graph, Shape::Scalar))
                } else {
                    Some(ValueFunction::from_map(&graph, entries)?)
                }
            }
            None => None,
        };
        Ok(Loaded { graph, edge_weights, root_weights, values, kernel: self.kernel.clone() })
    }

    /// Canonical document for a graph and its optional weight systems, with
    /// vertices and edges in the graph's stored order.
    pub fn from_parts(
        graph: &Damg,
        edge_weights: Option<&EdgeWeights<Rational>>,
        root_weights: Option<&RootWeights<Rational>>,
        values: Option<&ValueFunction<Rational>>,
        kernel: Option<KernelSpec>,
    ) -> Self {
        let edges = graph
            .edges()
            .iter()
            .enumerate()
            .map(|(k, e)| EdgeEntry {
                id: e.id.clone(),
                tail: graph.label(e.tail).to_string(),
                head: graph.label(e.head).to_string(),
                weight: edge_weights.map(|w| RatStr(w.get(k).clone())),
            })
            .collect();
        GraphDocument {
            vertices: graph.labels().to_vec(),
            edges,
            root_weights: root_weights.map(|t| {
                LabelMap(
                    graph.roots().iter().map(|&r| (graph.label(r).to_string(), RatStr(t.get(r).clone()))).collect(),
                )
            }),
            values: values.map(|v| {
                LabelMap(
                    graph
                        .labels()
                        .iter()
                        .zip(v.values())
                        .map(|(l, m)| (l.clone(), ValueEntry::from_module(m)))
                        .collect(),
                )
            }),
            kernel,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WEAK_MIDDLE: &str = include_str!("../tests/data/weak_middle.json");

    #[test]
    fn parses_and_loads() {
        let doc = parse_document(WEAK_MIDDLE).unwrap();
        let loaded = doc.load().unwrap();
        assert_eq!(loaded.graph.vertex_count(), 8);
        assert_eq!(loaded.values.unwrap().get_label("g").unwrap(), &ModuleValue::Scalar(Rational::from(14)));
        assert!(loaded.edge_weights.is_none());
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_document("{\n  \"vertices\": [\"a\"],\n  \"values\": {\"a\": \"1.5\"}\n}").unwrap_err();
        match err {
            CliError::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("invalid rational"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let dup = parse_document("{\"vertices\": [], \"values\": {\"a\": \"1\", \"a\": \"2\"}}").unwrap_err();
        assert!(dup.to_string().contains("duplicate key"));
        let unknown = parse_document("{\"vertices\": [], \"extra\": 1}").unwrap_err();
        assert!(unknown.to_string().contains("unknown field"));
        let kernel = parse_document("{\"vertices\": [], \"kernel\": \"uniform\"}").unwrap_err();
        assert!(kernel.to_string().contains("unknown variant"));
    }

    #[test]
    fn kernel_forms() {
        let doc = parse_document(
            r#"{"vertices": ["a", "b"], "edges": [{"id": "ab", "tail": "a", "head": "b"}], "kernel": {"ab": "1"}}"#,
        )
        .unwrap();
        assert_eq!(doc.kernel, Some(KernelSpec::Explicit(LabelMap(vec![("ab".into(), RatStr(Rational::one()))]))));
        let named = parse_document(r#"{"vertices": ["a"], "kernel": "induced"}"#).unwrap();
        assert_eq!(named.kernel, Some(KernelSpec::Induced));
    }

    #[test]
    fn canonical_documents_roundtrip() {
        let doc = parse_document(WEAK_MIDDLE).unwrap();
        let loaded = doc.load().unwrap();
        let canon = GraphDocument::from_parts(&loaded.graph, None, None, loaded.values.as_ref(), None);
        let text = canon.to_json();
        assert_eq!(parse_document(&text).unwrap(), canon);
        assert_eq!(parse_document(&text).unwrap().to_json(), text);
    }

    #[test]
    fn partial_edge_weights_default_to_one() {
        let doc = parse_document(
            r#"{"vertices": ["a", "b"], "edges": [{"id": "e1", "tail": "a", "head": "b", "weight": "2/3"},
                {"id": "e2", "tail": "a", "head": "b"}]}"#,
        )
        .unwrap();
        let w = doc.load().unwrap().edge_weights.unwrap();
        assert_eq!(w.per_edge(), [Rational::new(2, 3), Rational::one()]);
    }
}
