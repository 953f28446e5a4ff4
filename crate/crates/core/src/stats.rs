//! Dataset-level statistics: data, schema and structure levels.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::schema::{PropertyKind, SchemaSummary};
use crate::store::{TermId, TripleStore};
use crate::vocab::{self, OWL_SAME_AS};

pub const DEFAULT_TOP_N: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetStats {
    pub data_level: DataLevel,
    pub schema_level: SchemaLevel,
    pub structure_level: StructureLevel,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DataLevel {
    pub triple_count: u64,
    pub distinct_subjects: u64,
    pub distinct_predicates: u64,
    pub distinct_objects: u64,
    /// Triples whose object is a literal.
    pub literal_count: u64,
    /// Distinct blank nodes in subject or object position.
    pub blank_node_count: u64,
    /// Distinct IRIs in subject or object position that are not classes,
    /// predicates or meta-classes.
    pub iri_entity_count: u64,
    pub same_as_triple_count: u64,
    pub typed_entity_count: u64,
    pub untyped_entity_count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Ranked {
    pub iri: String,
    pub count: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SchemaLevel {
    pub class_count: u64,
    pub property_count: u64,
    pub datatype_property_count: u64,
    pub object_property_count: u64,
    pub mixed_property_count: u64,
    /// By direct instance count.
    pub top_classes: Vec<Ranked>,
    /// By triple count.
    pub top_properties: Vec<Ranked>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StructureLevel {
    /// Triples with an IRI subject and an IRI object.
    pub edge_triple_count: u64,
    pub avg_in_degree: f64,
    pub avg_out_degree: f64,
    /// Set when there are no edge triples; the averages are then reported as 0.
    pub degrees_undefined: bool,
    pub top_in_degree_entities: Vec<Ranked>,
    pub top_out_degree_entities: Vec<Ranked>,
}

/// Sorts by descending count, ties by IRI, and keeps the first `top_n`.
pub fn rank(mut items: Vec<Ranked>, top_n: usize) -> Vec<Ranked> {
    items.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.iri.cmp(&b.iri)));
    items.truncate(top_n);
    items
}

pub fn compute_dataset_stats(
    store: &TripleStore,
    summary: &SchemaSummary,
    top_n: usize,
) -> DatasetStats {
    let top_n = top_n.max(1);
    DatasetStats {
        data_level: data_level(store, summary),
        schema_level: schema_level(summary, top_n),
        structure_level: structure_level(store, top_n),
    }
}

fn data_level(store: &TripleStore, summary: &SchemaSummary) -> DataLevel {
    let mut subjects = HashSet::new();
    let mut predicates = HashSet::new();
    let mut objects = HashSet::new();
    let mut literal_count = 0;
    for t in store.encoded() {
        subjects.insert(t.subject);
        predicates.insert(t.predicate);
        objects.insert(t.object);
        if store.term(t.object).is_literal() {
            literal_count += 1;
        }
    }
    let same_as_triple_count = store
        .lookup_iri(OWL_SAME_AS)
        .map_or(0, |p| store.positions_with_predicate(p).len() as u64);

    let mut blank_node_count = 0;
    let mut typed = 0;
    let mut untyped = 0;
    let nodes: HashSet<TermId> = subjects.union(&objects).copied().collect();
    for &id in &nodes {
        let term = store.term(id);
        if term.is_blank() {
            blank_node_count += 1;
            continue;
        }
        let Some(iri) = term.as_iri() else { continue };
        if predicates.contains(&id)
            || summary.classes.contains_key(iri)
            || vocab::is_meta_class(iri)
        {
            continue;
        }
        if summary.is_typed(id) {
            typed += 1;
        } else {
            untyped += 1;
        }
    }

    DataLevel {
        triple_count: store.len() as u64,
        distinct_subjects: subjects.len() as u64,
        distinct_predicates: predicates.len() as u64,
        distinct_objects: objects.len() as u64,
        literal_count,
        blank_node_count,
        iri_entity_count: typed + untyped,
        same_as_triple_count,
        typed_entity_count: typed,
        untyped_entity_count: untyped,
    }
}

fn schema_level(summary: &SchemaSummary, top_n: usize) -> SchemaLevel {
    let kinds =
        |k: PropertyKind| summary.properties.values().filter(|p| p.kind == k).count() as u64;
    let top_classes = rank(
        summary
            .classes
            .values()
            .map(|c| Ranked {
                iri: c.iri.clone(),
                count: c.direct_instance_count,
            })
            .collect(),
        top_n,
    );
    let top_properties = rank(
        summary
            .properties
            .values()
            .map(|p| Ranked {
                iri: p.iri.clone(),
                count: p.triple_count,
            })
            .collect(),
        top_n,
    );
    SchemaLevel {
        class_count: summary.classes.len() as u64,
        property_count: summary.properties.len() as u64,
        datatype_property_count: kinds(PropertyKind::Datatype),
        object_property_count: kinds(PropertyKind::Object),
        mixed_property_count: kinds(PropertyKind::Mixed),
        top_classes,
        top_properties,
    }
}

fn structure_level(store: &TripleStore, top_n: usize) -> StructureLevel {
    let mut out_degree: HashMap<TermId, u64> = HashMap::new();
    let mut in_degree: HashMap<TermId, u64> = HashMap::new();
    let mut edges = 0u64;
    for t in store.encoded() {
        if store.term(t.subject).is_iri() && store.term(t.object).is_iri() {
            edges += 1;
            *out_degree.entry(t.subject).or_default() += 1;
            *in_degree.entry(t.object).or_default() += 1;
        }
    }
    let ranked = |m: &HashMap<TermId, u64>| {
        rank(
            m.iter()
                .map(|(&id, &count)| Ranked {
                    iri: store.term(id).lexical().to_owned(),
                    count,
                })
                .collect(),
            top_n,
        )
    };
    let avg = |n: usize| if n == 0 { 0.0 } else { edges as f64 / n as f64 };
    StructureLevel {
        edge_triple_count: edges,
        avg_in_degree: avg(in_degree.len()),
        avg_out_degree: avg(out_degree.len()),
        degrees_undefined: edges == 0,
        top_in_degree_entities: ranked(&in_degree),
        top_out_degree_entities: ranked(&out_degree),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::infer_schema;
    use crate::store::{ingest, RdfFormat};

    fn stats(nt: &str, top_n: usize) -> DatasetStats {
        let store = ingest(nt.as_bytes(), RdfFormat::NTriples).unwrap();
        let summary = infer_schema(&store);
        compute_dataset_stats(&store, &summary, top_n)
    }

    #[test]
    fn empty_store() {
        let s = stats("", 10);
        assert_eq!(s.data_level, DataLevel::default());
        assert!(s.structure_level.degrees_undefined);
        assert_eq!(
            (
                s.structure_level.avg_in_degree,
                s.structure_level.avg_out_degree
            ),
            (0.0, 0.0)
        );
        assert!(s.schema_level.top_classes.is_empty());
    }

    #[test]
    fn same_as_only() {
        let nt = "<http://ex/a> <http://www.w3.org/2002/07/owl#sameAs> <http://ex/b> .\n\
                  <http://ex/b> <http://www.w3.org/2002/07/owl#sameAs> <http://ex/c> .\n\
                  <http://ex/c> <http://www.w3.org/2002/07/owl#sameAs> <http://ex/a> .\n";
        let s = stats(nt, 10);
        assert_eq!(s.data_level.same_as_triple_count, 3);
        assert_eq!(s.data_level.distinct_predicates, 1);
        assert_eq!(s.data_level.iri_entity_count, 3);
        assert_eq!(s.structure_level.avg_out_degree, 1.0);
    }

    #[test]
    fn degrees_and_rankings() {
        let nt = "<http://ex/a> <http://ex/p> <http://ex/hub> .\n\
                  <http://ex/b> <http://ex/p> <http://ex/hub> .\n\
                  <http://ex/c> <http://ex/p> <http://ex/b> .\n\
                  <http://ex/c> <http://ex/q> \"lit\" .\n\
                  _:x <http://ex/p> <http://ex/hub> .\n";
        let s = stats(nt, 1);
        let st = &s.structure_level;
        assert_eq!(st.edge_triple_count, 3);
        assert_eq!(st.avg_in_degree, 1.5);
        assert_eq!(st.avg_out_degree, 1.0);
        assert_eq!(
            st.top_in_degree_entities,
            [Ranked {
                iri: "http://ex/hub".into(),
                count: 2
            }]
        );
        // a, b, c tie on out-degree 1; the IRI breaks the tie
        assert_eq!(st.top_out_degree_entities[0].iri, "http://ex/a");
        assert_eq!(s.data_level.blank_node_count, 1);
        assert_eq!(s.data_level.literal_count, 1);
    }

    #[test]
    fn typed_and_untyped() {
        let nt = "<http://ex/a> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex/C> .\n\
                  <http://ex/a> <http://ex/knows> <http://ex/b> .\n\
                  <http://ex/C> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#Class> .\n";
        let d = stats(nt, 10).data_level;
        assert_eq!(
            (
                d.typed_entity_count,
                d.untyped_entity_count,
                d.iri_entity_count
            ),
            (1, 1, 2)
        );
    }
}
