//! Dataset-description metadata mined from well-known vocabulary
//! predicates.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::{TermId, TripleStore};
use crate::term::Term;
use crate::vocab::{DCAT_DATASET, OWL_SAME_AS, RDF_TYPE, VOID_DATASET};

const DEFAULT_TABLE: &str = include_str!("../data/metadata-predicates.json");

/// `rdf:type` objects marking a subject as a dataset description.
pub const DATASET_TYPES: &[&str] = &[
    VOID_DATASET,
    DCAT_DATASET,
    "http://rdfs.org/ns/void#Linkset",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Licensing,
    Provenance,
    Linking,
    Availability,
    Description,
    Other,
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("invalid predicate table: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("predicate {0} is listed under more than one category")]
    Duplicate(String),
}

/// Predicate IRI to category mapping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateTable {
    categories: HashMap<String, Category>,
}

impl PredicateTable {
    /// Parses `{"Category": ["predicate IRI", ...], ...}`.
    pub fn from_json(json: &str) -> Result<Self, TableError> {
        let raw: BTreeMap<Category, Vec<String>> = serde_json::from_str(json)?;
        let mut categories = HashMap::new();
        for (category, predicates) in raw {
            for p in predicates {
                if categories.insert(p.clone(), category).is_some() {
                    return Err(TableError::Duplicate(p));
                }
            }
        }
        Ok(PredicateTable { categories })
    }

    pub fn category(&self, predicate: &str) -> Option<Category> {
        self.categories.get(predicate).copied()
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }
}

impl Default for PredicateTable {
    fn default() -> Self {
        PredicateTable::from_json(DEFAULT_TABLE).expect("bundled predicate table is valid")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MetadataEntry {
    pub category: Category,
    pub predicate_iri: String,
    /// IRI, or `_:label` for a blank node.
    pub subject_iri: String,
    pub value: Term,
    pub value_text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetMetadata {
    pub entries: Vec<MetadataEntry>,
    pub no_metadata_found: bool,
    /// Whether entries were restricted to subjects typed as datasets.
    pub from_dataset_descriptions: bool,
    /// Linking evidence outside the table: number of `owl:sameAs` triples.
    pub same_as_triple_count: u64,
}

pub fn extract_metadata(store: &TripleStore) -> DatasetMetadata {
    extract_metadata_with(store, &PredicateTable::default())
}

pub fn extract_metadata_with(store: &TripleStore, table: &PredicateTable) -> DatasetMetadata {
    let mut candidates: Vec<(Category, u32)> = Vec::new();
    for pid in store.predicate_ids() {
        if let Some(category) = store.term(pid).as_iri().and_then(|p| table.category(p)) {
            candidates.extend(
                store
                    .positions_with_predicate(pid)
                    .iter()
                    .map(|&pos| (category, pos)),
            );
        }
    }

    let dataset_subjects: HashSet<TermId> = match store.lookup_iri(RDF_TYPE) {
        Some(type_pid) => DATASET_TYPES
            .iter()
            .filter_map(|t| store.lookup_iri(t))
            .flat_map(|t| store.positions_with_object(t))
            .map(|&pos| store.encoded_at(pos))
            .filter(|t| t.predicate == type_pid)
            .map(|t| t.subject)
            .collect(),
        None => HashSet::new(),
    };
    let from_dataset_descriptions = candidates
        .iter()
        .any(|&(_, pos)| dataset_subjects.contains(&store.encoded_at(pos).subject));
    if from_dataset_descriptions {
        candidates.retain(|&(_, pos)| dataset_subjects.contains(&store.encoded_at(pos).subject));
    }

    let mut entries: Vec<MetadataEntry> = candidates
        .into_iter()
        .map(|(category, pos)| {
            let t = store.triple_at(pos);
            MetadataEntry {
                category,
                predicate_iri: t.predicate.lexical().to_owned(),
                subject_iri: t.subject.display_text(),
                value: t.object.clone(),
                value_text: t.object.lexical().to_owned(),
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        (
            a.category,
            &a.predicate_iri,
            &a.subject_iri,
            &a.value_text,
            &a.value,
        )
            .cmp(&(
                b.category,
                &b.predicate_iri,
                &b.subject_iri,
                &b.value_text,
                &b.value,
            ))
    });

    DatasetMetadata {
        no_metadata_found: entries.is_empty(),
        entries,
        from_dataset_descriptions,
        same_as_triple_count: store
            .lookup_iri(OWL_SAME_AS)
            .map_or(0, |p| store.positions_with_predicate(p).len() as u64),
    }
}
