//! Class and property facets, and resolution of a facet selection into the
//! point set a hierarchy is built over.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::points::{AxisNumber, Point, PointSet};
use crate::schema::{SchemaError, SchemaSummary};
use crate::store::{TermId, TripleStore};
use crate::term::Term;
use crate::value::{format_epoch_millis, literal_value, MalformedTally, ValueKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FacetError {
    #[error("unknown property facet: {0}")]
    UnknownProperty(String),
    #[error("unknown class: {0}")]
    UnknownClass(String),
}

impl From<SchemaError> for FacetError {
    fn from(e: SchemaError) -> Self {
        match e {
            SchemaError::UnknownClass(c) => FacetError::UnknownClass(c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassFacet {
    pub iri: String,
    pub instance_count: u64,
    pub children: Vec<ClassFacet>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyFacet {
    pub iri: String,
    pub literal_kind: ValueKind,
    pub triple_count: u64,
    pub distinct_subject_count: u64,
    pub min: Option<AxisNumber>,
    pub max: Option<AxisNumber>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_iso: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iso: Option<String>,
    /// Triples of the property whose object does not parse to the facet's
    /// kind (resources, unrelated or malformed literals).
    pub skipped_literals: u64,
    pub domains: BTreeSet<String>,
    pub ranges: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FacetCatalog {
    pub class_facets: Vec<ClassFacet>,
    pub property_facets: Vec<PropertyFacet>,
}

impl FacetCatalog {
    pub fn property(&self, iri: &str) -> Option<&PropertyFacet> {
        self.property_facets.iter().find(|f| f.iri == iri)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FacetSelection {
    /// Empty means no class filter; several classes combine by union.
    pub class_iris: BTreeSet<String>,
    pub property_iri: String,
}

impl FacetSelection {
    pub fn property(iri: impl Into<String>) -> Self {
        FacetSelection {
            class_iris: BTreeSet::new(),
            property_iri: iri.into(),
        }
    }

    pub fn with_classes<I, S>(mut self, classes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.class_iris.extend(classes.into_iter().map(Into::into));
        self
    }
}

fn class_facet(summary: &SchemaSummary, iri: &str) -> ClassFacet {
    let mut children: Vec<ClassFacet> = summary
        .children_of(iri)
        .map(|c| class_facet(summary, c))
        .collect();
    sort_facets(&mut children);
    ClassFacet {
        iri: iri.to_owned(),
        instance_count: summary.classes[iri].transitive_instance_count,
        children,
    }
}

fn sort_facets(facets: &mut [ClassFacet]) {
    facets.sort_by(|a, b| {
        b.instance_count
            .cmp(&a.instance_count)
            .then_with(|| a.iri.cmp(&b.iri))
    });
}

pub fn build_facets(_store: &TripleStore, summary: &SchemaSummary) -> FacetCatalog {
    let mut class_facets: Vec<ClassFacet> = summary
        .root_classes()
        .into_iter()
        .map(|c| class_facet(summary, c))
        .collect();
    sort_facets(&mut class_facets);

    let property_facets = summary
        .properties
        .values()
        .filter_map(|p| {
            let kind = p.literal_kind?.value_kind()?;
            if p.triple_count == 0 {
                return None;
            }
            let bound = |v: Option<crate::TypedValue>| v.and_then(|v| v.axis_value());
            let (min, max) = (bound(p.value_min), bound(p.value_max));
            let iso = |v: Option<f64>| match kind {
                ValueKind::Temporal => v.map(|ms| format_epoch_millis(ms as i64)),
                ValueKind::Numeric => None,
            };
            Some(PropertyFacet {
                iri: p.iri.clone(),
                literal_kind: kind,
                triple_count: p.triple_count,
                distinct_subject_count: p.distinct_subject_count,
                min: min.map(AxisNumber),
                max: max.map(AxisNumber),
                min_iso: iso(min),
                max_iso: iso(max),
                skipped_literals: p.triple_count - p.value_count,
                domains: p.domains.clone(),
                ranges: p.ranges.clone(),
            })
        })
        .collect();

    FacetCatalog {
        class_facets,
        property_facets,
    }
}

/// Resolves a selection into points: every triple of the selected property
/// whose object parses to the facet's kind, restricted to instances of the
/// selected classes' subtrees when any are given.
pub fn resolve_selection(
    store: &TripleStore,
    summary: &SchemaSummary,
    selection: &FacetSelection,
) -> Result<PointSet, FacetError> {
    let unknown = || FacetError::UnknownProperty(selection.property_iri.clone());
    let info = summary
        .property(&selection.property_iri)
        .ok_or_else(unknown)?;
    let kind = info
        .literal_kind
        .and_then(|k| k.value_kind())
        .ok_or_else(unknown)?;

    let allowed: Option<HashSet<TermId>> = if selection.class_iris.is_empty() {
        None
    } else {
        Some(summary.instances_of_subtrees(selection.class_iris.iter().map(String::as_str))?)
    };

    let pid = store
        .lookup_iri(&selection.property_iri)
        .ok_or_else(unknown)?;
    let mut tally = MalformedTally::default();
    let mut subjects: Vec<Term> = Vec::new();
    let mut local: std::collections::HashMap<TermId, u32> = std::collections::HashMap::new();
    let mut points = Vec::new();
    let mut excluded = 0u64;
    for &pos in store.positions_with_predicate(pid) {
        let t = store.encoded_at(pos);
        if let Some(allowed) = &allowed {
            if !allowed.contains(&t.subject) {
                continue;
            }
        }
        let value = match store
            .term(t.object)
            .as_literal()
            .map(|l| literal_value(l, &mut tally))
        {
            Some(v) if v.kind() == Some(kind) => {
                v.axis_value().expect("typed values have an axis position")
            }
            _ => {
                excluded += 1;
                continue;
            }
        };
        let next = subjects.len() as u32;
        let subject = *local.entry(t.subject).or_insert_with(|| {
            subjects.push(store.term(t.subject).clone());
            next
        });
        points.push(Point {
            subject,
            value,
            source: pos,
        });
    }
    Ok(PointSet::new(kind, subjects, points).with_excluded(excluded))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::infer_schema;
    use crate::store::{ingest, RdfFormat};

    const DATA: &str = r#"
@prefix ex: <http://ex/> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
ex:EU rdfs:subClassOf ex:Country .
ex:a a ex:EU ; ex:pop 10, 20 .
ex:b a ex:Country ; ex:pop 5 .
ex:c ex:pop 7 ; ex:pop "n/a" ; ex:label "x" .
ex:d a ex:Country ; ex:founded "1990-10-03"^^xsd:date .
"#;

    fn setup() -> (TripleStore, SchemaSummary) {
        let store = ingest(DATA.as_bytes(), RdfFormat::Turtle).unwrap();
        let summary = infer_schema(&store);
        (store, summary)
    }

    #[test]
    fn catalog_contents() {
        let (store, summary) = setup();
        let cat = build_facets(&store, &summary);
        let iris: Vec<_> = cat.property_facets.iter().map(|f| f.iri.as_str()).collect();
        assert_eq!(iris, ["http://ex/founded", "http://ex/pop"]);
        let pop = cat.property("http://ex/pop").unwrap();
        assert_eq!((pop.triple_count, pop.skipped_literals), (5, 1));
        assert_eq!(
            (pop.min, pop.max),
            (Some(AxisNumber(5.0)), Some(AxisNumber(20.0)))
        );
        let founded = cat.property("http://ex/founded").unwrap();
        assert_eq!(founded.min_iso.as_deref(), Some("1990-10-03T00:00:00.000Z"));
        assert_eq!(cat.class_facets.len(), 1);
        assert_eq!(cat.class_facets[0].iri, "http://ex/Country");
        assert_eq!(cat.class_facets[0].instance_count, 3);
        assert_eq!(cat.class_facets[0].children[0].instance_count, 1);
    }

    #[test]
    fn no_literal_properties_means_no_property_facets() {
        let store = ingest(
            "<http://ex/a> <http://ex/p> <http://ex/b> .".as_bytes(),
            RdfFormat::NTriples,
        )
        .unwrap();
        let summary = infer_schema(&store);
        assert!(build_facets(&store, &summary).property_facets.is_empty());
    }

    #[test]
    fn unfiltered_selection_takes_every_parseable_value() {
        let (store, summary) = setup();
        let ps = resolve_selection(&store, &summary, &FacetSelection::property("http://ex/pop"))
            .unwrap();
        assert_eq!(ps.len(), 4);
        assert_eq!(ps.excluded(), 1);
        // ex:a has two values and contributes two points
        let a_points = ps
            .points()
            .iter()
            .filter(|p| ps.subject(p).lexical() == "http://ex/a")
            .count();
        assert_eq!(a_points, 2);
    }

    #[test]
    fn class_filter_uses_subtrees() {
        let (store, summary) = setup();
        let sel = FacetSelection::property("http://ex/pop").with_classes(["http://ex/EU"]);
        let mut values: Vec<f64> = resolve_selection(&store, &summary, &sel)
            .unwrap()
            .points()
            .iter()
            .map(|p| p.value)
            .collect();
        values.sort_by(f64::total_cmp);
        assert_eq!(values, [10.0, 20.0]);
        let sel = FacetSelection::property("http://ex/pop").with_classes(["http://ex/Country"]);
        assert_eq!(resolve_selection(&store, &summary, &sel).unwrap().len(), 3);
    }

    #[test]
    fn errors() {
        let (store, summary) = setup();
        let err = resolve_selection(
            &store,
            &summary,
            &FacetSelection::property("http://ex/label"),
        )
        .unwrap_err();
        assert_eq!(err, FacetError::UnknownProperty("http://ex/label".into()));
        let sel = FacetSelection::property("http://ex/pop").with_classes(["http://ex/Nope"]);
        assert_eq!(
            resolve_selection(&store, &summary, &sel).unwrap_err(),
            FacetError::UnknownClass("http://ex/Nope".into())
        );
    }
}
