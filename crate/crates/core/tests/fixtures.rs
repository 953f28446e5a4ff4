//! Hand-counted expectations for the bundled fixtures.

use std::path::PathBuf;

use synopsviz_core::hierarchy::{Closure, HierarchyConfig, Strategy};
use synopsviz_core::metadata::Category;
use synopsviz_core::schema::{LiteralKind, PropertyKind};
use synopsviz_core::{
    build_facets, build_hierarchy, build_treemap, compute_dataset_stats, extract_metadata,
    infer_schema, ingest_path, resolve_selection, FacetSelection, IngestOptions, TripleStore,
    TypedValue,
};

fn fixture(name: &str) -> TripleStore {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    ingest_path(&path, None, &IngestOptions::default()).unwrap()
}

const EX: &str = "http://example.org/";

#[test]
fn small_nt_counts() {
    let store = fixture("small.nt");
    let r = store.report();
    assert_eq!(store.len(), 50);
    assert_eq!(r.skipped, 3);
    assert_eq!(r.parsed + r.skipped + r.duplicates, r.statements);
    assert_eq!(r.errors.len(), 3);
    let pop = store.triples_with_predicate(&format!("{EX}population"));
    assert_eq!(pop.len(), 12);
    let mut subjects: Vec<&str> = pop.iter().map(|t| t.subject.lexical()).collect();
    let sorted = {
        let mut s = subjects.clone();
        s.sort();
        s
    };
    assert_eq!(subjects, sorted);
    subjects.dedup();
    assert_eq!(subjects.len(), 12);
}

#[test]
fn zoo_schema() {
    let store = fixture("zoo.ttl");
    let summary = infer_schema(&store);
    let animal = summary.class(&format!("{EX}Animal")).unwrap();
    assert_eq!(
        (
            animal.direct_instance_count,
            animal.transitive_instance_count
        ),
        (2, 5)
    );
    let dog = summary.class(&format!("{EX}Dog")).unwrap();
    assert_eq!(
        (dog.direct_instance_count, dog.transitive_instance_count),
        (3, 3)
    );
    let subtree: Vec<String> = summary
        .subtree_of(&format!("{EX}Animal"))
        .unwrap()
        .into_iter()
        .collect();
    assert_eq!(subtree, [format!("{EX}Animal"), format!("{EX}Dog")]);
    let weight = summary.property(&format!("{EX}weight")).unwrap();
    assert_eq!(weight.kind, PropertyKind::Datatype);
    assert_eq!(weight.literal_kind, Some(LiteralKind::Numeric));
    assert_eq!(weight.value_min, Some(TypedValue::Numeric(0.4)));
    assert_eq!(weight.value_max, Some(TypedValue::Numeric(140.0)));
}

#[test]
fn zoo_treemap() {
    let store = fixture("zoo.ttl");
    let summary = infer_schema(&store);
    let t = build_treemap(&store, &summary, Some(&format!("{EX}Animal")), None).unwrap();
    assert_eq!(t.weight, 5);
    assert_eq!(t.children.len(), 1);
    assert_eq!(t.children[0].weight, 3);
    let details = t.property_details.as_ref().unwrap();
    let weight = details
        .iter()
        .find(|d| d.iri == format!("{EX}weight"))
        .unwrap();
    assert_eq!(weight.cardinality, 5);
    let keeper = details
        .iter()
        .find(|d| d.iri == format!("{EX}keeper"))
        .unwrap();
    assert_eq!((keeper.cardinality, keeper.value_min), (4, None));
    assert_eq!((t.datatype_property_count, t.object_property_count), (2, 1));
}

#[test]
fn countries_facets() {
    let store = fixture("countries.nt");
    let summary = infer_schema(&store);
    let catalog = build_facets(&store, &summary);
    let iris: Vec<&str> = catalog
        .property_facets
        .iter()
        .map(|f| f.iri.as_str())
        .collect();
    assert_eq!(iris, [format!("{EX}founded"), format!("{EX}population")]);
    let pop = catalog.property(&format!("{EX}population")).unwrap();
    assert_eq!((pop.triple_count, pop.distinct_subject_count), (10, 10));
    let founded = catalog.property(&format!("{EX}founded")).unwrap();
    assert_eq!(founded.triple_count, 6);
    assert_eq!(founded.min_iso.as_deref(), Some("0843-08-10T00:00:00.000Z"));
    assert_eq!(founded.max_iso.as_deref(), Some("1922-12-06T00:00:00.000Z"));
    assert_eq!(catalog.class_facets.len(), 1);
    assert_eq!(catalog.class_facets[0].instance_count, 10);
    assert_eq!(catalog.class_facets[0].children[0].instance_count, 6);

    let eu = FacetSelection::property(format!("{EX}population"))
        .with_classes([format!("{EX}EUCountry")]);
    assert_eq!(resolve_selection(&store, &summary, &eu).unwrap().len(), 6);
}

#[test]
fn countries_stats() {
    let store = fixture("countries.nt");
    let summary = infer_schema(&store);
    let s = compute_dataset_stats(&store, &summary, 3);
    assert_eq!(s.data_level.triple_count, 50);
    assert_eq!(s.data_level.same_as_triple_count, 2);
    assert_eq!(s.data_level.typed_entity_count, 10);
    // two dbpedia IRIs are untyped entities
    assert_eq!(s.data_level.untyped_entity_count, 2);
    assert_eq!(s.schema_level.class_count, 2);
    assert_eq!(s.schema_level.top_classes[0].iri, format!("{EX}EUCountry"));
    assert_eq!(
        s.structure_level.top_out_degree_entities[0].iri,
        format!("{EX}country/France")
    );
    assert_eq!(s.structure_level.top_out_degree_entities[0].count, 6);
    assert_eq!(
        s.structure_level.top_in_degree_entities[0].iri,
        format!("{EX}EUCountry")
    );
}

#[test]
fn void_sample_metadata() {
    let store = fixture("void-sample.ttl");
    let m = extract_metadata(&store);
    assert_eq!(m.entries.len(), 8);
    assert!(m.from_dataset_descriptions);
    let count = |c: Category| m.entries.iter().filter(|e| e.category == c).count();
    assert_eq!(count(Category::Licensing), 1);
    assert_eq!(count(Category::Provenance), 2);
    assert_eq!(count(Category::Availability), 2);
    assert_eq!(count(Category::Description), 3);
    assert_eq!(m.same_as_triple_count, 1);
    for e in &m.entries {
        let t = store.triples().find(|t| {
            t.subject.display_text() == e.subject_iri
                && t.predicate.lexical() == e.predicate_iri
                && *t.object == e.value
        });
        assert!(t.is_some(), "{e:?} is not a store triple");
    }
}

#[test]
fn range10_equal_width() {
    let store = fixture("range10.nt");
    let summary = infer_schema(&store);
    let points = resolve_selection(
        &store,
        &summary,
        &FacetSelection::property(format!("{EX}value")),
    )
    .unwrap();
    let tree = build_hierarchy(points, HierarchyConfig::new(Strategy::EqualWidth, 1, 2)).unwrap();
    let kids = tree.children_of("").unwrap();
    assert_eq!(kids.len(), 2);
    assert_eq!(
        (kids[0].lo, kids[0].hi, kids[0].closure, kids[0].stats.count),
        (1.0, 5.5, Closure::HalfOpen, 5)
    );
    assert_eq!(
        (kids[1].lo, kids[1].hi, kids[1].closure, kids[1].stats.count),
        (5.5, 10.0, Closure::Closed, 5)
    );
    let leaf: Vec<f64> = tree
        .points_of("1")
        .unwrap()
        .iter()
        .map(|p| p.value)
        .collect();
    assert_eq!(leaf, [6.0, 7.0, 8.0, 9.0, 10.0]);
}
